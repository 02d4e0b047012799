//! Newton-Raphson with static condensation, clamped iterates for singular
//! pressures, and adaptive backward-Euler time stepping.

mod linear;
mod schur;

pub use linear::{bandwidth, fill_reducing_order, reverse_cuthill_mckee, BandedLu};
pub use schur::{schur_solve, SchurSolver};

use crate::assembly::{DofVector, JacobianBlocks, NonlinearSystem};
use crate::error::{Error, Result};

/// Newton iteration controls.
#[derive(Debug, Clone, Copy)]
pub struct NewtonConfig {
    /// Convergence threshold on the max-norm of the increment.
    pub tol_inc: f64,
    /// Early-exit threshold on the max-norm of the residual; catches exact
    /// fixed points and linear problems without a second solve.
    pub tol_res: f64,
    pub max_iter: usize,
    /// Positivity floor for singular pressure laws; iterates and boundary
    /// data are kept at or above this value.
    pub clamp_floor: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig { tol_inc: 1e-10, tol_res: 1e-12, max_iter: 30, clamp_floor: 1e-10 }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_inc > 0.0) || !(self.tol_res >= 0.0) {
            return Err(Error::InvalidConfig("Newton tolerances must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("Newton needs at least one iteration".into()));
        }
        if !(self.clamp_floor > 0.0 && self.clamp_floor < 1.0) {
            return Err(Error::InvalidConfig("clamp floor must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Adaptive time step policy: grow after success, shrink and retry after a
/// Newton failure, abort after too many consecutive failures.
#[derive(Debug, Clone, Copy)]
pub struct TimeStepper {
    pub dt_init: f64,
    pub dt_max: f64,
    pub growth: f64,
    pub shrink: f64,
    pub max_failures: usize,
}

impl TimeStepper {
    pub fn new(dt_init: f64, dt_max: f64) -> Self {
        TimeStepper { dt_init, dt_max, growth: 2.0, shrink: 0.5, max_failures: 20 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt_init > 0.0 && self.dt_init <= self.dt_max) {
            return Err(Error::InvalidConfig(
                "time stepper needs 0 < dt_init <= dt_max".into(),
            ));
        }
        if !(self.growth > 1.0) || !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::InvalidConfig(
                "time stepper needs growth > 1 > shrink > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of one Newton solve.
#[derive(Debug, Clone, Copy)]
pub struct NewtonResult {
    /// Number of linear solves performed.
    pub iters: usize,
    /// Max-norm of the residual at the accepted iterate.
    pub residual_inf: f64,
}

/// Reusable buffers for the Newton loop on one mesh.
pub struct NewtonWorkspace {
    blocks: JacobianBlocks,
    residual: DofVector,
    linear: SchurSolver,
}

impl NewtonWorkspace {
    pub fn new(mesh: &crate::mesh::Mesh) -> Self {
        NewtonWorkspace {
            blocks: JacobianBlocks::new(mesh),
            residual: DofVector::zeros(mesh),
            linear: SchurSolver::new(mesh),
        }
    }
}

fn clamp_state(u: &mut DofVector, floor: f64) {
    for v in u.cell.iter_mut().chain(u.vertex.iter_mut()) {
        if *v < floor {
            *v = floor;
        }
    }
}

/// Solves one backward-Euler step by Newton-Raphson with condensation.
///
/// Convergence is tested on the max-norm of the increment; a residual
/// max-norm below `tol_res` exits early (zero-residual starts converge with
/// no linear solve, exactly linear problems with one). For singular models
/// the initial guess and every iterate are clamped at the floor.
pub fn newton_solve<S: NonlinearSystem>(
    system: &S,
    u_prev: &DofVector,
    dt: f64,
    t_new: f64,
    cfg: &NewtonConfig,
    ws: &mut NewtonWorkspace,
) -> Result<(DofVector, NewtonResult)> {
    let floor = system.needs_clamping().then_some(cfg.clamp_floor);
    let mut u = u_prev.clone();
    if let Some(eps) = floor {
        clamp_state(&mut u, eps);
    }
    if let Some(bc) = system.dirichlet() {
        bc.impose(system.mesh(), t_new, floor, &mut u);
    }

    let mut last_inc = f64::INFINITY;
    for iter in 0..cfg.max_iter {
        system.residual(&u, u_prev, dt, t_new, floor, &mut ws.residual)?;
        let res_inf = ws.residual.inf_norm();
        if res_inf <= cfg.tol_res {
            return Ok((u, NewtonResult { iters: iter, residual_inf: res_inf }));
        }
        system.assemble(&u, u_prev, dt, t_new, floor, &mut ws.blocks)?;
        let delta = ws.linear.solve(system.mesh(), &ws.blocks)?;
        if !delta.all_finite() {
            return Err(Error::NewtonDiverged {
                max_iter: iter + 1,
                increment: f64::INFINITY,
            });
        }
        // convergence is measured on the variation of the unknowns, i.e.
        // after the clamp: dofs pinned at the floor do not count as moving
        let mut inc = 0.0f64;
        let eps = floor.unwrap_or(f64::NEG_INFINITY);
        for (a, b) in u.cell.iter_mut().zip(&delta.cell) {
            let new = (*a + b).max(eps);
            inc = inc.max((new - *a).abs());
            *a = new;
        }
        for (a, b) in u.vertex.iter_mut().zip(&delta.vertex) {
            let new = (*a + b).max(eps);
            inc = inc.max((new - *a).abs());
            *a = new;
        }
        last_inc = inc;
        if last_inc <= cfg.tol_inc {
            system.residual(&u, u_prev, dt, t_new, floor, &mut ws.residual)?;
            let res_inf = ws.residual.inf_norm();
            return Ok((u, NewtonResult { iters: iter + 1, residual_inf: res_inf }));
        }
    }
    Err(Error::NewtonDiverged { max_iter: cfg.max_iter, increment: last_inc })
}

/// Outcome of one accepted time step.
#[derive(Debug, Clone, Copy)]
pub struct AdvanceResult {
    pub dt_used: f64,
    /// Step size to try next.
    pub dt_next: f64,
    pub newton: NewtonResult,
    /// Newton failures absorbed before this step was accepted.
    pub failures: usize,
}

/// Advances one accepted step from `t`, shrinking the step on Newton
/// failures and truncating the last step to land exactly on the horizon.
#[allow(clippy::too_many_arguments)]
pub fn advance<S: NonlinearSystem>(
    system: &S,
    u_prev: &DofVector,
    t: f64,
    remaining: f64,
    dt_current: f64,
    stepper: &TimeStepper,
    cfg: &NewtonConfig,
    ws: &mut NewtonWorkspace,
) -> Result<(DofVector, AdvanceResult)> {
    let mut dt_try = dt_current.min(stepper.dt_max);
    let mut failures = 0usize;
    loop {
        let dt_used = dt_try.min(remaining);
        match newton_solve(system, u_prev, dt_used, t + dt_used, cfg, ws) {
            Ok((u, newton)) => {
                let dt_next = (dt_try * stepper.growth).min(stepper.dt_max);
                return Ok((u, AdvanceResult { dt_used, dt_next, newton, failures }));
            }
            Err(Error::NewtonDiverged { .. }) | Err(Error::LinearSolve(_))
            | Err(Error::SingularCellBlock { .. }) => {
                failures += 1;
                if failures > stepper.max_failures {
                    return Err(Error::SolverAbort { t, dt: dt_try, failures });
                }
                dt_try *= stepper.shrink;
            }
            Err(other) => return Err(other),
        }
    }
}

/// Per-state diagnostics logged at every accepted step.
#[derive(Debug, Clone, Copy)]
pub struct StepStats {
    pub energy: f64,
    pub dissipation: f64,
    pub mass: f64,
    pub u_min: f64,
}

/// One row of the solve report.
#[derive(Debug, Clone, Copy)]
pub struct StepRecord {
    pub t: f64,
    pub dt: f64,
    pub newton_iters: usize,
    pub energy: f64,
    pub dissipation: f64,
    pub mass: f64,
    pub u_min: f64,
}

/// Time series of the per-step diagnostics plus totals.
#[derive(Debug, Clone, Default)]
pub struct SolveReport {
    pub steps: Vec<StepRecord>,
    pub newton_total: usize,
    pub failures_total: usize,
}

/// States at all accepted times, starting with the initial state.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DofVector>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> &DofVector {
        self.states.last().expect("trajectory holds the initial state")
    }
}

/// How per-state diagnostics are computed for the report.
pub trait Diagnosed: NonlinearSystem {
    fn stats(&self, u: &DofVector) -> StepStats;
}

impl<'a> Diagnosed for crate::assembly::System<'a> {
    fn stats(&self, u: &DofVector) -> StepStats {
        let energy =
            crate::assembly::discrete_energy(u, self.model, &self.potential_vec, self.lumped);
        // the dissipation evaluates the pressure at every dof, which is
        // undefined for nonpositive states of singular models (raw initial
        // data, or any state of the linear scheme whose updates are not
        // clamped)
        let admissible = !self.model.singular() || u.iter().all(|v| v > 0.0);
        let dissipation = if admissible {
            crate::assembly::dissipation(
                u,
                self.model,
                &self.potential_vec,
                self.mesh,
                self.stiffness,
            )
        } else {
            f64::NAN
        };
        StepStats {
            energy,
            dissipation,
            mass: u.lumped_mass(self.lumped),
            u_min: u.min(),
        }
    }
}

impl<'a> Diagnosed for crate::assembly::PressureSystem<'a> {
    fn stats(&self, p: &DofVector) -> StepStats {
        StepStats {
            energy: f64::NAN,
            dissipation: f64::NAN,
            mass: self.derived_mass(p),
            u_min: self.derived_u_bounds(p).0,
        }
    }
}

/// Marches the system from the initial state to the horizon, recording
/// diagnostics at every accepted step.
pub fn run_transient<S: Diagnosed>(
    system: &S,
    u0: DofVector,
    t_final: f64,
    stepper: &TimeStepper,
    cfg: &NewtonConfig,
) -> Result<(Trajectory, SolveReport)> {
    run_transient_with_checkpoints(system, u0, t_final, stepper, cfg, &[])
}

/// Like [`run_transient`], but steps are truncated so that every checkpoint
/// time is hit exactly by an accepted state.
pub fn run_transient_with_checkpoints<S: Diagnosed>(
    system: &S,
    u0: DofVector,
    t_final: f64,
    stepper: &TimeStepper,
    cfg: &NewtonConfig,
    checkpoints: &[f64],
) -> Result<(Trajectory, SolveReport)> {
    stepper.validate()?;
    cfg.validate()?;
    if !(t_final >= 0.0) {
        return Err(Error::InvalidConfig("final time must be nonnegative".into()));
    }
    let mut marks: Vec<f64> = checkpoints
        .iter()
        .copied()
        .filter(|&c| c > 0.0 && c < t_final)
        .collect();
    marks.sort_by(f64::total_cmp);
    marks.dedup();
    let mesh = system.mesh();
    let mut ws = NewtonWorkspace::new(mesh);

    let mut report = SolveReport::default();
    let s0 = system.stats(&u0);
    report.steps.push(StepRecord {
        t: 0.0,
        dt: 0.0,
        newton_iters: 0,
        energy: s0.energy,
        dissipation: s0.dissipation,
        mass: s0.mass,
        u_min: s0.u_min,
    });
    let mut trajectory = Trajectory { times: vec![0.0], states: vec![u0] };

    let mut t = 0.0;
    let mut dt_current = stepper.dt_init;
    while t < t_final {
        let next_mark = marks
            .iter()
            .copied()
            .find(|&c| c > t + 1e-14 * t_final)
            .unwrap_or(t_final);
        let remaining = next_mark - t;
        let u_prev = trajectory.last_state();
        let (u, adv) =
            advance(system, u_prev, t, remaining, dt_current, stepper, cfg, &mut ws)?;
        t = if adv.dt_used >= remaining { next_mark } else { t + adv.dt_used };
        dt_current = adv.dt_next;
        report.newton_total += adv.newton.iters;
        report.failures_total += adv.failures;
        let stats = system.stats(&u);
        report.steps.push(StepRecord {
            t,
            dt: adv.dt_used,
            newton_iters: adv.newton.iters,
            energy: stats.energy,
            dissipation: stats.dissipation,
            mass: stats.mass,
            u_min: stats.u_min,
        });
        trajectory.times.push(t);
        trajectory.states.push(u);
    }
    Ok((trajectory, report))
}
