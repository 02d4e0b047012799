//! Turns a [`RunConfig`] into core objects, executes the transient solve and
//! writes the output artifacts.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::Matrix2;
use vagflow_core::assembly::{
    assemble_stiffness, discretize_initial, sample_gibbs, BoundaryValue, DirichletBc,
    DofVector, FluxScheme, PressureSystem, StiffnessSet, System,
};
use vagflow_core::diagnostics::{error_norms, ErrorTriple};
use vagflow_core::error::{Error, Result};
use vagflow_core::mesh::{
    build_submesh, compute_lumping, generate_structured, mesh_quality, parse_mesh,
    LumpedMeasures, LumpingRule, Mesh, QualityReport, Submesh,
};
use vagflow_core::physics::{
    gibbs_state, t1_steady, CatalogModel, ExactSolution, HeteroModel, LogPressureLaw,
    Model, Potential, TensorField,
};
use vagflow_core::solver::{
    run_transient_with_checkpoints, NewtonConfig, SolveReport, TimeStepper, Trajectory,
};

use crate::config::{
    BcKind, BcValue, ExactChoice, InitKind, MeshSource, ModelChoice, RunConfig,
    SchemeChoice,
};
use crate::tables::{fmt17, CsvTable};

/// Everything a run produces, in memory.
pub struct RunOutcome {
    pub mesh: Mesh,
    pub quality: QualityReport,
    pub trajectory: Trajectory,
    pub report: SolveReport,
    pub errors: Option<ErrorTriple>,
    pub entropy: Option<Vec<(f64, f64)>>,
    /// Snapshot fields (time, rows of x, y, u), heterogeneous runs only.
    pub snapshots: Vec<(f64, Vec<(f64, f64, f64)>)>,
    pub n_vertices: usize,
    /// Minimum dof value over all accepted steps (initial data excluded);
    /// heterogeneous runs report the derived state.
    pub u_min: f64,
    pub newton_total: usize,
}

pub fn build_mesh(cfg: &RunConfig) -> Result<Mesh> {
    let mut mesh = match &cfg.mesh {
        MeshSource::Generate { kind, n, distortion } => {
            generate_structured(*kind, *n, Some(*distortion))?
        }
        MeshSource::File { path } => {
            let text = fs::read_to_string(path).map_err(|e| {
                Error::InvalidConfig(format!("cannot read mesh {path}: {e}"))
            })?;
            parse_mesh(&text)?
        }
    };
    if let Some(y_split) = cfg.barrier_above_y {
        let tags: Vec<u32> = mesh
            .cells()
            .iter()
            .map(|c| if c.center.y > y_split { 2 } else { 1 })
            .collect();
        mesh.retag(&tags)?;
    }
    Ok(mesh)
}

fn exact_solution(cfg: &RunConfig) -> Option<ExactSolution> {
    let (lx, ly) = cfg.tensor.get(&0).copied().unwrap_or((1.0, 1.0));
    match cfg.exact {
        ExactChoice::None => None,
        ExactChoice::T1 => Some(ExactSolution::T1 { lx, g: cfg.gravity }),
        ExactChoice::T2OneD => Some(ExactSolution::T2OneD { lx }),
        ExactChoice::T2TwoD => Some(ExactSolution::T2TwoD { lx, ly }),
        ExactChoice::T3 => Some(ExactSolution::T3 { lx, g: cfg.gravity }),
    }
}

fn dirichlet_entries(
    cfg: &RunConfig,
    mesh: &Mesh,
    exact: Option<ExactSolution>,
) -> Result<Vec<(usize, BoundaryValue)>> {
    let mut entries: Vec<(usize, BoundaryValue)> = Vec::new();
    let mut taken = vec![false; mesh.n_vertices()];
    for &side in &cfg.bc_sides {
        let value = match cfg.bc_side_values.get(&side) {
            Some(&c) => BoundaryValue::Const(c),
            None => match cfg.bc_value {
                BcValue::Const(c) => BoundaryValue::Const(c),
                BcValue::Exact => BoundaryValue::Exact(exact.ok_or_else(|| {
                    Error::InvalidConfig("bc.value = exact without a solution".into())
                })?),
            },
        };
        for v in mesh.boundary_vertices_where(|p| side.contains(p)) {
            if !taken[v] {
                taken[v] = true;
                entries.push((v, value));
            }
        }
    }
    if entries.is_empty() {
        return Err(Error::InvalidConfig(
            "bc.sides selected no boundary vertices".into(),
        ));
    }
    Ok(entries)
}

fn stepper(cfg: &RunConfig) -> TimeStepper {
    TimeStepper {
        dt_init: cfg.dt_init,
        dt_max: cfg.dt_max,
        growth: cfg.growth,
        shrink: cfg.shrink,
        max_failures: cfg.max_failures,
    }
}

fn newton(cfg: &RunConfig) -> NewtonConfig {
    NewtonConfig {
        tol_inc: cfg.newton_tol,
        tol_res: cfg.newton_tol_res,
        max_iter: cfg.newton_max_iter,
        clamp_floor: cfg.newton_eps,
    }
}

struct Discretization {
    mesh: Mesh,
    submesh: Submesh,
    lumped: LumpedMeasures,
    quality: QualityReport,
}

fn discretize(cfg: &RunConfig) -> Result<Discretization> {
    let mesh = build_mesh(cfg)?;
    let submesh = build_submesh(&mesh)?;
    let lumped = compute_lumping(&mesh, &LumpingRule::UniformFraction(cfg.lumping_fraction))?;
    let quality = mesh_quality(&mesh, &submesh, &lumped);
    Ok(Discretization { mesh, submesh, lumped, quality })
}

fn tensor_field(cfg: &RunConfig) -> Result<TensorField> {
    if cfg.tensor.len() == 1 && cfg.tensor.contains_key(&0) {
        let (lx, ly) = cfg.tensor[&0];
        TensorField::diagonal(lx, ly)
    } else {
        let map: BTreeMap<u32, Matrix2<f64>> = cfg
            .tensor
            .iter()
            .map(|(&tag, &(lx, ly))| (tag, Matrix2::new(lx, 0.0, 0.0, ly)))
            .collect();
        TensorField::by_tag(map)
    }
}

/// Executes a configured run.
pub fn execute(cfg: &RunConfig) -> Result<RunOutcome> {
    match &cfg.model {
        ModelChoice::HeteroLog { coefs } => execute_hetero(cfg, coefs),
        ModelChoice::Catalog(which) => execute_standard(cfg, *which),
    }
}

fn execute_standard(cfg: &RunConfig, which: CatalogModel) -> Result<RunOutcome> {
    let disc = discretize(cfg)?;
    let tensor = tensor_field(cfg)?;
    let stiffness: StiffnessSet = assemble_stiffness(&disc.mesh, &disc.submesh, &tensor)?;
    let mut quality = disc.quality;
    quality.cond_range = Some(stiffness.cond_range);

    let model = Model::catalog(which);
    let potential = Potential::gravity(cfg.gravity);
    let exact = exact_solution(cfg);
    let dirichlet = match cfg.bc_kind {
        BcKind::NoFlux => None,
        BcKind::Dirichlet => Some(DirichletBc::new(
            &disc.mesh,
            dirichlet_entries(cfg, &disc.mesh, exact)?,
        )?),
    };
    let scheme = match cfg.scheme {
        SchemeChoice::Nonlinear => FluxScheme::Nonlinear,
        SchemeChoice::Linear => FluxScheme::Linear,
        SchemeChoice::Quasilinear => FluxScheme::Quasilinear,
    };
    let u0 = match cfg.init {
        InitKind::Exact => {
            let sol = exact.ok_or_else(|| {
                Error::InvalidConfig("init.kind = exact without a solution".into())
            })?;
            discretize_initial(&disc.mesh, |x| sol.eval(x, 0.0))?
        }
        InitKind::Const(c) => {
            if c < 0.0 {
                return Err(Error::InvalidConfig("negative initial constant".into()));
            }
            DofVector::constant(&disc.mesh, c)
        }
        InitKind::Gibbs { mass } => {
            let w = gibbs_state(&model, &potential, mass)?;
            sample_gibbs(&disc.mesh, &w)
        }
    };

    let system = System::new(
        &disc.mesh,
        &disc.lumped,
        &stiffness,
        scheme,
        &model,
        &potential,
        dirichlet,
    );
    let (trajectory, report) = run_transient_with_checkpoints(
        &system,
        u0,
        cfg.t_final,
        &stepper(cfg),
        &newton(cfg),
        &cfg.snapshots,
    )?;

    let errors =
        exact.map(|sol| error_norms(&trajectory, |x, t| sol.eval(x, t), &disc.mesh, &disc.lumped));
    let entropy = if cfg.write_entropy {
        let w = sample_gibbs(&disc.mesh, &t1_steady(cfg.gravity));
        let mut series = Vec::with_capacity(trajectory.len());
        for (state, &t) in trajectory.states.iter().zip(&trajectory.times) {
            let e = vagflow_core::assembly::relative_entropy(state, &w, &disc.lumped)?;
            series.push((t, e));
        }
        Some(series)
    } else {
        None
    };

    let u_min = report
        .steps
        .iter()
        .skip(1)
        .map(|s| s.u_min)
        .fold(f64::INFINITY, f64::min)
        .min(if report.steps.len() == 1 { report.steps[0].u_min } else { f64::INFINITY });
    Ok(RunOutcome {
        n_vertices: disc.mesh.n_vertices(),
        newton_total: report.newton_total,
        mesh: disc.mesh,
        quality,
        errors,
        entropy,
        snapshots: Vec::new(),
        u_min,
        trajectory,
        report,
    })
}

fn execute_hetero(cfg: &RunConfig, coefs: &BTreeMap<u32, f64>) -> Result<RunOutcome> {
    let disc = discretize(cfg)?;
    let tensor = tensor_field(cfg)?;
    let stiffness = assemble_stiffness(&disc.mesh, &disc.submesh, &tensor)?;
    let mut quality = disc.quality;
    quality.cond_range = Some(stiffness.cond_range);

    let laws: BTreeMap<u32, LogPressureLaw> = coefs
        .iter()
        .map(|(&tag, &coef)| (tag, LogPressureLaw { coef }))
        .collect();
    let hetero = HeteroModel::new(laws)?;
    let dirichlet =
        DirichletBc::new(&disc.mesh, dirichlet_entries(cfg, &disc.mesh, None)?)?;
    let system =
        PressureSystem::new(&disc.mesh, &disc.lumped, &stiffness, &hetero, dirichlet)?;

    let InitKind::Const(p0_value) = cfg.init else {
        return Err(Error::InvalidConfig("hetero runs start from constant pressure".into()));
    };
    let p0 = DofVector::constant(&disc.mesh, p0_value);
    let (trajectory, report) = run_transient_with_checkpoints(
        &system,
        p0,
        cfg.t_final,
        &stepper(cfg),
        &newton(cfg),
        &cfg.snapshots,
    )?;

    // derived-state field dumps at the checkpoint times
    let mut snapshots = Vec::new();
    for &ts in &cfg.snapshots {
        let idx = trajectory
            .times
            .iter()
            .position(|&t| (t - ts).abs() <= 1e-12 * cfg.t_final.max(1.0))
            .ok_or_else(|| {
                Error::InvalidConfig(format!("snapshot time {ts} was not reached"))
            })?;
        let p = &trajectory.states[idx];
        let mut rows = Vec::new();
        for (ci, cell) in disc.mesh.cells().iter().enumerate() {
            let law = hetero.law(cell.tag)?;
            let c = cell.center;
            rows.push((c.x, c.y, law.u_of_p(p.cell[ci])));
            for &v in &cell.vertices {
                let x = disc.mesh.vertex(v);
                rows.push((x.x, x.y, system.derived_u_at(p, ci, v)));
            }
        }
        snapshots.push((trajectory.times[idx], rows));
    }

    let u_min = report
        .steps
        .iter()
        .skip(1)
        .map(|s| s.u_min)
        .fold(f64::INFINITY, f64::min)
        .min(if report.steps.len() == 1 { report.steps[0].u_min } else { f64::INFINITY });
    Ok(RunOutcome {
        n_vertices: disc.mesh.n_vertices(),
        newton_total: report.newton_total,
        mesh: disc.mesh,
        quality,
        errors: None,
        entropy: None,
        snapshots,
        u_min,
        trajectory,
        report,
    })
}

/// Writes report.csv, summary.csv, entropy.dat and snapshot fields into the
/// output directory.
pub fn write_artifacts(cfg: &RunConfig, out: &RunOutcome, dir: &Path) -> Result<()> {
    let io_err =
        |e: std::io::Error| Error::InvalidConfig(format!("cannot write output: {e}"));
    fs::create_dir_all(dir).map_err(io_err)?;

    if cfg.write_report {
        let mut table = CsvTable::new(vec![
            "t",
            "dt",
            "newton_iters",
            "energy",
            "dissipation",
            "mass",
            "u_min",
        ]);
        let last = out.report.steps.len().saturating_sub(1);
        for (i, s) in out.report.steps.iter().enumerate() {
            if i % cfg.trajectory_stride != 0 && i != last {
                continue;
            }
            table.push_row(vec![
                fmt17(s.t),
                fmt17(s.dt),
                s.newton_iters.to_string(),
                fmt17(s.energy),
                fmt17(s.dissipation),
                fmt17(s.mass),
                fmt17(s.u_min),
            ]);
        }
        fs::write(dir.join("report.csv"), table.to_string()).map_err(io_err)?;
    }

    if cfg.write_summary {
        let mut table = CsvTable::new(vec![
            "h",
            "n_vertices",
            "dt_init",
            "dt_max",
            "err_l2",
            "err_l1",
            "err_linf",
            "u_min",
            "newton_total",
        ]);
        table.push_row(summary_row(cfg, out));
        fs::write(dir.join("summary.csv"), table.to_string()).map_err(io_err)?;
    }

    if let Some(series) = &out.entropy {
        let mut text = String::new();
        for &(t, e) in series {
            text.push_str(&format!("{} {}\n", fmt17(t), fmt17(e)));
        }
        fs::write(dir.join("entropy.dat"), text).map_err(io_err)?;
    }

    for (t, rows) in &out.snapshots {
        let mut text = format!("# u(p, x) at t = {}\n", fmt17(*t));
        for &(x, y, u) in rows {
            text.push_str(&format!("{} {} {}\n", fmt17(x), fmt17(y), fmt17(u)));
        }
        fs::write(dir.join(format!("u_t{t:.4}.dat")), text).map_err(io_err)?;
    }
    Ok(())
}

pub fn summary_row(cfg: &RunConfig, out: &RunOutcome) -> Vec<String> {
    let err = out.errors;
    vec![
        fmt17(out.quality.h),
        out.n_vertices.to_string(),
        fmt17(cfg.dt_init),
        fmt17(cfg.dt_max),
        fmt17(err.map_or(f64::NAN, |e| e.l2)),
        fmt17(err.map_or(f64::NAN, |e| e.l1)),
        fmt17(err.map_or(f64::NAN, |e| e.linf)),
        fmt17(out.u_min),
        out.newton_total.to_string(),
    ]
}

/// The `run` subcommand: parse, execute, write.
pub fn cmd_run(config_path: &Path) -> Result<PathBuf> {
    let text = fs::read_to_string(config_path).map_err(|e| {
        Error::InvalidConfig(format!("cannot read {}: {e}", config_path.display()))
    })?;
    let cfg = crate::config::parse_config(&text)?;
    let out = execute(&cfg)?;
    let dir = PathBuf::from(&cfg.out_dir);
    write_artifacts(&cfg, &out, &dir)?;
    Ok(dir)
}

/// The `mesh-info` subcommand: quality report of a mesh file.
pub fn cmd_mesh_info(mesh_path: &Path, lumping: f64) -> Result<String> {
    let text = fs::read_to_string(mesh_path).map_err(|e| {
        Error::InvalidConfig(format!("cannot read {}: {e}", mesh_path.display()))
    })?;
    let mesh = parse_mesh(&text)?;
    let submesh = build_submesh(&mesh)?;
    let lumped = compute_lumping(&mesh, &LumpingRule::UniformFraction(lumping))?;
    let mut quality = mesh_quality(&mesh, &submesh, &lumped);
    let tensor = TensorField::diagonal(1.0, 1.0)?;
    let stiffness = assemble_stiffness(&mesh, &submesh, &tensor)?;
    quality.cond_range = Some(stiffness.cond_range);
    let (clo, chi) = stiffness.cond_range;
    Ok(format!(
        "vertices {}\ncells {}\nh {}\ntheta {}\nell {}\nzeta {}\ncond2_min {}\ncond2_max {}\n",
        mesh.n_vertices(),
        mesh.n_cells(),
        fmt17(quality.h),
        fmt17(quality.theta),
        quality.ell,
        fmt17(quality.zeta),
        fmt17(clo),
        fmt17(chi),
    ))
}
