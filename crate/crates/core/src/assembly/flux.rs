//! Flux kernels, residuals and analytic Jacobians for the three flux
//! definitions and for the heterogeneous pressure-primary formulation.
//!
//! Orientation conventions: the cell-to-vertex flux of cell `k` through its
//! local vertex `j` is `F[j]`; the vertex equation receives `-F[j]` so the
//! pairwise fluxes cancel identically and the scheme is conservative.

use nalgebra::{DMatrix, Point2};

use crate::error::{Error, Result};
use crate::mesh::{LumpedMeasures, Mesh};
use crate::physics::{ExactSolution, HeteroModel, Model, Potential};

use super::jacobian::JacobianBlocks;
use super::{DofVector, FluxScheme, StiffnessSet};

/// Dirichlet datum attached to a set of vertices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryValue {
    Const(f64),
    Exact(ExactSolution),
}

impl BoundaryValue {
    pub fn eval(&self, x: Point2<f64>, t: f64) -> f64 {
        match self {
            BoundaryValue::Const(c) => *c,
            BoundaryValue::Exact(sol) => sol.eval(x, t),
        }
    }
}

/// Dirichlet boundary data: vertex equations of listed vertices are replaced
/// by `u - value(x, t) = 0`. Cells never carry Dirichlet data.
#[derive(Debug, Clone)]
pub struct DirichletBc {
    entries: Vec<(usize, BoundaryValue)>,
    mask: Vec<bool>,
}

impl DirichletBc {
    pub fn new(mesh: &Mesh, mut entries: Vec<(usize, BoundaryValue)>) -> Result<Self> {
        entries.sort_by_key(|e| e.0);
        let mut mask = vec![false; mesh.n_vertices()];
        for &(v, _) in &entries {
            if v >= mesh.n_vertices() {
                return Err(Error::InvalidConfig(format!(
                    "Dirichlet vertex {v} does not exist"
                )));
            }
            if !mesh.is_boundary_vertex(v) {
                return Err(Error::InvalidConfig(format!(
                    "Dirichlet vertex {v} is not on the boundary"
                )));
            }
            if mask[v] {
                return Err(Error::InvalidConfig(format!(
                    "vertex {v} carries two Dirichlet values"
                )));
            }
            mask[v] = true;
        }
        Ok(DirichletBc { entries, mask })
    }

    pub fn is_dirichlet(&self, vertex: usize) -> bool {
        self.mask[vertex]
    }

    pub fn entries(&self) -> &[(usize, BoundaryValue)] {
        &self.entries
    }

    /// Writes the (floored) boundary values into the state.
    pub fn impose(&self, mesh: &Mesh, t: f64, floor: Option<f64>, u: &mut DofVector) {
        for &(v, value) in &self.entries {
            let mut target = value.eval(mesh.vertex(v), t);
            if let Some(eps) = floor {
                target = target.max(eps);
            }
            u.vertex[v] = target;
        }
    }
}

/// Anything Newton can solve: assembles residuals and Jacobian blocks around
/// a state, given the previous state and the step size.
pub trait NonlinearSystem {
    fn mesh(&self) -> &Mesh;

    fn lumped(&self) -> &LumpedMeasures;

    /// Whether iterates must be kept above a positive floor.
    fn needs_clamping(&self) -> bool;

    fn dirichlet(&self) -> Option<&DirichletBc>;

    /// Residual of the time step equations at `u`.
    fn residual(
        &self,
        u: &DofVector,
        u_prev: &DofVector,
        dt: f64,
        t: f64,
        floor: Option<f64>,
        out: &mut DofVector,
    ) -> Result<()>;

    /// Jacobian blocks at `u`; also fills the right-hand sides `b1`, `b2`
    /// with minus the residual.
    fn assemble(
        &self,
        u: &DofVector,
        u_prev: &DofVector,
        dt: f64,
        t: f64,
        floor: Option<f64>,
        blocks: &mut JacobianBlocks,
    ) -> Result<()>;
}

/// The scheme in its natural unknown u, for a single mobility/pressure model
/// on the whole domain.
pub struct System<'a> {
    pub mesh: &'a Mesh,
    pub lumped: &'a LumpedMeasures,
    pub stiffness: &'a StiffnessSet,
    pub scheme: FluxScheme,
    pub model: &'a Model,
    /// Exterior potential sampled at the dof sites.
    pub potential_vec: DofVector,
    pub dirichlet: Option<DirichletBc>,
}

impl<'a> System<'a> {
    pub fn new(
        mesh: &'a Mesh,
        lumped: &'a LumpedMeasures,
        stiffness: &'a StiffnessSet,
        scheme: FluxScheme,
        model: &'a Model,
        potential: &Potential,
        dirichlet: Option<DirichletBc>,
    ) -> Self {
        let potential_vec = DofVector::sample(mesh, |x| potential.value(x));
        System { mesh, lumped, stiffness, scheme, model, potential_vec, dirichlet }
    }

    /// Whether this system evaluates the pressure law on states, and hence
    /// must keep them inside the admissible interval.
    fn evaluates_pressure(&self) -> bool {
        self.scheme == FluxScheme::Nonlinear
    }

    fn check_admissible(&self, u: &DofVector) -> Result<()> {
        if !u.all_finite() {
            return Err(Error::InadmissibleState);
        }
        if self.evaluates_pressure()
            && self.model.singular()
            && u.iter().any(|v| v <= 0.0)
        {
            return Err(Error::InadmissibleState);
        }
        Ok(())
    }

    /// Fluxes of one cell towards its vertices. `scratch` must be sized to
    /// the cell's vertex count; `dfdu`, when present, receives the flux
    /// derivatives (column 0: w.r.t. the cell value, column 1+i: w.r.t. the
    /// i-th vertex value).
    fn cell_fluxes(
        &self,
        ci: usize,
        u: &DofVector,
        scratch: &mut Scratch,
        mut dfdu: Option<&mut DMatrix<f64>>,
    ) {
        let cell = self.mesh.cell(ci);
        let a = &self.stiffness.cells[ci].mat;
        let k = cell.n_vertices();
        let uc = u.cell[ci];
        let vc = self.potential_vec.cell[ci];
        scratch.resize(k);
        for (j, &vj) in cell.vertices.iter().enumerate() {
            scratch.uv[j] = u.vertex[vj];
            scratch.vv[j] = self.potential_vec.vertex[vj];
        }
        match self.scheme {
            FluxScheme::Nonlinear => {
                nonlinear_fluxes(self.model, a, uc, vc, scratch, dfdu.as_deref_mut())
            }
            FluxScheme::Linear => {
                linear_fluxes(a, uc, vc, scratch, dfdu.as_deref_mut(), false)
            }
            FluxScheme::Quasilinear => {
                linear_fluxes(a, uc, vc, scratch, dfdu.as_deref_mut(), true)
            }
        }
    }

    fn assemble_impl(
        &self,
        u: &DofVector,
        u_prev: &DofVector,
        dt: f64,
        t: f64,
        floor: Option<f64>,
        out: &mut DofVector,
        mut blocks: Option<&mut JacobianBlocks>,
    ) -> Result<()> {
        self.check_admissible(u)?;
        let mesh = self.mesh;
        let mut scratch = Scratch::default();
        let mut dfdu = DMatrix::zeros(0, 0);

        for ci in 0..mesh.n_cells() {
            out.cell[ci] =
                self.lumped.m_cell[ci] * (u.cell[ci] - u_prev.cell[ci]) / dt;
        }
        for vi in 0..mesh.n_vertices() {
            out.vertex[vi] =
                self.lumped.m_vertex[vi] * (u.vertex[vi] - u_prev.vertex[vi]) / dt;
        }
        if let Some(b) = blocks.as_deref_mut() {
            b.zero();
            for ci in 0..mesh.n_cells() {
                b.d[ci] = self.lumped.m_cell[ci] / dt;
            }
            for vi in 0..mesh.n_vertices() {
                b.a.add(vi, vi, self.lumped.m_vertex[vi] / dt);
            }
        }

        for ci in 0..mesh.n_cells() {
            let cell = mesh.cell(ci);
            let k = cell.n_vertices();
            let want_jac = blocks.is_some();
            if want_jac && (dfdu.nrows() != k || dfdu.ncols() != k + 1) {
                dfdu = DMatrix::zeros(k, k + 1);
            }
            self.cell_fluxes(ci, u, &mut scratch, blocks.as_ref().map(|_| &mut dfdu));
            for (j, &vj) in cell.vertices.iter().enumerate() {
                out.cell[ci] += scratch.f[j];
                out.vertex[vj] -= scratch.f[j];
            }
            if let Some(b) = blocks.as_deref_mut() {
                for (j, &vj) in cell.vertices.iter().enumerate() {
                    b.d[ci] += dfdu[(j, 0)];
                    b.b[ci][j] -= dfdu[(j, 0)];
                    for (i, &vi) in cell.vertices.iter().enumerate() {
                        b.c[ci][i] += dfdu[(j, 1 + i)];
                        b.a.add(vj, vi, -dfdu[(j, 1 + i)]);
                    }
                }
            }
        }

        // Dirichlet vertex rows replace the conservation equations
        if let Some(bc) = &self.dirichlet {
            for &(v, value) in bc.entries() {
                let mut target = value.eval(mesh.vertex(v), t);
                if let Some(eps) = floor {
                    target = target.max(eps);
                }
                out.vertex[v] = u.vertex[v] - target;
            }
            if let Some(b) = blocks.as_deref_mut() {
                apply_dirichlet_rows(mesh, bc, b);
            }
        }

        if let Some(b) = blocks.as_deref_mut() {
            for ci in 0..mesh.n_cells() {
                if b.d[ci] == 0.0 {
                    return Err(Error::SingularCellBlock { cell: ci });
                }
                b.b2[ci] = -out.cell[ci];
            }
            for vi in 0..mesh.n_vertices() {
                b.b1[vi] = -out.vertex[vi];
            }
        }
        Ok(())
    }
}

fn apply_dirichlet_rows(mesh: &Mesh, bc: &DirichletBc, b: &mut JacobianBlocks) {
    for &(v, _) in bc.entries() {
        b.a.clear_row(v);
        b.a.set(v, v, 1.0);
        for &ci in mesh.cells_of_vertex(v) {
            let j = mesh
                .cell(ci)
                .vertices
                .iter()
                .position(|&x| x == v)
                .expect("vertex-cell adjacency is consistent");
            b.b[ci][j] = 0.0;
        }
    }
}

impl<'a> NonlinearSystem for System<'a> {
    fn mesh(&self) -> &Mesh {
        self.mesh
    }

    fn lumped(&self) -> &LumpedMeasures {
        self.lumped
    }

    fn needs_clamping(&self) -> bool {
        self.model.singular() && self.evaluates_pressure()
    }

    fn dirichlet(&self) -> Option<&DirichletBc> {
        self.dirichlet.as_ref()
    }

    fn residual(
        &self,
        u: &DofVector,
        u_prev: &DofVector,
        dt: f64,
        t: f64,
        floor: Option<f64>,
        out: &mut DofVector,
    ) -> Result<()> {
        self.assemble_impl(u, u_prev, dt, t, floor, out, None)
    }

    fn assemble(
        &self,
        u: &DofVector,
        u_prev: &DofVector,
        dt: f64,
        t: f64,
        floor: Option<f64>,
        blocks: &mut JacobianBlocks,
    ) -> Result<()> {
        let mut res = DofVector::zeros(self.mesh);
        self.assemble_impl(u, u_prev, dt, t, floor, &mut res, Some(blocks))
    }
}

#[derive(Default)]
struct Scratch {
    uv: Vec<f64>,
    vv: Vec<f64>,
    s: Vec<f64>,
    g: Vec<f64>,
    t: Vec<f64>,
    w: Vec<f64>,
    f: Vec<f64>,
}

impl Scratch {
    fn resize(&mut self, k: usize) {
        for v in [
            &mut self.uv,
            &mut self.vv,
            &mut self.s,
            &mut self.g,
            &mut self.t,
            &mut self.w,
            &mut self.f,
        ] {
            v.clear();
            v.resize(k, 0.0);
        }
    }
}

/// Mobility-weighted fluxes: `F_j = s_j sum_j' a_jj' s_j' (h_c - h_j')` with
/// `s` the square roots of the arithmetic mobility averages and `h` the
/// hydrostatic pressure `p(u) + V`.
fn nonlinear_fluxes(
    model: &Model,
    a: &DMatrix<f64>,
    uc: f64,
    vc: f64,
    scratch: &mut Scratch,
    dfdu: Option<&mut DMatrix<f64>>,
) {
    let k = scratch.uv.len();
    let eta_c = model.eta(uc);
    let hc = model.p(uc) + vc;
    for j in 0..k {
        scratch.s[j] = (0.5 * (eta_c + model.eta(scratch.uv[j]))).sqrt();
        scratch.g[j] = hc - (model.p(scratch.uv[j]) + scratch.vv[j]);
    }
    for j in 0..k {
        let mut t = 0.0;
        for jp in 0..k {
            t += a[(j, jp)] * scratch.s[jp] * scratch.g[jp];
        }
        scratch.t[j] = t;
        scratch.f[j] = scratch.s[j] * t;
    }
    let Some(dfdu) = dfdu else { return };

    let eta_c_prime = model.eta_prime(uc);
    let p_c_prime = model.p_prime(uc);
    // derivative of s_j w.r.t. the cell value and w.r.t. its own vertex
    // value; at a vanished mobility average the true directional derivative
    // of the flux is zero, so the singular 1/s factor is dropped
    let ds = |s: f64, eta_prime: f64| if s > 0.0 { eta_prime / (4.0 * s) } else { 0.0 };
    for j in 0..k {
        let dsc_j = ds(scratch.s[j], eta_c_prime);
        let mut dc = dsc_j * scratch.t[j];
        for jp in 0..k {
            let dsc_jp = ds(scratch.s[jp], eta_c_prime);
            dc += scratch.s[j]
                * a[(j, jp)]
                * (dsc_jp * scratch.g[jp] + scratch.s[jp] * p_c_prime);
        }
        dfdu[(j, 0)] = dc;
        for i in 0..k {
            let dsv_i = ds(scratch.s[i], model.eta_prime(scratch.uv[i]));
            let mut dv = scratch.s[j]
                * a[(j, i)]
                * (dsv_i * scratch.g[i] - scratch.s[i] * model.p_prime(scratch.uv[i]));
            if i == j {
                dv += dsv_i * scratch.t[j];
            }
            dfdu[(j, 1 + i)] = dv;
        }
    }
}

/// Fluxes of the linear scheme (`quadratic = false`) and of the quasilinear
/// scheme (`quadratic = true`): differences of u or u^2 plus a convection
/// term weighted by the arithmetic average of the endpoint states. The
/// quadratic branch uses the sign-preserving square u|u| so that undershoots
/// see a monotone flux; it coincides with u^2 on nonnegative states.
fn linear_fluxes(
    a: &DMatrix<f64>,
    uc: f64,
    vc: f64,
    scratch: &mut Scratch,
    dfdu: Option<&mut DMatrix<f64>>,
    quadratic: bool,
) {
    let k = scratch.uv.len();
    let value = |u: f64| if quadratic { u * u.abs() } else { u };
    for j in 0..k {
        let mut diff = 0.0;
        let mut conv = 0.0;
        for jp in 0..k {
            diff += a[(j, jp)] * (value(uc) - value(scratch.uv[jp]));
            conv += a[(j, jp)] * (vc - scratch.vv[jp]);
        }
        scratch.w[j] = conv;
        scratch.f[j] = diff + 0.5 * (uc + scratch.uv[j]) * conv;
    }
    let Some(dfdu) = dfdu else { return };
    for j in 0..k {
        let mut row_sum = 0.0;
        for jp in 0..k {
            row_sum += a[(j, jp)];
        }
        let dval_c = if quadratic { 2.0 * uc.abs() } else { 1.0 };
        dfdu[(j, 0)] = dval_c * row_sum + 0.5 * scratch.w[j];
        for i in 0..k {
            let dval_v = if quadratic { 2.0 * scratch.uv[i].abs() } else { 1.0 };
            let mut dv = -dval_v * a[(j, i)];
            if i == j {
                dv += 0.5 * scratch.w[j];
            }
            dfdu[(j, 1 + i)] = dv;
        }
    }
}

/// Per-vertex fluxes of one cell, as a standalone operation.
pub fn flux(
    scheme: FluxScheme,
    model: &Model,
    mesh: &Mesh,
    lumped: &LumpedMeasures,
    stiffness: &StiffnessSet,
    potential: &Potential,
    u: &DofVector,
    cell: usize,
) -> Result<Vec<f64>> {
    let system = System::new(mesh, lumped, stiffness, scheme, model, potential, None);
    system.check_admissible(u)?;
    let mut scratch = Scratch::default();
    system.cell_fluxes(cell, u, &mut scratch, None);
    Ok(scratch.f.clone())
}

/// The heterogeneous scheme with the pressure as primary unknown: each cell
/// carries its own inverse state function, vertex pressure continuity is
/// automatic, and mobility averages use the owning cell's inverse at both
/// endpoints.
pub struct PressureSystem<'a> {
    pub mesh: &'a Mesh,
    pub lumped: &'a LumpedMeasures,
    pub stiffness: &'a StiffnessSet,
    pub hetero: &'a HeteroModel,
    pub dirichlet: DirichletBc,
}

impl<'a> PressureSystem<'a> {
    pub fn new(
        mesh: &'a Mesh,
        lumped: &'a LumpedMeasures,
        stiffness: &'a StiffnessSet,
        hetero: &'a HeteroModel,
        dirichlet: DirichletBc,
    ) -> Result<Self> {
        // every cell must resolve to a pressure law; untagged or straddling
        // cells surface here through their tags
        for cell in mesh.cells() {
            hetero.law(cell.tag)?;
        }
        Ok(PressureSystem { mesh, lumped, stiffness, hetero, dirichlet })
    }

    /// Range of the derived state u over all cell-local evaluations.
    pub fn derived_u_bounds(&self, p: &DofVector) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (ci, cell) in self.mesh.cells().iter().enumerate() {
            let law = self.hetero.law(cell.tag).expect("validated at construction");
            let mut push = |u: f64| {
                lo = lo.min(u);
                hi = hi.max(u);
            };
            push(law.u_of_p(p.cell[ci]));
            for &v in &cell.vertices {
                push(law.u_of_p(p.vertex[v]));
            }
        }
        (lo, hi)
    }

    /// Derived state at one vertex, seen from one of its cells.
    pub fn derived_u_at(&self, p: &DofVector, cell: usize, vertex: usize) -> f64 {
        let law = self.hetero.law(self.mesh.cell(cell).tag).expect("validated");
        law.u_of_p(p.vertex[vertex])
    }

    /// The conserved quantity of the pressure-primary scheme: each cell
    /// weighs its own mass and its vertex shares with its own inverse.
    pub fn derived_mass(&self, p: &DofVector) -> f64 {
        let mut total = 0.0;
        for (ci, cell) in self.mesh.cells().iter().enumerate() {
            let law = self.hetero.law(cell.tag).expect("validated at construction");
            total += self.lumped.m_cell[ci] * law.u_of_p(p.cell[ci]);
            for (j, &vj) in cell.vertices.iter().enumerate() {
                total += self.lumped.m_cell_vertex[ci][j] * law.u_of_p(p.vertex[vj]);
            }
        }
        total
    }

    fn assemble_impl(
        &self,
        p: &DofVector,
        p_prev: &DofVector,
        dt: f64,
        t: f64,
        out: &mut DofVector,
        mut blocks: Option<&mut JacobianBlocks>,
    ) -> Result<()> {
        if !p.all_finite() {
            return Err(Error::InadmissibleState);
        }
        let mesh = self.mesh;
        let mut scratch = Scratch::default();
        let mut dfdp = DMatrix::zeros(0, 0);

        for v in out.cell.iter_mut() {
            *v = 0.0;
        }
        for v in out.vertex.iter_mut() {
            *v = 0.0;
        }
        if let Some(b) = blocks.as_deref_mut() {
            b.zero();
        }

        for ci in 0..mesh.n_cells() {
            let cell = mesh.cell(ci);
            let law = self.hetero.law(cell.tag)?;
            let a = &self.stiffness.cells[ci].mat;
            let k = cell.n_vertices();
            scratch.resize(k);
            if blocks.is_some() && (dfdp.nrows() != k || dfdp.ncols() != k + 1) {
                dfdp = DMatrix::zeros(k, k + 1);
            }

            let pc = p.cell[ci];
            let uc = law.u_of_p(pc);
            // accumulation: the cell keeps m_cell, each vertex receives its
            // cell share m_cell_vertex evaluated with this cell's inverse
            out.cell[ci] += self.lumped.m_cell[ci] * (uc - law.u_of_p(p_prev.cell[ci])) / dt;
            for (j, &vj) in cell.vertices.iter().enumerate() {
                scratch.uv[j] = law.u_of_p(p.vertex[vj]);
                out.vertex[vj] += self.lumped.m_cell_vertex[ci][j]
                    * (scratch.uv[j] - law.u_of_p(p_prev.vertex[vj]))
                    / dt;
            }

            for j in 0..k {
                scratch.s[j] = (0.5 * (uc + scratch.uv[j])).sqrt();
                scratch.g[j] = pc - p.vertex[cell.vertices[j]];
            }
            for j in 0..k {
                let mut tj = 0.0;
                for jp in 0..k {
                    tj += a[(j, jp)] * scratch.s[jp] * scratch.g[jp];
                }
                scratch.t[j] = tj;
                scratch.f[j] = scratch.s[j] * tj;
            }
            for (j, &vj) in cell.vertices.iter().enumerate() {
                out.cell[ci] += scratch.f[j];
                out.vertex[vj] -= scratch.f[j];
            }

            if let Some(b) = blocks.as_deref_mut() {
                let duc = law.du_dp(pc);
                let ds = |s: f64, du: f64| if s > 0.0 { du / (4.0 * s) } else { 0.0 };
                b.d[ci] += self.lumped.m_cell[ci] * duc / dt;
                for (j, &vj) in cell.vertices.iter().enumerate() {
                    let duv_j = law.du_dp(p.vertex[vj]);
                    b.a.add(
                        vj,
                        vj,
                        self.lumped.m_cell_vertex[ci][j] * duv_j / dt,
                    );
                    let dsc_j = ds(scratch.s[j], duc);
                    let mut dc = dsc_j * scratch.t[j];
                    for jp in 0..k {
                        let dsc_jp = ds(scratch.s[jp], duc);
                        dc += scratch.s[j]
                            * a[(j, jp)]
                            * (dsc_jp * scratch.g[jp] + scratch.s[jp]);
                    }
                    dfdp[(j, 0)] = dc;
                    for i in 0..k {
                        let dsv_i = ds(
                            scratch.s[i],
                            law.du_dp(p.vertex[cell.vertices[i]]),
                        );
                        let mut dv = scratch.s[j]
                            * a[(j, i)]
                            * (dsv_i * scratch.g[i] - scratch.s[i]);
                        if i == j {
                            dv += dsv_i * scratch.t[j];
                        }
                        dfdp[(j, 1 + i)] = dv;
                    }
                }
                for (j, &vj) in cell.vertices.iter().enumerate() {
                    b.d[ci] += dfdp[(j, 0)];
                    b.b[ci][j] -= dfdp[(j, 0)];
                    for (i, &vi) in cell.vertices.iter().enumerate() {
                        b.c[ci][i] += dfdp[(j, 1 + i)];
                        b.a.add(vj, vi, -dfdp[(j, 1 + i)]);
                    }
                }
            }
        }

        for &(v, value) in self.dirichlet.entries() {
            let target = value.eval(mesh.vertex(v), t);
            out.vertex[v] = p.vertex[v] - target;
        }
        if let Some(b) = blocks.as_deref_mut() {
            apply_dirichlet_rows(mesh, &self.dirichlet, b);
            for ci in 0..mesh.n_cells() {
                if b.d[ci] == 0.0 {
                    return Err(Error::SingularCellBlock { cell: ci });
                }
                b.b2[ci] = -out.cell[ci];
            }
            for vi in 0..mesh.n_vertices() {
                b.b1[vi] = -out.vertex[vi];
            }
        }
        Ok(())
    }
}

impl<'a> NonlinearSystem for PressureSystem<'a> {
    fn mesh(&self) -> &Mesh {
        self.mesh
    }

    fn lumped(&self) -> &LumpedMeasures {
        self.lumped
    }

    fn needs_clamping(&self) -> bool {
        false
    }

    fn dirichlet(&self) -> Option<&DirichletBc> {
        Some(&self.dirichlet)
    }

    fn residual(
        &self,
        u: &DofVector,
        u_prev: &DofVector,
        dt: f64,
        t: f64,
        _floor: Option<f64>,
        out: &mut DofVector,
    ) -> Result<()> {
        self.assemble_impl(u, u_prev, dt, t, out, None)
    }

    fn assemble(
        &self,
        u: &DofVector,
        u_prev: &DofVector,
        dt: f64,
        t: f64,
        _floor: Option<f64>,
        blocks: &mut JacobianBlocks,
    ) -> Result<()> {
        let mut res = DofVector::zeros(self.mesh);
        self.assemble_impl(u, u_prev, dt, t, &mut res, Some(blocks))
    }
}
