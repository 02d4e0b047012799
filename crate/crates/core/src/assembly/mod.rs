//! Discrete operators of the scheme: states with one value per cell and per
//! vertex, reconstruction operators, local stiffness matrices, fluxes,
//! residuals, Jacobian blocks and the discrete energy functionals.

mod energy;
mod flux;
mod jacobian;

pub use energy::{
    discrete_energy, discretize_initial, dissipation, relative_entropy, sample_gibbs,
    sample_potential,
};
pub use flux::{
    flux, BoundaryValue, DirichletBc, NonlinearSystem, PressureSystem, System,
};
pub use jacobian::{CsrMatrix, JacobianBlocks};

use nalgebra::{DMatrix, Matrix2, Point2};

use crate::error::{Error, Result};
use crate::geometry::{barycentric, p1_gradients, signed_area};
use crate::mesh::{Mesh, Submesh};
use crate::physics::TensorField;

/// A discrete state: one value per cell and one per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct DofVector {
    pub cell: Vec<f64>,
    pub vertex: Vec<f64>,
}

impl DofVector {
    pub fn zeros(mesh: &Mesh) -> Self {
        DofVector {
            cell: vec![0.0; mesh.n_cells()],
            vertex: vec![0.0; mesh.n_vertices()],
        }
    }

    pub fn constant(mesh: &Mesh, value: f64) -> Self {
        DofVector {
            cell: vec![value; mesh.n_cells()],
            vertex: vec![value; mesh.n_vertices()],
        }
    }

    /// Samples a function at the dof sites: cell centers and vertices.
    pub fn sample<F: FnMut(Point2<f64>) -> f64>(mesh: &Mesh, mut f: F) -> Self {
        DofVector {
            cell: mesh.cells().iter().map(|c| f(c.center)).collect(),
            vertex: mesh.vertices().iter().map(|&v| f(v)).collect::<Vec<_>>(),
        }
    }

    pub fn len(&self) -> usize {
        self.cell.len() + self.vertex.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.vertex.iter().chain(self.cell.iter()).copied()
    }

    pub fn min(&self) -> f64 {
        self.iter().fold(f64::INFINITY, f64::min)
    }

    pub fn inf_norm(&self) -> f64 {
        self.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &DofVector) -> f64 {
        let c = self
            .cell
            .iter()
            .zip(&other.cell)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        self.vertex
            .iter()
            .zip(&other.vertex)
            .fold(c, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.iter().all(f64::is_finite)
    }

    /// Whether every entry lies in the admissible interval of the pressure
    /// law: finite, and strictly positive for singular models.
    pub fn is_admissible(&self, model: &crate::physics::Model) -> bool {
        self.iter().all(|v| model.admissible(v))
    }

    /// Lumped integral of the state: sum of mass-weighted dof values.
    pub fn lumped_mass(&self, lumped: &crate::mesh::LumpedMeasures) -> f64 {
        let mut total = 0.0;
        for (v, m) in self.vertex.iter().zip(&lumped.m_vertex) {
            total += v * m;
        }
        for (c, m) in self.cell.iter().zip(&lumped.m_cell) {
            total += c * m;
        }
        total
    }
}

/// Flux definitions selectable per run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxScheme {
    /// Mobility-weighted differences of the hydrostatic pressure; dissipates
    /// the discrete free energy.
    Nonlinear,
    /// Direct differences of u plus an arithmetic-average convection term.
    Linear,
    /// Differences of u^2 plus an arithmetic-average convection term; only
    /// meaningful with the linear-mobility drift model.
    Quasilinear,
}

/// The local stiffness matrix of one cell over its vertex unknowns, with its
/// spectral condition number.
#[derive(Debug, Clone)]
pub struct LocalStiffness {
    pub mat: DMatrix<f64>,
    pub cond2: f64,
}

/// Exact P1 integration of the permeability-weighted basis gradients over
/// the cell's submesh triangles. The tensor is constant per cell, so the
/// per-triangle midpoint rule is exact.
pub fn local_stiffness(
    mesh: &Mesh,
    submesh: &Submesh,
    cell: usize,
    lambda: &Matrix2<f64>,
) -> Result<LocalStiffness> {
    let k = mesh.cell(cell).n_vertices();
    let mut mat = DMatrix::zeros(k, k);
    for (i, tri) in submesh.cell_triangles(cell).iter().enumerate() {
        if tri.area <= 0.0 {
            return Err(Error::DegenerateTriangle { cell, area: tri.area });
        }
        let a = mesh.vertex(tri.edge[0]);
        let b = mesh.vertex(tri.edge[1]);
        let grads = p1_gradients(mesh.cell(cell).center, a, b);
        let (la, lb) = (i, (i + 1) % k);
        let ga = grads[1];
        let gb = grads[2];
        let lga = lambda * ga;
        let lgb = lambda * gb;
        mat[(la, la)] += tri.area * lga.dot(&ga);
        mat[(lb, lb)] += tri.area * lgb.dot(&gb);
        let cross = tri.area * lga.dot(&gb);
        mat[(la, lb)] += cross;
        mat[(lb, la)] += cross;
    }
    let eigen = mat.clone().symmetric_eigen();
    let lo = eigen.eigenvalues.min();
    let hi = eigen.eigenvalues.max();
    if lo <= 0.0 {
        return Err(Error::InvalidMesh(format!(
            "local stiffness of cell {cell} is not positive definite"
        )));
    }
    Ok(LocalStiffness { mat, cond2: hi / lo })
}

/// All local stiffness matrices of a discretization plus the range of their
/// condition numbers.
#[derive(Debug, Clone)]
pub struct StiffnessSet {
    pub cells: Vec<LocalStiffness>,
    pub cond_range: (f64, f64),
}

pub fn assemble_stiffness(
    mesh: &Mesh,
    submesh: &Submesh,
    tensor: &TensorField,
) -> Result<StiffnessSet> {
    let mut cells = Vec::with_capacity(mesh.n_cells());
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for ci in 0..mesh.n_cells() {
        let lambda = tensor.lambda(mesh.cell(ci).tag)?;
        let local = local_stiffness(mesh, submesh, ci, lambda)?;
        lo = lo.min(local.cond2);
        hi = hi.max(local.cond2);
        cells.push(local);
    }
    Ok(StiffnessSet { cells, cond_range: (lo, hi) })
}

/// Evaluation modes of the reconstruction operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reconstruction {
    /// Continuous piecewise-affine reconstruction on the simplicial submesh.
    PiecewiseAffine,
    /// Piecewise-constant reconstruction on the lumping cells; pointwise
    /// evaluation is only defined at dof sites since the lumping subdomains
    /// carry measures, not geometry.
    Lumped,
    /// Piecewise-constant reconstruction by cell values.
    Cellwise,
}

/// Evaluates a reconstruction of the state `v` at the point `x`.
pub fn reconstruct(
    kind: Reconstruction,
    mesh: &Mesh,
    v: &DofVector,
    x: Point2<f64>,
) -> Result<f64> {
    let outside = || Error::PointOutsideMesh { x: x.x, y: x.y };
    match kind {
        Reconstruction::Cellwise => {
            let ci = mesh.locate_cell(x).ok_or_else(outside)?;
            Ok(v.cell[ci])
        }
        Reconstruction::PiecewiseAffine => {
            let ci = mesh.locate_cell(x).ok_or_else(outside)?;
            let cell = mesh.cell(ci);
            let k = cell.n_vertices();
            // find the fan triangle containing x
            for i in 0..k {
                let va = cell.vertices[i];
                let vb = cell.vertices[(i + 1) % k];
                let a = mesh.vertex(va);
                let b = mesh.vertex(vb);
                let w = barycentric(cell.center, a, b, x);
                let eps = 1e-12;
                if w[0] >= -eps && w[1] >= -eps && w[2] >= -eps {
                    return Ok(w[0] * v.cell[ci]
                        + w[1] * v.vertex[va]
                        + w[2] * v.vertex[vb]);
                }
            }
            Err(outside())
        }
        Reconstruction::Lumped => {
            let tol = 1e-12;
            for (i, &p) in mesh.vertices().iter().enumerate() {
                if (p - x).norm() <= tol {
                    return Ok(v.vertex[i]);
                }
            }
            for (i, c) in mesh.cells().iter().enumerate() {
                if (c.center - x).norm() <= tol {
                    return Ok(v.cell[i]);
                }
            }
            Err(Error::Diagnostics(
                "lumped reconstruction is only defined at dof sites".into(),
            ))
        }
    }
}

/// Direct per-triangle P1 quadrature of `Lambda grad u . grad v` over one
/// cell; the independent route against the local stiffness quadratic form.
pub fn direct_p1_energy(
    mesh: &Mesh,
    submesh: &Submesh,
    cell: usize,
    lambda: &Matrix2<f64>,
    u: &DofVector,
    v: &DofVector,
) -> f64 {
    let c = mesh.cell(cell);
    let mut total = 0.0;
    for tri in submesh.cell_triangles(cell) {
        let a = mesh.vertex(tri.edge[0]);
        let b = mesh.vertex(tri.edge[1]);
        let area = signed_area(c.center, a, b);
        let grads = p1_gradients(c.center, a, b);
        let gu = grads[0] * u.cell[cell]
            + grads[1] * u.vertex[tri.edge[0]]
            + grads[2] * u.vertex[tri.edge[1]];
        let gv = grads[0] * v.cell[cell]
            + grads[1] * v.vertex[tri.edge[0]]
            + grads[2] * v.vertex[tri.edge[1]];
        total += area * (lambda * gu).dot(&gv);
    }
    total
}

/// Quadratic form `delta_v . A delta_u` of one cell, with
/// `(delta w)_j = w_cell - w_vertex_j`.
pub fn stiffness_form(
    mesh: &Mesh,
    stiffness: &LocalStiffness,
    cell: usize,
    u: &DofVector,
    v: &DofVector,
) -> f64 {
    let ring = &mesh.cell(cell).vertices;
    let mut total = 0.0;
    for (i, &vi) in ring.iter().enumerate() {
        let dv = v.cell[cell] - v.vertex[vi];
        for (j, &vj) in ring.iter().enumerate() {
            let du = u.cell[cell] - u.vertex[vj];
            total += dv * stiffness.mat[(i, j)] * du;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_submesh, generate_structured, MeshKind};
    use crate::testutil::unit_square_mesh;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    #[test]
    fn affine_fields_are_reproduced_exactly() {
        let mesh = unit_square_mesh();
        let sub = build_submesh(&mesh).unwrap();
        let identity = Matrix2::identity();
        let local = local_stiffness(&mesh, &sub, 0, &identity).unwrap();
        // u(x, y) = x sampled at dof sites
        let u = DofVector::sample(&mesh, |p| p.x);
        let form = stiffness_form(&mesh, &local, 0, &u, &u);
        assert_relative_eq!(form, 1.0, epsilon = 1e-13);

        let anis = Matrix2::new(1.0, 0.0, 0.0, 10.0);
        let local = local_stiffness(&mesh, &sub, 0, &anis).unwrap();
        let uy = DofVector::sample(&mesh, |p| p.y);
        assert_relative_eq!(stiffness_form(&mesh, &local, 0, &uy, &uy), 10.0, epsilon = 1e-12);

        let constant = DofVector::constant(&mesh, 3.2);
        assert_relative_eq!(stiffness_form(&mesh, &local, 0, &constant, &constant), 0.0);
    }

    #[test]
    fn bilinear_identity_on_random_states() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let lambda = Matrix2::new(2.0, 0.3, 0.3, 1.5);
        let tensor = TensorField::uniform(lambda).unwrap();
        for (kind, d) in [
            (MeshKind::Cartesian, None),
            (MeshKind::SplitTriangles, None),
            (MeshKind::KershawLike, Some(0.5)),
        ] {
            let mesh = generate_structured(kind, 3, d).unwrap();
            let sub = build_submesh(&mesh).unwrap();
            let set = assemble_stiffness(&mesh, &sub, &tensor).unwrap();
            let u = DofVector::sample(&mesh, |_| rng.random_range(-1.0..1.0));
            let v = DofVector::sample(&mesh, |_| rng.random_range(-1.0..1.0));
            for ci in 0..mesh.n_cells() {
                let direct = direct_p1_energy(&mesh, &sub, ci, &lambda, &u, &v);
                let form = stiffness_form(&mesh, &set.cells[ci], ci, &v, &u);
                assert_relative_eq!(direct, form, epsilon = 1e-12, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn stiffness_is_exactly_symmetric() {
        let mesh = generate_structured(MeshKind::KershawLike, 4, Some(0.6)).unwrap();
        let sub = build_submesh(&mesh).unwrap();
        let tensor = TensorField::diagonal(1.0, 10.0).unwrap();
        let set = assemble_stiffness(&mesh, &sub, &tensor).unwrap();
        for local in &set.cells {
            let k = local.mat.nrows();
            for i in 0..k {
                for j in 0..k {
                    assert_eq!(local.mat[(i, j)], local.mat[(j, i)]);
                }
            }
            assert!(local.cond2 >= 1.0);
        }
        assert!(set.cond_range.0 <= set.cond_range.1);
    }

    #[test]
    fn admissibility_predicate() {
        let mesh = unit_square_mesh();
        let singular = crate::physics::Model::catalog(crate::physics::CatalogModel::PmeA);
        let regular = crate::physics::Model::catalog(crate::physics::CatalogModel::PmeB);
        let mut u = DofVector::constant(&mesh, 1.0);
        assert!(u.is_admissible(&singular));
        u.vertex[0] = 0.0;
        assert!(!u.is_admissible(&singular));
        assert!(u.is_admissible(&regular));
        u.vertex[0] = f64::NAN;
        assert!(!u.is_admissible(&regular));
    }

    #[test]
    fn reconstruction_operators() {
        let mesh = unit_square_mesh();
        // e_cell: 1 at the center, 0 at the vertices
        let mut e_cell = DofVector::zeros(&mesh);
        e_cell.cell[0] = 1.0;
        let center = mesh.cell(0).center;
        assert_relative_eq!(
            reconstruct(Reconstruction::PiecewiseAffine, &mesh, &e_cell, center).unwrap(),
            1.0
        );
        assert_relative_eq!(
            reconstruct(Reconstruction::PiecewiseAffine, &mesh, &e_cell, mesh.vertex(2))
                .unwrap(),
            0.0
        );
        let v = DofVector::sample(&mesh, |p| 2.0 * p.x + p.y);
        assert_relative_eq!(
            reconstruct(Reconstruction::Cellwise, &mesh, &v, Point2::new(0.9, 0.1))
                .unwrap(),
            v.cell[0]
        );
        assert_relative_eq!(
            reconstruct(Reconstruction::Lumped, &mesh, &v, mesh.vertex(1)).unwrap(),
            v.vertex[1]
        );
        assert!(reconstruct(
            Reconstruction::Lumped,
            &mesh,
            &v,
            Point2::new(0.3, 0.3)
        )
        .is_err());
        assert!(matches!(
            reconstruct(Reconstruction::Cellwise, &mesh, &v, Point2::new(2.0, 0.0)),
            Err(Error::PointOutsideMesh { .. })
        ));
    }

    #[test]
    fn p1_basis_integral_of_vertex_is_one_sixth() {
        // on the single-square mesh, integrate the piecewise-affine basis of
        // a vertex by 3-point edge-midpoint quadrature (exact for P1)
        let mesh = unit_square_mesh();
        let sub = build_submesh(&mesh).unwrap();
        let mut e = DofVector::zeros(&mesh);
        e.vertex[0] = 1.0;
        let mut integral = 0.0;
        for tri in sub.cell_triangles(0) {
            let c = mesh.cell(0).center;
            let a = mesh.vertex(tri.edge[0]);
            let b = mesh.vertex(tri.edge[1]);
            for (p, q) in [(c, a), (a, b), (b, c)] {
                let mid = nalgebra::center(&p, &q);
                let val =
                    reconstruct(Reconstruction::PiecewiseAffine, &mesh, &e, mid).unwrap();
                integral += tri.area / 3.0 * val;
            }
        }
        assert_relative_eq!(integral, 1.0 / 6.0, epsilon = 1e-13);
    }
}
