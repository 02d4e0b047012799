//! Mesh regularity diagnostics.

use super::{LumpedMeasures, Mesh, Submesh};

/// Shape and lumping regularity numbers for a discretization.
///
/// - `h`: largest submesh triangle diameter,
/// - `theta`: worst triangle diameter / incircle-diameter ratio,
/// - `ell`: largest of (vertices per cell, cells per vertex, edges per cell),
/// - `zeta`: smallest ratio of lumped dof mass to the integral of the dof's
///   piecewise-affine basis function,
/// - `cond_range`: min/max spectral condition number of the local stiffness
///   matrices, filled by the assembly layer.
#[derive(Debug, Clone, Copy)]
pub struct QualityReport {
    pub h: f64,
    pub theta: f64,
    pub ell: usize,
    pub zeta: f64,
    pub cond_range: Option<(f64, f64)>,
}

/// Computes the regularity numbers of a discretization. `cond_range` is left
/// empty; it requires the assembled local stiffness matrices.
pub fn mesh_quality(
    mesh: &Mesh,
    submesh: &Submesh,
    lumped: &LumpedMeasures,
) -> QualityReport {
    let mut h: f64 = 0.0;
    let mut theta: f64 = 0.0;
    for t in submesh.triangles() {
        h = h.max(t.diameter);
        theta = theta.max(t.diameter / t.incircle);
    }

    let mut ell = 0usize;
    for cell in mesh.cells() {
        // in 2D the edge count equals the vertex count
        ell = ell.max(cell.n_vertices());
    }
    for v in 0..mesh.n_vertices() {
        ell = ell.max(mesh.cells_of_vertex(v).len());
    }

    // integral of the P1 basis of a dof: one third of the area of each
    // incident submesh triangle
    let mut basis_cell = vec![0.0; mesh.n_cells()];
    let mut basis_vertex = vec![0.0; mesh.n_vertices()];
    for t in submesh.triangles() {
        let third = t.area / 3.0;
        basis_cell[t.cell] += third;
        basis_vertex[t.edge[0]] += third;
        basis_vertex[t.edge[1]] += third;
    }
    let mut zeta = f64::INFINITY;
    for (m, b) in lumped.m_cell.iter().zip(&basis_cell) {
        zeta = zeta.min(m / b);
    }
    for (m, b) in lumped.m_vertex.iter().zip(&basis_vertex) {
        zeta = zeta.min(m / b);
    }

    QualityReport { h, theta, ell, zeta, cond_range: None }
}
