//! Simplicial submesh: one triangle per (cell, edge) pair, joining the cell
//! center to the edge endpoints.

use crate::error::{Error, Result};
use crate::geometry::{incircle_diameter, signed_area, triangle_diameter};

use super::Mesh;

/// Triangle with vertices (cell center, x_a, x_b) where (a, b) is an edge of
/// the owning cell.
#[derive(Debug, Clone, Copy)]
pub struct SubTriangle {
    pub cell: usize,
    /// Global vertex indices of the edge, in the cell's counterclockwise
    /// order.
    pub edge: [usize; 2],
    pub area: f64,
    pub diameter: f64,
    pub incircle: f64,
}

/// The simplicial submesh plus per-cell index ranges.
#[derive(Debug, Clone)]
pub struct Submesh {
    triangles: Vec<SubTriangle>,
    cell_start: Vec<usize>,
}

impl Submesh {
    pub fn triangles(&self) -> &[SubTriangle] {
        &self.triangles
    }

    /// Triangles of cell `c`, in the order of the cell's edges: triangle i
    /// spans vertices (i, i+1 mod k) of the ring.
    pub fn cell_triangles(&self, c: usize) -> &[SubTriangle] {
        &self.triangles[self.cell_start[c]..self.cell_start[c + 1]]
    }

    pub fn total_area(&self) -> f64 {
        self.triangles.iter().map(|t| t.area).sum()
    }

    pub fn max_diameter(&self) -> f64 {
        self.triangles.iter().map(|t| t.diameter).fold(0.0, f64::max)
    }
}

const CELL_AREA_TOL: f64 = 1e-12;

/// Decomposes each cell into its fan triangles and records per-triangle
/// shape quantities. Fails on degenerate triangles and cross-checks that the
/// fan areas reproduce each polygon area to near machine precision.
pub fn build_submesh(mesh: &Mesh) -> Result<Submesh> {
    let mut triangles = Vec::new();
    let mut cell_start = Vec::with_capacity(mesh.n_cells() + 1);
    for (ci, cell) in mesh.cells().iter().enumerate() {
        cell_start.push(triangles.len());
        let k = cell.n_vertices();
        let mut fan_area = 0.0;
        for i in 0..k {
            let va = cell.vertices[i];
            let vb = cell.vertices[(i + 1) % k];
            let a = mesh.vertex(va);
            let b = mesh.vertex(vb);
            let area = signed_area(cell.center, a, b);
            if area <= 0.0 {
                return Err(Error::DegenerateTriangle { cell: ci, area });
            }
            fan_area += area;
            triangles.push(SubTriangle {
                cell: ci,
                edge: [va, vb],
                area,
                diameter: triangle_diameter(cell.center, a, b),
                incircle: incircle_diameter(cell.center, a, b),
            });
        }
        if (fan_area - cell.area()).abs() > CELL_AREA_TOL * cell.area() {
            return Err(Error::InvalidMesh(format!(
                "cell {ci}: fan area {fan_area} does not match polygon area {}",
                cell.area()
            )));
        }
    }
    cell_start.push(triangles.len());
    Ok(Submesh { triangles, cell_start })
}
