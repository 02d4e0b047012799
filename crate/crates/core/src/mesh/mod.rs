//! Polygonal meshes with cell-center and vertex degrees of freedom.
//!
//! A mesh is a conforming partition of a polygonal domain into simple
//! polygonal cells, each star-shaped with respect to a designated center
//! point. Validation happens once at construction; all downstream layers
//! treat meshes as immutable.

mod format;
mod generate;
mod lumping;
mod quality;
mod submesh;

pub use format::{parse_mesh, serialize_mesh};
pub use generate::{generate_structured, MeshKind};
pub use lumping::{compute_lumping, LumpedMeasures, LumpingRule};
pub use quality::{mesh_quality, QualityReport};
pub use submesh::{build_submesh, Submesh, SubTriangle};

use std::collections::BTreeMap;

use nalgebra::Point2;

use crate::error::{Error, Result};
use crate::geometry::{polygon_area, signed_area};

/// One polygonal cell: counterclockwise vertex ring, center point and an
/// integer subdomain tag (default 1).
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub vertices: Vec<usize>,
    pub center: Point2<f64>,
    pub tag: u32,
    area: f64,
}

impl Cell {
    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }
}

/// A validated polygonal mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Point2<f64>>,
    cells: Vec<Cell>,
    boundary: Vec<bool>,
    vertex_cells: Vec<Vec<usize>>,
    total_area: f64,
}

/// Raw per-cell input for [`Mesh::new`]: vertex ring, optional center
/// (defaults to the polygon centroid) and optional tag (defaults to 1).
#[derive(Debug, Clone)]
pub struct CellSpec {
    pub vertices: Vec<usize>,
    pub center: Option<Point2<f64>>,
    pub tag: u32,
}

impl CellSpec {
    pub fn new(vertices: Vec<usize>) -> Self {
        CellSpec { vertices, center: None, tag: 1 }
    }
}

const STAR_TOL: f64 = 1e-14;
const AREA_TOL: f64 = 1e-10;

impl Mesh {
    /// Builds and validates a mesh. Checks performed:
    /// - every referenced vertex exists and rings have at least 3 vertices,
    /// - every cell is a simple polygon, star-shaped w.r.t. its center,
    /// - cells conform (an edge is shared by at most two cells, with
    ///   opposite orientations),
    /// - the cell areas sum to the area enclosed by the boundary loops.
    pub fn new(vertices: Vec<Point2<f64>>, specs: Vec<CellSpec>) -> Result<Self> {
        if specs.is_empty() {
            return Err(Error::InvalidMesh("mesh has no cells".into()));
        }
        let n_vertices = vertices.len();
        let mut cells = Vec::with_capacity(specs.len());
        for (ci, spec) in specs.into_iter().enumerate() {
            if spec.vertices.len() < 3 {
                return Err(Error::InvalidMesh(format!(
                    "cell {ci} has fewer than 3 vertices"
                )));
            }
            for &v in &spec.vertices {
                if v >= n_vertices {
                    return Err(Error::DanglingVertex { cell: ci, vertex: v });
                }
            }
            let mut ring = spec.vertices.clone();
            ring.sort_unstable();
            ring.dedup();
            if ring.len() != spec.vertices.len() {
                return Err(Error::InvalidMesh(format!(
                    "cell {ci} repeats a vertex"
                )));
            }
            let pts: Vec<Point2<f64>> =
                spec.vertices.iter().map(|&v| vertices[v]).collect();
            let area = polygon_area(&pts);
            if area <= 0.0 {
                return Err(Error::InvalidMesh(format!(
                    "cell {ci} is not counterclockwise (signed area {area:e})"
                )));
            }
            let center = spec.center.unwrap_or_else(|| centroid(&pts, area));
            // star-shapedness: each fan triangle (center, v_i, v_{i+1}) must
            // have strictly positive signed area
            let scale = area.max(1e-300);
            for i in 0..pts.len() {
                let a = signed_area(center, pts[i], pts[(i + 1) % pts.len()]);
                if a <= STAR_TOL * scale {
                    return Err(Error::NonStarShaped { cell: ci });
                }
            }
            cells.push(Cell { vertices: spec.vertices, center, tag: spec.tag, area });
        }

        // edge conformity and boundary detection
        let mut edge_use: BTreeMap<(usize, usize), (usize, usize)> = BTreeMap::new();
        for (ci, cell) in cells.iter().enumerate() {
            let n = cell.vertices.len();
            for i in 0..n {
                let a = cell.vertices[i];
                let b = cell.vertices[(i + 1) % n];
                let key = (a.min(b), a.max(b));
                let dir = usize::from(a > b);
                let entry = edge_use.entry(key).or_insert((0, 0));
                if dir == 0 {
                    entry.0 += 1;
                } else {
                    entry.1 += 1;
                }
                if entry.0 > 1 || entry.1 > 1 {
                    return Err(Error::InvalidMesh(format!(
                        "edge ({a}, {b}) is traversed twice in the same direction near cell {ci}"
                    )));
                }
            }
        }
        let mut boundary = vec![false; n_vertices];
        let mut boundary_edges: Vec<(usize, usize)> = Vec::new();
        for (&(a, b), &(fwd, rev)) in &edge_use {
            match fwd + rev {
                1 => {
                    boundary[a] = true;
                    boundary[b] = true;
                    // restore traversal direction of the single user
                    if fwd == 1 {
                        boundary_edges.push((a, b));
                    } else {
                        boundary_edges.push((b, a));
                    }
                }
                2 => {}
                n => {
                    return Err(Error::InvalidMesh(format!(
                        "edge ({a}, {b}) is shared by {n} cells"
                    )))
                }
            }
        }

        // coverage: total cell area must match the area enclosed by the
        // boundary loops (computed by the shoelace formula along each loop)
        let total_area: f64 = cells.iter().map(|c| c.area).sum();
        let domain_total = boundary_loop_area(&boundary_edges, &vertices)?;
        if (total_area - domain_total).abs() > AREA_TOL * total_area.abs() {
            return Err(Error::AreaMismatch { cell_total: total_area, domain_total });
        }

        let mut vertex_cells = vec![Vec::new(); n_vertices];
        for (ci, cell) in cells.iter().enumerate() {
            for &v in &cell.vertices {
                vertex_cells[v].push(ci);
            }
        }
        for v in 0..n_vertices {
            if vertex_cells[v].is_empty() {
                return Err(Error::InvalidMesh(format!(
                    "vertex {v} is not referenced by any cell"
                )));
            }
        }

        Ok(Mesh { vertices, cells, boundary, vertex_cells, total_area })
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    /// Total number of degrees of freedom (cells + vertices).
    pub fn n_dofs(&self) -> usize {
        self.cells.len() + self.vertices.len()
    }

    pub fn vertex(&self, v: usize) -> Point2<f64> {
        self.vertices[v]
    }

    pub fn vertices(&self) -> &[Point2<f64>] {
        &self.vertices
    }

    pub fn cell(&self, c: usize) -> &Cell {
        &self.cells[c]
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn boundary_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_vertices()).filter(|&v| self.boundary[v])
    }

    /// Boundary vertices whose position satisfies `pred`.
    pub fn boundary_vertices_where<F: Fn(Point2<f64>) -> bool>(
        &self,
        pred: F,
    ) -> Vec<usize> {
        self.boundary_vertices()
            .filter(|&v| pred(self.vertices[v]))
            .collect()
    }

    /// Cells sharing vertex `v`, sorted ascending.
    pub fn cells_of_vertex(&self, v: usize) -> &[usize] {
        &self.vertex_cells[v]
    }

    pub fn total_area(&self) -> f64 {
        self.total_area
    }

    /// Replaces all cell tags, one per cell.
    pub fn retag(&mut self, tags: &[u32]) -> Result<()> {
        if tags.len() != self.cells.len() {
            return Err(Error::InvalidMesh(format!(
                "expected {} tags, got {}",
                self.cells.len(),
                tags.len()
            )));
        }
        for (cell, &tag) in self.cells.iter_mut().zip(tags) {
            cell.tag = tag;
        }
        Ok(())
    }

    /// Index of the cell whose closed polygon contains `p`, if any.
    pub fn locate_cell(&self, p: Point2<f64>) -> Option<usize> {
        (0..self.cells.len()).find(|&ci| self.cell_contains(ci, p))
    }

    /// Whether the closed polygon of cell `ci` contains `p`.
    pub fn cell_contains(&self, ci: usize, p: Point2<f64>) -> bool {
        let cell = &self.cells[ci];
        let n = cell.vertices.len();
        let eps = 1e-12 * cell.area;
        for i in 0..n {
            let a = self.vertices[cell.vertices[i]];
            let b = self.vertices[cell.vertices[(i + 1) % n]];
            let w0 = signed_area(p, a, b);
            let w1 = signed_area(cell.center, p, b);
            let w2 = signed_area(cell.center, a, p);
            if w0 >= -eps && w1 >= -eps && w2 >= -eps {
                return true;
            }
        }
        false
    }
}

fn centroid(pts: &[Point2<f64>], area: f64) -> Point2<f64> {
    let n = pts.len();
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..n {
        let p = pts[i];
        let q = pts[(i + 1) % n];
        let cross = p.x * q.y - q.x * p.y;
        cx += (p.x + q.x) * cross;
        cy += (p.y + q.y) * cross;
    }
    Point2::new(cx / (6.0 * area), cy / (6.0 * area))
}

/// Chains directed boundary edges into closed loops and sums their shoelace
/// areas. Outer loops are counterclockwise (positive), holes clockwise.
fn boundary_loop_area(
    edges: &[(usize, usize)],
    vertices: &[Point2<f64>],
) -> Result<f64> {
    let mut next: BTreeMap<usize, usize> = BTreeMap::new();
    for &(a, b) in edges {
        if next.insert(a, b).is_some() {
            return Err(Error::InvalidMesh(format!(
                "boundary is not a set of simple loops near vertex {a}"
            )));
        }
    }
    let mut visited: BTreeMap<usize, bool> =
        edges.iter().map(|&(a, _)| (a, false)).collect();
    let mut total = 0.0;
    for &(start, _) in edges {
        if visited[&start] {
            continue;
        }
        let mut twice = 0.0;
        let mut a = start;
        loop {
            let b = *next.get(&a).ok_or_else(|| {
                Error::InvalidMesh(format!("boundary loop breaks at vertex {a}"))
            })?;
            visited.insert(a, true);
            let p = vertices[a];
            let q = vertices[b];
            twice += p.x * q.y - q.x * p.y;
            a = b;
            if a == start {
                break;
            }
        }
        total += 0.5 * twice;
    }
    Ok(total)
}
