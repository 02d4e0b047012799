//! Block structure of the Newton linear systems: vertex equations first,
//! cell equations second, with a diagonal cell-cell block that admits a
//! fill-in-free Schur complement.

use nalgebra::DMatrix;

use crate::mesh::Mesh;

/// Compressed sparse row matrix with a fixed symbolic pattern.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Vertex-to-vertex adjacency pattern: two vertices couple when they
    /// share a cell; the diagonal is always present.
    pub fn vertex_pattern(mesh: &Mesh) -> Self {
        let n = mesh.n_vertices();
        let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
        for v in 0..n {
            neighbors[v].push(v);
        }
        for cell in mesh.cells() {
            for &a in &cell.vertices {
                for &b in &cell.vertices {
                    if a != b {
                        neighbors[a].push(b);
                    }
                }
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for list in neighbors.iter_mut() {
            list.sort_unstable();
            list.dedup();
            col_idx.extend_from_slice(list);
            row_ptr.push(col_idx.len());
        }
        let vals = vec![0.0; col_idx.len()];
        CsrMatrix { n, row_ptr, col_idx, vals }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn zero(&mut self) {
        self.vals.iter_mut().for_each(|v| *v = 0.0);
    }

    /// Copies the values of a matrix with the identical symbolic pattern.
    pub fn copy_values_from(&mut self, other: &CsrMatrix) {
        debug_assert_eq!(self.col_idx, other.col_idx);
        self.vals.copy_from_slice(&other.vals);
    }

    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        (&self.col_idx[range.clone()], &self.vals[range])
    }

    fn pos(&self, r: usize, c: usize) -> usize {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        let cols = &self.col_idx[range.clone()];
        range.start + cols.binary_search(&c).expect("entry outside symbolic pattern")
    }

    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        let p = self.pos(r, c);
        self.vals[p] += v;
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        let p = self.pos(r, c);
        self.vals[p] = v;
    }

    /// Clears a row to zero (the symbolic pattern is kept).
    pub fn clear_row(&mut self, r: usize) {
        for p in self.row_ptr[r]..self.row_ptr[r + 1] {
            self.vals[p] = 0.0;
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for r in 0..self.n {
            let (cols, vals) = self.row(r);
            let mut acc = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                acc += v * x[c];
            }
            y[r] = acc;
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for r in 0..self.n {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                m[(r, c)] = v;
            }
        }
        m
    }
}

/// The Newton system in block form
///
/// ```text
/// [ A  B ] [du_vertex]   [b1]
/// [ C  D ] [du_cell  ] = [b2]
/// ```
///
/// with `A` sparse over vertex pairs sharing a cell, `B`/`C` stored cellwise
/// (one column/row per cell over its own vertices) and `D` diagonal.
#[derive(Debug, Clone)]
pub struct JacobianBlocks {
    pub a: CsrMatrix,
    /// Per cell: dR_vertex_j / du_cell for each local vertex j.
    pub b: Vec<Vec<f64>>,
    /// Per cell: dR_cell / du_vertex_j for each local vertex j.
    pub c: Vec<Vec<f64>>,
    /// Diagonal of the cell-cell block.
    pub d: Vec<f64>,
    /// Right-hand side on vertex rows (minus the vertex residuals).
    pub b1: Vec<f64>,
    /// Right-hand side on cell rows (minus the cell residuals).
    pub b2: Vec<f64>,
}

impl JacobianBlocks {
    pub fn new(mesh: &Mesh) -> Self {
        JacobianBlocks {
            a: CsrMatrix::vertex_pattern(mesh),
            b: mesh.cells().iter().map(|c| vec![0.0; c.n_vertices()]).collect(),
            c: mesh.cells().iter().map(|c| vec![0.0; c.n_vertices()]).collect(),
            d: vec![0.0; mesh.n_cells()],
            b1: vec![0.0; mesh.n_vertices()],
            b2: vec![0.0; mesh.n_cells()],
        }
    }

    pub fn zero(&mut self) {
        self.a.zero();
        self.b.iter_mut().for_each(|col| col.iter_mut().for_each(|v| *v = 0.0));
        self.c.iter_mut().for_each(|row| row.iter_mut().for_each(|v| *v = 0.0));
        self.d.iter_mut().for_each(|v| *v = 0.0);
        self.b1.iter_mut().for_each(|v| *v = 0.0);
        self.b2.iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn n_vertices(&self) -> usize {
        self.b1.len()
    }

    pub fn n_cells(&self) -> usize {
        self.b2.len()
    }

    /// Applies the full block matrix to (x_vertex, x_cell).
    pub fn apply(
        &self,
        mesh: &Mesh,
        x_vertex: &[f64],
        x_cell: &[f64],
        y_vertex: &mut [f64],
        y_cell: &mut [f64],
    ) {
        self.a.matvec(x_vertex, y_vertex);
        for (ci, cell) in mesh.cells().iter().enumerate() {
            let mut acc = self.d[ci] * x_cell[ci];
            for (j, &vj) in cell.vertices.iter().enumerate() {
                y_vertex[vj] += self.b[ci][j] * x_cell[ci];
                acc += self.c[ci][j] * x_vertex[vj];
            }
            y_cell[ci] = acc;
        }
    }

    /// Dense form ordered (vertices, cells); for oracle comparisons.
    pub fn to_dense(&self, mesh: &Mesh) -> DMatrix<f64> {
        let nv = self.n_vertices();
        let nc = self.n_cells();
        let mut m = DMatrix::zeros(nv + nc, nv + nc);
        m.view_mut((0, 0), (nv, nv)).copy_from(&self.a.to_dense());
        for (ci, cell) in mesh.cells().iter().enumerate() {
            m[(nv + ci, nv + ci)] = self.d[ci];
            for (j, &vj) in cell.vertices.iter().enumerate() {
                m[(vj, nv + ci)] = self.b[ci][j];
                m[(nv + ci, vj)] = self.c[ci][j];
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_structured, MeshKind};

    #[test]
    fn vertex_pattern_is_symmetric_and_has_diagonal() {
        let mesh = generate_structured(MeshKind::SplitTriangles, 3, None).unwrap();
        let csr = CsrMatrix::vertex_pattern(&mesh);
        for r in 0..csr.n() {
            let (cols, _) = csr.row(r);
            assert!(cols.contains(&r));
            for &c in cols {
                let (back, _) = csr.row(c);
                assert!(back.contains(&r));
            }
        }
    }

    #[test]
    fn apply_matches_dense() {
        let mesh = generate_structured(MeshKind::Cartesian, 2, None).unwrap();
        let mut blocks = JacobianBlocks::new(&mesh);
        // fill with a reproducible pattern
        let nv = mesh.n_vertices();
        for (ci, cell) in mesh.cells().iter().enumerate() {
            blocks.d[ci] = 2.0 + ci as f64;
            for (j, &vj) in cell.vertices.iter().enumerate() {
                blocks.b[ci][j] = 0.1 * (ci + j) as f64;
                blocks.c[ci][j] = 0.2 * (ci * 7 + j) as f64;
                blocks.a.add(vj, vj, 1.0 + 0.01 * ci as f64);
            }
        }
        let x_vertex: Vec<f64> = (0..nv).map(|i| (i as f64 * 0.37).sin()).collect();
        let x_cell: Vec<f64> = (0..mesh.n_cells()).map(|i| (i as f64 * 0.91).cos()).collect();
        let mut y_vertex = vec![0.0; nv];
        let mut y_cell = vec![0.0; mesh.n_cells()];
        blocks.apply(&mesh, &x_vertex, &x_cell, &mut y_vertex, &mut y_cell);

        let dense = blocks.to_dense(&mesh);
        let mut x = nalgebra::DVector::zeros(nv + mesh.n_cells());
        for (i, &v) in x_vertex.iter().enumerate() {
            x[i] = v;
        }
        for (i, &v) in x_cell.iter().enumerate() {
            x[nv + i] = v;
        }
        let y = dense * x;
        for i in 0..nv {
            approx::assert_relative_eq!(y[i], y_vertex[i], epsilon = 1e-13);
        }
        for i in 0..mesh.n_cells() {
            approx::assert_relative_eq!(y[nv + i], y_cell[i], epsilon = 1e-13);
        }
    }
}
