//! Static condensation of the cell unknowns: the diagonal cell block makes
//! the Schur complement computable without fill-in, reducing each Newton
//! linear system to the vertex unknowns.

use crate::assembly::{CsrMatrix, DofVector, JacobianBlocks};
use crate::error::{Error, Result};
use crate::mesh::Mesh;

use super::linear::{bandwidth, fill_reducing_order, BandedLu};

/// Relative residual above which a solve is treated as failed.
const RESIDUAL_GUARD: f64 = 1e-6;

/// Reusable solver for the condensed vertex systems of one mesh: the
/// ordering, bandwidth and sparsity pattern are fixed, only values change
/// between Newton iterations.
pub struct SchurSolver {
    pos: Vec<usize>,
    order: Vec<usize>,
    kl: usize,
    schur: CsrMatrix,
    band: BandedLu,
    rhs: Vec<f64>,
    last_residual: f64,
}

impl SchurSolver {
    pub fn new(mesh: &Mesh) -> Self {
        let pattern = CsrMatrix::vertex_pattern(mesh);
        let order = fill_reducing_order(&pattern);
        let mut pos = vec![0usize; pattern.n()];
        for (newi, &old) in order.iter().enumerate() {
            pos[old] = newi;
        }
        let kl = bandwidth(&pattern, &pos);
        let band = BandedLu::new(pattern.n(), kl);
        SchurSolver {
            pos,
            order,
            kl,
            schur: pattern,
            band,
            rhs: vec![0.0; mesh.n_vertices()],
            last_residual: 0.0,
        }
    }

    pub fn bandwidth(&self) -> usize {
        self.kl
    }

    /// Relative residual of the last solve against the full block system.
    pub fn last_residual(&self) -> f64 {
        self.last_residual
    }

    /// Solves the block system for the increment.
    pub fn solve(&mut self, mesh: &Mesh, blocks: &JacobianBlocks) -> Result<DofVector> {
        let nv = mesh.n_vertices();
        let nc = mesh.n_cells();
        debug_assert_eq!(blocks.n_vertices(), nv);
        debug_assert_eq!(blocks.n_cells(), nc);

        // Schur complement S = A - B D^-1 C and condensed right-hand side,
        // accumulated cell by cell without fill beyond the vertex pattern
        self.schur.copy_values_from(&blocks.a);
        self.rhs.copy_from_slice(&blocks.b1);
        for ci in 0..nc {
            let d = blocks.d[ci];
            if d == 0.0 {
                return Err(Error::SingularCellBlock { cell: ci });
            }
            let inv_d = 1.0 / d;
            let ring = &mesh.cell(ci).vertices;
            for (j, &vj) in ring.iter().enumerate() {
                let w = blocks.b[ci][j] * inv_d;
                if w == 0.0 {
                    continue;
                }
                self.rhs[vj] -= w * blocks.b2[ci];
                for (i, &vi) in ring.iter().enumerate() {
                    self.schur.add(vj, vi, -w * blocks.c[ci][i]);
                }
            }
        }

        // permute into band storage and factor
        self.band.clear();
        for r in 0..nv {
            let (cols, vals) = self.schur.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                self.band.add(self.pos[r], self.pos[c], v);
            }
        }
        self.band.factor().map_err(|e| match e {
            Error::LinearSolve(msg) => Error::LinearSolve(format!(
                "Schur system: {msg} (cond estimate {:.3e})",
                self.band.cond_estimate()
            )),
            other => other,
        })?;

        let mut x = vec![0.0; nv];
        for r in 0..nv {
            x[self.pos[r]] = self.rhs[r];
        }
        self.band.solve(&mut x);

        let mut inc = DofVector {
            cell: vec![0.0; nc],
            vertex: vec![0.0; nv],
        };
        for newi in 0..nv {
            inc.vertex[self.order[newi]] = x[newi];
        }
        // back substitution for the cell increments
        for ci in 0..nc {
            let mut acc = blocks.b2[ci];
            for (i, &vi) in mesh.cell(ci).vertices.iter().enumerate() {
                acc -= blocks.c[ci][i] * inc.vertex[vi];
            }
            inc.cell[ci] = acc / blocks.d[ci];
        }

        // guard against a silently broken factorization
        let mut yv = vec![0.0; nv];
        let mut yc = vec![0.0; nc];
        blocks.apply(mesh, &inc.vertex, &inc.cell, &mut yv, &mut yc);
        let mut err = 0.0f64;
        let mut scale = 0.0f64;
        for (y, b) in yv.iter().zip(&blocks.b1) {
            err = err.max((y - b).abs());
            scale = scale.max(b.abs());
        }
        for (y, b) in yc.iter().zip(&blocks.b2) {
            err = err.max((y - b).abs());
            scale = scale.max(b.abs());
        }
        self.last_residual = err / scale.max(f64::MIN_POSITIVE);
        if scale > 0.0 && self.last_residual > RESIDUAL_GUARD {
            return Err(Error::LinearSolve(format!(
                "Schur solve residual {:.3e} exceeds guard (cond estimate {:.3e})",
                self.last_residual,
                self.band.cond_estimate()
            )));
        }
        Ok(inc)
    }
}

/// One-shot condensation solve of a block system.
pub fn schur_solve(mesh: &Mesh, blocks: &JacobianBlocks) -> Result<DofVector> {
    SchurSolver::new(mesh).solve(mesh, blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_structured, MeshKind};
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};

    fn random_blocks(mesh: &Mesh, seed: u64) -> JacobianBlocks {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut blocks = JacobianBlocks::new(mesh);
        // SPD-ish A: diagonally dominant with symmetric pattern
        for v in 0..mesh.n_vertices() {
            blocks.a.add(v, v, 4.0 + rng.random_range(0.0..1.0));
        }
        for (ci, cell) in mesh.cells().iter().enumerate() {
            blocks.d[ci] = 2.0 + rng.random_range(0.0..1.0);
            for (j, &vj) in cell.vertices.iter().enumerate() {
                let b: f64 = rng.random_range(-0.5..0.5);
                let c: f64 = rng.random_range(-0.5..0.5);
                blocks.b[ci][j] = b;
                blocks.c[ci][j] = c;
                for &vi in &cell.vertices {
                    if vi != vj {
                        blocks.a.add(vj, vi, rng.random_range(-0.3..0.3));
                    }
                }
            }
        }
        for v in blocks.b1.iter_mut() {
            *v = rng.random_range(-1.0..1.0);
        }
        for v in blocks.b2.iter_mut() {
            *v = rng.random_range(-1.0..1.0);
        }
        blocks
    }

    #[test]
    fn condensation_matches_dense_full_system_solve() {
        for (n, seed) in [(2usize, 1u64), (3, 2), (5, 3)] {
            let mesh = generate_structured(MeshKind::SplitTriangles, n, None).unwrap();
            let blocks = random_blocks(&mesh, seed);
            let inc = schur_solve(&mesh, &blocks).unwrap();

            let dense = blocks.to_dense(&mesh);
            let nv = mesh.n_vertices();
            let mut rhs = DVector::zeros(nv + mesh.n_cells());
            for (i, &v) in blocks.b1.iter().enumerate() {
                rhs[i] = v;
            }
            for (i, &v) in blocks.b2.iter().enumerate() {
                rhs[nv + i] = v;
            }
            let x = dense.lu().solve(&rhs).expect("dense solve");
            for v in 0..nv {
                approx::assert_relative_eq!(
                    inc.vertex[v],
                    x[v],
                    epsilon = 1e-10,
                    max_relative = 1e-10
                );
            }
            for c in 0..mesh.n_cells() {
                approx::assert_relative_eq!(
                    inc.cell[c],
                    x[nv + c],
                    epsilon = 1e-10,
                    max_relative = 1e-10
                );
            }
        }
    }

    #[test]
    fn decoupled_blocks_reduce_to_independent_solves() {
        let mesh = generate_structured(MeshKind::Cartesian, 2, None).unwrap();
        let mut blocks = JacobianBlocks::new(&mesh);
        for v in 0..mesh.n_vertices() {
            blocks.a.add(v, v, 2.0);
            blocks.b1[v] = (v + 1) as f64;
        }
        for c in 0..mesh.n_cells() {
            blocks.d[c] = 1.0;
            blocks.b2[c] = 10.0 * (c + 1) as f64;
        }
        let inc = schur_solve(&mesh, &blocks).unwrap();
        for v in 0..mesh.n_vertices() {
            approx::assert_relative_eq!(inc.vertex[v], (v + 1) as f64 / 2.0);
        }
        for c in 0..mesh.n_cells() {
            approx::assert_relative_eq!(inc.cell[c], 10.0 * (c + 1) as f64);
        }
    }

    #[test]
    fn singular_schur_matrix_is_rejected() {
        // A = B D^-1 C makes the condensed matrix exactly zero
        let mesh = crate::testutil::unit_square_mesh();
        let mut blocks = JacobianBlocks::new(&mesh);
        blocks.d[0] = 1.0;
        for j in 0..4 {
            blocks.b[0][j] = 1.0;
            blocks.c[0][j] = 1.0;
        }
        for v in 0..mesh.n_vertices() {
            for w in 0..mesh.n_vertices() {
                blocks.a.add(v, w, 1.0);
            }
            blocks.b1[v] = 1.0;
        }
        assert!(matches!(
            schur_solve(&mesh, &blocks),
            Err(Error::LinearSolve(_))
        ));
    }

    #[test]
    fn zero_cell_diagonal_is_rejected() {
        let mesh = crate::testutil::unit_square_mesh();
        let mut blocks = random_blocks(&mesh, 9);
        blocks.d[0] = 0.0;
        assert!(matches!(
            schur_solve(&mesh, &blocks),
            Err(Error::SingularCellBlock { cell: 0 })
        ));
    }
}
