//! Direct solution of the condensed vertex systems: reverse Cuthill-McKee
//! ordering to concentrate the profile near the diagonal, then a banded LU
//! factorization with partial pivoting.

use crate::assembly::CsrMatrix;
use crate::error::{Error, Result};

/// Breadth-first levels from `start` over unblocked vertices; returns the
/// eccentricity and a farthest vertex of minimum degree.
fn bfs_far(pattern: &CsrMatrix, start: usize, component: &[bool]) -> (usize, usize) {
    let n = pattern.n();
    let mut level = vec![usize::MAX; n];
    level[start] = 0;
    let mut queue = std::collections::VecDeque::from([start]);
    let mut far = start;
    let mut ecc = 0;
    while let Some(v) = queue.pop_front() {
        for &w in pattern.row(v).0 {
            if component[w] && level[w] == usize::MAX {
                level[w] = level[v] + 1;
                if level[w] > ecc
                    || (level[w] == ecc && pattern.row(w).0.len() < pattern.row(far).0.len())
                {
                    ecc = level[w];
                    far = w;
                }
                queue.push_back(w);
            }
        }
    }
    (ecc, far)
}

/// Reverse Cuthill-McKee ordering of a symmetric sparsity pattern, seeded at
/// pseudo-peripheral vertices. Returns `order` with `order[new] = old`.
pub fn reverse_cuthill_mckee(pattern: &CsrMatrix) -> Vec<usize> {
    let n = pattern.n();
    let degree = |v: usize| pattern.row(v).0.len();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = std::collections::VecDeque::new();
    let mut nbrs: Vec<usize> = Vec::new();

    loop {
        let seed = (0..n).filter(|&v| !visited[v]).min_by_key(|&v| degree(v));
        let Some(seed) = seed else { break };
        // walk to a pseudo-peripheral vertex of this component
        let unvisited: Vec<bool> = visited.iter().map(|&v| !v).collect();
        let mut start = seed;
        let mut ecc = 0;
        loop {
            let (e, far) = bfs_far(pattern, start, &unvisited);
            if e > ecc {
                ecc = e;
                start = far;
            } else {
                break;
            }
        }
        visited[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            nbrs.clear();
            nbrs.extend(pattern.row(v).0.iter().copied().filter(|&w| !visited[w]));
            nbrs.sort_by_key(|&w| (degree(w), w));
            for &w in &nbrs {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// RCM ordering, falling back to the identity permutation when that has the
/// smaller bandwidth (structured grids are often numbered near-optimally
/// already).
pub fn fill_reducing_order(pattern: &CsrMatrix) -> Vec<usize> {
    let n = pattern.n();
    let rcm = reverse_cuthill_mckee(pattern);
    let mut pos = vec![0usize; n];
    for (newi, &old) in rcm.iter().enumerate() {
        pos[old] = newi;
    }
    let identity_pos: Vec<usize> = (0..n).collect();
    if bandwidth(pattern, &pos) <= bandwidth(pattern, &identity_pos) {
        rcm
    } else {
        identity_pos
    }
}

/// Half bandwidth of the pattern under a permutation given by positions.
pub fn bandwidth(pattern: &CsrMatrix, pos: &[usize]) -> usize {
    let mut b = 0usize;
    for r in 0..pattern.n() {
        for &c in pattern.row(r).0 {
            b = b.max(pos[r].abs_diff(pos[c]));
        }
    }
    b
}

/// Banded LU factorization with partial pivoting, in the usual band layout
/// with `kl` extra superdiagonals of fill space.
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku_eff: usize,
    ldab: usize,
    ab: Vec<f64>,
    piv: Vec<usize>,
    cond_est: f64,
}

impl BandedLu {
    /// Allocates storage for an n x n matrix with lower and upper bandwidth
    /// `kl` (the patterns here are structurally symmetric).
    pub fn new(n: usize, kl: usize) -> Self {
        let ku_eff = 2 * kl; // ku + kl fill rows
        let ldab = kl + ku_eff + 1;
        BandedLu {
            n,
            kl,
            ku_eff,
            ldab,
            ab: vec![0.0; ldab * n.max(1)],
            piv: vec![0; n],
            cond_est: 0.0,
        }
    }

    #[inline]
    fn idx(&self, r: usize, c: usize) -> usize {
        debug_assert!(r + self.ku_eff >= c && c + self.kl >= r);
        c * self.ldab + (r + self.ku_eff - c)
    }

    pub fn clear(&mut self) {
        self.ab.iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        let i = self.idx(r, c);
        self.ab[i] += v;
    }

    /// Factors in place. Fails on a vanishing pivot, reporting the diagonal
    /// growth ratio as a crude conditioning indicator.
    pub fn factor(&mut self) -> Result<()> {
        let n = self.n;
        let mut max_piv = 0.0f64;
        let mut min_piv = f64::INFINITY;
        let scale = self.ab.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tiny = (1e-14 * scale).max(f64::MIN_POSITIVE);
        for k in 0..n {
            let rmax = (k + self.kl).min(n - 1);
            let mut p = k;
            let mut best = self.ab[self.idx(k, k)].abs();
            for r in k + 1..=rmax {
                let v = self.ab[self.idx(r, k)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best <= tiny {
                return Err(Error::LinearSolve(format!(
                    "singular band matrix at column {k} (pivot {best:e}, growth {:e})",
                    if min_piv > 0.0 { max_piv / min_piv.max(f64::MIN_POSITIVE) } else { 0.0 }
                )));
            }
            self.piv[k] = p;
            let cmax = (k + self.ku_eff).min(n - 1);
            if p != k {
                for c in k..=cmax {
                    let (ik, ip) = (self.idx(k, c), self.idx(p, c));
                    self.ab.swap(ik, ip);
                }
            }
            let pivot = self.ab[self.idx(k, k)];
            max_piv = max_piv.max(pivot.abs());
            min_piv = min_piv.min(pivot.abs());
            for r in k + 1..=rmax {
                let i_rk = self.idx(r, k);
                let m = self.ab[i_rk] / pivot;
                self.ab[i_rk] = m;
                if m != 0.0 {
                    for c in k + 1..=cmax {
                        let i_kc = self.idx(k, c);
                        let i_rc = self.idx(r, c);
                        self.ab[i_rc] -= m * self.ab[i_kc];
                    }
                }
            }
        }
        self.cond_est = if n == 0 { 1.0 } else { max_piv / min_piv };
        Ok(())
    }

    /// Diagonal growth ratio of the factorization, a cheap conditioning
    /// indicator.
    pub fn cond_estimate(&self) -> f64 {
        self.cond_est
    }

    pub fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let rmax = (k + self.kl).min(n.saturating_sub(1));
            for r in k + 1..=rmax {
                b[r] -= self.ab[self.idx(r, k)] * b[k];
            }
        }
        for k in (0..n).rev() {
            let cmax = (k + self.ku_eff).min(n - 1);
            let mut acc = b[k];
            for c in k + 1..=cmax {
                acc -= self.ab[self.idx(k, c)] * b[c];
            }
            b[k] = acc / self.ab[self.idx(k, k)];
        }
    }
}
