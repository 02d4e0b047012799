//! Mass lumping: distribution of each cell measure between the cell dof and
//! its vertex dofs through nonnegative weights.

use crate::error::{Error, Result};

use super::Mesh;

/// How the lumping weights are chosen.
#[derive(Debug, Clone)]
pub enum LumpingRule {
    /// alpha_{cell,vertex} = f / (number of vertices of the cell), so each
    /// cell sends the fraction f of its measure to its vertices.
    UniformFraction(f64),
    /// Explicit weights, one entry per (cell, local vertex), aligned with
    /// each cell's vertex ring.
    Explicit(Vec<Vec<f64>>),
}

/// The measures attached to the degrees of freedom.
#[derive(Debug, Clone)]
pub struct LumpedMeasures {
    /// Per-cell weights, aligned with the cell's vertex ring.
    pub alpha: Vec<Vec<f64>>,
    /// m_{cell,vertex} = alpha * meas(cell), same layout as `alpha`.
    pub m_cell_vertex: Vec<Vec<f64>>,
    pub m_cell: Vec<f64>,
    pub m_vertex: Vec<f64>,
}

impl LumpedMeasures {
    pub fn total_mass(&self) -> f64 {
        self.m_cell.iter().sum::<f64>() + self.m_vertex.iter().sum::<f64>()
    }
}

/// Evaluates the rule and checks that every dof receives strictly positive
/// mass. Zero cell or vertex mass would make the degenerate problem singular
/// and is rejected.
pub fn compute_lumping(mesh: &Mesh, rule: &LumpingRule) -> Result<LumpedMeasures> {
    let alpha: Vec<Vec<f64>> = match rule {
        LumpingRule::UniformFraction(f) => {
            if !(*f > 0.0 && *f < 1.0) {
                return Err(Error::InvalidLumping(format!(
                    "uniform fraction must lie in (0, 1), got {f}"
                )));
            }
            mesh.cells()
                .iter()
                .map(|c| vec![f / c.n_vertices() as f64; c.n_vertices()])
                .collect()
        }
        LumpingRule::Explicit(weights) => {
            if weights.len() != mesh.n_cells() {
                return Err(Error::InvalidLumping(format!(
                    "expected weights for {} cells, got {}",
                    mesh.n_cells(),
                    weights.len()
                )));
            }
            for (ci, (w, cell)) in weights.iter().zip(mesh.cells()).enumerate() {
                if w.len() != cell.n_vertices() {
                    return Err(Error::InvalidLumping(format!(
                        "cell {ci}: expected {} weights, got {}",
                        cell.n_vertices(),
                        w.len()
                    )));
                }
                if w.iter().any(|&a| a < 0.0) {
                    return Err(Error::InvalidLumping(format!(
                        "cell {ci}: negative weight"
                    )));
                }
                let sum: f64 = w.iter().sum();
                if sum > 1.0 {
                    return Err(Error::InvalidLumping(format!(
                        "cell {ci}: weights sum to {sum} > 1"
                    )));
                }
            }
            weights.clone()
        }
    };

    let mut m_cell = Vec::with_capacity(mesh.n_cells());
    let mut m_cell_vertex = Vec::with_capacity(mesh.n_cells());
    let mut m_vertex = vec![0.0; mesh.n_vertices()];
    for (cell, w) in mesh.cells().iter().zip(&alpha) {
        let area = cell.area();
        let mkv: Vec<f64> = w.iter().map(|&a| a * area).collect();
        for (&v, &m) in cell.vertices.iter().zip(&mkv) {
            m_vertex[v] += m;
        }
        let sent: f64 = mkv.iter().sum();
        m_cell.push(area - sent);
        m_cell_vertex.push(mkv);
    }

    for (ci, &m) in m_cell.iter().enumerate() {
        if m <= 0.0 {
            return Err(Error::InvalidLumping(format!(
                "cell {ci} keeps nonpositive mass {m:e}"
            )));
        }
    }
    for (vi, &m) in m_vertex.iter().enumerate() {
        if m <= 0.0 {
            return Err(Error::InvalidLumping(format!(
                "vertex {vi} receives nonpositive mass {m:e}"
            )));
        }
    }

    Ok(LumpedMeasures { alpha, m_cell_vertex, m_cell, m_vertex })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_structured, MeshKind};
    use crate::testutil::unit_square_mesh;
    use approx::assert_relative_eq;

    #[test]
    fn single_square_fraction() {
        let mesh = unit_square_mesh();
        let lumped = compute_lumping(&mesh, &LumpingRule::UniformFraction(0.1)).unwrap();
        for w in &lumped.alpha[0] {
            assert_relative_eq!(*w, 0.025);
        }
        for m in &lumped.m_vertex {
            assert_relative_eq!(*m, 0.025);
        }
        assert_relative_eq!(lumped.m_cell[0], 0.9);
        assert_relative_eq!(lumped.total_mass(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_fraction_rejected() {
        let mesh = unit_square_mesh();
        assert!(compute_lumping(&mesh, &LumpingRule::UniformFraction(0.0)).is_err());
        assert!(compute_lumping(&mesh, &LumpingRule::UniformFraction(1.0)).is_err());
    }

    #[test]
    fn explicit_weight_sum_above_one_rejected() {
        let mesh = unit_square_mesh();
        let err = compute_lumping(
            &mesh,
            &LumpingRule::Explicit(vec![vec![0.3, 0.3, 0.3, 0.3]]),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidLumping(_)));
    }

    #[test]
    fn interior_vertex_mass_on_two_by_two() {
        let mesh = generate_structured(MeshKind::Cartesian, 2, None).unwrap();
        let lumped = compute_lumping(&mesh, &LumpingRule::UniformFraction(0.1)).unwrap();
        // the interior vertex is shared by all four cells
        let interior = (0..mesh.n_vertices())
            .find(|&v| !mesh.is_boundary_vertex(v))
            .unwrap();
        assert_relative_eq!(lumped.m_vertex[interior], 4.0 * 0.025 * 0.25);
        assert_relative_eq!(lumped.total_mass(), 1.0, epsilon = 1e-15);
    }
}
