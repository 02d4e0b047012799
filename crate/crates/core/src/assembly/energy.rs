//! Discrete free energy, its dissipation, the relative entropy towards an
//! equilibrium profile, and initial-data discretization.

use nalgebra::Point2;

use crate::error::{Error, Result};
use crate::mesh::{LumpedMeasures, Mesh};
use crate::physics::{GibbsState, Model, Potential};

use super::{DofVector, StiffnessSet};

/// Discrete free energy: the mass-weighted sum of the entropy function plus
/// the potential energy of the dofs. Infinite whenever some entropy value is
/// infinite.
pub fn discrete_energy(
    u: &DofVector,
    model: &Model,
    potential_vec: &DofVector,
    lumped: &LumpedMeasures,
) -> f64 {
    let mut total = 0.0;
    for ((value, v), m) in u.cell.iter().zip(&potential_vec.cell).zip(&lumped.m_cell) {
        total += m * (model.gamma(*value) + value * v);
    }
    for ((value, v), m) in
        u.vertex.iter().zip(&potential_vec.vertex).zip(&lumped.m_vertex)
    {
        total += m * (model.gamma(*value) + value * v);
    }
    total
}

/// The energy dissipation rate of a state: the sum over cells of the
/// quadratic form of the mobility-weighted stiffness applied to the
/// hydrostatic pressure differences. Returned without the time-step factor.
pub fn dissipation(
    u: &DofVector,
    model: &Model,
    potential_vec: &DofVector,
    mesh: &Mesh,
    stiffness: &StiffnessSet,
) -> f64 {
    let mut total = 0.0;
    for (ci, cell) in mesh.cells().iter().enumerate() {
        let a = &stiffness.cells[ci].mat;
        let k = cell.n_vertices();
        let eta_c = model.eta(u.cell[ci]);
        let hc = model.p(u.cell[ci]) + potential_vec.cell[ci];
        let sg: Vec<(f64, f64)> = (0..k)
            .map(|j| {
                let vj = cell.vertices[j];
                let s = (0.5 * (eta_c + model.eta(u.vertex[vj]))).sqrt();
                let g = hc - (model.p(u.vertex[vj]) + potential_vec.vertex[vj]);
                (s, g)
            })
            .collect();
        for (j, &(sj, gj)) in sg.iter().enumerate() {
            let mut flux = 0.0;
            for (jp, &(sp, gp)) in sg.iter().enumerate() {
                flux += a[(j, jp)] * sp * gp;
            }
            total += gj * sj * flux;
        }
    }
    total
}

/// Relative entropy towards a positive profile `w` sampled at the dof sites,
/// with the convention `0 log 0 = 0`. Undefined for states with negative
/// entries.
pub fn relative_entropy(
    u: &DofVector,
    w_samples: &DofVector,
    lumped: &LumpedMeasures,
) -> Result<f64> {
    let term = |uv: f64, wv: f64| -> f64 {
        debug_assert!(wv > 0.0);
        if uv == 0.0 {
            wv
        } else {
            uv * (uv / wv).ln() - uv + wv
        }
    };
    for (i, v) in u.vertex.iter().chain(u.cell.iter()).enumerate() {
        if *v < 0.0 {
            return Err(Error::NegativeDof { dof: i });
        }
    }
    let mut total = 0.0;
    for ((uv, wv), m) in u.cell.iter().zip(&w_samples.cell).zip(&lumped.m_cell) {
        total += m * term(*uv, *wv);
    }
    for ((uv, wv), m) in u.vertex.iter().zip(&w_samples.vertex).zip(&lumped.m_vertex) {
        total += m * term(*uv, *wv);
    }
    Ok(total)
}

/// Samples a Gibbs profile at the dof sites.
pub fn sample_gibbs(mesh: &Mesh, w: &GibbsState) -> DofVector {
    DofVector::sample(mesh, |x| w.eval(x))
}

/// Samples the exterior potential at the dof sites.
pub fn sample_potential(mesh: &Mesh, potential: &Potential) -> DofVector {
    DofVector::sample(mesh, |x| potential.value(x))
}

/// Discretizes nonnegative initial data by point sampling at the dof sites.
/// The discrete mass of the result is what the scheme conserves exactly.
pub fn discretize_initial<F: Fn(Point2<f64>) -> f64>(
    mesh: &Mesh,
    u0: F,
) -> Result<DofVector> {
    let out = DofVector::sample(mesh, u0);
    for (i, v) in out.vertex.iter().chain(out.cell.iter()).enumerate() {
        if *v < 0.0 {
            return Err(Error::NegativeDof { dof: i });
        }
        if !v.is_finite() {
            return Err(Error::InvalidConfig(
                "initial data sample is not finite".into(),
            ));
        }
    }
    Ok(out)
}
