//! Error norms against analytical solutions, convergence rates, and
//! exponential-decay fitting of entropy time series.

use nalgebra::Point2;

use crate::error::{Error, Result};
use crate::mesh::{LumpedMeasures, Mesh};
use crate::solver::Trajectory;

/// Space-time discrete errors: the trajectory is compared to the exact
/// solution at the dof sites, weighted by the lumped masses in space and the
/// step sizes in time:
///
/// ```text
/// err_q   = (sum_n dt_n sum_b m_b |u_b^n - exact(x_b, t_n)|^q)^(1/q)
/// err_inf = max_{n,b} |u_b^n - exact(x_b, t_n)|
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorTriple {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

/// Discrete space-time error norms of a trajectory against an exact
/// solution sampled at the dof sites.
pub fn error_norms<F: Fn(Point2<f64>, f64) -> f64>(
    trajectory: &Trajectory,
    exact: F,
    mesh: &Mesh,
    lumped: &LumpedMeasures,
) -> ErrorTriple {
    let mut l1 = 0.0;
    let mut l2 = 0.0;
    let mut linf = 0.0f64;
    for (n, (state, &t)) in trajectory.states.iter().zip(&trajectory.times).enumerate() {
        let dt = if n == 0 { 0.0 } else { t - trajectory.times[n - 1] };
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        let mut accumulate = |value: f64, site: Point2<f64>, m: f64| {
            let e = (value - exact(site, t)).abs();
            s1 += m * e;
            s2 += m * e * e;
            linf = linf.max(e);
        };
        for (ci, &v) in state.cell.iter().enumerate() {
            accumulate(v, mesh.cell(ci).center, lumped.m_cell[ci]);
        }
        for (vi, &v) in state.vertex.iter().enumerate() {
            accumulate(v, mesh.vertex(vi), lumped.m_vertex[vi]);
        }
        l1 += dt * s1;
        l2 += dt * s2;
    }
    ErrorTriple { l1, l2: l2.sqrt(), linf }
}

/// Log-ratio convergence rates of an error sequence over mesh sizes.
/// `None` marks rates that are undefined because an error vanishes.
pub fn convergence_rates(errors: &[f64], h: &[f64]) -> Result<Vec<Option<f64>>> {
    if errors.len() != h.len() {
        return Err(Error::Diagnostics(format!(
            "got {} errors for {} mesh sizes",
            errors.len(),
            h.len()
        )));
    }
    for w in h.windows(2) {
        if w[1] >= w[0] {
            return Err(Error::Diagnostics("mesh sizes must strictly decrease".into()));
        }
    }
    Ok(errors
        .windows(2)
        .zip(h.windows(2))
        .map(|(e, hh)| {
            if e[0] > 0.0 && e[1] > 0.0 {
                Some((e[0] / e[1]).ln() / (hh[0] / hh[1]).ln())
            } else {
                None
            }
        })
        .collect())
}

/// Least-squares line through (t, log E).
#[derive(Debug, Clone, Copy)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Fits `log E = intercept + slope t` over the samples with `t` inside the
/// window. Fails if fewer than two samples fall in the window or any entropy
/// value there is nonpositive.
pub fn entropy_decay_fit(
    series: &[(f64, f64)],
    window: (f64, f64),
) -> Result<DecayFit> {
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for &(t, e) in series {
        if t >= window.0 && t <= window.1 {
            if e <= 0.0 {
                return Err(Error::Diagnostics(format!(
                    "nonpositive entropy {e:e} at t = {t} inside the fit window"
                )));
            }
            pts.push((t, e.ln()));
        }
    }
    if pts.len() < 2 {
        return Err(Error::Diagnostics(
            "fit window contains fewer than two samples".into(),
        ));
    }
    let n = pts.len() as f64;
    let mean_t = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for &(t, y) in &pts {
        sxx += (t - mean_t) * (t - mean_t);
        sxy += (t - mean_t) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    if sxx == 0.0 {
        return Err(Error::Diagnostics("degenerate fit window".into()));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_t;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(DecayFit { slope, intercept, r_squared })
}
