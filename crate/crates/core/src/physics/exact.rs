//! Closed-form solutions of the benchmark problems and the long-time
//! equilibrium profile of the no-flux Fokker-Planck case.

use std::f64::consts::PI;

use nalgebra::Point2;

use crate::error::{Error, Result};

use super::{Model, Potential};

/// Analytical solutions used for convergence studies and Dirichlet data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExactSolution {
    /// Linear Fokker-Planck equation with no-flux boundary: a decaying mode
    /// plus the steady profile `pi exp(g (x - 1/2))`.
    T1 { lx: f64, g: f64 },
    /// Porous medium front `max(2 lx t - x, 0)`.
    T2OneD { lx: f64 },
    /// Separable paraboloid `(alpha (x-1/2)^2 + beta (y-1/2)^2) / (1 - t)`
    /// with `alpha = 1/(16 lx)`, `beta = 1/(16 ly)`; defined for t < 1.
    T2TwoD { lx: f64, ly: f64 },
    /// Porous medium front with drift: `max(lx (2 + g) t - x, 0)`.
    T3 { lx: f64, g: f64 },
}

impl ExactSolution {
    pub fn eval(&self, x: Point2<f64>, t: f64) -> f64 {
        match *self {
            ExactSolution::T1 { lx, g } => {
                let alpha = lx * (PI * PI + 0.25 * g * g);
                (-alpha * t + 0.5 * g * x.x).exp()
                    * (PI * (PI * x.x).cos() + 0.5 * g * (PI * x.x).sin())
                    + PI * (g * (x.x - 0.5)).exp()
            }
            ExactSolution::T2OneD { lx } => (2.0 * lx * t - x.x).max(0.0),
            ExactSolution::T2TwoD { lx, ly } => {
                debug_assert!(t < 1.0);
                let alpha = 1.0 / (16.0 * lx);
                let beta = 1.0 / (16.0 * ly);
                let dx = x.x - 0.5;
                let dy = x.y - 0.5;
                (alpha * dx * dx + beta * dy * dy) / (1.0 - t)
            }
            ExactSolution::T3 { lx, g } => (lx * (2.0 + g) * t - x.x).max(0.0),
        }
    }

    /// The steady part of the T1 solution, when one exists.
    pub fn steady_part(&self, x: Point2<f64>) -> Option<f64> {
        match *self {
            ExactSolution::T1 { g, .. } => Some(PI * (g * (x.x - 0.5)).exp()),
            _ => None,
        }
    }
}

/// An equilibrium profile `w(x) = amplitude * exp(g x)`: the hydrostatic
/// pressure `log w + V` is constant when `V = -g x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GibbsState {
    pub amplitude: f64,
    pub g: f64,
}

impl GibbsState {
    pub fn eval(&self, x: Point2<f64>) -> f64 {
        self.amplitude * (self.g * x.x).exp()
    }
}

/// Equilibrium profile with prescribed total mass over the unit square, for
/// log-pressure models under a gravitational (or zero) potential.
pub fn gibbs_state(model: &Model, potential: &Potential, mass: f64) -> Result<GibbsState> {
    if !model.singular() {
        return Err(Error::InvalidModel(format!(
            "gibbs_state supports log-pressure models only, got {}",
            model.name()
        )));
    }
    let g = match potential {
        Potential::Zero => 0.0,
        Potential::Gravity { g } => *g,
        Potential::Quadratic { .. } => {
            return Err(Error::InvalidModel(
                "gibbs_state supports gravitational potentials only".into(),
            ))
        }
    };
    if !(mass > 0.0) {
        return Err(Error::InvalidModel("gibbs_state requires positive mass".into()));
    }
    // integral of exp(g x) over the unit square is (e^g - 1) / g
    let integral = if g.abs() < 1e-12 { 1.0 } else { (g.exp() - 1.0) / g };
    Ok(GibbsState { amplitude: mass / integral, g })
}

/// Mass over the unit square of the T1 long-time profile
/// `pi exp(g (x - 1/2))`.
pub fn t1_steady_mass(g: f64) -> f64 {
    if g.abs() < 1e-12 {
        PI
    } else {
        PI * (-0.5 * g).exp() * (g.exp() - 1.0) / g
    }
}

/// The T1 long-time profile itself.
pub fn t1_steady(g: f64) -> GibbsState {
    GibbsState { amplitude: PI * (-0.5 * g).exp(), g }
}
