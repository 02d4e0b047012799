//! Finite-volume solver for degenerate parabolic equations with a
//! gradient-flow structure, built on the Vertex Approximate Gradient (VAG)
//! discretization: unknowns at cell centers and vertices, fluxes derived from
//! a P1 reconstruction on the simplicial submesh, and a nonlinear flux choice
//! that makes the discrete free energy decrease step by step.

pub mod assembly;
pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod mesh;
pub mod physics;
pub mod solver;

pub use assembly::{DofVector, FluxScheme, PressureSystem, System};
pub use error::{Error, Result};
pub use mesh::{Mesh, Submesh};
pub use physics::{ExactSolution, HeteroModel, Model, Potential, TensorField};
pub use solver::{NewtonConfig, SolveReport, TimeStepper, Trajectory};
