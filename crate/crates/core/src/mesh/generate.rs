//! Structured mesh families on the unit square.

use nalgebra::Point2;

use crate::error::{Error, Result};

use super::{CellSpec, Mesh};

/// Families produced by [`generate_structured`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshKind {
    /// n x n axis-aligned squares.
    Cartesian,
    /// Each square halved into two triangles; the diagonal direction
    /// alternates with the checkerboard parity so the pattern has no mirror
    /// symmetry axis.
    SplitTriangles,
    /// Layered quadrilaterals with a sinusoidal vertical shear of the
    /// interior rows, in the spirit of strongly distorted benchmark grids.
    KershawLike,
}

impl MeshKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "cartesian" => Ok(MeshKind::Cartesian),
            "split-triangles" => Ok(MeshKind::SplitTriangles),
            "kershaw-like" => Ok(MeshKind::KershawLike),
            other => Err(Error::InvalidConfig(format!("unknown mesh kind {other:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MeshKind::Cartesian => "cartesian",
            MeshKind::SplitTriangles => "split-triangles",
            MeshKind::KershawLike => "kershaw-like",
        }
    }
}

/// Builds an n x n structured mesh of the unit square. `distortion` is only
/// used by the kershaw-like family and must lie in [0, 1).
pub fn generate_structured(
    kind: MeshKind,
    n: usize,
    distortion: Option<f64>,
) -> Result<Mesh> {
    if n < 1 {
        return Err(Error::InvalidConfig("mesh subdivisions must be >= 1".into()));
    }
    match kind {
        MeshKind::Cartesian => grid_mesh(n, |i, j| uniform_vertex(n, i, j)),
        MeshKind::SplitTriangles => split_triangles(n),
        MeshKind::KershawLike => {
            let d = distortion.unwrap_or(0.0);
            if !(0.0..1.0).contains(&d) {
                return Err(Error::InvalidConfig(format!(
                    "kershaw-like distortion must lie in [0, 1), got {d}"
                )));
            }
            grid_mesh(n, |i, j| kershaw_vertex(n, i, j, d))
        }
    }
}

fn uniform_vertex(n: usize, i: usize, j: usize) -> Point2<f64> {
    Point2::new(i as f64 / n as f64, j as f64 / n as f64)
}

fn kershaw_vertex(n: usize, i: usize, j: usize, d: f64) -> Point2<f64> {
    let x = i as f64 / n as f64;
    let t = j as f64 / n as f64;
    // boundary rows stay straight; interior rows shear sinusoidally in x
    let ramp = 4.0 * t * (1.0 - t);
    let y = t + 0.2 * d * (2.0 * std::f64::consts::PI * x).sin() * ramp;
    Point2::new(x, y)
}

fn grid_mesh<F: Fn(usize, usize) -> Point2<f64>>(n: usize, vertex: F) -> Result<Mesh> {
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(vertex(i, j));
        }
    }
    let mut specs = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            specs.push(CellSpec::new(vec![
                idx(i, j),
                idx(i + 1, j),
                idx(i + 1, j + 1),
                idx(i, j + 1),
            ]));
        }
    }
    Mesh::new(vertices, specs)
}

fn split_triangles(n: usize) -> Result<Mesh> {
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(uniform_vertex(n, i, j));
        }
    }
    let mut specs = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) =
                (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            if (i + j) % 2 == 0 {
                specs.push(CellSpec::new(vec![a, b, c]));
                specs.push(CellSpec::new(vec![a, c, d]));
            } else {
                specs.push(CellSpec::new(vec![a, b, d]));
                specs.push(CellSpec::new(vec![b, c, d]));
            }
        }
    }
    Mesh::new(vertices, specs)
}
