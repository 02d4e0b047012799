//! Data of the continuous problem: mobility/pressure model bundles with
//! their entropy and semi-Kirchhoff functions, permeability tensors,
//! exterior potentials, and the heterogeneous drain/barrier laws.

mod exact;
mod quad;

pub use exact::{gibbs_state, t1_steady, t1_steady_mass, ExactSolution, GibbsState};
pub use quad::{adaptive_simpson, integrate_from_zero_sqrt, integrate_sqrt_substituted};

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix2, Point2};

use crate::error::{Error, Result};

/// Tolerance of the quadrature backing custom model functions.
const QUAD_TOL: f64 = 1e-10;

/// Built-in mobility/pressure pairs.
///
/// The log-pressure entries are singular at zero (`p(0) = -inf`), so their
/// admissible states are strictly positive. The polynomial entries extend to
/// the whole line: the mobility evenly, the pressure by `p(u) = 2p(0) - p(-u)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CatalogModel {
    /// eta(u) = u, p(u) = log u.
    FokkerPlanckLog,
    /// eta(u) = 2u^2, p(u) = log u.
    PmeA,
    /// eta(u) = 2u, p(u) = u.
    PmeB,
    /// eta(u) = 1, p(u) = u^2.
    PmeC,
    /// eta(u) = u, p(u) = 2u.
    PmeDrift,
}

impl CatalogModel {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "fokker_planck_log" => Ok(CatalogModel::FokkerPlanckLog),
            "pme_a" => Ok(CatalogModel::PmeA),
            "pme_b" => Ok(CatalogModel::PmeB),
            "pme_c" => Ok(CatalogModel::PmeC),
            "pme_drift" => Ok(CatalogModel::PmeDrift),
            other => Err(Error::InvalidModel(format!("unknown model {other:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CatalogModel::FokkerPlanckLog => "fokker_planck_log",
            CatalogModel::PmeA => "pme_a",
            CatalogModel::PmeB => "pme_b",
            CatalogModel::PmeC => "pme_c",
            CatalogModel::PmeDrift => "pme_drift",
        }
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied model; functions are given on the nonnegative half line
/// and extended internally.
pub struct CustomModel {
    label: String,
    eta: ScalarFn,
    eta_prime: ScalarFn,
    p: ScalarFn,
    p_prime: ScalarFn,
    p_at_zero: Option<f64>,
}

impl fmt::Debug for CustomModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomModel").field("label", &self.label).finish()
    }
}

/// A mobility/pressure bundle together with the derived entropy function and
/// semi-Kirchhoff transform.
#[derive(Debug, Clone)]
pub enum Model {
    Catalog(CatalogModel),
    Custom(Arc<CustomModel>),
}

impl Model {
    pub fn catalog(which: CatalogModel) -> Self {
        Model::Catalog(which)
    }

    /// Validates and wraps a custom model. Sample checks enforce the
    /// structural assumptions: vanishing nondecreasing mobility, increasing
    /// pressure, and entropy dominating the mobility at infinity (which in
    /// particular rejects fast-diffusion pairs).
    #[allow(clippy::too_many_arguments)]
    pub fn custom<E, EP, P, PP>(
        label: impl Into<String>,
        eta: E,
        eta_prime: EP,
        p: P,
        p_prime: PP,
        p_at_zero: Option<f64>,
    ) -> Result<Self>
    where
        E: Fn(f64) -> f64 + Send + Sync + 'static,
        EP: Fn(f64) -> f64 + Send + Sync + 'static,
        P: Fn(f64) -> f64 + Send + Sync + 'static,
        PP: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let model = CustomModel {
            label: label.into(),
            eta: Arc::new(eta),
            eta_prime: Arc::new(eta_prime),
            p: Arc::new(p),
            p_prime: Arc::new(p_prime),
            p_at_zero,
        };
        validate_custom(&model)?;
        Ok(Model::Custom(Arc::new(model)))
    }

    pub fn name(&self) -> &str {
        match self {
            Model::Catalog(c) => c.name(),
            Model::Custom(c) => &c.label,
        }
    }

    /// Whether the pressure blows down at zero; admissible states are then
    /// strictly positive.
    pub fn singular(&self) -> bool {
        self.p_at_zero().is_none()
    }

    /// `p(0)` when finite, `None` for log-type pressures.
    pub fn p_at_zero(&self) -> Option<f64> {
        match self {
            Model::Catalog(CatalogModel::FokkerPlanckLog)
            | Model::Catalog(CatalogModel::PmeA) => None,
            Model::Catalog(_) => Some(0.0),
            Model::Custom(c) => c.p_at_zero,
        }
    }

    pub fn admissible(&self, u: f64) -> bool {
        u.is_finite() && (!self.singular() || u > 0.0)
    }

    /// Mobility, evenly extended to the whole line.
    pub fn eta(&self, u: f64) -> f64 {
        let a = u.abs();
        match self {
            Model::Catalog(CatalogModel::FokkerPlanckLog)
            | Model::Catalog(CatalogModel::PmeDrift) => a,
            Model::Catalog(CatalogModel::PmeA) => 2.0 * a * a,
            Model::Catalog(CatalogModel::PmeB) => 2.0 * a,
            Model::Catalog(CatalogModel::PmeC) => 1.0,
            Model::Custom(c) => (c.eta)(a),
        }
    }

    /// Derivative of the extended mobility; the sign convention at the kink
    /// of the even extension is `eta'(0) = 0`.
    pub fn eta_prime(&self, u: f64) -> f64 {
        let s = sign(u);
        match self {
            Model::Catalog(CatalogModel::FokkerPlanckLog)
            | Model::Catalog(CatalogModel::PmeDrift) => s,
            Model::Catalog(CatalogModel::PmeA) => 4.0 * u,
            Model::Catalog(CatalogModel::PmeB) => 2.0 * s,
            Model::Catalog(CatalogModel::PmeC) => 0.0,
            Model::Custom(c) => s * (c.eta_prime)(u.abs()),
        }
    }

    /// Extended pressure. Singular models must not be evaluated at or below
    /// zero; the solver keeps iterates above its clamp floor.
    pub fn p(&self, u: f64) -> f64 {
        match self {
            Model::Catalog(CatalogModel::FokkerPlanckLog)
            | Model::Catalog(CatalogModel::PmeA) => {
                debug_assert!(u > 0.0, "singular pressure evaluated at {u}");
                u.ln()
            }
            Model::Catalog(CatalogModel::PmeB) => u,
            Model::Catalog(CatalogModel::PmeC) => u * u.abs(),
            Model::Catalog(CatalogModel::PmeDrift) => 2.0 * u,
            Model::Custom(c) => {
                if u >= 0.0 {
                    (c.p)(u)
                } else {
                    match c.p_at_zero {
                        Some(p0) => 2.0 * p0 - (c.p)(-u),
                        None => {
                            debug_assert!(false, "singular pressure evaluated at {u}");
                            f64::NAN
                        }
                    }
                }
            }
        }
    }

    pub fn p_prime(&self, u: f64) -> f64 {
        match self {
            Model::Catalog(CatalogModel::FokkerPlanckLog)
            | Model::Catalog(CatalogModel::PmeA) => {
                debug_assert!(u > 0.0, "singular pressure evaluated at {u}");
                1.0 / u
            }
            Model::Catalog(CatalogModel::PmeB) => 1.0,
            Model::Catalog(CatalogModel::PmeC) => 2.0 * u.abs(),
            Model::Catalog(CatalogModel::PmeDrift) => 2.0,
            Model::Custom(c) => (c.p_prime)(u.abs()),
        }
    }

    /// Entropy function: the convex primitive of `p - p(1)` vanishing at 1.
    /// Returns infinity for negative arguments of singular models.
    pub fn gamma(&self, u: f64) -> f64 {
        match self {
            Model::Catalog(CatalogModel::FokkerPlanckLog)
            | Model::Catalog(CatalogModel::PmeA) => {
                if u < 0.0 {
                    f64::INFINITY
                } else if u == 0.0 {
                    1.0
                } else {
                    u * u.ln() - u + 1.0
                }
            }
            Model::Catalog(CatalogModel::PmeB) => 0.5 * (u - 1.0) * (u - 1.0),
            Model::Catalog(CatalogModel::PmeC) => {
                u * u * u.abs() / 3.0 - u + 2.0 / 3.0
            }
            Model::Catalog(CatalogModel::PmeDrift) => (u - 1.0) * (u - 1.0),
            Model::Custom(c) => {
                if c.p_at_zero.is_none() && u < 0.0 {
                    return f64::INFINITY;
                }
                let p1 = (c.p)(1.0);
                let model = self.clone();
                let g = |a: f64| model.p(a) - p1;
                if (0.0..1.0).contains(&u) {
                    // substitution keeps possible log singularities of the
                    // pressure integrable down to u = 0
                    -integrate_sqrt_substituted(&g, u, 1.0, QUAD_TOL)
                } else {
                    adaptive_simpson(&g, 1.0, u, QUAD_TOL)
                }
            }
        }
    }

    /// Semi-Kirchhoff transform: primitive of `sqrt(eta) p'` vanishing at 0,
    /// extended oddly when the pressure is regular at zero.
    pub fn xi(&self, u: f64) -> f64 {
        let s = sign(u);
        let a = u.abs();
        match self {
            Model::Catalog(CatalogModel::FokkerPlanckLog) => {
                debug_assert!(u >= 0.0);
                2.0 * a.sqrt()
            }
            Model::Catalog(CatalogModel::PmeA) => {
                debug_assert!(u >= 0.0);
                std::f64::consts::SQRT_2 * a
            }
            Model::Catalog(CatalogModel::PmeB) => {
                s * 2.0 * std::f64::consts::SQRT_2 / 3.0 * a.powf(1.5)
            }
            Model::Catalog(CatalogModel::PmeC) => s * a * a,
            Model::Catalog(CatalogModel::PmeDrift) => s * 4.0 / 3.0 * a.powf(1.5),
            Model::Custom(c) => {
                debug_assert!(c.p_at_zero.is_some() || u >= 0.0);
                let eta = Arc::clone(&c.eta);
                let pp = Arc::clone(&c.p_prime);
                let g = move |x: f64| eta(x).sqrt() * pp(x);
                let head = integrate_from_zero_sqrt(&g, a.min(1.0), QUAD_TOL);
                let tail = if a > 1.0 {
                    adaptive_simpson(&g, 1.0, a, QUAD_TOL)
                } else {
                    0.0
                };
                s * (head + tail)
            }
        }
    }
}

#[cfg(test)]
impl Model {
    /// Test-only constructor bypassing the sample checks, for kernels that
    /// need structurally exceptional models (such as constant mobility).
    pub(crate) fn custom_unchecked<E, EP, P, PP>(
        label: &str,
        eta: E,
        eta_prime: EP,
        p: P,
        p_prime: PP,
        p_at_zero: Option<f64>,
    ) -> Self
    where
        E: Fn(f64) -> f64 + Send + Sync + 'static,
        EP: Fn(f64) -> f64 + Send + Sync + 'static,
        P: Fn(f64) -> f64 + Send + Sync + 'static,
        PP: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Model::Custom(Arc::new(CustomModel {
            label: label.into(),
            eta: Arc::new(eta),
            eta_prime: Arc::new(eta_prime),
            p: Arc::new(p),
            p_prime: Arc::new(p_prime),
            p_at_zero,
        }))
    }
}

fn sign(u: f64) -> f64 {
    if u > 0.0 {
        1.0
    } else if u < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn validate_custom(model: &CustomModel) -> Result<()> {
    let fail = |msg: String| Err(Error::InvalidModel(format!("{}: {msg}", model.label)));

    // mobility vanishes at zero, stays nonnegative and nondecreasing
    if (model.eta)(0.0).abs() > 1e-12 {
        return fail("mobility must vanish at zero".into());
    }
    let grid: Vec<f64> =
        (0..=60).map(|i| 10f64.powf(-6.0 + 9.0 * i as f64 / 60.0)).collect();
    let mut prev = 0.0f64;
    for &u in &grid {
        let e = (model.eta)(u);
        if !(e >= 0.0) {
            return fail(format!("mobility is negative at {u}"));
        }
        if e < prev - 1e-12 * prev.abs() {
            return fail(format!("mobility decreases at {u}"));
        }
        prev = e;
    }

    // pressure strictly increasing on the admissible range
    let p_grid: Vec<f64> = if model.p_at_zero.is_none() {
        grid.clone()
    } else {
        (0..=60).map(|i| -30.0 + i as f64).collect()
    };
    let eval_p = |u: f64| {
        if u >= 0.0 {
            (model.p)(u)
        } else {
            2.0 * model.p_at_zero.unwrap() - (model.p)(-u)
        }
    };
    for w in p_grid.windows(2) {
        if eval_p(w[1]) <= eval_p(w[0]) {
            return fail(format!("pressure is not increasing near {}", w[0]));
        }
    }
    if eval_p(1e6) <= eval_p(1.0) {
        return fail("pressure does not grow at infinity".into());
    }

    // entropy must dominate the mobility at infinity; fast-diffusion pairs
    // (where the ratio stays bounded) fail this growth test
    let p1 = (model.p)(1.0);
    let gamma = |u: f64| adaptive_simpson(&|a| (model.p)(a) - p1, 1.0, u, 1.0);
    let ratio = |u: f64| gamma(u) / (model.eta)(u);
    if !(ratio(1e6) > 2.0 * ratio(1e3)) {
        return fail("entropy does not dominate mobility at infinity".into());
    }
    Ok(())
}

/// Symmetric positive definite permeability field, constant per subdomain
/// tag.
#[derive(Debug, Clone)]
pub struct TensorField {
    entries: TensorEntries,
    lambda_min: f64,
    lambda_max: f64,
}

#[derive(Debug, Clone)]
enum TensorEntries {
    Uniform(Matrix2<f64>),
    ByTag(BTreeMap<u32, Matrix2<f64>>),
}

impl TensorField {
    /// One tensor for the whole domain.
    pub fn uniform(m: Matrix2<f64>) -> Result<Self> {
        let (lo, hi) = check_spd(&m)?;
        Ok(TensorField { entries: TensorEntries::Uniform(m), lambda_min: lo, lambda_max: hi })
    }

    pub fn diagonal(lx: f64, ly: f64) -> Result<Self> {
        Self::uniform(Matrix2::new(lx, 0.0, 0.0, ly))
    }

    /// One tensor per subdomain tag.
    pub fn by_tag(map: BTreeMap<u32, Matrix2<f64>>) -> Result<Self> {
        if map.is_empty() {
            return Err(Error::InvalidTensor("empty tensor map".into()));
        }
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for m in map.values() {
            let (l, h) = check_spd(m)?;
            lo = lo.min(l);
            hi = hi.max(h);
        }
        Ok(TensorField { entries: TensorEntries::ByTag(map), lambda_min: lo, lambda_max: hi })
    }

    pub fn lambda(&self, tag: u32) -> Result<&Matrix2<f64>> {
        match &self.entries {
            TensorEntries::Uniform(m) => Ok(m),
            TensorEntries::ByTag(map) => map.get(&tag).ok_or_else(|| {
                Error::InvalidTensor(format!("no tensor for subdomain tag {tag}"))
            }),
        }
    }

    /// Uniform eigenvalue bounds (lambda_star, lambda^star).
    pub fn eigen_bounds(&self) -> (f64, f64) {
        (self.lambda_min, self.lambda_max)
    }
}

fn check_spd(m: &Matrix2<f64>) -> Result<(f64, f64)> {
    if m[(0, 1)] != m[(1, 0)] {
        return Err(Error::InvalidTensor("tensor is not symmetric".into()));
    }
    let mean = 0.5 * (m[(0, 0)] + m[(1, 1)]);
    let disc = (0.5 * (m[(0, 0)] - m[(1, 1)])).hypot(m[(0, 1)]);
    let (lo, hi) = (mean - disc, mean + disc);
    if lo <= 0.0 {
        return Err(Error::InvalidTensor(format!(
            "tensor is not positive definite (lambda_min = {lo})"
        )));
    }
    Ok((lo, hi))
}

/// Exterior potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Potential {
    Zero,
    /// V(x, y) = -g x, the gravitational potential with horizontal pull g.
    Gravity { g: f64 },
    /// V(x) = |x - center|^2 / 2, quadratic confinement.
    Quadratic { center: Point2<f64> },
}

impl Potential {
    pub fn value(&self, x: Point2<f64>) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Gravity { g } => -g * x.x,
            Potential::Quadratic { center } => 0.5 * (x - center).norm_squared(),
        }
    }

    /// Gravity with strength zero normalizes to the zero potential.
    pub fn gravity(g: f64) -> Self {
        if g == 0.0 {
            Potential::Zero
        } else {
            Potential::Gravity { g }
        }
    }
}

/// Scaled logarithmic pressure law `p(u) = coef * log u` with its inverse,
/// the building block of the heterogeneous pressure-primary formulation.
#[derive(Debug, Clone, Copy)]
pub struct LogPressureLaw {
    pub coef: f64,
}

impl LogPressureLaw {
    pub fn p_of_u(&self, u: f64) -> f64 {
        self.coef * u.ln()
    }

    pub fn u_of_p(&self, p: f64) -> f64 {
        (p / self.coef).exp()
    }

    pub fn du_dp(&self, p: f64) -> f64 {
        (p / self.coef).exp() / self.coef
    }
}

/// Per-subdomain pressure laws with linear mobility, used when both the
/// permeability and the pressure function jump across subdomain interfaces.
#[derive(Debug, Clone)]
pub struct HeteroModel {
    laws: BTreeMap<u32, LogPressureLaw>,
}

impl HeteroModel {
    pub fn new(laws: BTreeMap<u32, LogPressureLaw>) -> Result<Self> {
        if laws.is_empty() {
            return Err(Error::InvalidModel("no pressure laws given".into()));
        }
        for (tag, law) in &laws {
            if !(law.coef > 0.0) {
                return Err(Error::InvalidModel(format!(
                    "pressure law for tag {tag} must have a positive coefficient"
                )));
            }
        }
        Ok(HeteroModel { laws })
    }

    pub fn law(&self, tag: u32) -> Result<&LogPressureLaw> {
        self.laws.get(&tag).ok_or_else(|| {
            Error::InvalidModel(format!("no pressure law for subdomain tag {tag}"))
        })
    }

    /// Linear mobility shared by all subdomains.
    pub fn eta(&self, u: f64) -> f64 {
        u.abs()
    }
}


#[cfg(test)]
mod potential_tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::Point2;

    #[test]
    fn potential_catalog_values() {
        assert_eq!(Potential::Zero.value(Point2::new(0.3, 0.9)), 0.0);
        assert_relative_eq!(
            Potential::Gravity { g: 2.0 }.value(Point2::new(0.3, 0.9)),
            -0.6
        );
        let confined = Potential::Quadratic { center: Point2::new(0.5, 0.5) };
        assert_relative_eq!(confined.value(Point2::new(0.5, 0.5)), 0.0);
        assert_relative_eq!(confined.value(Point2::new(1.0, 0.5)), 0.125);
        // zero gravity normalizes to the zero potential
        assert_eq!(Potential::gravity(0.0), Potential::Zero);
    }
}
