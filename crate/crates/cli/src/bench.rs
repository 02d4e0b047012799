//! The built-in benchmark suite: mesh families per test, per-level quartered
//! time-step schedules, and convergence-table emission.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use vagflow_core::diagnostics::{convergence_rates, ErrorTriple};
use vagflow_core::error::{Error, Result};
use vagflow_core::mesh::MeshKind;
use vagflow_core::physics::CatalogModel;

use crate::config::{
    BcKind, BcValue, ExactChoice, InitKind, MeshSource, ModelChoice, RunConfig,
    SchemeChoice, Side,
};
use crate::run::{execute, write_artifacts, RunOutcome};
use crate::tables::{fmt17, CsvTable};

/// Tests of the built-in suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchTest {
    T1Nonlinear,
    T1Linear,
    T1Kershaw,
    T2a,
    T2b,
    T2c,
    T2a2d,
    T2b2d,
    T2c2d,
    T3Nonlinear,
    T3Quasilinear,
    T4,
}

impl BenchTest {
    pub const ALL: [BenchTest; 12] = [
        BenchTest::T1Nonlinear,
        BenchTest::T1Linear,
        BenchTest::T1Kershaw,
        BenchTest::T2a,
        BenchTest::T2b,
        BenchTest::T2c,
        BenchTest::T2a2d,
        BenchTest::T2b2d,
        BenchTest::T2c2d,
        BenchTest::T3Nonlinear,
        BenchTest::T3Quasilinear,
        BenchTest::T4,
    ];

    pub fn parse(name: &str) -> Result<Self> {
        for t in Self::ALL {
            if t.name() == name {
                return Ok(t);
            }
        }
        Err(Error::InvalidConfig(format!(
            "unknown bench test {name:?}; available: {}",
            Self::ALL.map(|t| t.name()).join(", ")
        )))
    }

    pub fn name(&self) -> &'static str {
        match self {
            BenchTest::T1Nonlinear => "t1_nonlinear",
            BenchTest::T1Linear => "t1_linear",
            BenchTest::T1Kershaw => "t1_kershaw",
            BenchTest::T2a => "t2a",
            BenchTest::T2b => "t2b",
            BenchTest::T2c => "t2c",
            BenchTest::T2a2d => "t2a_2d",
            BenchTest::T2b2d => "t2b_2d",
            BenchTest::T2c2d => "t2c_2d",
            BenchTest::T3Nonlinear => "t3_nonlinear",
            BenchTest::T3Quasilinear => "t3_quasilinear",
            BenchTest::T4 => "t4",
        }
    }

    /// Whether the test is a single-configuration study rather than a mesh
    /// refinement family.
    pub fn single_level(&self) -> bool {
        matches!(self, BenchTest::T1Kershaw | BenchTest::T4)
    }

    /// Coarsest subdivision count of the mesh family, doubled per level.
    /// Picked so the asymptotic range of each test sits inside its expected
    /// rate window.
    fn base_n(&self) -> usize {
        match self {
            BenchTest::T1Nonlinear | BenchTest::T1Linear => 8,
            BenchTest::T2a | BenchTest::T2b | BenchTest::T2c => 4,
            BenchTest::T2a2d | BenchTest::T2b2d | BenchTest::T2c2d => 3,
            BenchTest::T3Nonlinear | BenchTest::T3Quasilinear => 6,
            BenchTest::T1Kershaw => 18,
            BenchTest::T4 => 16,
        }
    }

    /// Configuration of the coarsest level.
    pub fn base_config(&self) -> RunConfig {
        let mut cfg = RunConfig::default();
        cfg.mesh = MeshSource::Generate {
            kind: MeshKind::SplitTriangles,
            n: self.base_n(),
            distortion: 0.0,
        };
        cfg.write_report = false;
        cfg.write_summary = false;
        match self {
            BenchTest::T1Nonlinear | BenchTest::T1Linear => {
                cfg.model = ModelChoice::Catalog(CatalogModel::FokkerPlanckLog);
                cfg.scheme = if *self == BenchTest::T1Linear {
                    SchemeChoice::Linear
                } else {
                    SchemeChoice::Nonlinear
                };
                cfg.tensor = BTreeMap::from([(0, (1.0, 10.0))]);
                cfg.gravity = 1.0;
                cfg.exact = ExactChoice::T1;
                cfg.bc_kind = BcKind::NoFlux;
                cfg.init = InitKind::Exact;
                cfg.t_final = 0.25;
                cfg.dt_init = 1e-3;
                cfg.dt_max = 1.024e-2;
            }
            BenchTest::T1Kershaw => {
                cfg.mesh = MeshSource::Generate {
                    kind: MeshKind::KershawLike,
                    n: 18,
                    distortion: 0.6,
                };
                cfg.model = ModelChoice::Catalog(CatalogModel::FokkerPlanckLog);
                cfg.scheme = SchemeChoice::Nonlinear;
                cfg.tensor = BTreeMap::from([(0, (0.001, 1.0))]);
                cfg.gravity = 1.0;
                cfg.exact = ExactChoice::T1;
                cfg.bc_kind = BcKind::NoFlux;
                cfg.init = InitKind::Exact;
                cfg.t_final = 50.0;
                cfg.dt_init = 2e-4;
                cfg.dt_max = 1.0;
                cfg.write_entropy = true;
            }
            BenchTest::T2a | BenchTest::T2b | BenchTest::T2c => {
                cfg.model = ModelChoice::Catalog(match self {
                    BenchTest::T2a => CatalogModel::PmeA,
                    BenchTest::T2b => CatalogModel::PmeB,
                    _ => CatalogModel::PmeC,
                });
                cfg.tensor = BTreeMap::from([(0, (1.0, 10.0))]);
                cfg.exact = ExactChoice::T2OneD;
                cfg.bc_kind = BcKind::Dirichlet;
                cfg.bc_value = BcValue::Exact;
                cfg.init = InitKind::Exact;
                cfg.t_final = 0.25;
                cfg.dt_init = 1e-3;
                cfg.dt_max = 1.024e-2;
            }
            BenchTest::T2a2d | BenchTest::T2b2d | BenchTest::T2c2d => {
                cfg.model = ModelChoice::Catalog(match self {
                    BenchTest::T2a2d => CatalogModel::PmeA,
                    BenchTest::T2b2d => CatalogModel::PmeB,
                    _ => CatalogModel::PmeC,
                });
                cfg.tensor = BTreeMap::from([(0, (0.1, 10.0))]);
                cfg.exact = ExactChoice::T2TwoD;
                cfg.bc_kind = BcKind::Dirichlet;
                cfg.bc_value = BcValue::Exact;
                cfg.init = InitKind::Exact;
                cfg.t_final = 0.25;
                cfg.dt_init = 1e-3;
                cfg.dt_max = 1.024e-2;
            }
            BenchTest::T3Nonlinear | BenchTest::T3Quasilinear => {
                cfg.model = ModelChoice::Catalog(CatalogModel::PmeDrift);
                cfg.scheme = if *self == BenchTest::T3Quasilinear {
                    SchemeChoice::Quasilinear
                } else {
                    SchemeChoice::Nonlinear
                };
                cfg.tensor = BTreeMap::from([(0, (1.0, 100.0))]);
                cfg.gravity = 1.0;
                cfg.exact = ExactChoice::T3;
                cfg.bc_kind = BcKind::Dirichlet;
                cfg.bc_value = BcValue::Exact;
                cfg.init = InitKind::Exact;
                cfg.t_final = 0.25;
                cfg.dt_init = 1e-3;
                cfg.dt_max = 1.024e-2;
            }
            BenchTest::T4 => {
                cfg.mesh = MeshSource::Generate {
                    kind: MeshKind::Cartesian,
                    n: 16,
                    distortion: 0.0,
                };
                cfg.barrier_above_y = Some(0.5);
                cfg.model =
                    ModelChoice::HeteroLog { coefs: BTreeMap::from([(1, 3.0), (2, 1.0)]) };
                cfg.tensor = BTreeMap::from([(1, (1.0, 1.0)), (2, (1.0, 0.01))]);
                cfg.exact = ExactChoice::None;
                cfg.bc_kind = BcKind::Dirichlet;
                cfg.bc_sides = vec![Side::Y0, Side::Y1];
                cfg.bc_value = BcValue::Const(-4.0);
                cfg.bc_side_values = BTreeMap::from([(Side::Y0, 0.0), (Side::Y1, -4.0)]);
                cfg.init = InitKind::Const(-4.0);
                cfg.t_final = 1.0;
                cfg.dt_init = 1e-3;
                cfg.dt_max = 0.05;
                cfg.snapshots = vec![0.05, 0.2, 1.0];
            }
        }
        cfg
    }

    /// All level configurations: meshes doubled, time steps quartered.
    pub fn level_configs(&self, levels: usize) -> Result<Vec<(String, RunConfig)>> {
        if self.single_level() {
            if levels != 1 {
                return Err(Error::InvalidConfig(format!(
                    "{} is a single-level study (got levels = {levels})",
                    self.name()
                )));
            }
            if *self == BenchTest::T4 {
                // the heterogeneous test runs on a cartesian and a
                // triangular mesh of the same size
                let cart = self.base_config();
                let mut tri = cart.clone();
                tri.mesh = MeshSource::Generate {
                    kind: MeshKind::SplitTriangles,
                    n: self.base_n(),
                    distortion: 0.0,
                };
                return Ok(vec![
                    (format!("cartesian-{}", self.base_n()), cart),
                    (format!("split-triangles-{}", self.base_n()), tri),
                ]);
            }
            return Ok(vec![(format!("kershaw-like-{}", self.base_n()), self.base_config())]);
        }
        if levels < 1 {
            return Err(Error::InvalidConfig("levels must be at least 1".into()));
        }
        let base = self.base_config();
        let mut out = Vec::with_capacity(levels);
        for level in 0..levels {
            let mut cfg = base.clone();
            let MeshSource::Generate { kind, n, distortion } = base.mesh else {
                unreachable!("families are generated")
            };
            let n = n << level;
            cfg.mesh = MeshSource::Generate { kind, n, distortion };
            let quarter = 4f64.powi(level as i32);
            cfg.dt_init = base.dt_init / quarter;
            cfg.dt_max = base.dt_max / quarter;
            out.push((format!("{}-{}", kind.name(), n), cfg));
        }
        Ok(out)
    }
}

/// One row of a convergence table.
pub struct BenchRow {
    pub label: String,
    pub h: f64,
    pub n_vertices: usize,
    pub dt_init: f64,
    pub dt_max: f64,
    pub errors: Option<ErrorTriple>,
    pub u_min: f64,
    pub newton_total: usize,
}

/// Full result of a bench invocation.
pub struct BenchOutput {
    pub rows: Vec<BenchRow>,
    /// Rates per error norm, aligned with `rows[1..]`.
    pub rates_l2: Vec<Option<f64>>,
    pub rates_l1: Vec<Option<f64>>,
    pub rates_linf: Vec<Option<f64>>,
    pub outcomes: Vec<RunOutcome>,
}

/// Runs a bench test at the requested number of levels, writing per-level
/// artifacts and the convergence table under `out_dir`.
pub fn run_bench(test: BenchTest, levels: usize, out_dir: &Path) -> Result<BenchOutput> {
    let io_err =
        |e: std::io::Error| Error::InvalidConfig(format!("cannot write output: {e}"));
    let configs = test.level_configs(levels)?;
    let mut rows = Vec::new();
    let mut outcomes = Vec::new();
    for (label, cfg) in &configs {
        let outcome = execute(cfg)?;
        let level_dir = out_dir.join(label);
        let mut cfg_with_artifacts = cfg.clone();
        cfg_with_artifacts.write_report = true;
        cfg_with_artifacts.write_summary = true;
        write_artifacts(&cfg_with_artifacts, &outcome, &level_dir)?;
        rows.push(BenchRow {
            label: label.clone(),
            h: outcome.quality.h,
            n_vertices: outcome.n_vertices,
            dt_init: cfg.dt_init,
            dt_max: cfg.dt_max,
            errors: outcome.errors,
            u_min: outcome.u_min,
            newton_total: outcome.newton_total,
        });
        outcomes.push(outcome);
    }

    let (rates_l2, rates_l1, rates_linf) = if rows.len() >= 2
        && rows.iter().all(|r| r.errors.is_some())
        && !test.single_level()
    {
        let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
        let get = |f: fn(&ErrorTriple) -> f64| -> Vec<f64> {
            rows.iter().map(|r| f(r.errors.as_ref().unwrap())).collect()
        };
        (
            convergence_rates(&get(|e| e.l2), &hs)?,
            convergence_rates(&get(|e| e.l1), &hs)?,
            convergence_rates(&get(|e| e.linf), &hs)?,
        )
    } else {
        (Vec::new(), Vec::new(), Vec::new())
    };

    let output = BenchOutput { rows, rates_l2, rates_l1, rates_linf, outcomes };
    fs::create_dir_all(out_dir).map_err(io_err)?;
    fs::write(out_dir.join(format!("{}.csv", test.name())), table_csv(&output))
        .map_err(io_err)?;
    Ok(output)
}

/// The convergence table in the column order of the reference experiments:
/// mesh size, vertex count, time steps, per-norm error and rate pairs, the
/// minimum of the discrete solution and the total Newton count.
pub fn table_csv(output: &BenchOutput) -> String {
    let mut table = CsvTable::new(vec![
        "label",
        "h",
        "n_vertices",
        "dt_init",
        "dt_max",
        "err_l2",
        "rate_l2",
        "err_l1",
        "rate_l1",
        "err_linf",
        "rate_linf",
        "u_min",
        "newton",
    ]);
    let rate_cell = |rates: &[Option<f64>], i: usize| -> String {
        if i == 0 || rates.is_empty() {
            String::new()
        } else {
            rates[i - 1].map_or(String::new(), fmt17)
        }
    };
    for (i, row) in output.rows.iter().enumerate() {
        let err = |f: fn(&ErrorTriple) -> f64| -> String {
            row.errors.as_ref().map_or("nan".into(), |e| fmt17(f(e)))
        };
        table.push_row(vec![
            row.label.clone(),
            fmt17(row.h),
            row.n_vertices.to_string(),
            fmt17(row.dt_init),
            fmt17(row.dt_max),
            err(|e| e.l2),
            rate_cell(&output.rates_l2, i),
            err(|e| e.l1),
            rate_cell(&output.rates_l1, i),
            err(|e| e.linf),
            rate_cell(&output.rates_linf, i),
            fmt17(row.u_min),
            row.newton_total.to_string(),
        ]);
    }
    table.to_string()
}
