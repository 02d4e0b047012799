//! Run configuration: a flat `key = value` text format with dotted section
//! names and `#` comments. Parsing, defaults, validation and canonical
//! serialization (parse -> normalize -> serialize -> parse is idempotent).

use std::collections::BTreeMap;
use std::fmt;

use vagflow_core::error::{Error, Result};
use vagflow_core::mesh::MeshKind;
use vagflow_core::physics::CatalogModel;

use crate::tables::fmt17;

/// Where the mesh comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum MeshSource {
    Generate { kind: MeshKind, n: usize, distortion: f64 },
    File { path: String },
}

/// Which model family drives the run.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelChoice {
    Catalog(CatalogModel),
    /// Heterogeneous log-pressure laws, one coefficient per subdomain tag;
    /// solved with the pressure as primary unknown.
    HeteroLog { coefs: BTreeMap<u32, f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeChoice {
    Nonlinear,
    Linear,
    Quasilinear,
}

impl SchemeChoice {
    pub fn name(&self) -> &'static str {
        match self {
            SchemeChoice::Nonlinear => "nonlinear",
            SchemeChoice::Linear => "linear",
            SchemeChoice::Quasilinear => "quasilinear",
        }
    }
}

/// Named analytical solutions; parameters come from the tensor and potential
/// sections.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactChoice {
    None,
    T1,
    T2OneD,
    T2TwoD,
    T3,
}

impl ExactChoice {
    pub fn name(&self) -> &'static str {
        match self {
            ExactChoice::None => "none",
            ExactChoice::T1 => "t1",
            ExactChoice::T2OneD => "t2_1d",
            ExactChoice::T2TwoD => "t2_2d",
            ExactChoice::T3 => "t3",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcKind {
    NoFlux,
    Dirichlet,
}

/// Boundary sides of the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Side {
    X0,
    X1,
    Y0,
    Y1,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::X0, Side::X1, Side::Y0, Side::Y1];

    pub fn name(&self) -> &'static str {
        match self {
            Side::X0 => "x0",
            Side::X1 => "x1",
            Side::Y0 => "y0",
            Side::Y1 => "y1",
        }
    }

    /// Coordinate predicate selecting the side, with tolerance 1e-12.
    pub fn contains(&self, p: nalgebra::Point2<f64>) -> bool {
        const TOL: f64 = 1e-12;
        match self {
            Side::X0 => p.x.abs() <= TOL,
            Side::X1 => (p.x - 1.0).abs() <= TOL,
            Side::Y0 => p.y.abs() <= TOL,
            Side::Y1 => (p.y - 1.0).abs() <= TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BcValue {
    Exact,
    Const(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitKind {
    /// Sample the configured analytical solution at time zero.
    Exact,
    Const(f64),
    /// Equilibrium profile with prescribed mass.
    Gibbs { mass: f64 },
}

/// Everything a run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mesh: MeshSource,
    /// Optional retagging: cells with center above this height get tag 2.
    pub barrier_above_y: Option<f64>,
    pub model: ModelChoice,
    pub scheme: SchemeChoice,
    /// Diagonal tensor entries, or per-tag entries for heterogeneous runs.
    pub tensor: BTreeMap<u32, (f64, f64)>,
    pub gravity: f64,
    pub exact: ExactChoice,
    pub bc_kind: BcKind,
    pub bc_sides: Vec<Side>,
    pub bc_value: BcValue,
    pub bc_side_values: BTreeMap<Side, f64>,
    pub init: InitKind,
    pub t_final: f64,
    pub dt_init: f64,
    pub dt_max: f64,
    pub growth: f64,
    pub shrink: f64,
    pub max_failures: usize,
    pub newton_tol: f64,
    pub newton_tol_res: f64,
    pub newton_max_iter: usize,
    pub newton_eps: f64,
    pub lumping_fraction: f64,
    pub out_dir: String,
    pub write_report: bool,
    pub write_summary: bool,
    pub write_entropy: bool,
    pub trajectory_stride: usize,
    pub snapshots: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mesh: MeshSource::Generate {
                kind: MeshKind::SplitTriangles,
                n: 8,
                distortion: 0.0,
            },
            barrier_above_y: None,
            model: ModelChoice::Catalog(CatalogModel::FokkerPlanckLog),
            scheme: SchemeChoice::Nonlinear,
            tensor: BTreeMap::from([(0, (1.0, 1.0))]),
            gravity: 0.0,
            exact: ExactChoice::None,
            bc_kind: BcKind::NoFlux,
            bc_sides: Side::ALL.to_vec(),
            bc_value: BcValue::Exact,
            bc_side_values: BTreeMap::new(),
            init: InitKind::Const(1.0),
            t_final: 0.25,
            dt_init: 1e-3,
            dt_max: 1.024e-2,
            growth: 2.0,
            shrink: 0.5,
            max_failures: 20,
            newton_tol: 1e-10,
            newton_tol_res: 1e-12,
            newton_max_iter: 30,
            newton_eps: 1e-10,
            lumping_fraction: 0.1,
            out_dir: "out".into(),
            write_report: true,
            write_summary: true,
            write_entropy: false,
            trajectory_stride: 1,
            snapshots: Vec::new(),
        }
    }
}

fn bad(key: &str, msg: impl fmt::Display) -> Error {
    Error::InvalidConfig(format!("{key}: {msg}"))
}

struct Keys {
    map: BTreeMap<String, String>,
    used: std::cell::RefCell<std::collections::BTreeSet<String>>,
}

impl Keys {
    fn get(&self, key: &str) -> Option<&str> {
        let v = self.map.get(key).map(String::as_str);
        if v.is_some() {
            self.used.borrow_mut().insert(key.to_string());
        }
        v
    }

    fn f64(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| bad(key, format!("not a number: {v:?}"))),
        }
    }

    fn usize(&self, key: &str) -> Result<Option<usize>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => {
                v.parse().map(Some).map_err(|_| bad(key, format!("not an integer: {v:?}")))
            }
        }
    }

    fn bool(&self, key: &str) -> Result<Option<bool>> {
        match self.get(key) {
            None => Ok(None),
            Some("true") => Ok(Some(true)),
            Some("false") => Ok(Some(false)),
            Some(v) => Err(bad(key, format!("expected true or false, found {v:?}"))),
        }
    }
}

/// Parses the flat key-value format into a validated config.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::InvalidConfig(format!(
                "line {}: expected `key = value`, found {line:?}",
                lineno + 1
            )));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if map.insert(key.clone(), value).is_some() {
            return Err(Error::InvalidConfig(format!("line {}: duplicate key {key}", lineno + 1)));
        }
    }
    config_from_map(map)
}

fn config_from_map(map: BTreeMap<String, String>) -> Result<RunConfig> {
    let keys = Keys { map, used: Default::default() };
    let mut cfg = RunConfig::default();

    // mesh
    match keys.get("mesh.kind") {
        None | Some("split-triangles") | Some("cartesian") | Some("kershaw-like") => {
            let kind = MeshKind::parse(keys.get("mesh.kind").unwrap_or("split-triangles"))?;
            let n = keys.usize("mesh.n")?.unwrap_or(8);
            if n < 1 {
                return Err(bad("mesh.n", "must be at least 1"));
            }
            let distortion = keys.f64("mesh.distortion")?.unwrap_or(0.0);
            cfg.mesh = MeshSource::Generate { kind, n, distortion };
        }
        Some("file") => {
            let path = keys
                .get("mesh.path")
                .ok_or_else(|| bad("mesh.path", "required when mesh.kind = file"))?;
            cfg.mesh = MeshSource::File { path: path.to_string() };
        }
        Some(other) => return Err(bad("mesh.kind", format!("unknown kind {other:?}"))),
    }
    cfg.barrier_above_y = keys.f64("mesh.barrier_above_y")?;

    // model
    match keys.get("model.name").unwrap_or("fokker_planck_log") {
        "hetero_log" => {
            let mut coefs = BTreeMap::new();
            for (key, value) in keys.map.iter() {
                if let Some(tag) = key.strip_prefix("model.coef.") {
                    let tag: u32 =
                        tag.parse().map_err(|_| bad(key, "tag must be an integer"))?;
                    let c: f64 =
                        value.parse().map_err(|_| bad(key, "not a number"))?;
                    keys.used.borrow_mut().insert(key.clone());
                    coefs.insert(tag, c);
                }
            }
            if coefs.is_empty() {
                return Err(bad("model.coef.*", "hetero_log requires at least one law"));
            }
            cfg.model = ModelChoice::HeteroLog { coefs };
        }
        name => cfg.model = ModelChoice::Catalog(CatalogModel::parse(name)?),
    }

    // scheme
    cfg.scheme = match keys.get("scheme").unwrap_or("nonlinear") {
        "nonlinear" => SchemeChoice::Nonlinear,
        "linear" => SchemeChoice::Linear,
        "quasilinear" => SchemeChoice::Quasilinear,
        other => return Err(bad("scheme", format!("unknown scheme {other:?}"))),
    };

    // tensor: either global lx/ly or per-tag entries
    cfg.tensor.clear();
    let global_lx = keys.f64("tensor.lx")?;
    let global_ly = keys.f64("tensor.ly")?;
    for (key, value) in keys.map.iter() {
        for (prefix, idx) in [("tensor.lx.", 0usize), ("tensor.ly.", 1usize)] {
            if let Some(tag) = key.strip_prefix(prefix) {
                let tag: u32 = tag.parse().map_err(|_| bad(key, "tag must be an integer"))?;
                let v: f64 = value.parse().map_err(|_| bad(key, "not a number"))?;
                keys.used.borrow_mut().insert(key.clone());
                let entry = cfg.tensor.entry(tag).or_insert((1.0, 1.0));
                if idx == 0 {
                    entry.0 = v;
                } else {
                    entry.1 = v;
                }
            }
        }
    }
    if cfg.tensor.is_empty() {
        cfg.tensor.insert(0, (global_lx.unwrap_or(1.0), global_ly.unwrap_or(1.0)));
    } else if global_lx.is_some() || global_ly.is_some() {
        return Err(bad("tensor", "mix of global lx/ly and per-tag entries"));
    }

    cfg.gravity = keys.f64("potential.g")?.unwrap_or(0.0);

    cfg.exact = match keys.get("exact").unwrap_or("none") {
        "none" => ExactChoice::None,
        "t1" => ExactChoice::T1,
        "t2_1d" => ExactChoice::T2OneD,
        "t2_2d" => ExactChoice::T2TwoD,
        "t3" => ExactChoice::T3,
        other => return Err(bad("exact", format!("unknown solution {other:?}"))),
    };

    // boundary conditions
    cfg.bc_kind = match keys.get("bc.kind").unwrap_or("noflux") {
        "noflux" => BcKind::NoFlux,
        "dirichlet" => BcKind::Dirichlet,
        other => return Err(bad("bc.kind", format!("unknown kind {other:?}"))),
    };
    cfg.bc_sides = match keys.get("bc.sides").unwrap_or("all") {
        "all" => Side::ALL.to_vec(),
        list => {
            let mut sides = Vec::new();
            for token in list.split(',') {
                let side = match token.trim() {
                    "x0" => Side::X0,
                    "x1" => Side::X1,
                    "y0" => Side::Y0,
                    "y1" => Side::Y1,
                    other => {
                        return Err(bad("bc.sides", format!("unknown side {other:?}")))
                    }
                };
                if sides.contains(&side) {
                    return Err(bad("bc.sides", format!("side {} repeated", side.name())));
                }
                sides.push(side);
            }
            sides
        }
    };
    cfg.bc_value = match keys.get("bc.value").unwrap_or("exact") {
        "exact" => BcValue::Exact,
        "const" => BcValue::Const(
            keys.f64("bc.const")?
                .ok_or_else(|| bad("bc.const", "required when bc.value = const"))?,
        ),
        other => return Err(bad("bc.value", format!("unknown value rule {other:?}"))),
    };
    cfg.bc_side_values.clear();
    for side in Side::ALL {
        let key = format!("bc.const.{}", side.name());
        if let Some(v) = keys.get(&key) {
            let v: f64 = v.parse().map_err(|_| bad(&key, "not a number"))?;
            cfg.bc_side_values.insert(side, v);
        }
    }

    // initial data
    cfg.init = match keys.get("init.kind").unwrap_or("exact") {
        "exact" => InitKind::Exact,
        "const" => InitKind::Const(
            keys.f64("init.value")?
                .ok_or_else(|| bad("init.value", "required when init.kind = const"))?,
        ),
        "gibbs" => InitKind::Gibbs {
            mass: keys
                .f64("init.mass")?
                .ok_or_else(|| bad("init.mass", "required when init.kind = gibbs"))?,
        },
        other => return Err(bad("init.kind", format!("unknown kind {other:?}"))),
    };

    // time stepping and Newton controls
    cfg.t_final = keys.f64("time.t_final")?.unwrap_or(cfg.t_final);
    cfg.dt_init = keys.f64("time.dt_init")?.unwrap_or(cfg.dt_init);
    cfg.dt_max = keys.f64("time.dt_max")?.unwrap_or(cfg.dt_max);
    cfg.growth = keys.f64("time.growth")?.unwrap_or(cfg.growth);
    cfg.shrink = keys.f64("time.shrink")?.unwrap_or(cfg.shrink);
    cfg.max_failures = keys.usize("time.max_failures")?.unwrap_or(cfg.max_failures);
    cfg.newton_tol = keys.f64("newton.tol")?.unwrap_or(cfg.newton_tol);
    cfg.newton_tol_res = keys.f64("newton.tol_res")?.unwrap_or(cfg.newton_tol_res);
    cfg.newton_max_iter = keys.usize("newton.max_iter")?.unwrap_or(cfg.newton_max_iter);
    cfg.newton_eps = keys.f64("newton.eps")?.unwrap_or(cfg.newton_eps);
    cfg.lumping_fraction = keys.f64("lumping.f")?.unwrap_or(cfg.lumping_fraction);

    // output
    if let Some(dir) = keys.get("output.dir") {
        cfg.out_dir = dir.to_string();
    }
    cfg.write_report = keys.bool("output.report")?.unwrap_or(cfg.write_report);
    cfg.write_summary = keys.bool("output.summary")?.unwrap_or(cfg.write_summary);
    cfg.write_entropy = keys.bool("output.entropy")?.unwrap_or(cfg.write_entropy);
    cfg.trajectory_stride = keys.usize("output.stride")?.unwrap_or(1);
    if let Some(list) = keys.get("output.snapshots") {
        if !list.trim().is_empty() {
            for token in list.split(',') {
                let t: f64 = token
                    .trim()
                    .parse()
                    .map_err(|_| bad("output.snapshots", "not a list of times"))?;
                cfg.snapshots.push(t);
            }
        }
    }

    // reject unknown keys with the field path
    for key in keys.map.keys() {
        if !keys.used.borrow().contains(key) {
            return Err(Error::InvalidConfig(format!("unknown key {key}")));
        }
    }

    validate(&cfg)?;
    Ok(cfg)
}

/// Cross-field checks; errors name the offending fields.
pub fn validate(cfg: &RunConfig) -> Result<()> {
    let is_hetero = matches!(cfg.model, ModelChoice::HeteroLog { .. });
    if cfg.scheme == SchemeChoice::Quasilinear
        && cfg.model != ModelChoice::Catalog(CatalogModel::PmeDrift)
    {
        return Err(bad("scheme", "quasilinear requires model.name = pme_drift"));
    }
    if is_hetero {
        if cfg.scheme != SchemeChoice::Nonlinear {
            return Err(bad("scheme", "hetero_log runs use the nonlinear scheme"));
        }
        if cfg.bc_kind != BcKind::Dirichlet {
            return Err(bad("bc.kind", "hetero_log runs need Dirichlet pressure data"));
        }
        if cfg.gravity != 0.0 {
            return Err(bad("potential.g", "hetero_log runs assume zero potential"));
        }
        let tags: Vec<u32> = cfg.tensor.keys().copied().collect();
        let ModelChoice::HeteroLog { coefs } = &cfg.model else { unreachable!() };
        for tag in coefs.keys() {
            if !tags.contains(tag) {
                return Err(bad(
                    "tensor",
                    format!("no tensor entry for subdomain tag {tag}"),
                ));
            }
        }
    } else if cfg.tensor.len() != 1 || !cfg.tensor.contains_key(&0) {
        return Err(bad("tensor", "per-tag tensors require model.name = hetero_log"));
    }
    if cfg.bc_kind == BcKind::Dirichlet && cfg.bc_sides.is_empty() {
        return Err(bad("bc.sides", "Dirichlet needs at least one side"));
    }
    if cfg.bc_kind == BcKind::Dirichlet
        && cfg.bc_value == BcValue::Exact
        && cfg.exact == ExactChoice::None
    {
        return Err(bad("bc.value", "bc.value = exact requires an exact solution"));
    }
    if cfg.init == InitKind::Exact && cfg.exact == ExactChoice::None && !is_hetero {
        return Err(bad("init.kind", "init.kind = exact requires an exact solution"));
    }
    if is_hetero && !matches!(cfg.init, InitKind::Const(_)) {
        return Err(bad("init.kind", "hetero_log runs start from constant pressure"));
    }
    if matches!(cfg.init, InitKind::Gibbs { .. }) {
        let singular = matches!(
            cfg.model,
            ModelChoice::Catalog(CatalogModel::FokkerPlanckLog)
                | ModelChoice::Catalog(CatalogModel::PmeA)
        );
        if !singular {
            return Err(bad("init.kind", "gibbs initial data needs a log-pressure model"));
        }
    }
    if cfg.write_entropy && !matches!(cfg.exact, ExactChoice::T1) {
        return Err(bad(
            "output.entropy",
            "the relative entropy series needs exact = t1 for its reference profile",
        ));
    }
    if !(cfg.t_final >= 0.0) {
        return Err(bad("time.t_final", "must be nonnegative"));
    }
    if cfg.trajectory_stride == 0 {
        return Err(bad("output.stride", "must be at least 1"));
    }
    for &t in &cfg.snapshots {
        if !(t >= 0.0) || t > cfg.t_final {
            return Err(bad("output.snapshots", "times must lie in [0, t_final]"));
        }
    }
    if let MeshSource::Generate { kind, distortion, .. } = cfg.mesh {
        if kind != MeshKind::KershawLike && distortion != 0.0 {
            return Err(bad("mesh.distortion", "only kershaw-like meshes take distortion"));
        }
    }
    Ok(())
}

/// Canonical text form: sorted keys, defaults written out, 17 significant
/// digits for floats.
pub fn serialize_config(cfg: &RunConfig) -> String {
    let mut map: BTreeMap<String, String> = BTreeMap::new();
    let mut put = |k: &str, v: String| {
        map.insert(k.to_string(), v);
    };
    match &cfg.mesh {
        MeshSource::Generate { kind, n, distortion } => {
            put("mesh.kind", kind.name().to_string());
            put("mesh.n", n.to_string());
            if *kind == MeshKind::KershawLike {
                put("mesh.distortion", fmt17(*distortion));
            }
        }
        MeshSource::File { path } => {
            put("mesh.kind", "file".into());
            put("mesh.path", path.clone());
        }
    }
    if let Some(y) = cfg.barrier_above_y {
        put("mesh.barrier_above_y", fmt17(y));
    }
    match &cfg.model {
        ModelChoice::Catalog(c) => put("model.name", c.name().to_string()),
        ModelChoice::HeteroLog { coefs } => {
            put("model.name", "hetero_log".into());
            for (tag, c) in coefs {
                put(&format!("model.coef.{tag}"), fmt17(*c));
            }
        }
    }
    put("scheme", cfg.scheme.name().to_string());
    if cfg.tensor.len() == 1 && cfg.tensor.contains_key(&0) {
        let (lx, ly) = cfg.tensor[&0];
        put("tensor.lx", fmt17(lx));
        put("tensor.ly", fmt17(ly));
    } else {
        for (tag, (lx, ly)) in &cfg.tensor {
            put(&format!("tensor.lx.{tag}"), fmt17(*lx));
            put(&format!("tensor.ly.{tag}"), fmt17(*ly));
        }
    }
    put("potential.g", fmt17(cfg.gravity));
    put("exact", cfg.exact.name().to_string());
    put(
        "bc.kind",
        match cfg.bc_kind {
            BcKind::NoFlux => "noflux".into(),
            BcKind::Dirichlet => "dirichlet".to_string(),
        },
    );
    put(
        "bc.sides",
        if cfg.bc_sides == Side::ALL.to_vec() {
            "all".into()
        } else {
            cfg.bc_sides.iter().map(|s| s.name()).collect::<Vec<_>>().join(",")
        },
    );
    match cfg.bc_value {
        BcValue::Exact => put("bc.value", "exact".into()),
        BcValue::Const(c) => {
            put("bc.value", "const".into());
            put("bc.const", fmt17(c));
        }
    }
    for (side, v) in &cfg.bc_side_values {
        put(&format!("bc.const.{}", side.name()), fmt17(*v));
    }
    match cfg.init {
        InitKind::Exact => put("init.kind", "exact".into()),
        InitKind::Const(c) => {
            put("init.kind", "const".into());
            put("init.value", fmt17(c));
        }
        InitKind::Gibbs { mass } => {
            put("init.kind", "gibbs".into());
            put("init.mass", fmt17(mass));
        }
    }
    put("time.t_final", fmt17(cfg.t_final));
    put("time.dt_init", fmt17(cfg.dt_init));
    put("time.dt_max", fmt17(cfg.dt_max));
    put("time.growth", fmt17(cfg.growth));
    put("time.shrink", fmt17(cfg.shrink));
    put("time.max_failures", cfg.max_failures.to_string());
    put("newton.tol", fmt17(cfg.newton_tol));
    put("newton.tol_res", fmt17(cfg.newton_tol_res));
    put("newton.max_iter", cfg.newton_max_iter.to_string());
    put("newton.eps", fmt17(cfg.newton_eps));
    put("lumping.f", fmt17(cfg.lumping_fraction));
    put("output.dir", cfg.out_dir.clone());
    put("output.report", cfg.write_report.to_string());
    put("output.summary", cfg.write_summary.to_string());
    put("output.entropy", cfg.write_entropy.to_string());
    put("output.stride", cfg.trajectory_stride.to_string());
    if !cfg.snapshots.is_empty() {
        put(
            "output.snapshots",
            cfg.snapshots.iter().map(|t| fmt17(*t)).collect::<Vec<_>>().join(","),
        );
    }

    let mut out = String::new();
    for (k, v) in map {
        out.push_str(&format!("{k} = {v}\n"));
    }
    out
}
