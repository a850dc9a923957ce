//! Flat TOML run configuration.
//!
//! Every key has a documented default except `subcommand` (and `inputs`
//! for `fit`). Parsing collects every problem before giving up, so a bad
//! file is reported in one pass.

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;

use serde::{Serialize, Serializer};
use toml::{Table, Value};

use persistence_core::poly_model::{CoefficientDistribution, SlowlyVarying};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    PolyPersistence,
    GpExponent,
    Fit,
    CovarianceCheck,
    RootCount,
    Kac,
}

impl Subcommand {
    pub const ALL: [Subcommand; 6] = [
        Self::PolyPersistence,
        Self::GpExponent,
        Self::Fit,
        Self::CovarianceCheck,
        Self::RootCount,
        Self::Kac,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::PolyPersistence => "poly-persistence",
            Self::GpExponent => "gp-exponent",
            Self::Fit => "fit",
            Self::CovarianceCheck => "covariance-check",
            Self::RootCount => "root-count",
            Self::Kac => "kac",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionName {
    Gaussian,
    Rademacher,
    UniformSymmetric,
    Discrete,
    StudentT,
}

impl DistributionName {
    const ALL: [DistributionName; 5] = [
        Self::Gaussian,
        Self::Rademacher,
        Self::UniformSymmetric,
        Self::Discrete,
        Self::StudentT,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::Rademacher => "rademacher",
            Self::UniformSymmetric => "uniform_symmetric",
            Self::Discrete => "discrete",
            Self::StudentT => "student_t",
        }
    }
}

/// One run. Field names are the config keys.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub subcommand: Subcommand,
    #[serde(serialize_with = "seed_ser")]
    pub master_seed: u64,
    pub workers: usize,
    pub output: PathBuf,

    // Polynomial model.
    pub alpha: f64,
    pub slowly_varying: SlowlyVarying,
    pub distribution: DistributionName,
    pub df: f64,
    pub half_width: f64,
    pub values: Vec<f64>,
    pub probs: Vec<f64>,
    pub standardize: bool,

    // poly-persistence
    pub n_grid: Vec<usize>,
    pub trials: u64,
    pub max_unknown_rate: f64,

    // gp-exponent
    pub t_grid: Vec<f64>,
    pub dt: f64,
    pub refine_dt: bool,

    // fit
    pub inputs: Vec<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_alpha_stderr: Option<f64>,
    pub b_zero: f64,
    pub b_zero_stderr: f64,

    // covariance-check
    pub alphas: Vec<f64>,
    pub cov_n: u64,
    pub cov_m: f64,
    pub cov_delta: f64,
    pub max_block: i32,
    pub max_separation: i32,
    pub cov_tolerance: f64,
    pub sech_m: f64,
    pub sech_tolerance: f64,
    pub decay_n: u64,
    pub decay_m: f64,
    pub mc_trials: u64,

    // root-count
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficients_file: Option<PathBuf>,
    pub random_polys: u64,
    pub max_degree: usize,
    pub coefficient_bound: i64,

    // kac
    pub kac_degree: usize,
    pub kac_trials: u64,
    pub drift_degrees: Vec<usize>,
    pub drift_tolerance: f64,
}

/// TOML integers are signed 64-bit; larger seeds are written as strings.
fn seed_ser<S: Serializer>(seed: &u64, s: S) -> Result<S::Ok, S::Error> {
    if *seed <= i64::MAX as u64 {
        s.serialize_i64(*seed as i64)
    } else {
        s.serialize_str(&seed.to_string())
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

impl ExperimentConfig {
    /// Defaults for a subcommand.
    pub fn defaults(subcommand: Subcommand) -> Self {
        Self {
            subcommand,
            master_seed: 20_240_521,
            workers: default_workers(),
            output: PathBuf::from("results"),
            alpha: 0.0,
            slowly_varying: SlowlyVarying::Constant,
            distribution: DistributionName::Gaussian,
            df: 5.0,
            half_width: 1.0,
            values: Vec::new(),
            probs: Vec::new(),
            standardize: true,
            n_grid: vec![16, 32, 64, 128, 256],
            trials: 20_000,
            max_unknown_rate: 1e-3,
            t_grid: vec![5.0, 10.0, 15.0, 20.0],
            dt: 0.01,
            refine_dt: false,
            inputs: Vec::new(),
            b_alpha: None,
            b_alpha_stderr: None,
            b_zero: 0.1875,
            b_zero_stderr: 0.0,
            alphas: vec![0.0, 1.0, 2.0],
            cov_n: 1_000_000,
            cov_m: 8.0,
            cov_delta: 0.3,
            max_block: 3,
            max_separation: 2,
            cov_tolerance: 0.05,
            sech_m: 1e6,
            sech_tolerance: 1e-3,
            decay_n: 100_000_000,
            decay_m: 64.0,
            mc_trials: 20_000,
            coefficients_file: None,
            random_polys: 10_000,
            max_degree: 12,
            coefficient_bound: 20,
            kac_degree: 50,
            kac_trials: 100_000,
            drift_degrees: vec![100, 1_000, 10_000],
            drift_tolerance: 0.05,
        }
    }

    /// The coefficient law described by the model keys.
    pub fn coefficient_distribution(&self) -> persistence_core::Result<CoefficientDistribution> {
        let raw = match self.distribution {
            DistributionName::Gaussian => CoefficientDistribution::gaussian(),
            DistributionName::Rademacher => CoefficientDistribution::rademacher(),
            DistributionName::UniformSymmetric => CoefficientDistribution::uniform_symmetric(self.half_width)?,
            DistributionName::Discrete => CoefficientDistribution::discrete(self.values.clone(), self.probs.clone())?,
            DistributionName::StudentT => CoefficientDistribution::student_t(self.df)?,
        };
        if self.standardize {
            raw.standardize()
        } else {
            Ok(raw)
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config fields are TOML-representable")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ErrorKind {
    UnknownKey,
    MissingKey,
    WrongType,
    OutOfRange,
    Syntax,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub path: String,
    pub kind: ErrorKind,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ErrorKind::UnknownKey => "unknown key",
            ErrorKind::MissingKey => "missing required key",
            ErrorKind::WrongType => "wrong type",
            ErrorKind::OutOfRange => "out of range",
            ErrorKind::Syntax => "syntax error",
        };
        write!(f, "{}: {kind}: {}", self.path, self.message)
    }
}

/// Every problem found in one document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl ConfigErrors {
    pub fn paths(&self) -> Vec<&str> {
        self.0.iter().map(|e| e.path.as_str()).collect()
    }
}

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} configuration error(s):", self.0.len())?;
        for e in &self.0 {
            writeln!(f, "  {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedConfig {
    pub config: ExperimentConfig,
    pub warnings: Vec<String>,
}

/// Typed reads from the document that record errors instead of failing.
struct Reader {
    table: Table,
    seen: BTreeSet<String>,
    errors: Vec<ConfigError>,
}

impl Reader {
    fn err(&mut self, path: impl Into<String>, kind: ErrorKind, message: impl Into<String>) {
        self.errors.push(ConfigError {
            path: path.into(),
            kind,
            message: message.into(),
        });
    }

    fn take(&mut self, key: &str) -> Option<Value> {
        self.seen.insert(key.to_string());
        self.table.get(key).cloned()
    }

    fn wrong(&mut self, key: &str, want: &str, got: &Value) {
        self.err(key, ErrorKind::WrongType, format!("expected {want}, got {}", got.type_str()));
    }

    fn as_f64(v: &Value) -> Option<f64> {
        match v {
            Value::Float(x) => Some(*x),
            Value::Integer(i) => Some(*i as f64),
            _ => None,
        }
    }

    fn float(&mut self, key: &str, default: f64) -> f64 {
        match self.take(key) {
            None => default,
            Some(v) => Self::as_f64(&v).unwrap_or_else(|| {
                self.wrong(key, "a number", &v);
                default
            }),
        }
    }

    fn opt_float(&mut self, key: &str) -> Option<f64> {
        let v = self.take(key)?;
        let x = Self::as_f64(&v);
        if x.is_none() {
            self.wrong(key, "a number", &v);
        }
        x
    }

    fn int(&mut self, key: &str, default: i64) -> i64 {
        match self.take(key) {
            None => default,
            Some(Value::Integer(i)) => i,
            Some(v) => {
                self.wrong(key, "an integer", &v);
                default
            }
        }
    }

    /// Non-negative integer with a lower bound.
    fn count(&mut self, key: &str, default: u64, min: u64) -> u64 {
        let d = i64::try_from(default).unwrap_or(i64::MAX);
        let i = self.int(key, d);
        if i < min as i64 {
            self.err(key, ErrorKind::OutOfRange, format!("must be ≥ {min}, got {i}"));
            return default;
        }
        i as u64
    }

    fn boolean(&mut self, key: &str, default: bool) -> bool {
        match self.take(key) {
            None => default,
            Some(Value::Boolean(b)) => b,
            Some(v) => {
                self.wrong(key, "a boolean", &v);
                default
            }
        }
    }

    fn string(&mut self, key: &str) -> Option<String> {
        match self.take(key)? {
            Value::String(s) => Some(s),
            v => {
                self.wrong(key, "a string", &v);
                None
            }
        }
    }

    fn array(&mut self, key: &str) -> Option<Vec<Value>> {
        match self.take(key)? {
            Value::Array(a) => Some(a),
            v => {
                self.wrong(key, "an array", &v);
                None
            }
        }
    }

    fn floats(&mut self, key: &str, default: Vec<f64>) -> Vec<f64> {
        let Some(a) = self.array(key) else { return default };
        let mut out = Vec::with_capacity(a.len());
        for (i, v) in a.iter().enumerate() {
            match Self::as_f64(v) {
                Some(x) => out.push(x),
                None => self.wrong(&format!("{key}[{i}]"), "a number", v),
            }
        }
        out
    }

    fn counts(&mut self, key: &str, default: Vec<usize>, min: usize) -> Vec<usize> {
        let Some(a) = self.array(key) else { return default };
        let mut out = Vec::with_capacity(a.len());
        for (i, v) in a.iter().enumerate() {
            let path = format!("{key}[{i}]");
            match v {
                Value::Integer(k) if *k >= min as i64 => out.push(*k as usize),
                Value::Integer(k) => self.err(path, ErrorKind::OutOfRange, format!("must be ≥ {min}, got {k}")),
                _ => self.wrong(&path, "an integer", v),
            }
        }
        out
    }

    fn paths(&mut self, key: &str) -> Vec<PathBuf> {
        let Some(a) = self.array(key) else { return Vec::new() };
        let mut out = Vec::new();
        for (i, v) in a.iter().enumerate() {
            match v {
                Value::String(s) => out.push(PathBuf::from(s)),
                _ => self.wrong(&format!("{key}[{i}]"), "a string", v),
            }
        }
        out
    }

    fn check(&mut self, ok: bool, key: &str, message: impl Into<String>) {
        if !ok {
            self.err(key, ErrorKind::OutOfRange, message);
        }
    }
}

fn parse_seed(r: &mut Reader, default: u64) -> u64 {
    match r.take("master_seed") {
        None => default,
        Some(Value::Integer(i)) if i >= 0 => i as u64,
        Some(Value::String(s)) => s.parse().unwrap_or_else(|_| {
            r.err("master_seed", ErrorKind::WrongType, format!("`{s}` is not a 64-bit unsigned integer"));
            default
        }),
        Some(v) => {
            r.err("master_seed", ErrorKind::OutOfRange, format!("must be a non-negative integer, got {v}"));
            default
        }
    }
}

const ALPHA_MSG: &str = "must be finite and > −1";

fn alpha_ok(a: f64) -> bool {
    a.is_finite() && a > -1.0
}

/// Parse and validate a document. All reads happen before any error is
/// returned, so the error list is complete.
pub fn parse_config(text: &str) -> Result<ParsedConfig, ConfigErrors> {
    let table: Table = toml::from_str(text).map_err(|e| {
        ConfigErrors(vec![ConfigError {
            path: "<document>".into(),
            kind: ErrorKind::Syntax,
            message: e.message().to_string(),
        }])
    })?;
    let mut r = Reader {
        table,
        seen: BTreeSet::new(),
        errors: Vec::new(),
    };
    let mut warnings = Vec::new();

    let subcommand = match r.string("subcommand") {
        Some(s) => Subcommand::parse(&s).or_else(|| {
            let names: Vec<_> = Subcommand::ALL.iter().map(|c| c.name()).collect();
            r.err("subcommand", ErrorKind::OutOfRange, format!("`{s}` is not one of {}", names.join(", ")));
            None
        }),
        None => {
            if !r.errors.iter().any(|e| e.path == "subcommand") {
                r.err("subcommand", ErrorKind::MissingKey, "every config names its subcommand");
            }
            None
        }
    };
    let d = ExperimentConfig::defaults(subcommand.unwrap_or(Subcommand::PolyPersistence));

    let master_seed = parse_seed(&mut r, d.master_seed);
    let workers = r.count("workers", d.workers as u64, 1) as usize;
    let output = r.string("output").map_or(d.output.clone(), PathBuf::from);

    let alpha = r.float("alpha", d.alpha);
    r.check(alpha_ok(alpha), "alpha", format!("{ALPHA_MSG}, got {alpha}"));
    let slowly_varying = match r.string("slowly_varying") {
        None => d.slowly_varying,
        Some(s) => SlowlyVarying::parse(&s).unwrap_or_else(|| {
            let names: Vec<_> = SlowlyVarying::ALL.iter().map(|l| l.name()).collect();
            r.err("slowly_varying", ErrorKind::OutOfRange, format!("`{s}` is not one of {}", names.join(", ")));
            d.slowly_varying
        }),
    };
    let distribution = match r.string("distribution") {
        None => d.distribution,
        Some(s) => DistributionName::ALL.into_iter().find(|n| n.name() == s).unwrap_or_else(|| {
            let names: Vec<_> = DistributionName::ALL.iter().map(|n| n.name()).collect();
            r.err("distribution", ErrorKind::OutOfRange, format!("`{s}` is not one of {}", names.join(", ")));
            d.distribution
        }),
    };
    let df = r.float("df", d.df);
    let half_width = r.float("half_width", d.half_width);
    let values = r.floats("values", d.values.clone());
    let probs = r.floats("probs", d.probs.clone());
    let standardize = r.boolean("standardize", d.standardize);

    let n_grid = r.counts("n_grid", d.n_grid.clone(), 1);
    let trials = r.count("trials", d.trials, 1);
    let max_unknown_rate = r.float("max_unknown_rate", d.max_unknown_rate);
    r.check(
        (0.0..=1.0).contains(&max_unknown_rate),
        "max_unknown_rate",
        format!("must lie in [0, 1], got {max_unknown_rate}"),
    );

    let t_grid = r.floats("t_grid", d.t_grid.clone());
    let dt = r.float("dt", d.dt);
    let refine_dt = r.boolean("refine_dt", d.refine_dt);

    let inputs = r.paths("inputs");
    let b_alpha = r.opt_float("b_alpha");
    let b_alpha_stderr = r.opt_float("b_alpha_stderr");
    let b_zero = r.float("b_zero", d.b_zero);
    let b_zero_stderr = r.float("b_zero_stderr", d.b_zero_stderr);

    let alphas = r.floats("alphas", d.alphas.clone());
    let cov_n = r.count("cov_n", d.cov_n, 2);
    let cov_m = r.float("cov_m", d.cov_m);
    let cov_delta = r.float("cov_delta", d.cov_delta);
    let max_block = r.int("max_block", d.max_block as i64);
    let max_separation = r.int("max_separation", d.max_separation as i64);
    let cov_tolerance = r.float("cov_tolerance", d.cov_tolerance);
    let sech_m = r.float("sech_m", d.sech_m);
    let sech_tolerance = r.float("sech_tolerance", d.sech_tolerance);
    let decay_n = r.count("decay_n", d.decay_n, 2);
    let decay_m = r.float("decay_m", d.decay_m);
    let mc_trials = r.count("mc_trials", d.mc_trials, 100);

    let coefficients_file = r.string("coefficients_file").map(PathBuf::from);
    let random_polys = r.count("random_polys", d.random_polys, 0);
    let max_degree = r.count("max_degree", d.max_degree as u64, 1) as usize;
    let coefficient_bound = r.int("coefficient_bound", d.coefficient_bound);

    let kac_degree = r.count("kac_degree", d.kac_degree as u64, 1) as usize;
    let kac_trials = r.count("kac_trials", d.kac_trials, 2);
    let drift_degrees = r.counts("drift_degrees", d.drift_degrees.clone(), 1);
    let drift_tolerance = r.float("drift_tolerance", d.drift_tolerance);

    // Unknown keys, in document order.
    let unknown: Vec<String> = r.table.keys().filter(|k| !r.seen.contains(*k)).cloned().collect();
    for k in unknown {
        r.err(k, ErrorKind::UnknownKey, "not a configuration key");
    }

    // Range checks that need several keys.
    match distribution {
        DistributionName::StudentT => r.check(df.is_finite() && df >= 3.0, "df", format!("must be ≥ 3, got {df}")),
        DistributionName::UniformSymmetric => r.check(
            half_width.is_finite() && half_width > 0.0,
            "half_width",
            format!("must be finite and > 0, got {half_width}"),
        ),
        DistributionName::Discrete => {
            r.check(!values.is_empty(), "values", "discrete law needs a support");
            r.check(values.len() == probs.len(), "probs", "must have one entry per support point");
            r.check(
                probs.iter().all(|p| p.is_finite() && *p >= 0.0) && probs.iter().sum::<f64>() > 0.0,
                "probs",
                "must be non-negative with positive total",
            );
        }
        _ => {}
    }
    if r.errors.is_empty() {
        let probe = ExperimentConfig {
            distribution,
            df,
            half_width,
            values: values.clone(),
            probs: probs.clone(),
            standardize,
            ..d.clone()
        };
        if let Err(e) = probe.coefficient_distribution() {
            r.err("distribution", ErrorKind::OutOfRange, e.to_string());
        }
    }

    let sub = subcommand.unwrap_or(Subcommand::PolyPersistence);
    match sub {
        Subcommand::PolyPersistence => {
            r.check(!n_grid.is_empty(), "n_grid", "needs at least one degree");
            for (i, &n) in n_grid.iter().enumerate() {
                if n % 2 == 1 {
                    warnings.push(format!(
                        "n_grid[{i}] = {n} is odd: an odd-degree polynomial always has a real zero, so the estimate is exactly 0"
                    ));
                }
            }
        }
        Subcommand::GpExponent => {
            r.check(t_grid.len() >= 3, "t_grid", format!("needs at least 3 horizons, got {}", t_grid.len()));
            r.check(
                t_grid.iter().all(|t| t.is_finite() && *t > 0.0) && t_grid.windows(2).all(|w| w[1] > w[0]),
                "t_grid",
                "horizons must be positive and strictly increasing",
            );
            r.check(dt.is_finite() && dt > 0.0, "dt", format!("must be positive, got {dt}"));
            if dt > 0.0 {
                for (i, t) in t_grid.iter().enumerate() {
                    let k = t / dt;
                    if (k - k.round()).abs() > 1e-6 * k.max(1.0) {
                        r.err(format!("t_grid[{i}]"), ErrorKind::OutOfRange, format!("{t} is not a multiple of dt = {dt}"));
                    }
                }
            }
        }
        Subcommand::Fit => {
            if inputs.is_empty() && !r.errors.iter().any(|e| e.path.starts_with("inputs")) {
                r.err("inputs", ErrorKind::MissingKey, "fit needs at least one poly-persistence CSV");
            }
            if b_alpha.is_some() != b_alpha_stderr.is_some() {
                r.err("b_alpha_stderr", ErrorKind::MissingKey, "b_alpha and b_alpha_stderr go together");
            }
            if let Some(b) = b_alpha {
                r.check(b.is_finite() && b > 0.0, "b_alpha", format!("must be positive, got {b}"));
            }
            if let Some(s) = b_alpha_stderr {
                r.check(s.is_finite() && s >= 0.0, "b_alpha_stderr", format!("must be ≥ 0, got {s}"));
            }
            r.check(b_zero.is_finite() && b_zero > 0.0, "b_zero", format!("must be positive, got {b_zero}"));
            r.check(
                b_zero_stderr.is_finite() && b_zero_stderr >= 0.0,
                "b_zero_stderr",
                format!("must be ≥ 0, got {b_zero_stderr}"),
            );
        }
        Subcommand::CovarianceCheck => {
            r.check(!alphas.is_empty(), "alphas", "needs at least one exponent");
            for (i, &a) in alphas.iter().enumerate() {
                r.check(alpha_ok(a), &format!("alphas[{i}]"), format!("{ALPHA_MSG}, got {a}"));
            }
            for (key, m) in [("cov_m", cov_m), ("decay_m", decay_m), ("sech_m", sech_m)] {
                r.check(m.is_finite() && m > 1.0, key, format!("must exceed 1, got {m}"));
            }
            r.check(
                cov_delta > 0.0 && cov_delta < 0.5,
                "cov_delta",
                format!("must lie in (0, 1/2), got {cov_delta}"),
            );
            r.check((1..=8).contains(&max_block), "max_block", format!("must lie in 1..=8, got {max_block}"));
            r.check(
                (0..=5).contains(&max_separation),
                "max_separation",
                format!("must lie in 0..=5, got {max_separation}"),
            );
            for (key, v) in [("cov_tolerance", cov_tolerance), ("sech_tolerance", sech_tolerance)] {
                r.check(v.is_finite() && v > 0.0, key, format!("must be positive, got {v}"));
            }
        }
        Subcommand::RootCount => {
            r.check(max_degree <= 64, "max_degree", format!("must be ≤ 64, got {max_degree}"));
            r.check(
                (1..=1_000_000).contains(&coefficient_bound),
                "coefficient_bound",
                format!("must lie in 1..=10⁶, got {coefficient_bound}"),
            );
        }
        Subcommand::Kac => {
            // The oracle is the flat-weight Gaussian formula.
            r.check(alpha == 0.0, "alpha", format!("kac runs use the flat weight, got alpha = {alpha}"));
            r.check(
                slowly_varying == SlowlyVarying::Constant,
                "slowly_varying",
                "kac runs use L ≡ 1",
            );
            r.check(
                distribution == DistributionName::Gaussian,
                "distribution",
                "kac runs use Gaussian coefficients",
            );
            r.check(kac_degree <= 10_000, "kac_degree", format!("must be ≤ 10⁴, got {kac_degree}"));
            r.check(drift_degrees.len() >= 2, "drift_degrees", "needs at least two degrees");
            r.check(
                drift_tolerance.is_finite() && drift_tolerance > 0.0,
                "drift_tolerance",
                format!("must be positive, got {drift_tolerance}"),
            );
        }
    }

    if !r.errors.is_empty() {
        return Err(ConfigErrors(r.errors));
    }
    Ok(ParsedConfig {
        config: ExperimentConfig {
            subcommand: sub,
            master_seed,
            workers,
            output,
            alpha,
            slowly_varying,
            distribution,
            df,
            half_width,
            values,
            probs,
            standardize,
            n_grid,
            trials,
            max_unknown_rate,
            t_grid,
            dt,
            refine_dt,
            inputs,
            b_alpha,
            b_alpha_stderr,
            b_zero,
            b_zero_stderr,
            alphas,
            cov_n,
            cov_m,
            cov_delta,
            max_block: max_block as i32,
            max_separation: max_separation as i32,
            cov_tolerance,
            sech_m,
            sech_tolerance,
            decay_n,
            decay_m,
            mc_trials,
            coefficients_file,
            random_polys,
            max_degree,
            coefficient_bound,
            kac_degree,
            kac_trials,
            drift_degrees,
            drift_tolerance,
        },
        warnings,
    })
}
