//! Run configuration: a flat `key = value` file merged with command-line
//! overrides, validated before any computation and echoed into every output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qmcmc_core::analysis::{ScanConfig, DEFAULT_ALPHA_GRID};
use qmcmc_core::freefermion::{DEFAULT_MODE_STEPS_PER_UNIT_TIME, DEFAULT_QUADRATURE_INTERVALS};
use qmcmc_core::problems::{DisorderModel, Kappa, RampKind, MAX_DENSE_SITES};
use qmcmc_core::quantum::DEFAULT_STEPS_PER_UNIT_TIME;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

/// Version of every CSV and JSON layout written by the tool.
pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable holding the default worker-thread count.
pub const THREADS_ENV: &str = "QMCMC_THREADS";

/// Every accepted key, in the order it is written to output headers.
pub const KEYS: &[&str] = &[
    "model",
    "n",
    "beta",
    "h",
    "ramp",
    "alphas",
    "kappa",
    "kappa_min",
    "kappa_max",
    "kappa_points",
    "instances",
    "seed",
    "steps_per_unit_time",
    "mode_steps",
    "bound_method",
    "quadrature_intervals",
    "instance_file",
    "output",
    "threads",
];

/// Keys that do not influence any computed number.
const PLUMBING_KEYS: &[&str] = &["output", "threads"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Model {
    #[serde(rename = "ising")]
    Ising,
    #[serde(rename = "sk")]
    Sk,
    #[serde(rename = "3spin")]
    ThreeSpin,
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Ising => "ising",
            Self::Sk => "sk",
            Self::ThreeSpin => "3spin",
        }
    }

    pub fn disorder(&self) -> Option<DisorderModel> {
        match self {
            Self::Ising => None,
            Self::Sk => Some(DisorderModel::Sk),
            Self::ThreeSpin => Some(DisorderModel::ThreeSpin),
        }
    }
}

impl FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "ising" => Ok(Self::Ising),
            "sk" => Ok(Self::Sk),
            "3spin" | "three_spin" | "3-spin" => Ok(Self::ThreeSpin),
            other => Err(format!("unknown model '{other}' (expected ising, sk or 3spin)")),
        }
    }
}

/// Plateau handling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum KappaMode {
    /// Large-plateau (time-averaged) limit.
    Inf,
    Value(f64),
    /// Log-uniform grid between `kappa_min` and `kappa_max`.
    Scan,
}

/// How the Ising bound is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundMethod {
    /// Exact sums over the two momentum sectors.
    Sectors,
    /// Large-N integral form.
    Integral,
}

/// Fully resolved configuration of one invocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub model: Model,
    pub sizes: Vec<usize>,
    pub beta: f64,
    pub h: f64,
    pub ramp: RampKind,
    pub alphas: Vec<f64>,
    pub kappa: KappaMode,
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub kappa_points: usize,
    /// `None` until a command fills in its own default.
    pub instances: Option<usize>,
    pub seed: u64,
    pub steps_per_unit_time: usize,
    pub mode_steps: usize,
    pub bound_method: BoundMethod,
    pub quadrature_intervals: usize,
    pub instance_file: Option<PathBuf>,
    pub output: PathBuf,
    /// 0 means one worker per core.
    pub threads: usize,
}

/// Raw `key → value` text, before parsing.
pub type RawConfig = BTreeMap<String, String>;

fn default_values() -> RawConfig {
    let alphas: Vec<String> = DEFAULT_ALPHA_GRID.iter().map(|a| a.to_string()).collect();
    let threads = std::env::var(THREADS_ENV).unwrap_or_else(|_| "0".into());
    [
        ("model", "ising".to_string()),
        ("n", "8".into()),
        ("beta", "5".into()),
        ("h", "1.5".into()),
        ("ramp", "sin2".into()),
        ("alphas", alphas.join(",")),
        ("kappa", "inf".into()),
        ("kappa_min", "100".into()),
        ("kappa_max", "100000".into()),
        ("kappa_points", "64".into()),
        ("instances", "auto".into()),
        ("seed", "0".into()),
        ("steps_per_unit_time", DEFAULT_STEPS_PER_UNIT_TIME.to_string()),
        ("mode_steps", DEFAULT_MODE_STEPS_PER_UNIT_TIME.to_string()),
        ("bound_method", "sectors".into()),
        ("quadrature_intervals", DEFAULT_QUADRATURE_INTERVALS.to_string()),
        ("instance_file", String::new()),
        ("output", ".".into()),
        ("threads", threads),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_flat(text: &str, origin: &Path) -> Result<RawConfig> {
    let mut out = RawConfig::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::input(origin, i as u64 + 1, format!("expected 'key = value', got '{line}'")))?;
        let key = key.trim().to_ascii_lowercase();
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::input(origin, i as u64 + 1, format!("unknown config key '{key}'")));
        }
        out.insert(key, value.trim().to_string());
    }
    Ok(out)
}

/// Merges defaults, an optional config file and overrides (later wins).
pub fn resolve(file: Option<&Path>, overrides: &RawConfig) -> Result<RunConfig> {
    let mut raw = default_values();
    if let Some(path) = file {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        raw.extend(parse_flat(&text, path)?);
    }
    for (k, v) in overrides {
        if !KEYS.contains(&k.as_str()) {
            return Err(CliError::usage(format!("unknown config key '{k}'")));
        }
        raw.insert(k.clone(), v.clone());
    }
    RunConfig::from_raw(&raw)
}

fn parse<T: FromStr>(raw: &RawConfig, key: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let value = &raw[key];
    value.parse().map_err(|e| CliError::config(key, format!("cannot parse '{value}': {e}")))
}

/// Sizes as `8`, `6,8,10`, `5..10` (inclusive) or `8..40:4`.
pub fn parse_sizes(text: &str) -> std::result::Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((lo, rest)) = part.split_once("..") {
            let (hi, step) = rest.split_once(':').unwrap_or((rest, "1"));
            let lo: usize = lo.trim().parse().map_err(|_| format!("bad range start in '{part}'"))?;
            let hi: usize = hi.trim().parse().map_err(|_| format!("bad range end in '{part}'"))?;
            let step: usize = step.trim().parse().map_err(|_| format!("bad range step in '{part}'"))?;
            if step == 0 || hi < lo {
                return Err(format!("empty range '{part}'"));
            }
            out.extend((lo..=hi).step_by(step));
        } else {
            out.push(part.parse().map_err(|_| format!("bad size '{part}'"))?);
        }
    }
    if out.is_empty() {
        return Err("no system sizes given".into());
    }
    Ok(out)
}

fn parse_list(text: &str) -> std::result::Result<Vec<f64>, String> {
    text.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<f64>().map_err(|_| format!("bad number '{p}'")))
        .collect()
}

impl RunConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let model: Model = raw["model"].parse().map_err(|e: String| CliError::config("model", e))?;
        let sizes = parse_sizes(&raw["n"]).map_err(|e| CliError::config("n", e))?;
        let ramp = match raw["ramp"].parse::<RampKind>().map_err(|e| CliError::config("ramp", e.to_string()))? {
            RampKind::Quench => return Err(CliError::config("ramp", "use alphas = 0 for a quench")),
            kind => kind,
        };
        let alphas = parse_list(&raw["alphas"]).map_err(|e| CliError::config("alphas", e))?;
        let kappa = match raw["kappa"].to_ascii_lowercase().as_str() {
            "inf" | "infinite" | "large" => KappaMode::Inf,
            "scan" => KappaMode::Scan,
            v => KappaMode::Value(
                v.parse()
                    .map_err(|_| CliError::config("kappa", format!("expected inf, scan or a number, got '{v}'")))?,
            ),
        };
        let instances = match raw["instances"].as_str() {
            "auto" | "" => None,
            _ => Some(parse(raw, "instances")?),
        };
        let bound_method = match raw["bound_method"].to_ascii_lowercase().as_str() {
            "sectors" => BoundMethod::Sectors,
            "integral" => BoundMethod::Integral,
            other => {
                return Err(CliError::config("bound_method", format!("expected sectors or integral, got '{other}'")))
            }
        };
        let instance_file = Some(raw["instance_file"].trim()).filter(|s| !s.is_empty()).map(PathBuf::from);
        let config = Self {
            model,
            sizes,
            beta: parse(raw, "beta")?,
            h: parse(raw, "h")?,
            ramp,
            alphas,
            kappa,
            kappa_min: parse(raw, "kappa_min")?,
            kappa_max: parse(raw, "kappa_max")?,
            kappa_points: parse(raw, "kappa_points")?,
            instances,
            seed: parse(raw, "seed")?,
            steps_per_unit_time: parse(raw, "steps_per_unit_time")?,
            mode_steps: parse(raw, "mode_steps")?,
            bound_method,
            quadrature_intervals: parse(raw, "quadrature_intervals")?,
            instance_file,
            output: PathBuf::from(&raw["output"]),
            threads: parse(raw, "threads")?,
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        // Size caps depend on the method: dense commands call `require_dense`,
        // the free-fermion bound has none.
        if self.sizes.contains(&0) {
            return Err(CliError::config("n", "sizes must be >= 1"));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(CliError::config("beta", "must be finite and >= 0"));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(CliError::config("h", "must be finite and > 0"));
        }
        self.scan_config(Kappa::LargeKappaLimit).validate().map_err(|e| CliError::config("alphas", e.to_string()))?;
        if let KappaMode::Value(k) = self.kappa {
            if !(k >= 0.0 && k.is_finite()) {
                return Err(CliError::config("kappa", "must be finite and >= 0"));
            }
        }
        if !(self.kappa_min > 0.0 && self.kappa_max > self.kappa_min && self.kappa_max.is_finite()) {
            return Err(CliError::config("kappa_min", "need 0 < kappa_min < kappa_max"));
        }
        if self.kappa_points < 2 {
            return Err(CliError::config("kappa_points", "need at least 2 points"));
        }
        if self.instances == Some(0) {
            return Err(CliError::config("instances", "must be at least 1"));
        }
        if self.steps_per_unit_time == 0 {
            return Err(CliError::config("steps_per_unit_time", "must be at least 1"));
        }
        if self.mode_steps == 0 {
            return Err(CliError::config("mode_steps", "must be at least 1"));
        }
        if self.quadrature_intervals < 2 || self.quadrature_intervals % 2 == 1 {
            return Err(CliError::config("quadrature_intervals", "must be even and at least 2"));
        }
        Ok(())
    }

    /// Rejects sizes that need dense `2^N × 2^N` operators beyond the cap.
    pub fn require_dense(&self) -> Result<()> {
        match self.sizes.iter().find(|&&n| n > MAX_DENSE_SITES) {
            Some(&n) => Err(qmcmc_core::Error::SizeCap { n, cap: MAX_DENSE_SITES, what: "dense operator" }.into()),
            None => Ok(()),
        }
    }

    /// Fills in the instance count if the user left it unset.
    pub fn with_default_instances(mut self, default: usize) -> Self {
        self.instances.get_or_insert(default);
        self
    }

    pub fn instance_count(&self) -> usize {
        self.instances.unwrap_or(1)
    }

    /// Core scan settings for a given plateau handling.
    pub fn scan_config(&self, kappa: Kappa) -> ScanConfig {
        ScanConfig {
            beta: self.beta,
            h: self.h,
            kind: self.ramp,
            alphas: self.alphas.clone(),
            kappa,
            steps_per_unit_time: self.steps_per_unit_time,
        }
    }

    /// Canonical `key = value` pairs in [`KEYS`] order.
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let sizes = self.sizes.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",");
        let kappa = match self.kappa {
            KappaMode::Inf => "inf".to_string(),
            KappaMode::Scan => "scan".to_string(),
            KappaMode::Value(k) => k.to_string(),
        };
        vec![
            ("model", self.model.name().to_string()),
            ("n", sizes),
            ("beta", self.beta.to_string()),
            ("h", self.h.to_string()),
            ("ramp", self.ramp.name().to_string()),
            ("alphas", list(&self.alphas)),
            ("kappa", kappa),
            ("kappa_min", self.kappa_min.to_string()),
            ("kappa_max", self.kappa_max.to_string()),
            ("kappa_points", self.kappa_points.to_string()),
            ("instances", self.instances.map_or("auto".to_string(), |i| i.to_string())),
            ("seed", self.seed.to_string()),
            ("steps_per_unit_time", self.steps_per_unit_time.to_string()),
            ("mode_steps", self.mode_steps.to_string()),
            (
                "bound_method",
                match self.bound_method {
                    BoundMethod::Sectors => "sectors",
                    BoundMethod::Integral => "integral",
                }
                .to_string(),
            ),
            ("quadrature_intervals", self.quadrature_intervals.to_string()),
            ("instance_file", self.instance_file.as_ref().map_or(String::new(), |p| p.display().to_string())),
            ("output", self.output.display().to_string()),
            ("threads", self.threads.to_string()),
        ]
    }

    /// Flat text that [`parse_flat`] reads back to the same configuration.
    pub fn to_flat(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.pairs() {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// First 16 hex digits of the SHA-256 of every key that affects results.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        for (k, v) in self.pairs() {
            if !PLUMBING_KEYS.contains(&k) {
                hasher.update(format!("{k}={v}\n").as_bytes());
            }
        }
        hasher.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// `key → value` object for JSON outputs.
    pub fn to_json(&self) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> =
            self.pairs().into_iter().map(|(k, v)| (k.to_string(), serde_json::Value::String(v))).collect();
        serde_json::Value::Object(map)
    }
}
