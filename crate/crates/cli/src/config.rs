use std::path::{Path, PathBuf};

use edgeworth_core::diagnostics::Observable;
use edgeworth_core::edgeworth::Mode;
use edgeworth_core::models::{Family, ModelConfig, TransformSpec};
use edgeworth_core::rngkit::DistSpec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config at `{path}`: {message}")]
    Parse { path: String, message: String },
    #[error("missing required field `{0}`")]
    Missing(String),
    #[error("invalid value for `{field}`: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field: field.to_string(), message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Cumulants,
    Edgeworth,
    Wasserstein,
    Dependence,
    Assumptions,
    CfScan,
    BeCharacteristic,
    Price,
    Convergence,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Cumulants => "cumulants",
            Task::Edgeworth => "edgeworth",
            Task::Wasserstein => "wasserstein",
            Task::Dependence => "dependence",
            Task::Assumptions => "assumptions",
            Task::CfScan => "cf-scan",
            Task::BeCharacteristic => "be-characteristic",
            Task::Price => "price",
            Task::Convergence => "convergence",
        }
    }
}

/// Model description without the horizon, which comes from `n_list`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub family: Family,
    pub innovation: DistSpec,
    #[serde(default = "TransformSpec::identity")]
    pub transform: TransformSpec,
}

impl ModelBlock {
    pub fn at(&self, n: usize) -> ModelConfig {
        ModelConfig { family: self.family.clone(), innovation: self.innovation.clone(), transform: self.transform.clone(), n }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_json")]
    pub json: String,
    #[serde(default = "default_csv")]
    pub csv: String,
}

fn default_dir() -> PathBuf {
    PathBuf::from("edgeworth-lab-out")
}
fn default_json() -> String {
    "report.json".into()
}
fn default_csv() -> String {
    "report.csv".into()
}

impl Default for OutputPaths {
    fn default() -> Self {
        Self { dir: default_dir(), json: default_json(), csv: default_csv() }
    }
}

fn default_batches() -> usize {
    10
}
fn default_refine() -> usize {
    edgeworth_core::metrics::DEFAULT_REFINE
}
fn classical() -> Mode {
    Mode::Classical
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CenteringBlock {
    #[serde(rename = "N", default = "default_centering_n")]
    pub replicates: usize,
}

fn default_centering_n() -> usize {
    2000
}

impl Default for CenteringBlock {
    fn default() -> Self {
        Self { replicates: default_centering_n() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeworthTask {
    #[serde(default = "classical")]
    pub mode: Mode,
    #[serde(default = "default_refine")]
    pub refine: usize,
    /// Batches for the batch-means standard error.
    #[serde(default = "default_batches")]
    pub batches: usize,
}

impl Default for EdgeworthTask {
    fn default() -> Self {
        Self { mode: classical(), refine: default_refine(), batches: default_batches() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WassersteinTask {
    #[serde(default = "default_batches")]
    pub batches: usize,
}

impl Default for WassersteinTask {
    fn default() -> Self {
        Self { batches: default_batches() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DependenceTask {
    #[serde(default = "two")]
    pub p: f64,
    pub lags: Option<Vec<usize>>,
    /// Replicates; defaults to `max(1000, N / 10)`.
    #[serde(rename = "N", default)]
    pub replicates: Option<usize>,
    #[serde(default = "observable_x")]
    pub observable: Observable,
}

fn two() -> f64 {
    2.0
}
fn observable_x() -> Observable {
    Observable::X
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssumptionsTask {
    /// Norm exponent for the contraction conditions; defaults to the
    /// smallest integer above the family's lower bound.
    #[serde(default)]
    pub q: Option<f64>,
    #[serde(default = "default_xi_grid")]
    pub xi_grid: Vec<f64>,
    #[serde(default = "default_outer")]
    pub n_outer: usize,
    #[serde(default = "default_inner")]
    pub n_inner: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_v_grid")]
    pub v_grid: Vec<f64>,
    #[serde(default = "default_mc_draws")]
    pub mc_draws: usize,
}

fn default_xi_grid() -> Vec<f64> {
    vec![0.5, 1.0, 2.0, 4.0]
}
fn default_outer() -> usize {
    1000
}
fn default_inner() -> usize {
    1000
}
fn default_delta() -> f64 {
    0.1
}
fn default_v_grid() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}
fn default_mc_draws() -> usize {
    edgeworth_core::diagnostics::DEFAULT_MC_DRAWS
}

impl Default for AssumptionsTask {
    fn default() -> Self {
        Self {
            q: None,
            xi_grid: default_xi_grid(),
            n_outer: default_outer(),
            n_inner: default_inner(),
            delta: default_delta(),
            v_grid: default_v_grid(),
            mc_draws: default_mc_draws(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CfScanTask {
    pub a: Option<f64>,
    pub b: Option<f64>,
    #[serde(default = "default_grid")]
    pub grid_size: usize,
}

fn default_grid() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeTask {
    pub a: Option<f64>,
    /// Defaults to `{2^j a : j = 0..=10}`.
    #[serde(default)]
    pub b_grid: Option<Vec<f64>>,
    #[serde(default = "default_x_points")]
    pub x_points: usize,
    /// Replicates used, taken in replicate order.
    #[serde(default = "default_be_samples")]
    pub max_samples: usize,
}

fn default_x_points() -> usize {
    129
}
fn default_be_samples() -> usize {
    20_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Strikes {
    One(f64),
    Many(Vec<f64>),
}

impl Strikes {
    pub fn to_vec(&self) -> Vec<f64> {
        match self {
            Strikes::One(k) => vec![*k],
            Strikes::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceTask {
    #[serde(rename = "K", default)]
    pub strikes: Option<Strikes>,
    #[serde(default = "classical")]
    pub mode: Mode,
    /// Deterministic log-price drift; defaults to `sqrt(n) mu_f`.
    #[serde(default)]
    pub drift: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceTask {
    #[serde(default = "default_conv_batches")]
    pub batches: usize,
    #[serde(default = "default_bootstrap")]
    pub bootstrap: usize,
    #[serde(default = "default_refine")]
    pub refine: usize,
}

fn default_conv_batches() -> usize {
    8
}
fn default_bootstrap() -> usize {
    200
}

impl Default for ConvergenceTask {
    fn default() -> Self {
        Self { batches: default_conv_batches(), bootstrap: default_bootstrap(), refine: default_refine() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub model: ModelBlock,
    pub n_list: Vec<usize>,
    #[serde(rename = "N")]
    pub replicates: usize,
    pub seed: u64,
    pub tasks: Vec<Task>,
    /// Worker threads, 0 for one per core.
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub output: OutputPaths,
    /// Report failed assumption checks without the exit code 2.
    #[serde(default)]
    pub warn_only: bool,
    #[serde(default)]
    pub centering: CenteringBlock,
    #[serde(default)]
    pub edgeworth: Option<EdgeworthTask>,
    #[serde(default)]
    pub wasserstein: Option<WassersteinTask>,
    #[serde(default)]
    pub dependence: Option<DependenceTask>,
    #[serde(default)]
    pub assumptions: Option<AssumptionsTask>,
    #[serde(rename = "cf-scan", default)]
    pub cf_scan: Option<CfScanTask>,
    #[serde(rename = "be-characteristic", default)]
    pub be_characteristic: Option<BeTask>,
    #[serde(default)]
    pub price: Option<PriceTask>,
    #[serde(default)]
    pub convergence: Option<ConvergenceTask>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Parse {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::from_json(&text)
    }

    pub fn wants(&self, task: Task) -> bool {
        self.tasks.contains(&task)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid("schema_version", format!("expected {SCHEMA_VERSION}, got {}", self.schema_version)));
        }
        if self.n_list.is_empty() || self.n_list.contains(&0) {
            return Err(invalid("n_list", "needs at least one positive horizon"));
        }
        if self.n_list.iter().any(|&n| n > u32::MAX as usize) {
            return Err(invalid("n_list", "horizons must fit in 32 bits"));
        }
        if self.replicates < 100 {
            return Err(invalid("N", format!("need at least 100 replicates, got {}", self.replicates)));
        }
        if self.replicates > u32::MAX as usize {
            return Err(invalid("N", "replicate count must fit in 32 bits"));
        }
        if self.tasks.is_empty() {
            return Err(invalid("tasks", "no task requested"));
        }
        for (i, &n) in self.n_list.iter().enumerate() {
            self.model.at(n).validate().map_err(|e| invalid(&format!("model (n_list[{i}] = {n})"), e.to_string()))?;
        }
        if self.wants(Task::Dependence) {
            let d = self.dependence.as_ref().ok_or_else(|| ConfigError::Missing("dependence.lags".into()))?;
            let lags = d.lags.as_ref().ok_or_else(|| ConfigError::Missing("dependence.lags".into()))?;
            if lags.is_empty() {
                return Err(invalid("dependence.lags", "must be non-empty"));
            }
            if !(d.p >= 1.0 && d.p.is_finite()) {
                return Err(invalid("dependence.p", "must be >= 1"));
            }
        }
        if self.wants(Task::CfScan) {
            let c = self.cf_scan.as_ref().ok_or_else(|| ConfigError::Missing("cf-scan.a".into()))?;
            let a = c.a.ok_or_else(|| ConfigError::Missing("cf-scan.a".into()))?;
            let b = c.b.ok_or_else(|| ConfigError::Missing("cf-scan.b".into()))?;
            if !(a > 0.0 && b > a) {
                return Err(invalid("cf-scan", "need 0 < a < b"));
            }
            if c.grid_size < 64 {
                return Err(invalid("cf-scan.grid_size", "must be at least 64"));
            }
        }
        if self.wants(Task::BeCharacteristic) {
            let c = self.be_characteristic.as_ref().ok_or_else(|| ConfigError::Missing("be-characteristic.a".into()))?;
            let a = c.a.ok_or_else(|| ConfigError::Missing("be-characteristic.a".into()))?;
            if !(a >= 0.0 && a.is_finite()) {
                return Err(invalid("be-characteristic.a", "must be finite and >= 0"));
            }
            if let Some(g) = &c.b_grid {
                if g.is_empty() || g.windows(2).any(|w| !(w[0] < w[1])) || g[0] < a {
                    return Err(invalid("be-characteristic.b_grid", "must be increasing and at least a"));
                }
            }
            if c.x_points < 2 || c.max_samples == 0 {
                return Err(invalid("be-characteristic", "x_points must be >= 2 and max_samples > 0"));
            }
        }
        if self.wants(Task::Price) {
            let p = self.price.as_ref().ok_or_else(|| ConfigError::Missing("price.K".into()))?;
            let strikes = p.strikes.as_ref().ok_or_else(|| ConfigError::Missing("price.K".into()))?.to_vec();
            if strikes.is_empty() || strikes.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
                return Err(invalid("price.K", "strikes must be positive"));
            }
            if self.replicates < 10_000 {
                return Err(invalid("N", "pricing needs at least 10000 replicates"));
            }
        }
        if self.wants(Task::Convergence) {
            let ok = self.n_list.len() >= 3 && self.n_list.windows(2).all(|w| w[1] == 2 * w[0]);
            if !ok {
                return Err(invalid("n_list", "convergence needs at least three doubling horizons"));
            }
            let c = self.convergence.clone().unwrap_or_default();
            if c.batches < 2 || self.replicates / c.batches < 100 {
                return Err(invalid("convergence.batches", "need at least 2 batches of 100 replicates"));
            }
        }
        if let Some(e) = &self.edgeworth {
            if e.batches < 2 {
                return Err(invalid("edgeworth.batches", "must be at least 2"));
            }
        }
        if let Some(w) = &self.wasserstein {
            if w.batches < 2 {
                return Err(invalid("wasserstein.batches", "must be at least 2"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "schema_version": 1,
        "model": {
            "family": {"type": "garch", "p": 1, "q": 1, "g_coeffs": [{"w": 1.0, "u": 0.0}], "c_coeffs": [{"b": 0.0, "a": 0.0}]},
            "innovation": {"kind": "two-point", "p": 0.6666666666666666, "x_lo": -1.0, "x_hi": 2.0}
        },
        "n_list": [4],
        "N": 1000,
        "seed": 7,
        "tasks": ["cumulants"]
    }"#;

    fn with(extra: &str) -> String {
        BASE.trim_end().trim_end_matches('}').to_string() + "," + extra + "}"
    }

    #[test]
    fn minimal_config_parses() {
        let cfg = ExperimentConfig::from_json(BASE).unwrap();
        assert_eq!(cfg.model.transform, TransformSpec::identity());
        assert_eq!(cfg.output, OutputPaths::default());
        assert!(cfg.wants(Task::Cumulants));
    }

    #[test]
    fn price_without_strike_names_the_field() {
        let text = BASE.replace(r#""tasks": ["cumulants"]"#, r#""tasks": ["price"]"#);
        let err = ExperimentConfig::from_json(&text).unwrap_err();
        assert!(err.to_string().contains("price.K"), "{err}");
        let text = with(r#""price": {"mode": "classical"}"#).replace(r#""tasks": ["cumulants"]"#, r#""tasks": ["price"]"#);
        let err = ExperimentConfig::from_json(&text).unwrap_err();
        assert!(err.to_string().contains("price.K"), "{err}");
    }

    #[test]
    fn parse_errors_carry_the_field_path() {
        let text = BASE.replace(r#""x_lo": -1.0"#, r#""x_lo": "low""#);
        let err = ExperimentConfig::from_json(&text).unwrap_err();
        assert!(err.to_string().contains("model.innovation"), "{err}");
        let err = ExperimentConfig::from_json(&with(r#""bogus": 1"#)).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }

    #[test]
    fn task_blocks_are_required() {
        let text = BASE.replace(r#""tasks": ["cumulants"]"#, r#""tasks": ["dependence"]"#);
        assert!(ExperimentConfig::from_json(&text).unwrap_err().to_string().contains("dependence.lags"));
        let text = BASE.replace(r#""tasks": ["cumulants"]"#, r#""tasks": ["cf-scan"]"#);
        assert!(ExperimentConfig::from_json(&text).unwrap_err().to_string().contains("cf-scan.a"));
        let text = BASE.replace(r#""tasks": ["cumulants"]"#, r#""tasks": ["convergence"]"#);
        assert!(ExperimentConfig::from_json(&text).unwrap_err().to_string().contains("n_list"));
    }

    #[test]
    fn strikes_accept_number_or_list() {
        let one: PriceTask = serde_json::from_str(r#"{"K": 1.0}"#).unwrap();
        assert_eq!(one.strikes.unwrap().to_vec(), vec![1.0]);
        let many: PriceTask = serde_json::from_str(r#"{"K": [0.9, 1.1]}"#).unwrap();
        assert_eq!(many.strikes.unwrap().to_vec(), vec![0.9, 1.1]);
    }
}
