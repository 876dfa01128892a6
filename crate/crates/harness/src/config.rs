use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use phasesync::model::NoiseKind;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// Which estimate a record describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    Gpm,
    Eig,
    ProjectedEig,
}

impl Estimator {
    pub const ALL: [Estimator; 3] = [Estimator::Gpm, Estimator::Eig, Estimator::ProjectedEig];

    pub fn as_str(&self) -> &'static str {
        match self {
            Estimator::Gpm => "gpm",
            Estimator::Eig => "eig",
            Estimator::ProjectedEig => "projected-eig",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Estimator {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Estimator::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| HarnessError::Validation(format!("unknown estimator `{s}`")))
    }
}

/// Noise levels, either absolute or as multiples of `√(n / ln n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaSpec {
    Absolute(Vec<f64>),
    Relative(Vec<f64>),
}

impl SigmaSpec {
    pub fn len(&self) -> usize {
        self.values().len()
    }

    pub fn is_empty(&self) -> bool {
        self.values().is_empty()
    }

    fn values(&self) -> &[f64] {
        match self {
            SigmaSpec::Absolute(v) | SigmaSpec::Relative(v) => v,
        }
    }

    /// `(σ, σ / √(n / ln n))` for entry `idx` at size `n`.
    pub fn resolve(&self, n: usize, idx: usize) -> (f64, f64) {
        let scale = regime_scale(n);
        match self {
            SigmaSpec::Absolute(v) => (v[idx], v[idx] / scale),
            SigmaSpec::Relative(v) => (v[idx] * scale, v[idx]),
        }
    }
}

/// `√(n / ln n)`, the natural noise scale.
pub fn regime_scale(n: usize) -> f64 {
    let n = n as f64;
    (n / n.ln()).sqrt()
}

fn default_estimators() -> Vec<Estimator> {
    vec![Estimator::Gpm]
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_values: Vec<usize>,
    pub sigma_spec: SigmaSpec,
    #[serde(default = "default_kind")]
    pub noise_kind: NoiseKind,
    pub trials_per_cell: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_estimators")]
    pub estimator_set: Vec<Estimator>,
    /// Leave-one-out sequences per GPM trial; 0 disables them.
    #[serde(default)]
    pub aux_m_count: usize,
    pub output_dir: PathBuf,
    /// Run the optimality certificate on GPM estimates.
    #[serde(default = "default_true")]
    pub certify: bool,
    /// Record wall-clock time per trial. Off keeps records reproducible.
    #[serde(default)]
    pub timing: bool,
    /// Worker threads; 0 uses all cores.
    #[serde(default)]
    pub workers: usize,
}

fn default_kind() -> NoiseKind {
    NoiseKind::ComplexGaussian
}

impl ExperimentConfig {
    /// Load from `.toml` or `.json`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let cfg: Self = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => serde_json::from_str(&text).map_err(|e| {
                HarnessError::parse(path, e.line() as u64, e.to_string())
            })?,
            _ => toml::from_str(&text).map_err(|e| {
                let line = e
                    .span()
                    .map(|s| text[..s.start].lines().count().max(1) as u64)
                    .unwrap_or(0);
                HarnessError::parse(path, line, e.message().to_string())
            })?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(HarnessError::Validation(m));
        if self.n_values.is_empty() {
            return fail("n_values is empty".into());
        }
        if let Some(n) = self.n_values.iter().find(|&&n| n < 2) {
            return fail(format!("n = {n} is too small; need n >= 2"));
        }
        if self.sigma_spec.is_empty() {
            return fail("sigma_spec is empty".into());
        }
        if let Some(s) = self.sigma_spec.values().iter().find(|s| !s.is_finite() || **s < 0.0) {
            return fail(format!("sigma value {s} must be finite and >= 0"));
        }
        if self.trials_per_cell == 0 {
            return fail("trials_per_cell must be at least 1".into());
        }
        if self.estimator_set.is_empty() {
            return fail("estimator_set is empty".into());
        }
        if let Some(n) = self.n_values.iter().find(|&&n| self.aux_m_count > n) {
            return fail(format!("aux_m_count {} exceeds n = {n}", self.aux_m_count));
        }
        Ok(())
    }

    /// Estimators in canonical order without duplicates.
    pub fn estimators(&self) -> Vec<Estimator> {
        let mut e = self.estimator_set.clone();
        e.sort();
        e.dedup();
        e
    }
}
