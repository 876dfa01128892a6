use std::path::Path;

use phasesync::model::NoiseKind;
use serde::{Deserialize, Serialize};

use crate::config::{Estimator, ExperimentConfig};
use crate::error::{HarnessError, Result};
use crate::records::SCHEMA_VERSION;
use crate::stats::{mean, median, quantile};
use crate::trial::TrialRecord;

/// Aggregates over the trials of one `(n, σ, estimator)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub n: usize,
    pub sigma_index: usize,
    pub sigma: f64,
    pub multiplier: f64,
    pub kind: NoiseKind,
    pub estimator: Estimator,
    pub trials: usize,
    pub failures: usize,
    pub l2_median: Option<f64>,
    pub l2_q10: Option<f64>,
    pub l2_q90: Option<f64>,
    pub linf_median: Option<f64>,
    pub linf_q10: Option<f64>,
    pub linf_q90: Option<f64>,
    /// Median of `l2_err / σ`.
    pub l2_over_sigma_median: Option<f64>,
    /// Median of `linf_err / (σ √(ln n / n))`.
    pub linf_ratio_median: Option<f64>,
    /// Fraction of certified records with `cert_rank_ok`.
    pub success_rate: Option<f64>,
    pub psd_rate: Option<f64>,
    pub converged_rate: f64,
    pub mean_iterations: f64,
    pub contraction_max_median: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub schema_version: u32,
    pub config: Option<ExperimentConfig>,
    pub cells: Vec<CellSummary>,
}

/// `σ √(ln n / n)`, the entrywise error scale.
pub fn linf_scale(n: usize, sigma: f64) -> f64 {
    let n = n as f64;
    sigma * (n.ln() / n).sqrt()
}

fn rate(flags: impl Iterator<Item = bool>) -> Option<f64> {
    let v: Vec<f64> = flags.map(|b| if b { 1.0 } else { 0.0 }).collect();
    mean(&v)
}

impl CellSummary {
    fn from_records(rs: &[&TrialRecord]) -> Self {
        let first = rs[0];
        let l2: Vec<f64> = rs.iter().filter_map(|r| r.l2_err).collect();
        let linf: Vec<f64> = rs.iter().filter_map(|r| r.linf_err).collect();
        let positive = first.sigma > 0.0;
        let l2_ratio: Vec<f64> = l2.iter().map(|e| e / first.sigma).collect();
        let scale = linf_scale(first.n, first.sigma);
        let linf_ratio: Vec<f64> = linf.iter().map(|e| e / scale).collect();
        let contraction: Vec<f64> = rs.iter().filter_map(|r| r.contraction_max).collect();
        let iterations: Vec<f64> = rs.iter().map(|r| r.iterations as f64).collect();
        Self {
            n: first.n,
            sigma_index: first.sigma_index,
            sigma: first.sigma,
            multiplier: first.multiplier,
            kind: first.kind,
            estimator: first.estimator,
            trials: rs.len(),
            failures: rs.iter().filter(|r| r.failure.is_some()).count(),
            l2_median: median(&l2),
            l2_q10: quantile(&l2, 0.1),
            l2_q90: quantile(&l2, 0.9),
            linf_median: median(&linf),
            linf_q10: quantile(&linf, 0.1),
            linf_q90: quantile(&linf, 0.9),
            l2_over_sigma_median: if positive { median(&l2_ratio) } else { None },
            linf_ratio_median: if positive { median(&linf_ratio) } else { None },
            success_rate: rate(rs.iter().filter_map(|r| r.cert_rank_ok)),
            psd_rate: rate(rs.iter().filter_map(|r| r.cert_psd)),
            converged_rate: rate(rs.iter().map(|r| r.converged)).unwrap_or(0.0),
            mean_iterations: mean(&iterations).unwrap_or(0.0),
            contraction_max_median: median(&contraction),
        }
    }
}

impl SweepSummary {
    /// Group records by `(n, sigma_index, estimator)` in order of first
    /// appearance.
    pub fn from_records(records: &[TrialRecord], config: Option<ExperimentConfig>) -> Self {
        let mut keys: Vec<(usize, usize, Estimator)> = Vec::new();
        let mut groups: Vec<Vec<&TrialRecord>> = Vec::new();
        for r in records {
            let key = (r.n, r.sigma_index, r.estimator);
            match keys.iter().position(|k| *k == key) {
                Some(i) => groups[i].push(r),
                None => {
                    keys.push(key);
                    groups.push(vec![r]);
                }
            }
        }
        Self {
            schema_version: SCHEMA_VERSION,
            config,
            cells: groups.iter().map(|g| CellSummary::from_records(g)).collect(),
        }
    }

    pub fn cells_for(&self, estimator: Estimator) -> impl Iterator<Item = &CellSummary> {
        self.cells.iter().filter(move |c| c.estimator == estimator)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| HarnessError::Validation(format!("summary not serializable: {e}")))?;
        std::fs::write(path, text + "\n").map_err(|e| HarnessError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| HarnessError::parse(path, e.line() as u64, e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(n: usize, idx: usize, est: Estimator, l2: f64, ok: Option<bool>) -> TrialRecord {
        TrialRecord {
            n,
            sigma_index: idx,
            sigma: 0.5,
            multiplier: 0.1,
            kind: NoiseKind::ComplexGaussian,
            trial: 0,
            seed: 0,
            estimator: est,
            l2_err: Some(l2),
            linf_err: Some(l2 / 2.0),
            iterations: 4,
            converged: true,
            cert_psd: ok,
            cert_rank_ok: ok,
            lambda2: None,
            kernel_residual: None,
            contraction_max: None,
            region_n1_max: None,
            region_n2_max: None,
            aux_proximity_max: None,
            aux_proximity_growth: None,
            wallclock_ms: 0.0,
            failure: None,
        }
    }

    #[test]
    fn success_rate_is_mean_of_flags() {
        let rs = vec![
            rec(10, 0, Estimator::Gpm, 1.0, Some(true)),
            rec(10, 0, Estimator::Eig, 2.0, None),
            rec(10, 0, Estimator::Gpm, 3.0, Some(false)),
            rec(10, 0, Estimator::Gpm, 2.0, Some(true)),
            rec(20, 0, Estimator::Gpm, 2.0, Some(true)),
        ];
        let s = SweepSummary::from_records(&rs, None);
        assert_eq!(s.cells.len(), 3);
        let c = &s.cells[0];
        assert_eq!(c.trials, 3);
        assert!((c.success_rate.unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(c.l2_median, Some(2.0));
        assert_eq!(c.l2_over_sigma_median, Some(4.0));
        assert_eq!(s.cells[1].success_rate, None);
        for c in &s.cells {
            if let Some(r) = c.success_rate {
                assert!((0.0..=1.0).contains(&r));
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let rs = vec![rec(10, 0, Estimator::Gpm, 0.1 + 0.2, Some(true))];
        let s = SweepSummary::from_records(&rs, None);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("summary.json");
        s.write(&path).unwrap();
        assert_eq!(SweepSummary::read(&path).unwrap(), s);
    }
}
