use std::time::Instant;

use phasesync::certificate::{verify_optimality, CertificateTolerances};
use phasesync::gpm::{phase_project, run_auxiliary, run_gpm, GpmConfig, GpmTrace};
use phasesync::lina::{leading_eigpair_with, spectral_norm, ComplexVector, EigOptions, EigPair};
use phasesync::metrics::{aligned_linf, d2};
use phasesync::model::{MeasurementModel, NoiseKind};
use phasesync::rng::hash_seeds;
use serde::{Deserialize, Serialize};

use crate::config::Estimator;

/// Contraction ratios with a smaller denominator are ignored in
/// `contraction_max`: they measure rounding, not the iteration.
pub const CONTRACTION_FLOOR: f64 = 1e-8;

/// Relative residual for the `‖C‖₂` estimate behind the PSD tolerance.
const NORM_TOL: f64 = 1e-3;

/// Eigensolver settings for the initial eigenvector: default tolerance,
/// with room for the small eigengaps met at large σ.
pub fn trial_eig_options(n: usize, seed: u64) -> EigOptions {
    EigOptions {
        max_iter: 100 * n + 10_000,
        ..EigOptions::for_dim(n)
    }
    .with_seed(seed)
}

/// One `(n, σ)` grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub n: usize,
    pub sigma_index: usize,
    pub sigma: f64,
    /// `σ / √(n / ln n)`.
    pub multiplier: f64,
    pub kind: NoiseKind,
}

/// Per-trial switches shared by every cell of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSettings {
    pub estimators: Vec<Estimator>,
    pub aux_m_count: usize,
    pub certify: bool,
    pub timing: bool,
}

/// `hash(base_seed, n, sigma_index, trial)` via [`hash_seeds`].
pub fn trial_seed(base_seed: u64, n: usize, sigma_index: usize, trial: usize) -> u64 {
    hash_seeds(&[base_seed, n as u64, sigma_index as u64, trial as u64])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub n: usize,
    pub sigma_index: usize,
    pub sigma: f64,
    pub multiplier: f64,
    pub kind: NoiseKind,
    pub trial: usize,
    pub seed: u64,
    pub estimator: Estimator,
    /// `d₂(x̂, z)`.
    pub l2_err: Option<f64>,
    /// `‖x̂ e^{iθ} − z‖∞` at the `d₂`-optimal rotation.
    pub linf_err: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub cert_psd: Option<bool>,
    pub cert_rank_ok: Option<bool>,
    pub lambda2: Option<f64>,
    pub kernel_residual: Option<f64>,
    /// Largest contraction ratio whose denominator exceeds [`CONTRACTION_FLOOR`].
    pub contraction_max: Option<f64>,
    pub region_n1_max: Option<f64>,
    pub region_n2_max: Option<f64>,
    /// `max_{m,t} d₂(x^t, x^{t,m})`.
    pub aux_proximity_max: Option<f64>,
    /// `max_m` of the final proximity over the proximity at `t = 3`.
    pub aux_proximity_growth: Option<f64>,
    pub wallclock_ms: f64,
    pub failure: Option<String>,
}

impl TrialRecord {
    fn empty(cell: &Cell, trial: usize, seed: u64, estimator: Estimator) -> Self {
        Self {
            n: cell.n,
            sigma_index: cell.sigma_index,
            sigma: cell.sigma,
            multiplier: cell.multiplier,
            kind: cell.kind,
            trial,
            seed,
            estimator,
            l2_err: None,
            linf_err: None,
            iterations: 0,
            converged: false,
            cert_psd: None,
            cert_rank_ok: None,
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

    fn fail(&mut self, what: &str, err: impl std::fmt::Display) {
        self.failure = Some(format!("{what}: {err}"));
    }
}

/// Run one estimator on one seeded instance.
pub fn run_trial(cell: &Cell, estimator: Estimator, settings: &TrialSettings, trial: usize, seed: u64) -> TrialRecord {
    let settings = TrialSettings {
        estimators: vec![estimator],
        ..settings.clone()
    };
    run_trial_set(cell, &settings, trial, seed).remove(0)
}

/// Run every estimator in `settings` on one seeded instance, sharing the
/// instance and its leading eigenpair. Records follow `settings.estimators`.
///
/// Failures are written into the records; this never panics on solver
/// errors.
pub fn run_trial_set(cell: &Cell, settings: &TrialSettings, trial: usize, seed: u64) -> Vec<TrialRecord> {
    let clock = Instant::now();
    let mut records: Vec<TrialRecord> = settings
        .estimators
        .iter()
        .map(|&e| TrialRecord::empty(cell, trial, seed, e))
        .collect();
    let certify_gpm = |r: &mut TrialRecord| {
        if settings.certify && r.estimator == Estimator::Gpm {
            r.cert_psd = Some(false);
            r.cert_rank_ok = Some(false);
        }
    };

    let model = match MeasurementModel::sample(cell.n, cell.sigma, cell.kind, seed) {
        Ok(m) => m,
        Err(e) => {
            for r in &mut records {
                r.fail("model", &e);
                certify_gpm(r);
            }
            return records;
        }
    };
    let eig = trial_eig_options(cell.n, seed);
    let pair = leading_eigpair_with(model.c(), &eig);
    let shared_ms = clock.elapsed().as_secs_f64() * 1e3;

    for r in &mut records {
        let start = Instant::now();
        match &pair {
            Err(e) => {
                r.fail("eigenvector", e);
                certify_gpm(r);
            }
            Ok(pair) => match r.estimator {
                Estimator::Gpm => gpm_record(r, &model, pair, &eig, settings),
                Estimator::Eig => spectral_record(r, &model, pair, pair.vector.clone()),
                Estimator::ProjectedEig => spectral_record(r, &model, pair, phase_project(&pair.vector)),
            },
        }
        if settings.timing {
            r.wallclock_ms = shared_ms + start.elapsed().as_secs_f64() * 1e3;
        }
    }
    records
}

fn errors(r: &mut TrialRecord, model: &MeasurementModel, x: &ComplexVector) {
    let z = model.signal.vector();
    match (d2(x, z), aligned_linf(x, z)) {
        (Ok(l2), Ok(linf)) => {
            r.l2_err = Some(l2);
            r.linf_err = Some(linf);
        }
        (Err(e), _) | (_, Err(e)) => r.fail("metrics", e),
    }
}

fn spectral_record(r: &mut TrialRecord, model: &MeasurementModel, pair: &EigPair, x: ComplexVector) {
    r.iterations = pair.iterations;
    r.converged = true;
    errors(r, model, &x);
}

fn gpm_record(r: &mut TrialRecord, model: &MeasurementModel, pair: &EigPair, eig: &EigOptions, settings: &TrialSettings) {
    let n = model.n();
    let mut cfg = GpmConfig::for_dim(n);
    cfg.capture_trace = settings.aux_m_count > 0;
    let trace = match run_gpm(model.c(), &pair.vector, &cfg, Some(&model.signal), Some(&model.noise)) {
        Ok(t) => t,
        Err(e) => {
            r.fail("gpm", e);
            if settings.certify {
                r.cert_psd = Some(false);
                r.cert_rank_ok = Some(false);
            }
            return;
        }
    };
    r.iterations = trace.iterations();
    r.converged = trace.converged;
    r.contraction_max = trace.max_ratio_above(CONTRACTION_FLOOR);
    r.region_n1_max = trace.region_n1.iter().copied().reduce(f64::max);
    r.region_n2_max = trace.region_n2.iter().copied().reduce(f64::max);
    errors(r, model, &trace.estimate);

    if settings.certify {
        certify(r, model, &trace.estimate);
    }
    if settings.aux_m_count > 0 {
        auxiliary(r, model, &trace, &cfg, eig, settings.aux_m_count);
    }
}

fn certify(r: &mut TrialRecord, model: &MeasurementModel, x: &ComplexVector) {
    r.cert_psd = Some(false);
    r.cert_rank_ok = Some(false);
    let report = spectral_norm(model.c(), NORM_TOL)
        .map(|norm| CertificateTolerances::for_norm(norm, model.n()))
        .and_then(|tol| verify_optimality(model.c(), x, &tol));
    match report {
        Ok(rep) => {
            r.cert_psd = Some(rep.psd);
            r.cert_rank_ok = Some(rep.rank_deficiency_ok);
            r.lambda2 = Some(rep.lambda2);
            r.kernel_residual = Some(rep.kernel_residual);
        }
        Err(e) => r.fail("certificate", e),
    }
}

/// Evenly spaced leave-one-out indices.
pub fn aux_indices(n: usize, count: usize) -> Vec<usize> {
    (0..count).map(|j| j * n / count).collect()
}

fn auxiliary(r: &mut TrialRecord, model: &MeasurementModel, primary: &GpmTrace, cfg: &GpmConfig, eig: &EigOptions, count: usize) {
    let mut max_prox = 0.0f64;
    let mut growth: Option<f64> = None;
    for m in aux_indices(model.n(), count) {
        match run_auxiliary(model, m, cfg, eig, Some(primary)) {
            Ok(bundle) => {
                max_prox = max_prox.max(bundle.max_proximity());
                if let (Some(&early), Some(&last)) = (bundle.proximity.get(3), bundle.proximity.last()) {
                    let g = if early > 0.0 {
                        last / early
                    } else if last > 0.0 {
                        f64::INFINITY
                    } else {
                        1.0
                    };
                    growth = Some(growth.map_or(g, |v| v.max(g)));
                }
            }
            Err(e) => {
                r.fail(&format!("auxiliary m={m}"), e);
                return;
            }
        }
    }
    r.aux_proximity_max = Some(max_prox);
    r.aux_proximity_growth = growth;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings(estimators: Vec<Estimator>) -> TrialSettings {
        TrialSettings {
            estimators,
            aux_m_count: 0,
            certify: true,
            timing: false,
        }
    }

    fn cell(n: usize, sigma: f64) -> Cell {
        Cell {
            n,
            sigma_index: 0,
            sigma,
            multiplier: sigma / crate::config::regime_scale(n),
            kind: NoiseKind::ComplexGaussian,
        }
    }

    #[test]
    fn noiseless_trial_is_exact_and_certified() {
        let r = run_trial(&cell(20, 0.0), Estimator::Gpm, &settings(vec![]), 0, 5);
        assert!(r.failure.is_none());
        assert!(r.l2_err.unwrap() <= 1e-8);
        assert_eq!(r.cert_rank_ok, Some(true));
        assert_eq!(r.cert_psd, Some(true));
    }

    #[test]
    fn same_seed_same_record() {
        let s = settings(vec![Estimator::Gpm, Estimator::Eig, Estimator::ProjectedEig]);
        let a = run_trial_set(&cell(30, 1.0), &s, 3, 77);
        let b = run_trial_set(&cell(30, 1.0), &s, 3, 77);
        assert_eq!(a, b);
        assert_eq!(a.len(), 3);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.l2_err.unwrap().to_bits(), y.l2_err.unwrap().to_bits());
        }
    }

    #[test]
    fn set_matches_single_runs() {
        let s = settings(vec![Estimator::Gpm, Estimator::ProjectedEig]);
        let set = run_trial_set(&cell(25, 0.8), &s, 1, 9);
        let single = run_trial(&cell(25, 0.8), Estimator::ProjectedEig, &s, 1, 9);
        assert_eq!(set[1], single);
        assert!(set[1].cert_psd.is_none());
    }

    #[test]
    fn auxiliary_fields_filled() {
        let mut s = settings(vec![Estimator::Gpm]);
        s.aux_m_count = 3;
        s.certify = false;
        let r = run_trial_set(&cell(40, 0.5), &s, 0, 2).remove(0);
        assert!(r.aux_proximity_max.unwrap() < 0.5);
        assert!(r.cert_psd.is_none());
        assert_eq!(aux_indices(40, 3), vec![0, 13, 26]);
    }

    #[test]
    fn trial_seed_depends_on_every_coordinate() {
        let s = trial_seed(1, 100, 2, 3);
        assert_ne!(s, trial_seed(2, 100, 2, 3));
        assert_ne!(s, trial_seed(1, 101, 2, 3));
        assert_ne!(s, trial_seed(1, 100, 3, 3));
        assert_ne!(s, trial_seed(1, 100, 2, 4));
        assert_eq!(s, trial_seed(1, 100, 2, 3));
    }
}
