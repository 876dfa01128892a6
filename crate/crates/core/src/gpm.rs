//! Generalized power method `x^{t+1} = P(C x^t)`.
//!
//! `P` maps every entry to the unit circle (`a/|a|`, or 1 for `a = 0`), so
//! from `t = 1` on every iterate is feasible for
//! `max x* C x  s.t. |x_k| = 1`. The loop stops once consecutive iterates
//! are within `tol` in the quotient distance `d₂`.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::lina::{leading_eigpair_with, ComplexVector, EigOptions, HermitianMatrix, C64};
use crate::metrics::d2;
use crate::model::{MeasurementModel, NoiseMatrix, SignalVector};

/// Denominator below which a contraction ratio is not recorded.
pub const RATIO_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpmConfig {
    /// Stop once `d₂(x^{t+1}, x^t) ≤ tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// Keep every iterate in the trace.
    pub capture_trace: bool,
    /// `(κ₂, κ₃)` thresholds for the contraction-region membership flags.
    pub region_kappas: (f64, f64),
}

impl GpmConfig {
    /// `tol = 1e-10·√n`, `max_iter = min(3n², 10⁵)`.
    pub fn for_dim(n: usize) -> Self {
        Self {
            tol: 1e-10 * (n as f64).sqrt(),
            max_iter: (3 * n * n).clamp(1, 100_000),
            capture_trace: true,
            region_kappas: (3.0, 0.5),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidInput(format!("gpm tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidInput("gpm max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// Iterate history of one GPM run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GpmTrace {
    /// `x⁰, x¹, …`; empty unless `capture_trace` was set.
    pub iterates: Vec<ComplexVector>,
    /// Final iterate.
    pub estimate: ComplexVector,
    /// `step_d2[t] = d₂(x^{t+1}, x^t)`.
    pub step_d2: Vec<f64>,
    /// `step_d2[t] / step_d2[t−1]`, absent for `t = 0` or when the
    /// denominator is at most [`RATIO_FLOOR`].
    pub contraction_ratios: Vec<Option<f64>>,
    /// `‖W x^t‖∞ / √(n log n)` per iterate (when `W` is known).
    pub region_n1: Vec<f64>,
    /// `d₂(x^t, z) / √n` per iterate (when `z` is known).
    pub region_n2: Vec<f64>,
    /// `region_n1 ≤ κ₂ && region_n2 ≤ κ₃` per iterate.
    pub region_member: Vec<bool>,
    pub converged: bool,
    /// `‖C x̂ − diag(|C x̂|) x̂‖₂ / n` at the final iterate.
    pub fixed_point_residual: f64,
    /// Number of exactly-zero entries of `C x^t` met along the way.
    pub zero_entries: usize,
}

impl GpmTrace {
    pub fn iterations(&self) -> usize {
        self.step_d2.len()
    }

    /// Ratios whose denominator exceeds `floor`.
    pub fn ratios_above(&self, floor: f64) -> impl Iterator<Item = f64> + '_ {
        (1..self.step_d2.len())
            .filter(move |&t| self.step_d2[t - 1] > floor)
            .map(move |t| self.step_d2[t] / self.step_d2[t - 1])
    }

    pub fn max_ratio_above(&self, floor: f64) -> Option<f64> {
        self.ratios_above(floor).reduce(f64::max)
    }
}

/// Entrywise projection onto the unit circle.
pub fn phase_project(v: &ComplexVector) -> ComplexVector {
    let (out, _) = project_counting(v);
    out
}

fn project_counting(v: &[C64]) -> (ComplexVector, usize) {
    let mut zeros = 0;
    let out = v
        .iter()
        .map(|&a| {
            let r = a.norm();
            if r > 0.0 {
                a / r
            } else {
                zeros += 1;
                C64::new(1.0, 0.0)
            }
        })
        .collect();
    (ComplexVector::from_vec_unchecked(out), zeros)
}

/// One step `P(C x)`.
pub fn gpm_step(c: &HermitianMatrix, x: &ComplexVector) -> Result<ComplexVector> {
    Ok(phase_project(&c.matvec(x)?))
}

/// `‖C x − diag(|C x|) x‖₂ / n`; zero exactly at fixed points of the GPM map.
pub fn fixed_point_residual(c: &HermitianMatrix, x: &ComplexVector) -> Result<f64> {
    let cx = c.matvec(x)?;
    let r: f64 = cx
        .iter()
        .zip(x.iter())
        .map(|(y, xk)| (y - xk * y.norm()).norm_sqr())
        .sum();
    Ok(r.sqrt() / x.len() as f64)
}

/// Run the generalized power method from `init`.
///
/// `init` must either have norm `√n` (eigenvector start) or unit-modulus
/// entries, each within `1e-8`. When `signal` and `noise` are given, the
/// contraction-region diagnostics are recorded for every iterate.
pub fn run_gpm(
    c: &HermitianMatrix,
    init: &ComplexVector,
    cfg: &GpmConfig,
    signal: Option<&SignalVector>,
    noise: Option<&NoiseMatrix>,
) -> Result<GpmTrace> {
    cfg.validate()?;
    let n = c.n();
    check_dim(n, init.len())?;
    if let Some(z) = signal {
        check_dim(n, z.n())?;
    }
    if let Some(w) = noise {
        check_dim(n, w.n())?;
    }
    let sqrt_n = (n as f64).sqrt();
    let sphere_ok = (init.norm() - sqrt_n).abs() <= 1e-8 * sqrt_n;
    if !sphere_ok && !init.is_unit_modulus(1e-8) {
        return Err(Error::InvalidInput(
            "initial point must have norm √n or unit-modulus entries".into(),
        ));
    }

    let n1_scale = ((n as f64) * (n as f64).ln()).sqrt();
    let (kappa2, kappa3) = cfg.region_kappas;
    let mut trace = GpmTrace {
        iterates: Vec::new(),
        estimate: init.clone(),
        step_d2: Vec::new(),
        contraction_ratios: Vec::new(),
        region_n1: Vec::new(),
        region_n2: Vec::new(),
        region_member: Vec::new(),
        converged: false,
        fixed_point_residual: f64::NAN,
        zero_entries: 0,
    };
    let record_region = |trace: &mut GpmTrace, x: &ComplexVector| -> Result<()> {
        let n1 = match noise {
            Some(w) => Some(w.matrix().matvec(x)?.norm_inf() / n1_scale),
            None => None,
        };
        let n2 = match signal {
            Some(z) => Some(d2(x, z.vector())? / sqrt_n),
            None => None,
        };
        if let Some(v) = n1 {
            trace.region_n1.push(v);
        }
        if let Some(v) = n2 {
            trace.region_n2.push(v);
        }
        if let (Some(a), Some(b)) = (n1, n2) {
            trace.region_member.push(a <= kappa2 && b <= kappa3);
        }
        Ok(())
    };

    let mut x = init.clone();
    if cfg.capture_trace {
        trace.iterates.push(x.clone());
    }
    record_region(&mut trace, &x)?;

    for _ in 0..cfg.max_iter {
        let cx = c.matvec(&x)?;
        let (next, zeros) = project_counting(&cx);
        trace.zero_entries += zeros;
        let step = d2(&next, &x)?;
        let ratio = trace
            .step_d2
            .last()
            .filter(|&&prev| prev > RATIO_FLOOR)
            .map(|prev| step / prev);
        trace.contraction_ratios.push(ratio);
        trace.step_d2.push(step);
        x = next;
        if cfg.capture_trace {
            trace.iterates.push(x.clone());
        }
        record_region(&mut trace, &x)?;
        if step <= cfg.tol {
            trace.converged = true;
            break;
        }
    }
    trace.fixed_point_residual = fixed_point_residual(c, &x)?;
    trace.estimate = x;
    Ok(trace)
}

/// A leave-one-out sequence `x^{t,m}` and its distance to the primary run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuxiliaryBundle {
    pub m: usize,
    pub trace: GpmTrace,
    /// `proximity[t] = d₂(x^t, x^{t,m})`, over the shorter of the two traces.
    pub proximity: Vec<f64>,
}

impl AuxiliaryBundle {
    pub fn max_proximity(&self) -> f64 {
        self.proximity.iter().copied().fold(0.0, f64::max)
    }
}

/// GPM started from the leading eigenvector of `C` (scaled to `√n`).
pub fn run_from_eigenvector(
    model: &MeasurementModel,
    cfg: &GpmConfig,
    eig: &EigOptions,
) -> Result<GpmTrace> {
    let pair = leading_eigpair_with(model.c(), eig)?;
    run_gpm(model.c(), &pair.vector, cfg, Some(&model.signal), Some(&model.noise))
}

/// Run GPM on `C^(m)` from its own leading eigenvector and compare with the
/// primary trace (recomputed from `C` when not supplied).
pub fn run_auxiliary(
    model: &MeasurementModel,
    m: usize,
    cfg: &GpmConfig,
    eig: &EigOptions,
    primary: Option<&GpmTrace>,
) -> Result<AuxiliaryBundle> {
    let mut cfg = *cfg;
    cfg.capture_trace = true;
    let loo = model.leave_one_out(m)?;
    let trace = run_from_eigenvector(&loo, &cfg, eig)?;
    let owned;
    let primary = match primary {
        Some(p) if !p.iterates.is_empty() => p,
        Some(_) => {
            return Err(Error::InvalidInput(
                "primary trace must be captured with capture_trace".into(),
            ))
        }
        None => {
            owned = run_from_eigenvector(model, &cfg, eig)?;
            &owned
        }
    };
    let proximity = primary
        .iterates
        .iter()
        .zip(&trace.iterates)
        .map(|(a, b)| d2(a, b))
        .collect::<Result<Vec<_>>>()?;
    Ok(AuxiliaryBundle {
        m,
        trace,
        proximity,
    })
}
