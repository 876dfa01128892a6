//! Spectral estimator and the Davis–Kahan perturbation bound.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Result};
use crate::gpm::phase_project;
use crate::lina::{
    deflated_leading_eigenvalue, dense_eig_oracle, leading_eigpair_with, spectral_norm,
    ComplexVector, EigOptions, HermitianMatrix,
};
use crate::metrics::{align_phase, d2};
use crate::model::SignalVector;

/// Leading eigenvector of `C`, scaled to `‖x̃‖₂ = √n`.
///
/// With a reference signal the global phase is chosen so that
/// `z* x̃ = |z* x̃|`; otherwise the largest-modulus entry (first on ties) is
/// made real and positive.
pub fn eigenvector_estimator(
    c: &HermitianMatrix,
    signal: Option<&SignalVector>,
    eig: &EigOptions,
) -> Result<ComplexVector> {
    let x = leading_eigpair_with(c, eig)?.vector;
    canonical_phase(x, signal)
}

pub(crate) fn canonical_phase(x: ComplexVector, signal: Option<&SignalVector>) -> Result<ComplexVector> {
    match signal {
        Some(z) => {
            check_dim(x.len(), z.n())?;
            let a = align_phase(&x, z.vector())?;
            Ok(x.rotate(a.theta))
        }
        None => {
            let mut best = 0;
            for (k, v) in x.iter().enumerate() {
                if v.norm() > x[best].norm() {
                    best = k;
                }
            }
            let theta = -x[best].arg();
            Ok(x.rotate(theta))
        }
    }
}

/// `P x̃`: the eigenvector estimate projected to unit-modulus entries.
pub fn projected_estimator(x: &ComplexVector) -> ComplexVector {
    phase_project(x)
}

/// How the eigengap and `‖E‖₂` are computed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GapMethod {
    /// Full dense decomposition (test scale).
    Dense,
    /// Power iteration, with the second eigenvalue from a deflated run.
    Power(EigOptions),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DavisKahanReport {
    /// `d₂(ũ, u)`.
    pub lhs: f64,
    /// `√2 ‖E u‖₂ / (δ − ‖E‖₂)`; infinite when not applicable.
    pub rhs: f64,
    /// `δ > ‖E‖₂`.
    pub applicable: bool,
    pub gap: f64,
    pub e_norm: f64,
    pub eu_norm: f64,
}

impl DavisKahanReport {
    /// Bound holds, with `slack` absorbing solver error.
    pub fn holds(&self, slack: f64) -> bool {
        !self.applicable || self.lhs <= self.rhs + slack
    }
}

/// Evaluate both sides of the Davis–Kahan bound for `A` and `A + E`, with
/// leading eigenvectors `u`, `ũ` normalized to `√n` and
/// `δ = λ₁(A) − λ₂(A)`.
pub fn davis_kahan_check(
    a: &HermitianMatrix,
    e: &HermitianMatrix,
    method: GapMethod,
) -> Result<DavisKahanReport> {
    check_dim(a.n(), e.n())?;
    let n = a.n();
    let perturbed = a.add_scaled(e, 1.0)?;
    let eig = match method {
        GapMethod::Dense => EigOptions {
            tol: 1e-12,
            max_iter: 1_000_000,
            seed: 0,
        },
        GapMethod::Power(opts) => opts,
    };

    let (u, gap, e_norm) = match method {
        GapMethod::Dense => {
            let pairs = dense_eig_oracle(a)?;
            let (l1, top) = &pairs[n - 1];
            let l2 = if n > 1 { pairs[n - 2].0 } else { f64::NEG_INFINITY };
            let e_pairs = dense_eig_oracle(e)?;
            let e_norm = e_pairs[0].0.abs().max(e_pairs[n - 1].0.abs());
            (top.with_norm((n as f64).sqrt()), l1 - l2, e_norm)
        }
        GapMethod::Power(opts) => {
            let pair = leading_eigpair_with(a, &opts)?;
            let l2 = deflated_leading_eigenvalue(a, &pair.vector, opts.tol, opts.max_iter, opts.seed)?;
            let e_norm = spectral_norm(e, opts.tol)?;
            (pair.vector, pair.value - l2, e_norm)
        }
    };
    let u_tilde = match method {
        GapMethod::Dense => dense_eig_oracle(&perturbed)?[n - 1].1.with_norm((n as f64).sqrt()),
        GapMethod::Power(_) => leading_eigpair_with(&perturbed, &eig)?.vector,
    };

    let lhs = d2(&u_tilde, &u)?;
    let eu_norm = e.matvec(&u)?.norm();
    let applicable = gap > e_norm;
    let rhs = if applicable {
        SQRT_2 * eu_norm / (gap - e_norm)
    } else {
        f64::INFINITY
    };
    Ok(DavisKahanReport {
        lhs,
        rhs,
        applicable,
        gap,
        e_norm,
        eu_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lina::C64;
    use crate::model::{MeasurementModel, NoiseKind, NoiseMatrix};

    #[test]
    fn noiseless_estimator_is_signal() {
        let model = MeasurementModel::sample(20, 0.0, NoiseKind::Zero, 2).unwrap();
        let x = eigenvector_estimator(model.c(), Some(&model.signal), &EigOptions::for_dim(20)).unwrap();
        assert!(x.sub(model.signal.vector()).unwrap().norm() < 1e-8);
        assert!((x.norm() - 20f64.sqrt()).abs() < 1e-10);
        let p = projected_estimator(&x);
        assert!(d2(&p, model.signal.vector()).unwrap() < 1e-8);
    }

    #[test]
    fn canonical_phase_without_signal() {
        let model = MeasurementModel::sample(15, 1.0, NoiseKind::ComplexGaussian, 4).unwrap();
        let x = eigenvector_estimator(model.c(), None, &EigOptions::for_dim(15)).unwrap();
        let k = (0..15).max_by(|&a, &b| x[a].norm().total_cmp(&x[b].norm())).unwrap();
        assert!(x[k].im.abs() < 1e-12 && x[k].re > 0.0);
        assert!((x.norm() - 15f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn projection_of_feasible_is_identity() {
        let z = SignalVector::sample(9, 3).unwrap();
        assert!(projected_estimator(z.vector()).sub(z.vector()).unwrap().norm() < 1e-15);
    }

    #[test]
    fn eigenvector_error_is_order_sigma() {
        let n = 200;
        let sigma = 0.5;
        let mut ratios: Vec<f64> = (0..50)
            .map(|seed| {
                let model = MeasurementModel::sample(n, sigma, NoiseKind::ComplexGaussian, 1000 + seed).unwrap();
                let x = eigenvector_estimator(model.c(), Some(&model.signal), &EigOptions::for_dim(n)).unwrap();
                let err = x.sub(model.signal.vector()).unwrap().norm();
                let p_err = projected_estimator(&x).sub(model.signal.vector()).unwrap().norm();
                assert!(p_err <= 2.0 * err + 1e-9);
                err / sigma
            })
            .collect();
        ratios.sort_by(f64::total_cmp);
        assert!(ratios[25] <= 3.0, "median {}", ratios[25]);
    }

    #[test]
    fn zero_perturbation() {
        let model = MeasurementModel::sample(10, 0.3, NoiseKind::ComplexGaussian, 5).unwrap();
        let e = HermitianMatrix::zeros(10);
        let opts = EigOptions {
            max_iter: 100_000,
            ..EigOptions::for_dim(10)
        };
        for method in [GapMethod::Dense, GapMethod::Power(opts)] {
            let r = davis_kahan_check(model.c(), &e, method).unwrap();
            assert!(r.lhs < 1e-7, "{}", r.lhs);
            assert_eq!(r.rhs, 0.0);
            assert!(r.applicable);
        }
    }

    #[test]
    fn rank_one_plus_noise() {
        let n = 32;
        let z = SignalVector::sample(n, 6).unwrap();
        let a = HermitianMatrix::outer(z.vector());
        let w = NoiseMatrix::sample(n, NoiseKind::ComplexGaussian, 7).unwrap();
        let e = w.matrix().scale(2.0);
        let dense = davis_kahan_check(&a, &e, GapMethod::Dense).unwrap();
        let opts = EigOptions {
            max_iter: 100_000,
            ..EigOptions::for_dim(n)
        };
        let power = davis_kahan_check(&a, &e, GapMethod::Power(opts)).unwrap();
        assert!(dense.applicable && power.applicable);
        assert!((dense.gap - n as f64).abs() < 1e-9);
        assert!(dense.holds(1e-8) && power.holds(1e-8));
        assert!((dense.lhs - power.lhs).abs() < 1e-6);
        assert!((dense.rhs - power.rhs).abs() < 1e-4 * dense.rhs);
    }

    #[test]
    fn inapplicable_is_reported() {
        let a = HermitianMatrix::diagonal(&[1.0, 0.9, 0.0]);
        let e = HermitianMatrix::from_upper_fn(3, |k, l| if k == l { C64::new(0.0, 0.0) } else { C64::new(1.0, 0.0) }).unwrap();
        let r = davis_kahan_check(&a, &e, GapMethod::Dense).unwrap();
        assert!(!r.applicable);
        assert!(r.holds(0.0));
    }

    #[test]
    fn footnote_identity() {
        let n = 16;
        let model = MeasurementModel::sample(n, 1.0, NoiseKind::ComplexGaussian, 8).unwrap();
        let r = davis_kahan_check(
            &HermitianMatrix::outer(model.signal.vector()),
            &model.noise.matrix().scale(1.0),
            GapMethod::Dense,
        )
        .unwrap();
        // d₂(ũ, u)²/n = 2 − 2|ũ* u|/n for vectors of norm √n.
        let u = model.signal.vector();
        let ut = dense_eig_oracle(model.c()).unwrap()[n - 1].1.with_norm((n as f64).sqrt());
        let cos = ut.dot(u).unwrap().norm() / n as f64;
        assert!((r.lhs.powi(2) / n as f64 - (2.0 - 2.0 * cos)).abs() < 1e-10);
    }
}
