//! Dual certificate `S = Re{ddiag(C x x*)} − C` for the unit-modulus
//! quadratic program and its semidefinite relaxation.
//!
//! `S x = 0` holds whenever `x` is a fixed point of the GPM map. If in
//! addition `S ⪰ 0` with rank `n − 1`, then `x x*` is the unique solution
//! of the relaxation and `x` the unique maximizer of `x* C x` over
//! unit-modulus vectors, up to global phase. The rank condition is checked
//! as "smallest eigenvalue on the complement of `x` is positive".

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::lina::{second_smallest_eigenvalue, smallest_eigenvalue, ComplexVector, HermitianMatrix};

/// Unit-modulus tolerance for candidates.
pub const FEASIBILITY_TOL: f64 = 1e-8;

/// `S_kk = Re((Cx)_k conj(x_k)) − C_kk`, `S_kl = −C_kl` for `k ≠ l`.
pub fn build_certificate(c: &HermitianMatrix, x: &ComplexVector) -> Result<HermitianMatrix> {
    check_dim(c.n(), x.len())?;
    if !x.is_unit_modulus(FEASIBILITY_TOL) {
        return Err(Error::InvalidInput(format!(
            "candidate entries must have unit modulus (max deviation {:e})",
            x.max_modulus_deviation()
        )));
    }
    let cx = c.matvec(x)?;
    HermitianMatrix::from_upper_fn(c.n(), |k, l| {
        if k == l {
            let d = (cx[k] * x[k].conj()).re - c.get(k, k).re;
            d.into()
        } else {
            -c.get(k, l)
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificateTolerances {
    /// `S` counts as PSD when its relevant smallest eigenvalue is `≥ −psd_tol`.
    pub psd_tol: f64,
    /// `‖S x‖₂ / √n` at most this puts `x` in the numerical kernel.
    pub kernel_tol: f64,
    /// Eigenvalue accuracy, relative to the Gershgorin bound of `S`.
    pub eig_tol: f64,
    pub max_iter: usize,
}

impl CertificateTolerances {
    /// `psd_tol = 1e-8·‖C‖₂`, `kernel_tol = 1e-7·√n`.
    pub fn for_norm(c_norm: f64, n: usize) -> Self {
        Self {
            psd_tol: 1e-8 * c_norm,
            kernel_tol: 1e-7 * (n as f64).sqrt(),
            eig_tol: 1e-5,
            max_iter: 100 * n + 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    /// `‖S x‖₂ / √n`.
    pub kernel_residual: f64,
    /// Smallest eigenvalue of `S` on the complement of `x` when `x` is in
    /// the numerical kernel; otherwise the smallest eigenvalue of `S`,
    /// which is then negative because `x* S x = 0` and `S x ≠ 0`.
    pub lambda2: f64,
    pub psd: bool,
    pub rank_deficiency_ok: bool,
    /// `μ_k = |(C x)_k|`.
    pub mu: Vec<f64>,
}

/// Decide whether `x` is certified as the unique global optimum.
pub fn verify_optimality(
    c: &HermitianMatrix,
    x: &ComplexVector,
    tol: &CertificateTolerances,
) -> Result<CertificateReport> {
    let s = build_certificate(c, x)?;
    let n = c.n();
    let mu = c.matvec(x)?.iter().map(|v| v.norm()).collect();
    let kernel_residual = s.matvec(x)?.norm() / (n as f64).sqrt();
    let in_kernel = kernel_residual <= tol.kernel_tol;
    let lambda2 = if in_kernel {
        second_smallest_eigenvalue(&s, x, tol.eig_tol, tol.max_iter)?
    } else {
        smallest_eigenvalue(&s, tol.eig_tol, tol.max_iter)?
    };
    let psd = lambda2 >= -tol.psd_tol;
    Ok(CertificateReport {
        kernel_residual,
        lambda2,
        psd,
        rank_deficiency_ok: in_kernel && lambda2 > tol.psd_tol,
        mu,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gpm::{phase_project, run_from_eigenvector, GpmConfig};
    use crate::lina::{dense_eig_oracle, EigOptions, C64};
    use crate::model::{MeasurementModel, NoiseKind, SignalVector};
    use crate::rng::SplitMix64;
    use crate::testutil::{random_unit_modulus, random_vector};

    fn tight(n: usize) -> CertificateTolerances {
        let mut t = CertificateTolerances::for_norm(n as f64, n);
        t.eig_tol = 1e-12;
        t.max_iter = 1_000_000;
        t
    }

    #[test]
    fn noiseless_closed_form() {
        let n = 6;
        let z = SignalVector::sample(n, 1).unwrap();
        let c = HermitianMatrix::outer(z.vector());
        let s = build_certificate(&c, z.vector()).unwrap();
        for k in 0..n {
            assert!((s.get(k, k).re - (n as f64 - 1.0)).abs() < 1e-12);
            for l in 0..n {
                if k != l {
                    assert_eq!(s.get(k, l), -z.vector()[k] * z.vector()[l].conj());
                }
            }
        }
        let vals: Vec<f64> = dense_eig_oracle(&s).unwrap().iter().map(|p| p.0).collect();
        assert!(vals[0].abs() < 1e-12);
        for v in &vals[1..] {
            assert!((v - n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn two_by_two() {
        let z = ComplexVector::ones(2);
        let s = build_certificate(&HermitianMatrix::outer(&z), &z).unwrap();
        assert_eq!(s.get(0, 0), C64::new(1.0, 0.0));
        assert_eq!(s.get(0, 1), C64::new(-1.0, 0.0));
        assert_eq!(s.get(1, 1), C64::new(1.0, 0.0));
    }

    #[test]
    fn rejects_infeasible_candidate() {
        let c = HermitianMatrix::identity(3);
        let x = ComplexVector::ones(3).scale(C64::new(1.1, 0.0));
        assert!(matches!(build_certificate(&c, &x), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn noiseless_report() {
        let n = 16;
        let model = MeasurementModel::sample(n, 0.0, NoiseKind::Zero, 7).unwrap();
        let r = verify_optimality(model.c(), model.signal.vector(), &tight(n)).unwrap();
        assert!(r.kernel_residual <= 1e-10);
        assert!((r.lambda2 - n as f64).abs() <= 1e-8);
        assert!(r.psd && r.rank_deficiency_ok);
        assert!(r.mu.iter().all(|&m| (m - n as f64).abs() < 1e-12));
    }

    #[test]
    fn far_candidate_is_rejected() {
        let n = 12;
        let model = MeasurementModel::sample(n, 0.0, NoiseKind::Zero, 8).unwrap();
        let mut rng = SplitMix64::new(3);
        for _ in 0..10 {
            let v = random_vector(n, &mut rng);
            let x = phase_project(&model.signal.vector().add(&v.scale(C64::new(2.0, 0.0))).unwrap());
            let s = build_certificate(model.c(), &x).unwrap();
            let min_eig = dense_eig_oracle(&s).unwrap()[0].0;
            assert!(min_eig < 0.0);
            let r = verify_optimality(model.c(), &x, &tight(n)).unwrap();
            assert!(!r.psd && !r.rank_deficiency_ok);
        }
    }

    #[test]
    fn lambda2_matches_oracle_on_converged_run() {
        let n = 16;
        let model = MeasurementModel::sample(n, 0.1, NoiseKind::ComplexGaussian, 9).unwrap();
        let trace = run_from_eigenvector(&model, &GpmConfig::for_dim(n), &EigOptions::for_dim(n)).unwrap();
        let r = verify_optimality(model.c(), &trace.estimate, &tight(n)).unwrap();
        let s = build_certificate(model.c(), &trace.estimate).unwrap();
        let oracle = dense_eig_oracle(&s).unwrap()[1].0;
        assert!((r.lambda2 - oracle).abs() <= 1e-6 * oracle.abs());
    }

    #[test]
    fn kernel_at_fixed_point() {
        let n = 20;
        let model = MeasurementModel::sample(n, 1.0, NoiseKind::Rademacher, 10).unwrap();
        let trace = run_from_eigenvector(&model, &GpmConfig::for_dim(n), &EigOptions::for_dim(n)).unwrap();
        let s = build_certificate(model.c(), &trace.estimate).unwrap();
        let sx = s.matvec(&trace.estimate).unwrap().norm();
        assert!(sx <= 10.0 * trace.fixed_point_residual * n as f64 + 1e-12);
    }

    #[test]
    fn trace_identity_and_scaling() {
        let n = 10;
        let model = MeasurementModel::sample(n, 2.0, NoiseKind::ComplexGaussian, 11).unwrap();
        let mut rng = SplitMix64::new(4);
        for _ in 0..20 {
            let x = random_unit_modulus(n, &mut rng);
            let s = build_certificate(model.c(), &x).unwrap();
            assert!(s.quadratic_form(&x, &x).unwrap().norm() < 1e-10);
            for k in 0..n {
                assert_eq!(s.get(k, k).im, 0.0);
            }
            let alpha = 2.5;
            let scaled = build_certificate(&model.c().scale(alpha), &x).unwrap();
            let diff = scaled.add_scaled(&s.scale(alpha), -1.0).unwrap().max_abs();
            assert!(diff <= 1e-13 * scaled.max_abs());
        }
    }
}
