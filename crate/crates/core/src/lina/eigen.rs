//! Shifted power iteration.
//!
//! Every solver here runs the same loop on `sign·H + shift·I`, where the
//! shift is a Gershgorin bound so the iterated operator is positive
//! semidefinite and power iteration converges to the algebraically largest
//! eigenvalue of `sign·H`. An optional unit vector is deflated from every
//! iterate, which restricts the iteration to its orthogonal complement.
//!
//! Exactly degenerate target eigenvalues are not an error: the returned
//! vector is then some element of the eigenspace.

use super::{dotc, norm2, ComplexVector, HermitianMatrix, C64};
use crate::error::{check_dim, Error, Result};
use crate::rng::SplitMix64;

/// Seed used by solvers whose signature does not carry one.
const INTERNAL_SEED: u64 = 0x005E_ED0F_E16E;

/// An eigenpair produced by power iteration.
#[derive(Debug, Clone)]
pub struct EigPair {
    pub value: f64,
    /// Eigenvector scaled to `‖v‖₂ = √n`.
    pub vector: ComplexVector,
    /// `‖Hv − λv‖₂ / max(|λ|, 1)` for the unit-norm vector.
    pub residual: f64,
    pub iterations: usize,
}

/// Tolerance, iteration cap and start-vector seed for [`leading_eigpair`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl EigOptions {
    /// `tol = 1e-10`, `max_iter = 10n + 1000`.
    pub fn for_dim(n: usize) -> Self {
        Self {
            tol: 1e-10,
            max_iter: 10 * n + 1000,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Clone, Copy)]
enum Stop {
    /// `‖Hv − λv‖ / max(|λ|, 1)`.
    Relative,
    /// `‖Hv − λv‖ / scale`.
    Absolute(f64),
}

struct PowerRun {
    value: f64,
    vector: Vec<C64>,
    residual: f64,
    iterations: usize,
}

fn validate(h: &HermitianMatrix, tol: f64, max_iter: usize) -> Result<()> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    if max_iter == 0 {
        return Err(Error::InvalidInput("max_iter must be at least 1".into()));
    }
    if h.n() == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    h.check_finite()
}

fn project_out(v: &mut [C64], q: Option<&[C64]>) {
    if let Some(q) = q {
        let c = dotc(q, v);
        for (vi, qi) in v.iter_mut().zip(q) {
            *vi -= qi * c;
        }
    }
}

fn random_start(n: usize, seed: u64, deflate: Option<&[C64]>) -> Vec<C64> {
    let mut rng = SplitMix64::new(seed);
    let mut v: Vec<C64> = (0..n)
        .map(|_| {
            let (a, b) = rng.normal_pair();
            C64::new(a, b)
        })
        .collect();
    project_out(&mut v, deflate);
    let nrm = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nrm);
    v
}

#[allow(clippy::too_many_arguments)]
fn power_iterate(
    h: &HermitianMatrix,
    sign: f64,
    shift: f64,
    deflate: Option<&[C64]>,
    stop: Stop,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<PowerRun> {
    let n = h.n();
    if deflate.is_some() && n < 2 {
        return Err(Error::InvalidInput("deflation needs n >= 2".into()));
    }
    let mut v = random_start(n, seed, deflate);
    let mut w = vec![C64::new(0.0, 0.0); n];
    let mut residual = f64::INFINITY;

    for it in 1..=max_iter {
        h.apply(&v, &mut w);
        project_out(&mut w, deflate);
        let value = dotc(&v, &w).re;
        let r = v
            .iter()
            .zip(&w)
            .map(|(vi, wi)| (wi - vi * value).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if !r.is_finite() {
            return Err(Error::NotFinite("power iteration"));
        }
        residual = match stop {
            Stop::Relative => r / value.abs().max(1.0),
            Stop::Absolute(scale) => r / scale.max(f64::MIN_POSITIVE),
        };
        if residual <= tol {
            return Ok(PowerRun {
                value,
                vector: v,
                residual,
                iterations: it,
            });
        }
        for (wi, vi) in w.iter_mut().zip(&v) {
            *wi = *wi * sign + vi * shift;
        }
        project_out(&mut w, deflate);
        let nrm = norm2(&w);
        if nrm == 0.0 {
            // v sits in the kernel of the shifted operator; restart elsewhere.
            v = random_start(n, seed.wrapping_add(it as u64), deflate);
            continue;
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / nrm;
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        residual,
    })
}

fn scaled(v: Vec<C64>) -> ComplexVector {
    let n = v.len() as f64;
    ComplexVector::from_vec_unchecked(v).with_norm(n.sqrt())
}

/// Algebraically largest eigenpair of `h`.
///
/// Runs power iteration on `H + cI` with `c` the Gershgorin bound of `H`,
/// starting from a unit vector with standard normal real and imaginary parts
/// drawn from `seed`, until the relative residual is at most `tol`.
pub fn leading_eigpair(h: &HermitianMatrix, tol: f64, max_iter: usize, seed: u64) -> Result<EigPair> {
    validate(h, tol, max_iter)?;
    let shift = h.gershgorin_bound();
    let run = power_iterate(h, 1.0, shift, None, Stop::Relative, tol, max_iter, seed)?;
    Ok(EigPair {
        value: run.value,
        vector: scaled(run.vector),
        residual: run.residual,
        iterations: run.iterations,
    })
}

pub fn leading_eigpair_with(h: &HermitianMatrix, opts: &EigOptions) -> Result<EigPair> {
    leading_eigpair(h, opts.tol, opts.max_iter, opts.seed)
}

/// Largest eigenvalue of `h` on the orthogonal complement of `u`.
///
/// With `u` the leading eigenvector this is `λ₂(H)`.
pub fn deflated_leading_eigenvalue(
    h: &HermitianMatrix,
    u: &ComplexVector,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<f64> {
    validate(h, tol, max_iter)?;
    check_dim(h.n(), u.len())?;
    let q = unit(u)?;
    let shift = h.gershgorin_bound();
    let run = power_iterate(h, 1.0, shift, Some(&q), Stop::Relative, tol, max_iter, seed)?;
    Ok(run.value)
}

/// Smallest eigenvalue of `h` on the orthogonal complement of
/// `kernel_hint`, accurate to `tol·γ` where `γ` is the Gershgorin bound.
///
/// `kernel_hint` must be a numerical kernel vector:
/// `‖H·hint‖₂ / ‖hint‖₂ ≤ 1e-6·max(γ, 1)`.
pub fn second_smallest_eigenvalue(
    h: &HermitianMatrix,
    kernel_hint: &ComplexVector,
    tol: f64,
    max_iter: usize,
) -> Result<f64> {
    validate(h, tol, max_iter)?;
    check_dim(h.n(), kernel_hint.len())?;
    let gamma = h.gershgorin_bound();
    let hint_norm = kernel_hint.norm();
    if hint_norm == 0.0 {
        return Err(Error::InvalidInput("kernel hint is zero".into()));
    }
    let leak = h.matvec(kernel_hint)?.norm() / hint_norm;
    if leak > 1e-6 * gamma.max(1.0) {
        return Err(Error::InvalidInput(format!(
            "kernel hint is not a kernel vector (‖Hv‖/‖v‖ = {leak:e})"
        )));
    }
    smallest_on_complement(h, Some(kernel_hint), tol, max_iter)
}

/// Smallest eigenvalue of `h`, accurate to `tol·γ`.
pub fn smallest_eigenvalue(h: &HermitianMatrix, tol: f64, max_iter: usize) -> Result<f64> {
    validate(h, tol, max_iter)?;
    smallest_on_complement(h, None, tol, max_iter)
}

fn smallest_on_complement(
    h: &HermitianMatrix,
    deflate: Option<&ComplexVector>,
    tol: f64,
    max_iter: usize,
) -> Result<f64> {
    let gamma = h.gershgorin_bound();
    let q = deflate.map(unit).transpose()?;
    let run = power_iterate(
        h,
        -1.0,
        gamma,
        q.as_deref(),
        Stop::Absolute(gamma.max(1.0)),
        tol,
        max_iter,
        INTERNAL_SEED,
    )?;
    Ok(run.value)
}

/// `‖H‖₂ = max(|λ_max|, |λ_min|)`, from power iteration on `H` and `−H`
/// to relative residual `tol`.
pub fn spectral_norm(h: &HermitianMatrix, tol: f64) -> Result<f64> {
    let max_iter = 100 * h.n() + 10_000;
    validate(h, tol, max_iter)?;
    let shift = h.gershgorin_bound();
    let top = power_iterate(h, 1.0, shift, None, Stop::Relative, tol, max_iter, INTERNAL_SEED)?;
    let bottom = power_iterate(h, -1.0, shift, None, Stop::Relative, tol, max_iter, INTERNAL_SEED)?;
    Ok(top.value.abs().max(bottom.value.abs()))
}

fn unit(u: &ComplexVector) -> Result<Vec<C64>> {
    let nrm = u.norm();
    if nrm == 0.0 {
        return Err(Error::InvalidInput("cannot deflate a zero vector".into()));
    }
    Ok(u.iter().map(|x| x / nrm).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lina::dense_eig_oracle;
    use crate::metrics::d2;
    use crate::testutil::{random_hermitian, random_vector};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn default_iter(n: usize) -> usize {
        10 * n + 1000
    }

    #[test]
    fn rank_one_leading_pair() {
        let z = ComplexVector::new(vec![c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)]).unwrap();
        let h = HermitianMatrix::outer(&z);
        let pair = leading_eigpair(&h, 1e-10, default_iter(3), 1).unwrap();
        assert!((pair.value - 3.0).abs() < 1e-9);
        assert!(d2(&pair.vector, &z).unwrap() <= 1e-8);
        assert!((pair.vector.norm() - 3f64.sqrt()).abs() < 1e-12 * 3f64.sqrt());
        assert!(pair.residual <= 1e-10);
    }

    #[test]
    fn diagonal_leading_pair() {
        let h = HermitianMatrix::diagonal(&[5.0, 2.0, 1.0]);
        let pair = leading_eigpair(&h, 1e-10, default_iter(3), 2).unwrap();
        assert!((pair.value - 5.0).abs() < 1e-9);
        let e1 = ComplexVector::basis(3, 0).with_norm(3f64.sqrt());
        assert!(d2(&pair.vector, &e1).unwrap() < 1e-8);
    }

    #[test]
    fn random_leading_pair_matches_oracle() {
        let h = random_hermitian(8, 42);
        let pair = leading_eigpair(&h, 1e-10, 100_000, 42).unwrap();
        let oracle = dense_eig_oracle(&h).unwrap();
        let (lam, vec) = oracle.last().unwrap();
        assert!((pair.value - lam).abs() <= 1e-8, "{} vs {}", pair.value, lam);
        let vec = vec.with_norm(8f64.sqrt());
        assert!(d2(&pair.vector, &vec).unwrap() <= 1e-6);
    }

    #[test]
    fn leading_pair_validates_arguments() {
        let h = HermitianMatrix::identity(2);
        assert!(matches!(leading_eigpair(&h, 0.0, 10, 0), Err(Error::InvalidInput(_))));
        assert!(matches!(leading_eigpair(&h, 1e-8, 0, 0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn non_convergence_reports_residual() {
        let h = random_hermitian(30, 3);
        match leading_eigpair(&h, 1e-14, 3, 0) {
            Err(Error::NonConvergence { iterations, residual }) => {
                assert_eq!(iterations, 3);
                assert!(residual > 1e-14 && residual.is_finite());
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn degenerate_top_eigenspace_is_accepted() {
        let h = HermitianMatrix::diagonal(&[4.0, 4.0, 1.0]);
        let pair = leading_eigpair(&h, 1e-10, default_iter(3), 5).unwrap();
        assert!((pair.value - 4.0).abs() < 1e-9);
        assert!(pair.vector[2].norm() < 1e-8);
    }

    #[test]
    fn second_smallest_noiseless_certificate() {
        let n = 4;
        let z = ComplexVector::new(
            (0..n).map(|k| C64::from_polar(1.0, 0.7 * k as f64)).collect(),
        )
        .unwrap();
        let s = HermitianMatrix::identity(n)
            .scale(n as f64)
            .add_scaled(&HermitianMatrix::outer(&z), -1.0)
            .unwrap();
        let lam = second_smallest_eigenvalue(&s, &z, 1e-10, 100_000).unwrap();
        assert!((lam - 4.0).abs() < 1e-8, "{lam}");
    }

    #[test]
    fn second_smallest_diagonal() {
        let h = HermitianMatrix::diagonal(&[0.0, 3.0, 7.0]);
        let lam = second_smallest_eigenvalue(&h, &ComplexVector::basis(3, 0), 1e-10, 100_000).unwrap();
        assert!((lam - 3.0).abs() < 1e-8);
    }

    #[test]
    fn second_smallest_rejects_bad_hint() {
        let h = HermitianMatrix::diagonal(&[0.0, 3.0, 7.0]);
        let err = second_smallest_eigenvalue(&h, &ComplexVector::basis(3, 1), 1e-10, 100);
        assert!(matches!(err, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn spectral_norm_examples() {
        let z = ComplexVector::ones(5);
        assert!((spectral_norm(&HermitianMatrix::outer(&z), 1e-12).unwrap() - 5.0).abs() < 1e-9);
        let swap = HermitianMatrix::from_dense(2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((spectral_norm(&swap, 1e-12).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn spectral_norm_of_negative_definite() {
        let h = HermitianMatrix::diagonal(&[-9.0, 1.0, 2.0]);
        assert!((spectral_norm(&h, 1e-12).unwrap() - 9.0).abs() < 1e-9);
    }

    #[test]
    fn rayleigh_maximality() {
        let n = 20;
        let h = random_hermitian(n, 17);
        let pair = leading_eigpair(&h, 1e-10, 100_000, 1).unwrap();
        let mut rng = SplitMix64::new(8);
        for _ in 0..100 {
            let v = random_vector(n, &mut rng).with_norm((n as f64).sqrt());
            let rq = h.quadratic_form(&v, &v).unwrap().re / n as f64;
            assert!(pair.value >= rq - 1e-10);
        }
    }

    #[test]
    fn spectral_norm_dominates_action() {
        let n = 16;
        let h = random_hermitian(n, 23);
        let norm = spectral_norm(&h, 1e-10).unwrap();
        let mut rng = SplitMix64::new(9);
        for _ in 0..100 {
            let v = random_vector(n, &mut rng);
            assert!(norm >= h.matvec(&v).unwrap().norm() / v.norm() - 1e-8);
        }
    }

    #[test]
    fn deflated_leading_is_second_eigenvalue() {
        let h = HermitianMatrix::diagonal(&[6.0, 2.0, -1.0, 0.5]);
        let lam2 = deflated_leading_eigenvalue(&h, &ComplexVector::basis(4, 0), 1e-10, 10_000, 3).unwrap();
        assert!((lam2 - 2.0).abs() < 1e-8);
    }
}
