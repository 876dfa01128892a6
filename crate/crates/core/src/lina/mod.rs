//! Dense complex Hermitian linear algebra.
//!
//! Matrices are stored densely and row-major. The Hermitian structure is
//! enforced when a matrix is built: only the upper triangle is read and the
//! lower triangle is derived by conjugation, so `H[k][l] == conj(H[l][k])`
//! holds bit-exactly and diagonal entries are real.

mod eigen;
mod jacobi;

pub use eigen::{
    deflated_leading_eigenvalue, leading_eigpair, leading_eigpair_with, second_smallest_eigenvalue,
    smallest_eigenvalue, spectral_norm, EigOptions, EigPair,
};
pub use jacobi::dense_eig_oracle;

use std::ops::{Deref, Index};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

pub type C64 = Complex64;

/// A vector in ℂⁿ with finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct ComplexVector(Vec<C64>);

impl ComplexVector {
    pub fn new(entries: Vec<C64>) -> Result<Self> {
        if entries.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NotFinite("vector entries"));
        }
        Ok(Self(entries))
    }

    pub(crate) fn from_vec_unchecked(entries: Vec<C64>) -> Self {
        debug_assert!(entries.iter().all(|v| v.re.is_finite() && v.im.is_finite()));
        Self(entries)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![C64::new(0.0, 0.0); n])
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![C64::new(1.0, 0.0); n])
    }

    /// Standard basis vector `e_k`.
    pub fn basis(n: usize, k: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[k] = C64::new(1.0, 0.0);
        v
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self(values.iter().map(|&r| C64::new(r, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<C64> {
        self.0
    }

    /// Hermitian inner product `self* other = Σ conj(self_k) other_k`.
    pub fn dot(&self, other: &ComplexVector) -> Result<C64> {
        check_dim(self.len(), other.len())?;
        Ok(dotc(&self.0, &other.0))
    }

    pub fn norm(&self) -> f64 {
        norm2(&self.0)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, alpha: C64) -> Self {
        Self(self.0.iter().map(|&v| v * alpha).collect())
    }

    /// `self · e^{iθ}`.
    pub fn rotate(&self, theta: f64) -> Self {
        self.scale(C64::from_polar(1.0, theta))
    }

    pub fn sub(&self, other: &ComplexVector) -> Result<Self> {
        check_dim(self.len(), other.len())?;
        Ok(Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    pub fn add(&self, other: &ComplexVector) -> Result<Self> {
        check_dim(self.len(), other.len())?;
        Ok(Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }

    /// Rescale to Euclidean norm `target`. A zero vector is returned unchanged.
    pub fn with_norm(&self, target: f64) -> Self {
        let nrm = self.norm();
        if nrm == 0.0 {
            return self.clone();
        }
        self.scale(C64::new(target / nrm, 0.0))
    }

    /// Largest deviation of `|v_k|` from one.
    pub fn max_modulus_deviation(&self) -> f64 {
        self.0.iter().map(|v| (v.norm() - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Whether every entry lies on the unit circle within `tol`.
    pub fn is_unit_modulus(&self, tol: f64) -> bool {
        self.max_modulus_deviation() <= tol
    }
}

impl Deref for ComplexVector {
    type Target = [C64];

    fn deref(&self) -> &[C64] {
        &self.0
    }
}

impl TryFrom<Vec<C64>> for ComplexVector {
    type Error = Error;

    fn try_from(v: Vec<C64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ComplexVector> for Vec<C64> {
    fn from(v: ComplexVector) -> Self {
        v.0
    }
}

#[inline]
pub(crate) fn dotc(x: &[C64], y: &[C64]) -> C64 {
    dot_lanes(x, y, true)
}

#[inline(always)]
fn apply_generic(h: &HermitianMatrix, v: &[C64], out: &mut [C64]) {
    for (k, o) in out.iter_mut().enumerate() {
        *o = dot_lanes(h.row(k), v, false);
    }
}

/// Same arithmetic as [`apply_generic`]; wider registers only. Rust never
/// fuses multiply-adds, so results are bit-identical across both paths.
#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn apply_avx2(h: &HermitianMatrix, v: &[C64], out: &mut [C64]) {
    apply_generic(h, v, out)
}

/// `Σ a_k b_k` (or `Σ conj(a_k) b_k`) with eight independent accumulators,
/// so the loop is not bound by floating-point add latency. The summation
/// order is fixed, so results are deterministic.
#[inline(always)]
fn dot_lanes(a: &[C64], b: &[C64], conj: bool) -> C64 {
    const L: usize = 8;
    let s = if conj { -1.0 } else { 1.0 };
    let mut re = [0.0f64; L];
    let mut im = [0.0f64; L];
    let ca = a.chunks_exact(L);
    let cb = b.chunks_exact(L);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for l in 0..L {
            let (xr, xi) = (x[l].re, s * x[l].im);
            re[l] += xr * y[l].re - xi * y[l].im;
            im[l] += xr * y[l].im + xi * y[l].re;
        }
    }
    for (x, y) in ra.iter().zip(rb) {
        let (xr, xi) = (x.re, s * x.im);
        re[0] += xr * y.re - xi * y.im;
        im[0] += xr * y.im + xi * y.re;
    }
    let fold = |v: [f64; L]| ((v[0] + v[1]) + (v[2] + v[3])) + ((v[4] + v[5]) + (v[6] + v[7]));
    C64::new(fold(re), fold(im))
}

#[inline]
pub(crate) fn norm2(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Dense Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    data: Vec<C64>,
}

impl HermitianMatrix {
    /// Build from a function evaluated on the upper triangle (`k <= l`).
    /// The lower triangle is filled by conjugation and the imaginary part
    /// of diagonal entries is dropped.
    pub fn from_upper_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        let mut data = vec![C64::new(0.0, 0.0); n * n];
        for k in 0..n {
            data[k * n + k] = C64::new(f(k, k).re, 0.0);
            for l in k + 1..n {
                let v = f(k, l);
                data[k * n + l] = v;
                data[l * n + k] = v.conj();
            }
        }
        let h = Self { n, data };
        h.check_finite()?;
        Ok(h)
    }

    /// Build from a full row-major array; rejects input that is not
    /// Hermitian within `1e-12` relative to its largest entry.
    pub fn from_dense(n: usize, entries: &[C64]) -> Result<Self> {
        check_dim(n * n, entries.len())?;
        let scale = entries.iter().map(|v| v.norm()).fold(1.0, f64::max);
        for k in 0..n {
            for l in k..n {
                let a = entries[k * n + l];
                let b = entries[l * n + k];
                if (a - b.conj()).norm() > 1e-12 * scale {
                    return Err(Error::InvalidInput(format!(
                        "matrix is not Hermitian at ({k}, {l})"
                    )));
                }
            }
        }
        Self::from_upper_fn(n, |k, l| entries[k * n + l])
    }

    /// Build from the upper triangle given row-major (`n(n+1)/2` entries).
    pub fn from_upper_packed(n: usize, packed: &[C64]) -> Result<Self> {
        check_dim(n * (n + 1) / 2, packed.len())?;
        let mut it = packed.iter();
        let mut data = vec![C64::new(0.0, 0.0); n * n];
        for k in 0..n {
            for l in k..n {
                data[k * n + l] = *it.next().expect("length checked");
            }
        }
        Self::from_upper_fn(n, |k, l| data[k * n + l])
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![C64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut h = Self::zeros(n);
        for (k, &v) in d.iter().enumerate() {
            h.data[k * n + k] = C64::new(v, 0.0);
        }
        h
    }

    /// Rank-one matrix `z z*`.
    pub fn outer(z: &ComplexVector) -> Self {
        let n = z.len();
        let mut data = vec![C64::new(0.0, 0.0); n * n];
        for k in 0..n {
            for l in 0..n {
                data[k * n + l] = z[k] * z[l].conj();
            }
            data[k * n + k] = C64::new(data[k * n + k].re, 0.0);
        }
        Self { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, k: usize, l: usize) -> C64 {
        self.data[k * self.n + l]
    }

    pub fn row(&self, k: usize) -> &[C64] {
        &self.data[k * self.n..(k + 1) * self.n]
    }

    /// Upper triangle, row-major, `n(n+1)/2` entries.
    pub fn upper_packed(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.n * (self.n + 1) / 2);
        for k in 0..self.n {
            out.extend_from_slice(&self.row(k)[k..]);
        }
        out
    }

    pub fn diag_real(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.get(k, k).re).collect()
    }

    /// `H v`.
    pub fn matvec(&self, v: &ComplexVector) -> Result<ComplexVector> {
        check_dim(self.n, v.len())?;
        let mut out = vec![C64::new(0.0, 0.0); self.n];
        self.apply(v, &mut out);
        Ok(ComplexVector::from_vec_unchecked(out))
    }

    /// `out = H v` without dimension checks.
    pub(crate) fn apply(&self, v: &[C64], out: &mut [C64]) {
        #[cfg(target_arch = "x86_64")]
        if std::arch::is_x86_feature_detected!("avx2") {
            // SAFETY: the CPU supports AVX2, checked just above.
            unsafe { apply_avx2(self, v, out) };
            return;
        }
        apply_generic(self, v, out);
    }

    /// Entrywise `self + alpha·other`.
    pub fn add_scaled(&self, other: &HermitianMatrix, alpha: f64) -> Result<Self> {
        check_dim(self.n, other.n)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b * alpha)
            .collect();
        Ok(Self { n: self.n, data })
    }

    pub fn scale(&self, alpha: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|v| v * alpha).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Gershgorin bound `max_k Σ_l |H[k][l]|`, an upper bound on `‖H‖₂`.
    pub fn gershgorin_bound(&self) -> f64 {
        (0..self.n)
            .map(|k| self.row(k).iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `u* H v`.
    pub fn quadratic_form(&self, u: &ComplexVector, v: &ComplexVector) -> Result<C64> {
        let hv = self.matvec(v)?;
        u.dot(&hv)
    }

    fn check_finite(&self) -> Result<()> {
        if self.data.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            Ok(())
        } else {
            Err(Error::NotFinite("matrix entries"))
        }
    }
}

impl Index<(usize, usize)> for HermitianMatrix {
    type Output = C64;

    fn index(&self, (k, l): (usize, usize)) -> &C64 {
        &self.data[k * self.n + l]
    }
}

/// `H v`, free-function form.
pub fn matvec(h: &HermitianMatrix, v: &ComplexVector) -> Result<ComplexVector> {
    h.matvec(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use crate::testutil::{random_hermitian, random_vector};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn matvec_identity() {
        let v = ComplexVector::new(vec![c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        let out = matvec(&HermitianMatrix::identity(2), &v).unwrap();
        assert_eq!(out, v);
    }

    #[test]
    fn matvec_rank_one() {
        let z = ComplexVector::ones(2);
        let out = matvec(&HermitianMatrix::outer(&z), &z).unwrap();
        assert_eq!(out.as_slice(), &[c(2.0, 0.0), c(2.0, 0.0)]);
    }

    #[test]
    fn matvec_column_extraction() {
        let h = HermitianMatrix::from_dense(
            2,
            &[c(0.0, 0.0), c(1.0, -1.0), c(1.0, 1.0), c(0.0, 0.0)],
        )
        .unwrap();
        let out = matvec(&h, &ComplexVector::basis(2, 0)).unwrap();
        assert_eq!(out.as_slice(), &[c(0.0, 0.0), c(1.0, 1.0)]);
    }

    #[test]
    fn matvec_dimension_mismatch() {
        let err = matvec(&HermitianMatrix::identity(3), &ComplexVector::ones(2)).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 3, actual: 2 });
    }

    #[test]
    fn hermitian_structure_is_exact() {
        let h = random_hermitian(9, 1);
        for k in 0..9 {
            assert_eq!(h.get(k, k).im, 0.0);
            for l in 0..9 {
                assert_eq!(h.get(k, l), h.get(l, k).conj());
            }
        }
    }

    #[test]
    fn from_dense_rejects_non_hermitian() {
        let err = HermitianMatrix::from_dense(2, &[c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(err, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn non_finite_rejected() {
        assert!(ComplexVector::new(vec![c(f64::NAN, 0.0)]).is_err());
        assert!(HermitianMatrix::from_upper_fn(2, |_, _| c(f64::INFINITY, 0.0)).is_err());
    }

    #[test]
    fn packed_round_trip() {
        let h = random_hermitian(5, 3);
        let back = HermitianMatrix::from_upper_packed(5, &h.upper_packed()).unwrap();
        assert_eq!(h, back);
    }

    #[test]
    fn gershgorin_bounds_operator_norm() {
        let h = random_hermitian(12, 5);
        let mut rng = SplitMix64::new(6);
        for _ in 0..50 {
            let v = random_vector(12, &mut rng);
            assert!(h.matvec(&v).unwrap().norm() <= h.gershgorin_bound() * v.norm() * (1.0 + 1e-12));
        }
    }

    proptest! {
        #[test]
        fn sesquilinear_symmetry(seed in any::<u64>(), n in 1usize..20) {
            let h = random_hermitian(n, seed);
            let mut rng = SplitMix64::new(seed ^ 0xABCD);
            let u = random_vector(n, &mut rng);
            let v = random_vector(n, &mut rng);
            let uhv = h.quadratic_form(&u, &v).unwrap();
            let vhu = h.quadratic_form(&v, &u).unwrap();
            let scale = h.frobenius_norm() * u.norm() * v.norm();
            prop_assert!((uhv - vhu.conj()).norm() <= 1e-12 * scale);
        }
    }
}
