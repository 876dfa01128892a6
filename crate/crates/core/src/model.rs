//! Measurement model `C = z z* + σ W`.
//!
//! Indices are zero-based throughout.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::lina::{ComplexVector, HermitianMatrix, C64};
use crate::rng::{hash_seeds, SplitMix64};

/// Ground-truth phases `z_k = e^{iθ_k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalVector {
    z: ComplexVector,
}

impl SignalVector {
    /// Draw `θ_k` i.i.d. uniform on `[0, 2π)`.
    pub fn sample(n: usize, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("signal needs n >= 2, got {n}")));
        }
        let mut rng = SplitMix64::new(seed);
        let z = (0..n).map(|_| C64::from_polar(1.0, TAU * rng.uniform())).collect();
        Ok(Self {
            z: ComplexVector::from_vec_unchecked(z),
        })
    }

    pub fn from_phases(theta: &[f64]) -> Result<Self> {
        Self::new(ComplexVector::new(
            theta.iter().map(|&t| C64::from_polar(1.0, t)).collect(),
        )?)
    }

    /// Wrap an existing vector; entries must have unit modulus within 1e-12.
    pub fn new(z: ComplexVector) -> Result<Self> {
        if !z.is_unit_modulus(1e-12) {
            return Err(Error::InvalidInput("signal entries must have unit modulus".into()));
        }
        Ok(Self { z })
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }

    pub fn vector(&self) -> &ComplexVector {
        &self.z
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    /// Re and Im i.i.d. `N(0, 1/2)`, so `E|W_kl|² = 1`.
    ComplexGaussian,
    /// Re and Im i.i.d. `±1/√2`.
    Rademacher,
    Zero,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 3] = [NoiseKind::ComplexGaussian, NoiseKind::Rademacher, NoiseKind::Zero];

    pub fn as_str(&self) -> &'static str {
        match self {
            NoiseKind::ComplexGaussian => "complex-gaussian",
            NoiseKind::Rademacher => "rademacher",
            NoiseKind::Zero => "zero",
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "complex-gaussian" | "gaussian" => Ok(NoiseKind::ComplexGaussian),
            "rademacher" => Ok(NoiseKind::Rademacher),
            "zero" => Ok(NoiseKind::Zero),
            other => Err(Error::InvalidInput(format!("unknown noise kind '{other}'"))),
        }
    }
}

/// Hermitian Wigner matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseMatrix {
    w: HermitianMatrix,
    kind: NoiseKind,
}

impl NoiseMatrix {
    /// Entries above the diagonal are drawn row by row; the lower triangle
    /// is the conjugate mirror and the diagonal is zero.
    pub fn sample(n: usize, kind: NoiseKind, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("noise needs n >= 2, got {n}")));
        }
        let mut rng = SplitMix64::new(seed);
        let w = HermitianMatrix::from_upper_fn(n, |k, l| {
            if k == l {
                return C64::new(0.0, 0.0);
            }
            match kind {
                NoiseKind::ComplexGaussian => {
                    let (a, b) = rng.normal_pair();
                    C64::new(a * FRAC_1_SQRT_2, b * FRAC_1_SQRT_2)
                }
                NoiseKind::Rademacher => {
                    C64::new(rng.sign() * FRAC_1_SQRT_2, rng.sign() * FRAC_1_SQRT_2)
                }
                NoiseKind::Zero => C64::new(0.0, 0.0),
            }
        })?;
        Ok(Self { w, kind })
    }

    /// Wrap a given matrix; its diagonal must be exactly zero.
    pub fn from_matrix(w: HermitianMatrix, kind: NoiseKind) -> Result<Self> {
        if w.diag_real().iter().any(|&d| d != 0.0) {
            return Err(Error::InvalidInput("noise diagonal must be zero".into()));
        }
        Ok(Self { w, kind })
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.w
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.w.n()
    }

    /// `W^(m)`: row and column `m` set to zero.
    pub fn leave_one_out(&self, m: usize) -> Result<Self> {
        let n = self.n();
        if m >= n {
            return Err(Error::IndexOutOfRange { index: m, n });
        }
        let w = HermitianMatrix::from_upper_fn(n, |k, l| {
            if k == m || l == m {
                C64::new(0.0, 0.0)
            } else {
                self.w.get(k, l)
            }
        })?;
        Ok(Self { w, kind: self.kind })
    }

    /// `ΔW^(m) = W − W^(m)`: only row and column `m` of `W` survive.
    pub fn delta(&self, m: usize) -> Result<HermitianMatrix> {
        let n = self.n();
        if m >= n {
            return Err(Error::IndexOutOfRange { index: m, n });
        }
        HermitianMatrix::from_upper_fn(n, |k, l| {
            if k == m || l == m {
                self.w.get(k, l)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }
}

/// A complete instance: signal, noise, level and the measurement matrix.
#[derive(Debug, Clone)]
pub struct MeasurementModel {
    pub signal: SignalVector,
    pub noise: NoiseMatrix,
    pub sigma: f64,
    c: HermitianMatrix,
}

impl MeasurementModel {
    /// `C_kl = z_k conj(z_l) + σ W_kl`.
    pub fn assemble(signal: SignalVector, noise: NoiseMatrix, sigma: f64) -> Result<Self> {
        check_dim(signal.n(), noise.n())?;
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::InvalidInput(format!("sigma must be finite and >= 0, got {sigma}")));
        }
        let c = build_c(&signal, &noise, sigma)?;
        Ok(Self {
            signal,
            noise,
            sigma,
            c,
        })
    }

    /// Signal and noise drawn from seeds derived from `seed`.
    pub fn sample(n: usize, sigma: f64, kind: NoiseKind, seed: u64) -> Result<Self> {
        let signal = SignalVector::sample(n, hash_seeds(&[seed, 1]))?;
        let noise = NoiseMatrix::sample(n, kind, hash_seeds(&[seed, 2]))?;
        Self::assemble(signal, noise, sigma)
    }

    pub fn c(&self) -> &HermitianMatrix {
        &self.c
    }

    pub fn n(&self) -> usize {
        self.c.n()
    }

    /// `C^(m) = z z* + σ W^(m)`. The original model is untouched.
    pub fn leave_one_out(&self, m: usize) -> Result<Self> {
        let noise = self.noise.leave_one_out(m)?;
        Self::assemble(self.signal.clone(), noise, self.sigma)
    }

    /// Largest entrywise deviation of `C` from `z z* + σW`, recomputed.
    pub fn assembly_error(&self) -> f64 {
        let rebuilt = build_c(&self.signal, &self.noise, self.sigma).expect("dimensions validated");
        rebuilt
            .add_scaled(&self.c, -1.0)
            .expect("same dimension")
            .frobenius_norm()
    }
}

fn build_c(signal: &SignalVector, noise: &NoiseMatrix, sigma: f64) -> Result<HermitianMatrix> {
    let z = signal.vector();
    let w = noise.matrix();
    HermitianMatrix::from_upper_fn(z.len(), |k, l| z[k] * z[l].conj() + w.get(k, l) * sigma)
}
