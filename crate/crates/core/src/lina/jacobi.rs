//! Dense eigendecomposition by cyclic Jacobi rotations, used as an
//! independent oracle for the power-iteration solvers.
//!
//! `H = A + iB` is embedded as the real symmetric matrix
//! `M = [[A, −B], [B, A]]` of order `2n`. Each eigenpair `(λ, a + ib)` of
//! `H` yields the two orthogonal eigenvectors `[a; b]` and `[−b; a]` of `M`,
//! so the spectrum of `M` is that of `H` with every eigenvalue doubled.

use super::{dotc, norm2, ComplexVector, HermitianMatrix, C64};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;
const MAX_DIM: usize = 512;

/// Full eigendecomposition of `h`, eigenvalues ascending, unit-norm
/// eigenvectors.
pub fn dense_eig_oracle(h: &HermitianMatrix) -> Result<Vec<(f64, ComplexVector)>> {
    let n = h.n();
    if n > MAX_DIM {
        return Err(Error::InvalidInput(format!(
            "dense oracle limited to n <= {MAX_DIM}, got {n}"
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let dim = 2 * n;
    let mut m = vec![0.0; dim * dim];
    for k in 0..n {
        for l in 0..n {
            let v = h.get(k, l);
            m[k * dim + l] = v.re;
            m[(k + n) * dim + (l + n)] = v.re;
            m[k * dim + (l + n)] = -v.im;
            m[(k + n) * dim + l] = v.im;
        }
    }
    let target = 1e-12 * h.frobenius_norm();
    let (values, vectors) = jacobi_symmetric(m, dim, target)?;

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    let candidate = |j: usize| -> Vec<C64> {
        (0..n)
            .map(|k| C64::new(vectors[k * dim + j], vectors[(k + n) * dim + j]))
            .collect()
    };
    let residual_after = |c: &[C64], basis: &[Vec<C64>]| -> Vec<C64> {
        let mut r = c.to_vec();
        for q in basis {
            let coef = dotc(q, &r);
            for (ri, qi) in r.iter_mut().zip(q) {
                *ri -= qi * coef;
            }
        }
        r
    };

    // Each real eigenvector maps to a complex eigenvector; its partner maps
    // to the same direction times i. Keep one representative per pair by
    // complex Gram–Schmidt against the accepted set.
    let mut accepted: Vec<Vec<C64>> = Vec::with_capacity(n);
    let mut used = vec![false; dim];
    for &j in &order {
        if accepted.len() == n {
            break;
        }
        let r = residual_after(&candidate(j), &accepted);
        let nrm = norm2(&r);
        if nrm * nrm > 0.5 {
            accepted.push(r.iter().map(|x| x / nrm).collect());
            used[j] = true;
        }
    }
    while accepted.len() < n {
        let (j, r, nrm) = (0..dim)
            .filter(|&j| !used[j])
            .map(|j| {
                let r = residual_after(&candidate(j), &accepted);
                let nrm = norm2(&r);
                (j, r, nrm)
            })
            .max_by(|a, b| a.2.total_cmp(&b.2))
            .ok_or_else(|| Error::InvalidInput("eigenvector reconstruction failed".into()))?;
        used[j] = true;
        accepted.push(r.iter().map(|x| x / nrm).collect());
    }

    let mut pairs: Vec<(f64, ComplexVector)> = accepted
        .into_iter()
        .map(|v| {
            let mut hv = vec![C64::new(0.0, 0.0); n];
            h.apply(&v, &mut hv);
            (dotc(&v, &hv).re, ComplexVector::from_vec_unchecked(v))
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs)
}

/// Cyclic Jacobi on a real symmetric row-major matrix. Returns the
/// diagonal and the accumulated rotations (eigenvectors in columns).
fn jacobi_symmetric(mut a: Vec<f64>, dim: usize, target: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut v = vec![0.0; dim * dim];
    for i in 0..dim {
        v[i * dim + i] = 1.0;
    }
    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for p in 0..dim {
            for q in 0..dim {
                if p != q {
                    s += a[p * dim + q] * a[p * dim + q];
                }
            }
        }
        s.sqrt()
    };

    for _ in 0..MAX_SWEEPS {
        if off(&a) <= target {
            let diag = (0..dim).map(|i| a[i * dim + i]).collect();
            return Ok((diag, v));
        }
        for p in 0..dim - 1 {
            for q in p + 1..dim {
                let apq = a[p * dim + q];
                if apq == 0.0 {
                    continue;
                }
                let tau = (a[q * dim + q] - a[p * dim + p]) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..dim {
                    let akp = a[k * dim + p];
                    let akq = a[k * dim + q];
                    a[k * dim + p] = c * akp - s * akq;
                    a[k * dim + q] = s * akp + c * akq;
                }
                for k in 0..dim {
                    let apk = a[p * dim + k];
                    let aqk = a[q * dim + k];
                    a[p * dim + k] = c * apk - s * aqk;
                    a[q * dim + k] = s * apk + c * aqk;
                }
                a[p * dim + q] = 0.0;
                a[q * dim + p] = 0.0;
                for k in 0..dim {
                    let vkp = v[k * dim + p];
                    let vkq = v[k * dim + q];
                    v[k * dim + p] = c * vkp - s * vkq;
                    v[k * dim + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    Err(Error::NonConvergence {
        iterations: MAX_SWEEPS,
        residual: off(&a),
    })
}
