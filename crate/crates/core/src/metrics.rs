//! Distances on the quotient of ℂⁿ by global phase.
//!
//! `z` is only identifiable up to a global rotation `z·e^{iθ}`, so every
//! error is measured after the best rotation.

use std::f64::consts::TAU;

use crate::error::{check_dim, Result};
use crate::lina::{ComplexVector, C64};

const DINF_GRID: usize = 4096;

/// Optimal global rotation of `x` onto `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alignment {
    /// Angle in `[0, 2π)` minimizing `‖x·e^{iθ} − y‖₂`.
    pub theta: f64,
    /// `x* y == 0`: every angle is optimal and `theta` is 0 by convention.
    pub degenerate: bool,
}

/// Angle `θ = Arg(x* y)`, which makes `(x e^{iθ})* y = |x* y|` real and
/// nonnegative and therefore minimizes `‖x e^{iθ} − y‖₂`.
pub fn align_phase(x: &ComplexVector, y: &ComplexVector) -> Result<Alignment> {
    let ip = x.dot(y)?;
    if ip == C64::new(0.0, 0.0) {
        return Ok(Alignment {
            theta: 0.0,
            degenerate: true,
        });
    }
    Ok(Alignment {
        theta: ip.arg().rem_euclid(TAU),
        degenerate: false,
    })
}

/// `d₂(x, y) = min_θ ‖x e^{iθ} − y‖₂ = sqrt(‖x‖² + ‖y‖² − 2|x* y|)`.
///
/// Evaluated as the norm of the aligned difference: the closed form loses
/// about half the significant digits to cancellation when `x ≈ y`.
pub fn d2(x: &ComplexVector, y: &ComplexVector) -> Result<f64> {
    let ip = x.dot(y)?;
    let rot = if ip == C64::new(0.0, 0.0) {
        C64::new(1.0, 0.0)
    } else {
        ip / ip.norm()
    };
    Ok(x.iter()
        .zip(y.iter())
        .map(|(a, b)| (a * rot - b).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

fn linf_at(x: &[C64], y: &[C64], theta: f64) -> f64 {
    let rot = C64::from_polar(1.0, theta);
    x.iter()
        .zip(y)
        .map(|(a, b)| (a * rot - b).norm())
        .fold(0.0, f64::max)
}

/// `d∞(x, y) = min_θ ‖x e^{iθ} − y‖∞`, to within `tol`.
///
/// The objective is Lipschitz in θ with constant `L = max_k |x_k|`. It is
/// evaluated on a uniform grid, then every grid cell whose lower bound
/// (grid value minus `L·h/2`) does not exceed the best grid value is refined
/// by golden-section search down to width `tol`.
pub fn dinf(x: &ComplexVector, y: &ComplexVector, tol: f64) -> Result<f64> {
    check_dim(x.len(), y.len())?;
    let (xs, ys) = (x.as_slice(), y.as_slice());
    let h = TAU / DINF_GRID as f64;
    let lip = x.norm_inf();
    let grid: Vec<f64> = (0..DINF_GRID).map(|i| linf_at(xs, ys, i as f64 * h)).collect();
    let best_grid = grid.iter().copied().fold(f64::INFINITY, f64::min);
    let mut best = best_grid;

    let tol = tol.max(1e-15);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    for (i, &g) in grid.iter().enumerate() {
        if g - lip * h > best_grid {
            continue;
        }
        let center = i as f64 * h;
        let (mut a, mut b) = (center - h, center + h);
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        let (mut fc, mut fd) = (linf_at(xs, ys, c), linf_at(xs, ys, d));
        while b - a > tol {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = linf_at(xs, ys, c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = linf_at(xs, ys, d);
            }
        }
        best = best.min(fc).min(fd).min(linf_at(xs, ys, 0.5 * (a + b)));
    }
    Ok(best)
}

/// `‖x e^{iθ*} − y‖∞` with `θ*` from [`align_phase`].
pub fn aligned_linf(x: &ComplexVector, y: &ComplexVector) -> Result<f64> {
    let a = align_phase(x, y)?;
    Ok(linf_at(x, y, a.theta))
}

/// `x e^{iθ*}` with `θ*` from [`align_phase`].
pub fn aligned(x: &ComplexVector, y: &ComplexVector) -> Result<ComplexVector> {
    let a = align_phase(x, y)?;
    Ok(x.rotate(a.theta))
}
