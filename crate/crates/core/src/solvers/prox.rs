//! Closed-form Bregman proximal steps for the kernel in [`crate::bregman`].
//!
//! With `P = λ∇f̂_k(Y) − ∇φ(Y)` the subproblem separates into scalar problems
//!
//! ```text
//! min_{x>0}  p·x + λ·g(x) − log x + x²/2
//! ```
//!
//! whose stationarity conditions are quadratics with one positive root.

use crate::error::Result;
use crate::matrix::{DenseMatrix, FactorPair};
use crate::model::{grad_majorizer_unchecked, MajorizerState, RegKind, Regularizer};

/// Positive root of `x² + a·x − 1 = 0`, i.e. `(−a + √(a² + 4)) / 2`.
#[inline]
pub fn l1_root(p: f64, mu_lambda: f64) -> f64 {
    let a = p + mu_lambda;
    let s = (a * a + 4.0).sqrt();
    if a >= 0.0 {
        2.0 / (a + s)
    } else {
        (s - a) / 2.0
    }
}

/// Positive root of `c·x² + p·x − 1 = 0` with `c = 1 + μλ`.
#[inline]
pub fn sqfro_root(p: f64, mu_lambda: f64) -> f64 {
    let c = 1.0 + mu_lambda;
    let s = (p * p + 4.0 * c).sqrt();
    if p >= 0.0 {
        2.0 / (p + s)
    } else {
        (s - p) / (2.0 * c)
    }
}

/// Entrywise `x = (−p − μλ + √((p + μλ)² + 4)) / 2`; always strictly positive.
pub fn prox_step_l1(p: &DenseMatrix, mu_lambda: f64) -> DenseMatrix {
    p.map(|v| l1_root(v, mu_lambda))
}

/// Entrywise `x = (−p + √(p² + 4(1 + μλ))) / (2(1 + μλ))`; `μλ = 0` gives the
/// unregularized step.
pub fn prox_step_sqfro(p: &DenseMatrix, mu_lambda: f64) -> DenseMatrix {
    p.map(|v| sqfro_root(v, mu_lambda))
}

/// `P = λ_w ∇_W f̂_k(Y) − ∇_W φ(Y)` and `Q = λ_h ∇_H f̂_k(Y) − ∇_H φ(Y)`.
pub fn assemble_p(
    s: &MajorizerState,
    y: &FactorPair,
    lambda_w: f64,
    lambda_h: f64,
) -> Result<(DenseMatrix, DenseMatrix)> {
    s.check_point(y)?;
    Ok(assemble_unchecked(s, y, lambda_w, lambda_h))
}

pub(crate) fn assemble_unchecked(
    s: &MajorizerState,
    y: &FactorPair,
    lambda_w: f64,
    lambda_h: f64,
) -> (DenseMatrix, DenseMatrix) {
    let (mut pw, mut ph) = grad_majorizer_unchecked(s, y);
    for (g, &v) in pw.as_mut_slice().iter_mut().zip(y.w.as_slice()) {
        *g = lambda_w * *g - (v - 1.0 / v);
    }
    for (g, &v) in ph.as_mut_slice().iter_mut().zip(y.h.as_slice()) {
        *g = lambda_h * *g - (v - 1.0 / v);
    }
    (pw, ph)
}

/// Applies the regularizer's closed form to both blocks.
pub fn apply_prox(
    reg: &Regularizer,
    p: &DenseMatrix,
    q: &DenseMatrix,
    lambda_w: f64,
    lambda_h: f64,
) -> FactorPair {
    let (w, h) = match reg.kind() {
        RegKind::None => (prox_step_sqfro(p, 0.0), prox_step_sqfro(q, 0.0)),
        RegKind::L1 => (
            prox_step_l1(p, reg.mu_w() * lambda_w),
            prox_step_l1(q, reg.mu_h() * lambda_h),
        ),
        RegKind::SquaredFrobenius => (
            prox_step_sqfro(p, reg.mu_w() * lambda_w),
            prox_step_sqfro(q, reg.mu_h() * lambda_h),
        ),
    };
    FactorPair { w, h }
}
