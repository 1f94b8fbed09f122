//! The separable kernel `φ(W, H) = Σ (−log x + x²/2)` over every entry of
//! both factors, and its Bregman distance.
//!
//! `φ` is 1-strongly convex on the open orthant (`φ'' = 1/x² + 1`), and the
//! closed-form proximal steps in [`crate::solvers::prox`] are derived for this
//! kernel specifically.

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, FactorPair};

#[inline]
fn phi_scalar(x: f64) -> f64 {
    -x.ln() + 0.5 * x * x
}

#[inline]
fn dphi_scalar(x: f64) -> f64 {
    -1.0 / x + x
}

/// Scalar Bregman distance of the kernel,
/// `φ(x) − φ(y) − φ'(y)(x − y) = −log(x/y) + x/y − 1 + (x − y)²/2`.
#[inline]
pub(crate) fn bregman_scalar(x: f64, y: f64) -> f64 {
    let t = x / y;
    let d = x - y;
    // ln_1p keeps precision when x ≈ y.
    (t - 1.0) - (t - 1.0).ln_1p() + 0.5 * d * d
}

fn require_positive(z: &FactorPair, what: &str) -> Result<()> {
    if !z.is_strictly_positive() {
        return Err(Error::domain(format!("{what}: kernel needs strictly positive entries")));
    }
    Ok(())
}

pub fn phi(z: &FactorPair) -> Result<f64> {
    require_positive(z, "phi")?;
    Ok(z
        .w
        .as_slice()
        .iter()
        .chain(z.h.as_slice())
        .map(|&v| phi_scalar(v))
        .sum())
}

pub fn grad_phi(z: &FactorPair) -> Result<(DenseMatrix, DenseMatrix)> {
    require_positive(z, "grad_phi")?;
    Ok((z.w.map(dphi_scalar), z.h.map(dphi_scalar)))
}

/// `D_φ(Z1, Z2) = φ(Z1) − φ(Z2) − ⟨∇φ(Z2), Z1 − Z2⟩`.
///
/// Evaluated entrywise in the algebraically equivalent form of
/// [`bregman_scalar`], which avoids cancellation between large `φ` values.
pub fn bregman_distance(z1: &FactorPair, z2: &FactorPair) -> Result<f64> {
    z1.check_same_shape(z2)?;
    require_positive(z1, "bregman_distance")?;
    require_positive(z2, "bregman_distance")?;
    Ok(bregman_unchecked(z1, z2))
}

pub(crate) fn bregman_unchecked(z1: &FactorPair, z2: &FactorPair) -> f64 {
    let block = |a: &DenseMatrix, b: &DenseMatrix| {
        a.as_slice()
            .iter()
            .zip(b.as_slice())
            .map(|(&x, &y)| bregman_scalar(x, y))
            .sum::<f64>()
    };
    (block(&z1.w, &z2.w) + block(&z1.h, &z2.h)).max(0.0)
}
