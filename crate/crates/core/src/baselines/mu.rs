use crate::bregman::bregman_unchecked;
use crate::error::{Error, Result};
use crate::matrix::{matmul_nt, matmul_tn, DenseMatrix, FactorPair};
use crate::model::{ratio, KlProblem, RegKind};
use crate::registry::{Algorithm, RestartReason, StepInfo};
use crate::solvers::ExtrapolationState;

/// Minimizer of `−s·log x + c·x + (μ/2)x²` over `x > 0`, written as
/// `2s / (c + √(c² + 4μs))` (reduces to `s/c` when `μ = 0`).
#[inline]
fn mm_root(s: f64, c: f64, mu: f64) -> f64 {
    2.0 * s / (c + (c * c + 4.0 * mu * s).sqrt())
}

/// Minimizes the majorizer in one block given its marginal `S` and the
/// linear coefficient per column/row.
fn update_block(
    factor: &mut DenseMatrix,
    marginal: &DenseMatrix,
    linear: impl Fn(usize) -> f64,
    kind: RegKind,
    mu: f64,
    block: &str,
) -> Result<()> {
    for (idx, (v, &s)) in factor
        .as_mut_slice()
        .iter_mut()
        .zip(marginal.as_slice())
        .enumerate()
    {
        let c = linear(idx);
        let (c, quad) = match kind {
            RegKind::None => (c, 0.0),
            RegKind::L1 => (c + mu, 0.0),
            RegKind::SquaredFrobenius => (c, mu),
        };
        if c == 0.0 && quad == 0.0 {
            return Err(Error::domain(format!("MU: zero denominator in {block} update")));
        }
        *v = mm_root(*v * s, c, quad);
    }
    if !factor.is_strictly_positive() {
        return Err(Error::domain(format!(
            "MU: positivity lost in {block} (X has an all-zero row or column?)"
        )));
    }
    Ok(())
}

/// One multiplicative update: `W` first, then `H` against the new `W`.
///
/// For `g ≡ 0` this is `W ← W ⊙ (X⊘WH)Hᵀ ⊘ 1Hᵀ`; the ℓ1 weight adds to the
/// denominator and the squared-Frobenius weight gives the positive root of
/// the regularized majorizer.
pub fn mu_step(p: &KlProblem, z: &FactorPair) -> Result<FactorPair> {
    p.check_factors(z)?;
    z.require_positive("mu_step")?;
    let reg = *p.reg();
    let mut w = z.w.clone();
    let h = &z.h;
    let r = z.rank();

    let rat = ratio(p.x(), &crate::matrix::matmul(&w, h)?)?;
    let num_w = matmul_nt(&rat, h)?;
    let h_sums = h.row_sums();
    update_block(&mut w, &num_w, |idx| h_sums[idx % r], reg.kind(), reg.mu_w(), "W")?;

    let mut h = h.clone();
    let rat = ratio(p.x(), &crate::matrix::matmul(&w, &h)?)?;
    let num_h = matmul_tn(&w, &rat)?;
    let w_sums = w.col_sums();
    let n = h.cols();
    update_block(&mut h, &num_h, |idx| w_sums[idx / n], reg.kind(), reg.mu_h(), "H")?;

    Ok(FactorPair { w, h })
}

/// MU at `Y = Z + β[Z − Z_prev]₊` with the same `θ` schedule as MMBPGe and
/// a distance-test restart.
pub fn mue_step(
    p: &KlProblem,
    z: &FactorPair,
    ext: &ExtrapolationState,
    rho: f64,
) -> Result<(FactorPair, ExtrapolationState)> {
    let (next, ext, _) = mue_step_inner(p, z, ext, rho, true)?;
    Ok((next, ext))
}

fn mue_step_inner(
    p: &KlProblem,
    z: &FactorPair,
    ext: &ExtrapolationState,
    rho: f64,
    extrapolate: bool,
) -> Result<(FactorPair, ExtrapolationState, (RestartReason, f64))> {
    z.require_positive("mue_step")?;
    ext.z_prev.check_same_shape(z)?;
    let mut ext = ext.clone();
    let (theta, mut beta) = ext.next_coefficients();
    if !extrapolate {
        beta = 0.0;
    }
    let mut restart = RestartReason::None;
    let y = if beta == 0.0 {
        ext.advance(theta);
        z.clone()
    } else {
        let y = z.zip_map(&ext.z_prev, |a, b| a + beta * (a - b).max(0.0))?;
        if bregman_unchecked(z, &y) > rho * ext.d_prev {
            restart = RestartReason::DistanceTest;
            ext.reset();
            beta = 0.0;
            z.clone()
        } else {
            ext.advance(theta);
            y
        }
    };
    let next = mu_step(p, &y)?;
    ext.d_prev = bregman_unchecked(z, &next);
    ext.z_prev = z.clone();
    Ok((next, ext, (restart, beta)))
}

pub struct Mu;

impl Mu {
    pub fn new() -> Self {
        Mu
    }
}

impl Default for Mu {
    fn default() -> Self {
        Self::new()
    }
}

impl Algorithm for Mu {
    fn name(&self) -> &str {
        "mu"
    }

    fn step(&mut self, problem: &KlProblem, z: &FactorPair) -> Result<(FactorPair, StepInfo)> {
        Ok((mu_step(problem, z)?, StepInfo::default()))
    }
}

pub struct Mue {
    rho: f64,
    extrapolate: bool,
    ext: Option<ExtrapolationState>,
}

impl Mue {
    pub fn new(rho: f64, extrapolate: bool) -> Result<Self> {
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::config("rho must lie in (0, 1]"));
        }
        Ok(Self {
            rho,
            extrapolate,
            ext: None,
        })
    }
}

impl Algorithm for Mue {
    fn name(&self) -> &str {
        "mue"
    }

    fn step(&mut self, problem: &KlProblem, z: &FactorPair) -> Result<(FactorPair, StepInfo)> {
        let ext = self.ext.take().unwrap_or_else(|| ExtrapolationState::new(z));
        let (next, ext, (restart, beta)) =
            mue_step_inner(problem, z, &ext, self.rho, self.extrapolate)?;
        self.ext = Some(ext);
        Ok((
            next,
            StepInfo {
                restart,
                beta: Some(beta),
                ..StepInfo::default()
            },
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{objective, Regularizer};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_pair(rng: &mut ChaCha8Rng, m: usize, n: usize, r: usize) -> FactorPair {
        FactorPair::new(
            DenseMatrix::from_fn(m, r, |_, _| rng.random_range(0.1..2.0)),
            DenseMatrix::from_fn(r, n, |_, _| rng.random_range(0.1..2.0)),
        )
        .unwrap()
    }

    #[test]
    fn exact_fit_is_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let z = random_pair(&mut rng, 5, 4, 2);
        let p = KlProblem::new(z.product(), 2, Regularizer::none()).unwrap();
        let next = mu_step(&p, &z).unwrap();
        for (a, b) in next.w.as_slice().iter().zip(z.w.as_slice()) {
            assert!((a - b).abs() <= 1e-14 * b.abs());
        }
        for (a, b) in next.h.as_slice().iter().zip(z.h.as_slice()) {
            assert!((a - b).abs() <= 1e-14 * b.abs());
        }
    }

    #[test]
    fn zero_row_loses_positivity() {
        let x = DenseMatrix::from_rows(&[[0.0, 0.0], [1.0, 2.0]]);
        let p = KlProblem::new(x, 1, Regularizer::none()).unwrap();
        let z = FactorPair::new(DenseMatrix::filled(2, 1, 1.0), DenseMatrix::filled(1, 2, 1.0))
            .unwrap();
        assert!(matches!(mu_step(&p, &z), Err(Error::Domain(_))));
    }

    #[test]
    fn mu_decreases_loss() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let x = DenseMatrix::from_fn(8, 7, |_, _| rng.random_range(0.0..3.0));
        let p = KlProblem::new(x, 3, Regularizer::none()).unwrap();
        let z = random_pair(&mut rng, 8, 7, 3);
        let before = objective(&p, &z).unwrap();
        let after = objective(&p, &mu_step(&p, &z).unwrap()).unwrap();
        assert!(after < before);
    }

    #[test]
    fn regularized_mu_decreases_objective() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let x = DenseMatrix::from_fn(6, 9, |_, _| rng.random_range(0.0..3.0));
        for reg in [
            Regularizer::l1(0.3, 0.2).unwrap(),
            Regularizer::squared_frobenius(0.5, 1.5).unwrap(),
        ] {
            let p = KlProblem::new(x.clone(), 2, reg).unwrap();
            let mut z = random_pair(&mut rng, 6, 9, 2);
            for _ in 0..20 {
                let next = mu_step(&p, &z).unwrap();
                let a = objective(&p, &z).unwrap();
                let b = objective(&p, &next).unwrap();
                assert!(b <= a + 1e-12 * a.abs(), "{reg:?}: {b} > {a}");
                z = next;
            }
        }
    }

    #[test]
    fn mue_first_step_is_mu() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let x = DenseMatrix::from_fn(4, 5, |_, _| rng.random_range(0.1..3.0));
        let p = KlProblem::new(x, 2, Regularizer::none()).unwrap();
        let z = random_pair(&mut rng, 4, 5, 2);
        let (a, _) = mue_step(&p, &z, &ExtrapolationState::new(&z), 0.999).unwrap();
        assert_eq!(a, mu_step(&p, &z).unwrap());
    }

    #[test]
    fn mue_with_equal_previous_point_is_mu() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let x = DenseMatrix::from_fn(4, 5, |_, _| rng.random_range(0.1..3.0));
        let p = KlProblem::new(x, 2, Regularizer::none()).unwrap();
        let z = random_pair(&mut rng, 4, 5, 2);
        let mut ext = ExtrapolationState::new(&z);
        ext.theta_curr = 4.0;
        ext.d_prev = 1.0;
        let (a, _) = mue_step(&p, &z, &ext, 0.999).unwrap();
        assert_eq!(a, mu_step(&p, &z).unwrap());
    }

    #[test]
    fn mue_clips_decreasing_coordinates() {
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        let x = DenseMatrix::from_fn(3, 3, |_, _| rng.random_range(0.1..3.0));
        let p = KlProblem::new(x, 1, Regularizer::none()).unwrap();
        let z = random_pair(&mut rng, 3, 3, 1);
        // Every coordinate decreased since the previous point, so the
        // clipped direction is zero and Y = Z.
        let mut ext = ExtrapolationState::new(&z);
        ext.z_prev = z.map(|v| v + 1.0);
        ext.theta_curr = 4.0;
        ext.d_prev = 1e9;
        let (a, _) = mue_step(&p, &z, &ext, 0.999).unwrap();
        assert_eq!(a, mu_step(&p, &z).unwrap());
    }
}
