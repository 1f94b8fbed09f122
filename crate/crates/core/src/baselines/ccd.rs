use crate::error::{Error, Result};
use crate::matrix::{matmul, DenseMatrix, FactorPair};
use crate::model::KlProblem;
use crate::registry::{Algorithm, StepInfo};

/// Coordinates never drop below this value.
pub(crate) const FLOOR: f64 = 1e-15;
/// Newton refinements per coordinate visit.
pub(crate) const NEWTON_REFINEMENTS: usize = 2;
/// A block sweep whose largest relative change is below this ends the
/// inner loop early.
const SWEEP_TOL: f64 = 1e-12;

/// Clipped Newton step `max(x − g/h, floor)` on a convex 1-D restriction.
#[inline]
pub(crate) fn newton_clipped(x: f64, g: f64, h: f64) -> f64 {
    if h > 0.0 {
        (x - g / h).max(FLOOR)
    } else if g > 0.0 {
        FLOOR
    } else {
        x
    }
}

/// One sweep of clipped Newton over every entry of `a` (laid out
/// `rows × r`) for the model `x ≈ a·b`, keeping `prod = a·b` current.
/// Returns the largest relative change.
fn sweep_rows(
    x: &DenseMatrix,
    a: &mut DenseMatrix,
    b: &DenseMatrix,
    prod: &mut DenseMatrix,
) -> f64 {
    let r = a.cols();
    let mut largest = 0.0f64;
    for i in 0..a.rows() {
        let x_row = x.row(i);
        for l in 0..r {
            let b_row = b.row(l);
            for _ in 0..NEWTON_REFINEMENTS {
                let p_row = prod.row(i);
                let mut g = 0.0;
                let mut h = 0.0;
                for ((&xv, &bv), &pv) in x_row.iter().zip(b_row).zip(p_row) {
                    g += bv * (1.0 - xv / pv);
                    h += xv * bv * bv / (pv * pv);
                }
                let old = a.get(i, l);
                let new = newton_clipped(old, g, h);
                let delta = new - old;
                if delta == 0.0 {
                    break;
                }
                a.set(i, l, new);
                for (pv, &bv) in prod.row_mut(i).iter_mut().zip(b_row) {
                    // Guard against cancellation pushing the product to 0.
                    *pv = (*pv + delta * bv).max(f64::MIN_POSITIVE);
                }
                largest = largest.max(delta.abs() / new);
            }
        }
    }
    largest
}

fn update_block(
    x: &DenseMatrix,
    a: &mut DenseMatrix,
    b: &DenseMatrix,
    prod: &mut DenseMatrix,
    inner_iters: usize,
) {
    for _ in 0..inner_iters {
        if sweep_rows(x, a, b, prod) <= SWEEP_TOL {
            break;
        }
    }
}

/// One CCD pass: `inner_iters` sweeps over the entries of `W`, then over the
/// entries of `H`. Each visit applies up to two clipped Newton steps to the
/// coordinate; a block stops early once a sweep no longer moves it.
pub fn ccd_pass(p: &KlProblem, z: &FactorPair, inner_iters: usize) -> Result<FactorPair> {
    ccd_pass_with(p, &p.x().transpose(), z, inner_iters)
}

fn ccd_pass_with(
    p: &KlProblem,
    xt: &DenseMatrix,
    z: &FactorPair,
    inner_iters: usize,
) -> Result<FactorPair> {
    p.check_factors(z)?;
    z.require_positive("ccd_pass")?;
    if !p.reg().is_none() {
        return Err(unsupported());
    }
    let mut w = z.w.clone();
    let mut prod = matmul(&w, &z.h)?;
    update_block(p.x(), &mut w, &z.h, &mut prod, inner_iters);

    // Same update on Xᵀ ≈ Hᵀ Wᵀ.
    let mut ht = z.h.transpose();
    let wt = w.transpose();
    let mut prod_t = prod.transpose();
    update_block(xt, &mut ht, &wt, &mut prod_t, inner_iters);

    Ok(FactorPair { w, h: ht.transpose() })
}

fn unsupported() -> Error {
    Error::Unsupported("ccd supports only the unregularized problem (reg = none)".into())
}

pub struct Ccd {
    inner_iters: usize,
    xt: DenseMatrix,
}

impl Ccd {
    pub fn new(p: &KlProblem, inner_iters: usize) -> Result<Self> {
        if !p.reg().is_none() {
            return Err(unsupported());
        }
        if inner_iters == 0 {
            return Err(Error::config("ccd inner iterations must be positive"));
        }
        Ok(Self {
            inner_iters,
            xt: p.x().transpose(),
        })
    }
}

impl Algorithm for Ccd {
    fn name(&self) -> &str {
        "ccd"
    }

    fn step(&mut self, problem: &KlProblem, z: &FactorPair) -> Result<(FactorPair, StepInfo)> {
        let next = ccd_pass_with(problem, &self.xt, z, self.inner_iters)?;
        Ok((next, StepInfo::default()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{objective, Regularizer};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn instance(seed: u64, m: usize, n: usize, r: usize) -> (KlProblem, FactorPair) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DenseMatrix::from_fn(m, n, |_, _| rng.random_range(0.0..3.0));
        let z = FactorPair::new(
            DenseMatrix::from_fn(m, r, |_, _| rng.random_range(0.1..2.0)),
            DenseMatrix::from_fn(r, n, |_, _| rng.random_range(0.1..2.0)),
        )
        .unwrap();
        (KlProblem::new(x, r, Regularizer::none()).unwrap(), z)
    }

    #[test]
    fn pass_decreases_objective() {
        let (p, mut z) = instance(41, 9, 7, 3);
        let mut prev = objective(&p, &z).unwrap();
        for _ in 0..15 {
            z = ccd_pass(&p, &z, 50).unwrap();
            assert!(z.is_strictly_positive());
            let cur = objective(&p, &z).unwrap();
            assert!(cur <= prev + 1e-10 * prev.abs(), "{cur} > {prev}");
            prev = cur;
        }
    }

    #[test]
    fn single_coordinate_reaches_stationarity() {
        // With r = 1 and H fixed, the optimal w_i is Σ_j X_ij / Σ_j H_j.
        let x = DenseMatrix::from_rows(&[[1.0, 3.0], [2.0, 2.0]]);
        let p = KlProblem::new(x.clone(), 1, Regularizer::none()).unwrap();
        let h = DenseMatrix::from_rows(&[[1.0, 1.0]]);
        let mut w = DenseMatrix::filled(2, 1, 0.7);
        let mut prod = matmul(&w, &h).unwrap();
        update_block(p.x(), &mut w, &h, &mut prod, 100);
        assert!((w.get(0, 0) - 2.0).abs() < 1e-10);
        assert!((w.get(1, 0) - 2.0).abs() < 1e-10);
    }

    #[test]
    fn incremental_product_matches_recomputed() {
        let (p, z) = instance(42, 6, 5, 2);
        let mut w = z.w.clone();
        let mut prod = z.product();
        update_block(p.x(), &mut w, &z.h, &mut prod, 20);
        let fresh = matmul(&w, &z.h).unwrap();
        for (a, b) in prod.as_slice().iter().zip(fresh.as_slice()) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn exact_fit_is_unchanged() {
        let (_, z) = instance(44, 5, 6, 2);
        let p = KlProblem::new(z.product(), 2, Regularizer::none()).unwrap();
        let next = ccd_pass(&p, &z, 3).unwrap();
        for (a, b) in next.w.as_slice().iter().zip(z.w.as_slice()) {
            assert!((a - b).abs() <= 1e-12 * b);
        }
    }

    #[test]
    fn scalar_problem_matches_two_newton_steps() {
        // m = n = r = 1: f(w, h) = wh − x log(wh) + const.
        let x = 3.0;
        let (w0, h0) = (0.4, 0.9);
        let p = KlProblem::new(DenseMatrix::filled(1, 1, x), 1, Regularizer::none()).unwrap();
        let z = FactorPair::new(DenseMatrix::filled(1, 1, w0), DenseMatrix::filled(1, 1, h0))
            .unwrap();
        let newton = |v: f64, c: f64| {
            let g = c - x / v;
            let h = x / (v * v);
            (v - g / h).max(FLOOR)
        };
        let w1 = newton(newton(w0, h0), h0);
        let h1 = newton(newton(h0, w1), w1);
        let next = ccd_pass(&p, &z, 1).unwrap();
        assert!((next.w.get(0, 0) - w1).abs() <= 1e-15 * w1);
        assert!((next.h.get(0, 0) - h1).abs() <= 1e-15 * h1);
    }

    #[test]
    fn regularized_problem_is_unsupported() {
        let (p, z) = instance(43, 4, 4, 2);
        let p = p.with_regularizer(Regularizer::squared_frobenius(0.1, 0.1).unwrap());
        assert!(matches!(ccd_pass(&p, &z, 10), Err(Error::Unsupported(_))));
        assert!(matches!(Ccd::new(&p, 10), Err(Error::Unsupported(_))));
    }
}
