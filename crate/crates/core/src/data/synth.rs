use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::matrix::{matmul, DenseMatrix, FactorPair};
use crate::model::{KlProblem, Regularizer};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub m: usize,
    pub n: usize,
    pub r: usize,
    /// Fraction of entries of `(W*, H*)` kept nonzero, in `(0, 1]`.
    pub sparsity: f64,
    pub seed: u64,
    /// Symmetric Dirichlet concentration for the rows of `H*`.
    pub dirichlet_alpha: f64,
}

impl SynthSpec {
    pub fn new(m: usize, n: usize, r: usize, seed: u64) -> Self {
        Self {
            m,
            n,
            r,
            sparsity: 1.0,
            seed,
            dirichlet_alpha: 1.0,
        }
    }

    pub fn with_sparsity(mut self, sparsity: f64) -> Self {
        self.sparsity = sparsity;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 || self.r == 0 {
            return Err(Error::config("m, n and r must be positive"));
        }
        if !(self.sparsity > 0.0 && self.sparsity <= 1.0) {
            return Err(Error::config("sparsity must lie in (0, 1]"));
        }
        if !(self.dirichlet_alpha > 0.0 && self.dirichlet_alpha.is_finite()) {
            return Err(Error::config("dirichlet_alpha must be positive"));
        }
        Ok(())
    }
}

/// Uniform draw on (0, 1): exact zeros are redrawn.
fn positive_uniform(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let v: f64 = rng.random();
        if v > 0.0 {
            return v;
        }
    }
}

fn dirichlet_row(rng: &mut ChaCha8Rng, gamma: &Gamma<f64>, out: &mut [f64]) -> Result<()> {
    // Resample in the (astronomically unlikely) event every draw underflows.
    for _ in 0..100 {
        for v in out.iter_mut() {
            *v = gamma.sample(rng);
        }
        let total: f64 = out.iter().sum();
        if total > 0.0 && total.is_finite() {
            out.iter_mut().for_each(|v| *v /= total);
            return Ok(());
        }
    }
    Err(Error::Generation("Dirichlet sampling kept underflowing".into()))
}

/// Keeps `ceil(s·len)` uniformly chosen entries of both factors and zeroes
/// the rest, then restores one entry in every row and column left empty.
fn sparsify(rng: &mut ChaCha8Rng, a: &mut DenseMatrix, s: f64) {
    let len = a.len();
    let keep = ((s * len as f64).ceil() as usize).clamp(1, len);
    let mut mask = vec![false; len];
    for idx in index::sample(rng, len, keep) {
        mask[idx] = true;
    }
    let original = a.clone();
    for (v, &k) in a.as_mut_slice().iter_mut().zip(&mask) {
        if !k {
            *v = 0.0;
        }
    }
    let (rows, cols) = a.shape();
    for i in 0..rows {
        if a.row(i).iter().all(|&v| v == 0.0) {
            let j = rng.random_range(0..cols);
            a.set(i, j, original.get(i, j));
        }
    }
    for j in 0..cols {
        if (0..rows).all(|i| a.get(i, j) == 0.0) {
            let i = rng.random_range(0..rows);
            a.set(i, j, original.get(i, j));
        }
    }
}

fn renormalize_rows(h: &mut DenseMatrix) {
    for i in 0..h.rows() {
        let row = h.row_mut(i);
        let total: f64 = row.iter().sum();
        if total > 0.0 {
            row.iter_mut().for_each(|v| *v /= total);
        }
    }
}

/// Draws `W* ~ U(0,1)` and Dirichlet rows for `H*`, optionally sparsified,
/// and returns the unregularized problem `X = W*H*` with the ground truth.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<(KlProblem, FactorPair)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut w = DenseMatrix::from_fn(spec.m, spec.r, |_, _| positive_uniform(&mut rng));
    let gamma = Gamma::new(spec.dirichlet_alpha, 1.0)
        .map_err(|e| Error::Generation(format!("Dirichlet concentration: {e}")))?;
    let mut h = DenseMatrix::zeros(spec.r, spec.n);
    for l in 0..spec.r {
        dirichlet_row(&mut rng, &gamma, h.row_mut(l))?;
    }
    if spec.sparsity < 1.0 {
        sparsify(&mut rng, &mut w, spec.sparsity);
        sparsify(&mut rng, &mut h, spec.sparsity);
        renormalize_rows(&mut h);
    }

    let x = matmul(&w, &h)?;
    let (m, n) = x.shape();
    if (0..m).any(|i| x.row(i).iter().all(|&v| v == 0.0))
        || (0..n).any(|j| (0..m).all(|i| x.get(i, j) == 0.0))
    {
        return Err(Error::Generation(
            "X has an all-zero row or column; increase sparsity".into(),
        ));
    }
    let truth = FactorPair::new(w, h)?;
    let problem = KlProblem::new(x, spec.r, Regularizer::none())?;
    Ok((problem, truth))
}

/// `α = √(ΣX / Σ(W⁰H⁰))`.
pub fn scaling_factor(x: &DenseMatrix, z: &FactorPair) -> Result<f64> {
    let mass = x.sum();
    if !(mass > 0.0) {
        return Err(Error::domain("X has zero total mass"));
    }
    let model = z.product().sum();
    if !(model > 0.0 && model.is_finite()) {
        return Err(Error::domain("initial product has no positive mass"));
    }
    Ok((mass / model).sqrt())
}

/// Seed for the initial point of the problem generated from `seed`. A
/// separate stream keeps `W⁰` from repeating `W*`.
pub fn derive_init_seed(seed: u64) -> u64 {
    seed ^ 0x9E37_79B9_7F4A_7C15
}

/// Random strictly positive `(W⁰, H⁰) ~ U(0,1)`, optionally multiplied by
/// [`scaling_factor`] so that `Σ(W⁰H⁰) = ΣX`.
pub fn initial_point(p: &KlProblem, seed: u64, scaled: bool) -> Result<FactorPair> {
    if !(p.x().sum() > 0.0) {
        return Err(Error::domain("X has zero total mass"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = DenseMatrix::from_fn(p.m(), p.rank(), |_, _| positive_uniform(&mut rng));
    let h = DenseMatrix::from_fn(p.rank(), p.n(), |_, _| positive_uniform(&mut rng));
    let z = FactorPair::new(w, h)?;
    if !scaled {
        return Ok(z);
    }
    let alpha = scaling_factor(p.x(), &z)?;
    Ok(z.scale(alpha))
}
