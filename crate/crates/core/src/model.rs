//! The KL-NMF problem: loss, regularizer, gradients, the Jensen majorizer
//! built at an anchor point, and the evaluation metrics.
//!
//! The majorizer weights `α_ilj = W_il H_lj / (WH)_ij` form an `m×r×n`
//! tensor. Every quantity the solvers need only touches its marginals
//!
//! ```text
//! S_W[i,l] = Σ_j α_ilj X_ij = W_il · ((X ⊘ WH) Hᵀ)_il
//! S_H[l,j] = Σ_i α_ilj X_ij = H_lj · (Wᵀ (X ⊘ WH))_lj
//! ```
//!
//! so the tensor is never formed.

use log::warn;

use crate::error::{Error, Result};
use crate::matrix::{matmul_nt, matmul_tn, DenseMatrix, FactorPair};

/// Smallest product entry accepted inside a logarithm or a ratio.
pub const POSITIVITY_FLOOR: f64 = 1e-300;

/// Denominators of the relative error at or below this are treated as zero.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegKind {
    None,
    L1,
    SquaredFrobenius,
}

impl RegKind {
    pub fn name(self) -> &'static str {
        match self {
            RegKind::None => "none",
            RegKind::L1 => "l1",
            RegKind::SquaredFrobenius => "fro",
        }
    }
}

impl std::str::FromStr for RegKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(RegKind::None),
            "l1" => Ok(RegKind::L1),
            "fro" | "frobenius" | "sqfro" => Ok(RegKind::SquaredFrobenius),
            other => Err(Error::config(format!("unknown regularizer `{other}`"))),
        }
    }
}

/// `g(W, H)`: none, `μ_W‖W‖₁ + μ_H‖H‖₁`, or `(μ_W/2)‖W‖²_F + (μ_H/2)‖H‖²_F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regularizer {
    kind: RegKind,
    mu_w: f64,
    mu_h: f64,
}

impl Default for Regularizer {
    fn default() -> Self {
        Self::none()
    }
}

impl Regularizer {
    pub fn new(kind: RegKind, mu_w: f64, mu_h: f64) -> Result<Self> {
        if !(mu_w >= 0.0 && mu_h >= 0.0 && mu_w.is_finite() && mu_h.is_finite()) {
            return Err(Error::config(format!(
                "regularization weights must be finite and nonnegative, got ({mu_w}, {mu_h})"
            )));
        }
        if kind == RegKind::None && (mu_w != 0.0 || mu_h != 0.0) {
            return Err(Error::config(
                "regularizer `none` requires mu_w = mu_h = 0",
            ));
        }
        Ok(Self { kind, mu_w, mu_h })
    }

    pub fn none() -> Self {
        Self {
            kind: RegKind::None,
            mu_w: 0.0,
            mu_h: 0.0,
        }
    }

    pub fn l1(mu_w: f64, mu_h: f64) -> Result<Self> {
        Self::new(RegKind::L1, mu_w, mu_h)
    }

    pub fn squared_frobenius(mu_w: f64, mu_h: f64) -> Result<Self> {
        Self::new(RegKind::SquaredFrobenius, mu_w, mu_h)
    }

    pub fn kind(&self) -> RegKind {
        self.kind
    }

    pub fn mu_w(&self) -> f64 {
        self.mu_w
    }

    pub fn mu_h(&self) -> f64 {
        self.mu_h
    }

    pub fn is_none(&self) -> bool {
        self.kind == RegKind::None
    }

    pub fn value(&self, z: &FactorPair) -> f64 {
        match self.kind {
            RegKind::None => 0.0,
            RegKind::L1 => {
                let l1 = |m: &DenseMatrix| m.as_slice().iter().map(|v| v.abs()).sum::<f64>();
                self.mu_w * l1(&z.w) + self.mu_h * l1(&z.h)
            }
            RegKind::SquaredFrobenius => {
                let sq = |m: &DenseMatrix| m.as_slice().iter().map(|v| v * v).sum::<f64>();
                0.5 * self.mu_w * sq(&z.w) + 0.5 * self.mu_h * sq(&z.h)
            }
        }
    }
}

/// Observed matrix `X ≥ 0`, inner dimension `r`, and regularizer.
#[derive(Debug, Clone)]
pub struct KlProblem {
    x: DenseMatrix,
    rank: usize,
    reg: Regularizer,
    // Σ_ij X log(n X / Σ_j X); zero-valued cells contribute nothing.
    rel_denominator: f64,
    // Σ_ij (X log X − X)
    entropy_term: f64,
}

impl KlProblem {
    pub fn new(x: DenseMatrix, rank: usize, reg: Regularizer) -> Result<Self> {
        if rank == 0 {
            return Err(Error::config("inner dimension r must be positive"));
        }
        if !x.is_nonnegative() {
            return Err(Error::domain("X must be entrywise nonnegative"));
        }
        if !x.as_slice().iter().any(|&v| v > 0.0) {
            return Err(Error::domain("X must have at least one positive entry"));
        }
        let (m, n) = x.shape();
        if rank > m.min(n) {
            warn!("inner dimension r = {rank} exceeds min(m, n) = {}", m.min(n));
        }
        let row_sums = x.row_sums();
        let mut rel_denominator = 0.0;
        let mut entropy_term = 0.0;
        for i in 0..m {
            for &v in x.row(i) {
                if v > 0.0 {
                    rel_denominator += v * (n as f64 * v / row_sums[i]).ln();
                    entropy_term += v * v.ln() - v;
                }
            }
        }
        Ok(Self {
            x,
            rank,
            reg,
            rel_denominator,
            entropy_term,
        })
    }

    pub fn x(&self) -> &DenseMatrix {
        &self.x
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn m(&self) -> usize {
        self.x.rows()
    }

    pub fn n(&self) -> usize {
        self.x.cols()
    }

    pub fn reg(&self) -> &Regularizer {
        &self.reg
    }

    pub fn with_regularizer(mut self, reg: Regularizer) -> Self {
        self.reg = reg;
        self
    }

    pub fn relative_error_denominator(&self) -> f64 {
        self.rel_denominator
    }

    pub(crate) fn check_factors(&self, z: &FactorPair) -> Result<()> {
        if z.m() != self.m() || z.n() != self.n() || z.rank() != self.rank {
            return Err(Error::dim(format!(
                "factors ({}x{}, {}x{}) do not fit X {}x{} with r = {}",
                z.w.rows(),
                z.w.cols(),
                z.h.rows(),
                z.h.cols(),
                self.m(),
                self.n(),
                self.rank
            )));
        }
        Ok(())
    }

    /// `Ψ(Z) = D(X, WH) + g(Z)`.
    pub fn objective(&self, z: &FactorPair) -> Result<f64> {
        objective(self, z)
    }
}

fn check_product(wh: &DenseMatrix) -> Result<()> {
    if let Some(pos) = wh.as_slice().iter().position(|&v| !(v >= POSITIVITY_FLOOR)) {
        return Err(Error::domain(format!(
            "product entry ({}, {}) = {:e} is not strictly positive",
            pos / wh.cols(),
            pos % wh.cols(),
            wh.as_slice()[pos]
        )));
    }
    Ok(())
}

/// `D(X, WH) = Σ_ij (X log(X/WH) − X + WH)` with `0·log 0 = 0`.
pub fn kl_divergence(x: &DenseMatrix, wh: &DenseMatrix) -> Result<f64> {
    x.check_same_shape(wh, "kl_divergence")?;
    check_product(wh)?;
    if !x.is_nonnegative() {
        return Err(Error::domain("X must be entrywise nonnegative"));
    }
    let total = x
        .as_slice()
        .iter()
        .zip(wh.as_slice())
        .map(|(&xv, &p)| {
            if xv > 0.0 {
                xv * (xv / p).ln() - xv + p
            } else {
                p
            }
        })
        .sum::<f64>();
    if !total.is_finite() {
        return Err(Error::NonFinite("kl_divergence"));
    }
    Ok(total.max(0.0))
}

pub fn objective(p: &KlProblem, z: &FactorPair) -> Result<f64> {
    p.check_factors(z)?;
    let wh = z.product();
    Ok(kl_divergence(p.x(), &wh)? + p.reg().value(z))
}

/// `X ⊘ WH`, with a literal 0 wherever `X` is 0.
pub(crate) fn ratio(x: &DenseMatrix, wh: &DenseMatrix) -> Result<DenseMatrix> {
    check_product(wh)?;
    x.zip_map(wh, |xv, p| if xv > 0.0 { xv / p } else { 0.0 })
}

/// Gradients of the loss from a precomputed ratio `R = X ⊘ WH`:
/// `∇_W f = 1·Hᵀ − R Hᵀ`, `∇_H f = Wᵀ·1 − Wᵀ R`.
pub(crate) fn grad_from_ratio(
    z: &FactorPair,
    r: &DenseMatrix,
) -> Result<(DenseMatrix, DenseMatrix)> {
    let h_row_sums = z.h.row_sums();
    let w_col_sums = z.w.col_sums();
    let mut gw = matmul_nt(r, &z.h)?;
    for i in 0..gw.rows() {
        for (g, s) in gw.row_mut(i).iter_mut().zip(&h_row_sums) {
            *g = s - *g;
        }
    }
    let mut gh = matmul_tn(&z.w, r)?;
    for l in 0..gh.rows() {
        let s = w_col_sums[l];
        for g in gh.row_mut(l) {
            *g = s - *g;
        }
    }
    Ok((gw, gh))
}

/// `(∇_W f, ∇_H f)` of the KL loss (no regularizer).
pub fn grad_f(p: &KlProblem, z: &FactorPair) -> Result<(DenseMatrix, DenseMatrix)> {
    p.check_factors(z)?;
    let r = ratio(p.x(), &z.product())?;
    grad_from_ratio(z, &r)
}

/// Majorization coefficients and smooth-adaptable constants built at an
/// anchor `Z^k`. Immutable once constructed.
#[derive(Debug, Clone)]
pub struct MajorizerState {
    pub s_w: DenseMatrix,
    pub s_h: DenseMatrix,
    /// `max{max S_W, max S_H, m, n}`: the joint-step constant.
    pub l_joint: f64,
    /// `max{max S_W, m, n}`: W-block constant for split steps.
    pub l_w: f64,
    /// `max{max S_H, m, n}`: H-block constant for split steps.
    pub l_h: f64,
    pub anchor: FactorPair,
    anchor_product: DenseMatrix,
    anchor_ratio: DenseMatrix,
}

impl MajorizerState {
    /// `W^k H^k`, kept for evaluating the loss at the anchor.
    pub fn anchor_product(&self) -> &DenseMatrix {
        &self.anchor_product
    }

    /// `∇f(Z^k)`, which equals `∇f̂_k(Z^k)`.
    pub fn anchor_gradient(&self) -> Result<(DenseMatrix, DenseMatrix)> {
        grad_from_ratio(&self.anchor, &self.anchor_ratio)
    }

    /// Loss at the anchor, `f(Z^k) = f̂_k(Z^k)`.
    pub fn anchor_loss(&self, p: &KlProblem) -> Result<f64> {
        kl_divergence(p.x(), &self.anchor_product)
    }

    pub(crate) fn check_point(&self, y: &FactorPair) -> Result<()> {
        self.anchor.check_same_shape(y)?;
        y.require_positive("majorizer point")
    }
}

pub fn build_majorizer(p: &KlProblem, anchor: &FactorPair) -> Result<MajorizerState> {
    p.check_factors(anchor)?;
    anchor.require_positive("majorizer anchor")?;
    let wh = anchor.product();
    let r = ratio(p.x(), &wh)?;
    let mut s_w = matmul_nt(&r, &anchor.h)?;
    for (s, w) in s_w.as_mut_slice().iter_mut().zip(anchor.w.as_slice()) {
        *s *= w;
    }
    let mut s_h = matmul_tn(&anchor.w, &r)?;
    for (s, h) in s_h.as_mut_slice().iter_mut().zip(anchor.h.as_slice()) {
        *s *= h;
    }
    let floor = p.m().max(p.n()) as f64;
    let max_w = s_w.max();
    let max_h = s_h.max();
    let l_w = max_w.max(floor);
    let l_h = max_h.max(floor);
    Ok(MajorizerState {
        s_w,
        s_h,
        l_joint: l_w.max(l_h),
        l_w,
        l_h,
        anchor: anchor.clone(),
        anchor_product: wh,
        anchor_ratio: r,
    })
}

/// `∇f̂_k(Y)`: `(−S_W/Y.W + 1·Y.Hᵀ, −S_H/Y.H + Y.Wᵀ·1)`.
pub fn grad_majorizer(
    s: &MajorizerState,
    y: &FactorPair,
) -> Result<(DenseMatrix, DenseMatrix)> {
    s.check_point(y)?;
    Ok(grad_majorizer_unchecked(s, y))
}

pub(crate) fn grad_majorizer_unchecked(
    s: &MajorizerState,
    y: &FactorPair,
) -> (DenseMatrix, DenseMatrix) {
    let h_row_sums = y.h.row_sums();
    let w_col_sums = y.w.col_sums();
    let r = y.rank();
    let mut gw = s.s_w.clone();
    for (idx, (g, &wv)) in gw
        .as_mut_slice()
        .iter_mut()
        .zip(y.w.as_slice())
        .enumerate()
    {
        *g = -*g / wv + h_row_sums[idx % r];
    }
    let mut gh = s.s_h.clone();
    let n = y.n();
    for (idx, (g, &hv)) in gh
        .as_mut_slice()
        .iter_mut()
        .zip(y.h.as_slice())
        .enumerate()
    {
        *g = -*g / hv + w_col_sums[idx / n];
    }
    (gw, gh)
}

/// `f̂_k(Y)`, assembled from the marginals:
///
/// ```text
/// f̂_k(Y) = C_k − Σ S_W log Y.W − Σ S_H log Y.H + Σ (Y.W Y.H)
/// C_k    = Σ (X log X − X) + Σ S_W log W^k + Σ S_H log H^k − Σ X log(W^k H^k)
/// ```
///
/// where the last three terms of `C_k` are `Σ_ijl X α log α` expanded.
pub fn majorizer_value(s: &MajorizerState, p: &KlProblem, y: &FactorPair) -> Result<f64> {
    s.check_point(y)?;
    let slog = |sm: &DenseMatrix, v: &DenseMatrix| {
        sm.as_slice()
            .iter()
            .zip(v.as_slice())
            .map(|(&a, &b)| if a > 0.0 { a * b.ln() } else { 0.0 })
            .sum::<f64>()
    };
    let x_log_anchor: f64 = p
        .x()
        .as_slice()
        .iter()
        .zip(s.anchor_product.as_slice())
        .map(|(&xv, &q)| if xv > 0.0 { xv * q.ln() } else { 0.0 })
        .sum();
    let const_k = p.entropy_term + slog(&s.s_w, &s.anchor.w) + slog(&s.s_h, &s.anchor.h)
        - x_log_anchor;
    let linear = y.product().sum();
    let value = const_k - slog(&s.s_w, &y.w) - slog(&s.s_h, &y.h) + linear;
    if !value.is_finite() {
        return Err(Error::NonFinite("majorizer_value"));
    }
    Ok(value)
}

/// `f(Z) / Σ_ij X log(n X / Σ_j X)`.
pub fn relative_error(p: &KlProblem, z: &FactorPair) -> Result<f64> {
    let denom = p.rel_denominator;
    if denom <= DEGENERATE_DENOMINATOR {
        return Err(Error::DegenerateDenominator(denom));
    }
    p.check_factors(z)?;
    Ok(kl_divergence(p.x(), &z.product())? / denom)
}

/// Loss value divided by the relative-error denominator; `None` when the
/// denominator is degenerate.
pub(crate) fn relative_from_loss(p: &KlProblem, loss: f64) -> Option<f64> {
    (p.rel_denominator > DEGENERATE_DENOMINATOR).then(|| loss / p.rel_denominator)
}

/// Norms of the column-normalized `W ⊙ ∇_W f` and row-normalized
/// `H ⊙ ∇_H f`. Normalization uses Euclidean norms.
pub fn kkt_residuals(p: &KlProblem, z: &FactorPair) -> Result<(f64, f64)> {
    let (gw, gh) = grad_f(p, z)?;
    kkt_from_gradient(z, &gw, &gh)
}

pub(crate) fn kkt_from_gradient(
    z: &FactorPair,
    gw: &DenseMatrix,
    gh: &DenseMatrix,
) -> Result<(f64, f64)> {
    let r = z.rank();
    let mut col_norms = vec![0.0; r];
    for i in 0..z.w.rows() {
        for (acc, v) in col_norms.iter_mut().zip(z.w.row(i)) {
            *acc += v * v;
        }
    }
    let row_norms: Vec<f64> = (0..r)
        .map(|l| z.h.row(l).iter().map(|v| v * v).sum::<f64>())
        .collect();
    if let Some(l) = col_norms.iter().position(|&v| v == 0.0) {
        return Err(Error::domain(format!("column {l} of W is zero")));
    }
    if let Some(l) = row_norms.iter().position(|&v| v == 0.0) {
        return Err(Error::domain(format!("row {l} of H is zero")));
    }
    let col_norms: Vec<f64> = col_norms.into_iter().map(f64::sqrt).collect();
    let row_norms: Vec<f64> = row_norms.into_iter().map(f64::sqrt).collect();

    let mut kw = 0.0;
    for (idx, (&wv, &g)) in z.w.as_slice().iter().zip(gw.as_slice()).enumerate() {
        let t = wv / col_norms[idx % r] * g;
        kw += t * t;
    }
    let n = z.n();
    let mut kh = 0.0;
    for (idx, (&hv, &g)) in z.h.as_slice().iter().zip(gh.as_slice()).enumerate() {
        let t = hv / row_norms[idx / n] * g;
        kh += t * t;
    }
    Ok((kw.sqrt(), kh.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::matmul;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn positive(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
        DenseMatrix::from_fn(rows, cols, |_, _| rng.random_range(0.2..2.0))
    }

    fn instance(seed: u64, m: usize, n: usize, r: usize) -> (KlProblem, FactorPair) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DenseMatrix::from_fn(m, n, |_, _| {
            if rng.random_bool(0.15) {
                0.0
            } else {
                rng.random_range(0.0..3.0)
            }
        });
        let z = FactorPair::new(positive(&mut rng, m, r), positive(&mut rng, r, n)).unwrap();
        (KlProblem::new(x, r, Regularizer::none()).unwrap(), z)
    }

    // Explicit α-tensor oracle, only for tiny sizes.
    fn alpha(anchor: &FactorPair, i: usize, l: usize, j: usize) -> f64 {
        let denom: f64 = (0..anchor.rank())
            .map(|q| anchor.w.get(i, q) * anchor.h.get(q, j))
            .sum();
        anchor.w.get(i, l) * anchor.h.get(l, j) / denom
    }

    fn majorizer_oracle(p: &KlProblem, anchor: &FactorPair, y: &FactorPair) -> f64 {
        let x = p.x();
        let mut total = 0.0;
        for i in 0..p.m() {
            for j in 0..p.n() {
                let xv = x.get(i, j);
                let mut prod = 0.0;
                let mut jensen = 0.0;
                for l in 0..p.rank() {
                    let a = alpha(anchor, i, l, j);
                    let t = y.w.get(i, l) * y.h.get(l, j);
                    prod += t;
                    jensen += a * (t / a).ln();
                }
                let xlogx = if xv > 0.0 { xv * xv.ln() } else { 0.0 };
                total += xlogx - xv * jensen - xv + prod;
            }
        }
        total
    }

    #[test]
    fn kl_divergence_cases() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.5], [0.3, 4.0]]);
        assert_eq!(kl_divergence(&a, &a).unwrap(), 0.0);
        let zero = DenseMatrix::from_rows(&[[0.0]]);
        let two = DenseMatrix::from_rows(&[[2.0]]);
        assert_eq!(kl_divergence(&zero, &two).unwrap(), 2.0);
        let one = DenseMatrix::from_rows(&[[1.0]]);
        let v = kl_divergence(&two, &one).unwrap();
        assert!((v - (2.0 * 2f64.ln() - 1.0)).abs() < 1e-15);
        assert!((v - 0.386294).abs() < 1e-6);
        assert!(matches!(kl_divergence(&one, &zero), Err(Error::Domain(_))));
    }

    #[test]
    fn objective_cases() {
        let w = DenseMatrix::from_rows(&[[1.0]]);
        let h = DenseMatrix::from_rows(&[[1.0]]);
        let z = FactorPair::new(w, h).unwrap();
        let x = DenseMatrix::from_rows(&[[1.0]]);
        let p = KlProblem::new(x.clone(), 1, Regularizer::none()).unwrap();
        assert_eq!(objective(&p, &z).unwrap(), 0.0);
        let p = KlProblem::new(x, 1, Regularizer::l1(1.0, 1.0).unwrap()).unwrap();
        assert_eq!(objective(&p, &z).unwrap(), 2.0);
    }

    #[test]
    fn objective_matches_scalar_loop() {
        let (p, z) = instance(11, 6, 5, 3);
        let p = p.with_regularizer(Regularizer::squared_frobenius(0.3, 0.7).unwrap());
        let mut oracle = 0.0;
        for i in 0..6 {
            for j in 0..5 {
                let q: f64 = (0..3).map(|l| z.w.get(i, l) * z.h.get(l, j)).sum();
                let xv = p.x().get(i, j);
                oracle += if xv > 0.0 { xv * (xv / q).ln() } else { 0.0 } - xv + q;
            }
        }
        for v in z.w.as_slice() {
            oracle += 0.15 * v * v;
        }
        for v in z.h.as_slice() {
            oracle += 0.35 * v * v;
        }
        let got = objective(&p, &z).unwrap();
        assert!((got - oracle).abs() <= 1e-12 * oracle.abs().max(1.0));
    }

    #[test]
    fn regularizer_none_forces_zero_weights() {
        assert!(Regularizer::new(RegKind::None, 1.0, 0.0).is_err());
        assert!(Regularizer::l1(-1.0, 0.0).is_err());
    }

    #[test]
    fn problem_rejects_bad_x() {
        assert!(KlProblem::new(DenseMatrix::zeros(2, 2), 1, Regularizer::none()).is_err());
        let neg = DenseMatrix::from_rows(&[[1.0, -1.0]]);
        assert!(KlProblem::new(neg, 1, Regularizer::none()).is_err());
        let x = DenseMatrix::from_rows(&[[1.0]]);
        assert!(KlProblem::new(x.clone(), 0, Regularizer::none()).is_err());
        // r > min(m, n) only warns
        assert!(KlProblem::new(x, 3, Regularizer::none()).is_ok());
    }

    #[test]
    fn gradient_vanishes_at_exact_fit() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let z = FactorPair::new(positive(&mut rng, 4, 2), positive(&mut rng, 2, 3)).unwrap();
        let p = KlProblem::new(z.product(), 2, Regularizer::none()).unwrap();
        let (gw, gh) = grad_f(&p, &z).unwrap();
        assert!(gw.as_slice().iter().all(|v| v.abs() < 1e-13));
        assert!(gh.as_slice().iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn gradient_with_zero_x_is_linear_term() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let z = FactorPair::new(positive(&mut rng, 3, 2), positive(&mut rng, 2, 4)).unwrap();
        let r = DenseMatrix::zeros(3, 4);
        let (gw, _) = grad_from_ratio(&z, &r).unwrap();
        let sums = z.h.row_sums();
        for i in 0..3 {
            for l in 0..2 {
                assert_eq!(gw.get(i, l), sums[l]);
            }
        }
    }

    #[test]
    fn majorizer_zero_x() {
        // X = 0 is not a valid problem, so exercise the marginals directly.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let z = FactorPair::new(positive(&mut rng, 3, 2), positive(&mut rng, 2, 5)).unwrap();
        let mut x = DenseMatrix::zeros(3, 5);
        x.set(0, 0, 1e-30);
        let p = KlProblem::new(x, 2, Regularizer::none()).unwrap();
        let s = build_majorizer(&p, &z).unwrap();
        assert!(s.s_w.max() < 1e-29 && s.s_h.max() < 1e-29);
        assert_eq!(s.l_joint, 5.0);
    }

    #[test]
    fn majorizer_hand_example() {
        let w = DenseMatrix::from_rows(&[[1.0, 1.0]]);
        let h = DenseMatrix::from_rows(&[[1.0], [3.0]]);
        let z = FactorPair::new(w, h).unwrap();
        let p = KlProblem::new(DenseMatrix::from_rows(&[[4.0]]), 2, Regularizer::none()).unwrap();
        let s = build_majorizer(&p, &z).unwrap();
        assert_eq!(s.s_w.as_slice(), &[1.0, 3.0]);
        assert_eq!(s.s_h.as_slice(), &[1.0, 3.0]);
        assert_eq!(s.l_joint, 3.0);
        assert_eq!(s.l_w, 3.0);
        assert_eq!(s.l_h, 3.0);
    }

    #[test]
    fn rank_one_marginals_are_row_and_column_sums() {
        let (p, _) = instance(4, 4, 6, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let z = FactorPair::new(positive(&mut rng, 4, 1), positive(&mut rng, 1, 6)).unwrap();
        let s = build_majorizer(&p, &z).unwrap();
        for (a, b) in s.s_w.as_slice().iter().zip(p.x().row_sums()) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in s.s_h.as_slice().iter().zip(p.x().col_sums()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn marginals_match_alpha_tensor() {
        for seed in 0..5 {
            let (p, z) = instance(100 + seed, 4, 5, 3);
            let s = build_majorizer(&p, &z).unwrap();
            for i in 0..4 {
                for l in 0..3 {
                    let o: f64 = (0..5).map(|j| alpha(&z, i, l, j) * p.x().get(i, j)).sum();
                    assert!((s.s_w.get(i, l) - o).abs() <= 1e-12);
                }
            }
            for l in 0..3 {
                for j in 0..5 {
                    let o: f64 = (0..4).map(|i| alpha(&z, i, l, j) * p.x().get(i, j)).sum();
                    assert!((s.s_h.get(l, j) - o).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn majorizer_value_matches_tensor_oracle() {
        let (p, anchor) = instance(7, 5, 4, 3);
        let (_, y) = instance(8, 5, 4, 3);
        let s = build_majorizer(&p, &anchor).unwrap();
        let got = majorizer_value(&s, &p, &y).unwrap();
        let oracle = majorizer_oracle(&p, &anchor, &y);
        assert!((got - oracle).abs() <= 1e-11 * oracle.abs().max(1.0), "{got} vs {oracle}");
    }

    #[test]
    fn majorizer_touches_and_bounds() {
        let (p, anchor) = instance(9, 6, 7, 2);
        let s = build_majorizer(&p, &anchor).unwrap();
        let f0 = objective(&p, &anchor).unwrap();
        let at = majorizer_value(&s, &p, &anchor).unwrap();
        assert!((at - f0).abs() <= 1e-10 * f0.abs());
        assert!((s.anchor_loss(&p).unwrap() - f0).abs() <= 1e-12 * f0);
        for seed in 0..10 {
            let (_, y) = instance(200 + seed, 6, 7, 2);
            let fy = objective(&p, &y).unwrap();
            assert!(majorizer_value(&s, &p, &y).unwrap() >= fy - 1e-10 * fy.abs());
        }
    }

    #[test]
    fn majorizer_gradient_is_tangent() {
        let (p, anchor) = instance(12, 5, 6, 3);
        let s = build_majorizer(&p, &anchor).unwrap();
        let (gw, gh) = grad_majorizer(&s, &anchor).unwrap();
        let (fw, fh) = grad_f(&p, &anchor).unwrap();
        for (a, b) in gw.as_slice().iter().zip(fw.as_slice()) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
        for (a, b) in gh.as_slice().iter().zip(fh.as_slice()) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
        let (aw, ah) = s.anchor_gradient().unwrap();
        assert_eq!(aw, fw);
        assert_eq!(ah, fh);
    }

    #[test]
    fn majorizer_gradient_rejects_nonpositive_point() {
        let (p, anchor) = instance(13, 3, 3, 2);
        let s = build_majorizer(&p, &anchor).unwrap();
        let mut y = anchor.clone();
        y.w.set(0, 0, 0.0);
        assert!(matches!(grad_majorizer(&s, &y), Err(Error::Domain(_))));
    }

    #[test]
    fn grad_majorizer_with_zero_marginals() {
        let (p, anchor) = instance(14, 3, 4, 2);
        let mut s = build_majorizer(&p, &anchor).unwrap();
        s.s_w = DenseMatrix::zeros(3, 2);
        s.s_h = DenseMatrix::zeros(2, 4);
        let (gw, gh) = grad_majorizer(&s, &anchor).unwrap();
        let hs = anchor.h.row_sums();
        let ws = anchor.w.col_sums();
        for i in 0..3 {
            for l in 0..2 {
                assert_eq!(gw.get(i, l), hs[l]);
            }
        }
        for l in 0..2 {
            for j in 0..4 {
                assert_eq!(gh.get(l, j), ws[l]);
            }
        }
    }

    #[test]
    fn relative_error_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let z = FactorPair::new(positive(&mut rng, 4, 2), positive(&mut rng, 2, 5)).unwrap();
        let p = KlProblem::new(z.product(), 2, Regularizer::none()).unwrap();
        assert!(relative_error(&p, &z).unwrap().abs() < 1e-14);

        let constant_rows = DenseMatrix::from_fn(3, 4, |i, _| (i + 1) as f64);
        let p = KlProblem::new(constant_rows, 1, Regularizer::none()).unwrap();
        let z1 = FactorPair::new(DenseMatrix::filled(3, 1, 1.0), DenseMatrix::filled(1, 4, 1.0))
            .unwrap();
        assert!(matches!(
            relative_error(&p, &z1),
            Err(Error::DegenerateDenominator(_))
        ));
    }

    #[test]
    fn relative_error_matches_scalar_loop() {
        let (p, z) = instance(16, 5, 6, 2);
        let x = p.x();
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..5 {
            let rs: f64 = (0..6).map(|j| x.get(i, j)).sum();
            for j in 0..6 {
                let xv = x.get(i, j);
                let q: f64 = (0..2).map(|l| z.w.get(i, l) * z.h.get(l, j)).sum();
                if xv > 0.0 {
                    num += xv * (xv / q).ln();
                    den += xv * (6.0 * xv / rs).ln();
                }
                num += q - xv;
            }
        }
        assert!((p.relative_error_denominator() - den).abs() <= 1e-12 * den.abs());
        let got = relative_error(&p, &z).unwrap();
        assert!((got - num / den).abs() <= 1e-12 * (num / den).abs());
    }

    #[test]
    fn kkt_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let z = FactorPair::new(positive(&mut rng, 4, 3), positive(&mut rng, 3, 5)).unwrap();
        let p = KlProblem::new(z.product(), 3, Regularizer::none()).unwrap();
        let (a, b) = kkt_residuals(&p, &z).unwrap();
        assert!(a < 1e-12 && b < 1e-12);

        let (p, z) = instance(18, 4, 5, 2);
        let (gw, gh) = grad_f(&p, &z).unwrap();
        let mut kw = 0.0;
        for l in 0..2 {
            let norm: f64 = (0..4).map(|i| z.w.get(i, l).powi(2)).sum::<f64>().sqrt();
            for i in 0..4 {
                kw += (z.w.get(i, l) / norm * gw.get(i, l)).powi(2);
            }
        }
        let mut kh = 0.0;
        for l in 0..2 {
            let norm: f64 = (0..5).map(|j| z.h.get(l, j).powi(2)).sum::<f64>().sqrt();
            for j in 0..5 {
                kh += (z.h.get(l, j) / norm * gh.get(l, j)).powi(2);
            }
        }
        let (a, b) = kkt_residuals(&p, &z).unwrap();
        assert!((a - kw.sqrt()).abs() <= 1e-12 * kw.sqrt());
        assert!((b - kh.sqrt()).abs() <= 1e-12 * kh.sqrt());

        // Scaling a column leaves its normalized direction intact; the
        // residual then differs only through the gradient.
        let mut scaled = z.clone();
        for i in 0..4 {
            scaled.w.set(i, 0, 3.0 * z.w.get(i, 0));
        }
        let (gw2, _) = grad_f(&p, &scaled).unwrap();
        let (a2, _) = kkt_residuals(&p, &scaled).unwrap();
        let mut kw2 = 0.0;
        for l in 0..2 {
            let norm: f64 = (0..4).map(|i| z.w.get(i, l).powi(2)).sum::<f64>().sqrt();
            for i in 0..4 {
                kw2 += (z.w.get(i, l) / norm * gw2.get(i, l)).powi(2);
            }
        }
        assert!((a2 - kw2.sqrt()).abs() <= 1e-12 * kw2.sqrt());
    }

    #[test]
    fn kkt_zero_column_is_error() {
        let z = FactorPair::new(
            DenseMatrix::from_rows(&[[0.0, 1.0]]),
            DenseMatrix::from_rows(&[[1.0], [1.0]]),
        )
        .unwrap();
        let gw = DenseMatrix::zeros(1, 2);
        let gh = DenseMatrix::zeros(2, 1);
        assert!(kkt_from_gradient(&z, &gw, &gh).is_err());
    }

    #[test]
    fn grad_f_matches_product_rule() {
        let (p, z) = instance(19, 3, 4, 2);
        let wh = matmul(&z.w, &z.h).unwrap();
        let (gw, _) = grad_f(&p, &z).unwrap();
        for i in 0..3 {
            for l in 0..2 {
                let o: f64 = (0..4)
                    .map(|j| z.h.get(l, j) * (1.0 - p.x().get(i, j) / wh.get(i, j)))
                    .sum();
                assert!((gw.get(i, l) - o).abs() < 1e-12);
            }
        }
    }
}
