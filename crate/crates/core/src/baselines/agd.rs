use crate::error::{Error, Result};
use crate::matrix::{matmul, matmul_nt, matmul_tn, DenseMatrix, FactorPair};
use crate::model::{build_majorizer, kl_divergence, ratio, KlProblem, RegKind, Regularizer};
use crate::registry::{Algorithm, StepInfo};

use super::BaselineConfig;

/// Entries are projected onto `[FLOOR, ∞)`.
const FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    W,
    H,
}

/// Outcome of one backtracking step on a single block.
#[derive(Debug, Clone)]
pub struct BlockStep {
    pub z: FactorPair,
    /// Step size that was accepted (or the last one tried on failure).
    pub step: f64,
    pub backtracks: usize,
    pub accepted: bool,
}

fn block_objective(p: &KlProblem, z: &FactorPair) -> Option<f64> {
    let wh = matmul(&z.w, &z.h).ok()?;
    let v = kl_divergence(p.x(), &wh).ok()? + p.reg().value(z);
    v.is_finite().then_some(v)
}

/// Proximal map of `t·g` restricted to one block, followed by the floor.
fn prox_block(reg: &Regularizer, block: Block, x: f64, grad: f64, t: f64) -> f64 {
    let mu = match block {
        Block::W => reg.mu_w(),
        Block::H => reg.mu_h(),
    };
    let v = match reg.kind() {
        RegKind::None => x - t * grad,
        RegKind::L1 => x - t * grad - t * mu,
        RegKind::SquaredFrobenius => (x - t * grad) / (1.0 + t * mu),
    };
    v.max(FLOOR)
}

/// Backtracking proximal gradient step on one block of `z`, starting from
/// step `t`. A trial `x⁺` is accepted when
/// `F(x⁺) ≤ F(x) − (σ/t)·‖x⁺ − x‖²`.
pub fn agd_block_step(
    p: &KlProblem,
    z: &FactorPair,
    block: Block,
    t: f64,
    cfg: &BaselineConfig,
) -> Result<BlockStep> {
    p.check_factors(z)?;
    z.require_positive("agd_step")?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::config("AGD step size must be positive"));
    }
    let f0 = block_objective(p, z).ok_or(Error::NonFinite("AGD objective"))?;
    let r = ratio(p.x(), &z.product())?;
    // ∇_W f = (1 − R)Hᵀ = 1Hᵀ − RHᵀ and likewise for H.
    let grad = match block {
        Block::W => {
            let rh = matmul_nt(&r, &z.h)?;
            let hs = z.h.row_sums();
            let rank = z.rank();
            DenseMatrix::from_fn(z.m(), rank, |i, l| hs[l] - rh.get(i, l))
        }
        Block::H => {
            let wr = matmul_tn(&z.w, &r)?;
            let ws = z.w.col_sums();
            DenseMatrix::from_fn(z.rank(), z.n(), |l, j| ws[l] - wr.get(l, j))
        }
    };
    let current = match block {
        Block::W => &z.w,
        Block::H => &z.h,
    };

    let mut t = t;
    let mut trial = z.clone();
    for backtracks in 0..=cfg.agd_max_backtracks {
        let next = current.zip_map(&grad, |x, g| prox_block(p.reg(), block, x, g, t))?;
        let moved: f64 = next
            .as_slice()
            .iter()
            .zip(current.as_slice())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        match block {
            Block::W => trial.w = next,
            Block::H => trial.h = next,
        }
        if moved == 0.0 {
            return Ok(BlockStep {
                z: trial,
                step: t,
                backtracks,
                accepted: true,
            });
        }
        if let Some(f1) = block_objective(p, &trial) {
            if f1 <= f0 - cfg.agd_sufficient_decrease / t * moved {
                return Ok(BlockStep {
                    z: trial,
                    step: t,
                    backtracks,
                    accepted: true,
                });
            }
        }
        if backtracks < cfg.agd_max_backtracks {
            t *= cfg.agd_shrink;
        }
    }
    Ok(BlockStep {
        z: z.clone(),
        step: t,
        backtracks: cfg.agd_max_backtracks,
        accepted: false,
    })
}

/// One AGD iteration: a backtracking step on `W`, then on `H`. Returns the
/// new point, the accepted step sizes, and whether both line searches
/// succeeded. On failure the input point is returned unchanged.
pub fn agd_step(
    p: &KlProblem,
    z: &FactorPair,
    steps: (f64, f64),
    cfg: &BaselineConfig,
) -> Result<(FactorPair, (f64, f64), bool)> {
    let sw = agd_block_step(p, z, Block::W, steps.0, cfg)?;
    if !sw.accepted {
        return Ok((z.clone(), (sw.step, steps.1), false));
    }
    let sh = agd_block_step(p, &sw.z, Block::H, steps.1, cfg)?;
    if !sh.accepted {
        return Ok((z.clone(), (sw.step, sh.step), false));
    }
    Ok((sh.z, (sw.step, sh.step), true))
}

/// Initial AGD step `1/(c·L₀)` from the smad constant at `z0`.
pub fn agd_initial_step(p: &KlProblem, z0: &FactorPair, c: f64) -> Result<f64> {
    let s = build_majorizer(p, z0)?;
    Ok(1.0 / (c * s.l_joint))
}

pub struct Agd {
    cfg: BaselineConfig,
    steps: Option<(f64, f64)>,
}

impl Agd {
    pub fn new(cfg: &BaselineConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg: cfg.clone(),
            steps: None,
        })
    }
}

impl Algorithm for Agd {
    fn name(&self) -> &str {
        "agd"
    }

    fn step(&mut self, problem: &KlProblem, z: &FactorPair) -> Result<(FactorPair, StepInfo)> {
        let steps = match self.steps {
            Some(s) => s,
            None => {
                let t = agd_initial_step(problem, z, self.cfg.agd_c)?;
                (t, t)
            }
        };
        let (next, steps, ok) = agd_step(problem, z, steps, &self.cfg)?;
        self.steps = Some(steps);
        Ok((
            next,
            StepInfo {
                lambda_w: Some(steps.0),
                lambda_h: Some(steps.1),
                step_failed: !ok,
                ..StepInfo::default()
            },
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::objective;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn instance(seed: u64, reg: Regularizer) -> (KlProblem, FactorPair) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DenseMatrix::from_fn(7, 6, |_, _| rng.random_range(0.0..3.0));
        let z = FactorPair::new(
            DenseMatrix::from_fn(7, 2, |_, _| rng.random_range(0.1..2.0)),
            DenseMatrix::from_fn(2, 6, |_, _| rng.random_range(0.1..2.0)),
        )
        .unwrap();
        (KlProblem::new(x, 2, reg).unwrap(), z)
    }

    #[test]
    fn zero_gradient_leaves_point_unchanged() {
        let (_, z) = instance(51, Regularizer::none());
        let p = KlProblem::new(z.product(), 2, Regularizer::none()).unwrap();
        let cfg = BaselineConfig::default();
        let (next, _, ok) = agd_step(&p, &z, (0.1, 0.1), &cfg).unwrap();
        assert!(ok);
        for (a, b) in next.w.as_slice().iter().zip(z.w.as_slice()) {
            assert!((a - b).abs() <= 1e-12 * b);
        }
    }

    #[test]
    fn step_decreases_objective() {
        for reg in [
            Regularizer::none(),
            Regularizer::l1(0.1, 0.1).unwrap(),
            Regularizer::squared_frobenius(0.2, 0.3).unwrap(),
        ] {
            let (p, z) = instance(52, reg);
            let cfg = BaselineConfig::default();
            let t = agd_initial_step(&p, &z, cfg.agd_c).unwrap();
            let (next, _, ok) = agd_step(&p, &z, (t, t), &cfg).unwrap();
            assert!(ok);
            assert!(objective(&p, &next).unwrap() < objective(&p, &z).unwrap());
        }
    }

    #[test]
    fn large_step_backtracks() {
        let (p, z) = instance(53, Regularizer::none());
        let cfg = BaselineConfig::default();
        let s = agd_block_step(&p, &z, Block::W, 1e3, &cfg).unwrap();
        assert!(s.accepted);
        assert!(s.backtracks > 0);
        assert!((s.step - 1e3 * 0.5f64.powi(s.backtracks as i32)).abs() < 1e-9 * s.step);
    }

    #[test]
    fn exhausted_line_search_reports_failure() {
        let (p, z) = instance(54, Regularizer::none());
        let cfg = BaselineConfig {
            agd_max_backtracks: 0,
            ..BaselineConfig::default()
        };
        let mut alg = Agd::new(&cfg).unwrap();
        alg.steps = Some((1e6, 1e6));
        let (next, info) = alg.step(&p, &z).unwrap();
        assert!(info.step_failed);
        assert_eq!(next, z);
    }
}
