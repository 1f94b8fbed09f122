use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use klnmf::baselines::{agd_block_step, ccd_pass, BaselineConfig, Block};
use klnmf::matrix::{DenseMatrix, FactorPair};
use klnmf::model::{grad_f, objective};
use klnmf::{KlProblem, Regularizer};

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    (a + b) / 2.0
}

fn kl_row(x: &[f64], h: &[f64], w: f64) -> f64 {
    x.iter()
        .zip(h)
        .map(|(&xv, &hv)| {
            let y = w * hv;
            let t = if xv > 0.0 { xv * (xv / y).ln() } else { 0.0 };
            t - xv + y
        })
        .sum()
}

#[test]
fn ccd_rank_one_blocks_match_one_dimensional_minimizers() {
    let x = DenseMatrix::from_rows(&[[1.0, 4.0, 0.5, 2.0]]);
    let p = KlProblem::new(x.clone(), 1, Regularizer::none()).unwrap();
    let h0 = [0.3, 1.7, 0.9, 0.2];
    let z = FactorPair::new(DenseMatrix::filled(1, 1, 0.4), DenseMatrix::from_rows(&[h0])).unwrap();
    let out = ccd_pass(&p, &z, 100).unwrap();

    let w_star = golden_section(|w| kl_row(x.row(0), &h0, w), 1e-6, 50.0);
    assert!((out.w.get(0, 0) - w_star).abs() < 1e-6, "{} vs {w_star}", out.w.get(0, 0));
    let w = out.w.get(0, 0);
    for j in 0..4 {
        let xj = x.get(0, j);
        let h_star = golden_section(|h| kl_row(&[xj], &[w], h), 1e-6, 50.0);
        assert!((out.h.get(0, j) - h_star).abs() < 1e-6, "{j}: {} vs {h_star} (w={w})", out.h.get(0, j));
    }
}

fn random_instance(seed: u64, reg: Regularizer) -> (KlProblem, FactorPair) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = DenseMatrix::from_fn(8, 7, |_, _| rng.random_range(0.0..3.0));
    let z = FactorPair::new(
        DenseMatrix::from_fn(8, 3, |_, _| rng.random_range(0.1..2.0)),
        DenseMatrix::from_fn(3, 7, |_, _| rng.random_range(0.1..2.0)),
    )
    .unwrap();
    (KlProblem::new(x, 3, reg).unwrap(), z)
}

/// Replays the line search independently: candidate points, the
/// sufficient-decrease test, and the step that should be accepted.
#[test]
fn agd_acceptance_matches_armijo_oracle() {
    let cfg = BaselineConfig::default();
    let regs = [
        Regularizer::none(),
        Regularizer::l1(0.05, 0.1).unwrap(),
        Regularizer::squared_frobenius(0.2, 0.1).unwrap(),
    ];
    for (seed, reg) in (0..12).zip(regs.iter().cycle()) {
        let (p, z) = random_instance(seed, *reg);
        for block in [Block::W, Block::H] {
            let t0 = 5.0;
            let got = agd_block_step(&p, &z, block, t0, &cfg).unwrap();

            let (gw, gh) = grad_f(&p, &z).unwrap();
            let (x, g, mu) = match block {
                Block::W => (&z.w, &gw, reg.mu_w()),
                Block::H => (&z.h, &gh, reg.mu_h()),
            };
            let f0 = objective(&p, &z).unwrap();
            let mut t = t0;
            let mut expected = None;
            for k in 0..=cfg.agd_max_backtracks {
                let cand = x.zip_map(g, |xv, gv| {
                    let v = match reg.kind() {
                        klnmf::RegKind::None => xv - t * gv,
                        klnmf::RegKind::L1 => xv - t * (gv + mu),
                        klnmf::RegKind::SquaredFrobenius => (xv - t * gv) / (1.0 + t * mu),
                    };
                    v.max(1e-15)
                })
                .unwrap();
                let mut trial = z.clone();
                match block {
                    Block::W => trial.w = cand.clone(),
                    Block::H => trial.h = cand.clone(),
                }
                let moved: f64 = cand
                    .as_slice()
                    .iter()
                    .zip(x.as_slice())
                    .map(|(a, b)| (a - b).powi(2))
                    .sum();
                let f1 = objective(&p, &trial).unwrap_or(f64::INFINITY);
                if f1 <= f0 - cfg.agd_sufficient_decrease / t * moved {
                    expected = Some((k, t, trial));
                    break;
                }
                t *= cfg.agd_shrink;
            }
            let (k, t, trial) = expected.expect("oracle line search failed");
            assert!(got.accepted);
            assert_eq!(got.backtracks, k, "seed {seed} {block:?}");
            assert_eq!(got.step, t);
            let gap = got.z.distance(&trial).unwrap() / trial.norm();
            assert!(gap < 1e-14, "seed {seed} {block:?}: {gap:e}");
        }
    }
}
