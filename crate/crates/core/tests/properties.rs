use proptest::prelude::*;

use klnmf::baselines::mu_step;
use klnmf::bregman::{bregman_distance, grad_phi, phi};
use klnmf::data::{read_matrix_csv, write_matrix_csv};
use klnmf::matrix::{DenseMatrix, FactorPair};
use klnmf::model::{kl_divergence, objective};
use klnmf::solvers::{mmbpg_step, prox_step_l1, prox_step_sqfro, SolverConfig, Variant};
use klnmf::{KlProblem, Regularizer};

fn matrix(rows: usize, cols: usize, lo: f64, hi: f64) -> impl Strategy<Value = DenseMatrix> {
    prop::collection::vec(lo..hi, rows * cols)
        .prop_map(move |v| DenseMatrix::new(rows, cols, v).unwrap())
}

fn pair(m: usize, n: usize, r: usize) -> impl Strategy<Value = FactorPair> {
    (matrix(m, r, 0.05, 3.0), matrix(r, n, 0.05, 3.0))
        .prop_map(|(w, h)| FactorPair::new(w, h).unwrap())
}

fn problem(m: usize, n: usize, r: usize) -> impl Strategy<Value = KlProblem> {
    matrix(m, n, 0.0, 4.0).prop_map(move |x| KlProblem::new(x, r, Regularizer::none()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kl_is_nonnegative_and_zero_on_exact_fit(x in matrix(4, 5, 0.0, 3.0), y in matrix(4, 5, 0.01, 3.0)) {
        prop_assert!(kl_divergence(&x, &y).unwrap() >= -1e-12);
        let pos = x.map(|v| v + 0.5);
        prop_assert!(kl_divergence(&pos, &pos).unwrap().abs() < 1e-12);
    }

    #[test]
    fn bregman_three_point_identity(a in pair(3, 4, 2), b in pair(3, 4, 2), c in pair(3, 4, 2)) {
        // D(a,c) = D(a,b) + D(b,c) + ⟨∇φ(b) − ∇φ(c), a − b⟩
        let (gbw, gbh) = grad_phi(&b).unwrap();
        let (gcw, gch) = grad_phi(&c).unwrap();
        let dw = gbw.zip_map(&gcw, |x, y| x - y).unwrap();
        let dh = gbh.zip_map(&gch, |x, y| x - y).unwrap();
        let diff = a.zip_map(&b, |x, y| x - y).unwrap();
        let cross = dw.dot(&diff.w).unwrap() + dh.dot(&diff.h).unwrap();
        let lhs = bregman_distance(&a, &c).unwrap();
        let rhs = bregman_distance(&a, &b).unwrap() + bregman_distance(&b, &c).unwrap() + cross;
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs() + phi(&a).unwrap().abs()));
    }

    #[test]
    fn prox_roots_are_positive_and_stationary(p in -1e3f64..1e3, ml in 0.0f64..1e3) {
        let pm = DenseMatrix::filled(1, 1, p);
        let x = prox_step_l1(&pm, ml).get(0, 0);
        prop_assert!(x > 0.0);
        prop_assert!((p + ml - 1.0 / x + x).abs() <= 1e-9 * (1.0 + p.abs() + ml));
        let y = prox_step_sqfro(&pm, ml).get(0, 0);
        prop_assert!(y > 0.0);
        prop_assert!((p - 1.0 / y + (1.0 + ml) * y).abs() <= 1e-9 * (1.0 + p.abs() + ml));
    }

    #[test]
    fn mu_never_increases_the_loss(p in problem(5, 4, 2), z in pair(5, 4, 2)) {
        let f0 = objective(&p, &z).unwrap();
        if let Ok(next) = mu_step(&p, &z) {
            prop_assert!(next.is_strictly_positive());
            let f1 = objective(&p, &next).unwrap();
            prop_assert!(f1 <= f0 + 1e-10 * (1.0 + f0.abs()));
        }
    }

    #[test]
    fn mmbpg_step_keeps_positivity_and_decreases(p in problem(5, 4, 2), z in pair(5, 4, 2)) {
        let cfg = SolverConfig { variant: Variant::Mmbpg, strict_step: true, ..SolverConfig::default() };
        let (next, meta) = mmbpg_step(&p, &z, &cfg).unwrap();
        prop_assert!(next.is_strictly_positive());
        prop_assert!(meta.lambda_w * meta.l_w < 1.0);
        let f0 = objective(&p, &z).unwrap();
        prop_assert!(objective(&p, &next).unwrap() <= f0 + 1e-10 * (1.0 + f0.abs()));
    }

    #[test]
    fn csv_round_trip_is_exact(m in matrix(3, 4, -1e6, 1e6)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        write_matrix_csv(&m, &path).unwrap();
        prop_assert_eq!(read_matrix_csv(&path).unwrap(), m);
    }
}
