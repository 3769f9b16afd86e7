use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use onebit::model::{generate, ProblemConfig};
use onebit::solver::{
    gna_step, hard_threshold, kkt_residual, newton_step, restricted_least_squares, run_gna,
    support_of, SolverOptions, SolverState,
};

fn instance(m: usize, n: usize, s: usize, seed: u64) -> (DMatrix<f64>, DVector<f64>, Vec<usize>) {
    let cfg = ProblemConfig::new(m, n, s, 0.2, 0.1, 0.05);
    let inst = generate(&cfg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
    (inst.ensemble.matrix, inst.observation.y, inst.signal.support)
}

fn dims() -> impl Strategy<Value = (usize, usize, usize, u64)> {
    (4usize..30).prop_flat_map(|n| {
        (1..=n.min(5)).prop_flat_map(move |s| (2 * s + 4..60, Just(n), Just(s), any::<u64>()))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn step_structure((m, n, s, seed) in dims()) {
        let (psi, y, _) = instance(m, n, s, seed);
        let opts = SolverOptions::new(s);
        let mut state = SolverState::zero(&psi, &y).unwrap();
        for _ in 0..5 {
            state = gna_step(&state, &psi, &y, &opts).unwrap().state;
            prop_assert_eq!(state.active.len(), s);
            prop_assert!(support_of(&state.x).len() <= s);
            for i in 0..n {
                if state.active.contains(&i) {
                    prop_assert_eq!(state.d[i], 0.0);
                } else {
                    prop_assert_eq!(state.x[i], 0.0);
                }
            }
            prop_assert_eq!(state.x.dot(&state.d), 0.0);
        }
    }

    #[test]
    fn restricted_solution_is_least_squares_optimal((m, n, s, seed) in dims()) {
        let (psi, y, support) = instance(m, n, s, seed);
        let sol = restricted_least_squares(&psi, &y, &support, 0.0).unwrap();
        let sub = psi.select_columns(&support);
        let resid = &y - &sub * &sol.coeffs;
        let grad = sub.tr_mul(&resid);
        prop_assert!(grad.amax() <= 1e-9 * y.norm() * (m as f64).sqrt());
        let qr = sub.clone().svd(true, true).solve(&y, 1e-14).unwrap();
        prop_assert!((&qr - &sol.coeffs).amax() <= 1e-8 * (1.0 + qr.amax()));
    }

    #[test]
    fn output_is_s_sparse_and_history_is_consistent((m, n, s, seed) in dims()) {
        let (psi, y, _) = instance(m, n, s, seed);
        let opts = SolverOptions::new(s).max_iter(8);
        let r = run_gna(&psi, &y, &opts, None).unwrap();
        prop_assert!(support_of(&r.x_hat).len() <= s);
        prop_assert!(r.iterations >= 1 && r.iterations <= 8);
        let h = &r.active_history;
        if r.converged {
            prop_assert_eq!(&h[h.len() - 1], &h[h.len() - 2]);
            prop_assert!(kkt_residual(&r.x_hat, &psi, &y, opts.eta, s).unwrap() <= 1e-12);
        }
        for w in h[..h.len() - usize::from(r.converged)].windows(2).skip(1) {
            prop_assert_ne!(&w[0], &w[1]);
        }
    }

    #[test]
    fn scale_equivariance_in_y((m, n, s, seed) in dims(), alpha_exp in -3i32..4) {
        let (psi, y, _) = instance(m, n, s, seed);
        let alpha = 2f64.powi(alpha_exp);
        let opts = SolverOptions::new(s);
        let a = run_gna(&psi, &y, &opts, None).unwrap();
        let b = run_gna(&psi, &(&y * alpha), &opts, None).unwrap();
        prop_assert_eq!(&a.active_history, &b.active_history);
        prop_assert_eq!(b.x_hat, a.x_hat * alpha);
    }

    #[test]
    fn column_permutation_equivariance((m, n, s, seed) in dims(), shift in 1usize..29) {
        let (psi, y, _) = instance(m, n, s, seed);
        let perm: Vec<usize> = (0..n).map(|j| (j + shift) % n).collect();
        let permuted = psi.select_columns(&perm);
        let opts = SolverOptions::new(s);
        let a = run_gna(&psi, &y, &opts, None).unwrap();
        let b = run_gna(&permuted, &y, &opts, None).unwrap();
        // Column j of `permuted` is column perm[j] of psi.
        for (j, &pj) in perm.iter().enumerate() {
            prop_assert!((b.x_hat[j] - a.x_hat[pj]).abs() <= 1e-9);
        }
    }

    #[test]
    fn hard_threshold_matches_sort(z in prop::collection::vec(-5i32..=5, 1..25), frac in 0.0f64..1.0) {
        let z = DVector::from_iterator(z.len(), z.iter().map(|&v| v as f64));
        let s = 1 + ((z.len() - 1) as f64 * frac) as usize;
        let h = hard_threshold(&z, s).unwrap();
        let mut order: Vec<usize> = (0..z.len()).collect();
        order.sort_by(|&a, &b| z[b].abs().total_cmp(&z[a].abs()).then(a.cmp(&b)));
        let mut expected = DVector::zeros(z.len());
        for &i in &order[..s] {
            expected[i] = z[i];
        }
        prop_assert_eq!(&h, &expected);
        prop_assert_eq!(hard_threshold(&h, s).unwrap(), h);
    }
}

#[test]
fn newton_oracle_matches_step_on_small_instances() {
    for seed in 0..50 {
        let (psi, y, _) = instance(8, 6, 2, seed);
        let opts = SolverOptions::new(2);
        let mut state = SolverState::zero(&psi, &y).unwrap();
        for _ in 0..4 {
            let step = gna_step(&state, &psi, &y, &opts).unwrap().state;
            let newton = newton_step(&state, &psi, &y, &opts).unwrap();
            assert!((&step.x - &newton.x).amax() <= 1e-10, "seed {seed}");
            assert!((&step.d - &newton.d).amax() <= 1e-10, "seed {seed}");
            assert_eq!(step.active, newton.active);
            state = step;
        }
    }
}

#[test]
fn noiseless_recovery_with_separated_signal() {
    let mut hits = 0;
    for seed in 0..100 {
        let cfg = ProblemConfig::new(200, 20, 2, 0.0, 0.0, 0.0);
        let inst = generate(&cfg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let r = run_gna(&inst.ensemble.matrix, &inst.observation.y, &SolverOptions::new(2), None).unwrap();
        hits += usize::from(support_of(&r.x_hat) == inst.signal.support);
    }
    assert!(hits >= 95, "{hits}/100");
}

#[test]
fn warm_start_at_fixed_point_stops_immediately() {
    let (psi, y, _) = instance(60, 15, 3, 11);
    let opts = SolverOptions::new(3).max_iter(20);
    let first = run_gna(&psi, &y, &opts, None).unwrap();
    assert!(first.converged);
    let again = run_gna(&psi, &y, &opts, Some(&first.x_hat)).unwrap();
    assert!(again.converged);
    assert_eq!(again.iterations, 1);
    assert!((&again.x_hat - &first.x_hat).amax() <= 1e-12);
}

#[test]
fn invalid_options_are_rejected() {
    let (psi, y, _) = instance(30, 10, 2, 0);
    assert!(run_gna(&psi, &y, &SolverOptions::new(0), None).is_err());
    assert!(run_gna(&psi, &y, &SolverOptions::new(11), None).is_err());
    assert!(run_gna(&psi, &y, &SolverOptions::new(2).max_iter(0), None).is_err());
    assert!(run_gna(&psi, &y, &SolverOptions::new(2).eta(0.0), None).is_err());
    let short = DVector::from_element(29, 1.0);
    assert!(run_gna(&psi, &short, &SolverOptions::new(2), None).is_err());
}
