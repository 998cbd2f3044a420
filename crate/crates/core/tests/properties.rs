mod common;

use proptest::prelude::*;

use common::{col_values, matrices, reference_regret, row_values};
use querynash::approx::{bbm_delta, choose_orientation};
use querynash::game::{argmax, support};
use querynash::lower_bounds::{
    consistent_with, det_adversary_complete, uniform_row_check, DetAdversaryOracle, EpsRatio,
};
use querynash::zerosum::{approx_best_response, clearly_suboptimal};
use querynash::*;

fn game_strategy(max_k: usize) -> impl Strategy<Value = BimatrixGame> {
    (2..=max_k).prop_flat_map(|k| {
        (
            prop::collection::vec(0.0..=1.0f64, k * k),
            prop::collection::vec(0.0..=1.0f64, k * k),
        )
            .prop_map(move |(r, c)| BimatrixGame::new(k, r, c, PayoffRange::Unit).unwrap())
    })
}

/// A distribution with some exact zeros.
fn distribution(k: usize) -> impl Strategy<Value = Vec<f64>> {
    (prop::collection::vec(prop_oneof![Just(0.0), 0.0..1.0f64], k), 0..k).prop_map(|(mut w, fallback)| {
        let total: f64 = w.iter().sum();
        if total == 0.0 {
            w[fallback] = 1.0;
            return w;
        }
        w.iter_mut().for_each(|v| *v /= total);
        w
    })
}

fn game_and_profile(max_k: usize) -> impl Strategy<Value = (BimatrixGame, MixedProfile)> {
    game_strategy(max_k).prop_flat_map(|g| {
        let k = g.k();
        (Just(g), distribution(k), distribution(k))
            .prop_map(|(g, x, y)| (g, MixedProfile::new(x, y).unwrap()))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn regret_matches_reference_and_is_bounded((g, p) in game_and_profile(7)) {
        let report = exact_regret(&g, &p).unwrap();
        let reference = reference_regret(&g, &p.x, &p.y);
        prop_assert!((report.row_regret - reference.row_regret).abs() < 1e-9);
        prop_assert!((report.col_regret - reference.col_regret).abs() < 1e-9);
        prop_assert!((report.row_wsne_violation - reference.row_violation).abs() < 1e-9);
        prop_assert!((report.col_wsne_violation - reference.col_violation).abs() < 1e-9);
        for r in [report.row_regret, report.col_regret] {
            prop_assert!(r >= -1e-12 && r <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn wsne_implies_ne((g, p) in game_and_profile(6), eps in 0.0..1.0f64) {
        if is_eps_wsne(&g, &p, eps).unwrap() {
            prop_assert!(is_eps_ne(&g, &p, eps).unwrap());
        }
    }

    #[test]
    fn brute_force_finds_equilibria(g in game_strategy(4)) {
        let sol = brute_force_equilibrium(&g).unwrap();
        prop_assert!(is_eps_ne(&g, &sol.profile, 1e-6).unwrap());
        prop_assert!(reference_regret(&g, &sol.profile.x, &sol.profile.y).regret() <= 1e-6);
    }

    #[test]
    fn constant_sum_payoffs_add_up((g, p) in game_and_profile(6)) {
        let cs = BimatrixGame::constant_sum(g.k(), g.row_matrix().to_vec(), 1.0, PayoffRange::Unit).unwrap();
        prop_assert_eq!(cs.constant_sum_value(), Some(1.0));
        let (a, b) = cs.expected_payoffs(&p);
        prop_assert!((a + b - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn derived_games_are_consistent(g in game_strategy(5)) {
        let (d, x) = derived_d_x(&g);
        let (r, c) = matrices(&g);
        let k = g.k();
        for i in 0..k {
            for j in 0..k {
                prop_assert!((d[i * k + j] - r[i][j] - x[i * k + j]).abs() < 1e-12);
                prop_assert!((d[i * k + j] - 0.5 * (r[i][j] - c[i][j])).abs() < 1e-12);
            }
        }
        let z = derived_zero_sum(&g);
        prop_assert!(z.is_zero_sum());
    }

    #[test]
    fn matrix_oracle_ledger_is_exact_and_replayable(
        g in game_strategy(6),
        cells in prop::collection::vec((0usize..36, 0usize..36), 0..80),
    ) {
        let k = g.k();
        let run = || {
            let mut o = MatrixOracle::new(g.clone());
            for &(i, j) in &cells {
                let a = o.query(i % k, j % k).unwrap();
                assert_eq!(a.a, g.row_payoff(i % k, j % k));
                assert_eq!(a.b, g.col_payoff(i % k, j % k));
            }
            o.into_ledger()
        };
        let first = run();
        prop_assert_eq!(&first, &run());
        prop_assert_eq!(first.total(), cells.len() as u64);
        prop_assert_eq!(first.per_col().iter().sum::<u64>(), cells.len() as u64);
        prop_assert_eq!(first.per_row().iter().sum::<u64>(), cells.len() as u64);
    }

    #[test]
    fn pigeonhole_on_heavy_columns(
        k in 2usize..30,
        num in 1u64..1000,
        cols in prop::collection::vec(0usize..30, 0..400),
    ) {
        let eps = EpsRatio::new(num, 1000);
        let mut o = DetAdversaryOracle::new(k, eps);
        for (n, &c) in cols.iter().enumerate() {
            o.query(n % k, c % k).unwrap();
        }
        let q = o.queries();
        let heavy = (0..k).filter(|&c| !eps.below(o.ledger().col_count(c), k)).count() as u128;
        // heavy * eps * k <= q
        prop_assert!(heavy * (num as u128) * (k as u128) <= (q as u128) * 1000);
        if 2 * (q as u128) * 1000 < (num as u128) * (k * k) as u128 {
            prop_assert!(k as u128 - heavy >= (k as u128).div_ceil(2));
        }
    }

    #[test]
    fn completions_replay_the_ledger(
        k in 3usize..16,
        num in 50u64..500,
        cells in prop::collection::vec((0usize..16, 0usize..16), 0..60),
        y_seed in prop::collection::vec(0.0..1.0f64, 16),
    ) {
        let eps = EpsRatio::new(num, 1000);
        let mut o = DetAdversaryOracle::new(k, eps);
        for &(i, j) in &cells {
            o.query(i % k, j % k).unwrap();
        }
        let total: f64 = y_seed[..k].iter().sum::<f64>().max(1e-9);
        let y: Vec<f64> = y_seed[..k].iter().map(|v| v / total).collect();
        let Ok(y_profile) = MixedProfile::new(vec![1.0 / k as f64; k], y) else { return Ok(()) };
        if let Ok(done) = det_adversary_complete(o.ledger(), &y_profile, eps) {
            prop_assert!(consistent_with(&done.game, o.ledger()));
            prop_assert!(done.game.is_zero_one());
            prop_assert_eq!(done.game.constant_sum_value(), Some(1.0));
            prop_assert!((0..k).all(|i| done.game.col_payoff(i, done.hidden) == 1.0));
            prop_assert!(uniform_row_check(&done, &y_profile, eps).holds());
        }
    }

    #[test]
    fn adversary_columns_answer_zero_one_then_one_zero(k in 2usize..20, num in 1u64..1000) {
        let eps = EpsRatio::new(num, 1000);
        let mut o = DetAdversaryOracle::new(k, eps);
        let limit = eps.ceil_times(k).min(k as u64) as usize;
        for j in 0..k {
            for i in 0..k {
                let a = o.query(i, j).unwrap();
                let expected = if i < limit { (0.0, 1.0) } else { (1.0, 0.0) };
                prop_assert_eq!((a.a, a.b), expected);
            }
        }
    }

    #[test]
    fn best_response_ignores_shifts(
        values in prop::collection::vec(0u8..10, 1..20),
        shift in -4i32..4,
    ) {
        let v: Vec<f64> = values.iter().map(|&n| n as f64 / 8.0).collect();
        let shifted: Vec<f64> = v.iter().map(|x| x + shift as f64 / 4.0).collect();
        let a = ApproxPayoffVector::exact(v.clone(), Player::Row);
        let b = ApproxPayoffVector::exact(shifted, Player::Row);
        prop_assert_eq!(approx_best_response(&a), approx_best_response(&b));
        let first_max = v.iter().position(|&x| x == v.iter().copied().fold(f64::MIN, f64::max)).unwrap();
        prop_assert_eq!(argmax(&v), first_max);
    }

    #[test]
    fn conversion_output_avoids_clearly_suboptimal_strategies(
        (g, p) in game_and_profile(6),
        eps in 0.05..1.0f64,
    ) {
        let (r, c) = matrices(&g);
        let rv = ApproxPayoffVector::exact(row_values(&r, &p.y), Player::Row);
        let cv = ApproxPayoffVector::exact(col_values(&c, &p.x), Player::Column);
        match ne_to_wsne(&p, &rv, &cv, eps) {
            Ok(out) => {
                for (own, v) in [(&out.x, &rv), (&out.y, &cv)] {
                    prop_assert!((own.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                    prop_assert!(own.iter().all(|&q| q >= 0.0));
                    let bad = clearly_suboptimal(v, eps);
                    prop_assert!(support(own).iter().all(|i| !bad.contains(i)));
                }
                for (before, after) in [(&p.x, &out.x), (&p.y, &out.y)] {
                    let moved: f64 = before.iter().zip(after).map(|(a, b)| (a - b).max(0.0)).sum();
                    prop_assert!(moved <= eps / 2.0 + 1e-9);
                }
            }
            Err(SolveError::PreconditionViolated { mass, bound }) => prop_assert!(mass > bound),
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn orientation_choice_is_symmetric(a in 0.0..1.0f64, b in 0.0..1.0f64) {
        prop_assume!(a != b);
        prop_assert_eq!(choose_orientation(a, b), choose_orientation(b, a).swap());
        prop_assert_eq!(choose_orientation(a, b).swap().swap(), choose_orientation(a, b));
    }
}

#[test]
fn delta_decreases_on_the_unit_interval() {
    let grid: Vec<f64> = (0..=1000).map(|n| n as f64 / 1000.0).collect();
    for w in grid.windows(2) {
        assert!(bbm_delta(w[1]) < bbm_delta(w[0]));
    }
    assert_eq!(bbm_delta(1.0), 0.0);
    assert_eq!(bbm_delta(0.0), 0.5);
}
