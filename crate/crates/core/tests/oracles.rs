//! Cross-module oracle checks: exact closed forms computed one way must
//! match simulations and solves computed another way.

use num_traits::{One, Zero};

use dilemma_core::game::Game;
use dilemma_core::geom::{Line, Move, Outcome, Point};
use dilemma_core::markov::{
    alld_vs_generous_payoff, classify_markov, limiting_payoff, terminal_sets,
    transition_matrix, weighted_distribution_average, MarkovPlan,
};
use dilemma_core::path::{path_from_peak, validate_path, FullDirection, FullRegion};
use dilemma_core::scalar::{Rat, Scalar};
use dilemma_core::sim::{
    check_separation_bound, estimate_limit_set, scripted_moves_from_seed, simulate,
    verify_containment, MatchConfig, Strategy,
};
use dilemma_core::smale::{
    make_all_c, make_all_d, make_equalizer, make_extortionate, make_generous_region,
    make_good_simple, make_smale_tft, predicted_limit, OnLineRule, PredictedLimit, SmalePlan,
};
use dilemma_core::weights::{weight_conditions, WeightSequence};

fn rational_game() -> Game<Rat> {
    Game::from_ints(5, 3, 1, 0).unwrap()
}

fn float_game() -> Game<f64> {
    Game::from_ints(5, 3, 1, 0).unwrap()
}

/// A small adversary suite in the X-frame of the given scalar.
fn adversaries(game: &Game<f64>) -> Vec<(&'static str, Strategy<f64>)> {
    vec![
        ("all-c", Strategy::smale(Move::C, make_all_c())),
        ("all-d", Strategy::smale(Move::D, make_all_d())),
        ("tft", Strategy::markov(Move::C, MarkovPlan::tit_for_tat())),
        (
            "random-script",
            Strategy::scripted(scripted_moves_from_seed(99, 4096)),
        ),
        (
            "good-smale",
            Strategy::smale(
                Move::C,
                make_good_simple(game, 0.7, OnLineRule::AlwaysC).unwrap(),
            ),
        ),
    ]
}

#[test]
fn stationary_distributions_match_long_run_frequencies() {
    // Ergodic check: for interior plans the chain has one terminal set and
    // empirical outcome frequencies approach its stationary distribution.
    let g = float_game();
    let cases = [
        ([0.7, 0.2, 0.6, 0.4], [0.5, 0.25, 0.75, 0.3]),
        ([0.9, 0.1, 0.8, 0.2], [0.6, 0.4, 0.5, 0.5]),
        ([0.3, 0.6, 0.2, 0.7], [0.25, 0.75, 0.4, 0.1]),
    ];
    for (seed, (px, py)) in cases.iter().enumerate() {
        let p = MarkovPlan::new(*px).unwrap();
        let q = MarkovPlan::new(*py).unwrap();
        let report = terminal_sets(&transition_matrix(&p, &q)).unwrap();
        assert!(report.is_convergent());
        let stationary = &report.terminal_sets[0].stationary;

        let traj = simulate(
            &g,
            &Strategy::markov(Move::C, p.clone()),
            &Strategy::markov(Move::D, q.clone()),
            &MatchConfig::new(100_000, seed as u64 + 1),
        )
        .unwrap();
        let counts = traj.outcome_counts();
        let tv: f64 = (0..4)
            .map(|i| (counts[i] as f64 / 1e5 - stationary[i]).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv < 0.02, "case {seed}: total variation {tv}");

        // The limiting payoff from the stationary solve matches the
        // simulated final average.
        let predicted = limiting_payoff(stationary, &g);
        let (sx, sy) = traj.final_average_f64();
        assert!((sx - predicted.x).abs() < 0.05);
        assert!((sy - predicted.y).abs() < 0.05);
    }
}

#[test]
fn weighted_markov_averages_obey_residual_bound() {
    // The weighted distribution average is near-stationary, with residual
    // bounded by (w_1 + w_{N+1} + Δ_N)/W_N, for every checked horizon.
    let plans = [
        MarkovPlan::<f64>::new([0.7, 0.2, 0.6, 0.4]).unwrap(),
        MarkovPlan::<f64>::new([1.0, 0.5, 0.3, 0.5]).unwrap(),
        MarkovPlan::<f64>::tit_for_tat(),
    ];
    let weights = [
        WeightSequence::Uniform,
        WeightSequence::Linear,
        WeightSequence::Harmonic,
    ];
    let v1 = [0.0, 1.0, 0.0, 0.0];
    for p in &plans {
        for q in &plans {
            let m = transition_matrix(p, q);
            for w in &weights {
                for n in [10u64, 100, 1_000, 10_000] {
                    let out = weighted_distribution_average(&m, &v1, w, n);
                    assert!(
                        out.residual <= out.residual_bound + 1e-12,
                        "{w:?} n={n}: {} > {}",
                        out.residual,
                        out.residual_bound
                    );
                }
            }
        }
    }
}

#[test]
fn good_markov_protection_against_adversary_suite() {
    // A good memory-one plan concedes at most (R,R): any limit with the
    // opponent at or above R pins both players to R.
    let g = float_game();
    let p = MarkovPlan::new([1.0, 0.1, 0.3, 0.2]).unwrap();
    assert!(classify_markov(&p, &g).good);
    let x = Strategy::markov(Move::C, p);
    for (name, y) in adversaries(&g) {
        let traj = simulate(&g, &x, &y, &MatchConfig::new(100_000, 11)).unwrap();
        let (sx, sy) = traj.final_average_f64();
        if sy >= 3.0 - 0.01 {
            assert!(
                (sx - 3.0).abs() < 0.02 && (sy - 3.0).abs() < 0.02,
                "{name}: ({sx}, {sy})"
            );
        }
    }
}

#[test]
fn simple_plan_signs_respected_off_the_line() {
    // Defect strictly above, cooperate strictly below, over a dense grid.
    let g = rational_game();
    let plan = make_good_simple(&g, Rat::ratio(1, 2), OnLineRule::AlwaysC).unwrap();
    let map = match &plan {
        SmalePlan::Simple { line, .. } => line.affine(&g),
        _ => unreachable!(),
    };
    let mut checked = 0;
    for i in 0..120 {
        for j in 0..120 {
            let p = g.hull_point_from_params(i as f64 / 119.0, j as f64 / 119.0);
            let v = map.eval(&p);
            let prob = plan.evaluate(&g, &p).unwrap();
            match v.sign_band(0.0) {
                std::cmp::Ordering::Greater => assert!(prob.is_zero()),
                std::cmp::Ordering::Less => assert_eq!(prob, Rat::one()),
                std::cmp::Ordering::Equal => {}
            }
            checked += 1;
        }
    }
    assert!(checked > 10_000);
}

#[test]
fn predicted_limits_match_simulation_for_simple_pairs() {
    let g = float_game();
    let pairs: Vec<(SmalePlan<f64>, SmalePlan<f64>)> = vec![
        (
            make_good_simple(&g, 0.5, OnLineRule::AlwaysC).unwrap(),
            make_equalizer(&g, 2.0, OnLineRule::AlwaysC).unwrap(),
        ),
        (
            make_extortionate(&g, 0.5, OnLineRule::AlwaysD).unwrap(),
            make_all_c(),
        ),
        (
            make_good_simple(&g, 0.25, OnLineRule::AlwaysC).unwrap(),
            make_good_simple(&g, 0.75, OnLineRule::AlwaysC).unwrap(),
        ),
        (
            make_equalizer(&g, 1.25, OnLineRule::AlwaysD).unwrap(),
            make_extortionate(&g, 0.8, OnLineRule::AlwaysC).unwrap(),
        ),
    ];
    for (i, (px, py)) in pairs.iter().enumerate() {
        let predicted = match predicted_limit(&g, px, py).unwrap() {
            PredictedLimit::Point(p) => p,
            other => panic!("pair {i}: unexpected {other:?}"),
        };
        let traj = simulate(
            &g,
            &Strategy::smale(Move::C, px.clone()),
            &Strategy::smale(Move::D, py.clone()),
            &MatchConfig::new(50_000, 7 + i as u64),
        )
        .unwrap();
        let (sx, sy) = traj.final_average_f64();
        assert!(
            (sx - predicted.x).abs() < 0.01 && (sy - predicted.y).abs() < 0.01,
            "pair {i}: predicted {:?}, got ({sx}, {sy})",
            predicted.to_f64()
        );
    }
}

#[test]
fn extortion_against_all_c_lands_at_the_b_point() {
    // B = (7/2, 9/4) with P < B_Y < R < B_X.
    let g = rational_game();
    let ext = make_extortionate(&g, Rat::ratio(1, 2), OnLineRule::AlwaysD).unwrap();
    let b = match predicted_limit(&g, &ext, &make_all_c()).unwrap() {
        PredictedLimit::Point(p) => p,
        other => panic!("unexpected {other:?}"),
    };
    assert_eq!(b, Point::new(Rat::ratio(7, 2), Rat::ratio(9, 4)));
    assert!(b.y.to_f64() > 1.0 && b.y.to_f64() < 3.0 && b.x.to_f64() > 3.0);
}

#[test]
fn good_region_plan_confines_limits_to_triangle() {
    // Against every adversary the limit set stays in [(P,P),(R,R),v].
    let gf = float_game();
    let region = make_generous_region(&gf, 0.5, None).unwrap();
    let triangle = dilemma_core::geom::ConvexRegion::hull_of(&[
        gf.pp(),
        gf.rr(),
        region.corner.clone(),
    ]);
    let x = Strategy::smale(Move::C, region.plan.clone());
    for (name, y) in adversaries(&gf) {
        let traj = simulate(&gf, &x, &y, &MatchConfig::new(60_000, 5)).unwrap();
        let est = estimate_limit_set(&traj, 0.3, 1500);
        let report = verify_containment(
            &est,
            |p| triangle.dist_f64(&Point::new(p.0, p.1)),
            Some(0.02),
        );
        assert!(
            report.contained,
            "{name}: worst distance {}",
            report.worst_distance
        );
    }
}

#[test]
fn all_c_limits_stay_on_the_top_segment() {
    let g = float_game();
    let x = Strategy::smale(Move::C, make_all_c());
    let segment = FullRegion::new(vec![g.rr()], FullDirection::Upper);
    for seed in [3u64, 17, 88] {
        let y = Strategy::scripted(scripted_moves_from_seed(seed, 2048));
        let traj = simulate(&g, &x, &y, &MatchConfig::new(50_000, seed)).unwrap();
        let est = estimate_limit_set(&traj, 0.3, 1000);
        let report = verify_containment(
            &est,
            |p| segment.dist_f64(&g, &Point::new(p.0, p.1)),
            Some(0.02),
        );
        assert!(report.contained, "seed {seed}: {}", report.worst_distance);
    }
}

#[test]
fn equalizer_pins_opponent_payoff_line() {
    let g = float_game();
    let x = Strategy::smale(
        Move::C,
        make_equalizer(&g, 1.5, OnLineRule::AlwaysC).unwrap(),
    );
    for (name, y) in adversaries(&g) {
        let traj = simulate(&g, &x, &y, &MatchConfig::new(50_000, 23)).unwrap();
        let est = estimate_limit_set(&traj, 0.3, 1000);
        let report =
            verify_containment(&est, |p| (p.1 - 1.5).abs(), Some(0.01));
        assert!(report.contained, "{name}: {}", report.worst_distance);
    }
}

#[test]
fn path_plan_limits_stay_on_the_path() {
    let g = rational_game();
    let path = path_from_peak(&g, &Point::new(Rat::from_int(2), Rat::ratio(5, 2))).unwrap();
    assert!(validate_path(&g, &path, true, 120).is_valid());
    let path_f64: Vec<(f64, f64)> = path.vertices().iter().map(Point::to_f64).collect();

    let gf = float_game();
    let verts: Vec<Point<f64>> = path_f64
        .iter()
        .map(|(a, b)| Point::new(*a, *b))
        .collect();
    let fpath = dilemma_core::path::SeparationPath::new(&gf, verts).unwrap();
    let x = Strategy::smale(
        Move::C,
        SmalePlan::Path {
            path: fpath.clone(),
            on_path: OnLineRule::AlwaysC,
        },
    );
    for (name, y) in adversaries(&gf) {
        let traj = simulate(&gf, &x, &y, &MatchConfig::new(60_000, 31)).unwrap();
        let est = estimate_limit_set(&traj, 0.3, 1000);
        let report = verify_containment(
            &est,
            |p| fpath.dist_f64(&Point::new(p.0, p.1)),
            Some(0.02),
        );
        assert!(report.contained, "{name}: {}", report.worst_distance);
    }
}

#[test]
fn diagonal_rule_pair_cooperates_from_round_three() {
    // In the triangle game, two diagonal-split plans recover from a cd
    // start exactly: the second average lands on the diagonal midpoint and
    // every later outcome is cc.
    let g: Game<Rat> = Game::from_ints(5, 4, 3, 0).unwrap();
    let plan = make_smale_tft(&g);
    let x = Strategy {
        initial: dilemma_core::sim::InitialPlay::Move(Move::C),
        ..Strategy::smale(Move::C, plan.clone())
    };
    let y = Strategy {
        initial: dilemma_core::sim::InitialPlay::Move(Move::D),
        ..Strategy::smale(Move::D, plan)
    };
    let traj = simulate(&g, &x, &y, &MatchConfig::new(4_000, 1)).unwrap();
    assert_eq!(traj.outcomes[0], Outcome::Cd);
    assert_eq!(traj.outcomes[1], Outcome::Dc);
    for o in &traj.outcomes[2..] {
        assert_eq!(*o, Outcome::Cc);
    }
    // Exact recovery of the average toward (R,R).
    let avg = traj.exact_average_at(&g, 2);
    assert_eq!(avg, Point::new(Rat::ratio(5, 2), Rat::ratio(5, 2)));
}

#[test]
fn alld_vs_generous_cross_check_all_routes() {
    // Closed form, stationary solve, and simulation agree.
    let g = rational_game();
    let p = MarkovPlan::<Rat>::from_ratios([(1, 1), (1, 2), (3, 10), (1, 2)]).unwrap();
    let closed = alld_vs_generous_payoff(&p, &g);
    let m = transition_matrix(&p, &MarkovPlan::all_d());
    let report = terminal_sets(&m).unwrap();
    let from_solve = limiting_payoff(&report.terminal_sets[0].stationary, &g);
    assert_eq!(closed, from_solve);

    let gf = float_game();
    let pf = MarkovPlan::<f64>::new([1.0, 0.5, 0.3, 0.5]).unwrap();
    let traj = simulate(
        &gf,
        &Strategy::markov(Move::C, pf),
        &Strategy::markov(Move::D, MarkovPlan::all_d()),
        &MatchConfig::new(100_000, 5),
    )
    .unwrap();
    let (sx, sy) = traj.final_average_f64();
    assert!((sx - 0.5).abs() < 0.05 && (sy - 3.0).abs() < 0.05);
}

#[test]
fn weighted_run_bound_uses_weight_ratios() {
    // With linear weights the separation bound scales by W_{n*}/W_N.
    let g = rational_game();
    let good = make_good_simple(&g, Rat::ratio(1, 2), OnLineRule::AlwaysC).unwrap();
    let map = match &good {
        SmalePlan::Simple { line, .. } => line.affine(&g),
        _ => unreachable!(),
    };
    let (a, b, c) = (map.a.to_f64(), map.b.to_f64(), map.c.to_f64());
    let eq = make_equalizer(&g, Rat::from_int(2), OnLineRule::AlwaysC).unwrap();
    let traj = simulate(
        &g,
        &Strategy::smale(Move::C, good),
        &Strategy::smale(Move::C, eq),
        &MatchConfig::new(20_000, 2).weighted(WeightSequence::Linear),
    )
    .unwrap();
    let report = check_separation_bound(&traj, &|x, y| a * x + b * y + c, 1, true);
    assert!(report.holds(1e-9), "max ratio {}", report.max_ratio);
}

#[test]
fn weight_condition_flags_match_expected() {
    for (w, c1, c2, c3) in [
        (WeightSequence::Uniform, true, true, true),
        (WeightSequence::Linear, true, true, true),
        (WeightSequence::Power { k: 2 }, true, true, true),
        (WeightSequence::Geometric { ratio: 2.0 }, false, true, false),
        (WeightSequence::Harmonic, true, true, true),
        (WeightSequence::Geometric { ratio: 0.5 }, true, false, false),
    ] {
        let r = weight_conditions(&w, 1000);
        assert_eq!((r.c1, r.c2, r.c3), (c1, c2, c3), "{w:?}");
    }
}

#[test]
fn horizontal_separation_lines_need_heights_between_p_and_r() {
    let g = rational_game();
    for e in [-1i64, 0] {
        assert!(!g.is_separation_line(&Line::horizontal(Rat::from_int(e))));
    }
    assert!(g.is_separation_line(&Line::horizontal(Rat::ratio(5, 2))));
    assert!(!g.is_separation_line(&Line::horizontal(Rat::from_int(4))));
}

#[test]
fn weighted_markov_residual_bound_at_every_horizon() {
    // Incremental sweep of the residual bound over every N up to 1e4 for a
    // representative plan pair under condition-3 weights.
    let p = MarkovPlan::<f64>::new([0.7, 0.2, 0.6, 0.4]).unwrap();
    let q = MarkovPlan::<f64>::new([1.0, 0.5, 0.3, 0.5]).unwrap();
    let m = transition_matrix(&p, &q);
    for weights in [WeightSequence::Uniform, WeightSequence::Linear] {
        let mut v = [0.0, 0.0, 1.0, 0.0];
        let mut acc = [0.0f64; 4];
        let mut w_sum = 0.0;
        let mut delta = 0.0;
        let mut prev_w = 0.0;
        for n in 1..=10_000u64 {
            let w = weights.weight_f64(n);
            for i in 0..4 {
                acc[i] += w * v[i];
            }
            w_sum += w;
            if n > 1 {
                delta += (w - prev_w).abs();
            }
            prev_w = w;
            let avg: [f64; 4] = std::array::from_fn(|i| acc[i] / w_sum);
            let stepped = m.step_distribution(&avg);
            let residual: f64 = (0..4)
                .map(|i| (stepped[i] - avg[i]).powi(2))
                .sum::<f64>()
                .sqrt();
            let bound =
                (weights.weight_f64(1) + weights.weight_f64(n + 1) + delta) / w_sum;
            assert!(
                residual <= bound + 1e-12,
                "{weights:?} N={n}: {residual} > {bound}"
            );
            v = m.step_distribution(&v);
        }
    }
}

#[test]
fn transition_rows_are_exactly_stochastic() {
    let p = MarkovPlan::<Rat>::from_ratios([(1, 2), (1, 3), (2, 3), (1, 4)]).unwrap();
    let q = MarkovPlan::<Rat>::from_ratios([(3, 4), (1, 5), (1, 2), (2, 5)]).unwrap();
    let m = transition_matrix(&p, &q);
    for row in m.rows() {
        let sum = row.iter().cloned().fold(Rat::zero(), |a, b| a + b);
        assert_eq!(sum, Rat::one());
    }
}
