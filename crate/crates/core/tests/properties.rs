//! Property tests: structural invariants over randomized inputs.

use std::cmp::Ordering;

use num_traits::{One, Zero};
use proptest::prelude::*;

use dilemma_core::game::{Game, SepLine};
use dilemma_core::geom::{Line, Move, Point};
use dilemma_core::markov::{terminal_sets, transition_matrix, MarkovPlan};
use dilemma_core::scalar::{Rat, Scalar};
use dilemma_core::sim::{simulate, MatchConfig, Strategy as Player};
use dilemma_core::smale::{
    classify_smale, make_equalizer, make_extortionate, make_good_simple, OnLineRule,
};

fn game() -> Game<Rat> {
    Game::from_ints(5, 3, 1, 0).unwrap()
}

/// Rational in (0, 1) from a pair of bounded integers.
fn unit_ratio() -> impl Strategy<Value = Rat> {
    (1i64..120, 1i64..120).prop_map(|(a, b)| {
        let (n, d) = if a < b { (a, b) } else { (b, a + 1) };
        Rat::ratio(n, d.max(n + 1))
    })
}

/// A separation line generated from anchor points on the two transversal
/// hull segments.
fn random_separation_line(
    g: &Game<Rat>,
    t_left: Rat,
    t_right: Rat,
) -> Line<Rat> {
    // Left point on [(pbar,pbar),(S,T)], right point on [(R,R),(T,S)].
    let left = g.pbar_point().lerp(&g.st(), t_left);
    let right = g.rr().lerp(&g.ts(), t_right);
    Line::through_pair(&left, &right)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn switch_involutions(a in -50i64..50, b in -50i64..50, den in 1i64..20, m in unit_ratio()) {
        let p = Point::new(Rat::ratio(a, den), Rat::ratio(b, den));
        prop_assert_eq!(p.switch().switch(), p.clone());
        let line = Line::through(&p, m);
        prop_assert_eq!(line.switch().switch(), line);
    }

    #[test]
    fn separation_lines_satisfy_the_sign_pattern(tl in unit_ratio(), tr in unit_ratio()) {
        // Any chord from the left transversal segment to the right one
        // separates, is never vertical, and has |slope| <= 1.
        let g = game();
        let line = random_separation_line(&g, tl, tr);
        prop_assert!(g.is_separation_line(&line));
        let l = g.normalized_affine(&line);
        prop_assert!(l.sign_at(&g.rr(), 0.0) != Ordering::Less);
        prop_assert!(l.sign_at(&g.st(), 0.0) != Ordering::Less);
        prop_assert!(l.sign_at(&g.pp(), 0.0) != Ordering::Greater);
        prop_assert!(l.sign_at(&g.ts(), 0.0) != Ordering::Greater);
        match line {
            Line::Slant { slope, .. } => {
                prop_assert!(Scalar::abs(&slope).cmp_total(&Rat::one()) != Ordering::Greater)
            }
            Line::Vertical { .. } => prop_assert!(false, "separation lines are never vertical"),
        }
        // Normalization: max |L| over the hull is exactly 1.
        prop_assert_eq!(g.max_abs_on_hull(&l), Rat::one());
    }

    #[test]
    fn triangle_quadrangle_switch_cover(u1 in 0.0f64..1.0, v1 in 0.0f64..1.0,
                                        u2 in 0.0f64..1.0, v2 in 0.0f64..1.0) {
        // Every hull point q is in T(s) ∪ Q(s) or in the switch of the
        // interiors taken at the switched vertex — the covering that makes
        // path-switch intersections singletons.
        let g = game();
        let s = g.hull_point_from_params(u1, v1);
        let q = g.hull_point_from_params(u2, v2);
        let (ss, qs) = (s.switch(), q.switch());
        let covered = g.upper_triangle(&s).contains(&q, 0.0)
            || g.lower_quadrangle(&s).contains(&q, 0.0)
            || g.upper_triangle(&ss).interior_contains(&qs, 0.0)
            || g.lower_quadrangle(&ss).interior_contains(&qs, 0.0);
        prop_assert!(covered);
    }

    #[test]
    fn constructor_classifier_round_trips(m in unit_ratio(), e_num in 1i64..12) {
        let g = game();
        let e = Rat::ratio(e_num, 4); // spans [1/4, 11/4]; valid range is [1, 3]
        if e.cmp_total(g.p()) != Ordering::Less && e.cmp_total(g.r()) != Ordering::Greater {
            let eq = make_equalizer(&g, e, OnLineRule::AlwaysC).unwrap();
            let f = classify_smale(&eq, &g);
            prop_assert!(f.simple && f.equalizer && !f.good);
        }

        let good = make_good_simple(&g, m.clone(), OnLineRule::AlwaysC).unwrap();
        let f = classify_smale(&good, &g);
        prop_assert!(f.good && f.convex_good && f.has_protection_line && f.generous);

        let ext = make_extortionate(&g, m, OnLineRule::AlwaysD).unwrap();
        let f = classify_smale(&ext, &g);
        prop_assert!(f.extortionate && f.weakly_firm && !f.weakly_agreeable && !f.generous);
    }

    #[test]
    fn terminal_sets_are_disjoint_with_exact_stationaries(
        p1 in 0u8..=4, p2 in 0u8..=4, p3 in 0u8..=4, p4 in 0u8..=4,
        q1 in 0u8..=4, q2 in 0u8..=4, q3 in 0u8..=4, q4 in 0u8..=4,
    ) {
        let quarter = |v: u8| Rat::ratio(v as i64, 4);
        let p = MarkovPlan::new([quarter(p1), quarter(p2), quarter(p3), quarter(p4)]).unwrap();
        let q = MarkovPlan::new([quarter(q1), quarter(q2), quarter(q3), quarter(q4)]).unwrap();
        let m = transition_matrix(&p, &q);
        let report = terminal_sets(&m).unwrap();
        prop_assert!(!report.terminal_sets.is_empty());

        let mut seen = Vec::new();
        for t in &report.terminal_sets {
            // Pairwise disjoint.
            for s in &t.states {
                prop_assert!(!seen.contains(s));
                seen.push(*s);
            }
            // v M = v exactly, support exactly J, total mass 1.
            let after = m.step_distribution(&t.stationary);
            prop_assert_eq!(&after, &t.stationary);
            let total = t.stationary.iter().cloned().fold(Rat::zero(), |a, b| a + b);
            prop_assert_eq!(total, Rat::one());
            for (i, v) in t.stationary.iter().enumerate() {
                let in_set = t.states.iter().any(|s| s.index() == i);
                prop_assert_eq!(v.sign_band(0.0) == Ordering::Greater, in_set);
            }
        }
    }
}

proptest! {
    // Simulation-backed properties are heavier; fewer cases.
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn step_law_and_exact_convexity(
        p1 in 0u8..=4, p2 in 0u8..=4, p3 in 0u8..=4, p4 in 0u8..=4,
        seed in 0u64..1000,
        linear in proptest::bool::ANY,
    ) {
        let g = game();
        let quarter = |v: u8| Rat::ratio(v as i64, 4);
        let p = MarkovPlan::new([quarter(p1), quarter(p2), quarter(p3), quarter(p4)]).unwrap();
        let x = Player::markov(Move::C, p.clone());
        let y = Player::markov(Move::D, p);
        let weights = if linear {
            dilemma_core::weights::WeightSequence::Linear
        } else {
            dilemma_core::weights::WeightSequence::Uniform
        };
        let traj = simulate(&g, &x, &y, &MatchConfig::new(400, seed).weighted(weights)).unwrap();
        // Step law on every step.
        prop_assert!(traj.max_step_ratio <= 1.0 + 1e-9);
        // The incremental average equals the direct weighted sum, exactly.
        for n in [1u64, 17, 399, 400] {
            let direct = traj.exact_average_at(&g, n);
            if n == 400 {
                prop_assert_eq!(&direct, &traj.final_average);
            }
            let tol = 1e-12;
            let (fx, fy) = traj.averages[n as usize - 1];
            prop_assert!((direct.x.to_f64() - fx).abs() < tol);
            prop_assert!((direct.y.to_f64() - fy).abs() < tol);
        }
    }

    #[test]
    fn generous_smale_pairs_reach_mutual_reward(
        mx in 1i64..10, my in 1i64..10, seed in 0u64..500,
    ) {
        // Randomized generous pair with random 30-round prefixes.
        let g: Game<f64> = Game::from_ints(5, 3, 1, 0).unwrap();
        let plan_x = make_good_simple(&g, mx as f64 / 10.0, OnLineRule::AlwaysC).unwrap();
        let plan_y = make_good_simple(&g, my as f64 / 10.0, OnLineRule::AlwaysC).unwrap();
        let x = Player::smale(Move::C, plan_x)
            .with_prefix(dilemma_core::sim::scripted_moves_from_seed(seed, 30), 30);
        let y = Player::smale(Move::D, plan_y)
            .with_prefix(dilemma_core::sim::scripted_moves_from_seed(seed + 7, 30), 30);
        let traj = simulate(&g, &x, &y, &MatchConfig::new(40_000, seed).weighted(
            dilemma_core::weights::WeightSequence::Uniform,
        )).unwrap();
        let (sx, sy) = traj.final_average_f64();
        prop_assert!((sx - 3.0).abs() < 0.05 && (sy - 3.0).abs() < 0.05,
            "ended at ({}, {})", sx, sy);
    }
}

#[test]
fn peak_paths_validate_over_a_parameter_sweep() {
    let g = game();
    let mut count = 0;
    for i in 1..6 {
        for j in 1..6 {
            let peak = Point::new(Rat::ratio(6 * i, 10), Rat::ratio(10 + 4 * j, 10));
            if !g.contains(&peak, 0.0)
                || peak.y.cmp_total(g.p()) != Ordering::Greater
                || peak.y.cmp_total(g.r()) != Ordering::Less
            {
                continue;
            }
            let path = dilemma_core::path::path_from_peak(&g, &peak).unwrap();
            let report = dilemma_core::path::validate_path(&g, &path, true, 80);
            assert!(report.is_valid(), "peak {:?}: {:?}", peak.to_f64(), report.failures());
            count += 1;
        }
    }
    assert!(count >= 8, "swept {count} valid peaks");
}

#[test]
fn sep_line_round_trip_through_affine() {
    // affine -> zero_line -> affine preserves the separation geometry.
    let g = game();
    for (ax, ay, m_num) in [(3i64, 3i64, 1i64), (1, 1, 2), (3, 2, 0)] {
        let anchor = Point::from_ints(ax, ay);
        let sep = SepLine::new(&g, anchor, Rat::ratio(m_num, 3));
        if let Ok(sep) = sep {
            let map = sep.affine(&g);
            let line = map.zero_line();
            assert!(g.is_separation_line(&line));
        }
    }
}
