//! Strong Nash pairs for any feasible target payoff.
//!
//! For a target `s*` in the hull with both coordinates above `P`, a pair of
//! Smale plans exists whose match converges to `s*`, and where a unilateral
//! deviation can never push the deviator's own coordinate above its target
//! value. Three constructions cover the target range:
//!
//! * both coordinates in `(P, R)`: path plans on strict separation paths
//!   peaking at `s*` and its switch;
//! * `s* = (R,R)`: a matched pair of good simple plans;
//! * one coordinate at or above `R`: a path plan for the low seat and a
//!   two-segment region plan over a horizontal separation line for the
//!   high seat.

use std::cmp::Ordering;

use thiserror::Error;

use crate::game::Game;
use crate::geom::{Line, Point};
use crate::path::{path_from_peak, PathError, SeparationPath};
use crate::scalar::{Scalar, FLOAT_TOL};
use crate::smale::{
    make_good_simple, HalfPlaneTest, OnLineRule, SmaleError, SmalePlan, Zone,
};

#[derive(Debug, Error, PartialEq)]
pub enum FolkError {
    #[error("target payoff must lie in the hull")]
    OutsideHull,
    #[error("target coordinates must both exceed P")]
    CoordinateTooLow,
    #[error("path construction failed: {0}")]
    Path(#[from] PathError),
    #[error("plan construction failed: {0}")]
    Plan(#[from] SmaleError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FolkCase {
    /// Both coordinates strictly between P and R: two strict-path plans.
    PathPair,
    /// Target (R,R): identical good simple plans.
    GoodPair,
    /// One coordinate at or above R: path plan plus horizontal region plan.
    MixedHigh { switched: bool },
}

#[derive(Clone, Debug)]
pub struct FolkPair<S> {
    pub plan_x: SmalePlan<S>,
    pub plan_y: SmalePlan<S>,
    pub payoff: Point<S>,
    pub case: FolkCase,
    /// The path whose switch bounds X's achievable coordinate (Y's plan),
    /// when the construction uses one.
    pub y_path: Option<SeparationPath<S>>,
    pub x_path: Option<SeparationPath<S>>,
}

pub fn folk_pair<S: Scalar>(game: &Game<S>, target: &Point<S>) -> Result<FolkPair<S>, FolkError> {
    let tol = FLOAT_TOL * game.diameter_f64();
    if !game.contains(target, tol) {
        return Err(FolkError::OutsideHull);
    }
    if target.x.cmp_total(game.p()) != Ordering::Greater
        || target.y.cmp_total(game.p()) != Ordering::Greater
    {
        return Err(FolkError::CoordinateTooLow);
    }
    let r = game.r();
    let x_high = target.x.cmp_total(r) != Ordering::Less;
    let y_high = target.y.cmp_total(r) != Ordering::Less;

    if x_high && y_high {
        // Only (R,R) has both coordinates at R.
        let plan = make_good_simple(game, S::ratio(1, 2), OnLineRule::AlwaysC)?;
        return Ok(FolkPair {
            plan_x: plan.clone(),
            plan_y: plan,
            payoff: game.rr(),
            case: FolkCase::GoodPair,
            y_path: None,
            x_path: None,
        });
    }

    if !x_high && !y_high {
        let cx = path_from_peak(game, target)?;
        let cy = path_from_peak(game, &target.switch())?;
        return Ok(FolkPair {
            plan_x: SmalePlan::Path {
                path: cx.clone(),
                on_path: OnLineRule::AlwaysC,
            },
            plan_y: SmalePlan::Path {
                path: cy.clone(),
                on_path: OnLineRule::AlwaysC,
            },
            payoff: target.clone(),
            case: FolkCase::PathPair,
            y_path: Some(cy),
            x_path: Some(cx),
        });
    }

    if y_high {
        mixed_high(game, target, false)
    } else {
        // Build the construction for the switched target and swap seats.
        let swapped = mixed_high(game, &target.switch(), true)?;
        Ok(FolkPair {
            plan_x: swapped.plan_y,
            plan_y: swapped.plan_x,
            payoff: target.clone(),
            case: FolkCase::MixedHigh { switched: true },
            y_path: swapped.x_path,
            x_path: swapped.y_path,
        })
    }
}

/// Construction for `P < s*_X < R <= s*_Y`. Y gets a path plan peaked at
/// the switched target; X gets the two-segment region plan over the
/// horizontal separation line at height `(P + s*_X)/2`.
fn mixed_high<S: Scalar>(
    game: &Game<S>,
    target: &Point<S>,
    switched: bool,
) -> Result<FolkPair<S>, FolkError> {
    let cy = path_from_peak(game, &target.switch())?;
    let plan_y = SmalePlan::Path {
        path: cy.clone(),
        on_path: OnLineRule::AlwaysC,
    };

    let h = (game.p().clone() + target.x.clone()).half();
    let v_prime = game
        .left_edge_at_height(h.clone())
        .expect("height lies in the left edge range");
    let w_prime = game
        .right_edge_at_height(h.clone())
        .expect("height lies in the right edge range");
    let horiz = Line::horizontal(h);
    let leg_up = Line::through_pair(&v_prime, target);
    let leg_down = Line::through_pair(target, &w_prime);

    // Defect exactly where the point is above the horizontal line and above
    // the chain leg on its own side of the peak.
    let above_horiz = HalfPlaneTest::above(game, &horiz);
    let zone_left = Zone {
        tests: vec![
            above_horiz.clone(),
            HalfPlaneTest::above(game, &leg_up),
            HalfPlaneTest::at_or_left_of(game, target.x.clone()),
        ],
    };
    let zone_right = Zone {
        tests: vec![
            above_horiz,
            HalfPlaneTest::above(game, &leg_down),
            HalfPlaneTest::at_or_right_of(game, target.x.clone()),
        ],
    };
    let plan_x = SmalePlan::Region {
        defect_zones: vec![zone_left, zone_right],
        coop: S::one(),
    };

    Ok(FolkPair {
        plan_x,
        plan_y,
        payoff: target.clone(),
        case: FolkCase::MixedHigh { switched },
        y_path: Some(cy),
        x_path: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Move;
    use crate::scalar::Rat;
    use crate::sim::{simulate, MatchConfig, Strategy};

    fn canonical() -> Game<Rat> {
        Game::from_ints(5, 3, 1, 0).unwrap()
    }

    #[test]
    fn case_assignment() {
        let g = canonical();
        let pair = folk_pair(&g, &g.rr()).unwrap();
        assert_eq!(pair.case, FolkCase::GoodPair);
        assert_eq!(pair.payoff, g.rr());

        let t = Point::new(Rat::from_int(2), Rat::ratio(5, 2));
        assert_eq!(folk_pair(&g, &t).unwrap().case, FolkCase::PathPair);

        let t = Point::new(Rat::from_int(2), Rat::ratio(7, 2));
        assert_eq!(
            folk_pair(&g, &t).unwrap().case,
            FolkCase::MixedHigh { switched: false }
        );

        let t = Point::new(Rat::ratio(7, 2), Rat::from_int(2));
        assert_eq!(
            folk_pair(&g, &t).unwrap().case,
            FolkCase::MixedHigh { switched: true }
        );
    }

    #[test]
    fn rejects_inadmissible_targets() {
        let g = canonical();
        assert_eq!(
            folk_pair(&g, &Point::from_ints(1, 1)).unwrap_err(),
            FolkError::CoordinateTooLow
        );
        assert_eq!(
            folk_pair(&g, &Point::from_ints(5, 5)).unwrap_err(),
            FolkError::OutsideHull
        );
    }

    #[test]
    fn path_pair_converges_to_target() {
        let g = canonical();
        let target = Point::new(Rat::from_int(2), Rat::ratio(5, 2));
        let pair = folk_pair(&g, &target).unwrap();
        let traj = simulate(
            &g,
            &Strategy::smale(Move::C, pair.plan_x),
            &Strategy::smale(Move::C, pair.plan_y),
            &MatchConfig::new(30_000, 17),
        )
        .unwrap();
        let (sx, sy) = traj.final_average_f64();
        assert!((sx - 2.0).abs() < 0.01, "sx = {sx}");
        assert!((sy - 2.5).abs() < 0.01, "sy = {sy}");
    }

    #[test]
    fn mixed_high_converges_to_target() {
        let g = canonical();
        let target = Point::new(Rat::from_int(2), Rat::ratio(7, 2));
        let pair = folk_pair(&g, &target).unwrap();
        let traj = simulate(
            &g,
            &Strategy::smale(Move::C, pair.plan_x),
            &Strategy::smale(Move::C, pair.plan_y),
            &MatchConfig::new(60_000, 23),
        )
        .unwrap();
        let (sx, sy) = traj.final_average_f64();
        assert!((sx - 2.0).abs() < 0.02, "sx = {sx}");
        assert!((sy - 3.5).abs() < 0.02, "sy = {sy}");
    }
}
