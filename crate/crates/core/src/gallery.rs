//! Worked composite-plan constructions.
//!
//! These are the two region-plan scenarios whose limit behavior goes beyond
//! single points: a pair whose average payoff orbits the boundary of a
//! quadrilateral forever, and a guard plan for high-punishment games that
//! forces every pair match to settle at either mutual punishment or mutual
//! reward.

use std::cmp::Ordering;

use thiserror::Error;

use crate::game::Game;
use crate::geom::{line_intersection, ConvexRegion, Intersection, Line, Point};
use crate::scalar::Scalar;
use crate::smale::{HalfPlaneTest, SmalePlan, Zone};

#[derive(Debug, Error, PartialEq)]
pub enum GalleryError {
    #[error("construction requires P < (T+S)/2")]
    NeedsQuadrilateral,
    #[error("construction requires P >= (T+S)/2")]
    NeedsTriangle,
    #[error("corner must satisfy R > v_y > v_x >= P")]
    BadCorner,
    #[error("v' must lie on [v, (R,R)) along the upper line")]
    BadVPrime,
    #[error("w must lie on )(S,T),v'( strictly between the upper line and the diagonal")]
    BadW,
    #[error("v must lie on the protection line with P <= v_x < R")]
    BadGuardCorner,
}

/// The limit-cycle pair: X plays the convex-good plan cooperating on the
/// quadrilateral `[(P,P), v, (R,R), (T,S)]`; Y cooperates exactly when the
/// (unswitched) average sits in the quadrilateral `[(P,P), (q,q), w, w'']`.
/// Their match orbits the boundary of `cycle` = `[v, w', w, v']`.
#[derive(Clone, Debug)]
pub struct LimitCyclePair<S> {
    pub plan_x: SmalePlan<S>,
    pub plan_y: SmalePlan<S>,
    /// Vertices of the limit quadrilateral, in hull order.
    pub cycle: Vec<Point<S>>,
    /// Y's cooperation region in X coordinates.
    pub y_coop_region: Vec<Point<S>>,
    /// The triangle `[(P,P), v, (R,R)]` that bounds the X plan's limit set
    /// against arbitrary opponents.
    pub x_bound_triangle: Vec<Point<S>>,
}

/// Build the limit-cycle pair from the free choices `v`, `v'_x`, `w_x`.
pub fn limit_cycle_pair<S: Scalar>(
    game: &Game<S>,
    v: &Point<S>,
    v_prime_x: S,
    w_x: S,
) -> Result<LimitCyclePair<S>, GalleryError> {
    let mid = (game.t().clone() + game.s().clone()).half();
    if game.p().cmp_total(&mid) != Ordering::Less {
        return Err(GalleryError::NeedsQuadrilateral);
    }
    // R > v_y > v_x >= P.
    if v.y.cmp_total(game.r()) != Ordering::Less
        || v.x.cmp_total(&v.y) != Ordering::Less
        || v.x.cmp_total(game.p()) == Ordering::Less
    {
        return Err(GalleryError::BadCorner);
    }

    let l1 = Line::through_pair(&game.rr(), v);
    let l2 = Line::through_pair(&game.pp(), v);

    // v' on [v, (R,R)) along l1.
    if v_prime_x.cmp_total(&v.x) == Ordering::Less
        || v_prime_x.cmp_total(game.r()) != Ordering::Less
    {
        return Err(GalleryError::BadVPrime);
    }
    let v_prime = Point::new(
        v_prime_x.clone(),
        l1.y_at(v_prime_x).expect("l1 is never vertical"),
    );

    // w on the line from (S,T) through v', strictly below l1 and strictly
    // above the diagonal.
    let l_prime = Line::through_pair(&game.st(), &v_prime);
    let w = Point::new(
        w_x.clone(),
        l_prime.y_at(w_x).expect("l' is never vertical"),
    );
    let below_l1 = l1
        .y_at(w.x.clone())
        .map(|y| w.y.cmp_total(&y) == Ordering::Less)
        .unwrap_or(false);
    let above_diag = w.y.cmp_total(&w.x) == Ordering::Greater;
    if !below_l1 || !above_diag {
        return Err(GalleryError::BadW);
    }

    let l = Line::through_pair(&game.rr(), &w);

    let q = match line_intersection(&l_prime, &game.diagonal()) {
        Intersection::Point(p) => p,
        _ => return Err(GalleryError::BadW),
    };
    let w_prime = match line_intersection(&l, &l2) {
        Intersection::Point(p) => p,
        _ => return Err(GalleryError::BadW),
    };
    let left_edge_line = Line::through_pair(&game.pp(), &game.st());
    let w_dprime = match line_intersection(&l, &left_edge_line) {
        Intersection::Point(p) => p,
        _ => return Err(GalleryError::BadW),
    };

    let plan_x = SmalePlan::Region {
        defect_zones: vec![
            Zone::single(HalfPlaneTest::above(game, &l1)),
            Zone::single(HalfPlaneTest::above(game, &l2)),
        ],
        coop: S::one(),
    };

    // Y cooperates on the switch of its region: the engine evaluates Y's
    // plan at the switched average, so Y ends up cooperating exactly when
    // the average is in the region itself.
    let y_region = [game.pp(), q.clone(), w.clone(), w_dprime.clone()];
    let y_zone_region = ConvexRegion::hull_of(&y_region.iter().map(Point::switch).collect::<Vec<_>>());
    let mut zones = Vec::new();
    let verts = y_zone_region.vertices();
    let n = verts.len();
    for i in 0..n {
        let a = &verts[i];
        let b = &verts[(i + 1) % n];
        let line = Line::through_pair(a, b);
        let raw = line.affine();
        let inner = {
            let mut cx = S::zero();
            let mut cy = S::zero();
            for p in verts {
                cx = cx + p.x.clone();
                cy = cy + p.y.clone();
            }
            let len = S::from_int(n as i64);
            Point::new(cx / len.clone(), cy / len)
        };
        let oriented = if raw.sign_at(&inner, 0.0) == Ordering::Greater {
            raw.neg()
        } else {
            raw
        };
        let scale = S::integer_scale_of(&[&oriented.a, &oriented.b, &oriented.c]);
        zones.push(Zone::single(HalfPlaneTest {
            map: oriented.scale(scale),
            strict: true,
        }));
    }
    let plan_y = SmalePlan::Region {
        defect_zones: zones,
        coop: S::one(),
    };

    Ok(LimitCyclePair {
        plan_x,
        plan_y,
        cycle: vec![w_prime, w, v_prime, v.clone()],
        y_coop_region: y_region.to_vec(),
        x_bound_triangle: vec![game.pp(), v.clone(), game.rr()],
    })
}

/// Guard plan for games with `P >= (T+S)/2`: defect above the protection
/// line, above the line from `(P,P)` through `v`, or at/left of the
/// vertical through `P`. Any limit set against any opponent stays in
/// `[w, (P,P), v, (R,R)]`; two guards playing each other settle at `(P,P)`
/// or `(R,R)`.
#[derive(Clone, Debug)]
pub struct HighPunishmentGuard<S> {
    pub plan: SmalePlan<S>,
    /// Hull of the reachable limit region.
    pub bound: Vec<Point<S>>,
}

pub fn high_punishment_guard<S: Scalar>(
    game: &Game<S>,
    slope: S,
    v_x: S,
) -> Result<HighPunishmentGuard<S>, GalleryError> {
    let mid = (game.t().clone() + game.s().clone()).half();
    if game.p().cmp_total(&mid) == Ordering::Less {
        return Err(GalleryError::NeedsTriangle);
    }
    if slope.sign_band(0.0) != Ordering::Greater || slope.cmp_total(&S::one()) != Ordering::Less
    {
        return Err(GalleryError::BadGuardCorner);
    }
    let protection = Line::through(&game.rr(), slope);
    if v_x.cmp_total(game.p()) == Ordering::Less || v_x.cmp_total(game.r()) != Ordering::Less {
        return Err(GalleryError::BadGuardCorner);
    }
    let v = Point::new(
        v_x.clone(),
        protection.y_at(v_x).expect("protection line is never vertical"),
    );
    let l1 = Line::through_pair(&game.pp(), &v);
    // w: the vertical through P meets the co-diagonal at (P, T+S-P).
    let w = Point::new(
        game.p().clone(),
        game.t().clone() + game.s().clone() - game.p().clone(),
    );
    let plan = SmalePlan::Region {
        defect_zones: vec![
            Zone::single(HalfPlaneTest::above(game, &protection)),
            Zone::single(HalfPlaneTest::above(game, &l1)),
            Zone::single(HalfPlaneTest::at_or_left_of(game, game.p().clone())),
        ],
        coop: S::one(),
    };
    Ok(HighPunishmentGuard {
        plan,
        bound: vec![w, game.pp(), v, game.rr()],
    })
}
