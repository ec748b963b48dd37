//! Smale plans: maps from the running average payoff pair to a cooperation
//! probability.
//!
//! A *simple* plan defects strictly above a separation line and cooperates
//! strictly below it; the value on the line itself is a free choice, made
//! explicit here by [`OnLineRule`]. Region plans defect on a union of
//! half-plane intersections (enough to express every composite construction
//! used in this crate), and path plans defect above a separation path.

use std::cmp::Ordering;

use thiserror::Error;

use crate::game::{Game, SepLine, SepLineError};
use crate::geom::{AffineMap, Line, Point};
use crate::path::{PathSide, SeparationPath};
use crate::scalar::{Scalar, FLOAT_TOL};

#[derive(Debug, Error, PartialEq)]
pub enum SmaleError {
    #[error("point ({x}, {y}) lies outside the hull")]
    OutsideHull { x: f64, y: f64 },
    #[error("equalizer level must satisfy P <= E <= R, got {e}")]
    EqualizerRange { e: f64 },
    #[error("slope must lie strictly between 0 and 1, got {m}")]
    SlopeRange { m: f64 },
    #[error("on-line rule must cooperate at (R,R) for a good plan")]
    NotWeaklyAgreeable,
    #[error("invalid separation line: {0}")]
    BadLine(#[from] SepLineError),
    #[error("cooperation probability must lie in [0,1], got {p}")]
    ProbabilityRange { p: f64 },
    #[error("convex cooperation zone must contain (P,P), (R,R), (T,S)")]
    ZoneMissingCorner,
    #[error("convex cooperation zone must not contain (S,T)")]
    ZoneContainsSt,
    #[error("the co-diagonal midpoint must be interior to the cooperation zone")]
    MidpointNotInterior,
    #[error("region construction requires P < (T+S)/2")]
    NeedsQuadrilateral,
    #[error("region parameter out of range: {what}")]
    RegionParameter { what: &'static str },
}

/// Choice of play on the plan's boundary line or path.
#[derive(Clone, Debug, PartialEq)]
pub enum OnLineRule<S> {
    AlwaysC,
    AlwaysD,
    Prob(S),
    /// Cooperate iff the point's first coordinate is at least `(T+S)/2`.
    /// On the diagonal this is the tit-for-tat style split.
    DiagonalSplit,
}

impl<S: Scalar> OnLineRule<S> {
    fn apply(&self, game: &Game<S>, p: &Point<S>) -> S {
        match self {
            OnLineRule::AlwaysC => S::one(),
            OnLineRule::AlwaysD => S::zero(),
            OnLineRule::Prob(q) => q.clone(),
            OnLineRule::DiagonalSplit => {
                let mid = (game.t().clone() + game.s().clone()).half();
                if p.x.cmp_total(&mid) == Ordering::Less {
                    S::zero()
                } else {
                    S::one()
                }
            }
        }
    }

    /// Rule application at the point `(ax/w, ·)` without the division.
    fn apply_homogeneous(&self, game: &Game<S>, ax: &S, w: &S) -> S {
        match self {
            OnLineRule::AlwaysC => S::one(),
            OnLineRule::AlwaysD => S::zero(),
            OnLineRule::Prob(q) => q.clone(),
            OnLineRule::DiagonalSplit => {
                let mid = (game.t().clone() + game.s().clone()).half();
                if ax.cmp_total(&(mid * w.clone())) == Ordering::Less {
                    S::zero()
                } else {
                    S::one()
                }
            }
        }
    }

    /// Exact cooperation value at a specific point, if deterministic.
    fn value_at(&self, game: &Game<S>, p: &Point<S>) -> Option<bool> {
        match self {
            OnLineRule::AlwaysC => Some(true),
            OnLineRule::AlwaysD => Some(false),
            OnLineRule::DiagonalSplit => Some(self.apply(game, p) == S::one()),
            OnLineRule::Prob(q) => {
                if q == &S::one() {
                    Some(true)
                } else if q.is_zero() {
                    Some(false)
                } else {
                    None
                }
            }
        }
    }
}

/// Rescale a map used only for sign tests so its coefficients are
/// integer-valued, which keeps exact evaluation cheap.
fn sign_map<S: Scalar>(map: AffineMap<S>) -> AffineMap<S> {
    let scale = S::integer_scale_of(&[&map.a, &map.b, &map.c]);
    map.scale(scale)
}

/// One half-plane test: holds when the map is positive (strict) or
/// nonnegative (closed).
#[derive(Clone, Debug)]
pub struct HalfPlaneTest<S> {
    pub map: AffineMap<S>,
    pub strict: bool,
}

impl<S: Scalar> HalfPlaneTest<S> {
    /// Defect strictly above the line.
    pub fn above(game: &Game<S>, line: &Line<S>) -> Self {
        HalfPlaneTest {
            map: sign_map(game.normalized_affine(line)),
            strict: true,
        }
    }

    /// Defect on or left of the vertical line `x = v`.
    pub fn at_or_left_of(game: &Game<S>, v: S) -> Self {
        let _ = game;
        HalfPlaneTest {
            map: sign_map(AffineMap::new(-S::one(), S::zero(), v)),
            strict: false,
        }
    }

    /// Defect on or right of the vertical line `x = v`.
    pub fn at_or_right_of(game: &Game<S>, v: S) -> Self {
        let _ = game;
        HalfPlaneTest {
            map: sign_map(AffineMap::new(S::one(), S::zero(), -v)),
            strict: false,
        }
    }

    pub fn holds(&self, p: &Point<S>, tol: f64) -> bool {
        let sign = self.map.sign_at(p, tol);
        if self.strict {
            sign == Ordering::Greater
        } else {
            sign != Ordering::Less
        }
    }
}

/// Conjunction of half-plane tests.
#[derive(Clone, Debug)]
pub struct Zone<S> {
    pub tests: Vec<HalfPlaneTest<S>>,
}

impl<S: Scalar> Zone<S> {
    pub fn single(test: HalfPlaneTest<S>) -> Self {
        Zone { tests: vec![test] }
    }

    pub fn holds(&self, p: &Point<S>, tol: f64) -> bool {
        self.tests.iter().all(|t| t.holds(p, tol))
    }
}

/// A Smale plan.
#[derive(Clone, Debug)]
pub enum SmalePlan<S> {
    /// Fixed cooperation probability everywhere.
    Constant { prob: S },
    /// Defect above the line, cooperate below, rule on it. The affine
    /// map is the line's normalized associate, cached at construction.
    Simple {
        line: SepLine<S>,
        map: AffineMap<S>,
        on_line: OnLineRule<S>,
    },
    /// Defect where any zone holds, else cooperate with probability `coop`.
    Region { defect_zones: Vec<Zone<S>>, coop: S },
    /// Defect strictly above the path, cooperate strictly below.
    Path {
        path: SeparationPath<S>,
        on_path: OnLineRule<S>,
    },
}

impl<S: Scalar> SmalePlan<S> {
    /// Helper for the cached [`SmalePlan::Simple`] construction.
    pub fn simple(game: &Game<S>, line: SepLine<S>, on_line: OnLineRule<S>) -> Self {
        let map = sign_map(line.affine(game));
        SmalePlan::Simple { line, map, on_line }
    }

    /// Cooperation probability at an average-payoff point.
    pub fn evaluate(&self, game: &Game<S>, p: &Point<S>) -> Result<S, SmaleError> {
        let tol = FLOAT_TOL * game.diameter_f64();
        if !game.contains(p, tol) {
            return Err(SmaleError::OutsideHull {
                x: p.x.to_f64(),
                y: p.y.to_f64(),
            });
        }
        Ok(self.prob_in_hull(game, p))
    }

    /// Evaluation without the hull-membership check; running averages are
    /// convex combinations of payoffs, so the engine skips the test.
    pub fn prob_in_hull(&self, game: &Game<S>, p: &Point<S>) -> S {
        self.prob_homogeneous(game, &p.x, &p.y, &S::one())
    }

    /// Evaluation at the point `(ax/w, ay/w)` with `w > 0`, given without
    /// the division. Affine signs and the on-line splits are all invariant
    /// under the common positive scale, which keeps exact running averages
    /// division-free in the match loop.
    pub fn prob_homogeneous(&self, game: &Game<S>, ax: &S, ay: &S, w: &S) -> S {
        let tol = FLOAT_TOL * w.to_f64().max(1.0);
        match self {
            SmalePlan::Constant { prob } => prob.clone(),
            SmalePlan::Simple { map, on_line, .. } => {
                let v = map.a.clone() * ax.clone()
                    + map.b.clone() * ay.clone()
                    + map.c.clone() * w.clone();
                match v.sign_band(tol) {
                    Ordering::Greater => S::zero(),
                    Ordering::Less => S::one(),
                    Ordering::Equal => on_line.apply_homogeneous(game, ax, w),
                }
            }
            SmalePlan::Region { defect_zones, coop } => {
                let hit = defect_zones.iter().any(|z| {
                    z.tests.iter().all(|t| {
                        let v = t.map.a.clone() * ax.clone()
                            + t.map.b.clone() * ay.clone()
                            + t.map.c.clone() * w.clone();
                        let sign = v.sign_band(tol);
                        if t.strict {
                            sign == Ordering::Greater
                        } else {
                            sign != Ordering::Less
                        }
                    })
                });
                if hit {
                    S::zero()
                } else {
                    coop.clone()
                }
            }
            SmalePlan::Path { path, on_path } => {
                match path.side_of_homogeneous(game, ax, ay, w) {
                    PathSide::Above => S::zero(),
                    PathSide::Below => S::one(),
                    PathSide::On => on_path.apply_homogeneous(game, ax, w),
                }
            }
        }
    }

    /// Deterministic cooperation decision at a point, if there is one.
    pub fn decision_at(&self, game: &Game<S>, p: &Point<S>) -> Option<bool> {
        let v = self.evaluate(game, p).ok()?;
        if v == S::one() {
            Some(true)
        } else if v.is_zero() {
            Some(false)
        } else {
            None
        }
    }

    pub fn simple_line(&self) -> Option<&SepLine<S>> {
        match self {
            SmalePlan::Simple { line, .. } => Some(line),
            _ => None,
        }
    }
}

/// Structural classification flags for a Smale plan.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SmaleFlags {
    /// The plan is simple (all-C always is; all-D only when `P <= (T+S)/2`).
    pub simple: bool,
    pub weakly_agreeable: bool,
    pub weakly_firm: bool,
    pub generous: bool,
    pub convex_generous: bool,
    /// The plan defects above some line through `(R,R)` with slope in (0,1].
    pub has_protection_line: bool,
    pub good: bool,
    pub convex_good: bool,
    pub equalizer: bool,
    pub extortionate: bool,
}

/// Classify a plan from its structure. Decisions that hinge on the plan's
/// values at single points use the exact on-line rules, not sampling.
pub fn classify_smale<S: Scalar>(plan: &SmalePlan<S>, game: &Game<S>) -> SmaleFlags {
    let rr = game.rr();
    let pp = game.pp();
    let weakly_agreeable = plan.decision_at(game, &rr) == Some(true);
    let weakly_firm = plan.decision_at(game, &pp) == Some(false);

    let mut flags = SmaleFlags {
        weakly_agreeable,
        weakly_firm,
        ..SmaleFlags::default()
    };

    match plan {
        SmalePlan::Constant { prob } => {
            if prob == &S::one() {
                // All-C: simple with the top-edge separation line.
                flags.simple = true;
                flags.generous = true;
            } else if prob.is_zero() {
                // All-D: simple only when )(P,P),(T,S)( still separates,
                // i.e. P <= (T+S)/2.
                let mid = (game.t().clone() + game.s().clone()).half();
                flags.simple = game.p().cmp_total(&mid) != Ordering::Greater;
            }
        }
        SmalePlan::Simple { line, on_line, .. } => {
            flags.simple = true;
            let through_rr = line.line().contains(&rr, 0.0);
            let slope_in_01 = line.slope.sign_band(0.0) == Ordering::Greater
                && line.slope.cmp_total(&S::one()) == Ordering::Less;
            if through_rr && slope_in_01 {
                flags.has_protection_line = true;
                // Strictly below the line everywhere on and under the
                // diagonal except (R,R) itself, so generosity reduces to the
                // on-line value at (R,R).
                flags.generous = on_line.value_at(game, &rr) == Some(true);
                // Convex-generous additionally needs cooperation on the
                // whole hull chord.
                if flags.generous && matches!(on_line, OnLineRule::AlwaysC) {
                    flags.convex_generous = true;
                }
            }
            flags.equalizer = line.is_horizontal()
                && line.anchor.y.cmp_total(game.p()) != Ordering::Less
                && line.anchor.y.cmp_total(game.r()) != Ordering::Greater;
            flags.extortionate = line.line().contains(&pp, 0.0)
                && line.slope.sign_band(0.0) == Ordering::Greater
                && line.slope.cmp_total(&S::one()) == Ordering::Less;
        }
        SmalePlan::Region { defect_zones, coop } => {
            if coop == &S::one() {
                let lower_diag = lower_diagonal_region(game);
                let seg_mid = game.codiag_mid();
                let zones_clear_lower = defect_zones
                    .iter()
                    .all(|z| zone_misses_region(z, &lower_diag));
                let zones_clear_segment = defect_zones
                    .iter()
                    .all(|z| zone_strictly_misses_segment(z, &seg_mid, &rr));
                flags.generous = zones_clear_lower && zones_clear_segment;

                // Convexity certificate: every zone a single strict
                // half-plane makes the cooperation zone an intersection of
                // closed half-planes.
                let convex = defect_zones
                    .iter()
                    .all(|z| z.tests.len() == 1 && z.tests[0].strict);
                if convex {
                    let tol = 0.0;
                    let has_corners = [game.pp(), game.rr(), game.ts()].iter().all(|c| {
                        defect_zones.iter().all(|z| !z.holds(c, tol))
                    });
                    let st_out = defect_zones.iter().any(|z| z.holds(&game.st(), tol));
                    let mid = game.codiag_mid();
                    let mid_interior = defect_zones.iter().all(|z| {
                        z.tests[0].map.sign_at(&mid, 0.0) == Ordering::Less
                    });
                    flags.convex_generous =
                        flags.generous && has_corners && st_out && mid_interior;
                }
            }
            flags.has_protection_line = defect_zones.iter().any(|z| {
                z.tests.len() == 1 && z.tests[0].strict && {
                    let map = &z.tests[0].map;
                    // Positive-above orientation: the y coefficient must be
                    // positive for "defect above this line" to hold.
                    map.b.sign_band(0.0) == Ordering::Greater
                        && map.sign_at(&rr, 0.0) == Ordering::Equal
                        && game.is_protection_line(&map.zero_line())
                }
            });
        }
        SmalePlan::Path { path, on_path } => {
            // A path plan is generous only in the degenerate case where the
            // path ends at (R,R) and stays above the diagonal.
            let ends_at_rr = path.last() == &rr;
            let above_diag = path
                .vertices()
                .iter()
                .all(|v| v.y.cmp_total(&v.x) != Ordering::Less);
            flags.generous =
                ends_at_rr && above_diag && on_path.value_at(game, &rr) == Some(true);
        }
    }

    flags.good = flags.weakly_agreeable && flags.has_protection_line && flags.generous;
    flags.convex_good =
        flags.weakly_agreeable && flags.has_protection_line && flags.convex_generous;
    flags
}

/// The on-or-below-diagonal part of the hull: `[(R,R), (T,S), (pbar,pbar)]`.
fn lower_diagonal_region<S: Scalar>(game: &Game<S>) -> [Point<S>; 3] {
    [game.rr(), game.ts(), game.pbar_point()]
}

/// Certificate that a zone cannot meet the region: some test in the zone is
/// nonpositive at all its corners (strict test) or negative (closed test).
fn zone_misses_region<S: Scalar>(zone: &Zone<S>, corners: &[Point<S>; 3]) -> bool {
    zone.tests.iter().any(|t| {
        corners.iter().all(|c| {
            let sign = t.map.sign_at(c, 0.0);
            if t.strict {
                sign != Ordering::Greater
            } else {
                sign == Ordering::Less
            }
        })
    })
}

/// Certificate that a zone's closure avoids the half-open segment `[a, b)`:
/// some test is strictly negative at `a` and nonpositive at `b`.
fn zone_strictly_misses_segment<S: Scalar>(zone: &Zone<S>, a: &Point<S>, b: &Point<S>) -> bool {
    zone.tests.iter().any(|t| {
        t.map.sign_at(a, 0.0) == Ordering::Less && t.map.sign_at(b, 0.0) != Ordering::Greater
    })
}

pub fn make_all_c<S: Scalar>() -> SmalePlan<S> {
    SmalePlan::Constant { prob: S::one() }
}

pub fn make_all_d<S: Scalar>() -> SmalePlan<S> {
    SmalePlan::Constant { prob: S::zero() }
}

pub fn make_constant<S: Scalar>(prob: S) -> Result<SmalePlan<S>, SmaleError> {
    if prob.sign_band(0.0) == Ordering::Less
        || (prob.clone() - S::one()).sign_band(0.0) == Ordering::Greater
    {
        return Err(SmaleError::ProbabilityRange { p: prob.to_f64() });
    }
    Ok(SmalePlan::Constant { prob })
}

/// Horizontal-line plan pinning the opponent's limiting payoff to `e`.
pub fn make_equalizer<S: Scalar>(
    game: &Game<S>,
    e: S,
    on_line: OnLineRule<S>,
) -> Result<SmalePlan<S>, SmaleError> {
    if e.cmp_total(game.p()) == Ordering::Less || e.cmp_total(game.r()) == Ordering::Greater {
        return Err(SmaleError::EqualizerRange { e: e.to_f64() });
    }
    let line = SepLine::new(game, Point::new(game.r().clone(), e), S::zero())?;
    Ok(SmalePlan::simple(game, line, on_line))
}

/// Simple plan on a line through `(P,P)` with slope strictly in (0,1).
pub fn make_extortionate<S: Scalar>(
    game: &Game<S>,
    slope: S,
    on_line: OnLineRule<S>,
) -> Result<SmalePlan<S>, SmaleError> {
    check_open_unit_slope(&slope)?;
    let line = SepLine::new(game, game.pp(), slope)?;
    Ok(SmalePlan::simple(game, line, on_line))
}

/// Good simple plan: line through `(R,R)` with slope strictly in (0,1) and
/// an on-line rule that cooperates at `(R,R)`.
pub fn make_good_simple<S: Scalar>(
    game: &Game<S>,
    slope: S,
    on_line: OnLineRule<S>,
) -> Result<SmalePlan<S>, SmaleError> {
    check_open_unit_slope(&slope)?;
    if on_line.value_at(game, &game.rr()) != Some(true) {
        return Err(SmaleError::NotWeaklyAgreeable);
    }
    let line = SepLine::new(game, game.rr(), slope)?;
    Ok(SmalePlan::simple(game, line, on_line))
}

/// Diagonal plan with the split rule: on the diagonal, cooperate iff the
/// common coordinate is at least `(T+S)/2`.
pub fn make_smale_tft<S: Scalar>(game: &Game<S>) -> SmalePlan<S> {
    let line = SepLine::new(game, game.rr(), S::one()).expect("diagonal separates");
    SmalePlan::simple(game, line, OnLineRule::DiagonalSplit)
}

fn check_open_unit_slope<S: Scalar>(slope: &S) -> Result<(), SmaleError> {
    if slope.sign_band(0.0) != Ordering::Greater
        || slope.cmp_total(&S::one()) != Ordering::Less
    {
        return Err(SmaleError::SlopeRange {
            m: slope.to_f64(),
        });
    }
    Ok(())
}

/// A generous region plan together with the corner point that pins its
/// limit containment: the limit set against any opponent stays in the
/// triangle `[(P,P), (R,R), corner]`.
#[derive(Clone, Debug)]
pub struct GenerousRegionPlan<S> {
    pub plan: SmalePlan<S>,
    pub corner: Point<S>,
}

/// Generous region plan: defect above the protection line through `(R,R)`
/// with the given slope, or above the second line from `(P,P)` through a
/// point `v` on the open segment between `(R,R)` and the protection line's
/// left-edge crossing. Cooperate everywhere else. Requires `P < (T+S)/2`.
///
/// `v_x` defaults to the midpoint of that segment, nudged right so
/// `v_x >= P`.
pub fn make_generous_region<S: Scalar>(
    game: &Game<S>,
    slope: S,
    v_x: Option<S>,
) -> Result<GenerousRegionPlan<S>, SmaleError> {
    let mid = (game.t().clone() + game.s().clone()).half();
    if game.p().cmp_total(&mid) != Ordering::Less {
        return Err(SmaleError::NeedsQuadrilateral);
    }
    check_open_unit_slope(&slope)?;
    let l1 = Line::through(&game.rr(), slope);
    // Crossing of l1 with the left hull edge )(P,P),(S,T)(.
    let left = Line::through_pair(&game.pp(), &game.st());
    let a = match crate::geom::line_intersection(&l1, &left) {
        crate::geom::Intersection::Point(p) => p,
        _ => unreachable!("protection line always crosses the left edge line"),
    };
    let vx = match v_x {
        Some(x) => x,
        None => {
            let m = (a.x.clone() + game.r().clone()).half();
            m.max_val(game.p().clone())
        }
    };
    if vx.cmp_total(game.p()) == Ordering::Less
        || vx.cmp_total(&a.x) == Ordering::Less
        || vx.cmp_total(game.r()) != Ordering::Less
    {
        return Err(SmaleError::RegionParameter {
            what: "v must lie on ((R,R), A) with v_x >= P",
        });
    }
    let v = match l1.y_at(vx.clone()) {
        Some(y) => Point::new(vx, y),
        None => unreachable!("protection line is never vertical"),
    };
    let l2 = Line::through_pair(&game.pp(), &v);
    Ok(GenerousRegionPlan {
        plan: SmalePlan::Region {
            defect_zones: vec![
                Zone::single(HalfPlaneTest::above(game, &l1)),
                Zone::single(HalfPlaneTest::above(game, &l2)),
            ],
            coop: S::one(),
        },
        corner: v,
    })
}

/// Plan cooperating exactly on a closed convex zone given by its vertices.
/// The zone must contain `(P,P)`, `(R,R)`, `(T,S)`, exclude `(S,T)`, and
/// hold the co-diagonal midpoint in its interior.
pub fn make_convex_generous<S: Scalar>(
    game: &Game<S>,
    zone_vertices: &[Point<S>],
) -> Result<SmalePlan<S>, SmaleError> {
    let hull = crate::geom::ConvexRegion::hull_of(zone_vertices);
    for corner in [game.pp(), game.rr(), game.ts()] {
        if !hull.contains(&corner, 0.0) {
            return Err(SmaleError::ZoneMissingCorner);
        }
    }
    if hull.contains(&game.st(), 0.0) {
        return Err(SmaleError::ZoneContainsSt);
    }
    let mut marked = hull.clone();
    marked.mark_ambient_edges(&game.boundary_lines());
    if !marked.interior_contains(&game.codiag_mid(), 0.0) {
        return Err(SmaleError::MidpointNotInterior);
    }
    // Defect zones: strictly outside any edge that is not a hull boundary
    // edge.
    let verts = hull.vertices();
    let n = verts.len();
    let boundary = game.boundary_lines();
    let mut zones = Vec::new();
    for i in 0..n {
        let a = &verts[i];
        let b = &verts[(i + 1) % n];
        let on_boundary = boundary
            .iter()
            .any(|l| l.contains(a, 0.0) && l.contains(b, 0.0));
        if on_boundary {
            continue;
        }
        let line = Line::through_pair(a, b);
        let raw = line.affine();
        // Orient outward: positive away from the zone interior.
        let inner = centroid(verts);
        let oriented = if raw.sign_at(&inner, 0.0) == Ordering::Greater {
            raw.neg()
        } else {
            raw
        };
        zones.push(Zone::single(HalfPlaneTest {
            map: sign_map(oriented),
            strict: true,
        }));
    }
    Ok(SmalePlan::Region {
        defect_zones: zones,
        coop: S::one(),
    })
}

fn centroid<S: Scalar>(pts: &[Point<S>]) -> Point<S> {
    let n = S::from_int(pts.len() as i64);
    let mut x = S::zero();
    let mut y = S::zero();
    for p in pts {
        x = x + p.x.clone();
        y = y + p.y.clone();
    }
    Point::new(x / n.clone(), y / n)
}

/// Predicted limit of a simple-vs-simple match.
#[derive(Clone, Debug, PartialEq)]
pub enum PredictedLimit<S> {
    Point(Point<S>),
    /// Both lines the diagonal: the outcome depends on the on-line rules.
    DiagonalPair,
    /// Both lines the co-diagonal: likewise rule-dependent.
    CoDiagonalPair,
}

#[derive(Debug, Error, PartialEq)]
pub enum PredictError {
    #[error("predicted limits require simple plans on both sides")]
    NotSimple,
}

/// Intersection of X's line with the switch of Y's line; the two extreme
/// self-pairings are tagged instead of returning a point.
pub fn predicted_limit<S: Scalar>(
    game: &Game<S>,
    plan_x: &SmalePlan<S>,
    plan_y: &SmalePlan<S>,
) -> Result<PredictedLimit<S>, PredictError> {
    let lx = effective_simple_line(game, plan_x).ok_or(PredictError::NotSimple)?;
    let ly = effective_simple_line(game, plan_y).ok_or(PredictError::NotSimple)?;
    let switched = ly.line().switch();
    match crate::geom::line_intersection(&lx.line(), &switched) {
        crate::geom::Intersection::Point(p) => Ok(PredictedLimit::Point(p)),
        _ => {
            if lx.is_diagonal(game) {
                Ok(PredictedLimit::DiagonalPair)
            } else {
                Ok(PredictedLimit::CoDiagonalPair)
            }
        }
    }
}

/// The separation line of a plan that acts as a simple plan: explicit simple
/// plans, all-C (top edge), and all-D (bottom edge, when it separates).
pub fn effective_simple_line<S: Scalar>(
    game: &Game<S>,
    plan: &SmalePlan<S>,
) -> Option<SepLine<S>> {
    match plan {
        SmalePlan::Simple { line, .. } => Some(line.clone()),
        SmalePlan::Constant { prob } => {
            if prob == &S::one() {
                let line = Line::through_pair(&game.rr(), &game.st());
                SepLine::from_line(game, &line).ok()
            } else if prob.is_zero() {
                let line = Line::through_pair(&game.pp(), &game.ts());
                SepLine::from_line(game, &line).ok()
            } else {
                None
            }
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use num_traits::{One, Zero};

    use super::*;
    use crate::scalar::Rat;

    fn canonical() -> Game<Rat> {
        Game::from_ints(5, 3, 1, 0).unwrap()
    }

    fn pt(x: i64, y: i64) -> Point<Rat> {
        Point::from_ints(x, y)
    }

    #[test]
    fn good_simple_defects_above_cooperates_below() {
        let g = canonical();
        let plan = make_good_simple(&g, Rat::ratio(1, 2), OnLineRule::AlwaysC).unwrap();
        // (P, R) = (1, 3) lies above any protection line.
        assert_eq!(plan.evaluate(&g, &pt(1, 3)).unwrap(), Rat::zero());
        assert_eq!(plan.evaluate(&g, &pt(2, 2)).unwrap(), Rat::one());
        // On the line at (R,R).
        assert_eq!(plan.evaluate(&g, &g.rr()).unwrap(), Rat::one());
        // Domain error off the hull.
        assert!(matches!(
            plan.evaluate(&g, &pt(5, 5)),
            Err(SmaleError::OutsideHull { .. })
        ));
    }

    #[test]
    fn all_c_cooperates_everywhere() {
        let g = canonical();
        let plan = make_all_c::<Rat>();
        for p in [pt(1, 1), pt(3, 3), pt(2, 3)] {
            assert_eq!(plan.evaluate(&g, &p).unwrap(), Rat::one());
        }
        let flags = classify_smale(&plan, &g);
        assert!(flags.simple && flags.generous && flags.weakly_agreeable);
        assert!(!flags.weakly_firm);
    }

    #[test]
    fn all_d_not_simple_in_triangle_games() {
        let quad_game = canonical();
        let flags = classify_smale(&make_all_d::<Rat>(), &quad_game);
        assert!(flags.simple && flags.weakly_firm && !flags.weakly_agreeable);

        let tri_game: Game<Rat> = Game::from_ints(5, 4, 3, 0).unwrap();
        let flags = classify_smale(&make_all_d::<Rat>(), &tri_game);
        assert!(!flags.simple);
    }

    #[test]
    fn smale_tft_diagonal_split() {
        let g = canonical();
        let plan = make_smale_tft(&g);
        // On the diagonal at (Q,Q) with Q >= (T+S)/2 = 5/2: cooperate.
        let q = Point::new(Rat::ratio(5, 2), Rat::ratio(5, 2));
        assert_eq!(plan.evaluate(&g, &q).unwrap(), Rat::one());
        let q = Point::new(Rat::from_int(2), Rat::from_int(2));
        assert_eq!(plan.evaluate(&g, &q).unwrap(), Rat::zero());
        let flags = classify_smale(&plan, &g);
        // Weakly agreeable and firm, but not generous (no open cooperation
        // neighborhood above the diagonal).
        assert!(flags.weakly_agreeable && flags.weakly_firm && !flags.generous);
    }

    #[test]
    fn classifier_round_trips_constructors() {
        let g = canonical();

        let good = make_good_simple(&g, Rat::ratio(1, 2), OnLineRule::AlwaysC).unwrap();
        let f = classify_smale(&good, &g);
        assert!(f.good && f.convex_good && f.generous && f.has_protection_line);

        // A good plan that defects on the open line part is still good but
        // not convex-good.
        let split = make_good_simple(&g, Rat::ratio(1, 2), OnLineRule::DiagonalSplit).unwrap();
        let f = classify_smale(&split, &g);
        assert!(f.good && !f.convex_good);

        let eq = make_equalizer(&g, Rat::from_int(2), OnLineRule::AlwaysC).unwrap();
        let f = classify_smale(&eq, &g);
        assert!(f.equalizer && !f.good && !f.generous);

        let ext = make_extortionate(&g, Rat::ratio(1, 2), OnLineRule::AlwaysD).unwrap();
        let f = classify_smale(&ext, &g);
        assert!(f.extortionate && f.weakly_firm && !f.weakly_agreeable);

        let region = make_generous_region(&g, Rat::ratio(1, 2), None).unwrap().plan;
        let f = classify_smale(&region, &g);
        assert!(f.generous && f.has_protection_line && f.good);

        let quad = make_convex_generous(
            &g,
            &[g.pp(), Point::new(Rat::ratio(3, 2), Rat::from_int(2)), g.rr(), g.ts()],
        )
        .unwrap();
        let f = classify_smale(&quad, &g);
        assert!(f.convex_generous && f.convex_good && f.generous);
    }

    #[test]
    fn convex_generous_rejects_st() {
        let g = canonical();
        let err = make_convex_generous(&g, &[g.pp(), g.rr(), g.ts(), g.st()]).unwrap_err();
        assert_eq!(err, SmaleError::ZoneContainsSt);
    }

    #[test]
    fn good_simple_rejects_defecting_rule() {
        let g = canonical();
        assert_eq!(
            make_good_simple(&g, Rat::ratio(1, 2), OnLineRule::AlwaysD).unwrap_err(),
            SmaleError::NotWeaklyAgreeable
        );
        assert!(matches!(
            make_good_simple(&g, Rat::one(), OnLineRule::AlwaysC).unwrap_err(),
            SmaleError::SlopeRange { .. }
        ));
    }

    #[test]
    fn predicted_limits() {
        let g = canonical();
        let good = make_good_simple(&g, Rat::ratio(1, 2), OnLineRule::AlwaysC).unwrap();
        let eq2 = make_equalizer(&g, Rat::from_int(2), OnLineRule::AlwaysC).unwrap();
        assert_eq!(
            predicted_limit(&g, &good, &eq2).unwrap(),
            PredictedLimit::Point(Point::new(Rat::from_int(2), Rat::ratio(5, 2)))
        );

        // Good vs all-D: the crossing of the good line with the switched
        // bottom edge.
        let alld = make_all_d::<Rat>();
        assert_eq!(
            predicted_limit(&g, &good, &alld).unwrap(),
            PredictedLimit::Point(Point::new(Rat::ratio(7, 9), Rat::ratio(17, 9)))
        );

        // Extortion vs all-C: B on ((R,R),(T,S)) with P < B_Y < R < B_X.
        let ext = make_extortionate(&g, Rat::ratio(1, 2), OnLineRule::AlwaysD).unwrap();
        let allc = make_all_c::<Rat>();
        assert_eq!(
            predicted_limit(&g, &ext, &allc).unwrap(),
            PredictedLimit::Point(Point::new(Rat::ratio(7, 2), Rat::ratio(9, 4)))
        );

        // Extreme cases.
        let tft = make_smale_tft(&g);
        assert_eq!(
            predicted_limit(&g, &tft, &tft).unwrap(),
            PredictedLimit::DiagonalPair
        );
        let codiag = SmalePlan::simple(
            &g,
            SepLine::new(&g, g.ts(), -Rat::one()).unwrap(),
            OnLineRule::AlwaysC,
        );
        assert_eq!(
            predicted_limit(&g, &codiag, &codiag).unwrap(),
            PredictedLimit::CoDiagonalPair
        );
    }

    #[test]
    fn good_region_plan_confines_defection() {
        let g = canonical();
        let plan = make_generous_region(&g, Rat::ratio(1, 2), None).unwrap().plan;
        // Interior points below both lines cooperate.
        assert_eq!(plan.evaluate(&g, &pt(2, 2)).unwrap(), Rat::one());
        // Above the protection line: defect.
        assert_eq!(plan.evaluate(&g, &pt(1, 3)).unwrap(), Rat::zero());
    }
}
