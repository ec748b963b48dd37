//! Payoff parameters, the convex outcome region, and separation-line
//! geometry.
//!
//! The payoff quadruple `(T, R, P, S)` must satisfy `T > R > P > S` and
//! `2R > T + S`. The achievable average payoffs form the convex hull of the
//! four payoff pairs: a quadrilateral when `P < (T+S)/2`, otherwise the
//! triangle `[(S,T), (R,R), (T,S)]` (which then contains `(P,P)`).
//!
//! A *separation line* puts `(S,T)` and `(R,R)` in one closed half-plane and
//! `(P,P)`, `(T,S)` in the other. Such a line is never vertical and has
//! slope `m` with `|m| <= 1`; slope 1 only for the diagonal, slope −1 only
//! for the co-diagonal.

use std::cmp::Ordering;

use thiserror::Error;

use crate::geom::{
    cross, line_intersection, AffineMap, ConvexRegion, Intersection, Line, Outcome, Point,
    Segment,
};
use crate::scalar::{Scalar, FLOAT_TOL};

#[derive(Debug, Error, PartialEq)]
pub enum GameError {
    #[error("payoff ordering violated: need T > R, got T = {t}, R = {r}")]
    TemptationNotLargest { t: f64, r: f64 },
    #[error("payoff ordering violated: need R > P, got R = {r}, P = {p}")]
    RewardNotAbovePunishment { r: f64, p: f64 },
    #[error("payoff ordering violated: need P > S, got P = {p}, S = {s}")]
    PunishmentNotAboveSucker { p: f64, s: f64 },
    #[error("cooperation premium violated: need 2R > T + S, got 2R = {two_r}, T + S = {t_plus_s}")]
    CooperationPremium { two_r: f64, t_plus_s: f64 },
    #[error("payoffs must be finite")]
    NonFinite,
}

/// Validated payoff parameters together with the derived hull geometry.
#[derive(Clone, Debug)]
pub struct Game<S> {
    t: S,
    r: S,
    p: S,
    s: S,
    /// Hull vertices, counterclockwise.
    hull: ConvexRegion<S>,
    /// min(P, (T+S)/2); the diagonal meets the hull in [(pbar,pbar), (R,R)].
    pbar: S,
    /// (T,S) when P <= (T+S)/2, else the point where )(S,T),(P,P)( crosses
    /// the open segment ((R,R),(T,S)).
    wbar: Point<S>,
}

impl<S: Scalar> Game<S> {
    pub fn new(t: S, r: S, p: S, s: S) -> Result<Self, GameError> {
        for v in [&t, &r, &p, &s] {
            if !v.to_f64().is_finite() {
                return Err(GameError::NonFinite);
            }
        }
        if t.cmp_total(&r) != Ordering::Greater {
            return Err(GameError::TemptationNotLargest {
                t: t.to_f64(),
                r: r.to_f64(),
            });
        }
        if r.cmp_total(&p) != Ordering::Greater {
            return Err(GameError::RewardNotAbovePunishment {
                r: r.to_f64(),
                p: p.to_f64(),
            });
        }
        if p.cmp_total(&s) != Ordering::Greater {
            return Err(GameError::PunishmentNotAboveSucker {
                p: p.to_f64(),
                s: s.to_f64(),
            });
        }
        let two_r = r.clone() + r.clone();
        let t_plus_s = t.clone() + s.clone();
        if two_r.cmp_total(&t_plus_s) != Ordering::Greater {
            return Err(GameError::CooperationPremium {
                two_r: two_r.to_f64(),
                t_plus_s: t_plus_s.to_f64(),
            });
        }

        let st = Point::new(s.clone(), t.clone());
        let rr = Point::new(r.clone(), r.clone());
        let ts = Point::new(t.clone(), s.clone());
        let pp = Point::new(p.clone(), p.clone());
        let mid = t_plus_s.half();
        let quad = p.cmp_total(&mid) == Ordering::Less;
        let hull = if quad {
            ConvexRegion::from_ordered(vec![pp.clone(), ts.clone(), rr.clone(), st.clone()])
        } else {
            ConvexRegion::from_ordered(vec![ts.clone(), rr.clone(), st.clone()])
        };
        let pbar = p.clone().min_val(mid.clone());
        let wbar = if quad || p == mid {
            ts.clone()
        } else {
            let cut = Line::through_pair(&st, &pp);
            match line_intersection(&cut, &Line::through_pair(&rr, &ts)) {
                Intersection::Point(w) => w,
                _ => unreachable!("the cut line always crosses the right edge"),
            }
        };
        Ok(Game {
            t,
            r,
            p,
            s,
            hull,
            pbar,
            wbar,
        })
    }

    pub fn from_ints(t: i64, r: i64, p: i64, s: i64) -> Result<Self, GameError> {
        Game::new(
            S::from_int(t),
            S::from_int(r),
            S::from_int(p),
            S::from_int(s),
        )
    }

    pub fn t(&self) -> &S {
        &self.t
    }
    pub fn r(&self) -> &S {
        &self.r
    }
    pub fn p(&self) -> &S {
        &self.p
    }
    pub fn s(&self) -> &S {
        &self.s
    }

    /// Payoff pair for an outcome, X coordinate first.
    pub fn payoff(&self, o: Outcome) -> Point<S> {
        match o {
            Outcome::Cc => self.rr(),
            Outcome::Cd => self.st(),
            Outcome::Dc => self.ts(),
            Outcome::Dd => self.pp(),
        }
    }

    pub fn st(&self) -> Point<S> {
        Point::new(self.s.clone(), self.t.clone())
    }
    pub fn rr(&self) -> Point<S> {
        Point::new(self.r.clone(), self.r.clone())
    }
    pub fn ts(&self) -> Point<S> {
        Point::new(self.t.clone(), self.s.clone())
    }
    pub fn pp(&self) -> Point<S> {
        Point::new(self.p.clone(), self.p.clone())
    }

    /// Midpoint of the co-diagonal, `((T+S)/2, (T+S)/2)`.
    pub fn codiag_mid(&self) -> Point<S> {
        let m = (self.t.clone() + self.s.clone()).half();
        Point::new(m.clone(), m)
    }

    pub fn pbar(&self) -> &S {
        &self.pbar
    }

    pub fn pbar_point(&self) -> Point<S> {
        Point::new(self.pbar.clone(), self.pbar.clone())
    }

    pub fn wbar(&self) -> &Point<S> {
        &self.wbar
    }

    pub fn is_quadrilateral(&self) -> bool {
        self.hull.vertices().len() == 4
    }

    pub fn hull(&self) -> &ConvexRegion<S> {
        &self.hull
    }

    pub fn contains(&self, p: &Point<S>, tol: f64) -> bool {
        self.hull.contains(p, tol)
    }

    /// Euclidean diameter of the hull, `sqrt(2)·(T−S)`.
    pub fn diameter_f64(&self) -> f64 {
        std::f64::consts::SQRT_2 * (self.t.to_f64() - self.s.to_f64())
    }

    /// Boundary lines of the hull (used to decide which region edges count
    /// as closed in interior tests).
    pub fn boundary_lines(&self) -> Vec<Line<S>> {
        let vs = self.hull.vertices();
        let n = vs.len();
        (0..n)
            .map(|i| Line::through_pair(&vs[i], &vs[(i + 1) % n]))
            .collect()
    }

    pub fn diagonal(&self) -> Line<S> {
        Line::through(&self.pp(), S::one())
    }

    pub fn co_diagonal(&self) -> Line<S> {
        Line::through_pair(&self.st(), &self.ts())
    }

    /// Separation test: `(S,T)` and `(R,R)` in one closed half-plane,
    /// `(P,P)` and `(T,S)` in the other. Vertical lines never separate.
    pub fn is_separation_line(&self, line: &Line<S>) -> bool {
        let l = line.affine();
        let upper_min = l
            .sign_at(&self.st(), 0.0)
            .min(l.sign_at(&self.rr(), 0.0));
        let lower_max = l
            .sign_at(&self.pp(), 0.0)
            .max(l.sign_at(&self.ts(), 0.0));
        match line {
            Line::Vertical { .. } => false,
            Line::Slant { .. } => {
                upper_min != Ordering::Less && lower_max != Ordering::Greater
            }
        }
    }

    /// Strict separation: no hull corner lies on the line.
    pub fn is_strict_separation_line(&self, line: &Line<S>) -> bool {
        if !self.is_separation_line(line) {
            return false;
        }
        let l = line.affine();
        [self.st(), self.rr(), self.pp(), self.ts()]
            .iter()
            .all(|v| l.sign_at(v, 0.0) != Ordering::Equal)
    }

    /// Protection line: through `(R,R)` with slope in (0, 1].
    pub fn is_protection_line(&self, line: &Line<S>) -> bool {
        match line {
            Line::Vertical { .. } => false,
            Line::Slant { slope, .. } => {
                line.contains(&self.rr(), 0.0)
                    && slope.sign_band(0.0) == Ordering::Greater
                    && slope.cmp_total(&S::one()) != Ordering::Greater
            }
        }
    }

    /// Upper triangle with vertex `s`: the hull of `s`, `(S,T)`, `(R,R)`.
    pub fn upper_triangle(&self, s: &Point<S>) -> ConvexRegion<S> {
        let mut region = ConvexRegion::hull_of(&[s.clone(), self.st(), self.rr()]);
        region.mark_ambient_edges(&self.boundary_lines());
        region
    }

    /// Lower quadrangle with vertex `s`: the hull of `s`, `(T,S)`, `(P,P)`,
    /// `(pbar, pbar)`.
    pub fn lower_quadrangle(&self, s: &Point<S>) -> ConvexRegion<S> {
        let mut region =
            ConvexRegion::hull_of(&[s.clone(), self.ts(), self.pp(), self.pbar_point()]);
        region.mark_ambient_edges(&self.boundary_lines());
        region
    }

    /// The two hull edges every separation line must cross: the left edge
    /// `[(pbar,pbar), (S,T)]` and the right edge `[(R,R), (T,S)]`.
    pub fn left_edge(&self) -> Segment<S> {
        Segment::new(self.pbar_point(), self.st())
    }

    pub fn right_edge(&self) -> Segment<S> {
        Segment::new(self.rr(), self.ts())
    }

    /// Point of the left edge at the given height, when it exists.
    pub fn left_edge_at_height(&self, y: S) -> Option<Point<S>> {
        let seg = self.left_edge();
        if y.cmp_total(&self.pbar) == Ordering::Less || y.cmp_total(&self.t) == Ordering::Greater {
            return None;
        }
        let line = seg.line();
        match line {
            Line::Vertical { x } => Some(Point::new(x, y)),
            Line::Slant { slope, intercept } => {
                // y = m x + b  =>  x = (y - b)/m ; the left edge is never
                // horizontal because T > pbar.
                let x = (y.clone() - intercept) / slope;
                Some(Point::new(x, y))
            }
        }
    }

    /// Point of the right edge at the given height, when it exists.
    pub fn right_edge_at_height(&self, y: S) -> Option<Point<S>> {
        if y.cmp_total(&self.s) == Ordering::Less || y.cmp_total(&self.r) == Ordering::Greater {
            return None;
        }
        let line = self.right_edge().line();
        match line {
            Line::Vertical { x } => Some(Point::new(x, y)),
            Line::Slant { slope, intercept } => {
                let x = (y.clone() - intercept) / slope;
                Some(Point::new(x, y))
            }
        }
    }

    /// Maximum of `|L|` over the hull (attained at a vertex).
    pub fn max_abs_on_hull(&self, map: &AffineMap<S>) -> S {
        self.hull
            .vertices()
            .iter()
            .map(|v| map.eval(v).abs())
            .reduce(|a, b| a.max_val(b))
            .expect("hull has vertices")
    }

    /// Affine map associated with a line: zero on it, positive above, scaled
    /// so its maximum absolute value over the hull is 1.
    pub fn normalized_affine(&self, line: &Line<S>) -> AffineMap<S> {
        let raw = line.affine();
        let m = self.max_abs_on_hull(&raw);
        assert!(
            m.sign_band(0.0) == Ordering::Greater,
            "line does not meet the hull's span"
        );
        raw.scale(S::one() / m)
    }

    /// Sample a point of the hull from two unit parameters (deterministic
    /// convex mixing; not uniform, but covers the hull).
    pub fn hull_point_from_params(&self, u: f64, v: f64) -> Point<S> {
        let vs = self.hull.vertices();
        let a = &vs[0];
        let b = &vs[1];
        let c = &vs[2];
        let d = if vs.len() == 4 { &vs[3] } else { &vs[2] };
        // Bilinear patch over the (possibly degenerate) quad.
        let su = S::from_f64_exact(u);
        let sv = S::from_f64_exact(v);
        let p = a.lerp(b, su.clone());
        let q = d.lerp(c, su);
        p.lerp(&q, sv)
    }
}

/// A validated separation line, stored as anchor and slope.
#[derive(Clone, Debug, PartialEq)]
pub struct SepLine<S> {
    pub anchor: Point<S>,
    pub slope: S,
}

#[derive(Debug, Error, PartialEq)]
pub enum SepLineError {
    #[error("not a separation line: corner {corner} falls on the wrong side")]
    WrongSide { corner: &'static str },
    #[error("a separation line cannot be vertical")]
    Vertical,
}

impl<S: Scalar> SepLine<S> {
    pub fn new(game: &Game<S>, anchor: Point<S>, slope: S) -> Result<Self, SepLineError> {
        let line = Line::through(&anchor, slope.clone());
        Self::check(game, &line)?;
        Ok(SepLine { anchor, slope })
    }

    pub fn from_line(game: &Game<S>, line: &Line<S>) -> Result<Self, SepLineError> {
        Self::check(game, line)?;
        match line {
            Line::Vertical { .. } => Err(SepLineError::Vertical),
            Line::Slant { slope, intercept } => Ok(SepLine {
                anchor: Point::new(S::zero(), intercept.clone()),
                slope: slope.clone(),
            }),
        }
    }

    fn check(game: &Game<S>, line: &Line<S>) -> Result<(), SepLineError> {
        if matches!(line, Line::Vertical { .. }) {
            return Err(SepLineError::Vertical);
        }
        if !game.is_separation_line(line) {
            let l = line.affine();
            let corner = if l.sign_at(&game.rr(), 0.0) == Ordering::Less {
                "(R,R)"
            } else if l.sign_at(&game.st(), 0.0) == Ordering::Less {
                "(S,T)"
            } else if l.sign_at(&game.pp(), 0.0) == Ordering::Greater {
                "(P,P)"
            } else {
                "(T,S)"
            };
            return Err(SepLineError::WrongSide { corner });
        }
        Ok(())
    }

    pub fn line(&self) -> Line<S> {
        Line::through(&self.anchor, self.slope.clone())
    }

    /// Normalized associated affine map (max |L| over the hull is 1).
    pub fn affine(&self, game: &Game<S>) -> AffineMap<S> {
        game.normalized_affine(&self.line())
    }

    pub fn is_horizontal(&self) -> bool {
        self.slope.is_zero()
    }

    pub fn is_diagonal(&self, game: &Game<S>) -> bool {
        self.slope == S::one() && self.line().contains(&game.pp(), 0.0)
    }

    pub fn is_co_diagonal(&self, game: &Game<S>) -> bool {
        self.slope == -S::one() && self.line().contains(&game.ts(), 0.0)
    }

    /// The hull chord cut out by the line.
    pub fn hull_segment(&self, game: &Game<S>) -> Segment<S> {
        let line = self.line();
        let vs = game.hull().vertices();
        let n = vs.len();
        let mut hits: Vec<Point<S>> = Vec::new();
        for i in 0..n {
            let a = &vs[i];
            let b = &vs[(i + 1) % n];
            let edge = Line::through_pair(a, b);
            match line_intersection(&line, &edge) {
                Intersection::Point(p) => {
                    if Segment::new(a.clone(), b.clone()).contains(&p, FLOAT_TOL)
                        && !hits.contains(&p)
                    {
                        hits.push(p);
                    }
                }
                Intersection::Identical => {
                    // The line is a hull edge.
                    return Segment::new(a.clone(), b.clone());
                }
                Intersection::Parallel => {}
            }
        }
        assert!(
            hits.len() >= 2 || !hits.is_empty(),
            "separation line must meet the hull"
        );
        if hits.len() == 1 {
            return Segment::new(hits[0].clone(), hits[0].clone());
        }
        // Keep the extreme pair in x.
        hits.sort_by(|p, q| p.x.cmp_total(&q.x));
        Segment::new(hits[0].clone(), hits[hits.len() - 1].clone())
    }
}

/// Convenience: cross product sign for ccw tests on hull checks.
pub fn ccw<S: Scalar>(a: &Point<S>, b: &Point<S>, c: &Point<S>) -> Ordering {
    cross(a, b, c).sign_band(0.0)
}

#[cfg(test)]
mod tests {
    use num_traits::{One, Zero};

    use super::*;
    use crate::scalar::Rat;

    fn canonical() -> Game<Rat> {
        Game::from_ints(5, 3, 1, 0).unwrap()
    }

    #[test]
    fn validates_canonical_quadrilateral() {
        let g = canonical();
        assert!(g.is_quadrilateral());
        assert_eq!(g.pbar(), &Rat::from_int(1));
        assert_eq!(g.wbar(), &Point::from_ints(5, 0));
    }

    #[test]
    fn high_punishment_gives_triangle() {
        let g: Game<Rat> = Game::from_ints(5, 4, 3, 0).unwrap();
        assert!(!g.is_quadrilateral());
        assert!(g.contains(&Point::from_ints(3, 3), 0.0));
        assert_eq!(g.pbar(), &Rat::ratio(5, 2));
        // The cut line from (S,T) through (P,P) meets ((R,R),(T,S)) at
        // (9/2, 2).
        assert_eq!(
            g.wbar(),
            &Point::new(Rat::ratio(9, 2), Rat::from_int(2))
        );
    }

    #[test]
    fn rejects_bad_orderings() {
        assert_eq!(
            Game::<Rat>::from_ints(5, 2, 1, 0).unwrap_err(),
            GameError::CooperationPremium {
                two_r: 4.0,
                t_plus_s: 5.0
            }
        );
        assert!(matches!(
            Game::<Rat>::from_ints(3, 5, 1, 0).unwrap_err(),
            GameError::TemptationNotLargest { .. }
        ));
        assert!(matches!(
            Game::<Rat>::from_ints(5, 3, 0, 1).unwrap_err(),
            GameError::PunishmentNotAboveSucker { .. }
        ));
    }

    #[test]
    fn horizontal_lines_between_p_and_r_separate() {
        let g = canonical();
        for e in [Rat::from_int(1), Rat::ratio(3, 2), Rat::from_int(3)] {
            assert!(g.is_separation_line(&Line::horizontal(e)));
        }
        assert!(!g.is_separation_line(&Line::horizontal(Rat::ratio(7, 2))));
        assert!(!g.is_separation_line(&Line::vertical(Rat::from_int(2))));
    }

    #[test]
    fn diagonal_unique_slope_one_separation() {
        let g = canonical();
        assert!(g.is_separation_line(&g.diagonal()));
        assert!(g.is_separation_line(&g.co_diagonal()));
        // Any other slope-1 line fails.
        let shifted = Line::through(&Point::from_ints(1, 2), Rat::one());
        assert!(!g.is_separation_line(&shifted));
        // Co-diagonal stops separating when P > (T+S)/2.
        let g2: Game<Rat> = Game::from_ints(5, 4, 3, 0).unwrap();
        assert!(!g2.is_separation_line(&g2.co_diagonal()));
        assert!(g2.is_separation_line(&g2.diagonal()));
    }

    #[test]
    fn protection_lines() {
        let g = canonical();
        let l = Line::through(&g.rr(), Rat::ratio(1, 2));
        assert!(g.is_protection_line(&l));
        assert!(g.is_protection_line(&g.diagonal()));
        assert!(!g.is_protection_line(&Line::horizontal(Rat::from_int(3))));
        assert!(!g.is_protection_line(&Line::through(&g.pp(), Rat::ratio(1, 2))));
    }

    #[test]
    fn normalized_affine_signs() {
        let g = canonical();
        // Diagonal: L proportional to y − x, positive at (S,T).
        let l = g.normalized_affine(&g.diagonal());
        assert_eq!(l.sign_at(&g.st(), 0.0), Ordering::Greater);
        assert_eq!(l.sign_at(&g.ts(), 0.0), Ordering::Less);
        assert_eq!(l.sign_at(&g.rr(), 0.0), Ordering::Equal);
        assert_eq!(g.max_abs_on_hull(&l), Rat::one());
        // Co-diagonal: L proportional to x + y − T − S.
        let l = g.normalized_affine(&g.co_diagonal());
        assert_eq!(l.sign_at(&g.rr(), 0.0), Ordering::Greater);
        assert_eq!(l.sign_at(&g.pp(), 0.0), Ordering::Less);
        // Horizontal y = E: sign(L) = sign(y − E).
        let l = g.normalized_affine(&Line::horizontal(Rat::from_int(2)));
        assert_eq!(
            l.sign_at(&Point::from_ints(1, 3), 0.0),
            Ordering::Greater
        );
        assert_eq!(l.sign_at(&Point::from_ints(4, 1), 0.0), Ordering::Less);
    }

    #[test]
    fn triangle_and_quadrangle_regions() {
        let g = canonical();
        // s on the top edge: upper triangle degenerates to a segment.
        let s = Point::new(Rat::ratio(3, 2), Rat::from_int(4));
        let t = g.upper_triangle(&s);
        assert!(t.is_degenerate());
        assert!(!t.interior_contains(&s, 0.0));
        // s itself is in both regions.
        let s = Point::new(Rat::from_int(2), Rat::from_int(2));
        assert!(g.upper_triangle(&s).contains(&s, 0.0));
        assert!(g.lower_quadrangle(&s).contains(&s, 0.0));
        // With pbar = P the lower quadrangle is the triangle [s,(T,S),(P,P)].
        let q = g.lower_quadrangle(&Point::from_ints(1, 1));
        assert!(q.is_degenerate() || q.vertices().len() == 3);
    }

    #[test]
    fn sep_line_rejects_wrong_side() {
        let g = canonical();
        let err = SepLine::new(&g, Point::from_ints(1, 2), Rat::one()).unwrap_err();
        assert!(matches!(err, SepLineError::WrongSide { .. }));
    }

    #[test]
    fn hull_segment_of_horizontal() {
        let g = canonical();
        let sep = SepLine::new(&g, Point::from_ints(3, 2), Rat::zero()).unwrap();
        let seg = sep.hull_segment(&g);
        // y = 2 crosses the left edge )(0,5),(1,1)( at x = 3/4 and the right
        // edge )(3,3),(5,0)( at x = 11/3.
        assert_eq!(seg.a, Point::new(Rat::ratio(3, 4), Rat::from_int(2)));
        assert_eq!(seg.b, Point::new(Rat::ratio(11, 3), Rat::from_int(2)));
    }
}
