//! Planar primitives: payoff points, lines, affine maps, convex regions.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// A payoff pair (X payoff, Y payoff).
#[derive(Clone, Debug, PartialEq)]
pub struct Point<S> {
    pub x: S,
    pub y: S,
}

impl<S: Scalar> Point<S> {
    pub fn new(x: S, y: S) -> Self {
        Point { x, y }
    }

    pub fn from_ints(x: i64, y: i64) -> Self {
        Point::new(S::from_int(x), S::from_int(y))
    }

    /// Coordinate swap: the view of the same payoff pair from the other seat.
    pub fn switch(&self) -> Self {
        Point::new(self.y.clone(), self.x.clone())
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.x.to_f64(), self.y.to_f64())
    }

    pub fn dist_f64(&self, other: &Point<S>) -> f64 {
        let (ax, ay) = self.to_f64();
        let (bx, by) = other.to_f64();
        ((ax - bx).powi(2) + (ay - by).powi(2)).sqrt()
    }

    /// Convex combination `(1-t)·self + t·other`.
    pub fn lerp(&self, other: &Point<S>, t: S) -> Point<S> {
        let omt = S::one() - t.clone();
        Point::new(
            omt.clone() * self.x.clone() + t.clone() * other.x.clone(),
            omt * self.y.clone() + t * other.y.clone(),
        )
    }
}

/// `L(x, y) = a·x + b·y + c` with `(a, b) != (0, 0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap<S> {
    pub a: S,
    pub b: S,
    pub c: S,
}

impl<S: Scalar> AffineMap<S> {
    pub fn new(a: S, b: S, c: S) -> Self {
        assert!(
            !(a.is_zero() && b.is_zero()),
            "affine map must be nonconstant"
        );
        AffineMap { a, b, c }
    }

    pub fn eval(&self, p: &Point<S>) -> S {
        self.a.clone() * p.x.clone() + self.b.clone() * p.y.clone() + self.c.clone()
    }

    pub fn sign_at(&self, p: &Point<S>, tol: f64) -> Ordering {
        self.eval(p).sign_band(tol)
    }

    pub fn scale(&self, factor: S) -> Self {
        AffineMap {
            a: self.a.clone() * factor.clone(),
            b: self.b.clone() * factor.clone(),
            c: self.c.clone() * factor,
        }
    }

    pub fn neg(&self) -> Self {
        AffineMap {
            a: -self.a.clone(),
            b: -self.b.clone(),
            c: -self.c.clone(),
        }
    }

    /// Zero set of the map as a line, when it is not degenerate.
    pub fn zero_line(&self) -> Line<S> {
        if self.b.is_zero() {
            Line::Vertical {
                x: -self.c.clone() / self.a.clone(),
            }
        } else {
            // a x + b y + c = 0  =>  y = (-a/b) x + (-c/b)
            Line::Slant {
                slope: -self.a.clone() / self.b.clone(),
                intercept: -self.c.clone() / self.b.clone(),
            }
        }
    }
}

/// A line in the payoff plane. Slanted lines are `y = slope·x + intercept`.
#[derive(Clone, Debug, PartialEq)]
pub enum Line<S> {
    Slant { slope: S, intercept: S },
    Vertical { x: S },
}

impl<S: Scalar> Line<S> {
    pub fn through(p: &Point<S>, slope: S) -> Self {
        let intercept = p.y.clone() - slope.clone() * p.x.clone();
        Line::Slant { slope, intercept }
    }

    pub fn vertical(x: S) -> Self {
        Line::Vertical { x }
    }

    pub fn horizontal(y: S) -> Self {
        Line::Slant {
            slope: S::zero(),
            intercept: y,
        }
    }

    /// Line through two distinct points.
    pub fn through_pair(p: &Point<S>, q: &Point<S>) -> Self {
        assert!(p != q, "need two distinct points");
        if p.x == q.x {
            Line::Vertical { x: p.x.clone() }
        } else {
            let slope = (q.y.clone() - p.y.clone()) / (q.x.clone() - p.x.clone());
            Line::through(p, slope)
        }
    }

    pub fn y_at(&self, x: S) -> Option<S> {
        match self {
            Line::Slant { slope, intercept } => Some(slope.clone() * x + intercept.clone()),
            Line::Vertical { .. } => None,
        }
    }

    /// Associated affine map, positive above for slanted lines and positive
    /// to the right for vertical ones. Not normalized.
    pub fn affine(&self) -> AffineMap<S> {
        match self {
            Line::Slant { slope, intercept } => {
                // y - slope x - intercept
                AffineMap::new(-slope.clone(), S::one(), -intercept.clone())
            }
            Line::Vertical { x } => AffineMap::new(S::one(), S::zero(), -x.clone()),
        }
    }

    /// Image under the coordinate swap. Slope `m != 0` maps to `1/m`,
    /// horizontal to vertical and back.
    pub fn switch(&self) -> Line<S> {
        match self {
            Line::Slant { slope, intercept } => {
                if slope.is_zero() {
                    Line::Vertical {
                        x: intercept.clone(),
                    }
                } else {
                    // y = m x + b  =>  x = m y + b  =>  y = (x - b)/m
                    Line::Slant {
                        slope: S::one() / slope.clone(),
                        intercept: -intercept.clone() / slope.clone(),
                    }
                }
            }
            Line::Vertical { x } => Line::horizontal(x.clone()),
        }
    }

    pub fn contains(&self, p: &Point<S>, tol: f64) -> bool {
        self.affine().sign_at(p, tol) == Ordering::Equal
    }
}

/// Result of intersecting two lines.
#[derive(Clone, Debug, PartialEq)]
pub enum Intersection<S> {
    Point(Point<S>),
    Parallel,
    Identical,
}

pub fn line_intersection<S: Scalar>(l1: &Line<S>, l2: &Line<S>) -> Intersection<S> {
    match (l1, l2) {
        (Line::Vertical { x: x1 }, Line::Vertical { x: x2 }) => {
            if x1 == x2 {
                Intersection::Identical
            } else {
                Intersection::Parallel
            }
        }
        (Line::Vertical { x }, Line::Slant { .. }) => {
            let y = l2.y_at(x.clone()).unwrap();
            Intersection::Point(Point::new(x.clone(), y))
        }
        (Line::Slant { .. }, Line::Vertical { x }) => {
            let y = l1.y_at(x.clone()).unwrap();
            Intersection::Point(Point::new(x.clone(), y))
        }
        (
            Line::Slant {
                slope: m1,
                intercept: b1,
            },
            Line::Slant {
                slope: m2,
                intercept: b2,
            },
        ) => {
            if m1 == m2 {
                if b1 == b2 {
                    Intersection::Identical
                } else {
                    Intersection::Parallel
                }
            } else {
                let x = (b2.clone() - b1.clone()) / (m1.clone() - m2.clone());
                let y = m1.clone() * x.clone() + b1.clone();
                Intersection::Point(Point::new(x, y))
            }
        }
    }
}

/// Closed segment between two points.
#[derive(Clone, Debug)]
pub struct Segment<S> {
    pub a: Point<S>,
    pub b: Point<S>,
}

impl<S: Scalar> Segment<S> {
    pub fn new(a: Point<S>, b: Point<S>) -> Self {
        Segment { a, b }
    }

    pub fn line(&self) -> Line<S> {
        Line::through_pair(&self.a, &self.b)
    }

    /// Membership in the closed segment, up to `tol` in each coordinate test.
    pub fn contains(&self, p: &Point<S>, tol: f64) -> bool {
        if self.a == self.b {
            return (p.x.clone() - self.a.x.clone()).sign_band(tol) == Ordering::Equal
                && (p.y.clone() - self.a.y.clone()).sign_band(tol) == Ordering::Equal;
        }
        if !self.line().contains(p, tol) {
            return false;
        }
        let lo_x = self.a.x.clone().min_val(self.b.x.clone());
        let hi_x = self.a.x.clone().max_val(self.b.x.clone());
        let lo_y = self.a.y.clone().min_val(self.b.y.clone());
        let hi_y = self.a.y.clone().max_val(self.b.y.clone());
        (p.x.clone() - lo_x).sign_band(tol) != Ordering::Less
            && (hi_x - p.x.clone()).sign_band(tol) != Ordering::Less
            && (p.y.clone() - lo_y).sign_band(tol) != Ordering::Less
            && (hi_y - p.y.clone()).sign_band(tol) != Ordering::Less
    }

    /// Strict interior of the segment (endpoints excluded).
    pub fn contains_in_open(&self, p: &Point<S>, tol: f64) -> bool {
        self.contains(p, tol) && p.dist_f64(&self.a) > tol && p.dist_f64(&self.b) > tol
    }

    pub fn midpoint(&self) -> Point<S> {
        Point::new(
            (self.a.x.clone() + self.b.x.clone()).half(),
            (self.a.y.clone() + self.b.y.clone()).half(),
        )
    }

    pub fn dist_f64(&self, p: &Point<S>) -> f64 {
        let (ax, ay) = self.a.to_f64();
        let (bx, by) = self.b.to_f64();
        let (px, py) = p.to_f64();
        segment_dist_f64((ax, ay), (bx, by), (px, py))
    }
}

pub(crate) fn segment_dist_f64(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    let (cx, cy) = (a.0 + t * dx, a.1 + t * dy);
    ((p.0 - cx).powi(2) + (p.1 - cy).powi(2)).sqrt()
}

/// 2·(signed area) of the triangle `a b c`; positive when counterclockwise.
pub fn cross<S: Scalar>(a: &Point<S>, b: &Point<S>, c: &Point<S>) -> S {
    (b.x.clone() - a.x.clone()) * (c.y.clone() - a.y.clone())
        - (b.y.clone() - a.y.clone()) * (c.x.clone() - a.x.clone())
}

/// A closed convex region given by its hull vertices in counterclockwise
/// order. Degenerate regions (segments, points) are supported.
#[derive(Clone, Debug)]
pub struct ConvexRegion<S> {
    verts: Vec<Point<S>>,
    /// Edge maps oriented so the region is `{ L <= 0 }`; empty when the
    /// region is degenerate.
    edges: Vec<AffineMap<S>>,
    /// Per edge: whether the edge lies along one of the ambient hull's own
    /// boundary lines (set by `mark_ambient_edges`).
    on_ambient_boundary: Vec<bool>,
}

impl<S: Scalar> ConvexRegion<S> {
    /// Convex hull of an arbitrary small point set (gift wrapping; exact in
    /// rational mode).
    pub fn hull_of(points: &[Point<S>]) -> Self {
        let mut pts: Vec<Point<S>> = Vec::new();
        for p in points {
            if !pts.contains(p) {
                pts.push(p.clone());
            }
        }
        if pts.len() <= 2 {
            return Self::from_ordered(pts);
        }
        // Andrew's monotone chain on exactly comparable coordinates.
        pts.sort_by(|p, q| {
            p.x.cmp_total(&q.x)
                .then_with(|| p.y.cmp_total(&q.y))
        });
        let mut lower: Vec<Point<S>> = Vec::new();
        for p in &pts {
            while lower.len() >= 2
                && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p)
                    .sign_band(0.0)
                    != Ordering::Greater
            {
                lower.pop();
            }
            lower.push(p.clone());
        }
        let mut upper: Vec<Point<S>> = Vec::new();
        for p in pts.iter().rev() {
            while upper.len() >= 2
                && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p)
                    .sign_band(0.0)
                    != Ordering::Greater
            {
                upper.pop();
            }
            upper.push(p.clone());
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        Self::from_ordered(lower)
    }

    /// Build from vertices already in counterclockwise order (collinear
    /// inputs collapse to a segment).
    pub fn from_ordered(verts: Vec<Point<S>>) -> Self {
        let n = verts.len();
        if n >= 3 {
            let edges = (0..n)
                .map(|i| {
                    let a = &verts[i];
                    let b = &verts[(i + 1) % n];
                    edge_outward_map(a, b)
                })
                .collect::<Vec<_>>();
            let flags = vec![false; n];
            ConvexRegion {
                verts,
                edges,
                on_ambient_boundary: flags,
            }
        } else {
            ConvexRegion {
                verts,
                edges: Vec::new(),
                on_ambient_boundary: Vec::new(),
            }
        }
    }

    pub fn vertices(&self) -> &[Point<S>] {
        &self.verts
    }

    pub fn is_degenerate(&self) -> bool {
        self.verts.len() < 3
    }

    /// Mark edges that lie along one of the given boundary lines of the
    /// ambient hull; interior tests treat those edges as closed.
    pub fn mark_ambient_edges(&mut self, ambient: &[Line<S>]) {
        let n = self.verts.len();
        for i in 0..self.edges.len() {
            let a = &self.verts[i];
            let b = &self.verts[(i + 1) % n];
            self.on_ambient_boundary[i] = ambient
                .iter()
                .any(|l| l.contains(a, 0.0) && l.contains(b, 0.0));
        }
    }

    /// Closed membership; ties count as inside.
    pub fn contains(&self, p: &Point<S>, tol: f64) -> bool {
        if self.verts.is_empty() {
            return false;
        }
        if self.is_degenerate() {
            return if self.verts.len() == 1 {
                if S::EXACT {
                    p == &self.verts[0]
                } else {
                    p.dist_f64(&self.verts[0]) <= tol
                }
            } else {
                Segment::new(self.verts[0].clone(), self.verts[1].clone()).contains(p, tol)
            };
        }
        self.edges
            .iter()
            .all(|e| e.sign_at(p, tol) != Ordering::Greater)
    }

    /// Membership in the interior relative to the ambient hull: strict on
    /// chord edges, closed on edges marked as ambient boundary. Degenerate
    /// regions have empty interior.
    pub fn interior_contains(&self, p: &Point<S>, tol: f64) -> bool {
        if self.is_degenerate() {
            return false;
        }
        self.edges.iter().zip(&self.on_ambient_boundary).all(|(e, on_b)| {
            let sign = e.sign_at(p, tol);
            if *on_b {
                sign != Ordering::Greater
            } else {
                sign == Ordering::Less
            }
        })
    }

    /// Distance from a point to the region (0 when inside).
    pub fn dist_f64(&self, p: &Point<S>) -> f64 {
        match self.verts.len() {
            0 => f64::INFINITY,
            1 => p.dist_f64(&self.verts[0]),
            2 => Segment::new(self.verts[0].clone(), self.verts[1].clone()).dist_f64(p),
            n => {
                if self.contains(p, 0.0) || self.contains(p, 1e-12) {
                    return 0.0;
                }
                (0..n)
                    .map(|i| {
                        Segment::new(self.verts[i].clone(), self.verts[(i + 1) % n].clone())
                            .dist_f64(p)
                    })
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }
}

/// Map that is zero on the edge `a -> b`, negative on its left. For a ccw
/// polygon the interior is `{ L <= 0 }` on every edge.
fn edge_outward_map<S: Scalar>(a: &Point<S>, b: &Point<S>) -> AffineMap<S> {
    // cross(a,b,p) = dx (p.y - a.y) - dy (p.x - a.x) is positive left of
    // a->b; as an affine map of p that is (-dy, dx, dy a.x - dx a.y).
    let dx = b.x.clone() - a.x.clone();
    let dy = b.y.clone() - a.y.clone();
    let c = dy.clone() * a.x.clone() - dx.clone() * a.y.clone();
    AffineMap::new(-dy, dx, c).neg()
}

/// Outcome labels in the fixed order `cc, cd, dc, dd`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    #[serde(rename = "cc")]
    Cc,
    #[serde(rename = "cd")]
    Cd,
    #[serde(rename = "dc")]
    Dc,
    #[serde(rename = "dd")]
    Dd,
}

pub const OUTCOMES: [Outcome; 4] = [Outcome::Cc, Outcome::Cd, Outcome::Dc, Outcome::Dd];

impl Outcome {
    pub fn index(self) -> usize {
        match self {
            Outcome::Cc => 0,
            Outcome::Cd => 1,
            Outcome::Dc => 2,
            Outcome::Dd => 3,
        }
    }

    pub fn from_index(i: usize) -> Outcome {
        OUTCOMES[i]
    }

    pub fn from_moves(x: Move, y: Move) -> Outcome {
        match (x, y) {
            (Move::C, Move::C) => Outcome::Cc,
            (Move::C, Move::D) => Outcome::Cd,
            (Move::D, Move::C) => Outcome::Dc,
            (Move::D, Move::D) => Outcome::Dd,
        }
    }

    /// The same outcome seen from the other seat (swaps cd and dc).
    pub fn switch(self) -> Outcome {
        match self {
            Outcome::Cd => Outcome::Dc,
            Outcome::Dc => Outcome::Cd,
            o => o,
        }
    }

    pub fn x_move(self) -> Move {
        match self {
            Outcome::Cc | Outcome::Cd => Move::C,
            _ => Move::D,
        }
    }

    pub fn y_move(self) -> Move {
        match self {
            Outcome::Cc | Outcome::Dc => Move::C,
            _ => Move::D,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Outcome::Cc => "cc",
            Outcome::Cd => "cd",
            Outcome::Dc => "dc",
            Outcome::Dd => "dd",
        }
    }
}

/// A single player's move.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Move {
    #[serde(rename = "c")]
    C,
    #[serde(rename = "d")]
    D,
}

#[cfg(test)]
mod tests {
    use num_traits::Zero;

    use super::*;
    use crate::scalar::Rat;

    fn pt(x: i64, y: i64) -> Point<Rat> {
        Point::from_ints(x, y)
    }

    #[test]
    fn switch_is_involution() {
        let p = Point::new(Rat::ratio(5, 2), Rat::from_int(1));
        assert_eq!(p.switch().switch(), p);
        let l: Line<Rat> = Line::through(&pt(3, 3), Rat::ratio(1, 2));
        assert_eq!(l.switch().switch(), l);
        let h: Line<Rat> = Line::horizontal(Rat::from_int(2));
        assert_eq!(h.switch(), Line::vertical(Rat::from_int(2)));
        assert_eq!(h.switch().switch(), h);
    }

    #[test]
    fn intersection_cases() {
        // line through (3,3) slope 1/2 vs vertical x = 2 -> (2, 5/2)
        let l1: Line<Rat> = Line::through(&pt(3, 3), Rat::ratio(1, 2));
        let l2 = Line::vertical(Rat::from_int(2));
        match line_intersection(&l1, &l2) {
            Intersection::Point(p) => {
                assert_eq!(p, Point::new(Rat::from_int(2), Rat::ratio(5, 2)));
            }
            other => panic!("expected point, got {other:?}"),
        }
        let diag: Line<Rat> = Line::through(&pt(0, 0), Rat::from_int(1));
        assert_eq!(line_intersection(&diag, &diag.clone()), Intersection::Identical);
        let par: Line<Rat> = Line::through(&pt(0, 1), Rat::from_int(1));
        assert_eq!(line_intersection(&diag, &par), Intersection::Parallel);
    }

    #[test]
    fn hull_and_membership() {
        let region: ConvexRegion<Rat> =
            ConvexRegion::hull_of(&[pt(0, 0), pt(4, 0), pt(4, 4), pt(0, 4), pt(2, 2)]);
        assert_eq!(region.vertices().len(), 4);
        assert!(region.contains(&pt(2, 2), 0.0));
        assert!(region.contains(&pt(0, 0), 0.0));
        assert!(region.contains(&pt(2, 0), 0.0));
        assert!(!region.contains(&pt(5, 2), 0.0));
        assert!(!region.interior_contains(&pt(2, 0), 0.0));
        assert!(region.interior_contains(&pt(2, 2), 0.0));
    }

    #[test]
    fn degenerate_hull_is_segment() {
        let region: ConvexRegion<Rat> = ConvexRegion::hull_of(&[pt(0, 0), pt(2, 2), pt(1, 1)]);
        assert!(region.is_degenerate());
        assert!(region.contains(&pt(1, 1), 0.0));
        assert!(!region.contains(&pt(1, 0), 0.0));
        assert!(!region.interior_contains(&pt(1, 1), 0.0));
    }

    #[test]
    fn ambient_edges_are_closed_in_interior_test() {
        // Square region inside a larger ambient square; bottom edge on the
        // ambient boundary line y = 0.
        let mut region: ConvexRegion<Rat> =
            ConvexRegion::hull_of(&[pt(1, 0), pt(3, 0), pt(3, 2), pt(1, 2)]);
        region.mark_ambient_edges(&[Line::horizontal(Rat::zero())]);
        assert!(region.interior_contains(&pt(2, 0), 0.0));
        assert!(!region.interior_contains(&pt(1, 0), 0.0));
        assert!(!region.interior_contains(&pt(2, 2), 0.0));
    }
}
