//! Separation paths: the curve generalization of separation lines.
//!
//! A separation path is a closed connected subset of the hull meeting the
//! left segment `[(pbar,pbar),(S,T)]` and the right segment `[(R,R),(T,S)]`
//! such that for every point `s` on it, the interiors of the upper triangle
//! `T(s)` and lower quadrangle `Q(s)` avoid the path. Such a set is always
//! the graph of a function of the first coordinate, which is how paths are
//! stored here: as polylines with strictly increasing x. The strict variant
//! requires `(T(s) ∪ Q(s)) ∩ C = {s}`.
//!
//! Continuum conditions are verified on a sample grid at configurable
//! resolution, not symbolically.

use std::cmp::Ordering;

use thiserror::Error;

use crate::game::Game;
use crate::geom::{line_intersection, Intersection, Line, Point, Segment};
use crate::scalar::{Scalar, FLOAT_TOL};

#[derive(Debug, Error, PartialEq)]
pub enum PathError {
    #[error("a path needs at least two vertices")]
    TooFewVertices,
    #[error("vertex x-coordinates must strictly increase (projection injectivity)")]
    NotAGraph,
    #[error("vertex {index} lies outside the hull")]
    OutsideHull { index: usize },
    #[error("peak height must satisfy P < y < R, got {y}")]
    PeakHeightRange { y: f64 },
    #[error("peak must lie in the hull")]
    PeakOutsideHull,
    #[error("no valid leg found from the peak toward the {side} edge")]
    NoLeg { side: &'static str },
    #[error("slope-field integration requires P < (T+S)/2")]
    NeedsQuadrilateral,
    #[error("integration start must be inside the hull, off the two boundary solution segments")]
    BadStart,
    #[error("integration exited the hull without reaching the required boundary segment")]
    ExitMissed,
}

/// Where a point sits relative to a path.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathSide {
    Above,
    On,
    Below,
}

/// Polyline graph of a function over `[a, b]` in x.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparationPath<S> {
    verts: Vec<Point<S>>,
}

impl<S: Scalar> SeparationPath<S> {
    pub fn new(game: &Game<S>, verts: Vec<Point<S>>) -> Result<Self, PathError> {
        if verts.len() < 2 {
            return Err(PathError::TooFewVertices);
        }
        for w in verts.windows(2) {
            if w[0].x.cmp_total(&w[1].x) != Ordering::Less {
                return Err(PathError::NotAGraph);
            }
        }
        let tol = FLOAT_TOL * game.diameter_f64();
        for (index, v) in verts.iter().enumerate() {
            if !game.contains(v, tol) {
                return Err(PathError::OutsideHull { index });
            }
        }
        Ok(SeparationPath { verts })
    }

    pub fn vertices(&self) -> &[Point<S>] {
        &self.verts
    }

    pub fn first(&self) -> &Point<S> {
        &self.verts[0]
    }

    pub fn last(&self) -> &Point<S> {
        &self.verts[self.verts.len() - 1]
    }

    /// Height of the path at `x`, for `x` within `[a, b]`.
    pub fn height_at(&self, x: &S) -> S {
        let n = self.verts.len();
        if x.cmp_total(&self.verts[0].x) != Ordering::Greater {
            return self.verts[0].y.clone();
        }
        if x.cmp_total(&self.verts[n - 1].x) != Ordering::Less {
            return self.verts[n - 1].y.clone();
        }
        // Binary search for the segment containing x.
        let mut lo = 0usize;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.verts[mid].x.cmp_total(x) == Ordering::Greater {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let (p, q) = (&self.verts[lo], &self.verts[hi]);
        let t = (x.clone() - p.x.clone()) / (q.x.clone() - p.x.clone());
        p.y.clone() + t * (q.y.clone() - p.y.clone())
    }

    /// Side of the path a hull point falls on. Points left of the x-range
    /// are above (they belong to the upper side exclusively), points right
    /// of it are below.
    pub fn side_of(&self, game: &Game<S>, p: &Point<S>, tol: f64) -> PathSide {
        let band = tol * game.diameter_f64();
        let n = self.verts.len();
        if (p.x.clone() - self.verts[0].x.clone()).sign_band(band) == Ordering::Less {
            return PathSide::Above;
        }
        if (p.x.clone() - self.verts[n - 1].x.clone()).sign_band(band) == Ordering::Greater {
            return PathSide::Below;
        }
        let dy = p.y.clone() - self.height_at(&p.x);
        match dy.sign_band(band) {
            Ordering::Greater => PathSide::Above,
            Ordering::Less => PathSide::Below,
            Ordering::Equal => PathSide::On,
        }
    }

    /// Side test for the point `(ax/w, ay/w)` with `w > 0`, given without
    /// the division.
    pub fn side_of_homogeneous(&self, game: &Game<S>, ax: &S, ay: &S, w: &S) -> PathSide {
        let band = crate::scalar::FLOAT_TOL * game.diameter_f64() * w.to_f64().max(1.0);
        let n = self.verts.len();
        let first = ax.clone() - self.verts[0].x.clone() * w.clone();
        if first.sign_band(band) == Ordering::Less {
            return PathSide::Above;
        }
        let last = ax.clone() - self.verts[n - 1].x.clone() * w.clone();
        if last.sign_band(band) == Ordering::Greater {
            return PathSide::Below;
        }
        // Segment containing x = ax/w.
        let mut lo = 0usize;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let m = (lo + hi) / 2;
            if (self.verts[m].x.clone() * w.clone()).cmp_total(ax) == Ordering::Greater {
                hi = m;
            } else {
                lo = m;
            }
        }
        let (p0, p1) = (&self.verts[lo], &self.verts[hi]);
        // Scaled vertical offset: cross of the edge with the point, which
        // has the sign of y − height(x) times the positive edge length.
        let dx = p1.x.clone() - p0.x.clone();
        let dy = p1.y.clone() - p0.y.clone();
        let v = dx.clone() * (ay.clone() - p0.y.clone() * w.clone())
            - dy * (ax.clone() - p0.x.clone() * w.clone());
        match v.sign_band(band * dx.to_f64().max(1e-300)) {
            Ordering::Greater => PathSide::Above,
            Ordering::Less => PathSide::Below,
            Ordering::Equal => PathSide::On,
        }
    }

    /// Membership in the upper full set `C+` (on or above the path).
    pub fn upper_contains(&self, game: &Game<S>, p: &Point<S>, tol: f64) -> bool {
        self.side_of(game, p, tol) != PathSide::Below
    }

    /// Membership in the lower full set `C-` (on or below the path).
    pub fn lower_contains(&self, game: &Game<S>, p: &Point<S>, tol: f64) -> bool {
        self.side_of(game, p, tol) != PathSide::Above
    }

    pub fn dist_f64(&self, p: &Point<S>) -> f64 {
        self.verts
            .windows(2)
            .map(|w| Segment::new(w[0].clone(), w[1].clone()).dist_f64(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Points spaced evenly by arclength, always including the vertices.
    pub fn sample(&self, n: usize) -> Vec<Point<S>> {
        let mut pts: Vec<Point<S>> = self.verts.clone();
        if n > self.verts.len() {
            let total: f64 = self
                .verts
                .windows(2)
                .map(|w| w[0].dist_f64(&w[1]))
                .sum();
            let extra = n - self.verts.len();
            let step = total / (extra + 1) as f64;
            let mut next_at = step;
            let mut walked = 0.0;
            for w in self.verts.windows(2) {
                let len = w[0].dist_f64(&w[1]);
                while next_at < walked + len && len > 0.0 {
                    let t = (next_at - walked) / len;
                    pts.push(w[0].lerp(&w[1], S::from_f64_exact(t)));
                    next_at += step;
                }
                walked += len;
            }
        }
        pts.sort_by(|p, q| p.x.cmp_total(&q.x));
        pts.dedup_by(|p, q| p == q);
        pts
    }

    /// The switched polyline (generally not a graph of x).
    pub fn switched_vertices(&self) -> Vec<Point<S>> {
        self.verts.iter().map(Point::switch).collect()
    }

    /// Intersection points of this path with the switch of another. The own
    /// vertices are x-sorted, so each switched segment only needs the
    /// x-overlapping own segments.
    pub fn intersections_with_switch(&self, other: &SeparationPath<S>) -> Vec<Point<S>> {
        let switched = other.switched_vertices();
        let own_x: Vec<f64> = self.verts.iter().map(|v| v.x.to_f64()).collect();
        let mut hits: Vec<Point<S>> = Vec::new();
        for w2 in switched.windows(2) {
            let (ax, bx) = (w2[0].x.to_f64(), w2[1].x.to_f64());
            let (lo2, hi2) = (ax.min(bx) - 1e-12, ax.max(bx) + 1e-12);
            // Own segments [i, i+1] with x-interval meeting [lo2, hi2].
            let start = own_x.partition_point(|x| *x < lo2).saturating_sub(1);
            let s2 = Segment::new(w2[0].clone(), w2[1].clone());
            for i in start..self.verts.len() - 1 {
                if own_x[i] > hi2 {
                    break;
                }
                let s1 = Segment::new(self.verts[i].clone(), self.verts[i + 1].clone());
                for p in segment_intersections(&s1, &s2) {
                    if !hits.iter().any(|h: &Point<S>| h.dist_f64(&p) <= 1e-9) {
                        hits.push(p);
                    }
                }
            }
        }
        hits
    }
}

/// Intersection points of two closed segments; collinear overlaps report
/// their overlap endpoints.
pub fn segment_intersections<S: Scalar>(s1: &Segment<S>, s2: &Segment<S>) -> Vec<Point<S>> {
    let l1 = s1.line();
    let l2 = s2.line();
    match line_intersection(&l1, &l2) {
        Intersection::Point(p) => {
            if s1.contains(&p, FLOAT_TOL) && s2.contains(&p, FLOAT_TOL) {
                vec![p]
            } else {
                vec![]
            }
        }
        Intersection::Parallel => vec![],
        Intersection::Identical => {
            let mut out = Vec::new();
            for p in [&s1.a, &s1.b] {
                if s2.contains(p, FLOAT_TOL) {
                    out.push(p.clone());
                }
            }
            for p in [&s2.a, &s2.b] {
                if s1.contains(p, FLOAT_TOL) && !out.contains(p) {
                    out.push(p.clone());
                }
            }
            out
        }
    }
}

/// Validation report for a candidate path.
#[derive(Clone, Debug)]
pub struct PathReport {
    pub in_hull: bool,
    pub meets_left_segment: bool,
    pub meets_right_segment: bool,
    pub proj_injective: bool,
    /// Every sampled ordered pair honors the triangle/quadrangle
    /// disjointness condition.
    pub star_condition: bool,
    pub star_witness: Option<((f64, f64), (f64, f64))>,
    /// No sample falls in the interior of the lower quadrangle of wbar.
    pub avoids_wbar_quadrangle: bool,
    /// Every polyline edge's secant line is a separation line (strict, when
    /// strict validation was requested).
    pub secants_separate: bool,
    pub strict: bool,
    pub samples: usize,
}

impl PathReport {
    pub fn is_valid(&self) -> bool {
        self.in_hull
            && self.meets_left_segment
            && self.meets_right_segment
            && self.proj_injective
            && self.star_condition
            && self.avoids_wbar_quadrangle
            && self.secants_separate
    }

    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.in_hull {
            out.push("vertex outside hull");
        }
        if !self.meets_left_segment {
            out.push("left endpoint off [(pbar,pbar),(S,T)]");
        }
        if !self.meets_right_segment {
            out.push("right endpoint off [(R,R),(T,S)]");
        }
        if !self.proj_injective {
            out.push("first-coordinate projection not injective");
        }
        if !self.star_condition {
            out.push("triangle/quadrangle disjointness violated");
        }
        if !self.avoids_wbar_quadrangle {
            out.push("path enters the wbar lower quadrangle interior");
        }
        if !self.secants_separate {
            out.push("an edge secant is not a separation line");
        }
        out
    }
}

/// Check a path against the definition at the given sample resolution.
pub fn validate_path<S: Scalar>(
    game: &Game<S>,
    path: &SeparationPath<S>,
    strict: bool,
    samples: usize,
) -> PathReport {
    let tol = FLOAT_TOL * game.diameter_f64();
    let verts = path.vertices();
    let in_hull = verts.iter().all(|v| game.contains(v, tol));
    let meets_left_segment = game.left_edge().contains(path.first(), tol);
    let meets_right_segment = game.right_edge().contains(path.last(), tol);
    let proj_injective = verts
        .windows(2)
        .all(|w| w[0].x.cmp_total(&w[1].x) == Ordering::Less);

    let pts = path.sample(samples);
    let qwbar = game.lower_quadrangle(game.wbar());
    let avoids_wbar_quadrangle = pts.iter().all(|p| !qwbar.interior_contains(p, tol));

    // Margin below which a float point is treated as "the same point" for
    // the strict condition.
    let same = 1e-7 * game.diameter_f64();
    let mut star_condition = true;
    let mut star_witness = None;
    'outer: for s in &pts {
        let tri = game.upper_triangle(s);
        let quad = game.lower_quadrangle(s);
        for q in &pts {
            if q == s || (!S::EXACT && q.dist_f64(s) <= same) {
                continue;
            }
            let hit = if strict {
                tri.contains(q, 0.0) || quad.contains(q, 0.0)
            } else {
                tri.interior_contains(q, 0.0) || quad.interior_contains(q, 0.0)
            };
            if hit {
                star_condition = false;
                star_witness = Some((s.to_f64(), q.to_f64()));
                break 'outer;
            }
        }
    }

    let secants_separate = verts.windows(2).all(|w| {
        let line = Line::through_pair(&w[0], &w[1]);
        if strict {
            game.is_strict_separation_line(&line)
        } else {
            game.is_separation_line(&line)
        }
    });

    PathReport {
        in_hull,
        meets_left_segment,
        meets_right_segment,
        proj_injective,
        star_condition,
        star_witness,
        avoids_wbar_quadrangle,
        secants_separate,
        strict,
        samples: pts.len(),
    }
}

/// Build a strict two-leg path `[V, s*] ∪ [s*, W]` peaking at `s*`, with
/// `P < s*_Y < R`. The free leg heights default to the midpoint of
/// `(P, s*_Y)` and walk toward `s*_Y` when the midpoint leg fails to cross
/// the opposite open edge.
pub fn path_from_peak<S: Scalar>(
    game: &Game<S>,
    peak: &Point<S>,
) -> Result<SeparationPath<S>, PathError> {
    let tol = FLOAT_TOL * game.diameter_f64();
    if !game.contains(peak, tol) {
        return Err(PathError::PeakOutsideHull);
    }
    if peak.y.cmp_total(game.p()) != Ordering::Greater
        || peak.y.cmp_total(game.r()) != Ordering::Less
    {
        return Err(PathError::PeakHeightRange {
            y: peak.y.to_f64(),
        });
    }

    let on_left = game.left_edge().contains(peak, tol);
    let on_right = game.right_edge().contains(peak, tol);

    let mut verts: Vec<Point<S>> = Vec::new();
    if !on_left {
        let v = choose_leg(game, peak, true)?;
        verts.push(v);
    }
    verts.push(peak.clone());
    if !on_right {
        let w = choose_leg(game, peak, false)?;
        verts.push(w);
    }
    SeparationPath::new(game, verts)
}

/// Pick a leg endpoint on the left or right edge, at a height in
/// `(P, peak_Y)`, such that the leg line is a strict separation line and the
/// leg keeps x strictly monotone.
fn choose_leg<S: Scalar>(
    game: &Game<S>,
    peak: &Point<S>,
    left: bool,
) -> Result<Point<S>, PathError> {
    let mut lo = game.p().clone();
    for _ in 0..64 {
        let h = (lo.clone() + peak.y.clone()).half();
        let cand = if left {
            game.left_edge_at_height(h.clone())
        } else {
            game.right_edge_at_height(h.clone())
        };
        if let Some(v) = cand {
            let x_ok = if left {
                v.x.cmp_total(&peak.x) == Ordering::Less
            } else {
                v.x.cmp_total(&peak.x) == Ordering::Greater
            };
            if x_ok {
                let line = Line::through_pair(&v, peak);
                if game.is_strict_separation_line(&line) {
                    return Ok(v);
                }
            }
        }
        // Walk the height toward the peak; shallower legs always succeed
        // eventually for interior peaks.
        lo = h;
    }
    Err(PathError::NoLeg {
        side: if left { "left" } else { "right" },
    })
}

/// Slope field for the strict-path construction: at `s` every separation
/// line through `s` has slope in `[−m⁻(s), m⁺(s)]`.
pub fn slope_bounds(game: &Game<f64>, s: (f64, f64)) -> (f64, f64) {
    let (x, y) = s;
    let (t, r, p, sv) = (
        game.t().to_f64(),
        game.r().to_f64(),
        game.p().to_f64(),
        game.s().to_f64(),
    );
    let m_plus = if y >= x {
        (r - y) / (r - x)
    } else {
        (y - p) / (x - p)
    };
    let m_minus = if y + x >= t + sv {
        (t - y) / (x - sv)
    } else {
        (y - sv) / (t - x)
    };
    (m_plus, m_minus)
}

/// Integrate `dy/dx = (m⁺ − m⁻)/2` from an interior start to both hull
/// edges with a fixed-step fourth-order scheme, clipping the final step at
/// the boundary. Restricted to games with `P < (T+S)/2`.
pub fn path_from_ode(
    game: &Game<f64>,
    x0: f64,
    y0: f64,
    steps: u32,
) -> Result<SeparationPath<f64>, PathError> {
    if game.p().to_f64() >= (game.t().to_f64() + game.s().to_f64()) / 2.0 {
        return Err(PathError::NeedsQuadrilateral);
    }
    let start = Point::new(x0, y0);
    if !game.contains(&start, 0.0) {
        return Err(PathError::BadStart);
    }
    let top = Segment::new(game.st(), game.rr());
    let bottom = Segment::new(game.pp(), game.ts());
    let edge_tol = 1e-12 * game.diameter_f64();
    if top.dist_f64(&start) <= edge_tol || bottom.dist_f64(&start) <= edge_tol {
        // Starts on a boundary solution segment reproduce that segment.
        let seg = if top.dist_f64(&start) <= edge_tol {
            top
        } else {
            bottom
        };
        return SeparationPath::new(game, vec![seg.a.clone(), seg.b.clone()]);
    }

    let h = (game.t().to_f64() - game.s().to_f64()) / steps as f64;
    let slope = |x: f64, y: f64| -> f64 {
        let (mp, mm) = slope_bounds(game, (x, y));
        (mp - mm) / 2.0
    };
    let rk4 = |x: f64, y: f64, h: f64| -> f64 {
        let k1 = slope(x, y);
        let k2 = slope(x + h / 2.0, y + h / 2.0 * k1);
        let k3 = slope(x + h / 2.0, y + h / 2.0 * k2);
        let k4 = slope(x + h, y + h * k3);
        y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    };

    let march = |dir: f64| -> Result<Vec<Point<f64>>, PathError> {
        let mut pts: Vec<Point<f64>> = Vec::new();
        let (mut x, mut y) = (x0, y0);
        for _ in 0..(4 * steps) {
            let ny = rk4(x, y, dir * h);
            let nx = x + dir * h;
            let next = Point::new(nx, ny);
            if game.contains(&next, 0.0) {
                pts.push(next);
                x = nx;
                y = ny;
                continue;
            }
            // Clip the exiting step against the hull boundary.
            let step_seg = Segment::new(Point::new(x, y), next);
            let vs = game.hull().vertices().to_vec();
            let mut clipped: Option<Point<f64>> = None;
            for i in 0..vs.len() {
                let edge = Segment::new(vs[i].clone(), vs[(i + 1) % vs.len()].clone());
                for p in segment_intersections(&step_seg, &edge) {
                    if clipped.is_none() {
                        clipped = Some(p);
                    }
                }
            }
            let endpoint = clipped.ok_or(PathError::ExitMissed)?;
            pts.push(endpoint);
            return Ok(pts);
        }
        Err(PathError::ExitMissed)
    };

    let rightward = march(1.0)?;
    let leftward = march(-1.0)?;

    let mut verts: Vec<Point<f64>> = leftward.into_iter().rev().collect();
    verts.push(start);
    verts.extend(rightward);
    // Guard against repeated x from the clipping step.
    verts.dedup_by(|p, q| (p.x - q.x).abs() <= 1e-15);

    let tol = 1e-9 * game.diameter_f64();
    let left_ok = game.left_edge().contains(&verts[0], tol.max(1e-9));
    let right_ok = game
        .right_edge()
        .contains(&verts[verts.len() - 1], tol.max(1e-9));
    if !left_ok || !right_ok {
        return Err(PathError::ExitMissed);
    }
    SeparationPath::new(game, verts)
}

/// Direction for a full set built from a base point set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FullDirection {
    Upper,
    Lower,
}

/// Union of upper triangles (or lower quadrangles) over a base set.
#[derive(Clone, Debug)]
pub struct FullRegion<S> {
    base: Vec<Point<S>>,
    pub direction: FullDirection,
}

impl<S: Scalar> FullRegion<S> {
    pub fn new(base: Vec<Point<S>>, direction: FullDirection) -> Self {
        assert!(!base.is_empty(), "full region needs a nonempty base");
        FullRegion { base, direction }
    }

    pub fn contains(&self, game: &Game<S>, q: &Point<S>, tol: f64) -> bool {
        self.base.iter().any(|s| match self.direction {
            FullDirection::Upper => game.upper_triangle(s).contains(q, tol),
            FullDirection::Lower => game.lower_quadrangle(s).contains(q, tol),
        })
    }

    pub fn dist_f64(&self, game: &Game<S>, q: &Point<S>) -> f64 {
        self.base
            .iter()
            .map(|s| match self.direction {
                FullDirection::Upper => game.upper_triangle(s).dist_f64(q),
                FullDirection::Lower => game.lower_quadrangle(s).dist_f64(q),
            })
            .fold(f64::INFINITY, f64::min)
    }
}
