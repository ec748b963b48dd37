//! Replicator dynamics over a roster of simple Smale plans.
//!
//! Pairwise limit payoffs come from the separation-line intersections; the
//! two extreme self-pairings use the standing conventions (diagonal pair
//! with initial cooperation pays `(R,R)`; co-diagonal pair pays the
//! midpoint). The population then evolves by `dξ_i/dt = ξ_i (A_{iξ} −
//! A_{ξξ})` on the unit simplex.

use std::cmp::Ordering;

use thiserror::Error;

use crate::game::{Game, SepLine};
use crate::scalar::Scalar;
use crate::smale::{
    classify_smale, effective_simple_line, predicted_limit, PredictedLimit, SmalePlan,
};

#[derive(Debug, Error, PartialEq)]
pub enum EvoError {
    #[error("roster member {index} is not a simple plan")]
    NotSimple { index: usize },
    #[error("diagonal roster member {index} must be weakly agreeable for the self-pairing convention")]
    DiagonalNotAgreeable { index: usize },
    #[error("roster member {index} uses the co-diagonal, which needs P <= (T+S)/2")]
    CoDiagonalInvalid { index: usize },
    #[error("roster needs at least two members")]
    TooSmall,
    #[error("initial frequencies must be nonnegative and sum to 1")]
    BadState,
}

/// An indexed roster of simple Smale plans.
#[derive(Clone, Debug)]
pub struct Roster<S> {
    plans: Vec<SmalePlan<S>>,
    lines: Vec<SepLine<S>>,
    diagonal: Vec<bool>,
    co_diagonal: Vec<bool>,
}

impl<S: Scalar> Roster<S> {
    pub fn new(game: &Game<S>, plans: Vec<SmalePlan<S>>) -> Result<Self, EvoError> {
        if plans.len() < 2 {
            return Err(EvoError::TooSmall);
        }
        let mut lines = Vec::with_capacity(plans.len());
        let mut diagonal = Vec::with_capacity(plans.len());
        let mut co_diagonal = Vec::with_capacity(plans.len());
        for (index, plan) in plans.iter().enumerate() {
            let line =
                effective_simple_line(game, plan).ok_or(EvoError::NotSimple { index })?;
            let is_diag = line.is_diagonal(game);
            let is_co = line.is_co_diagonal(game);
            if is_diag && plan.decision_at(game, &game.rr()) != Some(true) {
                return Err(EvoError::DiagonalNotAgreeable { index });
            }
            if is_co && !game.is_separation_line(&line.line()) {
                return Err(EvoError::CoDiagonalInvalid { index });
            }
            lines.push(line);
            diagonal.push(is_diag);
            co_diagonal.push(is_co);
        }
        Ok(Roster {
            plans,
            lines,
            diagonal,
            co_diagonal,
        })
    }

    pub fn len(&self) -> usize {
        self.plans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plans.is_empty()
    }

    pub fn plans(&self) -> &[SmalePlan<S>] {
        &self.plans
    }

    pub fn lines(&self) -> &[SepLine<S>] {
        &self.lines
    }
}

/// Pairwise limit payoff matrix: `A[i][j]` is the payoff to an `i` player
/// meeting a `j` player. Exact entries are kept alongside the float view so
/// strict dominance comparisons cannot flip from rounding.
#[derive(Clone, Debug)]
pub struct PayoffMatrix<S> {
    pub entries: Vec<Vec<S>>,
    pub float: Vec<Vec<f64>>,
}

pub fn build_payoff_matrix<S: Scalar>(
    game: &Game<S>,
    roster: &Roster<S>,
) -> PayoffMatrix<S> {
    let n = roster.len();
    let mut entries: Vec<Vec<S>> = vec![vec![S::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let v = if roster.diagonal[i] && roster.diagonal[j] {
                game.r().clone()
            } else if roster.co_diagonal[i] && roster.co_diagonal[j] {
                (game.t().clone() + game.s().clone()).half()
            } else {
                match predicted_limit(game, &roster.plans[i], &roster.plans[j])
                    .expect("roster members are simple")
                {
                    PredictedLimit::Point(p) => p.x,
                    // Unreachable: extreme pairs were handled above.
                    PredictedLimit::DiagonalPair => game.r().clone(),
                    PredictedLimit::CoDiagonalPair => {
                        (game.t().clone() + game.s().clone()).half()
                    }
                }
            };
            entries[i][j] = v;
        }
    }
    let float = entries
        .iter()
        .map(|row| row.iter().map(|v| v.to_f64()).collect())
        .collect();
    PayoffMatrix { entries, float }
}

impl<S: Scalar> PayoffMatrix<S> {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Strict self-stability: every invader does strictly worse against
    /// `i*` than `i*` does against itself.
    pub fn is_ess(&self, i_star: usize) -> bool {
        let n = self.len();
        (0..n).all(|j| {
            j == i_star
                || self.entries[j][i_star].cmp_total(&self.entries[i_star][i_star])
                    == Ordering::Less
        })
    }

    /// `i` weakly dominates `j` within `subset`: `A_jk <= A_ik` for all
    /// `k` in the subset, strict at `k = i` or `k = j`.
    pub fn weakly_dominates(&self, i: usize, j: usize, subset: &[usize]) -> bool {
        if i == j {
            return false;
        }
        let all_le = subset.iter().all(|&k| {
            self.entries[j][k].cmp_total(&self.entries[i][k]) != Ordering::Greater
        });
        let strict_at_ij = [i, j].iter().any(|&k| {
            subset.contains(&k)
                && self.entries[j][k].cmp_total(&self.entries[i][k]) == Ordering::Less
        });
        all_le && strict_at_ij
    }

    /// Strict domination within `subset`.
    pub fn dominates(&self, i: usize, j: usize, subset: &[usize]) -> bool {
        i != j
            && subset.iter().all(|&k| {
                self.entries[j][k].cmp_total(&self.entries[i][k]) == Ordering::Less
            })
    }

    /// `i*` weakly dominates the ordered sequence: for some split `m`, it
    /// weakly dominates the first `m` members in the full index set and
    /// strictly dominates each later one in the set shrunk by the earlier
    /// members.
    pub fn dominates_sequence(&self, i_star: usize, seq: &[usize]) -> bool {
        let n = self.len();
        let full: Vec<usize> = (0..n).collect();
        'split: for m in 0..=seq.len() {
            for &j in &seq[..m] {
                if !self.weakly_dominates(i_star, j, &full) {
                    continue 'split;
                }
            }
            for (p, &j) in seq.iter().enumerate().skip(m) {
                let remaining: Vec<usize> = full
                    .iter()
                    .copied()
                    .filter(|k| !seq[..p].contains(k))
                    .collect();
                if !self.dominates(i_star, j, &remaining) {
                    continue 'split;
                }
            }
            return true;
        }
        false
    }
}

/// Right-hand side of the replicator equation; components sum to zero.
pub fn replicator_field(xi: &[f64], a: &[Vec<f64>]) -> Vec<f64> {
    let n = xi.len();
    let mut a_i_xi = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            a_i_xi[i] += a[i][j] * xi[j];
        }
    }
    let a_xi_xi: f64 = (0..n).map(|i| xi[i] * a_i_xi[i]).sum();
    (0..n).map(|i| xi[i] * (a_i_xi[i] - a_xi_xi)).collect()
}

#[derive(Clone, Debug)]
pub struct OrbitConfig {
    pub t_max: f64,
    pub step: f64,
    /// Stop once some frequency reaches `1 − fixation_eps`.
    pub fixation_eps: f64,
    /// Record every k-th step.
    pub sample_every: usize,
}

impl Default for OrbitConfig {
    fn default() -> Self {
        OrbitConfig {
            t_max: 1e4,
            step: 0.01,
            fixation_eps: 1e-6,
            sample_every: 100,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Orbit {
    pub samples: Vec<(f64, Vec<f64>)>,
    pub final_state: Vec<f64>,
    pub final_time: f64,
    pub fixation: Option<usize>,
    /// Smallest observed per-step increment of `ln ξ_i − ln ξ_j` over the
    /// monitored pairs (negative values break monotonicity).
    pub min_monitor_delta: f64,
    pub step_halvings: u32,
    /// Worst simplex-sum drift observed before renormalization.
    pub max_sum_drift: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum OrbitError {
    #[error("state left the simplex beyond the instability guard")]
    Unstable,
}

/// Fixed-step fourth-order integration of the replicator field with a
/// renormalization guard. Faces are exactly invariant: zero frequencies
/// produce zero field components. `monitor_pairs` are (dominating,
/// dominated) index pairs whose log-ratio must never decrease.
pub fn integrate(
    a: &[Vec<f64>],
    xi0: &[f64],
    cfg: &OrbitConfig,
    monitor_pairs: &[(usize, usize)],
) -> Result<Orbit, OrbitError> {
    let n = xi0.len();
    let sum: f64 = xi0.iter().sum();
    if xi0.iter().any(|v| *v < 0.0) || (sum - 1.0).abs() > 1e-9 {
        return Err(OrbitError::Unstable);
    }
    let mut xi: Vec<f64> = xi0.to_vec();
    let mut t = 0.0;
    let mut h = cfg.step;
    let mut samples = vec![(0.0, xi.clone())];
    let mut fixation = None;
    let mut min_monitor_delta = f64::INFINITY;
    let mut step_halvings = 0u32;
    let mut max_sum_drift = 0.0f64;
    let mut step_index = 0usize;

    let ratios = |xi: &[f64]| -> Vec<f64> {
        monitor_pairs
            .iter()
            .map(|&(i, j)| {
                if xi[i] > 1e-300 && xi[j] > 1e-300 {
                    (xi[i] / xi[j]).ln()
                } else {
                    f64::NAN
                }
            })
            .collect()
    };

    while t < cfg.t_max {
        let before = ratios(&xi);
        let k1 = replicator_field(&xi, a);
        let stage = |base: &[f64], k: &[f64], f: f64| -> Vec<f64> {
            (0..n).map(|i| base[i] + f * k[i]).collect()
        };
        let k2 = replicator_field(&stage(&xi, &k1, h / 2.0), a);
        let k3 = replicator_field(&stage(&xi, &k2, h / 2.0), a);
        let k4 = replicator_field(&stage(&xi, &k3, h), a);
        let mut next: Vec<f64> = (0..n)
            .map(|i| xi[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect();

        if next.iter().any(|v| *v < -1e-9) {
            h /= 2.0;
            step_halvings += 1;
            if step_halvings > 60 {
                return Err(OrbitError::Unstable);
            }
            continue;
        }
        for v in next.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let sum: f64 = next.iter().sum();
        max_sum_drift = max_sum_drift.max((sum - 1.0).abs());
        for v in next.iter_mut() {
            *v /= sum;
        }

        t += h;
        xi = next;
        step_index += 1;

        let after = ratios(&xi);
        for (b, a_) in before.iter().zip(&after) {
            if b.is_finite() && a_.is_finite() {
                min_monitor_delta = min_monitor_delta.min(a_ - b);
            }
        }

        if step_index % cfg.sample_every == 0 {
            samples.push((t, xi.clone()));
        }
        if let Some(i) = (0..n).find(|&i| xi[i] >= 1.0 - cfg.fixation_eps) {
            fixation = Some(i);
            break;
        }
    }
    samples.push((t, xi.clone()));
    Ok(Orbit {
        final_state: xi,
        final_time: t,
        samples,
        fixation,
        min_monitor_delta: if min_monitor_delta.is_finite() {
            min_monitor_delta
        } else {
            0.0
        },
        step_halvings,
        max_sum_drift,
    })
}

/// Applicability of the three stability theorems to a roster with a
/// designated resident `i*`.
#[derive(Clone, Debug)]
pub struct TheoremReport {
    pub i_star: usize,
    /// `ℓ_{i*}` is a protection line and no other line passes through
    /// `(R,R)`: fixation at `i*` is an attractor.
    pub ess_applicable: bool,
    /// All other lines horizontal at heights in `[P, R)`: global stability.
    pub equalizer_applicable: bool,
    /// Good `i*`, non-negative slopes, `(R,R)` off the other lines,
    /// horizontals below `ℓ_{i*}`: global stability.
    pub global_applicable: bool,
    /// For non-horizontal competitors: x-coordinates of `ℓ_j ∩ ℓ_{i*}` and
    /// `Switch(ℓ_j) ∩ ℓ_{i*}`, which satisfy `V_x < W_x` under the global
    /// theorem's hypotheses.
    pub crossing_order: Vec<(usize, f64, f64)>,
}

pub fn check_theorem_hypotheses<S: Scalar>(
    game: &Game<S>,
    roster: &Roster<S>,
    i_star: usize,
) -> TheoremReport {
    let li = &roster.lines[i_star];
    let protection = game.is_protection_line(&li.line());
    let rr = game.rr();

    let others: Vec<usize> = (0..roster.len()).filter(|&j| j != i_star).collect();
    let rr_off_others = others
        .iter()
        .all(|&j| !roster.lines[j].line().contains(&rr, 0.0));

    let ess_applicable = protection && rr_off_others;

    let equalizer_applicable = protection
        && others.iter().all(|&j| {
            let l = &roster.lines[j];
            l.is_horizontal()
                && l.anchor.y.cmp_total(game.p()) != Ordering::Less
                && l.anchor.y.cmp_total(game.r()) == Ordering::Less
        });

    let good_resident = protection
        && li.slope.cmp_total(&S::one()) == Ordering::Less
        && classify_smale(&roster.plans[i_star], game).weakly_agreeable;
    let slopes_ok = (0..roster.len())
        .all(|j| roster.lines[j].slope.sign_band(0.0) != Ordering::Less);
    let li_map = li.affine(game);
    let horizontals_below = others.iter().all(|&j| {
        let l = &roster.lines[j];
        if !l.is_horizontal() {
            return true;
        }
        let seg = l.hull_segment(game);
        li_map.sign_at(&seg.a, 0.0) == Ordering::Less
            && li_map.sign_at(&seg.b, 0.0) == Ordering::Less
    });
    let global_applicable =
        good_resident && rr_off_others && slopes_ok && horizontals_below;

    // The crossing-coordinate ordering only concerns competitor lines
    // whose hull segment is not entirely below the resident line; lines
    // lying below are eliminated by plain weak domination.
    let mut crossing_order = Vec::new();
    for &j in &others {
        let lj = &roster.lines[j];
        if lj.is_horizontal() {
            continue;
        }
        let seg = lj.hull_segment(game);
        let below = li_map.sign_at(&seg.a, 0.0) != Ordering::Greater
            && li_map.sign_at(&seg.b, 0.0) != Ordering::Greater;
        if below {
            continue;
        }
        let v = crate::geom::line_intersection(&lj.line(), &li.line());
        let w = crate::geom::line_intersection(&lj.line().switch(), &li.line());
        if let (
            crate::geom::Intersection::Point(v),
            crate::geom::Intersection::Point(w),
        ) = (v, w)
        {
            crossing_order.push((j, v.x.to_f64(), w.x.to_f64()));
        }
    }
    crossing_order.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());

    TheoremReport {
        i_star,
        ess_applicable,
        equalizer_applicable,
        global_applicable,
        crossing_order,
    }
}

/// The elimination order used by the global-stability argument: members
/// lying below the resident line first, then the rest by increasing
/// crossing coordinate.
pub fn global_elimination_sequence<S: Scalar>(
    game: &Game<S>,
    roster: &Roster<S>,
    i_star: usize,
) -> Vec<usize> {
    let li_map = roster.lines[i_star].affine(game);
    let mut below: Vec<usize> = Vec::new();
    let mut crossing: Vec<(usize, f64)> = Vec::new();
    for j in 0..roster.len() {
        if j == i_star {
            continue;
        }
        let seg = roster.lines[j].hull_segment(game);
        let a = li_map.sign_at(&seg.a, 0.0);
        let b = li_map.sign_at(&seg.b, 0.0);
        if a != Ordering::Greater && b != Ordering::Greater {
            below.push(j);
        } else {
            match crate::geom::line_intersection(
                &roster.lines[j].line(),
                &roster.lines[i_star].line(),
            ) {
                crate::geom::Intersection::Point(p) => crossing.push((j, p.x.to_f64())),
                _ => crossing.push((j, f64::INFINITY)),
            }
        }
    }
    crossing.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    below.extend(crossing.into_iter().map(|(j, _)| j));
    below
}
