//! Memory-one plans and the induced four-state outcome chain.
//!
//! When both players use memory-one plans the outcome sequence follows a
//! Markov chain on `{cc, cd, dc, dd}`. Y's plan is given in Y's own frame,
//! so building the transition matrix uses Y's response vector
//! `(q1, q3, q2, q4)` — switching seats interchanges `cd` and `dc`.

use std::cmp::Ordering;

use thiserror::Error;

use crate::game::Game;
use crate::geom::{Outcome, Point, OUTCOMES};
use crate::scalar::Scalar;
use crate::weights::WeightSequence;

#[derive(Debug, Error, PartialEq)]
pub enum MarkovError {
    #[error("probability out of range at index {index}: {value}")]
    ProbabilityRange { index: usize, value: f64 },
    #[error("stationary solve failed: residual {residual}")]
    SolveFailed { residual: f64 },
}

/// Cooperation probabilities conditioned on the previous outcome
/// `(cc, cd, dc, dd)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovPlan<S> {
    probs: [S; 4],
}

impl<S: Scalar> MarkovPlan<S> {
    pub fn new(probs: [S; 4]) -> Result<Self, MarkovError> {
        for (i, p) in probs.iter().enumerate() {
            if p.sign_band(0.0) == Ordering::Less
                || (p.clone() - S::one()).sign_band(0.0) == Ordering::Greater
            {
                return Err(MarkovError::ProbabilityRange {
                    index: i,
                    value: p.to_f64(),
                });
            }
        }
        Ok(MarkovPlan { probs })
    }

    pub fn from_ratios(ratios: [(i64, i64); 4]) -> Result<Self, MarkovError> {
        Self::new(ratios.map(|(n, d)| S::ratio(n, d)))
    }

    pub fn tit_for_tat() -> Self {
        MarkovPlan {
            probs: [S::one(), S::zero(), S::one(), S::zero()],
        }
    }

    pub fn repeat() -> Self {
        MarkovPlan {
            probs: [S::one(), S::one(), S::zero(), S::zero()],
        }
    }

    pub fn all_c() -> Self {
        MarkovPlan {
            probs: [S::one(), S::one(), S::one(), S::one()],
        }
    }

    pub fn all_d() -> Self {
        MarkovPlan {
            probs: [S::zero(), S::zero(), S::zero(), S::zero()],
        }
    }

    pub fn probs(&self) -> &[S; 4] {
        &self.probs
    }

    /// Cooperation probability after the given outcome, seen from this
    /// player's own seat.
    pub fn response(&self, previous: Outcome) -> &S {
        &self.probs[previous.index()]
    }

    pub fn is_agreeable(&self) -> bool {
        self.probs[0] == S::one()
    }

    pub fn is_firm(&self) -> bool {
        self.probs[3].is_zero()
    }

    pub fn is_generous(&self) -> bool {
        self.is_agreeable()
            && self.probs[1].sign_band(0.0) == Ordering::Greater
            && (S::one() - self.probs[1].clone()).sign_band(0.0) == Ordering::Greater
            && self.probs[3].sign_band(0.0) == Ordering::Greater
    }
}

/// Classification flags for a memory-one plan.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MarkovFlags {
    pub agreeable: bool,
    pub firm: bool,
    pub generous: bool,
    /// `p1 = 1`, `(T−R)/(R−S)·p3 < 1−p2`, and `(T−R)/(R−P)·p4 < 1−p2`,
    /// all strict.
    pub protection_inequalities: bool,
    pub good: bool,
}

pub fn classify_markov<S: Scalar>(plan: &MarkovPlan<S>, game: &Game<S>) -> MarkovFlags {
    let agreeable = plan.is_agreeable();
    let firm = plan.is_firm();
    let generous = plan.is_generous();
    let [_, p2, p3, p4] = plan.probs().clone();
    let one_minus_p2 = S::one() - p2;
    let lhs_cd = (game.t().clone() - game.r().clone()) / (game.r().clone() - game.s().clone())
        * p3;
    let lhs_dd = (game.t().clone() - game.r().clone()) / (game.r().clone() - game.p().clone())
        * p4;
    let protection_inequalities = agreeable
        && lhs_cd.cmp_total(&one_minus_p2) == Ordering::Less
        && lhs_dd.cmp_total(&one_minus_p2) == Ordering::Less;
    MarkovFlags {
        agreeable,
        firm,
        generous,
        protection_inequalities,
        good: protection_inequalities && generous,
    }
}

/// Row-stochastic 4x4 transition matrix over outcomes `(cc, cd, dc, dd)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix<S> {
    rows: [[S; 4]; 4],
}

impl<S: Scalar> TransitionMatrix<S> {
    pub fn rows(&self) -> &[[S; 4]; 4] {
        &self.rows
    }

    pub fn entry(&self, from: Outcome, to: Outcome) -> &S {
        &self.rows[from.index()][to.index()]
    }

    /// One step of the distribution: `v · M`.
    pub fn step_distribution(&self, v: &[S; 4]) -> [S; 4] {
        std::array::from_fn(|j| {
            (0..4)
                .map(|i| v[i].clone() * self.rows[i][j].clone())
                .fold(S::zero(), |a, b| a + b)
        })
    }
}

/// Transition matrix when X plays `px` and Y plays `py` (both in their own
/// frames).
pub fn transition_matrix<S: Scalar>(
    px: &MarkovPlan<S>,
    py: &MarkovPlan<S>,
) -> TransitionMatrix<S> {
    let p = px.probs();
    let q = py.probs();
    // Y's response vector on X-frame outcomes: (q1, q3, q2, q4).
    let yresp = [q[0].clone(), q[2].clone(), q[1].clone(), q[3].clone()];
    let rows = std::array::from_fn(|i| {
        let pc = p[i].clone();
        let qc = yresp[i].clone();
        [
            pc.clone() * qc.clone(),
            pc.clone() * (S::one() - qc.clone()),
            (S::one() - pc.clone()) * qc.clone(),
            (S::one() - pc) * (S::one() - qc),
        ]
    });
    TransitionMatrix { rows }
}

/// Terminal sets (minimal closed communicating classes) with their
/// stationary distributions.
#[derive(Clone, Debug)]
pub struct TerminalSetReport<S> {
    pub terminal_sets: Vec<TerminalSet<S>>,
    pub transient: Vec<Outcome>,
}

#[derive(Clone, Debug)]
pub struct TerminalSet<S> {
    pub states: Vec<Outcome>,
    pub stationary: [S; 4],
    /// `‖vM − v‖` in float units (zero in exact mode).
    pub residual: f64,
}

impl<S: Scalar> TerminalSetReport<S> {
    pub fn is_convergent(&self) -> bool {
        self.terminal_sets.len() == 1
    }

    pub fn set_containing(&self, o: Outcome) -> Option<&TerminalSet<S>> {
        self.terminal_sets
            .iter()
            .find(|t| t.states.contains(&o))
    }
}

/// Find terminal sets by condensing the positive-entry digraph on the four
/// states, then solve `vM = v` restricted to each.
pub fn terminal_sets<S: Scalar>(
    m: &TransitionMatrix<S>,
) -> Result<TerminalSetReport<S>, MarkovError> {
    // reach[i][j]: j reachable from i in >= 0 steps.
    let mut reach = [[false; 4]; 4];
    for i in 0..4 {
        reach[i][i] = true;
        for j in 0..4 {
            if m.rows[i][j].sign_band(0.0) == Ordering::Greater {
                reach[i][j] = true;
            }
        }
    }
    for k in 0..4 {
        for i in 0..4 {
            for j in 0..4 {
                reach[i][j] |= reach[i][k] && reach[k][j];
            }
        }
    }
    let mut assigned = [false; 4];
    let mut sets: Vec<Vec<usize>> = Vec::new();
    let mut transient: Vec<Outcome> = Vec::new();
    for i in 0..4 {
        if assigned[i] {
            continue;
        }
        // The communicating class of i.
        let class: Vec<usize> = (0..4).filter(|&j| reach[i][j] && reach[j][i]).collect();
        // Closed iff nothing outside the class is reachable.
        let closed = class
            .iter()
            .all(|&a| (0..4).all(|b| !reach[a][b] || class.contains(&b)));
        if closed {
            for &j in &class {
                assigned[j] = true;
            }
            sets.push(class);
        } else if class.contains(&i) {
            assigned[i] = true;
            transient.push(Outcome::from_index(i));
        }
    }
    sets.sort_by_key(|c| c[0]);

    let mut out = Vec::new();
    for states in sets {
        let stationary = stationary_on(m, &states)?;
        let after = m.step_distribution(&stationary);
        let residual = (0..4)
            .map(|i| (after[i].to_f64() - stationary[i].to_f64()).powi(2))
            .sum::<f64>()
            .sqrt();
        if !S::EXACT && residual > 1e-10 {
            return Err(MarkovError::SolveFailed { residual });
        }
        out.push(TerminalSet {
            states: states.iter().map(|&i| Outcome::from_index(i)).collect(),
            stationary,
            residual,
        });
    }
    Ok(TerminalSetReport {
        terminal_sets: out,
        transient,
    })
}

/// Solve `v M = v`, `Σv = 1` with support restricted to `states`.
fn stationary_on<S: Scalar>(
    m: &TransitionMatrix<S>,
    states: &[usize],
) -> Result<[S; 4], MarkovError> {
    let k = states.len();
    // System over v_j, j in states: columns of (M^T - I) plus normalization.
    let mut a: Vec<Vec<S>> = vec![vec![S::zero(); k + 1]; k];
    for (row, &j) in states.iter().enumerate() {
        if row == k - 1 {
            break;
        }
        for (col, &i) in states.iter().enumerate() {
            let mut v = m.rows[i][j].clone();
            if i == j {
                v = v - S::one();
            }
            a[row][col] = v;
        }
        a[row][k] = S::zero();
    }
    for col in 0..k {
        a[k - 1][col] = S::one();
    }
    a[k - 1][k] = S::one();

    let sol = solve_dense(&mut a).ok_or(MarkovError::SolveFailed { residual: f64::NAN })?;
    let mut v = std::array::from_fn(|_| S::zero());
    for (col, &i) in states.iter().enumerate() {
        v[i] = sol[col].clone();
    }
    Ok(v)
}

/// Gaussian elimination on an augmented k x (k+1) system. Exact under
/// rational arithmetic; partial pivoting under floats.
fn solve_dense<S: Scalar>(a: &mut [Vec<S>]) -> Option<Vec<S>> {
    let k = a.len();
    for col in 0..k {
        let pivot_row = (col..k)
            .filter(|&r| a[r][col].sign_band(0.0) != Ordering::Equal)
            .max_by(|&r1, &r2| {
                a[r1][col]
                    .abs()
                    .to_f64()
                    .partial_cmp(&a[r2][col].abs().to_f64())
                    .unwrap_or(Ordering::Equal)
            })?;
        a.swap(col, pivot_row);
        let pivot = a[col][col].clone();
        for c in col..=k {
            a[col][c] = a[col][c].clone() / pivot.clone();
        }
        for r in 0..k {
            if r != col && a[r][col].sign_band(0.0) != Ordering::Equal {
                let factor = a[r][col].clone();
                for c in col..=k {
                    a[r][c] = a[r][c].clone() - factor.clone() * a[col][c].clone();
                }
            }
        }
    }
    Some((0..k).map(|r| a[r][k].clone()).collect())
}

/// Limiting average payoff for a stationary distribution:
/// `v1(R,R) + v2(S,T) + v3(T,S) + v4(P,P)`.
pub fn limiting_payoff<S: Scalar>(v: &[S; 4], game: &Game<S>) -> Point<S> {
    let mut x = S::zero();
    let mut y = S::zero();
    for (i, o) in OUTCOMES.iter().enumerate() {
        let pay = game.payoff(*o);
        x = x + v[i].clone() * pay.x;
        y = y + v[i].clone() * pay.y;
    }
    Point::new(x, y)
}

/// Closed-form limiting payoff when an agreeable, forgiving plan meets
/// All-D: `(P,P) + eps·(S−P, T−P)` with `eps = p4 / (p4 + (1 − p2))`.
pub fn alld_vs_generous_payoff<S: Scalar>(plan: &MarkovPlan<S>, game: &Game<S>) -> Point<S> {
    let [_, p2, _, p4] = plan.probs().clone();
    let denom = p4.clone() + (S::one() - p2);
    let eps = p4 / denom;
    Point::new(
        game.p().clone() + eps.clone() * (game.s().clone() - game.p().clone()),
        game.p().clone() + eps * (game.t().clone() - game.p().clone()),
    )
}

/// Weighted average of the distribution sequence `v^{k+1} = v^k M`:
/// `v̄^N = (1/W_N) Σ w_k v^k`, plus the residual `‖v̄ − v̄M‖` and its
/// theoretical bound `(w_1 + w_{N+1} + Δ_N) / W_N`.
pub struct WeightedDistributionAverage<S> {
    pub average: [S; 4],
    pub residual: f64,
    pub residual_bound: f64,
}

pub fn weighted_distribution_average<S: Scalar>(
    m: &TransitionMatrix<S>,
    v1: &[S; 4],
    weights: &WeightSequence,
    n: u64,
) -> WeightedDistributionAverage<S> {
    assert!(n >= 1);
    let mut v = v1.clone();
    let mut acc: [S; 4] = std::array::from_fn(|_| S::zero());
    let mut w_total = S::zero();
    for k in 1..=n {
        let w = S::from_f64_exact(weights.weight_f64(k));
        for i in 0..4 {
            acc[i] = acc[i].clone() + w.clone() * v[i].clone();
        }
        w_total = w_total + w;
        if k < n {
            v = m.step_distribution(&v);
        }
    }
    let average: [S; 4] = std::array::from_fn(|i| acc[i].clone() / w_total.clone());
    let after = m.step_distribution(&average);
    let residual = (0..4)
        .map(|i| (after[i].to_f64() - average[i].to_f64()).powi(2))
        .sum::<f64>()
        .sqrt();
    let (w1, wn1) = (weights.weight_f64(1), weights.weight_f64(n + 1));
    let delta: f64 = (1..=n)
        .map(|k| (weights.weight_f64(k + 1) - weights.weight_f64(k)).abs())
        .sum();
    let w_n: f64 = w_total.to_f64();
    WeightedDistributionAverage {
        average,
        residual,
        residual_bound: (w1 + wn1 + delta) / w_n,
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

    #[test]
    fn tft_matrix_rows() {
        let tft = MarkovPlan::<Rat>::tit_for_tat();
        let m = transition_matrix(&tft, &tft);
        // Row cd: X defects (p2 = 0), Y cooperates (response q3 = 1) -> dc.
        assert_eq!(
            m.rows()[Outcome::Cd.index()],
            [Rat::zero(), Rat::zero(), Rat::one(), Rat::zero()]
        );
        assert_eq!(
            m.rows()[Outcome::Cc.index()],
            [Rat::one(), Rat::zero(), Rat::zero(), Rat::zero()]
        );
    }

    #[test]
    fn repeat_fixes_every_state() {
        let rep = MarkovPlan::<Rat>::repeat();
        let m = transition_matrix(&rep, &rep);
        for o in OUTCOMES {
            assert_eq!(m.entry(o, o), &Rat::one());
        }
    }

    #[test]
    fn interior_plans_give_positive_matrix() {
        let p = MarkovPlan::<Rat>::from_ratios([(1, 2), (1, 3), (2, 3), (1, 4)]).unwrap();
        let q = MarkovPlan::<Rat>::from_ratios([(3, 4), (1, 5), (1, 2), (2, 5)]).unwrap();
        let m = transition_matrix(&p, &q);
        for row in m.rows() {
            for e in row {
                assert_eq!(e.sign_band(0.0), Ordering::Greater);
            }
        }
        let report = terminal_sets(&m).unwrap();
        assert!(report.is_convergent());
        assert_eq!(report.terminal_sets[0].states.len(), 4);
        for s in &report.terminal_sets[0].stationary {
            assert_eq!(s.sign_band(0.0), Ordering::Greater);
        }
    }

    #[test]
    fn tft_terminal_sets() {
        let tft = MarkovPlan::<Rat>::tit_for_tat();
        let m = transition_matrix(&tft, &tft);
        let report = terminal_sets(&m).unwrap();
        let sets: Vec<Vec<Outcome>> = report
            .terminal_sets
            .iter()
            .map(|t| t.states.clone())
            .collect();
        assert_eq!(
            sets,
            vec![
                vec![Outcome::Cc],
                vec![Outcome::Cd, Outcome::Dc],
                vec![Outcome::Dd]
            ]
        );
        let two_cycle = &report.terminal_sets[1];
        assert_eq!(
            two_cycle.stationary,
            [
                Rat::zero(),
                Rat::ratio(1, 2),
                Rat::ratio(1, 2),
                Rat::zero()
            ]
        );
        assert!(report.transient.is_empty());
    }

    #[test]
    fn generous_pair_has_unique_cc_terminal_set() {
        let p = MarkovPlan::<Rat>::from_ratios([(1, 1), (1, 2), (3, 10), (1, 2)]).unwrap();
        let q = MarkovPlan::<Rat>::from_ratios([(1, 1), (2, 5), (1, 5), (3, 5)]).unwrap();
        assert!(p.is_generous() && q.is_generous());
        let report = terminal_sets(&transition_matrix(&p, &q)).unwrap();
        assert!(report.is_convergent());
        assert_eq!(report.terminal_sets[0].states, vec![Outcome::Cc]);
        assert_eq!(report.transient.len(), 3);
    }

    #[test]
    fn limiting_payoff_examples() {
        let g = canonical();
        let v = [Rat::one(), Rat::zero(), Rat::zero(), Rat::zero()];
        assert_eq!(limiting_payoff(&v, &g), g.rr());
        let v = [
            Rat::zero(),
            Rat::ratio(1, 2),
            Rat::ratio(1, 2),
            Rat::zero(),
        ];
        assert_eq!(
            limiting_payoff(&v, &g),
            Point::new(Rat::ratio(5, 2), Rat::ratio(5, 2))
        );
        let v = [
            Rat::zero(),
            Rat::ratio(1, 2),
            Rat::zero(),
            Rat::ratio(1, 2),
        ];
        assert_eq!(
            limiting_payoff(&v, &g),
            Point::new(Rat::ratio(1, 2), Rat::from_int(3))
        );
    }

    #[test]
    fn classify_examples() {
        let g = canonical();
        let tft = MarkovPlan::<Rat>::tit_for_tat();
        let f = classify_markov(&tft, &g);
        assert!(f.protection_inequalities && f.firm && !f.generous && !f.good);

        let p = MarkovPlan::<Rat>::from_ratios([(1, 1), (1, 10), (3, 10), (1, 5)]).unwrap();
        let f = classify_markov(&p, &g);
        assert!(f.protection_inequalities && f.generous && f.good);

        let alld = MarkovPlan::<Rat>::all_d();
        let f = classify_markov(&alld, &g);
        assert!(!f.agreeable && !f.good);
    }

    #[test]
    fn protection_boundary_is_not_protected() {
        // (T−R)/(R−S)·p3 = 1−p2 exactly: 2/3 · 3/4 = 1/2 = 1 − 1/2.
        let g = canonical();
        let p = MarkovPlan::<Rat>::from_ratios([(1, 1), (1, 2), (3, 4), (0, 1)]).unwrap();
        let f = classify_markov(&p, &g);
        assert!(!f.protection_inequalities);
    }

    #[test]
    fn alld_formula_matches_stationary_solve() {
        let g = canonical();
        let p = MarkovPlan::<Rat>::from_ratios([(1, 1), (1, 2), (3, 10), (1, 2)]).unwrap();
        let closed_form = alld_vs_generous_payoff(&p, &g);
        assert_eq!(
            closed_form,
            Point::new(Rat::ratio(1, 2), Rat::from_int(3))
        );
        let m = transition_matrix(&p, &MarkovPlan::all_d());
        let report = terminal_sets(&m).unwrap();
        assert!(report.is_convergent());
        let t = &report.terminal_sets[0];
        assert_eq!(t.states, vec![Outcome::Cd, Outcome::Dd]);
        assert_eq!(limiting_payoff(&t.stationary, &g), closed_form);

        // p4 -> 0 collapses to (P,P).
        let firm = MarkovPlan::<Rat>::from_ratios([(1, 1), (1, 2), (3, 10), (0, 1)]).unwrap();
        assert_eq!(alld_vs_generous_payoff(&firm, &g), g.pp());

        // eps = 1/3 example.
        let p = MarkovPlan::<Rat>::from_ratios([(1, 1), (1, 5), (3, 10), (2, 5)]).unwrap();
        assert_eq!(
            alld_vs_generous_payoff(&p, &g),
            Point::new(Rat::ratio(2, 3), Rat::ratio(7, 3))
        );
    }

    #[test]
    fn weighted_average_single_term() {
        let tft = MarkovPlan::<Rat>::tit_for_tat();
        let m = transition_matrix(&tft, &tft);
        let v1 = [Rat::zero(), Rat::one(), Rat::zero(), Rat::zero()];
        let out = weighted_distribution_average(&m, &v1, &WeightSequence::Uniform, 1);
        assert_eq!(out.average, v1);
    }

    #[test]
    fn weighted_average_two_cycle_converges() {
        let tft = MarkovPlan::<Rat>::tit_for_tat();
        let m = transition_matrix(&tft, &tft);
        let v1 = [Rat::zero(), Rat::one(), Rat::zero(), Rat::zero()];
        let out =
            weighted_distribution_average(&m, &v1, &WeightSequence::Linear, 4000);
        for (i, target) in [0.0, 0.5, 0.5, 0.0].iter().enumerate() {
            assert!((out.average[i].to_f64() - target).abs() < 1e-3);
        }
        assert!(out.residual <= out.residual_bound + 1e-12);
    }
}
