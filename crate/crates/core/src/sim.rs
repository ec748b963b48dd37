//! Round-by-round match engine with uniform and weighted running averages.
//!
//! A strategy is an initial play, an optional scripted prefix, and a plan
//! adopted from a given round on. Markov plans consume the previous
//! outcome; Smale plans consume the current running average, with the Y
//! seat evaluating through the coordinate switch. Each seat draws its mixed
//! moves from its own RNG substream, so one player's plan choice can never
//! perturb the other's randomness.
//!
//! The running average obeys `s^{N+1} = (W_N/W_{N+1}) s^N +
//! (w_{N+1}/W_{N+1}) S^{N+1}`; in rational mode with integer weight
//! sequences the averages are exact, and the step-size law
//! `‖s^{N+1} − s^N‖ <= (w_{N+1}/W_{N+1})·sqrt(2)·(T−S)` is tracked on every
//! step.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::game::Game;
use crate::geom::{Move, Outcome, Point};
use crate::markov::MarkovPlan;
use crate::scalar::Scalar;
use crate::smale::{SmaleError, SmalePlan};
use crate::weights::{weight_conditions, WeightReport, WeightSequence};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("weights fail condition {failed}; the separation-bound machinery needs conditions 1 and 2")]
    WeightsRefused { failed: &'static str },
    #[error("rational mode requires an integer weight sequence (uniform, linear, or integer power)")]
    RationalWeights,
    #[error("a scripted plan needs at least one move")]
    EmptyScript,
    #[error("need at least one round")]
    NoRounds,
    #[error("plan evaluation failed: {0}")]
    Plan(#[from] SmaleError),
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialPlay<S> {
    Move(Move),
    /// Cooperate with this probability on the first round.
    Mixed(S),
}

#[derive(Clone, Debug)]
pub enum Plan<S> {
    Markov(MarkovPlan<S>),
    Smale(SmalePlan<S>),
    /// Fixed move list, cycled.
    Scripted(Vec<Move>),
}

/// Initial play, scripted prefix, and the plan used eventually.
#[derive(Clone, Debug)]
pub struct Strategy<S> {
    pub initial: InitialPlay<S>,
    /// Moves for the rounds before the plan is adopted (cycled; an empty
    /// prefix repeats the initial play).
    pub prefix: Vec<Move>,
    /// The plan governs responses to the history from this round count on:
    /// with `adoption_round = n`, the plan decides rounds `n + 1, n + 2, …`.
    pub adoption_round: u64,
    pub plan: Plan<S>,
}

impl<S: Scalar> Strategy<S> {
    pub fn markov(initial: Move, plan: MarkovPlan<S>) -> Self {
        Strategy {
            initial: InitialPlay::Move(initial),
            prefix: Vec::new(),
            adoption_round: 1,
            plan: Plan::Markov(plan),
        }
    }

    pub fn smale(initial: Move, plan: SmalePlan<S>) -> Self {
        Strategy {
            initial: InitialPlay::Move(initial),
            prefix: Vec::new(),
            adoption_round: 1,
            plan: Plan::Smale(plan),
        }
    }

    pub fn scripted(moves: Vec<Move>) -> Self {
        let initial = moves.first().copied().unwrap_or(Move::D);
        Strategy {
            initial: InitialPlay::Move(initial),
            prefix: Vec::new(),
            adoption_round: 1,
            plan: Plan::Scripted(moves),
        }
    }

    pub fn with_prefix(mut self, prefix: Vec<Move>, adoption_round: u64) -> Self {
        self.prefix = prefix;
        self.adoption_round = adoption_round.max(1);
        self
    }

    fn uses_smale(&self) -> bool {
        matches!(self.plan, Plan::Smale(_))
    }

    fn uses_markov(&self) -> bool {
        matches!(self.plan, Plan::Markov(_))
    }
}

#[derive(Clone, Debug)]
pub struct MatchConfig {
    pub rounds: u64,
    pub seed: u64,
    pub weights: WeightSequence,
    /// Skip the weight-condition refusal (the step-law statistics and
    /// separation bounds lose their meaning).
    pub allow_unchecked_weights: bool,
}

impl MatchConfig {
    pub fn new(rounds: u64, seed: u64) -> Self {
        MatchConfig {
            rounds,
            seed,
            weights: WeightSequence::Uniform,
            allow_unchecked_weights: false,
        }
    }

    pub fn weighted(mut self, weights: WeightSequence) -> Self {
        self.weights = weights;
        self
    }
}

/// Full record of one simulated match.
#[derive(Clone, Debug)]
pub struct Trajectory<S> {
    pub outcomes: Vec<Outcome>,
    /// Running average after each round, in float view.
    pub averages: Vec<(f64, f64)>,
    /// Exact final running average (exact only in rational mode).
    pub final_average: Point<S>,
    pub seed: u64,
    pub weights: WeightSequence,
    /// Max over all steps of `‖Δs‖ / ((w_{N+1}/W_{N+1})·diam)`; the step
    /// law says this never exceeds 1.
    pub max_step_ratio: f64,
    pub warnings: Vec<String>,
}

impl<S: Scalar> Trajectory<S> {
    pub fn rounds(&self) -> u64 {
        self.outcomes.len() as u64
    }

    pub fn final_average_f64(&self) -> (f64, f64) {
        *self.averages.last().expect("at least one round")
    }

    /// Exact running average after round `n`, recomputed from the outcome
    /// record by direct weighted summation (an independent route from the
    /// engine's incremental update).
    pub fn exact_average_at(&self, game: &Game<S>, n: u64) -> Point<S> {
        assert!(n >= 1 && n <= self.rounds());
        let mut acc = Point::new(S::zero(), S::zero());
        let mut w_sum = S::zero();
        for (i, o) in self.outcomes.iter().take(n as usize).enumerate() {
            let w = weight_scalar::<S>(&self.weights, (i + 1) as u64);
            let pay = game.payoff(*o);
            acc.x = acc.x + w.clone() * pay.x;
            acc.y = acc.y + w.clone() * pay.y;
            w_sum = w_sum + w;
        }
        Point::new(acc.x / w_sum.clone(), acc.y / w_sum)
    }

    /// The last `fraction` of the per-round averages.
    pub fn tail(&self, fraction: f64) -> &[(f64, f64)] {
        let n = self.averages.len();
        let keep = ((n as f64) * fraction).ceil() as usize;
        &self.averages[n - keep.clamp(1, n)..]
    }

    pub fn outcome_counts(&self) -> [u64; 4] {
        let mut c = [0u64; 4];
        for o in &self.outcomes {
            c[o.index()] += 1;
        }
        c
    }

    /// First round from which every later outcome equals `o`.
    pub fn constant_from(&self, o: Outcome) -> Option<u64> {
        let mut from = None;
        for (i, got) in self.outcomes.iter().enumerate() {
            if *got == o {
                if from.is_none() {
                    from = Some(i as u64 + 1);
                }
            } else {
                from = None;
            }
        }
        from
    }
}

fn weight_scalar<S: Scalar>(w: &WeightSequence, n: u64) -> S {
    match w.exact_weight_i128(n) {
        Some(v) => S::from_i128(v),
        None => S::from_f64_exact(w.weight_f64(n)),
    }
}

/// Simulate a match. Deterministic given (strategies, seed, rounds,
/// weights).
pub fn simulate<S: Scalar>(
    game: &Game<S>,
    x: &Strategy<S>,
    y: &Strategy<S>,
    cfg: &MatchConfig,
) -> Result<Trajectory<S>, SimError> {
    if cfg.rounds == 0 {
        return Err(SimError::NoRounds);
    }
    for s in [x, y] {
        if let Plan::Scripted(moves) = &s.plan {
            if moves.is_empty() {
                return Err(SimError::EmptyScript);
            }
        }
    }
    let mut warnings = Vec::new();
    if !cfg.weights.is_uniform() {
        let horizon = cfg.rounds.clamp(16, 2_000).max(16);
        let report: WeightReport = weight_conditions(&cfg.weights, horizon);
        if !cfg.allow_unchecked_weights {
            if !report.c1 {
                return Err(SimError::WeightsRefused { failed: "1" });
            }
            if !report.c2 {
                return Err(SimError::WeightsRefused { failed: "2" });
            }
        }
        if !report.c3 && (x.uses_markov() || y.uses_markov()) {
            warnings.push(
                "weight condition 3 fails: Markov averages may not converge to a stationary distribution"
                    .into(),
            );
        }
    }
    if S::EXACT && cfg.weights.exact_weight_i128(1).is_none() {
        return Err(SimError::RationalWeights);
    }

    let mut rng_x = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng_x.set_stream(1);
    let mut rng_y = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng_y.set_stream(2);

    // Compile the exact run down to machine integers when everything fits.
    let mut draw_probs: Vec<S> = Vec::new();
    let mut fast_x: Option<fast::FastSmale> = None;
    let mut fast_y: Option<fast::FastSmale> = None;
    // Plans that fail to compile still get exact averages; the integer
    // accumulator serves them through per-round materialization.
    let fast_accum = fast::build_accum(game, &cfg.weights, cfg.rounds).map(|(accum, bounds)| {
        for (strategy, slot) in [(x, &mut fast_x), (y, &mut fast_y)] {
            if let Plan::Smale(plan) = &strategy.plan {
                *slot = fast::compile_plan(plan, game, &bounds, &mut draw_probs);
            }
        }
        accum
    });

    let mut rec = Recorder::new(game, cfg, fast_accum);
    let needs_avg = x.uses_smale() || y.uses_smale();

    let mx = initial_move(x, &mut rng_x);
    let my = initial_move(y, &mut rng_y);
    let mut prev = Outcome::from_moves(mx, my);
    rec.push(prev);

    for k in 2..=cfg.rounds {
        let avg = if needs_avg {
            Some(match &rec.fast {
                Some(fa) => AvgView::Fast {
                    ax: fa.ax,
                    ay: fa.ay,
                    w: fa.w,
                },
                None => AvgView::Exact {
                    acc: &rec.acc,
                    w: &rec.w_scaled,
                },
            })
        } else {
            None
        };
        let mx = decide(game, x, fast_x.as_ref(), &draw_probs, k, prev, avg, false, &mut rng_x)?;
        let my = decide(game, y, fast_y.as_ref(), &draw_probs, k, prev, avg, true, &mut rng_y)?;
        prev = Outcome::from_moves(mx, my);
        rec.push(prev);
    }

    Ok(rec.finish(cfg, warnings))
}

/// The running average as seen by plan evaluation: an undivided
/// `(sum, weight)` pair either in machine integers or in the scalar type.
enum AvgView<'a, S> {
    Fast { ax: i128, ay: i128, w: i128 },
    Exact { acc: &'a Point<S>, w: &'a S },
}

impl<S> Clone for AvgView<'_, S> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<S> Copy for AvgView<'_, S> {}

/// Machine-integer compilation of the exact hot loop.
///
/// With integer weight sequences and i128-representable payoffs and plan
/// coefficients, the running-average sign tests reduce to i128 arithmetic
/// on the unreduced triple `(Σ w·Sx·d, Σ w·Sy·d, Σ w·d)`. Overflow bounds
/// are proven at compile time from the round budget; anything that does
/// not fit falls back to the generic exact path.
mod fast {
    use super::*;
    use crate::smale::OnLineRule;

    #[derive(Clone, Copy, Debug)]
    pub(super) enum FastProb {
        C,
        D,
        /// Index into the side table of exact draw probabilities.
        Draw(usize),
    }

    #[derive(Clone, Copy, Debug)]
    pub(super) enum FastRule {
        C,
        D,
        Draw(usize),
        /// Cooperate iff `ax·den >= num·w`.
        DiagSplit { num: i128, den: i128 },
    }

    #[derive(Clone, Copy, Debug)]
    pub(super) struct FastTest {
        pub a: i128,
        pub b: i128,
        pub c: i128,
        pub strict: bool,
    }

    impl FastTest {
        #[inline]
        fn holds(&self, ax: i128, ay: i128, w: i128) -> bool {
            let v = self.a * ax + self.b * ay + self.c * w;
            if self.strict {
                v > 0
            } else {
                v >= 0
            }
        }
    }

    #[derive(Clone, Debug)]
    pub(super) enum FastSmale {
        Constant(FastProb),
        Simple {
            a: i128,
            b: i128,
            c: i128,
            rule: FastRule,
        },
        Region {
            zones: Vec<Vec<FastTest>>,
            coop: FastProb,
        },
    }

    impl FastSmale {
        #[inline]
        pub(super) fn prob(&self, ax: i128, ay: i128, w: i128) -> FastProb {
            match self {
                FastSmale::Constant(p) => *p,
                FastSmale::Simple { a, b, c, rule } => {
                    let v = a * ax + b * ay + c * w;
                    if v > 0 {
                        FastProb::D
                    } else if v < 0 {
                        FastProb::C
                    } else {
                        match rule {
                            FastRule::C => FastProb::C,
                            FastRule::D => FastProb::D,
                            FastRule::Draw(i) => FastProb::Draw(*i),
                            FastRule::DiagSplit { num, den } => {
                                if ax * den >= num * w {
                                    FastProb::C
                                } else {
                                    FastProb::D
                                }
                            }
                        }
                    }
                }
                FastSmale::Region { zones, coop } => {
                    if zones
                        .iter()
                        .any(|z| z.iter().all(|t| t.holds(ax, ay, w)))
                    {
                        FastProb::D
                    } else {
                        *coop
                    }
                }
            }
        }
    }

    /// Integer accumulator state and its compile-time bounds.
    pub(super) struct FastAccum {
        pub ax: i128,
        pub ay: i128,
        pub w: i128,
        /// Scaled payoff numerators per outcome.
        pub pay: [(i128, i128); 4],
        /// Payoff denominator scale added to `w` per unit weight.
        pub pd: i128,
    }

    pub(super) struct Bounds {
        /// Max |ax|, |ay| over the run.
        pub coord: i128,
        /// Max scaled weight sum.
        pub weight: i128,
    }

    const HEADROOM: i128 = i128::MAX / 8;

    /// Build the accumulator when payoffs convert and the whole run stays
    /// within overflow headroom.
    pub(super) fn build_accum<S: Scalar>(
        game: &Game<S>,
        weights: &WeightSequence,
        rounds: u64,
    ) -> Option<(FastAccum, Bounds)> {
        if !S::EXACT {
            return None;
        }
        // Integer weight sequences here are nondecreasing, so the sum is at
        // most rounds times the last weight.
        let w_last = weights.exact_weight_i128(rounds)?;
        let w_total = w_last.checked_mul(rounds as i128)?;
        // Common denominator of the payoff coordinates.
        let mut pd: i128 = 1;
        for o in [Outcome::Cc, Outcome::Cd, Outcome::Dc, Outcome::Dd] {
            let p = game.payoff(o);
            let (_, xd) = p.x.to_ratio_i128()?;
            let (_, yd) = p.y.to_ratio_i128()?;
            pd = lcm(pd, xd)?;
            pd = lcm(pd, yd)?;
        }
        let mut pay = [(0i128, 0i128); 4];
        let mut pay_abs_max: i128 = 1;
        for (i, o) in [Outcome::Cc, Outcome::Cd, Outcome::Dc, Outcome::Dd]
            .iter()
            .enumerate()
        {
            let p = game.payoff(*o);
            let (xn, xd) = p.x.to_ratio_i128()?;
            let (yn, yd) = p.y.to_ratio_i128()?;
            let px = xn.checked_mul(pd / xd)?;
            let py = yn.checked_mul(pd / yd)?;
            pay[i] = (px, py);
            pay_abs_max = pay_abs_max.max(px.abs()).max(py.abs());
        }
        let coord = w_total.checked_mul(pay_abs_max)?;
        let weight = w_total.checked_mul(pd)?;
        if coord > HEADROOM || weight > HEADROOM {
            return None;
        }
        Some((
            FastAccum {
                ax: 0,
                ay: 0,
                w: 0,
                pay,
                pd,
            },
            Bounds { coord, weight },
        ))
    }

    fn lcm(a: i128, b: i128) -> Option<i128> {
        let b = b.abs();
        let g = gcd(a, b);
        (a / g).checked_mul(b)
    }

    fn gcd(mut a: i128, mut b: i128) -> i128 {
        while b != 0 {
            let t = a % b;
            a = b;
            b = t;
        }
        a.max(1)
    }

    /// Compile a plan against the accumulator bounds. Probabilities strictly
    /// between 0 and 1 go to the side table for exact draws.
    pub(super) fn compile_plan<S: Scalar>(
        plan: &SmalePlan<S>,
        game: &Game<S>,
        bounds: &Bounds,
        probs: &mut Vec<S>,
    ) -> Option<FastSmale> {
        let fits3 = |a: i128, b: i128, c: i128| -> bool {
            let term = |coef: i128, bound: i128| coef.abs().checked_mul(bound);
            matches!(
                (term(a, bounds.coord), term(b, bounds.coord), term(c, bounds.weight)),
                (Some(ta), Some(tb), Some(tc))
                    if ta.checked_add(tb).and_then(|s| s.checked_add(tc)).is_some()
                        && ta < i128::MAX / 4 && tb < i128::MAX / 4 && tc < i128::MAX / 4
            )
        };
        let to_prob = |p: &S, probs: &mut Vec<S>| -> FastProb {
            if p == &S::one() {
                FastProb::C
            } else if p.is_zero() {
                FastProb::D
            } else {
                probs.push(p.clone());
                FastProb::Draw(probs.len() - 1)
            }
        };
        let integer_triple = |m: &crate::geom::AffineMap<S>| -> Option<(i128, i128, i128)> {
            let (an, ad) = m.a.to_ratio_i128()?;
            let (bn, bd) = m.b.to_ratio_i128()?;
            let (cn, cd) = m.c.to_ratio_i128()?;
            let d = lcm(lcm(ad, bd)?, cd)?;
            Some((
                an.checked_mul(d / ad)?,
                bn.checked_mul(d / bd)?,
                cn.checked_mul(d / cd)?,
            ))
        };
        let compile_rule = |r: &OnLineRule<S>, probs: &mut Vec<S>| -> Option<FastRule> {
            Some(match r {
                OnLineRule::AlwaysC => FastRule::C,
                OnLineRule::AlwaysD => FastRule::D,
                OnLineRule::Prob(p) => match to_prob(p, probs) {
                    FastProb::C => FastRule::C,
                    FastProb::D => FastRule::D,
                    FastProb::Draw(i) => FastRule::Draw(i),
                },
                OnLineRule::DiagonalSplit => {
                    let mid = (game.t().clone() + game.s().clone()).half();
                    let (num, den) = mid.to_ratio_i128()?;
                    // Compare ax/w >= num/den, i.e. ax·den >= num·w.
                    den.checked_mul(bounds.coord)?;
                    num.checked_mul(bounds.weight)?;
                    FastRule::DiagSplit { num, den }
                }
            })
        };
        match plan {
            SmalePlan::Constant { prob } => Some(FastSmale::Constant(to_prob(prob, probs))),
            SmalePlan::Simple { map, on_line, .. } => {
                let (a, b, c) = integer_triple(map)?;
                if !fits3(a, b, c) {
                    return None;
                }
                let rule = compile_rule(on_line, probs)?;
                Some(FastSmale::Simple { a, b, c, rule })
            }
            SmalePlan::Region { defect_zones, coop } => {
                let mut zones = Vec::with_capacity(defect_zones.len());
                for z in defect_zones {
                    let mut tests = Vec::with_capacity(z.tests.len());
                    for t in &z.tests {
                        let (a, b, c) = integer_triple(&t.map)?;
                        if !fits3(a, b, c) {
                            return None;
                        }
                        tests.push(FastTest {
                            a,
                            b,
                            c,
                            strict: t.strict,
                        });
                    }
                    zones.push(tests);
                }
                Some(FastSmale::Region {
                    zones,
                    coop: to_prob(coop, probs),
                })
            }
            SmalePlan::Path { .. } => None,
        }
    }
}

/// Weighted accumulation of stage payoffs. The exact sums are kept scaled
/// so every entry is integer-valued in rational mode (the common positive
/// factor cancels out of all plan sign tests and of the final division),
/// alongside a float mirror used for recording and the step law.
struct Recorder<'g, S: Scalar> {
    game: &'g Game<S>,
    weights: WeightSequence,
    /// Payoffs premultiplied by the integerizing scale.
    pay_scaled: [Point<S>; 4],
    /// That scale itself (1 in float mode).
    pscale: S,
    /// Machine-integer accumulator, when the run fits; the generic scalar
    /// accumulator stays untouched while this is live.
    fast: Option<fast::FastAccum>,
    acc: Point<S>,
    /// Σ w_k, times the payoff scale.
    w_scaled: S,
    fx: f64,
    fy: f64,
    fw: f64,
    diam: f64,
    max_step_ratio: f64,
    outcomes: Vec<Outcome>,
    averages: Vec<(f64, f64)>,
}

impl<'g, S: Scalar> Recorder<'g, S> {
    fn new(game: &'g Game<S>, cfg: &MatchConfig, fast: Option<fast::FastAccum>) -> Self {
        let pays = [
            game.payoff(Outcome::Cc),
            game.payoff(Outcome::Cd),
            game.payoff(Outcome::Dc),
            game.payoff(Outcome::Dd),
        ];
        let coords: Vec<&S> = pays.iter().flat_map(|p| [&p.x, &p.y]).collect();
        let pscale = S::integer_scale_of(&coords);
        let pay_scaled = pays
            .clone()
            .map(|p| Point::new(p.x * pscale.clone(), p.y * pscale.clone()));
        let rounds = cfg.rounds as usize;
        Recorder {
            game,
            weights: cfg.weights.clone(),
            pay_scaled,
            pscale,
            fast,
            acc: Point::new(S::zero(), S::zero()),
            w_scaled: S::zero(),
            fx: 0.0,
            fy: 0.0,
            fw: 0.0,
            diam: game.diameter_f64(),
            max_step_ratio: 0.0,
            outcomes: Vec::with_capacity(rounds),
            averages: Vec::with_capacity(rounds),
        }
    }

    fn push(&mut self, outcome: Outcome) {
        let n = self.outcomes.len() as u64 + 1;
        if let Some(fa) = self.fast.as_mut() {
            let w = self
                .weights
                .exact_weight_i128(n)
                .expect("fast accumulation requires integer weights");
            let (px, py) = fa.pay[outcome.index()];
            fa.ax += w * px;
            fa.ay += w * py;
            fa.w += w * fa.pd;
        } else {
            let w = weight_scalar::<S>(&self.weights, n);
            let pay = &self.pay_scaled[outcome.index()];
            self.acc.x = self.acc.x.clone() + w.clone() * pay.x.clone();
            self.acc.y = self.acc.y.clone() + w.clone() * pay.y.clone();
            self.w_scaled = self.w_scaled.clone() + w * self.pscale.clone();
        }

        let wf = self.weights.weight_f64(n);
        let (px, py) = self.game.payoff(outcome).to_f64();
        let new_fw = self.fw + wf;
        let new_fx = self.fx + (wf / new_fw) * (px - self.fx);
        let new_fy = self.fy + (wf / new_fw) * (py - self.fy);
        if n > 1 {
            let step = ((new_fx - self.fx).powi(2) + (new_fy - self.fy).powi(2)).sqrt();
            let bound = (wf / new_fw) * self.diam;
            if bound > 0.0 {
                self.max_step_ratio = self.max_step_ratio.max(step / bound);
            }
        }
        self.fx = new_fx;
        self.fy = new_fy;
        self.fw = new_fw;
        self.outcomes.push(outcome);
        self.averages.push((self.fx, self.fy));
    }

    fn finish(self, cfg: &MatchConfig, warnings: Vec<String>) -> Trajectory<S> {
        let final_average = match &self.fast {
            Some(fa) => Point::new(
                S::from_i128(fa.ax) / S::from_i128(fa.w),
                S::from_i128(fa.ay) / S::from_i128(fa.w),
            ),
            None => Point::new(
                self.acc.x / self.w_scaled.clone(),
                self.acc.y / self.w_scaled,
            ),
        };
        Trajectory {
            outcomes: self.outcomes,
            averages: self.averages,
            final_average,
            seed: cfg.seed,
            weights: cfg.weights.clone(),
            max_step_ratio: self.max_step_ratio,
            warnings,
        }
    }
}

fn initial_move<S: Scalar>(s: &Strategy<S>, rng: &mut ChaCha8Rng) -> Move {
    match &s.initial {
        InitialPlay::Move(m) => *m,
        InitialPlay::Mixed(p) => draw(p, rng),
    }
}

/// Decide round `k` (k >= 2). `prev` is the outcome in X labels; `avg` the
/// running average in X coordinates as an undivided `(sum, weight)` pair.
#[allow(clippy::too_many_arguments)]
fn decide<S: Scalar>(
    game: &Game<S>,
    s: &Strategy<S>,
    compiled: Option<&fast::FastSmale>,
    draw_probs: &[S],
    k: u64,
    prev: Outcome,
    avg: Option<AvgView<'_, S>>,
    switched_seat: bool,
    rng: &mut ChaCha8Rng,
) -> Result<Move, SimError> {
    // The plan responds to the history of length k−1 once that length
    // reaches the adoption round.
    if k - 1 < s.adoption_round {
        return Ok(prefix_move(s, k, rng));
    }
    match &s.plan {
        // Round k plays the script's (k−1)-th move, so a strategy whose
        // initial play is the script's head runs the list in order.
        Plan::Scripted(moves) => Ok(moves[((k - 1) as usize) % moves.len()]),
        Plan::Markov(plan) => {
            let own_prev = if switched_seat { prev.switch() } else { prev };
            Ok(to_move(plan.response(own_prev), rng))
        }
        Plan::Smale(plan) => {
            let avg = avg.expect("engine accumulates sums for Smale plans");
            // The switched seat sees the coordinates swapped; running
            // averages are convex combinations of payoffs, so no
            // hull-membership check is needed.
            match (avg, compiled) {
                (AvgView::Fast { ax, ay, w }, Some(fast_plan)) => {
                    let (own_x, own_y) = if switched_seat { (ay, ax) } else { (ax, ay) };
                    Ok(match fast_plan.prob(own_x, own_y, w) {
                        fast::FastProb::C => Move::C,
                        fast::FastProb::D => Move::D,
                        fast::FastProb::Draw(i) => draw(&draw_probs[i], rng),
                    })
                }
                (AvgView::Fast { ax, ay, w }, None) => {
                    let (sx, sy, sw) = (S::from_i128(ax), S::from_i128(ay), S::from_i128(w));
                    let p = if switched_seat {
                        plan.prob_homogeneous(game, &sy, &sx, &sw)
                    } else {
                        plan.prob_homogeneous(game, &sx, &sy, &sw)
                    };
                    Ok(to_move(&p, rng))
                }
                (AvgView::Exact { acc, w }, _) => {
                    let p = if switched_seat {
                        plan.prob_homogeneous(game, &acc.y, &acc.x, w)
                    } else {
                        plan.prob_homogeneous(game, &acc.x, &acc.y, w)
                    };
                    Ok(to_move(&p, rng))
                }
            }
        }
    }
}

fn prefix_move<S: Scalar>(s: &Strategy<S>, k: u64, rng: &mut ChaCha8Rng) -> Move {
    if s.prefix.is_empty() {
        return initial_move(s, rng);
    }
    s.prefix[((k - 2) as usize) % s.prefix.len()]
}

fn to_move<S: Scalar>(p: &S, rng: &mut ChaCha8Rng) -> Move {
    if p == &S::one() {
        Move::C
    } else if p.is_zero() {
        Move::D
    } else {
        draw(p, rng)
    }
}

/// Uniform draws are dyadic floats, so the comparison against a rational
/// probability is exact.
fn draw<S: Scalar>(p: &S, rng: &mut ChaCha8Rng) -> Move {
    let u: f64 = rng.random();
    if S::from_f64_exact(u).cmp_total(p) == std::cmp::Ordering::Less {
        Move::C
    } else {
        Move::D
    }
}

/// Deterministic pseudo-random move scripts for adversary suites.
pub fn scripted_moves_from_seed(seed: u64, len: usize) -> Vec<Move> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(3);
    (0..len)
        .map(|_| if rng.random::<bool>() { Move::C } else { Move::D })
        .collect()
}

/// Normalized separation-bound check: with `L` normalized to max 1 on the
/// hull and the plan adopted by round `n_star`, the running averages obey
/// `|L(s^N)| <= B_N / W_N` where `B_N = max(W_{n*}, w_{n*+1}, …, w_N)`
/// (two-sided for simple plans, upper bound otherwise). For uniform
/// weights `B_N = n*`, giving the familiar `n*/N` decay; the extra weight
/// term is what the induction's cooperate case actually needs once
/// weights grow, and it still vanishes under weight conditions 1 and 2.
#[derive(Clone, Debug)]
pub struct BoundReport {
    /// Max over rounds `N >= n_star` of `L(s^N)·W_N / B_N` (absolute
    /// value in two-sided mode).
    pub max_ratio: f64,
    pub n_star: u64,
    pub two_sided: bool,
}

impl BoundReport {
    pub fn holds(&self, slack: f64) -> bool {
        self.max_ratio <= 1.0 + slack
    }
}

/// Exact every-round verification of the two-sided separation bound for a
/// trajectory with integer weights: `|L(s^N)| <= B_N / W_N` checked in
/// machine-integer arithmetic, with `L` the line's normalized associate.
/// `switched` evaluates at the coordinate-swapped average (the bound for
/// the Y seat's line). Returns `None` when the payoffs, weights, or line
/// coefficients do not fit the integer representation.
pub fn verify_bound_exact<S: Scalar>(
    traj: &Trajectory<S>,
    game: &Game<S>,
    line: &crate::game::SepLine<S>,
    n_star: u64,
    switched: bool,
) -> Option<BoundExactReport> {
    let (mut accum, bounds) = fast::build_accum(game, &traj.weights, traj.rounds())?;
    let map = line.affine(game);
    let (an, ad) = map.a.to_ratio_i128()?;
    let (bn, bd) = map.b.to_ratio_i128()?;
    let (cn, cd) = map.c.to_ratio_i128()?;
    let scale = lcm_i128(lcm_i128(ad, bd)?, cd)?;
    let a = an.checked_mul(scale / ad)?;
    let b = bn.checked_mul(scale / bd)?;
    let c = cn.checked_mul(scale / cd)?;
    // Overflow headroom for the evaluation and the bound comparison.
    a.abs().checked_mul(bounds.coord)?;
    b.abs().checked_mul(bounds.coord)?;
    c.abs().checked_mul(bounds.weight)?;
    scale.checked_mul(bounds.weight)?;

    let mut w_units: i128 = 0;
    let mut numerator: i128 = 0; // max(W_{n*}, w_k for n* < k <= N)
    let mut first_violation = None;
    for (i, o) in traj.outcomes.iter().enumerate() {
        let n = i as u64 + 1;
        let w = traj.weights.exact_weight_i128(n)?;
        let (px, py) = accum.pay[o.index()];
        accum.ax += w * px;
        accum.ay += w * py;
        accum.w += w * accum.pd;
        w_units += w;
        if n == n_star {
            numerator = w_units;
        }
        if n > n_star {
            numerator = numerator.max(w);
        }
        if n >= n_star {
            let (x, y) = if switched {
                (accum.ay, accum.ax)
            } else {
                (accum.ax, accum.ay)
            };
            // |L(s^N)| <= numerator/W_N  <=>  |L̂_hom| <= scale·numerator·pd.
            let v = (a * x + b * y + c * accum.w).abs();
            if v > scale * numerator * accum.pd && first_violation.is_none() {
                first_violation = Some(n);
            }
        }
    }
    Some(BoundExactReport {
        holds: first_violation.is_none(),
        first_violation,
    })
}

#[derive(Clone, Debug)]
pub struct BoundExactReport {
    pub holds: bool,
    pub first_violation: Option<u64>,
}

fn lcm_i128(a: i128, b: i128) -> Option<i128> {
    let a = a.abs().max(1);
    let b = b.abs().max(1);
    let (mut x, mut y) = (a, b);
    while y != 0 {
        let t = x % y;
        x = y;
        y = t;
    }
    (a / x).checked_mul(b)
}

pub fn check_separation_bound<S: Scalar>(
    traj: &Trajectory<S>,
    l_normalized: &dyn Fn(f64, f64) -> f64,
    n_star: u64,
    two_sided: bool,
) -> BoundReport {
    let mut w_cum = 0.0f64;
    let mut numerator = 0.0f64;
    let mut max_ratio = f64::NEG_INFINITY;
    for (i, (sx, sy)) in traj.averages.iter().enumerate() {
        let n = i as u64 + 1;
        let w = traj.weights.weight_f64(n);
        w_cum += w;
        if n == n_star {
            numerator = w_cum;
        }
        if n > n_star {
            numerator = numerator.max(w);
        }
        if n >= n_star {
            let v = l_normalized(*sx, *sy);
            let v = if two_sided { v.abs() } else { v };
            max_ratio = max_ratio.max(v * w_cum / numerator);
        }
    }
    BoundReport {
        max_ratio,
        n_star,
        two_sided,
    }
}

/// Tail-cloud estimate of the limit point set.
#[derive(Clone, Debug)]
pub struct LimitSetEstimate {
    pub points: Vec<(f64, f64)>,
    pub radius: f64,
    pub connected: bool,
    pub final_step: f64,
    pub diameter: f64,
    pub summary: LimitSummary,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LimitSummary {
    Singleton((f64, f64)),
    Spread { diameter: f64 },
}

/// Estimate the limit set from the trajectory tail (default: last half),
/// thinned to at most `max_points`, with epsilon-connectivity verified at
/// three times the largest consecutive gap. Declares a singleton when the
/// cloud diameter is below [`SINGLETON_STEP_FACTOR`] final steps.
pub fn estimate_limit_set<S: Scalar>(
    traj: &Trajectory<S>,
    tail_fraction: f64,
    max_points: usize,
) -> LimitSetEstimate {
    estimate_limit_set_with(traj, tail_fraction, max_points, SINGLETON_STEP_FACTOR)
}

/// Cloud diameters below this many final steps count as convergence to a
/// point.
pub const SINGLETON_STEP_FACTOR: f64 = 10.0;

pub fn estimate_limit_set_with<S: Scalar>(
    traj: &Trajectory<S>,
    tail_fraction: f64,
    max_points: usize,
    singleton_factor: f64,
) -> LimitSetEstimate {
    let tail = traj.tail(tail_fraction);
    let stride = (tail.len() / max_points.max(2)).max(1);
    let points: Vec<(f64, f64)> = tail.iter().copied().step_by(stride).collect();

    let max_gap = points
        .windows(2)
        .map(|w| dist(w[0], w[1]))
        .fold(0.0f64, f64::max);
    let n = traj.averages.len();
    let final_step = if n >= 2 {
        dist(traj.averages[n - 1], traj.averages[n - 2])
    } else {
        0.0
    };
    let radius = (3.0 * max_gap).max(1e-12);

    let connected = eps_connected(&points, radius);
    let diameter = cloud_diameter(&points);
    let summary = if diameter < singleton_factor * final_step.max(1e-300) {
        let cx = points.iter().map(|p| p.0).sum::<f64>() / points.len() as f64;
        let cy = points.iter().map(|p| p.1).sum::<f64>() / points.len() as f64;
        LimitSummary::Singleton((cx, cy))
    } else {
        LimitSummary::Spread { diameter }
    };
    LimitSetEstimate {
        points,
        radius,
        connected,
        final_step,
        diameter,
        summary,
    }
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

fn cloud_diameter(points: &[(f64, f64)]) -> f64 {
    let mut d = 0.0f64;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            d = d.max(dist(*p, *q));
        }
    }
    d
}

/// Breadth-first connectivity of the cloud at the given radius.
fn eps_connected(points: &[(f64, f64)], radius: f64) -> bool {
    if points.len() <= 1 {
        return true;
    }
    let mut seen = vec![false; points.len()];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(i) = stack.pop() {
        for j in 0..points.len() {
            if !seen[j] && dist(points[i], points[j]) <= radius {
                seen[j] = true;
                count += 1;
                stack.push(j);
            }
        }
    }
    count == points.len()
}

/// Containment of the tail cloud in a region described by a distance
/// function; tolerance defaults to five final steps.
#[derive(Clone, Debug)]
pub struct ContainmentReport {
    pub contained: bool,
    pub worst_distance: f64,
    pub tolerance: f64,
}

pub fn verify_containment(
    est: &LimitSetEstimate,
    dist_to_region: impl Fn((f64, f64)) -> f64,
    tolerance: Option<f64>,
) -> ContainmentReport {
    let tolerance = tolerance.unwrap_or(5.0 * est.final_step);
    let worst_distance = est
        .points
        .iter()
        .map(|p| dist_to_region(*p))
        .fold(0.0f64, f64::max);
    ContainmentReport {
        contained: worst_distance <= tolerance,
        worst_distance,
        tolerance,
    }
}

/// Distance from a point to a closed polygonal boundary.
pub fn dist_to_closed_polyline(p: (f64, f64), verts: &[(f64, f64)]) -> f64 {
    let n = verts.len();
    (0..n)
        .map(|i| crate::geom::segment_dist_f64(verts[i], verts[(i + 1) % n], p))
        .fold(f64::INFINITY, f64::min)
}

/// Symmetric Hausdorff distance between a point cloud and a closed
/// polygonal boundary (the boundary side is sampled at `boundary_samples`
/// points).
pub fn hausdorff_to_closed_polyline(
    cloud: &[(f64, f64)],
    verts: &[(f64, f64)],
    boundary_samples: usize,
) -> f64 {
    let d_cloud = cloud
        .iter()
        .map(|p| dist_to_closed_polyline(*p, verts))
        .fold(0.0f64, f64::max);

    let n = verts.len();
    let total: f64 = (0..n)
        .map(|i| dist(verts[i], verts[(i + 1) % n]))
        .sum();
    let step = total / boundary_samples as f64;
    let mut d_boundary = 0.0f64;
    let mut walked = 0.0;
    let mut next_at = 0.0;
    for i in 0..n {
        let a = verts[i];
        let b = verts[(i + 1) % n];
        let len = dist(a, b);
        while next_at <= walked + len {
            let t = if len == 0.0 { 0.0 } else { (next_at - walked) / len };
            let q = (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1));
            let nearest = cloud
                .iter()
                .map(|p| dist(*p, q))
                .fold(f64::INFINITY, f64::min);
            d_boundary = d_boundary.max(nearest);
            next_at += step;
        }
        walked += len;
    }
    d_cloud.max(d_boundary)
}
