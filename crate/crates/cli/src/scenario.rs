//! Versioned JSON scenario documents.
//!
//! Numbers may be written as JSON integers (exact in both modes), as
//! `"a/b"` ratio strings, or as decimal strings like `"0.3"` (parsed
//! exactly). Bare JSON floats are accepted but rejected in rational mode
//! unless they are integral, so exactness is never silent guesswork.

use serde::Deserialize;

use dilemma_core::scalar::{parse_scalar, Scalar};
use dilemma_core::weights::WeightSequence;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub version: u32,
    pub game: GameSpec,
    #[serde(default)]
    pub mode: Mode,
    pub job: JobSpec,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Rational,
    Float,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSpec {
    pub t: NumLit,
    pub r: NumLit,
    pub p: NumLit,
    pub s: NumLit,
}

/// A numeric literal: integer, float, or exact string form.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum NumLit {
    Int(i64),
    Float(f64),
    Text(String),
}

impl NumLit {
    pub fn to_scalar<S: Scalar>(&self) -> Result<S, String> {
        match self {
            NumLit::Int(v) => Ok(S::from_int(*v)),
            NumLit::Float(v) => {
                if S::EXACT && v.fract() != 0.0 {
                    Err(format!(
                        "non-integral bare number {v} in rational mode; write it as a string like \"1/2\" or \"0.5\""
                    ))
                } else {
                    Ok(S::from_f64_exact(*v))
                }
            }
            NumLit::Text(t) => parse_scalar(t),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum JobSpec {
    Match {
        x: StrategySpec,
        y: StrategySpec,
        rounds: u64,
        seed: u64,
        #[serde(default)]
        weights: Option<WeightSequence>,
        #[serde(default)]
        checks: Vec<CheckSpec>,
    },
    Classify {
        plan: PlanSpec,
    },
    Folk {
        target: [NumLit; 2],
        #[serde(default = "default_rounds")]
        rounds: u64,
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_tol")]
        tolerance: f64,
        /// Also run the unilateral-deviation clause against the built-in
        /// adversary suite.
        #[serde(default)]
        check_deviations: bool,
    },
    Evo {
        roster: Vec<PlanSpec>,
        #[serde(default)]
        resident: usize,
        starts: StartsSpec,
        #[serde(default = "default_t_max")]
        t_max: f64,
        #[serde(default = "default_step")]
        step: f64,
        /// Require fixation at the resident on every start.
        #[serde(default)]
        expect_fixation: bool,
    },
    ValidatePath {
        path: PathSpec,
        #[serde(default)]
        strict: bool,
        #[serde(default = "default_samples")]
        samples: usize,
    },
    Sweep {
        x: StrategySpec,
        y: StrategySpec,
        rounds: u64,
        seeds: SeedRange,
        check: SweepCheck,
        /// Fraction of seeds that must pass (1.0 = all).
        #[serde(default = "default_fraction")]
        require_fraction: f64,
    },
}

fn default_rounds() -> u64 {
    100_000
}
fn default_tol() -> f64 {
    0.01
}
fn default_t_max() -> f64 {
    1e4
}
fn default_step() -> f64 {
    0.01
}
fn default_samples() -> usize {
    200
}
fn default_fraction() -> f64 {
    1.0
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedRange {
    pub start: u64,
    pub end: u64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategySpec {
    #[serde(default)]
    pub initial: InitialSpec,
    /// Round count from which the plan governs (prefix before that).
    #[serde(default)]
    pub adoption_round: Option<u64>,
    /// Move string like "ccdc" for the pre-adoption rounds.
    #[serde(default)]
    pub prefix: Option<String>,
    pub plan: PlanSpec,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialSpec {
    #[default]
    C,
    D,
    #[serde(untagged)]
    Mixed {
        prob: NumLit,
    },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlanSpec {
    Markov {
        p: [NumLit; 4],
    },
    Tft,
    AllC,
    AllD,
    Constant {
        prob: NumLit,
    },
    Equalizer {
        e: NumLit,
        #[serde(default)]
        on_line: OnLineSpec,
    },
    GoodSimple {
        slope: NumLit,
        #[serde(default)]
        on_line: OnLineSpec,
    },
    Extortionate {
        slope: NumLit,
        #[serde(default = "OnLineSpec::defect")]
        on_line: OnLineSpec,
    },
    SmaleTft,
    Simple {
        anchor: [NumLit; 2],
        slope: NumLit,
        #[serde(default)]
        on_line: OnLineSpec,
    },
    GenerousRegion {
        slope: NumLit,
        #[serde(default)]
        v_x: Option<NumLit>,
    },
    ConvexGenerous {
        vertices: Vec<[NumLit; 2]>,
    },
    PathPeak {
        peak: [NumLit; 2],
        #[serde(default)]
        on_line: OnLineSpec,
    },
    Scripted {
        moves: String,
    },
    RandomMoves {
        seed: u64,
        len: usize,
    },
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OnLineSpec {
    #[default]
    Cooperate,
    Defect,
    DiagonalSplit,
    #[serde(untagged)]
    Prob {
        prob: NumLit,
    },
}

impl OnLineSpec {
    fn defect() -> Self {
        OnLineSpec::Defect
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PathSpec {
    Peak { point: [NumLit; 2] },
    Ode { start: [NumLit; 2], steps: u32 },
    Explicit { vertices: Vec<[NumLit; 2]> },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckSpec {
    /// Final average within `tol` of `point`.
    LimitNear { point: [NumLit; 2], tol: f64 },
    /// Opponent coordinate of the final average within `tol` of `value`.
    OpponentPayoffNear { value: NumLit, tol: f64 },
    /// Two-sided separation bound for the given seat's simple plan
    /// (exact in rational mode, ratio slack in float mode).
    SeparationBound {
        seat: Seat,
        #[serde(default = "default_slack")]
        slack: f64,
    },
    /// Step-size law: max observed ratio at most `1 + slack`.
    StepLaw {
        #[serde(default = "default_slack")]
        slack: f64,
    },
    /// The tail limit-set estimate is epsilon-connected.
    Connected,
}

fn default_slack() -> f64 {
    1e-9
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Seat {
    X,
    Y,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepCheck {
    /// Outcome constant at cc from some round at or before `by_round`.
    AbsorbedCc { by_round: u64 },
    /// Final average within `tol` of `point`.
    LimitNear { point: [NumLit; 2], tol: f64 },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StartsSpec {
    Explicit { states: Vec<Vec<f64>> },
    Random { count: usize, seed: u64 },
}
