//! Averaging weight sequences and their asymptotic conditions.
//!
//! A positive sequence `w_n` (normalized so `w_1 = 1`) replaces the uniform
//! running average. Three conditions matter:
//!
//! 1. `w_N / W_N -> 0`
//! 2. `W_N -> infinity`
//! 3. `Δ_N / W_N -> 0` where `Δ_N = Σ |w_{k+1} − w_k|`
//!
//! Condition 3 implies 1 and 2, and for monotone sequences 1 and 2 imply 3
//! (the sum defining `Δ_N` telescopes). The separation-bound machinery needs
//! 1 and 2; carrying stationary-distribution averages over needs 3.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSequence {
    /// `w_n = 1`.
    Uniform,
    /// `w_n = n`.
    Linear,
    /// `w_n = n^k`.
    Power { k: u32 },
    /// `w_n = ratio^(n-1)`.
    Geometric { ratio: f64 },
    /// `w_n = 1/n`.
    Harmonic,
    /// Repeating positive pattern, e.g. `[1, 2]` for 1, 2, 1, 2, …
    Cycle { pattern: Vec<f64> },
}

impl WeightSequence {
    pub fn weight_f64(&self, n: u64) -> f64 {
        match self {
            WeightSequence::Uniform => 1.0,
            WeightSequence::Linear => n as f64,
            WeightSequence::Power { k } => (n as f64).powi(*k as i32),
            WeightSequence::Geometric { ratio } => ratio.powi((n - 1) as i32),
            WeightSequence::Harmonic => 1.0 / n as f64,
            WeightSequence::Cycle { pattern } => pattern[((n - 1) as usize) % pattern.len()],
        }
    }

    /// Exact integer weight, when the sequence has one that fits. This is
    /// what allows exact rational running averages.
    pub fn exact_weight_i128(&self, n: u64) -> Option<i128> {
        match self {
            WeightSequence::Uniform => Some(1),
            WeightSequence::Linear => Some(n as i128),
            WeightSequence::Power { k } => (n as i128).checked_pow(*k),
            WeightSequence::Geometric { .. } | WeightSequence::Harmonic => None,
            WeightSequence::Cycle { pattern } => {
                let ints: Option<Vec<i128>> = pattern
                    .iter()
                    .map(|w| (w.fract() == 0.0 && *w > 0.0).then_some(*w as i128))
                    .collect();
                ints.map(|v| v[((n - 1) as usize) % v.len()])
            }
        }
    }

    /// Known monotonicity: `Some(true)` = non-decreasing, `Some(false)` =
    /// non-increasing.
    pub fn monotonicity(&self) -> Option<bool> {
        match self {
            WeightSequence::Uniform | WeightSequence::Linear | WeightSequence::Power { .. } => {
                Some(true)
            }
            WeightSequence::Geometric { ratio } => Some(*ratio >= 1.0),
            WeightSequence::Harmonic => Some(false),
            WeightSequence::Cycle { pattern } => {
                if pattern.windows(2).all(|w| w[0] == w[1]) {
                    Some(true)
                } else {
                    None
                }
            }
        }
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self, WeightSequence::Uniform)
    }
}

/// Numeric verdicts on the three weight conditions over a finite horizon.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeightReport {
    pub c1: bool,
    pub c2: bool,
    pub c3: bool,
    pub horizon: u64,
    /// `w_N / W_N` at the horizon.
    pub tail_ratio: f64,
    /// `W` at the half horizon and at the horizon.
    pub w_half: f64,
    pub w_full: f64,
    /// `Δ_N / W_N` at the horizon.
    pub tail_delta_ratio: f64,
}

/// Trend thresholds; asymptotic conditions are decided from finite traces,
/// so these are resolution parameters, not mathematical constants.
pub const C1_TAIL_THRESHOLD: f64 = 0.02;
pub const C2_GROWTH_THRESHOLD: f64 = 0.1;
pub const C3_TAIL_THRESHOLD: f64 = 0.02;

/// Decide the three conditions from traces up to `horizon` (>= 1000 for the
/// verdicts to mean much). Monotone sequences route condition 3 through the
/// telescoped form.
pub fn weight_conditions(w: &WeightSequence, horizon: u64) -> WeightReport {
    assert!(horizon >= 2);
    let mut w_sum = 0.0f64;
    let mut w_half = 0.0f64;
    let mut delta = 0.0f64;
    let mut prev = 0.0f64;
    let mut ratio_mid = 0.0f64;
    for n in 1..=horizon {
        let wn = w.weight_f64(n);
        if n > 1 {
            delta += (wn - prev).abs();
        }
        w_sum += wn;
        if n == horizon / 2 {
            w_half = w_sum;
            ratio_mid = wn / w_sum;
        }
        prev = wn;
    }
    let tail_ratio = prev / w_sum;
    let tail_delta_ratio = delta / w_sum;
    let c1 = tail_ratio < C1_TAIL_THRESHOLD && tail_ratio <= ratio_mid * 1.5 + 1e-12;
    let c2 = (w_sum - w_half) > C2_GROWTH_THRESHOLD * w.weight_f64(1);
    let c3 = match w.monotonicity() {
        Some(_) => c1 && c2,
        None => tail_delta_ratio < C3_TAIL_THRESHOLD,
    };
    WeightReport {
        c1,
        c2,
        c3,
        horizon,
        tail_ratio,
        w_half,
        w_full: w_sum,
        tail_delta_ratio,
    }
}
