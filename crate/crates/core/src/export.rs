//! CSV and JSON emission for trajectories, limit sets, orbits, and payoff
//! matrices.

use std::io::{self, Write};

use serde_json::json;

use crate::evo::{Orbit, PayoffMatrix};
use crate::game::Game;
use crate::scalar::Scalar;
use crate::sim::{LimitSetEstimate, Trajectory};

/// Columns: `round,outcome,SX,SY,sX,sY`. In exact mode the stage payoffs
/// and running averages are written as `num/den` strings, recomputed by
/// direct weighted summation.
pub fn write_trajectory_csv<S: Scalar, W: Write>(
    out: &mut W,
    game: &Game<S>,
    traj: &Trajectory<S>,
) -> io::Result<()> {
    writeln!(out, "round,outcome,SX,SY,sX,sY")?;
    if S::EXACT {
        let mut acc_x = S::zero();
        let mut acc_y = S::zero();
        let mut w_sum = S::zero();
        for (i, o) in traj.outcomes.iter().enumerate() {
            let n = i as u64 + 1;
            let w = match traj.weights.exact_weight_i128(n) {
                Some(v) => S::from_i128(v),
                None => S::from_f64_exact(traj.weights.weight_f64(n)),
            };
            let pay = game.payoff(*o);
            acc_x = acc_x + w.clone() * pay.x.clone();
            acc_y = acc_y + w.clone() * pay.y.clone();
            w_sum = w_sum + w;
            let sx = acc_x.clone() / w_sum.clone();
            let sy = acc_y.clone() / w_sum.clone();
            writeln!(
                out,
                "{},{},{},{},{},{}",
                n,
                o.label(),
                pay.x.fmt_exact(),
                pay.y.fmt_exact(),
                sx.fmt_exact(),
                sy.fmt_exact()
            )?;
        }
    } else {
        for (i, o) in traj.outcomes.iter().enumerate() {
            let pay = game.payoff(*o);
            let (sx, sy) = traj.averages[i];
            writeln!(
                out,
                "{},{},{},{},{},{}",
                i + 1,
                o.label(),
                pay.x.fmt_exact(),
                pay.y.fmt_exact(),
                sx,
                sy
            )?;
        }
    }
    Ok(())
}

pub fn limit_estimate_json(est: &LimitSetEstimate) -> serde_json::Value {
    json!({
        "points": est.points.iter().map(|p| vec![p.0, p.1]).collect::<Vec<_>>(),
        "radius": est.radius,
        "connected": est.connected,
        "final_step": est.final_step,
        "diameter": est.diameter,
        "summary": match est.summary {
            crate::sim::LimitSummary::Singleton((x, y)) =>
                json!({"kind": "singleton", "point": [x, y]}),
            crate::sim::LimitSummary::Spread { diameter } =>
                json!({"kind": "spread", "diameter": diameter}),
        },
    })
}

/// Columns: `t,xi_1,…,xi_n`.
pub fn write_orbit_csv<W: Write>(out: &mut W, orbit: &Orbit) -> io::Result<()> {
    let n = orbit.final_state.len();
    let header: Vec<String> = (1..=n).map(|i| format!("xi_{i}")).collect();
    writeln!(out, "t,{}", header.join(","))?;
    for (t, xi) in &orbit.samples {
        let row: Vec<String> = xi.iter().map(|v| format!("{v}")).collect();
        writeln!(out, "{},{}", t, row.join(","))?;
    }
    Ok(())
}

pub fn payoff_matrix_json<S: Scalar>(matrix: &PayoffMatrix<S>) -> serde_json::Value {
    json!({
        "entries": matrix.float,
        "exact": matrix
            .entries
            .iter()
            .map(|row| row.iter().map(|v| v.fmt_exact()).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    })
}
