//! Scenario execution: build the domain objects, run the job, write the
//! artifacts, and assemble the machine-readable report.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde_json::json;

use dilemma_core::evo::{
    build_payoff_matrix, check_theorem_hypotheses, integrate, OrbitConfig, Roster,
};
use dilemma_core::export;
use dilemma_core::folk::folk_pair;
use dilemma_core::game::Game;
use dilemma_core::geom::{Move, Outcome, Point};
use dilemma_core::markov::{classify_markov, MarkovPlan};
use dilemma_core::path::{path_from_ode, path_from_peak, validate_path, SeparationPath};
use dilemma_core::scalar::{Rat, Scalar};
use dilemma_core::sim::{
    check_separation_bound, estimate_limit_set, scripted_moves_from_seed, simulate,
    verify_bound_exact, InitialPlay, MatchConfig, Plan, Strategy, Trajectory,
};
use dilemma_core::smale::{
    classify_smale, make_all_c, make_all_d, make_constant, make_convex_generous,
    make_equalizer, make_extortionate, make_generous_region, make_good_simple, make_smale_tft,
    OnLineRule, SmalePlan,
};
use dilemma_core::weights::WeightSequence;

use crate::scenario::{
    CheckSpec, InitialSpec, JobSpec, Mode, NumLit, OnLineSpec, PathSpec, PlanSpec, ScenarioDoc,
    Seat, StartsSpec, StrategySpec, SweepCheck,
};

#[derive(Debug, serde::Serialize)]
pub struct RunReport {
    pub version: u32,
    pub kind: String,
    pub mode: String,
    pub inputs_digest: String,
    pub checks: Vec<CheckResult>,
    pub artifacts: Vec<String>,
    pub pass: bool,
}

#[derive(Debug, serde::Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    /// Slack between the measured value and its threshold (positive =
    /// margin to spare).
    pub margin: f64,
    pub detail: String,
}

/// FNV-1a over the canonicalized scenario text.
pub fn digest(doc_text: &str) -> String {
    let canonical: serde_json::Value = serde_json::from_str(doc_text).unwrap_or(json!(null));
    let bytes = canonical.to_string().into_bytes();
    let mut h: u64 = 0xcbf29ce484222325;
    for b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

pub fn run(doc: &ScenarioDoc, doc_text: &str, out_dir: &Path) -> Result<RunReport> {
    if doc.version != 1 {
        bail!("unsupported scenario version {}", doc.version);
    }
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let (checks, artifacts) = match doc.mode {
        Mode::Rational => run_typed::<Rat>(doc, out_dir)?,
        Mode::Float => run_typed::<f64>(doc, out_dir)?,
    };
    let pass = checks.iter().all(|c| c.pass);
    Ok(RunReport {
        version: 1,
        kind: job_kind(&doc.job).to_string(),
        mode: match doc.mode {
            Mode::Rational => "rational".into(),
            Mode::Float => "float".into(),
        },
        inputs_digest: digest(doc_text),
        checks,
        artifacts: artifacts
            .iter()
            .map(|p| p.display().to_string())
            .collect(),
        pass,
    })
}

fn job_kind(job: &JobSpec) -> &'static str {
    match job {
        JobSpec::Match { .. } => "match",
        JobSpec::Classify { .. } => "classify",
        JobSpec::Folk { .. } => "folk",
        JobSpec::Evo { .. } => "evo",
        JobSpec::ValidatePath { .. } => "validate-path",
        JobSpec::Sweep { .. } => "sweep",
    }
}

fn run_typed<S: Scalar + Send + Sync>(
    doc: &ScenarioDoc,
    out: &Path,
) -> Result<(Vec<CheckResult>, Vec<PathBuf>)> {
    let game: Game<S> = Game::new(
        num::<S>(&doc.game.t)?,
        num::<S>(&doc.game.r)?,
        num::<S>(&doc.game.p)?,
        num::<S>(&doc.game.s)?,
    )
    .map_err(|e| anyhow!("invalid game: {e}"))?;

    match &doc.job {
        JobSpec::Match {
            x,
            y,
            rounds,
            seed,
            weights,
            checks,
        } => run_match(&game, x, y, *rounds, *seed, weights.clone(), checks, out),
        JobSpec::Classify { plan } => run_classify(&game, plan),
        JobSpec::Folk {
            target,
            rounds,
            seed,
            tolerance,
            check_deviations,
        } => run_folk(&game, target, *rounds, *seed, *tolerance, *check_deviations, out),
        JobSpec::Evo {
            roster,
            resident,
            starts,
            t_max,
            step,
            expect_fixation,
        } => run_evo(&game, roster, *resident, starts, *t_max, *step, *expect_fixation, out),
        JobSpec::ValidatePath {
            path,
            strict,
            samples,
        } => run_validate_path(&game, path, *strict, *samples, out),
        JobSpec::Sweep {
            x,
            y,
            rounds,
            seeds,
            check,
            require_fraction,
        } => run_sweep(&game, x, y, *rounds, seeds, check, *require_fraction, out),
    }
}

fn num<S: Scalar>(lit: &NumLit) -> Result<S> {
    lit.to_scalar().map_err(|e| anyhow!(e))
}

fn point<S: Scalar>(lit: &[NumLit; 2]) -> Result<Point<S>> {
    Ok(Point::new(num(&lit[0])?, num(&lit[1])?))
}

fn on_line_rule<S: Scalar>(spec: &OnLineSpec) -> Result<OnLineRule<S>> {
    Ok(match spec {
        OnLineSpec::Cooperate => OnLineRule::AlwaysC,
        OnLineSpec::Defect => OnLineRule::AlwaysD,
        OnLineSpec::DiagonalSplit => OnLineRule::DiagonalSplit,
        OnLineSpec::Prob { prob } => OnLineRule::Prob(num(prob)?),
    })
}

fn parse_moves(text: &str) -> Result<Vec<Move>> {
    text.chars()
        .map(|ch| match ch {
            'c' | 'C' => Ok(Move::C),
            'd' | 'D' => Ok(Move::D),
            other => bail!("bad move character {other:?} (use c/d)"),
        })
        .collect()
}

fn build_plan<S: Scalar>(game: &Game<S>, spec: &PlanSpec) -> Result<Plan<S>> {
    Ok(match spec {
        PlanSpec::Markov { p } => {
            let probs = [num(&p[0])?, num(&p[1])?, num(&p[2])?, num(&p[3])?];
            Plan::Markov(MarkovPlan::new(probs).map_err(|e| anyhow!("{e}"))?)
        }
        PlanSpec::Tft => Plan::Markov(MarkovPlan::tit_for_tat()),
        PlanSpec::AllC => Plan::Smale(make_all_c()),
        PlanSpec::AllD => Plan::Smale(make_all_d()),
        PlanSpec::Constant { prob } => {
            Plan::Smale(make_constant(num(prob)?).map_err(|e| anyhow!("{e}"))?)
        }
        PlanSpec::Equalizer { e, on_line } => Plan::Smale(
            make_equalizer(game, num(e)?, on_line_rule(on_line)?).map_err(|e| anyhow!("{e}"))?,
        ),
        PlanSpec::GoodSimple { slope, on_line } => Plan::Smale(
            make_good_simple(game, num(slope)?, on_line_rule(on_line)?)
                .map_err(|e| anyhow!("{e}"))?,
        ),
        PlanSpec::Extortionate { slope, on_line } => Plan::Smale(
            make_extortionate(game, num(slope)?, on_line_rule(on_line)?)
                .map_err(|e| anyhow!("{e}"))?,
        ),
        PlanSpec::SmaleTft => Plan::Smale(make_smale_tft(game)),
        PlanSpec::Simple {
            anchor,
            slope,
            on_line,
        } => {
            let line = dilemma_core::game::SepLine::new(game, point(anchor)?, num(slope)?)
                .map_err(|e| anyhow!("{e}"))?;
            Plan::Smale(SmalePlan::simple(game, line, on_line_rule(on_line)?))
        }
        PlanSpec::GenerousRegion { slope, v_x } => {
            let vx = v_x.as_ref().map(num::<S>).transpose()?;
            Plan::Smale(
                make_generous_region(game, num(slope)?, vx)
                    .map_err(|e| anyhow!("{e}"))?
                    .plan,
            )
        }
        PlanSpec::ConvexGenerous { vertices } => {
            let verts: Vec<Point<S>> = vertices
                .iter()
                .map(point::<S>)
                .collect::<Result<_>>()?;
            Plan::Smale(make_convex_generous(game, &verts).map_err(|e| anyhow!("{e}"))?)
        }
        PlanSpec::PathPeak { peak, on_line } => {
            let path = path_from_peak(game, &point(peak)?).map_err(|e| anyhow!("{e}"))?;
            Plan::Smale(SmalePlan::Path {
                path,
                on_path: on_line_rule(on_line)?,
            })
        }
        PlanSpec::Scripted { moves } => Plan::Scripted(parse_moves(moves)?),
        PlanSpec::RandomMoves { seed, len } => {
            Plan::Scripted(scripted_moves_from_seed(*seed, *len))
        }
    })
}

fn build_strategy<S: Scalar>(game: &Game<S>, spec: &StrategySpec) -> Result<Strategy<S>> {
    let initial = match &spec.initial {
        InitialSpec::C => InitialPlay::Move(Move::C),
        InitialSpec::D => InitialPlay::Move(Move::D),
        InitialSpec::Mixed { prob } => InitialPlay::Mixed(num(prob)?),
    };
    let prefix = spec
        .prefix
        .as_deref()
        .map(parse_moves)
        .transpose()?
        .unwrap_or_default();
    Ok(Strategy {
        initial,
        prefix,
        adoption_round: spec.adoption_round.unwrap_or(1).max(1),
        plan: build_plan(game, &spec.plan)?,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_match<S: Scalar>(
    game: &Game<S>,
    x: &StrategySpec,
    y: &StrategySpec,
    rounds: u64,
    seed: u64,
    weights: Option<WeightSequence>,
    checks: &[CheckSpec],
    out: &Path,
) -> Result<(Vec<CheckResult>, Vec<PathBuf>)> {
    let sx = build_strategy(game, x)?;
    let sy = build_strategy(game, y)?;
    let mut cfg = MatchConfig::new(rounds, seed);
    if let Some(w) = weights {
        cfg = cfg.weighted(w);
    }
    let traj = simulate(game, &sx, &sy, &cfg).map_err(|e| anyhow!("{e}"))?;

    let mut artifacts = Vec::new();
    let csv_path = out.join("trajectory.csv");
    let mut file = fs::File::create(&csv_path)?;
    export::write_trajectory_csv(&mut file, game, &traj)?;
    artifacts.push(csv_path);

    let est = estimate_limit_set(&traj, 0.5, 2_000);
    let limit_path = out.join("limit_set.json");
    fs::write(
        &limit_path,
        serde_json::to_string_pretty(&export::limit_estimate_json(&est))?,
    )?;
    artifacts.push(limit_path);

    let overlay_path = out.join("overlays.json");
    fs::write(
        &overlay_path,
        serde_json::to_string_pretty(&match_overlays(game, &sx, &sy))?,
    )?;
    artifacts.push(overlay_path);

    let mut results = Vec::new();
    for (i, check) in checks.iter().enumerate() {
        results.push(eval_check(game, &sx, &sy, &traj, &est, check, i)?);
    }
    if results.is_empty() {
        let (fx, fy) = traj.final_average_f64();
        results.push(CheckResult {
            name: "ran".into(),
            pass: true,
            margin: 0.0,
            detail: format!("final average ({fx:.6}, {fy:.6}) after {rounds} rounds"),
        });
    }
    Ok((results, artifacts))
}

/// Plot-ready overlays: the plans' lines or paths, and the predicted limit
/// when both plans are simple.
fn match_overlays<S: Scalar>(
    game: &Game<S>,
    x: &Strategy<S>,
    y: &Strategy<S>,
) -> serde_json::Value {
    let mut overlays = Vec::new();
    for (seat, s) in [("x", x), ("y", y)] {
        if let Plan::Smale(plan) = &s.plan {
            match plan {
                SmalePlan::Simple { line, .. } => {
                    let seg = line.hull_segment(game);
                    overlays.push(json!({
                        "seat": seat,
                        "kind": "line",
                        "segment": [seg.a.to_f64(), seg.b.to_f64()],
                    }));
                }
                SmalePlan::Path { path, .. } => {
                    overlays.push(json!({
                        "seat": seat,
                        "kind": "path",
                        "vertices": path.vertices().iter().map(Point::to_f64).collect::<Vec<_>>(),
                    }));
                }
                _ => {}
            }
        }
    }
    let predicted = match (&x.plan, &y.plan) {
        (Plan::Smale(px), Plan::Smale(py)) => {
            dilemma_core::smale::predicted_limit(game, px, py)
                .ok()
                .and_then(|p| match p {
                    dilemma_core::smale::PredictedLimit::Point(p) => Some(p.to_f64()),
                    _ => None,
                })
        }
        _ => None,
    };
    json!({ "overlays": overlays, "predicted_limit": predicted })
}

fn eval_check<S: Scalar>(
    game: &Game<S>,
    x: &Strategy<S>,
    y: &Strategy<S>,
    traj: &Trajectory<S>,
    est: &dilemma_core::sim::LimitSetEstimate,
    check: &CheckSpec,
    index: usize,
) -> Result<CheckResult> {
    let (fx, fy) = traj.final_average_f64();
    Ok(match check {
        CheckSpec::LimitNear { point: p, tol } => {
            let target = point::<S>(p)?.to_f64();
            let err = ((fx - target.0).powi(2) + (fy - target.1).powi(2)).sqrt();
            CheckResult {
                name: format!("check{index}:limit_near"),
                pass: err <= *tol,
                margin: tol - err,
                detail: format!("‖s − target‖ = {err:.3e}, tolerance {tol}"),
            }
        }
        CheckSpec::OpponentPayoffNear { value, tol } => {
            let target = num::<S>(value)?.to_f64();
            let err = (fy - target).abs();
            CheckResult {
                name: format!("check{index}:opponent_payoff_near"),
                pass: err <= *tol,
                margin: tol - err,
                detail: format!("|s_Y − {target}| = {err:.3e}, tolerance {tol}"),
            }
        }
        CheckSpec::SeparationBound { seat, slack } => {
            let strategy = match seat {
                Seat::X => x,
                Seat::Y => y,
            };
            let plan = match &strategy.plan {
                Plan::Smale(p) => p,
                _ => bail!("separation_bound check needs a Smale plan on that seat"),
            };
            let line = plan
                .simple_line()
                .ok_or_else(|| anyhow!("separation_bound check needs a simple plan"))?;
            let switched = *seat == Seat::Y;
            if let Some(exact) =
                verify_bound_exact(traj, game, line, strategy.adoption_round, switched)
            {
                CheckResult {
                    name: format!("check{index}:separation_bound"),
                    pass: exact.holds,
                    margin: if exact.holds { 1.0 } else { -1.0 },
                    detail: match exact.first_violation {
                        None => "exact two-sided bound holds at every round".into(),
                        Some(n) => format!("first violation at round {n}"),
                    },
                }
            } else {
                let map = line.affine(game);
                let (a, b, c) = (map.a.to_f64(), map.b.to_f64(), map.c.to_f64());
                let eval = move |px: f64, py: f64| a * px + b * py + c;
                let report = if switched {
                    check_separation_bound(traj, &|px, py| eval(py, px), strategy.adoption_round, true)
                } else {
                    check_separation_bound(traj, &eval, strategy.adoption_round, true)
                };
                CheckResult {
                    name: format!("check{index}:separation_bound"),
                    pass: report.holds(*slack),
                    margin: 1.0 + slack - report.max_ratio,
                    detail: format!("max float ratio {:.6}", report.max_ratio),
                }
            }
        }
        CheckSpec::StepLaw { slack } => CheckResult {
            name: format!("check{index}:step_law"),
            pass: traj.max_step_ratio <= 1.0 + slack,
            margin: 1.0 + slack - traj.max_step_ratio,
            detail: format!("max step ratio {:.9}", traj.max_step_ratio),
        },
        CheckSpec::Connected => CheckResult {
            name: format!("check{index}:connected"),
            pass: est.connected,
            margin: if est.connected { 1.0 } else { -1.0 },
            detail: format!(
                "tail cloud of {} points at radius {:.3e}",
                est.points.len(),
                est.radius
            ),
        },
    })
}

fn run_classify<S: Scalar>(
    game: &Game<S>,
    plan: &PlanSpec,
) -> Result<(Vec<CheckResult>, Vec<PathBuf>)> {
    let built = build_plan(game, plan)?;
    let detail = match &built {
        Plan::Markov(p) => {
            let f = classify_markov(p, game);
            format!(
                "markov: agreeable={} firm={} generous={} protection={} good={}",
                f.agreeable, f.firm, f.generous, f.protection_inequalities, f.good
            )
        }
        Plan::Smale(p) => {
            let f = classify_smale(p, game);
            format!(
                "smale: simple={} weakly_agreeable={} weakly_firm={} generous={} convex_generous={} protection_line={} good={} convex_good={} equalizer={} extortionate={}",
                f.simple,
                f.weakly_agreeable,
                f.weakly_firm,
                f.generous,
                f.convex_generous,
                f.has_protection_line,
                f.good,
                f.convex_good,
                f.equalizer,
                f.extortionate
            )
        }
        Plan::Scripted(moves) => format!("scripted: {} moves", moves.len()),
    };
    Ok((
        vec![CheckResult {
            name: "classify".into(),
            pass: true,
            margin: 0.0,
            detail,
        }],
        Vec::new(),
    ))
}

fn run_folk<S: Scalar>(
    game: &Game<S>,
    target: &[NumLit; 2],
    rounds: u64,
    seed: u64,
    tolerance: f64,
    check_deviations: bool,
    out: &Path,
) -> Result<(Vec<CheckResult>, Vec<PathBuf>)> {
    let target = point::<S>(target)?;
    let pair = folk_pair(game, &target).map_err(|e| anyhow!("{e}"))?;
    let traj = simulate(
        game,
        &Strategy::smale(Move::C, pair.plan_x.clone()),
        &Strategy::smale(Move::C, pair.plan_y.clone()),
        &MatchConfig::new(rounds, seed),
    )
    .map_err(|e| anyhow!("{e}"))?;
    let (fx, fy) = traj.final_average_f64();
    let (tx, ty) = target.to_f64();
    let err = ((fx - tx).powi(2) + (fy - ty).powi(2)).sqrt();

    let mut artifacts = Vec::new();
    let csv_path = out.join("folk_trajectory.csv");
    let mut file = fs::File::create(&csv_path)?;
    export::write_trajectory_csv(&mut file, game, &traj)?;
    artifacts.push(csv_path);
    let overlay = json!({
        "case": format!("{:?}", pair.case),
        "target": [tx, ty],
        "x_path": pair.x_path.as_ref().map(|p| p.vertices().iter().map(Point::to_f64).collect::<Vec<_>>()),
        "y_path": pair.y_path.as_ref().map(|p| p.vertices().iter().map(Point::to_f64).collect::<Vec<_>>()),
    });
    let overlay_path = out.join("folk_overlays.json");
    fs::write(&overlay_path, serde_json::to_string_pretty(&overlay)?)?;
    artifacts.push(overlay_path);

    let mut checks = vec![CheckResult {
        name: "folk:converges".into(),
        pass: err <= tolerance,
        margin: tolerance - err,
        detail: format!("case {:?}: ‖s − s*‖ = {err:.3e}", pair.case),
    }];

    if check_deviations {
        let mut worst = f64::NEG_INFINITY;
        for (name, dev) in deviation_suite(game) {
            let traj = simulate(
                game,
                &dev,
                &Strategy::smale(Move::C, pair.plan_y.clone()),
                &MatchConfig::new(rounds, seed + 1),
            )
            .map_err(|e| anyhow!("{e}"))?;
            let max_sx = traj
                .tail(0.10)
                .iter()
                .map(|p| p.0)
                .fold(f64::NEG_INFINITY, f64::max);
            worst = worst.max(max_sx - tx);
            if max_sx > tx + tolerance {
                checks.push(CheckResult {
                    name: format!("folk:deviation:{name}"),
                    pass: false,
                    margin: tx + tolerance - max_sx,
                    detail: format!("deviation reaches s_X = {max_sx:.4}"),
                });
            }
        }
        checks.push(CheckResult {
            name: "folk:deviations".into(),
            pass: worst <= tolerance,
            margin: tolerance - worst,
            detail: format!("worst deviation excess {worst:.3e} over 5 adversaries"),
        });
    }
    Ok((checks, artifacts))
}

fn deviation_suite<S: Scalar>(game: &Game<S>) -> Vec<(&'static str, Strategy<S>)> {
    vec![
        ("all-c", Strategy::smale(Move::C, make_all_c())),
        ("all-d", Strategy::smale(Move::D, make_all_d())),
        ("tft", Strategy::markov(Move::C, MarkovPlan::tit_for_tat())),
        (
            "random-script",
            Strategy::scripted(scripted_moves_from_seed(4242, 8192)),
        ),
        (
            "good-smale",
            Strategy::smale(
                Move::C,
                make_good_simple(game, S::ratio(7, 10), OnLineRule::AlwaysC)
                    .expect("canonical good plan"),
            ),
        ),
    ]
}

#[allow(clippy::too_many_arguments)]
fn run_evo<S: Scalar>(
    game: &Game<S>,
    roster_spec: &[PlanSpec],
    resident: usize,
    starts: &StartsSpec,
    t_max: f64,
    step: f64,
    expect_fixation: bool,
    out: &Path,
) -> Result<(Vec<CheckResult>, Vec<PathBuf>)> {
    let mut plans = Vec::new();
    for spec in roster_spec {
        match build_plan(game, spec)? {
            Plan::Smale(p) => plans.push(p),
            _ => bail!("evo rosters take Smale plans only"),
        }
    }
    let roster = Roster::new(game, plans).map_err(|e| anyhow!("{e}"))?;
    if resident >= roster.len() {
        bail!("resident index {resident} out of range");
    }
    let matrix = build_payoff_matrix(game, &roster);
    let hypotheses = check_theorem_hypotheses(game, &roster, resident);

    let roster_json: Vec<serde_json::Value> = roster
        .lines()
        .iter()
        .zip(roster.plans())
        .map(|(line, plan)| {
            let flags = classify_smale(plan, game);
            json!({
                "anchor": line.anchor.to_f64(),
                "slope": line.slope.to_f64(),
                "good": flags.good,
                "equalizer": flags.equalizer,
            })
        })
        .collect();

    let mut artifacts = Vec::new();
    let matrix_path = out.join("payoff_matrix.json");
    fs::write(
        &matrix_path,
        serde_json::to_string_pretty(&json!({
            "roster": roster_json,
            "matrix": export::payoff_matrix_json(&matrix),
            "hypotheses": {
                "ess": hypotheses.ess_applicable,
                "equalizer": hypotheses.equalizer_applicable,
                "global": hypotheses.global_applicable,
                "crossing_order": hypotheses.crossing_order,
            },
        }))?,
    )?;
    artifacts.push(matrix_path);

    let states: Vec<Vec<f64>> = match starts {
        StartsSpec::Explicit { states } => states.clone(),
        StartsSpec::Random { count, seed } => {
            use rand::Rng as _;
            use rand::SeedableRng as _;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed);
            (0..*count)
                .map(|_| {
                    let mut xi: Vec<f64> =
                        (0..roster.len()).map(|_| rng.random::<f64>() + 1e-3).collect();
                    let sum: f64 = xi.iter().sum();
                    xi.iter_mut().for_each(|v| *v /= sum);
                    xi
                })
                .collect()
        }
    };

    let cfg = OrbitConfig {
        t_max,
        step,
        ..OrbitConfig::default()
    };
    let mut checks = Vec::new();
    let mut fixated = 0usize;
    for (i, xi0) in states.iter().enumerate() {
        let orbit = integrate(&matrix.float, xi0, &cfg, &[]).map_err(|e| anyhow!("{e}"))?;
        if i == 0 {
            let orbit_path = out.join("orbit.csv");
            let mut file = fs::File::create(&orbit_path)?;
            export::write_orbit_csv(&mut file, &orbit)?;
            artifacts.push(orbit_path);
        }
        if orbit.fixation == Some(resident) {
            fixated += 1;
        } else if expect_fixation {
            checks.push(CheckResult {
                name: format!("evo:start{i}"),
                pass: false,
                margin: -1.0,
                detail: format!(
                    "no fixation at the resident (final state {:?})",
                    orbit.final_state
                ),
            });
        }
    }
    checks.push(CheckResult {
        name: "evo:fixation".into(),
        pass: !expect_fixation || fixated == states.len(),
        margin: fixated as f64 - states.len() as f64,
        detail: format!("{fixated}/{} starts fixated at the resident", states.len()),
    });
    Ok((checks, artifacts))
}

fn run_validate_path<S: Scalar>(
    game: &Game<S>,
    spec: &PathSpec,
    strict: bool,
    samples: usize,
    out: &Path,
) -> Result<(Vec<CheckResult>, Vec<PathBuf>)> {
    let path: SeparationPath<S> = match spec {
        PathSpec::Peak { point: p } => {
            path_from_peak(game, &point(p)?).map_err(|e| anyhow!("{e}"))?
        }
        PathSpec::Ode { start, steps } => {
            if S::EXACT {
                bail!("the slope-field construction runs in float mode; set \"mode\": \"float\"");
            }
            // Only reachable with S = f64: route through the float game.
            let gf: Game<f64> = Game::new(
                game.t().to_f64(),
                game.r().to_f64(),
                game.p().to_f64(),
                game.s().to_f64(),
            )
            .map_err(|e| anyhow!("{e}"))?;
            let p = path_from_ode(
                &gf,
                num::<f64>(&start[0])?,
                num::<f64>(&start[1])?,
                *steps,
            )
            .map_err(|e| anyhow!("{e}"))?;
            let verts = p
                .vertices()
                .iter()
                .map(|v| Point::new(S::from_f64_exact(v.x), S::from_f64_exact(v.y)))
                .collect();
            SeparationPath::new(game, verts).map_err(|e| anyhow!("{e}"))?
        }
        PathSpec::Explicit { vertices } => {
            let verts: Vec<Point<S>> =
                vertices.iter().map(point::<S>).collect::<Result<_>>()?;
            SeparationPath::new(game, verts).map_err(|e| anyhow!("{e}"))?
        }
    };
    let report = validate_path(game, &path, strict, samples);

    let path_csv = out.join("path.csv");
    let mut text = String::from("x,y\n");
    for v in path.vertices() {
        let (x, y) = v.to_f64();
        text.push_str(&format!("{x},{y}\n"));
    }
    fs::write(&path_csv, text)?;

    let checks = vec![CheckResult {
        name: "validate-path".into(),
        pass: report.is_valid(),
        margin: if report.is_valid() { 1.0 } else { -1.0 },
        detail: if report.is_valid() {
            format!(
                "valid {}path at {} samples",
                if strict { "strict " } else { "" },
                report.samples
            )
        } else {
            format!("failures: {:?}", report.failures())
        },
    }];
    Ok((checks, vec![path_csv]))
}

#[allow(clippy::too_many_arguments)]
fn run_sweep<S: Scalar + Send + Sync>(
    game: &Game<S>,
    x: &StrategySpec,
    y: &StrategySpec,
    rounds: u64,
    seeds: &crate::scenario::SeedRange,
    check: &SweepCheck,
    require_fraction: f64,
    out: &Path,
) -> Result<(Vec<CheckResult>, Vec<PathBuf>)> {
    if seeds.end < seeds.start {
        bail!("empty seed range");
    }
    let sx = build_strategy(game, x)?;
    let sy = build_strategy(game, y)?;
    let all_seeds: Vec<u64> = (seeds.start..=seeds.end).collect();

    // Fan out across worker threads; each match is independent.
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(4)
        .min(all_seeds.len().max(1));
    let chunk = all_seeds.len().div_ceil(workers);
    let results: Vec<(u64, bool, String)> = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for part in all_seeds.chunks(chunk.max(1)) {
            let sx = &sx;
            let sy = &sy;
            let check = &check;
            handles.push(scope.spawn(move || {
                part.iter()
                    .map(|&seed| {
                        let traj = simulate(game, sx, sy, &MatchConfig::new(rounds, seed))
                            .map_err(|e| anyhow!("{e}"))?;
                        Ok(evaluate_sweep_check(&traj, check, seed))
                    })
                    .collect::<Result<Vec<_>>>()
            }));
        }
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect::<Result<Vec<_>>>()
            .map(|vv| vv.into_iter().flatten().collect())
    })?;

    let sweep_csv = out.join("sweep.csv");
    let mut text = String::from("seed,pass,detail\n");
    for (seed, ok, detail) in &results {
        text.push_str(&format!("{seed},{ok},{detail}\n"));
    }
    fs::write(&sweep_csv, text)?;

    let passed = results.iter().filter(|(_, ok, _)| *ok).count();
    let fraction = passed as f64 / results.len().max(1) as f64;
    let checks = vec![CheckResult {
        name: "sweep".into(),
        pass: fraction >= require_fraction,
        margin: fraction - require_fraction,
        detail: format!(
            "{passed}/{} seeds passed (fraction {fraction:.4}, required {require_fraction})",
            results.len()
        ),
    }];
    Ok((checks, vec![sweep_csv]))
}

fn evaluate_sweep_check<S: Scalar>(
    traj: &Trajectory<S>,
    check: &SweepCheck,
    seed: u64,
) -> (u64, bool, String) {
    match check {
        SweepCheck::AbsorbedCc { by_round } => match traj.constant_from(Outcome::Cc) {
            Some(n) if n <= *by_round => (seed, true, format!("cc from round {n}")),
            Some(n) => (seed, false, format!("cc only from round {n}")),
            None => (seed, false, "never absorbed".into()),
        },
        SweepCheck::LimitNear { point: p, tol } => {
            let (fx, fy) = traj.final_average_f64();
            let tx = p[0].to_scalar::<f64>().unwrap_or(f64::NAN);
            let ty = p[1].to_scalar::<f64>().unwrap_or(f64::NAN);
            let err = ((fx - tx).powi(2) + (fy - ty).powi(2)).sqrt();
            (seed, err <= *tol, format!("distance {err:.3e}"))
        }
    }
}
