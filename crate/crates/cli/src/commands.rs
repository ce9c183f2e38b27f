use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use mcs_game::agent::{new_agents, train, train_reseeded, RegionEnv, TrainingRun};
use mcs_game::config::RunConfig;
use mcs_game::evaluator::percentile_sorted;
use mcs_game::export;
use mcs_game::oracle::{sweep, RewardCurve};
use mcs_game::protocol::{run_session, verify_transcript, AgentConstructor, Outcome, SessionConfig, Transcript};
use mcs_game::{Error, Evaluator, QAgent, Region, RegionActionSpace, SirDistribution};

use crate::args::{Cli, Command};
use crate::exit;

/// Occupancy target for `train --check`, measured over the final window of steps.
const OCCUPANCY_TARGET: f64 = 0.90;
const FINAL_WINDOW: usize = 10_000;

pub fn run(cli: &Cli) -> Result<u8> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            toml::from_str::<RunConfig>(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => RunConfig::default(),
    };
    cli.command.overrides().apply(&mut cfg);
    cfg.validate()?;

    match &cli.command {
        Command::SampleSir { .. } => sample_sir(&cfg),
        Command::Sweep { .. } => sweep_cmd(&cfg),
        Command::Train { check, .. } => train_cmd(&cfg, *check),
        Command::Session { .. } => session_cmd(&cfg),
        Command::VerifyTranscript { transcript, .. } => verify_cmd(&cfg, transcript),
    }
}

fn create(cfg: &RunConfig, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(&cfg.output_dir).with_context(|| format!("creating {}", cfg.output_dir.display()))?;
    let path = cfg.output_dir.join(name);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn sample_sir(cfg: &RunConfig) -> Result<u8> {
    let sirs = SirDistribution::new().sample(cfg.n_ues, cfg.seed);
    export::write_sir_samples(create(cfg, "sir_samples.csv")?, &cfg.comment_header("sample-sir"), &sirs)?;
    if !sirs.is_empty() {
        let mut v: Vec<f64> = sirs.iter().map(|s| s.linear()).collect();
        v.sort_by(f64::total_cmp);
        let q: Vec<f64> = [0.25, 0.5, 0.75].iter().map(|&p| percentile_sorted(&v, p)).collect();
        println!(
            "quartiles p25={:.6} p50={:.6} p75={:.6} (dB {:.3} {:.3} {:.3})",
            q[0],
            q[1],
            q[2],
            10.0 * q[0].log10(),
            10.0 * q[1].log10(),
            10.0 * q[2].log10()
        );
    }
    Ok(exit::OK)
}

fn curves(cfg: &RunConfig, ev: &Evaluator, spaces: &[RegionActionSpace]) -> Result<Vec<RewardCurve>> {
    Ok(spaces.iter().map(|s| sweep(ev, s, cfg.window)).collect::<mcs_game::Result<_>>()?)
}

fn sweep_cmd(cfg: &RunConfig) -> Result<u8> {
    let ev = cfg.evaluator()?;
    let spaces = cfg.spaces()?;
    let header = cfg.comment_header("sweep");
    for (space, curve) in spaces.iter().zip(curves(cfg, &ev, &spaces)?) {
        let r = space.region();
        export::write_curve(create(cfg, &format!("curve_{r}.csv"))?, &header, &curve)?;
        export::write_scores(create(cfg, &format!("scores_{r}.csv"))?, &header, &curve.scores)?;
        export::write_combos(create(cfg, &format!("combos_{r}.csv"))?, &header, space)?;
        let best = curve.argmax_value();
        let best_s = curve.argmax_smoothed();
        println!(
            "{r}: {} combos ({}), max reward {:.6} at {best} {}, smoothed max {:.6} at {best_s} {}, local maxima {}",
            curve.len(),
            space.ordering(),
            curve.max_value(),
            space.combination_at(best)?,
            curve.max_smoothed(),
            space.combination_at(best_s)?,
            curve.local_maxima(mcs_game::oracle::LOCAL_MAX_TOLERANCE),
        );
    }
    Ok(exit::OK)
}

struct Trained {
    ev: Evaluator,
    spaces: Vec<RegionActionSpace>,
    curves: Vec<RewardCurve>,
    agents: Vec<QAgent>,
    runs: Vec<TrainingRun>,
}

fn train_agents(cfg: &RunConfig) -> Result<Trained> {
    let ev = cfg.evaluator()?;
    let spaces = cfg.spaces()?;
    let curves = curves(cfg, &ev, &spaces)?;
    let mut agents = new_agents(cfg.agent, cfg.seed)?;
    let runs = if cfg.reseed_per_episode {
        train_reseeded(&mut agents, &spaces, ev.table(), cfg.n_ues, cfg.seed)?
    } else {
        let envs: Vec<RegionEnv> = spaces
            .iter()
            .zip(&curves)
            .map(|(s, c)| RegionEnv::from_parts(s.clone(), c.scores.clone()))
            .collect::<mcs_game::Result<_>>()?;
        train(&mut agents, &envs)?
    };
    Ok(Trained { ev, spaces, curves, agents, runs })
}

fn train_cmd(cfg: &RunConfig, check: bool) -> Result<u8> {
    let t = train_agents(cfg)?;
    let header = cfg.comment_header("train");
    let mut summary = create(cfg, "summary.txt")?;
    for line in &header {
        writeln!(summary, "# {line}")?;
    }
    let mut all_ok = true;
    for ((run, agent), (space, curve)) in t.runs.iter().zip(&t.agents).zip(t.spaces.iter().zip(&t.curves)) {
        let r = run.region;
        export::write_trace(create(cfg, &format!("trace_{r}.csv"))?, &header, &run.trace)?;
        export::write_q_table(create(cfg, &format!("qtable_{r}.csv"))?, &header, agent)?;

        let tail = &run.trace[run.trace.len().saturating_sub(FINAL_WINDOW)..];
        let line = if tail.is_empty() {
            all_ok = false;
            format!("{r}: no training steps; oracle max reward {:.6}", curve.max_value())
        } else {
            let mut visits = BTreeMap::<usize, usize>::new();
            for row in tail {
                *visits.entry(row.combo_index).or_default() += 1;
            }
            let (&modal, _) = visits.iter().max_by_key(|(i, n)| (**n, std::cmp::Reverse(**i))).expect("non-empty");
            let near = tail.iter().filter(|row| curve.is_near_optimal(row.combo_index)).count() as f64 / tail.len() as f64;
            all_ok &= near >= OCCUPANCY_TARGET;
            format!(
                "{r}: steps {}, best combo {modal} {} reward {:.6}, oracle max {:.6} at {}, gap {:.6}, near-optimal occupancy {:.1}% over last {}",
                run.trace.len(),
                space.combination_at(modal)?,
                curve.values[modal],
                curve.max_value(),
                curve.argmax_value(),
                curve.max_value() - curve.values[modal],
                100.0 * near,
                tail.len(),
            )
        };
        println!("{line}");
        writeln!(summary, "{line}")?;
    }
    summary.flush()?;
    if check && !all_ok {
        eprintln!("check failed: near-optimal occupancy below {:.0}%", 100.0 * OCCUPANCY_TARGET);
        return Ok(exit::VERIFICATION_FAILED);
    }
    Ok(exit::OK)
}

fn session_cmd(cfg: &RunConfig) -> Result<u8> {
    let t = train_agents(cfg)?;
    let thresholds: BTreeMap<Region, f64> = t
        .curves
        .iter()
        .map(|c| (c.region, cfg.threshold.unwrap_or(cfg.threshold_fraction * c.max_value())))
        .collect();
    let session_cfg = SessionConfig { k: cfg.effective_k(), max_rounds: cfg.max_rounds, thresholds };
    let mut constructor = AgentConstructor::new(t.agents, t.spaces, true)?;
    let transcript = run_session(&mut constructor, &t.ev, &session_cfg)?;
    transcript.write(create(cfg, "transcript.jsonl")?)?;
    let rounds = Region::ALL.iter().map(|&r| transcript.proposals(r).count()).collect::<Vec<_>>();
    match transcript.outcome() {
        Some(Outcome::Consensus) => {
            println!("consensus; proposals per region (center, median, edge) {rounds:?}");
            Ok(exit::OK)
        }
        _ => {
            println!("no consensus within {} rounds", cfg.max_rounds);
            Ok(exit::NO_CONSENSUS)
        }
    }
}

fn verify_cmd(cfg: &RunConfig, path: &Path) -> Result<u8> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let table = cfg.table()?;
    let transcript = match Transcript::read(BufReader::new(file)) {
        Ok(t) => t,
        Err(e @ Error::Malformed(_)) => return rejected(path, &e),
        Err(e) => return Err(e.into()),
    };
    match verify_transcript(&transcript, &table) {
        Ok(report) if report.ok() => {
            println!("{}: {} scores verified", path.display(), report.scores_checked);
            Ok(exit::OK)
        }
        Ok(report) => {
            for m in &report.mismatches {
                eprintln!("mismatch: {m}");
            }
            println!("{}: {} of {} scores differ", path.display(), report.mismatches.len(), report.scores_checked);
            Ok(exit::VERIFICATION_FAILED)
        }
        Err(e @ (Error::Malformed(_) | Error::Protocol(_))) => rejected(path, &e),
        Err(e) => Err(e.into()),
    }
}

fn rejected(path: &Path, e: &Error) -> Result<u8> {
    eprintln!("{}: {e}", path.display());
    Ok(exit::VERIFICATION_FAILED)
}

