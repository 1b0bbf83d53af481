use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use actune_chat::{ChatBackend, ChatWireConfig, DEFAULT_TOKEN_ENV};
use actune_core::adapt::{run_adaptation, select_best, OrchestratorConfig, Preset, RunResult, RunSummary};
use actune_core::backend::{extract_code_block, load_script_dir, PlannerBackend};
use actune_core::plan::{
    parse_evaluation_plan, parse_task_plan, serialize_evaluation_plan, serialize_task_plan, validate_plans, EvaluationPlan,
    TaskPlan, ValidationConfig,
};
use actune_core::runlog::{parse_jsonl, replay, score_csv, to_jsonl, LogLine, SimSetup};
use actune_core::scene::WorldState;
use actune_core::sim::run_plan;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;

#[derive(Parser)]
#[command(name = "actune", version, about = "Validate, simulate and adapt robot task plans")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and cross-check a task plan and its evaluation plan.
    Validate(PlanFiles),
    /// Run a plan in the simulator and print per-action scores as JSON lines.
    Simulate {
        #[command(flatten)]
        files: PlanFiles,
        /// Write each action's trajectory (t,q1..q7,clearance,delta) here.
        #[arg(long)]
        trajectories: Option<PathBuf>,
    },
    /// Run the retune/replan loop and select the best run.
    Adapt(AdaptArgs),
    /// Pick the best successful run from adapt logs.
    Select {
        /// Run logs, or directories containing them.
        #[arg(required = true)]
        logs: Vec<PathBuf>,
    },
    /// Re-simulate the trials of a log and compare the recorded scores.
    Replay {
        #[arg(required = true)]
        logs: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct PlanFiles {
    #[arg(long)]
    plan: PathBuf,
    #[arg(long)]
    eval: PathBuf,
    #[arg(long)]
    scene: PathBuf,
}

#[derive(Args)]
struct AdaptArgs {
    #[arg(long)]
    scene: PathBuf,
    #[arg(long)]
    task: String,
    /// `scripted:<dir>` (replay or stochastic manifest) or `chat:<config.toml>`.
    /// The chat token is read from the variable named by `token_env`
    /// (default ACTUNE_API_TOKEN).
    #[arg(long)]
    backend: String,
    #[arg(long, default_value_t = 14, value_parser = clap::value_parser!(u64).range(1..))]
    runs: u64,
    /// Retunes per action before a replan (paper-iv-d).
    #[arg(long, default_value_t = 3)]
    max_retunes: usize,
    #[arg(long, default_value_t = 2)]
    max_replans: usize,
    #[arg(long, default_value = "paper-iv-d")]
    preset: Preset,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    parallel: u64,
}

enum Failure {
    /// Exit 1: the inputs were read but the result is negative.
    Domain(String),
    /// Exit 2: bad usage, unreadable or unparsable input.
    Usage(String),
}

type Outcome = Result<(), Failure>;

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

/// Plan files may be bare code or a whole reply with a fenced block.
fn read_code(path: &Path) -> Result<String, Failure> {
    let text = read(path)?;
    if text.contains("```") {
        extract_code_block(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
    } else {
        Ok(text)
    }
}

fn load_plans(files: &PlanFiles) -> Result<(TaskPlan, EvaluationPlan, SimSetup), Failure> {
    let tp = parse_task_plan(&read_code(&files.plan)?).map_err(|e| Failure::Usage(format!("{}: {e}", files.plan.display())))?;
    let ep = parse_evaluation_plan(&read_code(&files.eval)?)
        .map_err(|e| Failure::Usage(format!("{}: {e}", files.eval.display())))?;
    let setup = SimSetup::load(&files.scene).map_err(Failure::Usage)?;
    Ok((tp, ep, setup))
}

fn cmd_validate(files: &PlanFiles) -> Outcome {
    let (tp, ep, setup) = load_plans(files)?;
    let report = validate_plans(&tp, &ep, &setup.scene.vocabulary(), &ValidationConfig::default());
    for d in &report.diagnostics {
        eprintln!("{d}");
    }
    if report.has_errors() {
        return Err(Failure::Domain(format!("{} error(s)", report.errors().count())));
    }
    println!("{}", json!({ "actions": tp.len(), "entries": ep.entries.len(), "warnings": report.warnings().count() }));
    Ok(())
}

fn cmd_simulate(files: &PlanFiles, traj_dir: Option<&Path>) -> Outcome {
    let (tp, ep, setup) = load_plans(files)?;
    let exec = OrchestratorConfig::default().executor;
    let report = run_plan(&tp, &ep, &WorldState::new(setup.scene.clone()), &setup.arm, &exec);
    if let Some(dir) = traj_dir {
        fs::create_dir_all(dir).map_err(usage)?;
        for r in &report.records {
            fs::write(dir.join(format!("action_{}.csv", r.index)), r.outcome.trajectory.to_csv()).map_err(usage)?;
        }
    }
    for (r, s) in report.records.iter().zip(report.scores()) {
        let failed = report.first_failure.as_ref().is_some_and(|f| f.index == r.index);
        println!(
            "{}",
            json!({ "index": r.index, "m_i": s.internal, "m_e": s.external, "m_t": s.total, "passed": !failed })
        );
    }
    match &report.first_failure {
        None => Ok(()),
        Some(f) => Err(Failure::Domain(format!(
            "action {} failed: {}",
            f.index,
            actune_core::adapt::failure_reason(f)
        ))),
    }
}

fn load_backend(spec: &str) -> Result<(Arc<dyn PlannerBackend>, Option<usize>), Failure> {
    if let Some(dir) = spec.strip_prefix("scripted:") {
        return Ok((load_script_dir(Path::new(dir)).map_err(usage)?, None));
    }
    if let Some(file) = spec.strip_prefix("chat:") {
        let cfg = ChatWireConfig::from_toml(&read(Path::new(file))?).map_err(usage)?;
        let reprompts = cfg.max_reprompts;
        return Ok((Arc::new(ChatBackend::new(cfg).map_err(usage)?), Some(reprompts)));
    }
    Err(Failure::Usage(format!(
        "backend must be scripted:<dir> or chat:<config> (chat token default: {DEFAULT_TOKEN_ENV}), got `{spec}`"
    )))
}

fn write(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn cmd_adapt(a: &AdaptArgs) -> Outcome {
    let setup = SimSetup::load(&a.scene).map_err(Failure::Usage)?;
    let (backend, reprompts) = load_backend(&a.backend)?;
    let mut cfg = OrchestratorConfig {
        preset: a.preset,
        max_retunes_per_action: a.max_retunes,
        max_replans: a.max_replans,
        num_runs: a.runs as usize,
        rng_seed: a.seed,
        ..Default::default()
    };
    if let Some(n) = reprompts {
        cfg.max_reprompts = n;
    }
    cfg.check().map_err(usage)?;

    let pool = rayon::ThreadPoolBuilder::new().num_threads(a.parallel as usize).build().map_err(usage)?;
    let results: Vec<Result<RunResult, String>> = pool.install(|| {
        (0..cfg.num_runs)
            .into_par_iter()
            .map(|r| {
                run_adaptation(r, &a.task, &setup.scene, &setup.arm, backend.as_ref(), &cfg).map_err(|e| e.to_string())
            })
            .collect()
    });

    let runs_dir = a.out.join("runs");
    fs::create_dir_all(&runs_dir).map_err(|e| Failure::Usage(format!("{}: {e}", runs_dir.display())))?;
    let mut csv = String::new();
    let mut summaries = Vec::new();
    let mut rows = Vec::new();
    for (r, res) in results.iter().enumerate() {
        match res {
            Ok(run) => {
                write(&runs_dir.join(format!("run_{r:03}.jsonl")), &to_jsonl(&run.trials, &setup, &cfg.executor))?;
                let transcript: Vec<_> = run.transcript.iter().map(|(role, c)| json!({ "role": role, "content": c })).collect();
                write(
                    &runs_dir.join(format!("run_{r:03}.transcript.json")),
                    &serde_json::to_string_pretty(&transcript).map_err(usage)?,
                )?;
                let table = score_csv(&run.trials);
                if csv.is_empty() {
                    csv.push_str(&table);
                } else {
                    csv.extend(table.lines().skip(1).map(|l| format!("{l}\n")));
                }
                summaries.push(run.summary());
                rows.push(json!({
                    "run": r,
                    "success": run.success,
                    "stop": run.stop,
                    "trials": run.trials_used,
                    "normalized_cumulative": run.normalized_cumulative,
                    "quality": run.quality.as_ref().map(|q| q.quality),
                }));
            }
            Err(e) => {
                eprintln!("run {r}: {e}");
                summaries.push(RunSummary { run: r, success: false, normalized_cumulative: 0.0, trials_used: 0 });
                rows.push(json!({ "run": r, "success": false, "error": e }));
            }
        }
    }
    if csv.is_empty() {
        csv = format!("{}\n", actune_core::runlog::CSV_HEADER);
    }
    write(&a.out.join("scores.csv"), &csv)?;

    let winner = select_best(&summaries).ok();
    if let Some(w) = winner {
        let run = results[w].as_ref().expect("winner has a result");
        let text = format!(
            "{}\n\n{}\n",
            serialize_task_plan(&run.task_plan),
            serialize_evaluation_plan(&run.evaluation_plan)
        );
        write(&a.out.join("best_plan.py"), &text)?;
    }
    let summary = json!({
        "task": a.task,
        "backend": a.backend,
        "preset": cfg.preset.as_str(),
        "seed": cfg.rng_seed,
        "winner": winner,
        "quality": winner.and_then(|w| results[w].as_ref().ok()).and_then(|r| r.quality.as_ref().map(|q| q.quality)),
        "runs": rows,
    });
    let summary = serde_json::to_string_pretty(&summary).map_err(usage)?;
    write(&a.out.join("summary.json"), &format!("{summary}\n"))?;
    println!("{summary}");
    match winner {
        Some(_) => Ok(()),
        None => Err(Failure::Domain("no run succeeded".into())),
    }
}

/// Expands directories into the `*.jsonl` files they contain, sorted.
fn log_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>, Failure> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)
                .map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "jsonl"))
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    if out.is_empty() {
        return Err(Failure::Usage("no log files found".into()));
    }
    Ok(out)
}

fn load_log(path: &Path) -> Result<Vec<LogLine>, Failure> {
    parse_jsonl(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn cmd_select(paths: &[PathBuf]) -> Outcome {
    let mut summaries = Vec::new();
    let mut last = Vec::new();
    for f in log_files(paths)? {
        let lines = load_log(&f)?;
        let end = lines.last().expect("parse_jsonl rejects empty logs").trial.clone();
        summaries.push(RunSummary {
            run: end.run,
            success: end.success,
            normalized_cumulative: end.q_norm,
            trials_used: lines.len(),
        });
        last.push(end);
    }
    let w = select_best(&summaries).map_err(|e| Failure::Domain(e.to_string()))?;
    let s = &summaries[w];
    println!(
        "{}",
        json!({
            "winner": s.run,
            "normalized_cumulative": s.normalized_cumulative,
            "trials": s.trials_used,
            "task_plan": last[w].plan_text,
        })
    );
    Ok(())
}

fn cmd_replay(paths: &[PathBuf]) -> Outcome {
    let mut mismatches = 0;
    let mut trials = 0;
    for f in log_files(paths)? {
        let lines = load_log(&f)?;
        trials += lines.len();
        for m in replay(&lines).map_err(|e| Failure::Usage(format!("{}: {e}", f.display())))? {
            eprintln!("{}: run {} trial {}: {}", f.display(), m.run, m.trial, m.message);
            mismatches += 1;
        }
    }
    println!("{}", json!({ "trials": trials, "mismatches": mismatches }));
    if mismatches > 0 {
        return Err(Failure::Domain(format!("{mismatches} mismatch(es)")));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate(files) => cmd_validate(files),
        Command::Simulate { files, trajectories } => cmd_simulate(files, trajectories.as_deref()),
        Command::Adapt(a) => cmd_adapt(a),
        Command::Select { logs } => cmd_select(logs),
        Command::Replay { logs } => cmd_replay(logs),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(m)) => {
            eprintln!("actune: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("actune: {m}");
            ExitCode::from(2)
        }
    }
}
