//! Trial logs (JSON lines), score tables and replay verification.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adapt::{TrialRecord, TrialSource};
use crate::kinematics::ArmModel;
use crate::plan::{parse_evaluation_plan, parse_task_plan};
use crate::scene::{load_scene, Scene, WorldState};
use crate::scoring::normalized_cumulative;
use crate::sim::{run_plan, ExecutorConfig};

/// Replayed scores must match the log within this bound.
pub const REPLAY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum LogError {
    #[error("{0}")]
    Io(String),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("the log has no trials")]
    Empty,
}

/// A scene and arm together with the text they were loaded from, so logs
/// can carry everything needed to re-simulate.
#[derive(Debug, Clone)]
pub struct SimSetup {
    pub scene: Arc<Scene>,
    pub arm: ArmModel,
    pub scene_toml: String,
    pub arm_toml: Option<String>,
}

impl SimSetup {
    pub fn from_sources(scene_toml: &str, arm_toml: Option<&str>) -> Result<Self, String> {
        let scene = load_scene(scene_toml).map_err(|e| e.to_string())?;
        let arm = match arm_toml {
            Some(t) => ArmModel::from_toml(t).map_err(|e| e.to_string())?,
            None => ArmModel::iiwa_like(),
        }
        .with_base(scene.robot_base);
        Ok(Self { scene: Arc::new(scene), arm, scene_toml: scene_toml.to_string(), arm_toml: arm_toml.map(String::from) })
    }

    /// Loads a scene file; an `arm` key in it is resolved next to the file.
    pub fn load(scene_path: &Path) -> Result<Self, String> {
        let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()));
        let scene_toml = read(scene_path)?;
        let scene = load_scene(&scene_toml).map_err(|e| format!("{}: {e}", scene_path.display()))?;
        let arm_toml = match &scene.arm_file {
            Some(f) => Some(read(&scene_path.parent().unwrap_or(Path::new(".")).join(f))?),
            None => None,
        };
        Self::from_sources(&scene_toml, arm_toml.as_deref())
    }
}

/// One log line: a trial plus the environment it ran in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogLine {
    #[serde(flatten)]
    pub trial: TrialRecord,
    pub scene_toml: String,
    pub arm_toml: Option<String>,
    pub executor: ExecutorConfig,
}

pub fn to_jsonl(trials: &[TrialRecord], setup: &SimSetup, executor: &ExecutorConfig) -> String {
    let mut out = String::new();
    for t in trials {
        let line = LogLine {
            trial: t.clone(),
            scene_toml: setup.scene_toml.clone(),
            arm_toml: setup.arm_toml.clone(),
            executor: executor.clone(),
        };
        out.push_str(&serde_json::to_string(&line).expect("log lines serialize"));
        out.push('\n');
    }
    out
}

pub fn parse_jsonl(text: &str) -> Result<Vec<LogLine>, LogError> {
    let mut lines = Vec::new();
    for (i, l) in text.lines().enumerate() {
        if l.trim().is_empty() {
            continue;
        }
        let line: LogLine =
            serde_json::from_str(l).map_err(|e| LogError::Malformed { line: i + 1, message: e.to_string() })?;
        lines.push(line);
    }
    if lines.is_empty() {
        return Err(LogError::Empty);
    }
    Ok(lines)
}

pub const CSV_HEADER: &str = "run,trial,kind,action_index,m_i,m_e,m_t,q_norm";

/// One row per trial, for the failed action or, on success, the last one.
pub fn score_csv(trials: &[TrialRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for t in trials {
        let kind = serde_json::to_value(t.kind).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        let idx = match t.failure_index {
            Some(k) => Some(k),
            None => t.scores.len().checked_sub(1),
        };
        let (mi, me, mt) = match idx.filter(|&k| k < t.scores.len()) {
            Some(k) => (t.m_i[k].to_string(), t.m_e[k].to_string(), t.scores[k].to_string()),
            None => ("0".into(), "0".into(), "0".into()),
        };
        let idx = idx.map(|k| k.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{},{},{},{},{}", t.run, t.trial, kind, idx, mi, me, mt, t.q_norm);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub run: usize,
    pub trial: usize,
    pub message: String,
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= REPLAY_TOLERANCE
}

fn compare(label: &str, logged: &[f64], fresh: &[f64]) -> Option<String> {
    if logged.len() != fresh.len() {
        return Some(format!("{label}: {} values logged, {} replayed", logged.len(), fresh.len()));
    }
    logged
        .iter()
        .zip(fresh)
        .position(|(a, b)| !close(*a, *b))
        .map(|i| format!("{label}[{i}]: logged {} but replay gives {}", logged[i], fresh[i]))
}

/// Re-simulates every simulated trial and checks the recorded numbers.
/// Injected trials are checked for internal consistency only.
pub fn replay(lines: &[LogLine]) -> Result<Vec<Mismatch>, LogError> {
    let mut setups: HashMap<(String, Option<String>), SimSetup> = HashMap::new();
    let mut out = Vec::new();
    for (n, line) in lines.iter().enumerate() {
        let t = &line.trial;
        let bad = |message: String| LogError::Malformed { line: n + 1, message };
        let tp = parse_task_plan(&t.plan_text).map_err(|e| bad(format!("plan_text: {e}")))?;
        let mut problems = Vec::new();
        if t.m_i.len() != t.scores.len() || t.m_e.len() != t.scores.len() {
            problems.push("m_i, m_e and scores differ in length".to_string());
        }
        let q = normalized_cumulative(&t.scores, tp.len());
        if !close(q, t.q_norm) {
            problems.push(format!("q_norm: logged {} but the scores give {q}", t.q_norm));
        }
        if t.source == TrialSource::Sim {
            let ep = parse_evaluation_plan(&t.eval_text).map_err(|e| bad(format!("eval_text: {e}")))?;
            let key = (line.scene_toml.clone(), line.arm_toml.clone());
            if !setups.contains_key(&key) {
                let s = SimSetup::from_sources(&line.scene_toml, line.arm_toml.as_deref()).map_err(bad)?;
                setups.insert(key.clone(), s);
            }
            let setup = &setups[&key];
            let report = run_plan(&tp, &ep, &WorldState::new(setup.scene.clone()), &setup.arm, &line.executor);
            let scores = report.scores();
            let fresh_t: Vec<f64> = scores.iter().map(|s| s.total).collect();
            let fresh_i: Vec<f64> = scores.iter().map(|s| s.internal).collect();
            let fresh_e: Vec<f64> = scores.iter().map(|s| s.external).collect();
            problems.extend(compare("scores", &t.scores, &fresh_t));
            problems.extend(compare("m_i", &t.m_i, &fresh_i));
            problems.extend(compare("m_e", &t.m_e, &fresh_e));
            let fi = report.first_failure.as_ref().map(|f| f.index);
            if fi != t.failure_index {
                problems.push(format!("failure index: logged {:?} but replay gives {fi:?}", t.failure_index));
            }
        } else if let Some(p) =
            compare("m_i + m_e", &t.scores, &t.m_i.iter().zip(&t.m_e).map(|(a, b)| a + b).collect::<Vec<_>>())
        {
            problems.push(p);
        }
        if t.success != t.failure_index.is_none() {
            problems.push("success flag disagrees with the failure index".into());
        }
        out.extend(problems.into_iter().map(|message| Mismatch { run: t.run, trial: t.trial, message }));
    }
    Ok(out)
}
