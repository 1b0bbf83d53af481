//! Deterministic backend that replays canned replies from a directory.
//!
//! The directory holds reply text files and a `manifest.toml`:
//!
//! ```toml
//! [[replies]]
//! kind = "task_plan"        # task_plan | evaluation_plan | retune | replan | fix_syntax
//! file = "reply1.md"
//!
//! [[trials]]                # optional; when present every trial is injected
//! scores = [0.1, 0.2, 0.015]
//! failure_index = 2
//! [[trials.failed]]
//! check = "collision_free"
//! args = []
//! observed = "glass"
//! expected = ""
//! ```

use std::collections::{BTreeMap, VecDeque};
use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use super::{BackendError, PlannerBackend, PlannerSession, Request, RequestKind};
use crate::checks::CheckResult;
use crate::plan::{CheckName, CheckValue, Literal};
use crate::sim::Failure;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptedManifest {
    /// `"replay"` when given.
    #[serde(default)]
    pub mode: Option<String>,
    #[serde(default)]
    pub replies: Vec<ReplyEntry>,
    #[serde(default)]
    pub trials: Vec<TrialEntry>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplyEntry {
    pub kind: RequestKind,
    pub file: String,
    #[serde(default)]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialEntry {
    /// Total motion score of every executed action, in order.
    pub scores: Vec<f64>,
    #[serde(default)]
    pub failure_index: Option<usize>,
    #[serde(default)]
    pub failed: Vec<FailedCheckEntry>,
    #[serde(default)]
    pub executor_error: Option<String>,
    /// Free-form provenance of the numbers.
    #[serde(default)]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FailedCheckEntry {
    pub check: String,
    #[serde(default)]
    pub args: Vec<toml::Value>,
    pub observed: toml::Value,
    pub expected: toml::Value,
}

/// Scores and failure of one trial, supplied by a script.
#[derive(Debug, Clone, PartialEq)]
pub struct InjectedOutcome {
    pub scores: Vec<f64>,
    pub failure: Option<Failure>,
}

fn literal_from(v: &toml::Value, what: &str) -> Result<Literal, BackendError> {
    Ok(match v {
        toml::Value::String(s) => Literal::Str(s.clone()),
        toml::Value::Boolean(b) => Literal::Bool(*b),
        toml::Value::Integer(i) => Literal::Int(*i),
        toml::Value::Float(f) => Literal::Float(*f),
        other => return Err(BackendError::Config(format!("{what}: unsupported value {other}"))),
    })
}

impl TrialEntry {
    fn to_outcome(&self, n: usize) -> Result<InjectedOutcome, BackendError> {
        let at = |m: String| BackendError::Config(format!("trials[{n}]: {m}"));
        let failure = match self.failure_index {
            None => {
                if !self.failed.is_empty() || self.executor_error.is_some() {
                    return Err(at("failed checks given without failure_index".into()));
                }
                None
            }
            Some(index) => {
                if self.scores.len() != index + 1 && self.executor_error.is_none() {
                    return Err(at(format!("{} scores for a failure at index {index}", self.scores.len())));
                }
                let mut failed = Vec::new();
                for c in &self.failed {
                    let name = CheckName::from_name(&c.check).ok_or_else(|| at(format!("unknown check `{}`", c.check)))?;
                    let args = c.args.iter().map(|a| literal_from(a, "args")).collect::<Result<Vec<_>, _>>()?;
                    let observed = CheckValue::from_literal(&literal_from(&c.observed, "observed")?)
                        .ok_or_else(|| at("observed must be a bool or string".into()))?;
                    let expected = literal_from(&c.expected, "expected")?;
                    failed.push(CheckResult { name, args, observed, expected, passed: false });
                }
                if failed.is_empty() && self.executor_error.is_none() {
                    return Err(at("a failure needs failed checks or an executor_error".into()));
                }
                Some(Failure { index, failed, executor_error: self.executor_error.clone() })
            }
        };
        Ok(InjectedOutcome { scores: self.scores.clone(), failure })
    }
}

/// Replays one script for every run.
#[derive(Debug, Clone)]
pub struct ScriptedBackend {
    replies: Arc<BTreeMap<RequestKind, Vec<String>>>,
    outcomes: Arc<Vec<InjectedOutcome>>,
}

impl ScriptedBackend {
    pub fn new(replies: Vec<(RequestKind, String)>, outcomes: Vec<InjectedOutcome>) -> Self {
        let mut map: BTreeMap<RequestKind, Vec<String>> = BTreeMap::new();
        for (k, text) in replies {
            map.entry(k).or_default().push(text);
        }
        Self { replies: Arc::new(map), outcomes: Arc::new(outcomes) }
    }

    pub fn from_manifest(manifest: &ScriptedManifest, dir: &Path) -> Result<Self, BackendError> {
        let mut replies = Vec::new();
        for r in &manifest.replies {
            let path = dir.join(&r.file);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| BackendError::Config(format!("{}: {e}", path.display())))?;
            replies.push((r.kind, text));
        }
        let outcomes = manifest.trials.iter().enumerate().map(|(i, t)| t.to_outcome(i)).collect::<Result<_, _>>()?;
        Ok(Self::new(replies, outcomes))
    }

    /// Loads `dir/manifest.toml` and the reply files it names.
    pub fn load(dir: &Path) -> Result<Self, BackendError> {
        let path = dir.join("manifest.toml");
        let text = std::fs::read_to_string(&path).map_err(|e| BackendError::Config(format!("{}: {e}", path.display())))?;
        let manifest: ScriptedManifest =
            toml::from_str(&text).map_err(|e| BackendError::Config(format!("{}: {}", path.display(), e.message())))?;
        Self::from_manifest(&manifest, dir)
    }
}

impl PlannerBackend for ScriptedBackend {
    fn start_session(&self, _run: usize, _seed: u64) -> Result<Box<dyn PlannerSession>, BackendError> {
        Ok(Box::new(ScriptedSession {
            queues: self.replies.iter().map(|(k, v)| (*k, v.iter().cloned().collect())).collect(),
            outcomes: self.outcomes.iter().cloned().collect(),
            injecting: !self.outcomes.is_empty(),
            transcript: Vec::new(),
        }))
    }
}

struct ScriptedSession {
    queues: BTreeMap<RequestKind, VecDeque<String>>,
    outcomes: VecDeque<InjectedOutcome>,
    injecting: bool,
    transcript: Vec<(String, String)>,
}

impl PlannerSession for ScriptedSession {
    fn complete(&mut self, req: &Request) -> Result<String, BackendError> {
        let reply = self
            .queues
            .get_mut(&req.kind)
            .and_then(|q| q.pop_front())
            .ok_or(BackendError::ScriptExhausted(req.kind))?;
        self.transcript.push(("user".into(), req.prompt.to_string()));
        self.transcript.push(("assistant".into(), reply.clone()));
        Ok(reply)
    }

    fn injected_outcome(&mut self) -> Result<Option<InjectedOutcome>, BackendError> {
        if !self.injecting {
            return Ok(None);
        }
        self.outcomes.pop_front().map(Some).ok_or(BackendError::OutcomesExhausted)
    }

    fn transcript(&self) -> &[(String, String)] {
        &self.transcript
    }
}
