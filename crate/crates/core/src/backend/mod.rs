//! Planner backends: the session interface the orchestrator talks to, the
//! prompt templates, reply extraction and the scripted test backends.

mod prompts;
mod scripted;
mod stochastic;

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::plan::TaskPlan;
use crate::scene::Scene;
use crate::sim::Failure;
use crate::scoring::MotionScore;

pub use prompts::{render_prompt, PromptError, PromptInputs, ACTION_DOCS, CHECK_DOCS};
pub use scripted::{InjectedOutcome, ScriptedBackend, ScriptedManifest};
pub use stochastic::{StochasticBackend, StochasticManifest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequestKind {
    TaskPlan,
    EvaluationPlan,
    Retune,
    Replan,
    FixSyntax,
}

impl RequestKind {
    pub const ALL: [RequestKind; 5] =
        [Self::TaskPlan, Self::EvaluationPlan, Self::Retune, Self::Replan, Self::FixSyntax];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::TaskPlan => "task_plan",
            Self::EvaluationPlan => "evaluation_plan",
            Self::Retune => "retune",
            Self::Replan => "replan",
            Self::FixSyntax => "fix_syntax",
        }
    }
}

impl fmt::Display for RequestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BackendError {
    #[error("scripted replies for `{0}` are exhausted")]
    ScriptExhausted(RequestKind),
    #[error("scripted trial outcomes are exhausted")]
    OutcomesExhausted,
    #[error("reply contains no code")]
    NoCodeFound,
    #[error("transport error: {0}")]
    Transport(String),
    #[error("rate limited by the endpoint")]
    RateLimited,
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("conversation is ~{used} tokens, over the {limit}-token budget")]
    ContextBudget { used: usize, limit: usize },
    #[error("backend configuration: {0}")]
    Config(String),
    #[error("{kind} reply still unusable after {attempts} attempts: {last}")]
    Unusable { kind: RequestKind, attempts: usize, last: String },
    #[error(transparent)]
    Prompt(#[from] PromptError),
}

/// Scene-level inputs shared by every prompt of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptContext {
    pub description: String,
    pub objects: Vec<String>,
    pub locations: Vec<String>,
    pub task: String,
}

impl PromptContext {
    pub fn from_scene(scene: &Scene, task: &str) -> Self {
        let objects: Vec<String> = scene.objects.iter().map(|o| o.label.clone()).collect();
        let locations: Vec<String> = scene.locations.iter().map(|l| l.label.clone()).collect();
        let description = scene.description.clone().unwrap_or_else(|| {
            format!("The scene contains {}.", objects.join(", "))
        });
        Self { description, objects, locations, task: task.to_string() }
    }
}

/// One request to a planner session. Structured fields let scripted
/// backends react without parsing the prompt text.
#[derive(Debug, Clone, Copy)]
pub struct Request<'a> {
    pub kind: RequestKind,
    pub prompt: &'a str,
    pub failure_index: Option<usize>,
    pub current_plan: Option<&'a TaskPlan>,
}

/// A conversation with a planner for one run.
pub trait PlannerSession: Send {
    /// Sends the request and returns the raw reply text.
    fn complete(&mut self, req: &Request) -> Result<String, BackendError>;

    /// Outcome to use for the next trial instead of simulating, if the
    /// session scripts one.
    fn injected_outcome(&mut self) -> Result<Option<InjectedOutcome>, BackendError> {
        Ok(None)
    }

    /// (role, content) pairs exchanged so far.
    fn transcript(&self) -> &[(String, String)];
}

/// A source of independent sessions, one per run.
pub trait PlannerBackend: Send + Sync {
    fn start_session(&self, run: usize, seed: u64) -> Result<Box<dyn PlannerSession>, BackendError>;
}

/// Scores and failure of a trial supplied by a script.
impl InjectedOutcome {
    pub fn motion_scores(&self) -> Vec<MotionScore> {
        self.scores.iter().map(|&s| MotionScore::injected(s)).collect()
    }

    pub fn failure(&self) -> Option<Failure> {
        self.failure.clone()
    }
}

/// Loads a script directory. `manifest.toml` selects the backend with its
/// `mode` key: `"replay"` (default) or `"stochastic"`.
pub fn load_script_dir(dir: &Path) -> Result<Arc<dyn PlannerBackend>, BackendError> {
    let path = dir.join("manifest.toml");
    let text = std::fs::read_to_string(&path).map_err(|e| BackendError::Config(format!("{}: {e}", path.display())))?;
    let cfg_err = |e: toml::de::Error| BackendError::Config(format!("{}: {}", path.display(), e.message()));
    let table: toml::Table = toml::from_str(&text).map_err(cfg_err)?;
    match table.get("mode").and_then(|m| m.as_str()).unwrap_or("replay") {
        "replay" => {
            let m: ScriptedManifest = toml::from_str(&text).map_err(cfg_err)?;
            Ok(Arc::new(ScriptedBackend::from_manifest(&m, dir)?))
        }
        "stochastic" => {
            let m: StochasticManifest = toml::from_str(&text).map_err(cfg_err)?;
            Ok(Arc::new(StochasticBackend::from_manifest(&m, dir)?))
        }
        other => Err(BackendError::Config(format!("{}: unknown mode `{other}`", path.display()))),
    }
}

/// Contents of the first fenced block, or failing that the longest
/// balanced plan assignment found in the text.
pub fn extract_code_block(reply: &str) -> Result<String, BackendError> {
    if let Some(block) = fenced_block(reply) {
        if !block.trim().is_empty() {
            return Ok(block);
        }
    }
    bare_assignment(reply).ok_or(BackendError::NoCodeFound)
}

fn fenced_block(text: &str) -> Option<String> {
    let mut lines = text.lines();
    for line in lines.by_ref() {
        if line.trim_start().starts_with("```") {
            break;
        }
    }
    let mut body = Vec::new();
    let mut closed = false;
    for line in lines {
        if line.trim_start().starts_with("```") {
            closed = true;
            break;
        }
        body.push(line);
    }
    if body.is_empty() && !closed {
        return None;
    }
    let mut out = body.join("\n");
    out.push('\n');
    Some(out)
}

fn assignment_starts(text: &str) -> Vec<usize> {
    let mut starts = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let trimmed = line.trim_start();
        let indent = line.len() - trimmed.len();
        for target in ["task_plan", "evaluation_plan"] {
            if let Some(rest) = trimmed.strip_prefix(target) {
                let rest = rest.trim_start();
                let rest = if rest.starts_with('[') { rest.split_once(']').map_or("", |(_, r)| r).trim_start() } else { rest };
                if rest.starts_with('=') && !rest.starts_with("==") {
                    starts.push(offset + indent);
                }
            }
        }
        offset += line.len();
    }
    starts
}

/// End offset of the assignment starting at `start`: the first point where
/// every bracket opened after `=` is closed again.
fn assignment_end(text: &str, start: usize) -> Option<usize> {
    let bytes = text.as_bytes();
    let eq = start + text[start..].find('=')?;
    let mut depth = 0i32;
    let mut opened = false;
    let mut quote: Option<u8> = None;
    let mut i = eq + 1;
    while i < bytes.len() {
        let c = bytes[i];
        if let Some(q) = quote {
            if c == b'\\' {
                i += 2;
                continue;
            }
            if c == q {
                quote = None;
            }
        } else {
            match c {
                b'\'' | b'"' => quote = Some(c),
                b'#' => {
                    while i < bytes.len() && bytes[i] != b'\n' {
                        i += 1;
                    }
                    continue;
                }
                b'(' | b'[' | b'{' => {
                    depth += 1;
                    opened = true;
                }
                b')' | b']' | b'}' => {
                    depth -= 1;
                    if opened && depth == 0 {
                        return Some(i + 1);
                    }
                }
                _ => {}
            }
        }
        i += 1;
    }
    None
}

fn bare_assignment(text: &str) -> Option<String> {
    assignment_starts(text)
        .into_iter()
        .filter_map(|s| assignment_end(text, s).map(|e| &text[s..e]))
        .max_by_key(|region| region.len())
        .map(|region| format!("{region}\n"))
}
