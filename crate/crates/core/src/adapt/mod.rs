//! The planning and adaptation loop: request plans from a backend, validate
//! and simulate them, retune the failed action or replan with the history,
//! and pick the best of several runs.

mod feedback;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use feedback::{
    failure_reason, render_feedback, FeedbackKind, HistoryRecord, Outcome, ParameterHistory, PerformanceEntry,
};

use crate::backend::{
    extract_code_block, render_prompt, BackendError, PlannerBackend, PlannerSession, PromptContext, PromptInputs, Request,
    RequestKind,
};
use crate::kinematics::ArmModel;
use crate::plan::{
    parse_evaluation_plan, parse_retune_patch, parse_task_plan, serialize_evaluation_plan, serialize_task_plan, ActionName,
    EvaluationPlan, PatchError, PlanSubject, RetunePatch, Severity, TaskPlan, ValidationConfig, ValidationReport,
};
use crate::scene::{Scene, WorldState};
use crate::scoring::{normalized_cumulative, plan_quality, MotionScore, PlanQuality};
use crate::sim::{run_plan, ExecutorConfig, Failure};

/// Budget policy for retunes and replans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Preset {
    /// Up to `max_retunes_per_action` retunes of each failing action index,
    /// then a replan. Counters reset after every replan.
    #[default]
    #[serde(rename = "paper-iv-d")]
    PerAction,
    /// Cycles of `trials_per_cycle` trials: the first trial of a plan, then
    /// retunes of whatever fails, then a replan that opens the next cycle.
    #[serde(rename = "paper-iv-f")]
    Cycles,
}

impl Preset {
    pub fn as_str(self) -> &'static str {
        match self {
            Preset::PerAction => "paper-iv-d",
            Preset::Cycles => "paper-iv-f",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Preset {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper-iv-d" => Ok(Preset::PerAction),
            "paper-iv-f" => Ok(Preset::Cycles),
            other => Err(format!("unknown preset `{other}` (expected paper-iv-d or paper-iv-f)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OrchestratorConfig {
    pub preset: Preset,
    pub max_retunes_per_action: usize,
    pub trials_per_cycle: usize,
    pub max_replans: usize,
    pub num_runs: usize,
    pub rng_seed: u64,
    /// Correction requests allowed per planner request before giving up.
    pub max_reprompts: usize,
    /// Replans keep the actions executed before the failure.
    pub resume: bool,
    /// Largest allowed change in plan length on replan.
    pub max_length_change: usize,
    pub executor: ExecutorConfig,
    #[serde(skip)]
    pub validation: ValidationConfig,
}

impl Default for OrchestratorConfig {
    fn default() -> Self {
        Self {
            preset: Preset::PerAction,
            max_retunes_per_action: 3,
            trials_per_cycle: 8,
            max_replans: 2,
            num_runs: 14,
            rng_seed: 0,
            max_reprompts: 3,
            resume: false,
            max_length_change: 5,
            executor: ExecutorConfig::default(),
            validation: ValidationConfig::default(),
        }
    }
}

impl OrchestratorConfig {
    pub fn check(&self) -> Result<(), AdaptError> {
        let positive =
            [("max_retunes_per_action", self.max_retunes_per_action), ("trials_per_cycle", self.trials_per_cycle), ("num_runs", self.num_runs)];
        for (name, v) in positive {
            if v == 0 {
                return Err(AdaptError::Config(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }

    /// Most trials a single run can use.
    pub fn trial_budget(&self) -> usize {
        let per_plan = match self.preset {
            Preset::Cycles => self.trials_per_cycle,
            // retunes are counted per action index, so a plan of n actions
            // could in principle use 1 + n * max_retunes trials; report the
            // single-failing-action budget.
            Preset::PerAction => 1 + self.max_retunes_per_action,
        };
        per_plan * (1 + self.max_replans)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdaptError {
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RetuneError {
    #[error("the plan has no action with index {0}")]
    IndexMismatch(usize),
    #[error("retune of index {index} changes the action from {from} to {to}")]
    ActionNameChanged { index: usize, from: ActionName, to: ActionName },
}

/// A retuned plan and whether the patch repeated the current arguments.
#[derive(Debug, Clone, PartialEq)]
pub struct Retuned {
    pub plan: TaskPlan,
    pub duplicate: bool,
}

/// Replaces the arguments of one action, keeping its type.
pub fn apply_retune(tp: &TaskPlan, patch: &RetunePatch) -> Result<Retuned, RetuneError> {
    let duplicate = tp.actions.iter().any(|a| a.index == patch.action_index && *a == patch.replacement);
    let mut plan = tp.clone();
    plan.apply_patch(patch).map_err(|e| match e {
        PatchError::NoSuchIndex(i) => RetuneError::IndexMismatch(i),
        PatchError::NameChanged { index, from, to } => RetuneError::ActionNameChanged { index, from, to },
    })?;
    Ok(Retuned { plan, duplicate })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrialKind {
    Initial,
    Retune,
    Replan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrialSource {
    Sim,
    Injected,
}

/// One execution of a (task plan, evaluation plan) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub run: usize,
    pub trial: usize,
    pub kind: TrialKind,
    /// 0 for the first plan, incremented by each replan.
    pub plan_version: usize,
    pub failure_index: Option<usize>,
    pub failed_action: Option<ActionName>,
    pub reason: Option<String>,
    /// M_T of every executed action.
    pub scores: Vec<f64>,
    pub m_i: Vec<f64>,
    pub m_e: Vec<f64>,
    /// Sum of the executed scores over the plan length.
    pub q_norm: f64,
    pub success: bool,
    pub source: TrialSource,
    pub plan_text: String,
    pub eval_text: String,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Success,
    BudgetExhausted,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub run: usize,
    pub success: bool,
    pub stop: StopReason,
    pub task_plan: TaskPlan,
    pub evaluation_plan: EvaluationPlan,
    /// Q of the final plan when it succeeded.
    pub quality: Option<PlanQuality>,
    /// q_norm of the last trial.
    pub normalized_cumulative: f64,
    pub trials_used: usize,
    pub trials: Vec<TrialRecord>,
    pub history: ParameterHistory,
    pub performance: Vec<PerformanceEntry>,
    /// Feedback blocks in the order they were sent.
    pub feedback: Vec<(FeedbackKind, String)>,
    pub transcript: Vec<(String, String)>,
}

impl RunResult {
    pub fn summary(&self) -> RunSummary {
        RunSummary {
            run: self.run,
            success: self.success,
            normalized_cumulative: self.normalized_cumulative,
            trials_used: self.trials_used,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run: usize,
    pub success: bool,
    pub normalized_cumulative: f64,
    pub trials_used: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SelectError {
    #[error("no run succeeded")]
    NoSuccessfulRun,
}

/// Position of the successful run with the highest normalized score; ties
/// go to fewer trials, then to the earlier position.
pub fn select_best(runs: &[RunSummary]) -> Result<usize, SelectError> {
    let mut best: Option<usize> = None;
    for (i, r) in runs.iter().enumerate() {
        if !r.success {
            continue;
        }
        let better = match best {
            None => true,
            Some(b) => {
                let cur = &runs[b];
                match r.normalized_cumulative.total_cmp(&cur.normalized_cumulative) {
                    std::cmp::Ordering::Greater => true,
                    std::cmp::Ordering::Less => false,
                    std::cmp::Ordering::Equal => r.trials_used < cur.trials_used,
                }
            }
        };
        if better {
            best = Some(i);
        }
    }
    best.ok_or(SelectError::NoSuccessfulRun)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NextStep {
    Retune,
    Replan,
    Stop,
}

/// What to do after a failed trial.
/// `retunes_here`: retunes already spent on the failing index in this plan;
/// `cycle_trials`: trials run since the current plan was generated.
pub fn next_step(cfg: &OrchestratorConfig, retunes_here: usize, cycle_trials: usize, replans: usize) -> NextStep {
    let may_retune = match cfg.preset {
        Preset::PerAction => retunes_here < cfg.max_retunes_per_action,
        Preset::Cycles => cycle_trials < cfg.trials_per_cycle,
    };
    if may_retune {
        NextStep::Retune
    } else if replans < cfg.max_replans {
        NextStep::Replan
    } else {
        NextStep::Stop
    }
}

fn error_text(report: &ValidationReport, subject: PlanSubject) -> Option<String> {
    let lines: Vec<String> =
        report.errors().filter(|d| d.subject == subject).map(|d| d.to_string()).collect();
    (!lines.is_empty()).then(|| lines.join("\n"))
}

fn warning_text(report: &ValidationReport, subject: PlanSubject) -> Vec<String> {
    report.diagnostics.iter().filter(|d| d.severity == Severity::Warning && d.subject == subject).map(|d| d.to_string()).collect()
}

struct TrialRun {
    scores: Vec<MotionScore>,
    failure: Option<Failure>,
    source: TrialSource,
}

struct Driver<'a> {
    session: Box<dyn PlannerSession>,
    ctx: PromptContext,
    cfg: &'a OrchestratorConfig,
    vocab: BTreeSet<String>,
}

impl Driver<'_> {
    /// Sends a request and keeps asking for corrections until `accept`
    /// takes the extracted code or the re-prompt bound is hit.
    fn obtain<T>(
        &mut self,
        kind: RequestKind,
        prompt: String,
        failure_index: Option<usize>,
        current_plan: Option<&TaskPlan>,
        mut accept: impl FnMut(&str) -> Result<T, String>,
    ) -> Result<T, BackendError> {
        let mut req_kind = kind;
        let mut prompt = prompt;
        let mut last = String::new();
        for _ in 0..=self.cfg.max_reprompts {
            let reply = self.session.complete(&Request { kind: req_kind, prompt: &prompt, failure_index, current_plan })?;
            let (prior, problem) = match extract_code_block(&reply) {
                Ok(code) => match accept(&code) {
                    Ok(v) => return Ok(v),
                    Err(d) => (code, d),
                },
                Err(e) => (reply, e.to_string()),
            };
            prompt = render_prompt(
                RequestKind::FixSyntax,
                &self.ctx,
                &PromptInputs { diagnostics: Some(&problem), prior: Some(prior.trim_end()), ..Default::default() },
            )?;
            last = problem;
            req_kind = RequestKind::FixSyntax;
        }
        Err(BackendError::Unusable { kind, attempts: self.cfg.max_reprompts + 1, last })
    }

    fn task_plan(&mut self) -> Result<(TaskPlan, Vec<String>), BackendError> {
        let prompt = render_prompt(RequestKind::TaskPlan, &self.ctx, &PromptInputs::default())?;
        let vocab = self.vocab.clone();
        let vcfg = self.cfg.validation.clone();
        self.obtain(RequestKind::TaskPlan, prompt, None, None, move |code| {
            let tp = parse_task_plan(code).map_err(|e| e.to_string())?;
            let report = crate::plan::validate_plans(&tp, &EvaluationPlan::default(), &vocab, &vcfg);
            if let Some(e) = error_text(&report, PlanSubject::Task) {
                return Err(e);
            }
            Ok((tp, warning_text(&report, PlanSubject::Task)))
        })
    }

    fn evaluation_plan(&mut self, tp: &TaskPlan) -> Result<(EvaluationPlan, Vec<String>), BackendError> {
        let prompt = render_prompt(RequestKind::EvaluationPlan, &self.ctx, &PromptInputs::default())?;
        let vocab = self.vocab.clone();
        let vcfg = self.cfg.validation.clone();
        self.obtain(RequestKind::EvaluationPlan, prompt, None, Some(tp), move |code| {
            let ep = parse_evaluation_plan(code).map_err(|e| e.to_string())?;
            let report = crate::plan::validate_plans(tp, &ep, &vocab, &vcfg);
            if let Some(e) = error_text(&report, PlanSubject::Evaluation) {
                return Err(e);
            }
            Ok((ep, warning_text(&report, PlanSubject::Evaluation)))
        })
    }

    fn retune(&mut self, tp: &TaskPlan, block: &str, index: usize) -> Result<(TaskPlan, Vec<String>), BackendError> {
        let prompt = render_prompt(
            RequestKind::Retune,
            &self.ctx,
            &PromptInputs { feedback: Some(block), failure_index: Some(index), ..Default::default() },
        )?;
        let vocab = self.vocab.clone();
        let vcfg = self.cfg.validation.clone();
        self.obtain(RequestKind::Retune, prompt, Some(index), Some(tp), move |code| {
            let patch = parse_retune_patch(code).map_err(|e| e.to_string())?;
            if patch.action_index != index {
                return Err(format!("the patch changes action {}, but the failed action is at index {index}", patch.action_index));
            }
            let retuned = apply_retune(tp, &patch).map_err(|e| e.to_string())?;
            let report = crate::plan::validate_plans(&retuned.plan, &EvaluationPlan::default(), &vocab, &vcfg);
            if let Some(e) = error_text(&report, PlanSubject::Task) {
                return Err(e);
            }
            let mut warnings = warning_text(&report, PlanSubject::Task);
            if retuned.duplicate {
                warnings.push(format!("duplicate-attempt: the retune of action {index} repeats its current arguments"));
            }
            Ok((retuned.plan, warnings))
        })
    }

    fn replan(
        &mut self,
        tp: &TaskPlan,
        block: &str,
        failure_index: usize,
        original_len: usize,
    ) -> Result<(TaskPlan, Vec<String>), BackendError> {
        let prefix: Vec<_> = if self.cfg.resume {
            tp.actions.iter().take_while(|a| a.index < failure_index).cloned().collect()
        } else {
            Vec::new()
        };
        let prefix_text = prefix.iter().map(|a| a.to_string()).collect::<Vec<_>>().join("\n");
        let prompt = render_prompt(
            RequestKind::Replan,
            &self.ctx,
            &PromptInputs {
                feedback: Some(block),
                prefix: (!prefix.is_empty()).then_some(prefix_text.as_str()),
                ..Default::default()
            },
        )?;
        let max_change = self.cfg.max_length_change;
        let vocab = self.vocab.clone();
        let vcfg = self.cfg.validation.clone();
        self.obtain(RequestKind::Replan, prompt, Some(failure_index), Some(tp), move |code| {
            let new = parse_task_plan(code).map_err(|e| e.to_string())?;
            let report = crate::plan::validate_plans(&new, &EvaluationPlan::default(), &vocab, &vcfg);
            if let Some(e) = error_text(&report, PlanSubject::Task) {
                return Err(e);
            }
            if new.len().abs_diff(original_len) > max_change {
                return Err(format!(
                    "the new plan has {} actions; it must stay within plus or minus {max_change} of the original {original_len}",
                    new.len()
                ));
            }
            if new.actions.len() < prefix.len() || new.actions[..prefix.len()] != prefix[..] {
                return Err(format!("the new plan must start with the {} already executed actions unchanged", prefix.len()));
            }
            Ok((new, warning_text(&report, PlanSubject::Task)))
        })
    }

    fn trial(
        &mut self,
        tp: &TaskPlan,
        ep: &EvaluationPlan,
        s0: &WorldState,
        arm: &ArmModel,
    ) -> Result<TrialRun, AdaptError> {
        if let Some(inj) = self.session.injected_outcome()? {
            let failure = inj.failure();
            let expected_len = match &failure {
                Some(f) if f.index >= tp.len() => {
                    return Err(AdaptError::Config(format!("injected failure index {} is outside the plan", f.index)))
                }
                Some(f) if f.executor_error.is_some() && inj.scores.len() == f.index => f.index,
                Some(f) => f.index + 1,
                None => tp.len(),
            };
            if inj.scores.len() != expected_len {
                return Err(AdaptError::Config(format!(
                    "injected trial has {} scores, expected {expected_len}",
                    inj.scores.len()
                )));
            }
            return Ok(TrialRun { scores: inj.motion_scores(), failure, source: TrialSource::Injected });
        }
        let report = run_plan(tp, ep, s0, arm, &self.cfg.executor);
        Ok(TrialRun { scores: report.scores(), failure: report.first_failure, source: TrialSource::Sim })
    }
}

/// Runs one adaptation run. An exhausted budget is an unsuccessful
/// result; only backend and configuration problems are errors.
pub fn run_adaptation(
    run: usize,
    task: &str,
    scene: &Arc<Scene>,
    arm: &ArmModel,
    backend: &dyn PlannerBackend,
    cfg: &OrchestratorConfig,
) -> Result<RunResult, AdaptError> {
    cfg.check()?;
    let session = backend.start_session(run, cfg.rng_seed)?;
    let mut d = Driver { session, ctx: PromptContext::from_scene(scene, task), cfg, vocab: scene.vocabulary() };
    let s0 = WorldState::new(scene.clone());

    let (mut tp, mut warnings) = d.task_plan()?;
    let (mut ep, w) = d.evaluation_plan(&tp)?;
    warnings.extend(w);
    let original_len = tp.len();

    let mut trials: Vec<TrialRecord> = Vec::new();
    let mut history = ParameterHistory::default();
    let mut performance = Vec::new();
    let mut feedback = Vec::new();
    let mut retunes: BTreeMap<usize, usize> = BTreeMap::new();
    let mut cycle_trials = 0;
    let mut replans = 0;
    let mut kind = TrialKind::Initial;

    let stop = loop {
        let trial_no = trials.len() + 1;
        let t = d.trial(&tp, &ep, &s0, arm)?;
        cycle_trials += 1;
        let totals: Vec<f64> = t.scores.iter().map(|s| s.total).collect();
        for (i, &score) in totals.iter().enumerate() {
            let failed = t.failure.as_ref().is_some_and(|f| f.index == i);
            history.push(HistoryRecord::new(trial_no, &tp.actions[i], score, if failed { Outcome::Failure } else { Outcome::Success }));
        }
        let entry = t.failure.as_ref().map(|f| {
            let score = totals.get(f.index).copied().unwrap_or(0.0);
            if totals.len() <= f.index {
                history.push(HistoryRecord::new(trial_no, &tp.actions[f.index], score, Outcome::Failure));
            }
            PerformanceEntry::new(trial_no, &tp.actions[f.index], score, f)
        });
        trials.push(TrialRecord {
            run,
            trial: trial_no,
            kind,
            plan_version: replans,
            failure_index: t.failure.as_ref().map(|f| f.index),
            failed_action: entry.as_ref().map(|e| e.failed_action),
            reason: entry.as_ref().map(|e| e.failure_reason.clone()),
            m_i: t.scores.iter().map(|s| s.internal).collect(),
            m_e: t.scores.iter().map(|s| s.external).collect(),
            q_norm: normalized_cumulative(&totals, tp.len()),
            scores: totals,
            success: t.failure.is_none(),
            source: t.source,
            plan_text: serialize_task_plan(&tp),
            eval_text: serialize_evaluation_plan(&ep),
            warnings: std::mem::take(&mut warnings),
        });
        let Some(entry) = entry else {
            break StopReason::Success;
        };
        let k = entry.failure_index;
        performance.push(entry.clone());
        match next_step(cfg, retunes.get(&k).copied().unwrap_or(0), cycle_trials, replans) {
            NextStep::Retune => {
                let block = render_feedback(&entry, &history, FeedbackKind::Retune);
                let (new, w) = d.retune(&tp, &block, k)?;
                feedback.push((FeedbackKind::Retune, block));
                tp = new;
                warnings = w;
                *retunes.entry(k).or_default() += 1;
                kind = TrialKind::Retune;
            }
            NextStep::Replan => {
                let block = render_feedback(&entry, &history, FeedbackKind::Replan);
                let (new, mut w) = d.replan(&tp, &block, k, original_len)?;
                feedback.push((FeedbackKind::Replan, block));
                let (new_ep, w2) = d.evaluation_plan(&new)?;
                w.extend(w2);
                tp = new;
                ep = new_ep;
                warnings = w;
                replans += 1;
                retunes.clear();
                cycle_trials = 0;
                kind = TrialKind::Replan;
            }
            NextStep::Stop => break StopReason::BudgetExhausted,
        }
    };

    let last = trials.last().expect("at least one trial");
    let success = stop == StopReason::Success;
    let quality = if success {
        let scores: Vec<MotionScore> = last.scores.iter().map(|&s| MotionScore::injected(s)).collect();
        plan_quality(&scores).ok()
    } else {
        None
    };
    Ok(RunResult {
        run,
        success,
        stop,
        normalized_cumulative: last.q_norm,
        trials_used: trials.len(),
        task_plan: tp,
        evaluation_plan: ep,
        quality,
        trials,
        history,
        performance,
        feedback,
        transcript: d.session.transcript().to_vec(),
    })
}
