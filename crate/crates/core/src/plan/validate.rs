use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{Action, ActionName, CheckName, EvaluationPlan, Grasp, Literal, TaskPlan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

/// Which of the two plans a diagnostic is about, so the orchestrator knows
/// which one to send back for correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanSubject {
    Task,
    Evaluation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticCode {
    EmptyPlan,
    DuplicateActionIndex,
    NonConsecutiveIndex,
    MissingEvalEntry,
    MultipleEntriesForIndex,
    UnknownEvalIndex,
    EvalOrder,
    MissingMandatoryCheck,
    ExpectedArity,
    ExpectedType,
    CheckArity,
    CheckArgument,
    UnknownLabel,
    RangeViolation,
    SoftRange,
    RepeatedAction,
    PickWithoutApproach,
}

impl DiagnosticCode {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagnosticCode::EmptyPlan => "empty-plan",
            DiagnosticCode::DuplicateActionIndex => "duplicate-action-index",
            DiagnosticCode::NonConsecutiveIndex => "non-consecutive-index",
            DiagnosticCode::MissingEvalEntry => "missing-eval-entry",
            DiagnosticCode::MultipleEntriesForIndex => "multiple-entries-for-index",
            DiagnosticCode::UnknownEvalIndex => "unknown-eval-index",
            DiagnosticCode::EvalOrder => "eval-order",
            DiagnosticCode::MissingMandatoryCheck => "missing-mandatory-check",
            DiagnosticCode::ExpectedArity => "expected-arity",
            DiagnosticCode::ExpectedType => "expected-type",
            DiagnosticCode::CheckArity => "check-arity",
            DiagnosticCode::CheckArgument => "check-argument",
            DiagnosticCode::UnknownLabel => "unknown-label",
            DiagnosticCode::RangeViolation => "range-violation",
            DiagnosticCode::SoftRange => "soft-range",
            DiagnosticCode::RepeatedAction => "repeated-action",
            DiagnosticCode::PickWithoutApproach => "pick-without-approach",
        }
    }
}

impl fmt::Display for DiagnosticCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: DiagnosticCode,
    pub subject: PlanSubject,
    pub action_index: Option<i64>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let plan = match self.subject {
            PlanSubject::Task => "task_plan",
            PlanSubject::Evaluation => "evaluation_plan",
        };
        match self.action_index {
            Some(i) => write!(f, "{} [{}] {plan} index {i}: {}", self.severity, self.code, self.message),
            None => write!(f, "{} [{}] {plan}: {}", self.severity, self.code, self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub diagnostics: Vec<Diagnostic>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.diagnostics.is_empty()
    }

    pub fn has_errors(&self) -> bool {
        self.diagnostics.iter().any(|d| d.severity == Severity::Error)
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.severity == Severity::Warning)
    }

    pub fn with_code(&self, code: DiagnosticCode) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(move |d| d.code == code)
    }

    /// True if some error concerns the given plan.
    pub fn has_errors_in(&self, subject: PlanSubject) -> bool {
        self.errors().any(|d| d.subject == subject)
    }
}

/// Bounds used by the validator.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationConfig {
    /// Typical obstacle_clearance range; values outside produce warnings.
    pub soft_clearance: (f64, f64),
    /// Hard obstacle_clearance range; values outside produce errors.
    pub hard_clearance: (f64, f64),
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self { soft_clearance: (0.005, 0.02), hard_clearance: (0.0, 0.1) }
    }
}

struct Sink {
    out: Vec<Diagnostic>,
}

impl Sink {
    fn push(&mut self, severity: Severity, code: DiagnosticCode, subject: PlanSubject, idx: Option<i64>, message: String) {
        self.out.push(Diagnostic { severity, code, subject, action_index: idx, message });
    }
    fn error(&mut self, code: DiagnosticCode, subject: PlanSubject, idx: Option<i64>, message: String) {
        self.push(Severity::Error, code, subject, idx, message);
    }
    fn warn(&mut self, code: DiagnosticCode, subject: PlanSubject, idx: Option<i64>, message: String) {
        self.push(Severity::Warning, code, subject, idx, message);
    }
}

/// Checks a task plan and its evaluation plan against each other and
/// against the scene vocabulary. Never fails; all findings go in the report.
pub fn validate_plans(tp: &TaskPlan, ep: &EvaluationPlan, vocab: &BTreeSet<String>, cfg: &ValidationConfig) -> ValidationReport {
    let mut sink = Sink { out: Vec::new() };
    check_task(tp, vocab, cfg, &mut sink);
    check_eval(tp, ep, vocab, &mut sink);
    ValidationReport { diagnostics: sink.out }
}

fn check_task(tp: &TaskPlan, vocab: &BTreeSet<String>, cfg: &ValidationConfig, sink: &mut Sink) {
    use DiagnosticCode as C;
    let t = PlanSubject::Task;
    if tp.actions.is_empty() {
        sink.error(C::EmptyPlan, t, None, "the task plan has no actions".into());
        return;
    }

    let mut seen = BTreeSet::new();
    for (pos, a) in tp.actions.iter().enumerate() {
        let idx = a.index as i64;
        if !seen.insert(a.index) {
            sink.error(C::DuplicateActionIndex, t, Some(idx), format!("action index {idx} is used more than once"));
        } else if a.index != pos {
            sink.error(
                C::NonConsecutiveIndex,
                t,
                Some(idx),
                format!("action at position {pos} has index {idx}; indices must run 0, 1, 2, ... in order"),
            );
        }
    }

    for a in &tp.actions {
        check_action(a, vocab, cfg, sink);
    }

    for pair in tp.actions.windows(2) {
        if pair[0].name() == pair[1].name() && pair[0].args == pair[1].args {
            sink.warn(
                C::RepeatedAction,
                t,
                Some(pair[1].index as i64),
                format!(
                    "{} at index {} repeats the identical action at index {}",
                    pair[1].name(),
                    pair[1].index,
                    pair[0].index
                ),
            );
        }
    }

    for (pos, a) in tp.actions.iter().enumerate() {
        if a.name() != ActionName::Pick {
            continue;
        }
        let prev = pos.checked_sub(1).map(|p| &tp.actions[p]);
        let approached = prev.is_some_and(|p| p.name() == ActionName::Approach && p.subject() == a.subject());
        if !approached {
            sink.warn(
                C::PickWithoutApproach,
                t,
                Some(a.index as i64),
                format!("pick of '{}' is not immediately preceded by an approach to it", a.subject()),
            );
        }
    }
}

fn check_action(a: &Action, vocab: &BTreeSet<String>, cfg: &ValidationConfig, sink: &mut Sink) {
    use DiagnosticCode as C;
    let t = PlanSubject::Task;
    let idx = Some(a.index as i64);
    if !vocab.contains(a.subject()) {
        sink.error(C::UnknownLabel, t, idx, format!("'{}' is not a known object or location", a.subject()));
    }
    let speed = a.speed().value();
    if !(0.0..=1.0).contains(&speed) {
        sink.error(C::RangeViolation, t, idx, format!("speed {} is outside [0, 1]", a.speed()));
    }
    if let Some(o) = a.orientation() {
        if !(0.0..=1.0).contains(&o.value()) {
            sink.error(C::RangeViolation, t, idx, format!("orientation {o} is outside [0, 1]"));
        }
    }
    let c = a.obstacle_clearance();
    let (hlo, hhi) = cfg.hard_clearance;
    let (slo, shi) = cfg.soft_clearance;
    if !(hlo..=hhi).contains(&c.value()) {
        sink.error(C::RangeViolation, t, idx, format!("obstacle_clearance {c} is outside [{hlo}, {hhi}] m"));
    } else if !(slo..=shi).contains(&c.value()) {
        sink.warn(C::SoftRange, t, idx, format!("obstacle_clearance {c} is outside the typical range [{slo}, {shi}] m"));
    }
}

fn check_eval(tp: &TaskPlan, ep: &EvaluationPlan, vocab: &BTreeSet<String>, sink: &mut Sink) {
    use DiagnosticCode as C;
    let e = PlanSubject::Evaluation;

    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for entry in &ep.entries {
        *counts.entry(entry.action_index).or_default() += 1;
    }
    let task_indices: BTreeSet<i64> = tp.actions.iter().map(|a| a.index as i64).collect();

    for (&i, &n) in &counts {
        if n > 1 {
            sink.error(
                C::MultipleEntriesForIndex,
                e,
                Some(i),
                format!("duplicate action_index {i}: {n} entries, making their correspondence with the task plan ambiguous"),
            );
        }
        if !task_indices.contains(&i) {
            sink.error(C::UnknownEvalIndex, e, Some(i), format!("entry for index {i}, which is not in the task plan"));
        }
    }
    for &i in &task_indices {
        if !counts.contains_key(&i) {
            sink.error(C::MissingEvalEntry, e, Some(i), format!("no evaluation entry for action {i}"));
        }
    }

    let order: Vec<i64> = ep.entries.iter().map(|x| x.action_index).collect();
    let mut sorted = order.clone();
    sorted.sort_unstable();
    if order != sorted {
        sink.error(C::EvalOrder, e, None, "entries are not in action order".into());
    }

    for entry in &ep.entries {
        let idx = Some(entry.action_index);
        for m in CheckName::MANDATORY {
            if entry.check(m).is_none() {
                sink.error(C::MissingMandatoryCheck, e, idx, format!("mandatory check {m} is missing"));
            }
        }
        if entry.expected.len() != entry.checks.len() {
            sink.error(
                C::ExpectedArity,
                e,
                idx,
                format!("{} checks but {} expected outputs", entry.checks.len(), entry.expected.len()),
            );
        }
        for (i, call) in entry.checks.iter().enumerate() {
            if let Some(exp) = entry.expected.get(i) {
                let ok = match exp {
                    Literal::Str(_) => call.name.returns_label(),
                    Literal::Bool(_) => !call.name.returns_label(),
                    _ => false,
                };
                if !ok {
                    let want = if call.name.returns_label() { "a string" } else { "a boolean" };
                    sink.error(C::ExpectedType, e, idx, format!("expected output {exp} for {} should be {want}", call.name));
                }
            }
            let (lo, hi) = call.name.arity();
            if call.args.len() < lo || call.args.len() > hi {
                let takes = if lo == hi { format!("{lo}") } else { format!("{lo} or {hi}") };
                sink.error(
                    C::CheckArity,
                    e,
                    idx,
                    format!("{} takes {takes} arguments, found {}", call.name, call.args.len()),
                );
                continue;
            }
            for (j, arg) in call.args.iter().enumerate() {
                let grasp_slot = matches!(call.name, CheckName::CanGrasp | CheckName::CanReach) && j == 1;
                match arg {
                    Literal::Str(s) if grasp_slot => {
                        if Grasp::from_name(s).is_none() {
                            sink.error(C::CheckArgument, e, idx, format!("{}: grasp must be 'top' or 'side', found '{s}'", call.name));
                        }
                    }
                    Literal::Str(s) => {
                        if !vocab.contains(s) {
                            sink.error(C::UnknownLabel, e, idx, format!("{}: '{s}' is not a known object or location", call.name));
                        }
                    }
                    other => {
                        sink.error(C::CheckArgument, e, idx, format!("{}: argument {other} is not a string", call.name));
                    }
                }
            }
        }
    }
}
