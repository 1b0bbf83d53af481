//! Trial history and the feedback blocks sent with retune and replan
//! requests.

use serde::{Deserialize, Serialize};

use crate::plan::{py_float_repr, py_tuple_repr, Action, ActionName, CheckName, CheckValue, Literal};
use crate::sim::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Outcome {
    Success,
    Failure,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Success => "SUCCESS",
            Outcome::Failure => "FAILURE",
        }
    }
}

/// One executed action with the arguments it ran with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryRecord {
    pub trial: usize,
    pub action_index: usize,
    pub action: ActionName,
    pub target: String,
    /// Arguments after the target, rendered as a Python tuple.
    pub rest_args: String,
    pub score: f64,
    pub outcome: Outcome,
}

impl HistoryRecord {
    pub fn new(trial: usize, action: &Action, score: f64, outcome: Outcome) -> Self {
        let args = action.arg_literals();
        Self {
            trial,
            action_index: action.index,
            action: action.name(),
            target: action.subject().to_string(),
            rest_args: py_tuple_repr(&args[1..]),
            score,
            outcome,
        }
    }

    /// `FAILURE: place: bin (0.2, 0.5, 0.03) | score = 0.0158`
    pub fn retune_line(&self) -> String {
        format!(
            "{}: {}: {} {} | score = {}",
            self.outcome.as_str(),
            self.action,
            self.target,
            self.rest_args,
            py_float_repr(self.score)
        )
    }

    /// Replan listings put no space between target and arguments.
    pub fn replan_line(&self) -> String {
        format!(
            "{}: {}: {}{} | score = {}",
            self.outcome.as_str(),
            self.action,
            self.target,
            self.rest_args,
            py_float_repr(self.score)
        )
    }
}

/// Append-only record of every executed action across a run's trials.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParameterHistory {
    records: Vec<HistoryRecord>,
}

impl ParameterHistory {
    pub fn push(&mut self, r: HistoryRecord) {
        self.records.push(r);
    }

    pub fn records(&self) -> &[HistoryRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records of `action` with the given outcome, oldest first.
    pub fn of_action(&self, action: ActionName, outcome: Outcome) -> impl Iterator<Item = &HistoryRecord> {
        self.records.iter().filter(move |r| r.action == action && r.outcome == outcome)
    }

    /// Records with the given outcome ordered by action index, then trial.
    pub fn by_index(&self, outcome: Outcome) -> Vec<&HistoryRecord> {
        let mut v: Vec<&HistoryRecord> = self.records.iter().filter(|r| r.outcome == outcome).collect();
        v.sort_by_key(|r| (r.action_index, r.trial));
        v
    }
}

/// What went wrong in one failed trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceEntry {
    pub trial: usize,
    pub failure_index: usize,
    pub failed_action: ActionName,
    pub current_arguments: String,
    pub motion_score: f64,
    pub failure_reason: String,
}

impl PerformanceEntry {
    pub fn new(trial: usize, action: &Action, motion_score: f64, failure: &Failure) -> Self {
        Self {
            trial,
            failure_index: failure.index,
            failed_action: action.name(),
            current_arguments: py_tuple_repr(&action.arg_literals()),
            motion_score,
            failure_reason: failure_reason(failure),
        }
    }

    fn head(&self) -> String {
        format!(
            "failure index: {}\nfailed action: {}\ncurrent_arguments: {}\nmotion score: {}\nfailure reason: {}",
            self.failure_index,
            self.failed_action,
            self.current_arguments,
            py_float_repr(self.motion_score),
            self.failure_reason
        )
    }
}

fn check_piece(name: CheckName, args: &[Literal], observed: &CheckValue, expected: &Literal) -> String {
    if name == CheckName::CollisionFree {
        if let CheckValue::Label(l) = observed {
            if !l.is_empty() {
                return format!("collision_free() Collision encountered with {l} |");
            }
        }
    }
    let call = if args.is_empty() { format!("{name}()") } else { format!("{name}({})", py_tuple_repr(args)) };
    format!("{call} Observed = {observed} Expected = {expected} |")
}

/// `Action failed due to: <piece> <piece> .` built from the failed checks.
pub fn failure_reason(f: &Failure) -> String {
    let mut pieces: Vec<String> = f.failed.iter().map(|c| check_piece(c.name, &c.args, &c.observed, &c.expected)).collect();
    if let Some(e) = &f.executor_error {
        pieces.push(format!("executor error: {e} |"));
    }
    format!("Action failed due to: {}.", pieces.join(" "))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedbackKind {
    Retune,
    Replan,
}

/// The details block for a retune or replan request.
pub fn render_feedback(entry: &PerformanceEntry, history: &ParameterHistory, kind: FeedbackKind) -> String {
    let mut out = entry.head();
    match kind {
        FeedbackKind::Retune => {
            for (outcome, title) in
                [(Outcome::Failure, "Past failures of this action:"), (Outcome::Success, "Past successes of this action:")]
            {
                let lines: Vec<String> = history.of_action(entry.failed_action, outcome).map(|r| r.retune_line()).collect();
                if !lines.is_empty() {
                    out.push('\n');
                    out.push_str(title);
                    for l in lines {
                        out.push('\n');
                        out.push_str(&l);
                    }
                }
            }
        }
        FeedbackKind::Replan => {
            for (outcome, title) in [(Outcome::Failure, "Past failures:"), (Outcome::Success, "Past successes:")] {
                let lines: Vec<String> = history.by_index(outcome).iter().map(|r| r.replan_line()).collect();
                if !lines.is_empty() {
                    out.push_str("\n\n");
                    out.push_str(title);
                    for l in lines {
                        out.push('\n');
                        out.push_str(&l);
                    }
                }
            }
        }
    }
    out
}
