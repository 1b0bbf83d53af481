//! Task plans, evaluation plans and retune patches.

mod literal;
mod parse;
mod validate;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use literal::{parse_literal, py_float_repr, py_str_repr, py_tuple_repr, Literal, Pos};
pub use parse::{parse_evaluation_plan, parse_retune_patch, parse_task_plan};
pub use validate::{validate_plans, Diagnostic, DiagnosticCode, PlanSubject, Severity, ValidationConfig, ValidationReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("format error at {line}:{column}: {message}")]
    Format { line: usize, column: usize, message: String },
    #[error("index mismatch: task_plan[{bracket}] is assigned an action with index {tuple}")]
    IndexMismatch { bracket: i64, tuple: i64 },
}

impl PlanError {
    pub fn position(&self) -> Option<Pos> {
        match self {
            PlanError::Syntax { line, column, .. } | PlanError::Format { line, column, .. } => {
                Some(Pos { line: *line, column: *column })
            }
            PlanError::IndexMismatch { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionName {
    Drop,
    Place,
    Pick,
    Approach,
}

impl ActionName {
    pub const ALL: [ActionName; 4] = [ActionName::Drop, ActionName::Place, ActionName::Pick, ActionName::Approach];

    pub fn as_str(self) -> &'static str {
        match self {
            ActionName::Drop => "drop",
            ActionName::Place => "place",
            ActionName::Pick => "pick",
            ActionName::Approach => "approach",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.as_str() == s)
    }

    /// Argument names in positional order.
    pub fn arg_names(self) -> &'static [&'static str] {
        match self {
            ActionName::Drop => &["location", "speed", "obstacle_clearance"],
            ActionName::Place => &["location", "orientation", "speed", "obstacle_clearance"],
            ActionName::Pick | ActionName::Approach => &["target", "speed", "obstacle_clearance", "grasp"],
        }
    }
}

impl fmt::Display for ActionName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Grasp {
    Top,
    Side,
}

impl Grasp {
    pub fn as_str(self) -> &'static str {
        match self {
            Grasp::Top => "top",
            Grasp::Side => "side",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "top" => Some(Grasp::Top),
            "side" => Some(Grasp::Side),
            _ => None,
        }
    }
}

impl fmt::Display for Grasp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A numeric argument that remembers whether it was written as an integer,
/// so `0` and `0.0` render back the way they were written.
#[derive(Debug, Clone, Copy)]
pub enum Num {
    Int(i64),
    Float(f64),
}

impl Num {
    pub fn value(self) -> f64 {
        match self {
            Num::Int(v) => v as f64,
            Num::Float(v) => v,
        }
    }

    pub fn to_literal(self) -> Literal {
        match self {
            Num::Int(v) => Literal::Int(v),
            Num::Float(v) => Literal::Float(v),
        }
    }
}

impl From<f64> for Num {
    fn from(v: f64) -> Self {
        Num::Float(v)
    }
}

impl PartialEq for Num {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Num::Int(a), Num::Int(b)) => a == b,
            (Num::Float(a), Num::Float(b)) => a.to_bits() == b.to_bits() || a == b,
            _ => false,
        }
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Num::Int(v) => write!(f, "{v}"),
            Num::Float(v) => f.write_str(&py_float_repr(*v)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraspArgs {
    pub target: String,
    pub speed: Num,
    pub obstacle_clearance: Num,
    pub grasp: Grasp,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ActionArgs {
    Drop { location: String, speed: Num, obstacle_clearance: Num },
    Place { location: String, orientation: Num, speed: Num, obstacle_clearance: Num },
    Pick(GraspArgs),
    Approach(GraspArgs),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Action {
    pub index: usize,
    pub args: ActionArgs,
}

impl Action {
    pub fn name(&self) -> ActionName {
        match self.args {
            ActionArgs::Drop { .. } => ActionName::Drop,
            ActionArgs::Place { .. } => ActionName::Place,
            ActionArgs::Pick(_) => ActionName::Pick,
            ActionArgs::Approach(_) => ActionName::Approach,
        }
    }

    /// The object or location label the action refers to.
    pub fn subject(&self) -> &str {
        match &self.args {
            ActionArgs::Drop { location, .. } | ActionArgs::Place { location, .. } => location,
            ActionArgs::Pick(g) | ActionArgs::Approach(g) => &g.target,
        }
    }

    pub fn speed(&self) -> Num {
        match &self.args {
            ActionArgs::Drop { speed, .. } | ActionArgs::Place { speed, .. } => *speed,
            ActionArgs::Pick(g) | ActionArgs::Approach(g) => g.speed,
        }
    }

    pub fn obstacle_clearance(&self) -> Num {
        match &self.args {
            ActionArgs::Drop { obstacle_clearance, .. } | ActionArgs::Place { obstacle_clearance, .. } => {
                *obstacle_clearance
            }
            ActionArgs::Pick(g) | ActionArgs::Approach(g) => g.obstacle_clearance,
        }
    }

    pub fn orientation(&self) -> Option<Num> {
        match &self.args {
            ActionArgs::Place { orientation, .. } => Some(*orientation),
            _ => None,
        }
    }

    pub fn grasp(&self) -> Option<Grasp> {
        match &self.args {
            ActionArgs::Pick(g) | ActionArgs::Approach(g) => Some(g.grasp),
            _ => None,
        }
    }

    /// Positional argument tuple, as written in the plan.
    pub fn arg_literals(&self) -> Vec<Literal> {
        match &self.args {
            ActionArgs::Drop { location, speed, obstacle_clearance } => {
                vec![Literal::Str(location.clone()), speed.to_literal(), obstacle_clearance.to_literal()]
            }
            ActionArgs::Place { location, orientation, speed, obstacle_clearance } => vec![
                Literal::Str(location.clone()),
                orientation.to_literal(),
                speed.to_literal(),
                obstacle_clearance.to_literal(),
            ],
            ActionArgs::Pick(g) | ActionArgs::Approach(g) => vec![
                Literal::Str(g.target.clone()),
                g.speed.to_literal(),
                g.obstacle_clearance.to_literal(),
                Literal::Str(g.grasp.as_str().to_string()),
            ],
        }
    }

    /// `(2, 'place', ('large red trash can', 0.2, 0.5, 0.03))`
    pub fn to_literal_string(&self) -> String {
        format!("({}, {}, {})", self.index, py_str_repr(self.name().as_str()), py_tuple_repr(&self.arg_literals()))
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_literal_string())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TaskPlan {
    pub actions: Vec<Action>,
}

impl TaskPlan {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// Replaces the action at the patch index. The action name must not change.
    pub fn apply_patch(&mut self, patch: &RetunePatch) -> Result<(), PatchError> {
        let slot = self
            .actions
            .iter_mut()
            .find(|a| a.index == patch.action_index)
            .ok_or(PatchError::NoSuchIndex(patch.action_index))?;
        if slot.name() != patch.replacement.name() {
            return Err(PatchError::NameChanged {
                index: patch.action_index,
                from: slot.name(),
                to: patch.replacement.name(),
            });
        }
        *slot = patch.replacement.clone();
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatchError {
    #[error("the plan has no action with index {0}")]
    NoSuchIndex(usize),
    #[error("patch for index {index} changes the action from {from} to {to}")]
    NameChanged { index: usize, from: ActionName, to: ActionName },
}

/// Renders a plan as a plan literal. One action stays on a single line;
/// longer plans get one action per line.
pub fn serialize_task_plan(tp: &TaskPlan) -> String {
    match tp.actions.as_slice() {
        [] => "task_plan = []".to_string(),
        [one] => format!("task_plan = [{one}]"),
        many => {
            let mut out = String::from("task_plan = [\n");
            for a in many {
                out.push_str("    ");
                out.push_str(&a.to_literal_string());
                out.push_str(",\n");
            }
            out.push(']');
            out
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CheckName {
    CollisionFree,
    Timeout,
    CheckMotionHealth,
    CanGrasp,
    Holding,
    AtLocation,
    CanReach,
}

impl CheckName {
    pub const ALL: [CheckName; 7] = [
        CheckName::CollisionFree,
        CheckName::Timeout,
        CheckName::CheckMotionHealth,
        CheckName::CanGrasp,
        CheckName::Holding,
        CheckName::AtLocation,
        CheckName::CanReach,
    ];

    pub const MANDATORY: [CheckName; 3] = [CheckName::CollisionFree, CheckName::Timeout, CheckName::CheckMotionHealth];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckName::CollisionFree => "collision_free",
            CheckName::Timeout => "timeout",
            CheckName::CheckMotionHealth => "check_motion_health",
            CheckName::CanGrasp => "can_grasp",
            CheckName::Holding => "holding",
            CheckName::AtLocation => "at_location",
            CheckName::CanReach => "can_reach",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.as_str() == s)
    }

    /// Accepted argument counts, inclusive. can_grasp and can_reach take an
    /// optional trailing grasp direction.
    pub fn arity(self) -> (usize, usize) {
        match self {
            CheckName::CollisionFree | CheckName::Timeout | CheckName::CheckMotionHealth | CheckName::Holding => (0, 0),
            CheckName::CanGrasp | CheckName::CanReach => (1, 2),
            CheckName::AtLocation => (2, 2),
        }
    }

    /// collision_free returns a label; everything else a boolean.
    pub fn returns_label(self) -> bool {
        self == CheckName::CollisionFree
    }
}

impl fmt::Display for CheckName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Output of a check: a boolean, or a label for collision_free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckValue {
    Bool(bool),
    Label(String),
}

impl CheckValue {
    pub fn from_literal(lit: &Literal) -> Option<Self> {
        match lit {
            Literal::Bool(b) => Some(CheckValue::Bool(*b)),
            Literal::Str(s) => Some(CheckValue::Label(s.clone())),
            _ => None,
        }
    }

    pub fn to_literal(&self) -> Literal {
        match self {
            CheckValue::Bool(b) => Literal::Bool(*b),
            CheckValue::Label(s) => Literal::Str(s.clone()),
        }
    }
}

impl fmt::Display for CheckValue {
    /// Python repr: `True`, `''`, `'glass'`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_literal())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckCall {
    pub name: CheckName,
    pub args: Vec<Literal>,
}

impl CheckCall {
    /// String arguments; non-string arguments are skipped.
    pub fn labels(&self) -> Vec<&str> {
        self.args
            .iter()
            .filter_map(|a| match a {
                Literal::Str(s) => Some(s.as_str()),
                _ => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalEntry {
    pub action_index: i64,
    pub checks: Vec<CheckCall>,
    pub expected: Vec<Literal>,
}

impl EvalEntry {
    pub fn check(&self, name: CheckName) -> Option<&CheckCall> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvaluationPlan {
    pub entries: Vec<EvalEntry>,
}

impl EvaluationPlan {
    pub fn entry_for(&self, index: usize) -> Option<&EvalEntry> {
        self.entries.iter().find(|e| e.action_index == index as i64)
    }
}

pub fn serialize_evaluation_plan(ep: &EvaluationPlan) -> String {
    if ep.entries.is_empty() {
        return "evaluation_plan = []".to_string();
    }
    let mut out = String::from("evaluation_plan = [\n");
    for e in &ep.entries {
        let checks: Vec<String> =
            e.checks.iter().map(|c| format!("{}: {}", py_str_repr(c.name.as_str()), py_tuple_repr(&c.args))).collect();
        out.push_str(&format!("    ({}, {{{}}}, {}),\n", e.action_index, checks.join(", "), py_tuple_repr(&e.expected)));
    }
    out.push(']');
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetunePatch {
    pub action_index: usize,
    pub replacement: Action,
}

impl fmt::Display for RetunePatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "task_plan[{}] = {}", self.action_index, self.replacement)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn place(index: usize, loc: &str, o: f64, s: f64, c: f64) -> Action {
        Action {
            index,
            args: ActionArgs::Place { location: loc.into(), orientation: o.into(), speed: s.into(), obstacle_clearance: c.into() },
        }
    }

    #[test]
    fn action_literal_rendering() {
        let a = place(2, "large red trash can", 0.2, 0.5, 0.03);
        assert_eq!(a.to_string(), "(2, 'place', ('large red trash can', 0.2, 0.5, 0.03))");
    }

    #[test]
    fn int_written_args_render_as_ints() {
        let a = Action {
            index: 2,
            args: ActionArgs::Place {
                location: "large red trash can".into(),
                orientation: Num::Int(0),
                speed: 0.3.into(),
                obstacle_clearance: 0.08.into(),
            },
        };
        assert_eq!(a.to_string(), "(2, 'place', ('large red trash can', 0, 0.3, 0.08))");
        assert_ne!(Num::Int(0), Num::Float(0.0));
    }

    #[test]
    fn patch_rejects_name_change() {
        let mut tp = TaskPlan { actions: vec![place(0, "sink", 0.5, 0.5, 0.01)] };
        let patch = RetunePatch {
            action_index: 0,
            replacement: Action {
                index: 0,
                args: ActionArgs::Drop { location: "sink".into(), speed: 0.5.into(), obstacle_clearance: 0.01.into() },
            },
        };
        assert!(matches!(tp.apply_patch(&patch), Err(PatchError::NameChanged { .. })));
        let ok = RetunePatch { action_index: 0, replacement: place(0, "sink", 0.1, 0.5, 0.01) };
        tp.apply_patch(&ok).unwrap();
        assert_eq!(tp.actions[0].orientation().unwrap().value(), 0.1);
    }

    #[test]
    fn single_action_serializes_on_one_line() {
        let tp = TaskPlan { actions: vec![place(0, "sink", 0.5, 0.5, 0.005)] };
        let text = serialize_task_plan(&tp);
        assert_eq!(text, "task_plan = [(0, 'place', ('sink', 0.5, 0.5, 0.005))]");
    }
}
