//! The seven predicate checks and evaluation of one plan entry.

use thiserror::Error;

use crate::kinematics::{forward_kinematics, solve_ik, ArmModel};
use crate::plan::{Action, CheckCall, CheckName, CheckValue, EvalEntry, Grasp, Literal};
use crate::scene::{primitive_distance, LocationKind, WorldState};
use crate::sim::{grasp_frame, ActionOutcome, ExecError, ExecutorConfig};

/// at_location threshold, metres.
pub const AT_LOCATION_DISTANCE: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("invalid target '{0}'")]
    InvalidTarget(String),
    #[error("{name} expects {expected} arguments, got {found}")]
    Arity { name: CheckName, expected: String, found: usize },
    #[error("{name}: bad argument {arg}")]
    BadArgument { name: CheckName, arg: String },
}

impl From<ExecError> for CheckError {
    fn from(e: ExecError) -> Self {
        match e {
            ExecError::InvalidTarget(l) => CheckError::InvalidTarget(l),
            other => CheckError::InvalidTarget(other.to_string()),
        }
    }
}

/// True iff the tool point lies closer than `clearance` to the grasp
/// corridor of `target` (the segment from surface contact out to the
/// approach standoff along the grasp direction).
pub fn can_grasp(
    state: &WorldState,
    arm: &ArmModel,
    target: &str,
    grasp: Grasp,
    clearance: f64,
    cfg: &ExecutorConfig,
) -> Result<bool, CheckError> {
    let frame = grasp_frame(state, target, grasp, cfg)?;
    let tool = forward_kinematics(arm, &state.arm_q).end_effector.translation.vector;
    Ok(frame.corridor_distance(&tool) < clearance)
}

/// True unless fewer than two finger contacts are registered.
pub fn holding(state: &WorldState) -> bool {
    state.gripper.contact_count >= 2
}

/// True iff the sampled primitive-pair distance is below 10 cm.
pub fn at_location(state: &WorldState, obj: &str, loc: &str) -> Result<bool, CheckError> {
    if !state.scene.contains_label(obj) {
        return Err(CheckError::InvalidTarget(obj.to_string()));
    }
    if !state.scene.contains_label(loc) {
        return Err(CheckError::InvalidTarget(loc.to_string()));
    }
    if obj == loc {
        return Ok(true);
    }
    let symbolic = |l: &str| state.scene.location(l).is_some_and(|x| x.kind == LocationKind::Symbolic);
    if symbolic(obj) || symbolic(loc) {
        return Ok(false);
    }
    let (Some(sa), Some(pa), Some(sb), Some(pb)) = (state.shape_of(obj), state.pose_of(obj), state.shape_of(loc), state.pose_of(loc))
    else {
        return Ok(false);
    };
    Ok(primitive_distance((&sa, &pa), (&sb, &pb)) < AT_LOCATION_DISTANCE)
}

/// True iff the pre-grasp pose for `goal` lies in the workspace and IK finds
/// it from the current configuration.
pub fn can_reach(state: &WorldState, arm: &ArmModel, goal: &str, grasp: Grasp, cfg: &ExecutorConfig) -> Result<bool, CheckError> {
    if !state.scene.contains_label(goal) {
        return Err(CheckError::InvalidTarget(goal.to_string()));
    }
    let Some(pose) = state.pose_of(goal) else {
        return Ok(false);
    };
    if !state.scene.workspace.contains(&pose.translation.vector) {
        return Ok(false);
    }
    let frame = grasp_frame(state, goal, grasp, cfg)?;
    if !state.scene.workspace.contains(&frame.standoff) {
        return Ok(false);
    }
    Ok(solve_ik(arm, &frame.standoff_pose(), &state.arm_q, cfg.ik_tol, cfg.ik_iters).is_ok())
}

/// Label of the first body hit, or the empty string.
pub fn collision_free(outcome: &ActionOutcome) -> String {
    outcome.collision.clone().unwrap_or_default()
}

/// True when the action finished in time.
pub fn timeout(outcome: &ActionOutcome) -> bool {
    !outcome.timed_out
}

/// True iff the total motion score is positive and finite.
pub fn check_motion_health(total: f64) -> bool {
    total > 0.0 && total.is_finite()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: CheckName,
    pub args: Vec<Literal>,
    pub observed: CheckValue,
    pub expected: Literal,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntryVerdict {
    pub action_index: i64,
    pub results: Vec<CheckResult>,
    pub success: bool,
}

fn label_arg(call: &CheckCall, i: usize) -> Result<&str, CheckError> {
    match call.args.get(i) {
        Some(Literal::Str(s)) => Ok(s),
        Some(other) => Err(CheckError::BadArgument { name: call.name, arg: other.to_string() }),
        None => Err(CheckError::Arity { name: call.name, expected: "more".into(), found: call.args.len() }),
    }
}

fn grasp_arg(call: &CheckCall, action: &Action) -> Result<Grasp, CheckError> {
    match call.args.get(1) {
        Some(Literal::Str(s)) => {
            Grasp::from_name(s).ok_or_else(|| CheckError::BadArgument { name: call.name, arg: format!("'{s}'") })
        }
        Some(other) => Err(CheckError::BadArgument { name: call.name, arg: other.to_string() }),
        None => Ok(action.grasp().unwrap_or(Grasp::Top)),
    }
}

/// Runs one check against the state after `action`.
pub fn run_check(
    call: &CheckCall,
    action: &Action,
    outcome: &ActionOutcome,
    arm: &ArmModel,
    cfg: &ExecutorConfig,
) -> Result<CheckValue, CheckError> {
    let (lo, hi) = call.name.arity();
    if call.args.len() < lo || call.args.len() > hi {
        let expected = if lo == hi { lo.to_string() } else { format!("{lo}-{hi}") };
        return Err(CheckError::Arity { name: call.name, expected, found: call.args.len() });
    }
    let state = &outcome.end_state;
    Ok(match call.name {
        CheckName::CollisionFree => CheckValue::Label(collision_free(outcome)),
        CheckName::Timeout => CheckValue::Bool(timeout(outcome)),
        CheckName::CheckMotionHealth => CheckValue::Bool(check_motion_health(outcome.motion_score.total)),
        CheckName::Holding => CheckValue::Bool(holding(state)),
        CheckName::CanGrasp => {
            let target = label_arg(call, 0)?;
            let grasp = grasp_arg(call, action)?;
            CheckValue::Bool(can_grasp(state, arm, target, grasp, action.obstacle_clearance().value(), cfg)?)
        }
        CheckName::AtLocation => CheckValue::Bool(at_location(state, label_arg(call, 0)?, label_arg(call, 1)?)?),
        CheckName::CanReach => {
            let goal = label_arg(call, 0)?;
            let grasp = grasp_arg(call, action)?;
            CheckValue::Bool(can_reach(state, arm, goal, grasp, cfg)?)
        }
    })
}

/// Runs every check of `entry` in order and compares with the expectations.
pub fn evaluate_entry(
    entry: &EvalEntry,
    action: &Action,
    outcome: &ActionOutcome,
    arm: &ArmModel,
    cfg: &ExecutorConfig,
) -> Result<EntryVerdict, CheckError> {
    let mut results = Vec::with_capacity(entry.checks.len());
    for (i, call) in entry.checks.iter().enumerate() {
        let observed = run_check(call, action, outcome, arm, cfg)?;
        let expected = entry.expected.get(i).cloned().unwrap_or(Literal::Tuple(vec![]));
        let passed = CheckValue::from_literal(&expected).is_some_and(|e| e == observed);
        results.push(CheckResult { name: call.name, args: call.args.clone(), observed, expected, passed });
    }
    let success = results.iter().all(|r| r.passed) && entry.expected.len() == entry.checks.len();
    Ok(EntryVerdict { action_index: entry.action_index, results, success })
}
