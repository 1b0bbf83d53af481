//! Action execution: joint-space linear dynamics with clearance modulation,
//! grasp/release bookkeeping and spill tracking.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Isometry3, Translation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checks::{evaluate_entry, CheckResult, EntryVerdict};
use crate::kinematics::{
    dexterity_at, forward_kinematics, look_rotation, point_jacobian, solve_ik_best_effort, ArmModel, Fk, IkTolerance,
    JointConfig, Pose,
};
use crate::plan::{Action, ActionArgs, CheckName, EvalEntry, EvaluationPlan, Grasp, TaskPlan};
use crate::scene::{clearance_with_fk, distance_gradient, primitive_distance, signed_distance_at, workspace_diameter_bound, Exclusions, LocationKind, WorldState};
use crate::scoring::{external_from_clearances, MotionScore};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExecError {
    #[error("invalid target '{0}'")]
    InvalidTarget(String),
    #[error("{0} needs a held object but the gripper is empty")]
    NotHolding(String),
    #[error("pick while already holding '{0}'")]
    AlreadyHolding(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExecutorConfig {
    /// Integration step, seconds.
    pub dt: f64,
    /// Simulated seconds before an action counts as timed out.
    pub timeout_limit: f64,
    /// Joint velocity bound (2-norm, rad/s) at speed 1.
    pub max_joint_speed: f64,
    /// Proportional gain (1/s) at speed 1.
    pub gain: f64,
    /// Joint-space distance at which the goal counts as reached.
    pub goal_tol_q: f64,
    pub ik_tol: IkTolerance,
    pub ik_iters: usize,
    /// Track container tilt and mark spills.
    pub spill_model: bool,
    /// Extra standoff beyond the bounding radius for approach, metres.
    pub approach_margin: f64,
    /// Height of the held object above the location top for drop, metres.
    pub hover_height: f64,
    /// Vertical lift of the tool before carrying a held object, metres.
    pub lift_height: f64,
    /// Pick only moves if the tool starts this close to the grasp corridor.
    pub pick_reach: f64,
    /// Downward pitch of the tool for side grasps, radians.
    pub side_pitch: f64,
    pub modulation_passes: usize,
}

impl Default for ExecutorConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            timeout_limit: 30.0,
            max_joint_speed: 1.5,
            gain: 2.0,
            goal_tol_q: 1e-3,
            ik_tol: IkTolerance::default(),
            ik_iters: 200,
            spill_model: true,
            approach_margin: 0.05,
            hover_height: 0.15,
            lift_height: 0.10,
            pick_reach: 0.10,
            side_pitch: 30f64.to_radians(),
            modulation_passes: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub q: [f64; 7],
    /// Smallest arm clearance at this sample (exclusions applied).
    pub clearance: f64,
    pub delta: f64,
}

impl Sample {
    pub fn config(&self) -> JointConfig {
        JointConfig::from_column_slice(&self.q)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub dt: f64,
    pub samples: Vec<Sample>,
}

impl Trajectory {
    /// `t,q1..q7,clearance,delta` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,q1,q2,q3,q4,q5,q6,q7,clearance,delta\n");
        for s in &self.samples {
            let q: Vec<String> = s.q.iter().map(|v| v.to_string()).collect();
            out.push_str(&format!("{},{},{},{}\n", s.t, q.join(","), s.clearance, s.delta));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionOutcome {
    pub trajectory: Trajectory,
    pub collision: Option<String>,
    pub timed_out: bool,
    pub motion_score: MotionScore,
    pub end_state: WorldState,
    /// Bodies ignored for collision and clearance during this action.
    pub exclusions: Exclusions,
}

/// Where the tool goes to grasp an object from a given direction.
#[derive(Debug, Clone, PartialEq)]
pub struct GraspFrame {
    /// Unit direction the tool points along.
    pub dir: Vector3<f64>,
    /// Tool point touching the object surface.
    pub contact: Vector3<f64>,
    /// Tool point at the approach standoff.
    pub standoff: Vector3<f64>,
    pub rotation: UnitQuaternion<f64>,
}

impl GraspFrame {
    pub fn contact_pose(&self) -> Pose {
        Isometry3::from_parts(Translation3::from(self.contact), self.rotation)
    }

    pub fn standoff_pose(&self) -> Pose {
        Isometry3::from_parts(Translation3::from(self.standoff), self.rotation)
    }

    /// Distance from `p` to the segment between contact and standoff.
    pub fn corridor_distance(&self, p: &Vector3<f64>) -> f64 {
        let ab = self.standoff - self.contact;
        let len2 = ab.norm_squared();
        let t = if len2 > 0.0 { ((p - self.contact).dot(&ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
        (p - (self.contact + ab * t)).norm()
    }
}

/// Grasp geometry for any labelled body from the robot's point of view.
pub fn grasp_frame(state: &WorldState, label: &str, grasp: Grasp, cfg: &ExecutorConfig) -> Result<GraspFrame, ExecError> {
    let pose = state.pose_of(label).ok_or_else(|| ExecError::InvalidTarget(label.to_string()))?;
    let shape = state.shape_of(label).ok_or_else(|| ExecError::InvalidTarget(label.to_string()))?;
    let c = pose.translation.vector;
    let base = state.scene.robot_base.translation.vector;
    let mut bearing = Vector3::new(c.x - base.x, c.y - base.y, 0.0);
    if bearing.norm() < 1e-9 {
        bearing = Vector3::x();
    }
    let bearing = bearing.normalize();
    let (dir, hint) = match grasp {
        Grasp::Top => (-Vector3::z(), bearing),
        Grasp::Side => (bearing * cfg.side_pitch.cos() - Vector3::z() * cfg.side_pitch.sin(), -Vector3::z()),
    };
    let out = -dir;
    let local_out = pose.rotation.inverse() * out;
    let contact = c + out * shape.extent_along(&local_out);
    let standoff = c + out * (shape.bounding_radius() + cfg.approach_margin);
    Ok(GraspFrame { dir, contact, standoff, rotation: look_rotation(&dir, &hint) })
}

/// Top-centre of a location's geometry.
fn location_top(state: &WorldState, label: &str) -> Result<Vector3<f64>, ExecError> {
    let invalid = || ExecError::InvalidTarget(label.to_string());
    if let Some(loc) = state.scene.location(label) {
        if loc.kind == LocationKind::Symbolic {
            return Err(invalid());
        }
    }
    let pose = state.pose_of(label).ok_or_else(invalid)?;
    let shape = state.shape_of(label).ok_or_else(invalid)?;
    let up = pose.rotation.inverse() * Vector3::z();
    Ok(pose.translation.vector + Vector3::z() * shape.extent_along(&up))
}

fn bearing(state: &WorldState, p: &Vector3<f64>) -> f64 {
    let d = p - state.scene.robot_base.translation.vector;
    d.y.atan2(d.x)
}

/// Pose of `label` resting upright with its bottom at `top` plus `lift`.
/// The object keeps the yaw it has relative to the robot's line of sight,
/// so the hand turns with the base instead of twisting the wrist.
fn resting_pose(state: &WorldState, label: &str, top: &Vector3<f64>, lift: f64) -> Pose {
    let obj = state.scene.object(label).expect("held objects are scene objects");
    let up = obj.pose.rotation.inverse() * Vector3::z();
    let centre = top + Vector3::z() * (obj.shape.extent_along(&up) + lift);
    let from = state.pose_of(label).map_or(obj.pose.translation.vector, |p| p.translation.vector);
    let yaw = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), bearing(state, top) - bearing(state, &from));
    Isometry3::from_parts(Translation3::from(centre), yaw * obj.pose.rotation)
}

fn tilt_of(pose: &Pose) -> f64 {
    (pose.rotation * Vector3::z()).dot(&Vector3::z()).clamp(-1.0, 1.0).acos()
}

struct Motion {
    trajectory: Trajectory,
    collision: Option<String>,
    reached: bool,
    end_q: JointConfig,
    max_tilt: f64,
}

struct MotionSpec<'a> {
    /// Joint targets visited in order; the last one is the goal.
    waypoints: Vec<JointConfig>,
    goal_valid: bool,
    speed: f64,
    clearance: f64,
    ex: &'a Exclusions,
}

/// Depth below which a carried object counts as penetrating another body.
/// Resting contact measures as zero up to rounding.
pub const CONTACT_TOLERANCE: f64 = 1e-6;

/// Deepest body the carried object penetrates, if any.
pub fn held_penetration(state: &WorldState, held: &str, ex: &Exclusions) -> Option<(f64, String)> {
    let shape = state.shape_of(held)?;
    let pose = state.pose_of(held)?;
    let mut best: Option<(f64, String)> = None;
    for (label, other, other_pose) in state.bodies() {
        if label == held || ex.all.contains(label) {
            continue;
        }
        let d = primitive_distance((&shape, &pose), (other, &other_pose));
        if d < -CONTACT_TOLERANCE && best.as_ref().is_none_or(|b| d < b.0) {
            best = Some((d, label.to_string()));
        }
    }
    best
}

fn sample_at(
    state: &WorldState,
    arm: &ArmModel,
    fk: &Fk,
    q: &JointConfig,
    ex: &Exclusions,
    held: Option<&str>,
    t: f64,
) -> (Sample, Option<String>) {
    let c = clearance_with_fk(state, arm, fk, ex).ok();
    let clearance = c.as_ref().map_or(f64::INFINITY, |c| c.distance);
    let mut hit = c.filter(|c| c.distance < 0.0).map(|c| c.label);
    if hit.is_none() {
        hit = held.and_then(|h| held_penetration(state, h, ex)).map(|(_, l)| l);
    }
    let s = Sample { t, q: (*q).into(), clearance, delta: dexterity_at(arm, q) };
    (s, hit)
}

/// Removes velocity components that push an arm sphere toward a body that
/// is already closer than `margin`.
fn modulate(state: &WorldState, arm: &ArmModel, fk: &Fk, v: &mut JointConfig, margin: f64, ex: &Exclusions, passes: usize) {
    if margin <= 0.0 {
        return;
    }
    let bodies: Vec<_> = state.bodies().collect();
    let mut rows = Vec::new();
    for (body, centre, radius) in fk.body_spheres(arm) {
        for (label, shape, pose) in &bodies {
            if ex.excludes(body, label) {
                continue;
            }
            let d = signed_distance_at(&centre, shape, pose) - radius;
            if d < margin {
                let n = distance_gradient(&centre, shape, pose);
                let jp = point_jacobian(fk, body, &centre);
                let g = (n.transpose() * jp).transpose();
                if g.norm_squared() > 1e-18 {
                    rows.push(g);
                }
            }
        }
    }
    for _ in 0..passes {
        for g in &rows {
            let gv = g.dot(v);
            if gv < 0.0 {
                *v -= g * (gv / g.norm_squared());
            }
        }
    }
}

fn integrate(state: &WorldState, arm: &ArmModel, spec: &MotionSpec, cfg: &ExecutorConfig) -> Motion {
    let mut st = state.clone();
    let mut q = state.arm_q;
    let mut t = 0.0;
    let held = st.gripper.attached.clone().zip(st.gripper.grasp_transform);
    let mut fk = forward_kinematics(arm, &q);
    let track = |st: &mut WorldState, fk: &Fk| -> f64 {
        match &held {
            Some((label, g)) => {
                let p = fk.end_effector * g;
                st.object_poses.insert(label.clone(), p);
                tilt_of(&p)
            }
            None => 0.0,
        }
    };
    let mut max_tilt = track(&mut st, &fk);
    let held_label = held.as_ref().map(|(l, _)| l.as_str());
    let (first, mut collision) = sample_at(&st, arm, &fk, &q, spec.ex, held_label, t);
    let mut samples = vec![first];
    let steps_allowed = (cfg.timeout_limit / cfg.dt).round() as usize;
    let vmax = spec.speed * cfg.max_joint_speed;
    let k = spec.speed * cfg.gain;
    let mut joint_reached = false;
    let mut w = 0;

    for step in 1..=steps_allowed {
        while w + 1 < spec.waypoints.len() && (q - spec.waypoints[w]).norm() < cfg.goal_tol_q {
            w += 1;
        }
        let goal = spec.waypoints[w];
        if w + 1 == spec.waypoints.len() && (q - goal).norm() < cfg.goal_tol_q {
            joint_reached = true;
            break;
        }
        let mut v = (goal - q) * k;
        let n = v.norm();
        if n > vmax {
            v *= vmax / n;
        }
        modulate(&st, arm, &fk, &mut v, spec.clearance, spec.ex, cfg.modulation_passes);
        q = arm.clamp(&(q + v * cfg.dt));
        t = step as f64 * cfg.dt;
        fk = forward_kinematics(arm, &q);
        max_tilt = max_tilt.max(track(&mut st, &fk));
        let (s, hit) = sample_at(&st, arm, &fk, &q, spec.ex, held_label, t);
        samples.push(s);
        if collision.is_none() {
            collision = hit;
        }
    }
    let last = spec.waypoints[spec.waypoints.len() - 1];
    if !joint_reached && w + 1 == spec.waypoints.len() && (q - last).norm() < cfg.goal_tol_q {
        joint_reached = true;
    }
    if samples.len() < 2 {
        let mut s = samples[0].clone();
        s.t = cfg.dt;
        samples.push(s);
    }
    Motion {
        trajectory: Trajectory { dt: cfg.dt, samples },
        collision,
        reached: joint_reached && spec.goal_valid,
        end_q: q,
        max_tilt,
    }
}

fn score(traj: &Trajectory, d_bar: f64) -> MotionScore {
    let (mi, i) = traj
        .samples
        .iter()
        .enumerate()
        .fold((f64::INFINITY, 0), |b, (k, s)| if s.delta < b.0 { (s.delta, k) } else { b });
    let (me, j) = external_from_clearances(traj.samples.iter().map(|s| s.clearance), d_bar);
    MotionScore::new(mi, me, i, j)
}

fn plan_goal(state: &WorldState, arm: &ArmModel, target: &Pose, cfg: &ExecutorConfig) -> (JointConfig, bool) {
    let r = solve_ik_best_effort(arm, target, &state.arm_q, cfg.ik_tol, cfg.ik_iters);
    (r.q, r.converged)
}

/// Joint targets for a carrying motion: straight up by `lift_height` from
/// the current tool pose, then to `target`.
fn carry_waypoints(state: &WorldState, arm: &ArmModel, target: &Pose, cfg: &ExecutorConfig) -> (Vec<JointConfig>, bool) {
    let tool = forward_kinematics(arm, &state.arm_q).end_effector;
    let lifted = Translation3::new(0.0, 0.0, cfg.lift_height) * tool;
    let up = solve_ik_best_effort(arm, &lifted, &state.arm_q, cfg.ik_tol, cfg.ik_iters);
    let seed = if up.converged { up.q } else { state.arm_q };
    let goal = solve_ik_best_effort(arm, target, &seed, cfg.ik_tol, cfg.ik_iters);
    if up.converged {
        (vec![up.q, goal.q], goal.converged)
    } else {
        (vec![goal.q], goal.converged)
    }
}

/// Runs one action from `state`.
pub fn execute_action(state: &WorldState, arm: &ArmModel, a: &Action, cfg: &ExecutorConfig) -> Result<ActionOutcome, ExecError> {
    let d_bar = workspace_diameter_bound(&state.scene);
    let speed = a.speed().value().clamp(0.0, 1.0);
    let clearance = a.obstacle_clearance().value().max(0.0);
    let subject = a.subject();
    if !state.scene.contains_label(subject) {
        return Err(ExecError::InvalidTarget(subject.to_string()));
    }
    let mut ex = Exclusions::default();
    if let Some(h) = &state.gripper.attached {
        ex.all.insert(h.clone());
    }

    let finish = |motion: Motion, mut end: WorldState, ex: Exclusions| -> ActionOutcome {
        end.arm_q = motion.end_q;
        end.sim_time += motion.trajectory.samples.last().map_or(0.0, |s| s.t);
        let motion_score = score(&motion.trajectory, d_bar);
        ActionOutcome {
            motion_score,
            timed_out: !motion.reached,
            collision: motion.collision,
            trajectory: motion.trajectory,
            end_state: end,
            exclusions: ex,
        }
    };

    match &a.args {
        ActionArgs::Approach(g) => {
            let frame = grasp_frame(state, &g.target, g.grasp, cfg)?;
            ex.gripper_only.insert(g.target.clone());
            let (goal, ok) = plan_goal(state, arm, &frame.standoff_pose(), cfg);
            let spec = MotionSpec { waypoints: vec![goal], goal_valid: ok, speed, clearance, ex: &ex };
            let m = integrate(state, arm, &spec, cfg);
            let end = carry_end(state, arm, &m);
            Ok(finish(m, end, ex))
        }
        ActionArgs::Pick(g) => {
            if let Some(h) = &state.gripper.attached {
                return Err(ExecError::AlreadyHolding(h.clone()));
            }
            let obj = state.scene.object(&g.target).ok_or_else(|| ExecError::InvalidTarget(g.target.clone()))?;
            let frame = grasp_frame(state, &g.target, g.grasp, cfg)?;
            ex.gripper_only.insert(g.target.clone());
            let tool = forward_kinematics(arm, &state.arm_q).end_effector.translation.vector;
            if frame.corridor_distance(&tool) >= cfg.pick_reach {
                // Out of reach: the hand closes on nothing where it is.
                let spec = MotionSpec { waypoints: vec![state.arm_q], goal_valid: true, speed, clearance, ex: &ex };
                let m = integrate(state, arm, &spec, cfg);
                let mut end = state.clone();
                end.gripper.closed = true;
                end.gripper.contact_count = 0;
                return Ok(finish(m, end, ex));
            }
            let (goal, ok) = plan_goal(state, arm, &frame.contact_pose(), cfg);
            let spec = MotionSpec { waypoints: vec![goal], goal_valid: ok, speed, clearance, ex: &ex };
            let m = integrate(state, arm, &spec, cfg);
            let mut end = state.clone();
            end.arm_q = m.end_q;
            let tool_end = forward_kinematics(arm, &m.end_q).end_effector;
            let within = frame.corridor_distance(&tool_end.translation.vector) < clearance;
            end.gripper.closed = true;
            if within && obj.graspable(g.grasp) {
                end.gripper.contact_count = 2;
                end.gripper.attached = Some(g.target.clone());
                end.gripper.grasp_transform = Some(tool_end.inverse() * state.object_poses[&g.target]);
            } else {
                end.gripper.contact_count = 1;
            }
            Ok(finish(m, end, ex))
        }
        ActionArgs::Place { location, orientation, .. } => {
            let held = state.gripper.attached.clone().ok_or_else(|| ExecError::NotHolding("place".into()))?;
            if *location == held {
                return Err(ExecError::InvalidTarget(location.clone()));
            }
            let top = location_top(state, location)?;
            let rest = resting_pose(state, &held, &top, 0.0);
            let tool_goal = rest * state.gripper.grasp_transform.expect("attached implies transform").inverse();
            let (waypoints, ok) = carry_waypoints(state, arm, &tool_goal, cfg);
            let spec = MotionSpec { waypoints, goal_valid: ok, speed, clearance, ex: &ex };
            let m = integrate(state, arm, &spec, cfg);
            let mut end = carry_end(state, arm, &m);
            spill(&mut end, &held, m.max_tilt, orientation.value(), cfg);
            if m.reached {
                end.object_poses.insert(held.clone(), rest);
            }
            release(&mut end);
            Ok(finish(m, end, ex))
        }
        ActionArgs::Drop { location, .. } => {
            let held = state.gripper.attached.clone().ok_or_else(|| ExecError::NotHolding("drop".into()))?;
            if *location == held {
                return Err(ExecError::InvalidTarget(location.clone()));
            }
            let top = location_top(state, location)?;
            let hover = resting_pose(state, &held, &top, cfg.hover_height);
            let tool_goal = hover * state.gripper.grasp_transform.expect("attached implies transform").inverse();
            let (waypoints, ok) = carry_waypoints(state, arm, &tool_goal, cfg);
            let spec = MotionSpec { waypoints, goal_valid: ok, speed, clearance, ex: &ex };
            let m = integrate(state, arm, &spec, cfg);
            let mut end = carry_end(state, arm, &m);
            spill(&mut end, &held, m.max_tilt, 0.0, cfg);
            if m.reached {
                end.object_poses.insert(held.clone(), resting_pose(state, &held, &top, 0.0));
            }
            release(&mut end);
            Ok(finish(m, end, ex))
        }
    }
}

/// End state after a motion with the held object following the tool.
fn carry_end(state: &WorldState, arm: &ArmModel, m: &Motion) -> WorldState {
    let mut end = state.clone();
    end.arm_q = m.end_q;
    if let (Some(label), Some(g)) = (&state.gripper.attached, state.gripper.grasp_transform) {
        end.object_poses.insert(label.clone(), forward_kinematics(arm, &m.end_q).end_effector * g);
    }
    end
}

fn release(end: &mut WorldState) {
    end.gripper.closed = false;
    end.gripper.contact_count = 0;
    end.gripper.attached = None;
    end.gripper.grasp_transform = None;
}

/// Marks a held container spilled if its tilt, bounded by what the
/// orientation parameter permits, exceeded its limit.
fn spill(end: &mut WorldState, held: &str, max_tilt: f64, orientation: f64, cfg: &ExecutorConfig) {
    if !cfg.spill_model {
        return;
    }
    let Some(c) = end.scene.object(held).and_then(|o| o.container.clone()) else {
        return;
    };
    let allowed = (1.0 - orientation.clamp(0.0, 1.0)) * FRAC_PI_2;
    let effective = max_tilt.min(allowed);
    if effective > c.spill_tilt_limit {
        end.spilled.insert(held.to_string());
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionRecord {
    pub index: usize,
    pub outcome: ActionOutcome,
    pub verdict: EntryVerdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub index: usize,
    /// Checks whose observation differed from the expectation.
    pub failed: Vec<CheckResult>,
    pub executor_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionReport {
    pub records: Vec<ActionRecord>,
    pub first_failure: Option<Failure>,
    pub final_state: WorldState,
}

impl ExecutionReport {
    pub fn scores(&self) -> Vec<MotionScore> {
        self.records.iter().map(|r| r.outcome.motion_score).collect()
    }

    pub fn success(&self) -> bool {
        self.first_failure.is_none()
    }
}

fn mandatory_entry(index: usize) -> EvalEntry {
    use crate::plan::{CheckCall, Literal};
    EvalEntry {
        action_index: index as i64,
        checks: CheckName::MANDATORY.iter().map(|&name| CheckCall { name, args: vec![] }).collect(),
        expected: vec![Literal::Str(String::new()), Literal::Bool(true), Literal::Bool(true)],
    }
}

/// Executes the plan in order, checking each action's entry, and stops at
/// the first action whose checks disagree with their expectations.
pub fn run_plan(tp: &TaskPlan, ep: &EvaluationPlan, s0: &WorldState, arm: &ArmModel, cfg: &ExecutorConfig) -> ExecutionReport {
    let mut state = s0.clone();
    let mut records = Vec::with_capacity(tp.len());
    for a in &tp.actions {
        let outcome = match execute_action(&state, arm, a, cfg) {
            Ok(o) => o,
            Err(e) => {
                return ExecutionReport {
                    records,
                    first_failure: Some(Failure { index: a.index, failed: vec![], executor_error: Some(e.to_string()) }),
                    final_state: state,
                }
            }
        };
        let fallback;
        let entry = match ep.entry_for(a.index) {
            Some(e) => e,
            None => {
                fallback = mandatory_entry(a.index);
                &fallback
            }
        };
        let verdict = match evaluate_entry(entry, a, &outcome, arm, cfg) {
            Ok(v) => v,
            Err(e) => {
                return ExecutionReport {
                    records,
                    first_failure: Some(Failure { index: a.index, failed: vec![], executor_error: Some(e.to_string()) }),
                    final_state: state,
                }
            }
        };
        state = outcome.end_state.clone();
        let success = verdict.success;
        let failed: Vec<CheckResult> = verdict.results.iter().filter(|r| !r.passed).cloned().collect();
        records.push(ActionRecord { index: a.index, outcome, verdict });
        if !success {
            return ExecutionReport {
                records,
                first_failure: Some(Failure { index: a.index, failed, executor_error: None }),
                final_state: state,
            };
        }
    }
    ExecutionReport { records, first_failure: None, final_state: state }
}
