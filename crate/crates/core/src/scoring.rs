//! Motion quality scores: internal (dexterity), external (clearance),
//! their sum, and plan-level aggregates.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::{dexterity_at, forward_kinematics, ArmModel, JointConfig};
use crate::scene::{clearance_with_fk, Exclusions, WorldState};
use crate::sim::Trajectory;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScoringError {
    #[error("cannot score an empty list")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionScore {
    pub internal: f64,
    pub external: f64,
    pub total: f64,
    pub min_delta_sample: usize,
    pub min_clearance_sample: usize,
}

impl MotionScore {
    pub fn new(internal: f64, external: f64, min_delta_sample: usize, min_clearance_sample: usize) -> Self {
        Self { internal, external, total: internal + external, min_delta_sample, min_clearance_sample }
    }

    /// A score supplied from outside the simulator, carried entirely as M_I.
    pub fn injected(total: f64) -> Self {
        Self { internal: total, external: 0.0, total, min_delta_sample: 0, min_clearance_sample: 0 }
    }
}

/// M_I: smallest dexterity index over the samples, with its sample index.
pub fn internal_score(traj: &Trajectory, arm: &ArmModel) -> (f64, usize) {
    argmin(traj.samples.iter().map(|s| dexterity_at(arm, &JointConfig::from_column_slice(&s.q))))
}

/// M_E from per-sample clearances: max(min clearance, 0) / d̄.
pub fn external_from_clearances(clearances: impl IntoIterator<Item = f64>, d_bar: f64) -> (f64, usize) {
    let (min, idx) = argmin(clearances);
    (min.max(0.0) / d_bar, idx)
}

/// M_E recomputed from the trajectory against `state`'s scene, with an
/// attached object following the tool.
pub fn external_score(traj: &Trajectory, state: &WorldState, arm: &ArmModel, ex: &Exclusions, d_bar: f64) -> (f64, usize) {
    let clearances = traj.samples.iter().map(|s| {
        let fk = forward_kinematics(arm, &JointConfig::from_column_slice(&s.q));
        let mut st = state.clone();
        if let (Some(label), Some(g)) = (&state.gripper.attached, state.gripper.grasp_transform) {
            st.object_poses.insert(label.clone(), fk.end_effector * g);
        }
        clearance_with_fk(&st, arm, &fk, ex).map(|c| c.distance).unwrap_or(f64::INFINITY)
    });
    external_from_clearances(clearances, d_bar)
}

pub fn total_score(traj: &Trajectory, state: &WorldState, arm: &ArmModel, ex: &Exclusions, d_bar: f64) -> MotionScore {
    let (mi, i) = internal_score(traj, arm);
    let (me, j) = external_score(traj, state, arm, ex, d_bar);
    MotionScore::new(mi, me, i, j)
}

fn argmin(values: impl IntoIterator<Item = f64>) -> (f64, usize) {
    let mut best = (f64::INFINITY, 0);
    for (i, v) in values.into_iter().enumerate() {
        if v < best.0 {
            best = (v, i);
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanQuality {
    pub per_action: Vec<f64>,
    pub quality: f64,
    pub normalized_cumulative: f64,
}

/// Q: the arithmetic mean of the actions' M_T.
pub fn plan_quality(scores: &[MotionScore]) -> Result<PlanQuality, ScoringError> {
    if scores.is_empty() {
        return Err(ScoringError::Empty);
    }
    let per_action: Vec<f64> = scores.iter().map(|s| s.total).collect();
    let sum: f64 = per_action.iter().sum();
    let n = per_action.len() as f64;
    Ok(PlanQuality { quality: sum / n, normalized_cumulative: sum / n, per_action })
}

/// Cumulative score of the executed actions divided by the plan length;
/// used for trials that stopped early.
pub fn normalized_cumulative(executed: &[f64], plan_len: usize) -> f64 {
    if plan_len == 0 {
        return 0.0;
    }
    executed.iter().sum::<f64>() / plan_len as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_is_sum() {
        let s = MotionScore::new(0.4, 0.02, 0, 0);
        assert!((s.total - 0.42).abs() < 1e-15);
        let inj = MotionScore::injected(0.015802350054063646);
        assert_eq!(inj.total, 0.015802350054063646);
        assert_eq!(inj.external, 0.0);
    }

    #[test]
    fn external_division_and_clamp() {
        let (me, i) = external_from_clearances([0.1, 0.03, 0.05], 1.5);
        assert!((me - 0.02).abs() < 1e-15);
        assert_eq!(i, 1);
        assert_eq!(external_from_clearances([0.1, -0.01], 1.5).0, 0.0);
    }

    #[test]
    fn quality_is_mean() {
        let q = plan_quality(&[MotionScore::new(0.4, 0.0, 0, 0), MotionScore::new(0.6, 0.0, 0, 0)]).unwrap();
        assert!((q.quality - 0.5).abs() < 1e-15);
        assert_eq!(q.quality, q.normalized_cumulative);
        assert_eq!(plan_quality(&[]), Err(ScoringError::Empty));
        assert!((normalized_cumulative(&[0.3, 0.3], 6) - 0.1).abs() < 1e-15);
    }
}
