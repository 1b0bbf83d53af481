//! Seeded backend that perturbs a base plan: every task plan, retune and
//! replan draws fresh speeds and clearances from configured ranges. Each
//! run gets its own stream, so runs differ while reruns stay identical.

use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use super::{extract_code_block, BackendError, PlannerBackend, PlannerSession, Request, RequestKind};
use crate::plan::{parse_task_plan, serialize_task_plan, Action, ActionArgs, Num, RetunePatch, TaskPlan};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StochasticManifest {
    pub mode: String,
    /// Reply file holding the base task plan.
    pub task_plan: String,
    /// Reply file holding the evaluation plan, returned unchanged.
    pub evaluation_plan: String,
    pub speed: [f64; 2],
    pub clearance: [f64; 2],
    #[serde(default = "default_orientation")]
    pub orientation: [f64; 2],
}

fn default_orientation() -> [f64; 2] {
    [0.0, 1.0]
}

#[derive(Debug, Clone)]
pub struct StochasticBackend {
    base: Arc<TaskPlan>,
    evaluation_reply: Arc<String>,
    speed: [f64; 2],
    clearance: [f64; 2],
    orientation: [f64; 2],
}

fn check_range(name: &str, r: [f64; 2]) -> Result<(), BackendError> {
    if !(r[0].is_finite() && r[1].is_finite() && r[0] <= r[1]) {
        return Err(BackendError::Config(format!("{name} range [{}, {}] is invalid", r[0], r[1])));
    }
    Ok(())
}

impl StochasticBackend {
    pub fn new(
        base: TaskPlan,
        evaluation_reply: String,
        speed: [f64; 2],
        clearance: [f64; 2],
        orientation: [f64; 2],
    ) -> Result<Self, BackendError> {
        check_range("speed", speed)?;
        check_range("clearance", clearance)?;
        check_range("orientation", orientation)?;
        if base.is_empty() {
            return Err(BackendError::Config("base task plan is empty".into()));
        }
        Ok(Self { base: Arc::new(base), evaluation_reply: Arc::new(evaluation_reply), speed, clearance, orientation })
    }

    pub fn from_manifest(m: &StochasticManifest, dir: &Path) -> Result<Self, BackendError> {
        let read = |f: &str| {
            let p = dir.join(f);
            std::fs::read_to_string(&p).map_err(|e| BackendError::Config(format!("{}: {e}", p.display())))
        };
        let base_text = read(&m.task_plan)?;
        let code = extract_code_block(&base_text)?;
        let base = parse_task_plan(&code).map_err(|e| BackendError::Config(format!("{}: {e}", m.task_plan)))?;
        Self::new(base, read(&m.evaluation_plan)?, m.speed, m.clearance, m.orientation)
    }
}

impl PlannerBackend for StochasticBackend {
    fn start_session(&self, run: usize, seed: u64) -> Result<Box<dyn PlannerSession>, BackendError> {
        let stream = seed ^ (run as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
        Ok(Box::new(StochasticSession { backend: self.clone(), rng: ChaCha8Rng::seed_from_u64(stream), transcript: Vec::new() }))
    }
}

struct StochasticSession {
    backend: StochasticBackend,
    rng: ChaCha8Rng,
    transcript: Vec<(String, String)>,
}

fn draw(rng: &mut ChaCha8Rng, r: [f64; 2], decimals: i32) -> Num {
    let v = if r[0] == r[1] { r[0] } else { rng.random_range(r[0]..=r[1]) };
    let scale = 10f64.powi(decimals);
    Num::Float((v * scale).round() / scale)
}

impl StochasticSession {
    fn jitter(&mut self, a: &Action) -> Action {
        let b = &self.backend;
        let mut out = a.clone();
        match &mut out.args {
            ActionArgs::Drop { speed, obstacle_clearance, .. } => {
                *speed = draw(&mut self.rng, b.speed, 2);
                *obstacle_clearance = draw(&mut self.rng, b.clearance, 3);
            }
            ActionArgs::Place { orientation, speed, obstacle_clearance, .. } => {
                *orientation = draw(&mut self.rng, b.orientation, 2);
                *speed = draw(&mut self.rng, b.speed, 2);
                *obstacle_clearance = draw(&mut self.rng, b.clearance, 3);
            }
            ActionArgs::Pick(g) | ActionArgs::Approach(g) => {
                g.speed = draw(&mut self.rng, b.speed, 2);
                g.obstacle_clearance = draw(&mut self.rng, b.clearance, 3);
            }
        }
        out
    }

    fn fresh_plan(&mut self) -> String {
        let base = self.backend.base.clone();
        let plan = TaskPlan { actions: base.actions.iter().map(|a| self.jitter(a)).collect() };
        format!("```python\n{}\n```\n", serialize_task_plan(&plan))
    }
}

impl PlannerSession for StochasticSession {
    fn complete(&mut self, req: &Request) -> Result<String, BackendError> {
        let reply = match req.kind {
            RequestKind::TaskPlan | RequestKind::Replan | RequestKind::FixSyntax => self.fresh_plan(),
            RequestKind::EvaluationPlan => self.backend.evaluation_reply.to_string(),
            RequestKind::Retune => {
                let index = req.failure_index.ok_or(BackendError::Config("retune request without failure index".into()))?;
                let action = req
                    .current_plan
                    .and_then(|p| p.actions.iter().find(|a| a.index == index))
                    .ok_or(BackendError::Config(format!("retune request for unknown index {index}")))?
                    .clone();
                let patch = RetunePatch { action_index: index, replacement: self.jitter(&action) };
                format!("```python\n{patch}\n```\n")
            }
        };
        self.transcript.push(("user".into(), req.prompt.to_string()));
        self.transcript.push(("assistant".into(), reply.clone()));
        Ok(reply)
    }

    fn transcript(&self) -> &[(String, String)] {
        &self.transcript
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::parse_retune_patch;

    fn backend() -> StochasticBackend {
        let base = parse_task_plan(
            "task_plan = [(0, 'approach', ('apple', 0.5, 0.01, 'top')), (1, 'place', ('bin', 0.5, 0.5, 0.01))]",
        )
        .unwrap();
        StochasticBackend::new(base, "evaluation_plan = []".into(), [0.2, 0.8], [0.005, 0.05], [0.0, 1.0]).unwrap()
    }

    fn req(kind: RequestKind, plan: Option<&TaskPlan>, idx: Option<usize>) -> Request<'_> {
        Request { kind, prompt: "", failure_index: idx, current_plan: plan }
    }

    #[test]
    fn same_run_same_stream() {
        let b = backend();
        let a = b.start_session(3, 7).unwrap().complete(&req(RequestKind::TaskPlan, None, None)).unwrap();
        let c = b.start_session(3, 7).unwrap().complete(&req(RequestKind::TaskPlan, None, None)).unwrap();
        let d = b.start_session(4, 7).unwrap().complete(&req(RequestKind::TaskPlan, None, None)).unwrap();
        assert_eq!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn draws_stay_in_range_and_retune_keeps_action() {
        let b = backend();
        let mut s = b.start_session(0, 1).unwrap();
        let plan = parse_task_plan(&extract_code_block(&s.complete(&req(RequestKind::TaskPlan, None, None)).unwrap()).unwrap()).unwrap();
        for a in &plan.actions {
            assert!((0.2..=0.8).contains(&a.speed().value()));
            assert!((0.005..=0.05).contains(&a.obstacle_clearance().value()));
        }
        let reply = s.complete(&req(RequestKind::Retune, Some(&plan), Some(1))).unwrap();
        let patch = parse_retune_patch(&extract_code_block(&reply).unwrap()).unwrap();
        let mut p2 = plan.clone();
        p2.apply_patch(&patch).unwrap();
        assert_eq!(p2.actions[0], plan.actions[0]);
    }

    #[test]
    fn bad_range() {
        let r = StochasticBackend::new(TaskPlan::default(), String::new(), [0.9, 0.1], [0.0, 0.1], [0.0, 1.0]);
        assert!(matches!(r, Err(BackendError::Config(_))));
    }
}
