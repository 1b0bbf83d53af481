use std::path::{Path, PathBuf};
use std::sync::Arc;

use actune_core::adapt::{run_adaptation, FeedbackKind, OrchestratorConfig, TrialKind, TrialSource};
use actune_core::backend::load_script_dir;
use actune_core::kinematics::ArmModel;
use actune_core::plan::ActionName;
use actune_core::scene::{load_scene_file, Scene};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn scene(name: &str) -> Arc<Scene> {
    Arc::new(load_scene_file(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data/scenes").join(name)).unwrap())
}

#[test]
fn replay_script_reproduces_trial_sequence() {
    let backend = load_script_dir(&root().join("fixtures/scripts/clear_table_replay")).unwrap();
    let sc = scene("clear_table.toml");
    let arm = ArmModel::iiwa_like().with_base(sc.robot_base);
    let r = run_adaptation(0, "clear the table", &sc, &arm, backend.as_ref(), &OrchestratorConfig::default()).unwrap();

    assert!(r.success);
    assert_eq!(r.trials_used, 7);
    let kinds: Vec<TrialKind> = r.trials.iter().map(|t| t.kind).collect();
    use TrialKind::*;
    assert_eq!(kinds, [Initial, Retune, Retune, Retune, Replan, Retune, Retune]);
    let failures: Vec<Option<usize>> = r.trials.iter().map(|t| t.failure_index).collect();
    assert_eq!(failures, [Some(2), Some(2), Some(2), Some(2), Some(3), Some(3), None]);
    let failed_scores: Vec<f64> = r.trials[..4].iter().map(|t| t.scores[2]).collect();
    assert_eq!(failed_scores, [0.015802350054063646, 0.0308876651339363, 0.04319835434592172, 0.01331668352320572]);
    assert!(r.trials.iter().all(|t| t.source == TrialSource::Injected));
    assert_eq!(r.task_plan.len(), 6);
    assert_eq!(r.task_plan.actions[2].name(), ActionName::Drop);
    assert_eq!(r.task_plan.actions[3].to_string(), "(3, 'approach', ('half-eaten apple', 0.4, 0.05, 'top'))");

    let expected = ["retune_1", "retune_2", "retune_3", "replan_1", "retune_4", "retune_5"];
    assert_eq!(r.feedback.len(), expected.len());
    for ((kind, block), name) in r.feedback.iter().zip(expected) {
        let want = std::fs::read_to_string(root().join("fixtures/feedback").join(format!("{name}.txt"))).unwrap();
        assert_eq!(block, want.trim_end_matches('\n'), "feedback block {name}");
        assert_eq!(*kind == FeedbackKind::Replan, name.starts_with("replan"));
    }
}

#[test]
fn replay_is_deterministic() {
    let backend = load_script_dir(&root().join("fixtures/scripts/clear_table_replay")).unwrap();
    let sc = scene("clear_table.toml");
    let arm = ArmModel::iiwa_like().with_base(sc.robot_base);
    let cfg = OrchestratorConfig::default();
    let a = run_adaptation(0, "clear the table", &sc, &arm, backend.as_ref(), &cfg).unwrap();
    let b = run_adaptation(0, "clear the table", &sc, &arm, backend.as_ref(), &cfg).unwrap();
    assert_eq!(a.trials, b.trials);
    assert_eq!(a.transcript, b.transcript);
}
