use std::path::Path;

use actune_core::adapt::{run_adaptation, select_best, OrchestratorConfig, RunSummary, TrialSource};
use actune_core::backend::load_script_dir;
use actune_core::runlog::{parse_jsonl, replay, to_jsonl, SimSetup};

fn setup() -> SimSetup {
    SimSetup::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data/scenes/clear_table.toml")).unwrap()
}

fn script() -> std::sync::Arc<dyn actune_core::backend::PlannerBackend> {
    load_script_dir(&Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/scripts/clear_table_stochastic")).unwrap()
}

#[test]
fn fourteen_runs_pick_a_stable_winner() {
    let s = setup();
    let backend = script();
    let cfg = OrchestratorConfig { rng_seed: 11, ..Default::default() };
    let runs = |_: ()| -> Vec<RunSummary> {
        (0..cfg.num_runs)
            .map(|r| run_adaptation(r, "clear the table", &s.scene, &s.arm, backend.as_ref(), &cfg).unwrap().summary())
            .collect()
    };
    let a = runs(());
    for r in &a {
        eprintln!("{r:?}");
    }
    let b = runs(());
    assert_eq!(a, b);
    let w = select_best(&a).unwrap();
    assert!(a.iter().filter(|r| r.success).all(|r| r.normalized_cumulative <= a[w].normalized_cumulative));
}

#[test]
fn simulated_log_replays() {
    let s = setup();
    let cfg = OrchestratorConfig { rng_seed: 3, ..Default::default() };
    let r = run_adaptation(0, "clear the table", &s.scene, &s.arm, script().as_ref(), &cfg).unwrap();
    assert!(r.trials.iter().all(|t| t.source == TrialSource::Sim));
    let text = to_jsonl(&r.trials, &s, &cfg.executor);
    let lines = parse_jsonl(&text).unwrap();
    assert_eq!(lines.len(), r.trials.len());
    assert_eq!(replay(&lines).unwrap(), vec![]);
    let mut bad = lines.clone();
    bad[0].trial.scores[0] += 1e-9;
    let m = replay(&bad).unwrap();
    assert!(!m.is_empty());
    assert_eq!(m[0].trial, 1);
}
