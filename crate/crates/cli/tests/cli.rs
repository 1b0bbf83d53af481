use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn corpus(name: &str) -> String {
    root().join("fixtures/corpus").join(name).display().to_string()
}

fn scene(name: &str) -> String {
    root().join("crates/core/data/scenes").join(name).display().to_string()
}

fn actune(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_actune")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn validate_exit_codes() {
    let ok = actune(&["validate", "--plan", &corpus("table_plan_place.py"), "--eval", &corpus("table_eval_place.py"), "--scene", &scene("clear_table.toml")]);
    assert_eq!(code(&ok), 0, "{}", stderr(&ok));

    let dup = actune(&["validate", "--plan", &corpus("table_plan_place.py"), "--eval", &corpus("eval_duplicate_index.py"), "--scene", &scene("table_clearing.toml")]);
    assert_eq!(code(&dup), 1);
    assert!(stderr(&dup).contains("[multiple-entries-for-index] evaluation_plan index 8"));

    let missing = actune(&["validate", "--plan", "no/such/plan.py", "--eval", &corpus("table_eval_place.py"), "--scene", &scene("clear_table.toml")]);
    assert_eq!(code(&missing), 2);

    let elided = actune(&["validate", "--plan", &corpus("table_plan_place.py"), "--eval", &corpus("eval_split_entries_elided.py"), "--scene", &scene("clear_table.toml")]);
    assert_eq!(code(&elided), 2);
    assert!(stderr(&elided).contains("syntax error at 10:"), "{}", stderr(&elided));
}

#[test]
fn simulate_reports_collision() {
    let o = actune(&["simulate", "--plan", &corpus("table_plan_place.py"), "--eval", &corpus("table_eval_place.py"), "--scene", &scene("place_collision.toml")]);
    assert_eq!(code(&o), 1);
    let rows: Vec<serde_json::Value> =
        String::from_utf8_lossy(&o.stdout).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[2]["passed"], false);
    assert!(stderr(&o).contains("Collision encountered with glass with yellowish liquid"));
}

#[test]
fn simulate_dumps_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("traj");
    let o = actune(&[
        "simulate", "--plan", &corpus("table_plan_drop.py"), "--eval", &corpus("table_eval_drop.py"),
        "--scene", &scene("clear_table.toml"), "--trajectories", t.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(t.join("action_5.csv")).unwrap();
    assert!(csv.starts_with("t,q1,q2,q3,q4,q5,q6,q7,clearance,delta\n"));
    assert!(csv.lines().count() > 10);
}

fn adapt(out: &Path, backend: &str, runs: &str, extra: &[&str]) -> Output {
    let b = format!("scripted:{}", root().join("fixtures/scripts").join(backend).display());
    let sc = scene("clear_table.toml");
    let mut args = vec!["adapt", "--scene", &sc, "--task", "clear the table", "--backend", &b, "--runs", runs];
    args.extend_from_slice(&["--out", out.to_str().unwrap()]);
    args.extend_from_slice(extra);
    actune(&args)
}

#[test]
fn adapt_replay_script_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let o = adapt(dir.path(), "clear_table_replay", "1", &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["winner"], 0);
    assert_eq!(summary["runs"][0]["trials"], 7);
    let csv = std::fs::read_to_string(dir.path().join("scores.csv")).unwrap();
    let failed: Vec<f64> = csv.lines().skip(1).take(4).map(|l| l.split(',').nth(6).unwrap().parse().unwrap()).collect();
    assert_eq!(failed, [0.015802350054063646, 0.0308876651339363, 0.04319835434592172, 0.01331668352320572]);
    let plan = std::fs::read_to_string(dir.path().join("best_plan.py")).unwrap();
    assert!(plan.contains("(3, 'approach', ('half-eaten apple', 0.4, 0.05, 'top'))"));
    assert!(dir.path().join("runs/run_000.jsonl").exists());
}

#[test]
fn adapt_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&adapt(dir.path(), "clear_table_replay", "0", &[])), 2);
    let o = actune(&["adapt", "--scene", &scene("clear_table.toml"), "--task", "t", "--backend", "magic:x", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert_eq!(code(&adapt(dir.path(), "clear_table_replay", "1", &["--preset", "nope"])), 2);
}

#[test]
fn adapt_budget_exhaustion_is_a_domain_failure() {
    let dir = tempfile::tempdir().unwrap();
    let o = adapt(dir.path(), "forced_failure", "1", &[]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("scores.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 12);
    assert!(!dir.path().join("best_plan.py").exists());
}

#[test]
fn stochastic_adapt_is_reproducible_and_replays() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let oa = adapt(a.path(), "clear_table_stochastic", "4", &["--seed", "5"]);
    let ob = adapt(b.path(), "clear_table_stochastic", "4", &["--seed", "5", "--parallel", "3"]);
    assert_eq!(code(&oa), 0, "{}", stderr(&oa));
    assert_eq!(oa.stdout, ob.stdout);
    for f in ["scores.csv", "best_plan.py", "runs/run_003.jsonl"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }

    let runs = a.path().join("runs");
    let o = actune(&["replay", runs.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let sel = actune(&["select", runs.to_str().unwrap()]);
    assert_eq!(code(&sel), 0);
    let s: serde_json::Value = serde_json::from_slice(&sel.stdout).unwrap();
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(a.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(s["winner"], summary["winner"]);
}

/// Adds 1e-9 to the first score of line `n` (0-based).
fn perturb(log: &str, n: usize) -> String {
    let mut lines: Vec<String> = log.lines().map(String::from).collect();
    let mut v: serde_json::Value = serde_json::from_str(&lines[n]).unwrap();
    let s = v["scores"][0].as_f64().unwrap();
    v["scores"][0] = serde_json::json!(s + 1e-9);
    lines[n] = serde_json::to_string(&v).unwrap();
    lines.join("\n") + "\n"
}

#[test]
fn replay_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&adapt(dir.path(), "clear_table_stochastic", "1", &["--seed", "2"])), 0);
    let log_path = dir.path().join("runs/run_000.jsonl");
    let log = std::fs::read_to_string(&log_path).unwrap();
    assert_eq!(code(&actune(&["replay", log_path.to_str().unwrap()])), 0);

    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, perturb(&log, 0)).unwrap();
    let o = actune(&["replay", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("run 0 trial 1"), "{}", stderr(&o));

    let cut = dir.path().join("cut.jsonl");
    std::fs::write(&cut, &log[..log.len() / 2]).unwrap();
    assert_eq!(code(&actune(&["replay", cut.to_str().unwrap()])), 2);
    std::fs::write(&cut, "").unwrap();
    assert_eq!(code(&actune(&["replay", cut.to_str().unwrap()])), 2);
}
