use std::path::{Path, PathBuf};

use actune_core::plan::{
    parse_evaluation_plan, parse_retune_patch, parse_task_plan, validate_plans, Action, ActionArgs, DiagnosticCode, GraspArgs,
    Grasp, Num, PlanError, ValidationConfig,
};
use actune_core::scene::load_scene_file;

fn corpus(name: &str) -> String {
    let p: PathBuf = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/corpus").join(name);
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

const TASK_PLANS: [(&str, usize); 7] = [
    ("table_plan_place.py", 6),
    ("table_plan_drop.py", 6),
    ("plan_pick_drop_commented.py", 12),
    ("plan_indented_glass.py", 0),
    ("plan_apple_trash.py", 0),
    ("plan_apple_table.py", 0),
    ("plan_paper_ball_nudge.py", 2),
];

#[test]
fn task_plans_parse() {
    for (f, n) in TASK_PLANS {
        let tp = parse_task_plan(&corpus(f)).unwrap_or_else(|e| panic!("{f}: {e}"));
        if n > 0 {
            assert_eq!(tp.len(), n, "{f}");
        }
        assert!(tp.actions.iter().enumerate().all(|(i, a)| a.index == i), "{f}");
    }
}

#[test]
fn evaluation_plans_parse() {
    for (f, n) in [
        ("table_eval_place.py", 6),
        ("table_eval_drop.py", 6),
        ("eval_split_entries.py", 0),
        ("eval_duplicate_index.py", 8),
    ] {
        let ep = parse_evaluation_plan(&corpus(f)).unwrap_or_else(|e| panic!("{f}: {e}"));
        if n > 0 {
            assert_eq!(ep.entries.len(), n, "{f}");
        }
    }
}

#[test]
fn elided_blocks_fail_with_position() {
    for f in ["eval_split_entries_elided.py", "eval_duplicate_index_elided.py"] {
        let e = parse_evaluation_plan(&corpus(f)).unwrap_err();
        let pos = e.position().unwrap_or_else(|| panic!("{f}: {e} has no position"));
        assert!(matches!(e, PlanError::Syntax { .. }), "{f}: {e}");
        let line = corpus(f).lines().nth(pos.line - 1).unwrap().to_string();
        assert!(line.contains("..."), "{f}: error at {}:{} is not on the ellipsis line", pos.line, pos.column);
    }
}

fn place(orientation: Num, clearance: f64) -> ActionArgs {
    ActionArgs::Place {
        location: "large red trash can".into(),
        orientation,
        speed: Num::Float(0.3),
        obstacle_clearance: Num::Float(clearance),
    }
}

fn approach(grasp: Grasp) -> ActionArgs {
    ActionArgs::Approach(GraspArgs {
        target: "half-eaten apple".into(),
        speed: Num::Float(0.4),
        obstacle_clearance: Num::Float(0.05),
        grasp,
    })
}

#[test]
fn retune_patches_are_exact() {
    let cases = [
        ("retune_place_1.py", 2, place(Num::Float(0.2), 0.05)),
        ("retune_place_2.py", 2, place(Num::Float(0.1), 0.07)),
        ("retune_place_3.py", 2, place(Num::Int(0), 0.08)),
        ("retune_approach_1.py", 3, approach(Grasp::Side)),
        ("retune_approach_2.py", 3, approach(Grasp::Top)),
    ];
    for (f, index, args) in cases {
        let p = parse_retune_patch(&corpus(f)).unwrap_or_else(|e| panic!("{f}: {e}"));
        assert_eq!(p.action_index, index, "{f}");
        assert_eq!(p.replacement, Action { index, args }, "{f}");
    }
}

#[test]
fn duplicate_index_is_reported() {
    let scene = load_scene_file(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data/scenes/table_clearing.toml")).unwrap();
    let tp = parse_task_plan(&corpus("table_plan_place.py")).unwrap();
    let ep = parse_evaluation_plan(&corpus("eval_duplicate_index.py")).unwrap();
    let r = validate_plans(&tp, &ep, &scene.vocabulary(), &ValidationConfig::default());
    let dup: Vec<i64> = r.with_code(DiagnosticCode::MultipleEntriesForIndex).filter_map(|d| d.action_index).collect();
    assert_eq!(dup, [8, 11]);
    assert!(r.has_errors());
}

#[test]
fn place_reply_pair_has_no_errors() {
    let scene = load_scene_file(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data/scenes/clear_table.toml")).unwrap();
    let tp = parse_task_plan(&corpus("table_plan_place.py")).unwrap();
    let ep = parse_evaluation_plan(&corpus("table_eval_place.py")).unwrap();
    let r = validate_plans(&tp, &ep, &scene.vocabulary(), &ValidationConfig::default());
    assert!(!r.has_errors(), "{:?}", r.diagnostics);
    let wide = ValidationConfig { soft_clearance: (0.005, 0.05), ..Default::default() };
    assert!(validate_plans(&tp, &ep, &scene.vocabulary(), &wide).is_clean());
}
