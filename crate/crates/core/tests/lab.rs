use serde_json::{json, Value};

use opalg::lab::{cases, exit_code, load_tasks, run_tasks, Status, YAU_FIXTURE};
use opalg::linalg::Ring;
use opalg::Error;

fn schema_path(text: &str) -> String {
    match load_tasks(text) {
        Err(Error::Schema { path, .. }) => path,
        other => panic!("expected a schema error, got {other:?}"),
    }
}

const Z2: &str = r#"{"ring": "ZZ", "degrees": {"0": {"rank": 1}, "1": {"rank": 1}}, "differentials": {"1": [[2]]}}"#;

#[test]
fn bundled_fixture_passes() {
    let report = run_tasks(&load_tasks(YAU_FIXTURE).unwrap());
    assert_eq!(report.results.len(), 3);
    assert!(report.results.iter().all(|r| r.status == Status::Pass), "{}", report.to_text());
    assert_eq!(report.exit_code(), 0);
}

#[test]
fn reports_are_deterministic_apart_from_timing() {
    let tasks = load_tasks(YAU_FIXTURE).unwrap();
    let a = run_tasks(&tasks);
    let b = run_tasks(&load_tasks(YAU_FIXTURE).unwrap());
    assert_eq!(a.deterministic_json(), b.deterministic_json());
    let full: Value = serde_json::from_str(&a.to_json()).unwrap();
    assert!(full.get("timing").is_some());
    let stripped: Value = serde_json::from_str(&a.deterministic_json()).unwrap();
    assert!(stripped.get("timing").is_none());
    assert_eq!(stripped["summary"]["exit_code"], 0);
}

#[test]
fn empty_task_lists_succeed() {
    for text in [r#"{"tasks": []}"#, "{}"] {
        let report = run_tasks(&load_tasks(text).unwrap());
        assert!(report.results.is_empty());
        assert_eq!(report.exit_code(), 0);
    }
}

#[test]
fn schema_errors_name_the_offending_field() {
    let bad_entry = r#"{"tasks": [{"kind": "homology", "complex": {"ring": "ZZ", "degrees": {"0": {"rank": 1}, "1": {"rank": 1}}, "differentials": {"1": [["1/2"]]}}}]}"#;
    assert_eq!(schema_path(bad_entry), "tasks[0].complex.differentials.1[0][0]");
    let bad_row = r#"{"tasks": [{"kind": "homology", "complex": {"ring": "ZZ", "degrees": {"0": {"rank": 1}, "1": {"rank": 1}}, "differentials": {"1": [[2, 3]]}}}]}"#;
    assert_eq!(schema_path(bad_row), "tasks[0].complex.differentials.1[0]");
    let bad_bound = r#"{"tasks": [{"kind": "verify-yau"}, {"kind": "envelope", "algebra": "dual-numbers", "bounds": {"max_arity": "x"}}]}"#;
    assert_eq!(schema_path(bad_bound), "tasks[1].bounds.max_arity");
    let bad_ring = r#"{"tasks": [{"kind": "verify-a3zero", "ring": "GF(6)"}]}"#;
    assert_eq!(schema_path(bad_ring), "tasks[0].ring");
    let unknown_fixture = r#"{"tasks": [{"kind": "envelope", "algebra": "no-such-algebra"}]}"#;
    assert_eq!(schema_path(unknown_fixture), "tasks[0].algebra");
    let extra_field = r#"{"tasks": [{"kind": "verify-yau", "bund": 3}]}"#;
    assert!(schema_path(extra_field).starts_with("tasks[0]"));
}

#[test]
fn nothing_runs_when_a_later_task_is_malformed() {
    let text = json!({ "tasks": [ { "kind": "verify-yau" }, { "kind": "homology" } ] }).to_string();
    assert!(load_tasks(&text).is_err());
}

#[test]
fn homology_expectations_decide_the_status() {
    let pass = format!(r#"{{"tasks": [{{"kind": "homology", "complex": {Z2}, "expect": {{"modules": {{"0": {{"rank": 1}}, "1": {{"rank": 1}}}}, "homology": {{"0": {{"rank": 0, "torsion": [2]}}}}}}}}]}}"#);
    assert_eq!(run_tasks(&load_tasks(&pass).unwrap()).exit_code(), 0);
    let fail = pass.replace(r#""torsion": [2]"#, r#""torsion": [3]"#);
    let report = run_tasks(&load_tasks(&fail).unwrap());
    assert_eq!(report.results[0].status, Status::Fail);
    assert_eq!(report.exit_code(), 1);
}

#[test]
fn unstable_envelopes_report_not_stabilized() {
    let text = r#"{"tasks": [{"kind": "envelope", "algebra": "dual-numbers", "bounds": {"max_straight_leaves": 1, "window": 3}}]}"#;
    let report = run_tasks(&load_tasks(text).unwrap());
    assert_eq!(report.results[0].status, Status::NotStabilized);
    assert_eq!(report.exit_code(), 2);
}

#[test]
fn failures_outrank_instability() {
    let yau = cases::verify_yau(4, Ring::Rationals);
    assert!(yau.iter().all(|r| r.status == Status::Pass));
    assert_eq!(exit_code(&yau), 0);
    let wrong_ring = cases::verify_a3zero(Ring::Rationals);
    assert_eq!(wrong_ring.status, Status::Fail);
    assert!(wrong_ring.error.is_some());
    let unstable = r#"{"tasks": [{"kind": "envelope", "algebra": "dual-numbers", "bounds": {"max_straight_leaves": 1, "window": 3}}]}"#;
    let unstable = run_tasks(&load_tasks(unstable).unwrap()).results;
    assert_eq!(exit_code(&[yau.clone(), unstable.clone()].concat()), 2);
    assert_eq!(exit_code(&[unstable, vec![wrong_ring], yau].concat()), 1);
    assert_eq!(exit_code(&[]), 0);
}

#[test]
fn crosscheck_rows_all_pass() {
    let reports = cases::crosscheck(&opalg::envelope::TruncationBounds::default());
    assert_eq!(reports.len(), cases::crosscheck_instances().unwrap().len());
    for r in &reports {
        assert_eq!(r.status, Status::Pass, "{}", r.case);
    }
}

#[test]
fn the_naive_construction_grows_with_the_bound() {
    for bound in [1, 3, 6] {
        let r = &cases::verify_yau(bound, Ring::Rationals)[1];
        assert_eq!(r.status, Status::Pass);
        let dims = r.checks.iter().find(|c| c.name.starts_with("graded dimension")).unwrap();
        assert_eq!(dims.computed, json!({ "0": bound }));
    }
}
