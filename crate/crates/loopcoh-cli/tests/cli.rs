//! End-to-end tests against the built binary: exit codes, output formats,
//! determinism, and the documented counterexample behavior.

use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_loopcoh"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

#[test]
fn series_expansion_matches_the_expected_coefficients() {
    let out = run(&["series", "--degrees", "2:3", "--max-degree", "6"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "0 1\n1 0\n2 1\n3 1\n4 1\n5 1\n6 2\n");

    let out = run(&[
        "series",
        "--degrees",
        "2:3",
        "--shifts",
        "1:2",
        "--max-degree",
        "4",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    assert_eq!(v["coefficients"], serde_json::json!([1, 1, 2, 3, 3]));
    assert_eq!(v["D"], 4);
}

#[test]
fn invariants_n2_reports_the_expected_counterexample_with_status_zero() {
    let out = run(&["invariants", "--n", "2", "--max-degree", "6"]);
    assert!(out.status.success(), "expected status 0 for the known counterexample");
    let text = stdout(&out);
    assert!(text.contains("NOT-ISOMORPHIC"), "missing flag in: {text}");

    let out = run(&["invariants", "--n", "2", "--max-degree", "6", "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    assert_eq!(v["n"], 2);
    assert_eq!(v["D"], 6);
    assert_eq!(v["faithful"], false);
    assert_eq!(v["image_order"], 1);
    assert_ne!(v["invariant_dims"], v["subalgebra_dims"]);
    assert_eq!(v["subalgebra_dims"], v["expected"]);
}

#[test]
fn invariants_n3_is_isomorphic() {
    let out = run(&["invariants", "--n", "3", "--max-degree", "8"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("verdict: ISOMORPHIC"));
}

#[test]
fn steenrod_table_for_n3() {
    let out = run(&["steenrod", "--n", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("Sq^1 w2 = w3"));
    assert!(text.contains("Sq^2 w3 = w2*w3"));
    assert!(text.contains("Sq^1 w3 = 0"));
}

#[test]
fn loop_basis_listing() {
    let out = run(&[
        "loop",
        "--generators",
        "2:3",
        "--basis",
        "4",
        "--max-degree",
        "8",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    assert_eq!(v["series"][4], 3);
    let elements: Vec<String> = v["basis"]["elements"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e.as_str().unwrap().to_string())
        .collect();
    assert_eq!(elements, vec!["w2^2", "w3*s(w2)", "w2*s(w3)"]);
}

#[test]
fn gysin_out_of_range_is_a_usage_error() {
    let out = run(&["gysin", "--n", "10"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["gysin", "--n", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gysin_csv_and_json_agree() {
    let csv = run(&["gysin", "--n", "3", "--max-degree", "8", "--format", "csv"]);
    assert!(csv.status.success());
    let text = stdout(&csv);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("degree,ker,coker,assembled,direct"));
    assert_eq!(lines.next(), Some("0,0,1,1,1"));

    let json = run(&["gysin", "--n", "3", "--max-degree", "8", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&json)).expect("valid json");
    assert_eq!(
        v["assembled_dims"],
        serde_json::json!([1, 0, 0, 1, 1, 0, 0, 1, 1])
    );
    assert_eq!(v["assembled_dims"], v["direct_dims"]);
}

#[test]
fn gysin_accepts_a_presentation_file() {
    let file = serde_json::json!({
        "ambient_generators": [
            {"name": "w2", "degree": 2},
            {"name": "w3", "degree": 3},
            {"name": "w4", "degree": 4},
            {"name": "w5", "degree": 5}
        ],
        "relations": ["w2", "w3", "w2*w3 + w5"],
        "extra_generators": [{"name": "z", "degree": 8}]
    });
    let path = std::env::temp_dir().join(format!("loopcoh-pres-{}.json", std::process::id()));
    std::fs::write(&path, serde_json::to_string(&file).unwrap()).unwrap();

    let from_file = run(&[
        "gysin",
        "--presentation",
        path.to_str().unwrap(),
        "--max-degree",
        "10",
        "--format",
        "json",
    ]);
    let by_n = run(&["gysin", "--n", "5", "--max-degree", "10", "--format", "json"]);
    std::fs::remove_file(&path).ok();
    assert!(from_file.status.success());
    assert!(by_n.status.success());
    assert_eq!(stdout(&from_file), stdout(&by_n));
}

#[test]
fn identical_configs_give_byte_identical_output() {
    let args = ["gysin", "--n", "4", "--max-degree", "10", "--format", "json"];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);

    let args = ["verify", "--n", "3", "--max-degree", "8"];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn verify_restricted_run_passes() {
    let out = run(&["verify", "--n", "3", "--max-degree", "12"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("all checks passed"));
    assert!(!text.contains("FAIL"));
    for id in [
        "invariant-ring",
        "weyl-faithfulness",
        "gl2-image",
        "wu-oracle",
        "loop-series",
        "sigma-squaring-confluence",
        "gysin-direct",
        "spin-presentations",
        "tensor-degree-one",
        "rank-nullity",
    ] {
        assert!(text.contains(id), "missing {id} in ledger:\n{text}");
    }
}

#[test]
fn verify_json_is_a_single_document() {
    let out = run(&[
        "verify",
        "--n-range",
        "2..3",
        "--max-degree",
        "8",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    assert_eq!(v["all_passed"], true);
    assert!(v["checks"].as_array().unwrap().len() >= 8);
}

#[test]
fn out_flag_writes_the_data_stream_to_a_file() {
    let path = std::env::temp_dir().join(format!("loopcoh-out-{}.csv", std::process::id()));
    let out = bin()
        .args([
            "series",
            "--degrees",
            "4",
            "--shifts",
            "3",
            "--max-degree",
            "8",
            "--format",
            "csv",
            "--out",
            path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert!(written.starts_with("degree,coefficient\n0,1\n"));
    assert!(written.contains("3,1\n4,1\n"));
}

#[test]
fn env_var_sets_the_default_degree_and_flags_override_it() {
    let out = bin()
        .env("LOOPCOH_MAX_DEGREE", "5")
        .args(["series", "--degrees", "2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 6);

    let out = bin()
        .env("LOOPCOH_MAX_DEGREE", "5")
        .args(["series", "--degrees", "2", "--max-degree", "3"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 4);

    let out = bin()
        .env("LOOPCOH_MAX_DEGREE", "not-a-degree")
        .args(["series", "--degrees", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn degree_bound_is_enforced() {
    let out = run(&["series", "--degrees", "2", "--max-degree", "65"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn jobs_flag_is_accepted() {
    let out = run(&["gysin", "--n", "3", "--max-degree", "6", "--jobs", "2"]);
    assert!(out.status.success());
}
