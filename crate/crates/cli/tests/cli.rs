use std::process::{Command, Output};

fn canonflex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_canonflex"))
        .args(args)
        .output()
        .expect("failed to spawn canonflex")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout not utf-8")
}

#[test]
fn flex_reports_golden_ratio() {
    let out = canonflex(&["flex", "{(0,0),(1,-8)B,(3,0)}"]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out).trim(), "lambda = 1.618");
}

#[test]
fn flex_raw_and_json() {
    // --raw skips the time-dilation reduction but cannot change the value.
    let reduced = canonflex(&["flex", "{(0,0),(2,-8)B,(6,0)}"]);
    let raw = canonflex(&["flex", "{(0,0),(2,-8)B,(6,0)}", "--raw"]);
    assert!(reduced.status.success() && raw.status.success());
    assert_eq!(stdout_of(&reduced).trim(), "lambda = 1.618");
    assert_eq!(stdout_of(&raw).trim(), "lambda = 1.618");

    let out = canonflex(&["flex", "{(0,0),(1,1)}", "--json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert!((v["lambda"].as_f64().unwrap() - 5.0).abs() < 1e-12);
}

#[test]
fn count_matches_known_values() {
    let out = canonflex(&["count", "{(0,0),(2,0)B}", "--n", "3"]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out).trim(), "196");

    let out = canonflex(&["count", "{(0,0),(1,-8)B,(3,0)}", "--n", "20"]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out).trim(), "153244");
}

#[test]
fn count_oracle_agrees_with_graph() {
    for n in ["1", "2", "3", "4", "5"] {
        let graph = canonflex(&["count", "{(0,0),(1,-8)B,(3,0)}", "--n", n]);
        let oracle = canonflex(&["count", "{(0,0),(1,-8)B,(3,0)}", "--n", n, "--oracle"]);
        assert!(graph.status.success() && oracle.status.success());
        assert_eq!(stdout_of(&graph), stdout_of(&oracle));
    }
}

#[test]
fn validate_reports_violations_and_exit_codes() {
    let out = canonflex(&["validate", "{(0,0),(1,-8)B,(3,0)}", "--melody", "0,3,4,0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_of(&out).trim(), "valid");

    let out = canonflex(&["validate", "{(0,0),(1,0)}", "--melody", "0,1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout_of(&out).contains("SecondOrSeventh"));
}

#[test]
fn normalize_prints_canonical_form() {
    let out = canonflex(&["normalize", "{(2,3),(3,-5)B,(5,3)}"]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out).trim(), "{(0,0),(1,0)B,(3,3)}");
}

#[test]
fn equiv_distinguishes_orbits() {
    let out = canonflex(&["equiv", "{(0,0),(1,-8)B,(3,0)}", "{(1,2),(2,-6)B,(4,2)}"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_of(&out).trim(), "equivalent");

    let out = canonflex(&["equiv", "{(0,0),(1,-8)B,(3,0)}", "{(0,0),(1,0)}"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_of(&out).trim(), "inequivalent");
}

#[test]
fn full_table_round_trips_through_diff() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.csv");
    let out = canonflex(&["table", "--max-t3", "8", "--format", "csv"]);
    assert!(out.status.success());
    std::fs::write(&path, &out.stdout).unwrap();
    // 308 data rows plus a header.
    assert_eq!(stdout_of(&out).lines().count(), 309);

    let diff = canonflex(&["diff", "--input", path.to_str().unwrap()]);
    assert_eq!(diff.status.code(), Some(0));

    // A truncated table must be reported as incomplete.
    let diff = {
        let partial = canonflex(&["table", "--max-t3", "2", "--format", "csv"]);
        std::fs::write(&path, &partial.stdout).unwrap();
        canonflex(&["diff", "--input", path.to_str().unwrap()])
    };
    assert_eq!(diff.status.code(), Some(1));
    assert!(stdout_of(&diff).contains("missing"));
}

#[test]
fn charpoly_prints_component_polynomial() {
    let out = canonflex(&["charpoly", "{(0,0),(1,-8)B,(3,0)}", "--component", "0"]);
    assert!(out.status.success());
    assert!(stdout_of(&out).contains("x^3 - x^2 - x"));
}

#[test]
fn generate_is_reproducible_and_valid() {
    let args = [
        "generate",
        "{(0,0),(1,-8)B,(3,0)}",
        "--length",
        "12",
        "--rng-seed",
        "7",
        "--avoid-parallel-perfects",
    ];
    let a = canonflex(&args);
    let b = canonflex(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    let melody = stdout_of(&a).trim().replace(' ', ",");
    let check = canonflex(&["validate", "{(0,0),(1,-8)B,(3,0)}", "--melody", &melody]);
    assert_eq!(check.status.code(), Some(0));
}

#[test]
fn continuations_lists_allowed_next_notes() {
    let out = canonflex(&["continuations", "{(0,0),(1,-8)B,(3,0)}", "--prefix", "0,3,4"]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out).trim(), "0");

    let out = canonflex(&["continuations", "{(0,0),(1,-8)B,(3,0)}", "--prefix", ""]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out).split_whitespace().count(), 7);
}

#[test]
fn malformed_input_exits_one() {
    let out = canonflex(&["flex", "not a scheme"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn exhausted_budget_exits_two() {
    let out = canonflex(&["count", "{(0,0)}", "--n", "10", "--oracle"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}
