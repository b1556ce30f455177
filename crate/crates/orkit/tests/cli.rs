//! End-to-end tests of the orkit binary: exit codes, file round-trips, and
//! CSV output shape.

use std::path::PathBuf;
use std::process::{Command, Output};

use orkit::io::parse_system;

fn orkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orkit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn example(name: &str) -> String {
    format!("{}/examples/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("orkit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn build_output_round_trips() {
    let out = tmp("exact.json");
    let st = orkit(&[
        "build",
        "exact",
        "-i",
        &example("exact_invariant.json"),
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(st.status.code(), Some(0), "{}", String::from_utf8_lossy(&st.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let parsed = parse_system(&text).expect("written file parses");
    let rewritten = orkit::io::system_to_string(&parsed);
    assert_eq!(text, rewritten, "round-trip must be byte-identical");
}

#[test]
fn exit_codes_follow_the_contract() {
    // malformed input file: parse error, exit 1
    let bad = tmp("bad.json");
    std::fs::write(&bad, "{not json").unwrap();
    let st = orkit(&["build", "exact", "-i", bad.to_str().unwrap()]);
    assert_eq!(st.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&st.stderr).starts_with("error:"));

    // unknown subcommand: usage error, exit 1
    let st = orkit(&["frobnicate"]);
    assert_eq!(st.status.code(), Some(1));

    // help is not an error
    let st = orkit(&["--help"]);
    assert_eq!(st.status.code(), Some(0));

    // no exact realization of observer order: mathematical absence, exit 2
    let st = orkit(&["build", "exact", "-i", &example("extended_observable.json")]);
    assert_eq!(st.status.code(), Some(2), "{}", String::from_utf8_lossy(&st.stderr));

    // missing file: exit 1
    let st = orkit(&["build", "exact", "-i", "/no/such/file.json"]);
    assert_eq!(st.status.code(), Some(1));
}

#[test]
fn discrete_simulation_emits_one_row_per_step() {
    let sys = tmp("discrete.json");
    std::fs::write(
        &sys,
        r#"{"type": "linear", "time": "discrete", "a": [[0, 1], [1, 0]], "b": [[1], [0]], "h": [[1, 0]]}"#,
    )
    .unwrap();
    let st = orkit(&[
        "sim",
        "-i",
        sys.to_str().unwrap(),
        "--steps",
        "5",
        "--x0",
        "1,0",
    ]);
    assert_eq!(st.status.code(), Some(0), "{}", String::from_utf8_lossy(&st.stderr));
    let csv = String::from_utf8_lossy(&st.stdout);
    let lines: Vec<&str> = csv.trim_end().lines().collect();
    assert_eq!(lines[0], "t,y1,jump");
    // header + initial state + 5 steps
    assert_eq!(lines.len(), 7);
}

#[test]
fn realization_simulation_records_the_initial_jump() {
    let or = tmp("proj.json");
    let st = orkit(&[
        "build",
        "projection",
        "-i",
        &example("projection_reduction.json"),
        "-o",
        or.to_str().unwrap(),
    ]);
    assert_eq!(st.status.code(), Some(0));
    let st = orkit(&[
        "sim",
        "-i",
        or.to_str().unwrap(),
        "--t",
        "0.01",
        "--dt",
        "1e-3",
        "--x0",
        "1,2,0,-2,-1,-1",
    ]);
    assert_eq!(st.status.code(), Some(0), "{}", String::from_utf8_lossy(&st.stderr));
    let csv = String::from_utf8_lossy(&st.stdout);
    let lines: Vec<&str> = csv.trim_end().lines().collect();
    assert!(lines[1].ends_with(",pre"));
    assert!(lines[2].ends_with(",post"));
    // the 6-vector projects into the plane as (1, -4/3)
    assert!(lines[2].starts_with("0.0000000000000000e0,1.0000000000000000e0,-1.3333333333333"));
}

#[test]
fn compare_reports_small_error_for_an_exact_realization() {
    let or = tmp("exact-cmp.json");
    let st = orkit(&[
        "build",
        "exact",
        "-i",
        &example("exact_invariant.json"),
        "-o",
        or.to_str().unwrap(),
    ]);
    assert_eq!(st.status.code(), Some(0));
    let st = orkit(&[
        "compare",
        "-i",
        &example("exact_invariant.json"),
        "-r",
        or.to_str().unwrap(),
        "--t",
        "1",
        "--x0",
        "1,0,1,0,0",
    ]);
    assert_eq!(st.status.code(), Some(0), "{}", String::from_utf8_lossy(&st.stderr));
    let text = String::from_utf8_lossy(&st.stdout);
    let worst: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("worst max_err: "))
        .expect("worst line present")
        .parse()
        .unwrap();
    assert!(worst < 1e-6, "worst {worst}");
}

#[test]
fn replay_exit_codes_and_filtering() {
    let st = orkit(&["repro"]);
    assert_eq!(st.status.code(), Some(0));
    let text = String::from_utf8_lossy(&st.stdout);
    assert!(text.lines().any(|l| l.starts_with("PASS")));
    assert!(!text.lines().any(|l| l.starts_with("FAIL")));

    // errata count as failures only under the strict flag
    let st = orkit(&["repro", "--strict-paper"]);
    assert_eq!(st.status.code(), Some(1));

    let st = orkit(&["repro", "--filter", "exact"]);
    assert_eq!(st.status.code(), Some(0));
    let text = String::from_utf8_lossy(&st.stdout);
    assert!(text.lines().all(|l| !l.starts_with("PASS ") || l.starts_with("PASS exact:")));

    // the exact example has no errata, so strict mode stays green
    let st = orkit(&["repro", "--filter", "exact", "--strict-paper"]);
    assert_eq!(st.status.code(), Some(0));
}

#[test]
fn check_emits_json_on_stdout() {
    let st = orkit(&["check", "a-invariant", "-i", &example("exact_invariant.json")]);
    assert_eq!(st.status.code(), Some(0));
    let v: serde_json::Value =
        serde_json::from_slice(&st.stdout).expect("stdout is a JSON document");
    assert_eq!(v["check"], "a-invariant");
    assert_eq!(v["invariant"], true);
}

#[test]
fn tolerance_override_is_respected() {
    // an absurdly tight tolerance makes the numeric residual check fail
    let st = Command::new(env!("CARGO_BIN_EXE_orkit"))
        .args(["check", "cayley", "-i", &example("extended_observable.json")])
        .env("ORKIT_TOL", "1e-300")
        .output()
        .expect("binary runs");
    let msg = String::from_utf8_lossy(&st.stderr);
    assert!(msg.contains("1.0e-300"), "{msg}");
}
