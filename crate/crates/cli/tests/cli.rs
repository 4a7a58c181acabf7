//! End-to-end checks of the command-line surface.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_treeforce"))
}

fn repo(path: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(path)
}

#[test]
fn verify_facts_quick_passes() {
    let out = bin().args(["verify-facts", "--bounds", "quick"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("fact1-supporter-equivalence: PASS"));
    assert!(text.contains("fact5-cross-coverage: PASS"));
    assert!(text.contains("abandonment-facts: PASS"));
}

#[test]
fn verify_facts_refuses_oversized_bounds() {
    let out = bin()
        .args(["verify-facts", "--bounds", "default", "--max-n", "9"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let text = String::from_utf8_lossy(&out.stderr);
    assert!(text.contains("beyond the supported"), "{text}");
}

#[test]
fn sim_trace_round_trips_through_verify_trace() {
    let trace = std::env::temp_dir().join("treeforce_cli_test_trace.jsonl");
    let out = bin()
        .args(["sim", "--config"])
        .arg(repo("scenarios/step1.toml"))
        .args(["--steps", "2", "--out"])
        .arg(&trace)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = bin().arg("verify-trace").arg("--in").arg(&trace).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    std::fs::remove_file(&trace).ok();
}

#[test]
fn sim_reports_stuck_on_undersized_height_bound() {
    let out = bin()
        .args(["sim", "--config"])
        .arg(repo("scenarios/step1.toml"))
        .args(["--steps", "1", "--height-bound", "1"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("status: stuck"));
}

#[test]
fn extract_enum_demo() {
    let out = bin()
        .args(["extract-enum", "--config"])
        .arg(repo("scenarios/demo/stages.toml"))
        .args(["--kprime", "2", "--n", "3"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    // The complement of the stage-1 generator is {000, 101}.
    assert!(text.contains("000"), "{text}");
}

#[test]
fn extract_path_demo() {
    let out = bin()
        .args(["extract-path", "--tree"])
        .arg(repo("scenarios/demo/tree.toml"))
        .arg("--enum")
        .arg(repo("scenarios/demo/enum.toml"))
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{text}");
    assert!(text.contains("after 1 reductions"), "{text}");
    assert!(text.contains("membership: confirmed"), "{text}");
}

#[test]
fn machine_demo() {
    let out = bin()
        .args(["machine", "--machine"])
        .arg(repo("scenarios/demo/machine.toml"))
        .args(["--c", "1", "--n", "4", "--complexity", "0101"])
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{text}");
    assert!(text.contains("K(0101) = 2"), "{text}");
    assert!(text.contains("within 1"), "{text}");
}
