use std::path::Path;
use std::process::{Command, Output};

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/fixtures");

fn forge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_forge"))
        .args(args)
        .env_remove("FORGE_LLM_API_KEY")
        .output()
        .expect("run forge")
}

fn stdout(args: &[&str]) -> String {
    let out = forge(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn fixture(name: &str) -> String {
    format!("{FIXTURES}/{name}")
}

#[test]
fn classify_parse_and_metadata() {
    assert_eq!(stdout(&["classify", "c1ccccc1"]).trim(), "Easy");
    assert_eq!(stdout(&["classify", "c1ccc2ccccc2c1"]).trim(), "Medium");
    let parsed: serde_json::Value =
        serde_json::from_str(&stdout(&["parse", "propan-2-ol"])).unwrap();
    assert_eq!(parsed["heavyAtoms"], 4);
    assert_eq!(parsed["tokens"].as_array().unwrap().len(), 5);
    let xml = stdout(&["metadata", "propan-2-ol"]);
    assert!(xml.starts_with('<'));
    let bad = forge(&["parse", "bicyclo[2.2.1]heptane"]);
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("von Baeyer"));
}

#[test]
fn filter_reports_each_candidate() {
    let out = stdout(&["filter", "--input", &fixture("candidates.jsonl")]);
    let rows: Vec<serde_json::Value> = out
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(rows.len(), 100);
    assert_eq!(rows.iter().filter(|r| r["accepted"] == true).count(), 96);
}

#[test]
fn generate_export_validate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let policy = dir.path().join("policy.txt");
    std::fs::write(&policy, "route.easy = gpt-5.2 high\nroute.medium = gpt-5.2 xhigh\nroute.hard = gpt-5.2 xhigh\nmax_concurrent = 3\n").unwrap();
    let report: serde_json::Value = serde_json::from_str(&stdout(&[
        "generate",
        "--input",
        &fixture("candidates.jsonl"),
        "--policy",
        policy.to_str().unwrap(),
        "--out",
        run.to_str().unwrap(),
        "--mock",
        &fixture("mock_script.tsv"),
    ]))
    .unwrap();
    assert_eq!(report["atomMatchPassed"], 92);
    assert!(Path::new(&run).join("metadata").is_dir());

    let exported = dir.path().join("passed.jsonl");
    stdout(&[
        "export",
        "--run",
        run.to_str().unwrap(),
        "--only-passed",
        "--out",
        exported.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&exported).unwrap();
    assert_eq!(text.lines().count(), 92);
    for line in text.lines() {
        let r: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(r["reportedHeavyAtoms"], r["trueHeavyAtoms"]);
    }

    let store = dir.path().join("store");
    let args = [
        "validate",
        "--run",
        run.to_str().unwrap(),
        "--store",
        store.to_str().unwrap(),
        "--mock",
    ];
    let report: serde_json::Value = serde_json::from_str(&stdout(&args)).unwrap();
    assert_eq!(report["overall"]["total"], 92);
    assert_eq!(report["overall"]["llmPassed"], 92);
    let again: serde_json::Value = serde_json::from_str(&stdout(&args)).unwrap();
    assert_eq!(again["overall"]["total"], 92);
    let stored: serde_json::Value =
        serde_json::from_str(&stdout(&["report", "--store", store.to_str().unwrap()])).unwrap();
    assert_eq!(stored, again);
}

#[test]
fn missing_credential_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let out = forge(&[
        "generate",
        "--input",
        &fixture("candidates.jsonl"),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("FORGE_LLM_API_KEY"));
}
