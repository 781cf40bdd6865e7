use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use gridpilot_core::harness::sim::{simulate, AuditScript};
use gridpilot_core::{EventLog, LatencyProfileF64};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gridpilot"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn audit(input: &str, extra: &[&str], log: &Path) -> Output {
    let mut child = bin()
        .arg("audit")
        .arg(fixture("retail.json"))
        .args(["--manual-clock", "--no-grid", "--log"])
        .arg(log)
        .args(extra)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

const SESSION: &str = "\
@100 scan down
@4500 stop
@5000 mark error
@6000 jump right
@6500 jump down
@7000 bogus
@7400 jump back
quit
";

#[test]
fn audit_writes_a_replayable_log() {
    let dir = tempfile::tempdir().unwrap();
    let log_path = dir.path().join("s.jsonl");
    let out = audit(SESSION, &[], &log_path);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("error UnknownCommand"));

    let log = EventLog::from_jsonl(&std::fs::read_to_string(&log_path).unwrap()).unwrap();
    assert_eq!(log.last_t(), Some(7400));
    // scan steps at 1100, 2100, 3100, 4100 then stopped on A5
    let enters: Vec<String> = log
        .events()
        .iter()
        .filter(|e| e.kind == gridpilot_core::EventKind::CellEnter)
        .filter_map(|e| e.addr.as_ref().map(|a| format!("{}@{}", a, e.t)))
        .collect();
    assert_eq!(&enters[1..5], [
        "Opening Stock!A2@1100",
        "Opening Stock!A3@2100",
        "Opening Stock!A4@3100",
        "Opening Stock!A5@4100"
    ]);

    let out = bin().arg("replay").arg(&log_path).arg(fixture("retail.json")).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("replay ok"));
}

#[test]
fn replay_rejects_tampered_log_and_other_workbook() {
    let dir = tempfile::tempdir().unwrap();
    let log_path = dir.path().join("s.jsonl");
    assert!(audit(SESSION, &[], &log_path).status.success());

    let out = bin().arg("replay").arg(&log_path).arg(fixture("departments.json")).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("different workbook"));

    let text = std::fs::read_to_string(&log_path).unwrap();
    let tampered = text.replace("\"cell\":\"A3\"", "\"cell\":\"B3\"");
    assert_ne!(text, tampered);
    std::fs::write(&log_path, tampered).unwrap();
    let out = bin().arg("replay").arg(&log_path).arg(fixture("retail.json")).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("diverges"));
}

#[test]
fn baseline_audit_uses_dictation_commands() {
    let dir = tempfile::tempdir().unwrap();
    let log_path = dir.path().join("b.jsonl");
    let out = audit("@500 go to cell F9\n@2000 jump green\n@2500 mark error\nquit\n", &["--baseline"], &log_path);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("CellEnter Opening Stock!F9"));
    assert!(stdout.contains("error UnknownCommand"));
    let log = EventLog::from_jsonl(&std::fs::read_to_string(&log_path).unwrap()).unwrap();
    assert_eq!(log.technology(), gridpilot_core::CommandSet::Baseline);
}

#[test]
fn analyze_reports_json_and_group_test() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    let json = dir.path().join("report.json");
    assert!(audit(SESSION, &[], &a).status.success());
    assert!(audit("@100 jump right\nquit\n", &[], &b).status.success());

    let out = bin()
        .arg("analyze")
        .arg("--workbook")
        .arg(fixture("retail.json"))
        .arg("--group-a")
        .arg(&a)
        .arg("--group-b")
        .arg(&b)
        .arg("--json")
        .arg(&json)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("coverage: A > B one-sided exact p = 1/2"), "{stdout}");

    let report: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let sessions = report["sessions"].as_array().unwrap();
    assert_eq!(sessions.len(), 2);
    let cov_a = sessions[0]["metrics"]["coverage_pct"].as_f64().unwrap();
    let cov_b = sessions[1]["metrics"]["coverage_pct"].as_f64().unwrap();
    assert!(cov_a > cov_b);
    assert_eq!(report["comparisons"][0]["result"]["favorable"], 1);
    assert_eq!(report["comparisons"][0]["result"]["total"], 2);
}

#[test]
fn analyze_refuses_log_from_other_workbook() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    assert!(audit(SESSION, &[], &a).status.success());
    let out = bin()
        .arg("analyze")
        .arg(&a)
        .arg("--workbook")
        .arg(fixture("departments.json"))
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn simulate_matches_library() {
    let out = bin()
        .args(["simulate", "--json", "--script"])
        .arg(data("script.json"))
        .arg("--profile")
        .arg(data("profile.json"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let printed: Value = serde_json::from_slice(&out.stdout).unwrap();

    let script: AuditScript = serde_json::from_str(&std::fs::read_to_string(data("script.json")).unwrap()).unwrap();
    let profile: LatencyProfileF64 =
        serde_json::from_str(&std::fs::read_to_string(data("profile.json")).unwrap()).unwrap();
    let expected = serde_json::to_value(simulate(&script, &profile).unwrap()).unwrap();
    assert!(approx_eq(&printed, &expected), "{printed}\n{expected}");
}

// serde_json's default float parsing is not round-trip exact
fn approx_eq(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => (x.as_f64().unwrap() - y.as_f64().unwrap()).abs() < 1e-12,
        (Value::Array(x), Value::Array(y)) => x.len() == y.len() && x.iter().zip(y).all(|(x, y)| approx_eq(x, y)),
        (Value::Object(x), Value::Object(y)) => {
            x.len() == y.len() && x.iter().all(|(k, v)| y.get(k).is_some_and(|w| approx_eq(v, w)))
        }
        _ => a == b,
    }
}

#[test]
fn simulate_default_profile_table() {
    let out = bin().args(["simulate", "--script"]).arg(data("script.json")).output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("check_remote_ref(1)"));
    assert!(stdout.contains("6.80"));
    assert!(stdout.contains("ratio (baseline/ivoice): 2.77"));
}

#[test]
fn simulate_rejects_bad_profile() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.json");
    std::fs::write(&p, r#"{"scan_cell_ivoice_s": -1.0}"#).unwrap();
    let out = bin()
        .args(["simulate", "--script"])
        .arg(data("script.json"))
        .arg("--profile")
        .arg(&p)
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn csv_sheet_is_added() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("extra.csv");
    std::fs::write(&csv, "a,b\n1,2\n").unwrap();
    let log_path = dir.path().join("c.jsonl");
    let out = audit(
        "quit\n",
        &["--csv", &format!("Extra={}", csv.display())],
        &log_path,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    // the extra sheet changes the workbook hash
    let out = bin().arg("replay").arg(&log_path).arg(fixture("retail.json")).output().unwrap();
    assert!(!out.status.success());
}
