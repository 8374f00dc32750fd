use std::process::{Command, Output};

fn symcap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symcap")).args(args).output().expect("symcap binary runs")
}

fn write(dir: &std::path::Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn forced_failure_exits_one_and_names_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = symcap(&["suite", "--seed", "7", "--only", "c4-square", "--expect", "c4-square=5", "--out", out]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("c4-square"));
    let csv = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("c4-square,") && l.contains(",false,")));
    assert!(dir.path().join("checks/c4-square.json").exists());
}

#[test]
fn square_passes_without_override() {
    let dir = tempfile::tempdir().unwrap();
    let o = symcap(&["suite", "--only", "c4-square", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn missing_body_exits_two_with_path() {
    let o = symcap(&["capacity", "--body", "/nonexistent/body-xyz.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/body-xyz.json"));
}

#[test]
fn malformed_body_exits_two_with_path() {
    let dir = tempfile::tempdir().unwrap();
    let body = write(dir.path(), "bad.json", r#"{"type":"ball","radius":1}"#);
    let o = symcap(&["capacity", "--body", &body]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains(&body));
}

#[test]
fn unknown_filter_and_expect_are_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(symcap(&["suite", "--only", "nope", "--out", out]).status.code(), Some(2));
    assert_eq!(symcap(&["suite", "--only", "c4-square", "--expect", "nope=1", "--out", out]).status.code(), Some(2));
}

#[test]
fn bad_worker_count_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "r.json", "[[0,-1],[1,0]]");
    let o = Command::new(env!("CARGO_BIN_EXE_symcap")).env("SYMCAP_WORKERS", "0").args(["tpsi", "--matrix", &m]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tpsi_of_quarter_rotation() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "r.json", "[[0,-1],[1,0]]");
    let o = symcap(&["tpsi", "--matrix", &m, "--from-A"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let t = v["t_psi"].as_f64().unwrap();
    assert!((t - std::f64::consts::FRAC_PI_2).abs() < 1e-8, "{t}");
    assert!((v["t_psi_a_det"].as_f64().unwrap() - t).abs() < 1e-8);
}

#[test]
fn capacity_of_disk_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let body = write(dir.path(), "disk.json", r#"{"type":"ball","center":[0,0],"radius":1}"#);
    let out = dir.path().join("r.json");
    let o = symcap(&["capacity", "--body", &body, "--nodes", "128", "--restarts", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert!((v["value"].as_f64().unwrap() - std::f64::consts::PI).abs() < 0.03);
    assert!(v["verify_carrier"].is_object());
}

#[test]
fn billiard_in_square_has_length_four() {
    let dir = tempfile::tempdir().unwrap();
    let body = write(dir.path(), "sq.json", r#"{"type":"polytope","vertices":[[1,1],[-1,1],[-1,-1],[1,-1]]}"#);
    let o = symcap(&["billiard", "--body", &body, "--bounces", "1..2", "--restarts", "8", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let l = v["accepted_lengths"][0].as_f64().unwrap();
    assert!((l - 4.0).abs() < 1e-6, "{l}");
}
