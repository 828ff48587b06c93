use std::path::PathBuf;
use std::process::{Command, Output};

fn bellwire(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bellwire"))
        .args(args)
        .env_remove("BELLWIRE_THREADS")
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("bellwire-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn doubling_passes() {
    let out = bellwire(&["reproduce-thm2", "--epsilon", "0.125"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["status"], "pass");
    assert!((v["ratio"].as_f64().unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn quarter_is_reported_degenerate() {
    let out = bellwire(&["reproduce-thm2", "--epsilon", "0.25"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["status"], "degenerate");
    assert!(v["ratio"].is_null());
}

#[test]
fn epsilon_out_of_range_is_a_usage_error() {
    for eps in ["0", "0.5", "0.7", "-1", "abc"] {
        let out = bellwire(&["reproduce-thm2", "--epsilon", eps]);
        assert_eq!(out.status.code(), Some(2), "epsilon {eps}");
    }
}

#[test]
fn growth_passes() {
    let out = bellwire(&["reproduce-thm5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["status"], "pass");
    assert!(v["ratio"].as_f64().unwrap() > 3.99);
}

#[test]
fn malformed_file_names_line_and_column() {
    let path = scratch("broken.json");
    std::fs::write(&path, "{\n  \"sA\": 2,\n  \"rA\": 2,\n  oops\n}\n").unwrap();
    let out = bellwire(&["eval", "snl", "--in", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 4") && err.contains("column"), "{err}");
}

#[test]
fn missing_input_is_an_error() {
    let out = bellwire(&["eval", "snl", "--in", "/nonexistent/behavior.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("neither a file nor a preset"));
}

#[test]
fn eval_writes_to_out_file() {
    let path = scratch("sb.json");
    let out = bellwire(&[
        "eval",
        "sb",
        "--in",
        "appendix-c-p0",
        "--in2",
        "appendix-c-p0prime",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!((v["bits"].as_f64().unwrap() - 0.25 * 3f64.log2()).abs() < 1e-12, "{v}");
}

#[test]
fn eval_csv_has_header() {
    let out = bellwire(&["eval", "snl", "--in", "pr-box", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().contains("value"));
    assert!(lines.next().is_some());
}

#[test]
fn campaign_is_identical_across_thread_counts() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_bellwire"))
            .args(["campaign", "--suite", "gw_contractivity", "--trials", "40", "--seed", "7"])
            .env("BELLWIRE_THREADS", threads)
            .output()
            .unwrap()
    };
    let (one, three) = (run("1"), run("3"));
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(three.status.code(), Some(0));
    assert_eq!(one.stdout, three.stdout);
    assert!(String::from_utf8_lossy(&one.stdout).starts_with("suite,trial,check"));
}
