use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_recordgraph")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn analytics_defaults() {
    let o = run(&["analytics"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["format_version"], 1);
    assert_eq!(v["status"], "pass");
    assert!((v["result"]["c"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn codec_encode_and_decode() {
    let o = run(&["codec", "encode", "--tree", "[(),()]"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "lo=-3\n-1 -1 1\n");
    let o = run(&["codec", "decode", "--seq", "lo=-3 -1 -1 1"]);
    assert_eq!(stdout(&o), "0[-1(),-2()]\n");
}

#[test]
fn codec_roundtrip_small() {
    let o = run(&["codec", "roundtrip", "--samples", "30"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["result"]["mismatches"], 0);
    assert_eq!(v["config"]["seeds"], 30);
}

#[test]
fn phase_csv_header_and_rows() {
    let o = run(&["phase", "--samples", "20"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# format_version=1");
    assert!(lines[1].starts_with("# config={"));
    assert!(lines[2].starts_with("name,mean,expected"));
    assert_eq!(lines.len(), 3 + 5);
}

#[test]
fn config_file_and_output_path() {
    let dir = std::env::temp_dir().join(format!("recordgraph-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("mtp.json");
    std::fs::write(&cfg, r#"{"sampler": {"family": "gw", "pi": [[0, 0.5], [2, 0.5]]}, "samples": 5000}"#).unwrap();
    let out = dir.join("mtp-out.json");
    let o = run(&["mtp", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    // the plain GW tree is not unimodular
    assert_eq!(o.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["status"], "statistical_fail");
    assert_eq!(v["result"]["functions"].as_array().unwrap().len(), 20);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn simulate_is_deterministic() {
    let a = run(&["simulate", "--samples", "4", "--seed", "9"]);
    let b = run(&["simulate", "--samples", "4", "--seed", "9", "--threads", "1"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(stdout(&a).lines().count(), 5);
}

#[test]
fn config_errors_exit_with_4() {
    assert_eq!(run(&["compare", "--config", "/nonexistent/config.json"]).status.code(), Some(4));
    assert_eq!(run(&["--no-such-flag", "analytics"]).status.code(), Some(4));
    let o = run(&["codec", "decode", "--seq", "-2 1"]);
    assert_eq!(o.status.code(), Some(4));
}
