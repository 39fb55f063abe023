use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn ffwd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ffwd")).args(args).env_remove("FFWD_DEVICE").output().expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_single_line_error(out: &Output) -> Value {
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr.clone()).unwrap();
    assert_eq!(stderr.trim_end().lines().count(), 1, "stderr: {stderr}");
    let v: Value = serde_json::from_str(stderr.trim()).unwrap();
    assert!(v["error"]["kind"].is_string() && v["error"]["message"].is_string());
    v
}

#[test]
fn ghz_enumerate_reports_every_branch() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ghz");
    let o = ffwd(&["run", "--protocol", "ghz", "--n", "4", "--engine", "enumerate", "--noise", "none", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = read_json(&out.join("manifest.json"));
    assert_eq!(m["schema_version"], 1);
    assert_eq!(m["summary"]["branches"], 8);
    assert_eq!(m["summary"]["min_branch_fidelity"], 1.0);
    for f in m["files"].as_array().unwrap() {
        assert!(out.join(f.as_str().unwrap()).exists());
    }
    let branches = read_json(&out.join("branches.json"));
    assert_eq!(branches["schema_version"], 1);
    assert_eq!(branches["branches"].as_array().unwrap().len(), 8);
}

#[test]
fn swap_summary_names_the_bell_state() {
    let dir = tempfile::tempdir().unwrap();
    let o = ffwd(&["run", "--protocol", "swap", "--input", "10", "--engine", "enumerate", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(stdout.trim(), "target=Phi-, min branch fidelity=1.0");
}

#[test]
fn seeded_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = ffwd(&[
            "run", "--protocol", "teleport", "--input", "plus", "--noise", "device_8ring.json", "--shots", "20000",
            "--seed", "7", "--out", out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let (a, b) = (run("a"), run("b"));
    for f in ["distribution.json", "distribution.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert!(std::fs::read_to_string(a.join("distribution.csv")).unwrap().starts_with("schema_version,"));
}

#[test]
fn errors_leave_no_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bad");
    std::fs::create_dir_all(&out).unwrap();
    std::fs::write(out.join("manifest.json"), "{}").unwrap();
    let o = ffwd(&["run", "--protocol", "ghz", "--n", "9", "--out", out.to_str().unwrap()]);
    assert_eq!(assert_single_line_error(&o)["error"]["kind"], "protocol");
    assert!(!out.join("manifest.json").exists());

    let o = ffwd(&["run", "--protocol", "teleport", "--engine", "enumerate", "--noise", "device", "--out", out.to_str().unwrap()]);
    assert_single_line_error(&o);
    assert!(!out.join("manifest.json").exists());

    let o = ffwd(&["run", "--protocol", "teleport", "--input", "sideways", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_single_line_error(&o);
}

#[test]
fn usage_errors_are_single_line() {
    let o = ffwd(&["run", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(assert_single_line_error(&o)["error"]["kind"], "usage");
}

#[test]
fn device_env_var_sets_the_default() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("broken.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_ffwd")).arg("validate-device").env("FFWD_DEVICE", &bad).output().unwrap();
    assert_eq!(assert_single_line_error(&o)["error"]["kind"], "device");

    let o = ffwd(&["validate-device"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["num_qubits"], 8);

    let out = dir.path().join("run");
    let o = Command::new(env!("CARGO_BIN_EXE_ffwd"))
        .args(["run", "--protocol", "ghz", "--n", "2", "--noise", "device", "--engine", "density", "--out"])
        .arg(&out)
        .env("FFWD_DEVICE", &bad)
        .output()
        .unwrap();
    assert_single_line_error(&o);
    assert!(!out.join("manifest.json").exists());
}

#[test]
fn emit_circuit_json_and_text() {
    let o = ffwd(&["emit-circuit", "--protocol", "fanout", "--n", "2"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["corrections"]["corrections"].as_array().unwrap().len(), 3);
    let o = ffwd(&["emit-circuit", "--protocol", "ghz", "--n", "3", "--format", "text"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(ffwd::circuit::parse_text(&text).is_ok());
}

#[test]
fn stabilizer_engine_matches_oracle_on_swap() {
    let dir = tempfile::tempdir().unwrap();
    let o = ffwd(&["run", "--protocol", "swap", "--input", "11", "--engine", "stabilizer", "--shots", "2000", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = read_json(&dir.path().join("manifest.json"));
    assert!(m["summary"]["tvd_to_ideal"].as_f64().unwrap() < 0.05);
}

#[test]
fn reproduction_writes_summary_then_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = ffwd(&["reproduce-paper", "--no-cb", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = read_json(&dir.path().join("manifest.json"));
    assert_eq!(m["command"], "reproduce-paper");
    assert_eq!(m["summary"]["ghz2_fidelity"]["published"], "0.92(1)");
    let csv = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert!(csv.starts_with("schema_version,metric,noiseless,simulated,published"));
    for f in m["files"].as_array().unwrap() {
        assert!(dir.path().join(f.as_str().unwrap()).exists());
    }
}
