use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fracgrad(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracgrad"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("FRACGRAD_OUT")
        .output()
        .unwrap()
}

#[test]
fn counterexample_flags_give_a_fitted_slope() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracgrad(&["counterexample", "--d", "2", "--s", "1e-2,1e-3,1e-4,1e-5"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("counterexample/report.json")).unwrap();
    let r: serde_json::Value = serde_json::from_str(&text).unwrap();
    let slope = r["fits"][0]["slope"].as_f64().unwrap();
    assert!((slope - 2.0).abs() < 0.02, "{slope}");
    assert_eq!(r["inputs"]["s"], serde_json::json!([1e-2, 1e-3, 1e-4, 1e-5]));
}

#[test]
fn every_artifact_is_listed_in_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracgrad(&["lorentz"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let exp = dir.path().join("lorentz");
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(exp.join("report.json")).unwrap()).unwrap();
    let listed: BTreeSet<String> = r["files"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_string()).collect();
    let on_disk: BTreeSet<String> = fs::read_dir(&exp)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(listed, on_disk);
}

#[test]
fn missing_config_exits_2_with_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracgrad(&["lorentz", "--config", "/no/such/fracgrad.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/no/such/fracgrad.toml"));
}

#[test]
fn unknown_keys_exit_2_with_their_name() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracgrad(&["sobolev", "--set", "sobolev.alfa=0.5"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sobolev.alfa"));

    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[classical]\nshfit = 0.5\n").unwrap();
    let o = fracgrad(&["classical", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("classical.shfit"));
}

#[test]
fn precondition_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracgrad(&["counterexample", "--s", "1e-2,2e-2"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = fracgrad(&["sobolev", "--set", "sobolev.alpha=1.5"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failing_verdict_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    // A wide mollifier pulls the trace denominator well below the perimeter.
    let o = fracgrad(&["tracefail", "--set", "tracefail.width_factor=0.9"], dir.path());
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("[FAIL] tracefail/denominator"));
}

#[test]
fn overrides_win_over_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "[counterexample]\nd = 3\n").unwrap();
    let o = fracgrad(&["config", "--config", cfg.to_str().unwrap(), "--set", "counterexample.d=2"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    let section = text.split("[counterexample]").nth(1).unwrap();
    assert!(section.trim_start().starts_with("d = 2"), "{section}");
}

#[test]
fn shipped_config_matches_defaults() {
    let shipped = Path::new(env!("CARGO_MANIFEST_DIR")).join("config/default.toml");
    let dir = tempfile::tempdir().unwrap();
    let a = fracgrad(&["config", "--config", shipped.to_str().unwrap()], dir.path());
    let b = fracgrad(&["config"], dir.path());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(String::from_utf8_lossy(&a.stdout), fs::read_to_string(&shipped).unwrap());
}
