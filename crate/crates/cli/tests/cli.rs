use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use ufls_core::harness::{bundled_scenario_1, bundled_scenario_2, Scenario};

fn ufls(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ufls")).args(args).output().expect("binary runs")
}

fn write_scenario(dir: &Path, s: &Scenario) -> String {
    let path = dir.join("scenario.json");
    fs::write(&path, s.to_json()).unwrap();
    path.display().to_string()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn simulate_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let s = Scenario { duration_s: 8.0, ..bundled_scenario_1() };
    let path = write_scenario(dir.path(), &s);
    let out = dir.path().join("out");
    let o = ufls(&["simulate", "--scenario", &path, "--scheme", "rocof_a", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let metrics: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(metrics["scheme"], "rocof_a");
    for f in ["metrics.json", "commands.csv", "frequency_coi.csv"] {
        assert!(out.join(f).is_file(), "{f}");
    }
}

#[test]
fn invalid_scenarios_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ not json").unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    assert_eq!(code(&ufls(&["simulate", "--scenario", bad.to_str().unwrap(), "--out", out])), 2);
    assert_eq!(code(&ufls(&["simulate", "--scenario", "/nonexistent/s.json", "--out", out])), 2);

    let mut s = bundled_scenario_1();
    s.fleet[0].pm_setpoint_mw += 50.0;
    let path = dir.path().join("unbalanced.json");
    fs::write(&path, serde_json::to_string(&s).unwrap()).unwrap();
    assert_eq!(code(&ufls(&["compare", "--scenario", path.to_str().unwrap(), "--out", out])), 2);

    let good = write_scenario(dir.path(), &bundled_scenario_1());
    assert_eq!(code(&ufls(&["simulate", "--scenario", &good, "--scheme", "bogus", "--out", out])), 2);
}

#[test]
fn collapse_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), &bundled_scenario_2());
    let out = dir.path().join("out");
    let o = ufls(&["simulate", "--scenario", &path, "--scheme", "none", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    let metrics: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics["collapse"], true);
}

#[test]
fn compare_prints_a_summary_row_per_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let s = Scenario { duration_s: 10.0, ..bundled_scenario_1() };
    let path = write_scenario(dir.path(), &s);
    let out = dir.path().join("cmp");
    let o = ufls(&["compare", "--scenario", &path, "--schemes", "f_ls,rocof_a", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = stdout.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("f_ls,") && rows[2].starts_with("rocof_a,"));
    assert_eq!(fs::read_to_string(out.join("summary.csv")).unwrap(), stdout);
    assert!(out.join("f_ls").join("metrics.json").is_file());
}

#[test]
fn pmu_ramp_test_meets_limits() {
    let dir = tempfile::tempdir().unwrap();
    let o = ufls(&["pmu-test", "ramp", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("pmu_compliance.json")).unwrap()).unwrap();
    assert!(v["ramp"]["rocof_std"].as_f64().unwrap() <= 0.015);
    assert!(v["steady_nominal"]["max_rfe"].as_f64().unwrap() <= 0.010);
    assert!(dir.path().join("frames_ramp.csv").is_file());
}

#[test]
fn calibrate_reports_the_scale() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), &bundled_scenario_1());
    let o = ufls(&["calibrate", "--scenario", &path, "--target-rocof", "0.5"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["predicted_initial_rocof_hzps"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert!(v["inertia_scale"].as_f64().unwrap() > 0.0);
}
