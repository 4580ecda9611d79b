use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn releq(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_releq"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

fn oscillator_config(output: &str) -> Value {
    json!({
        "model": "oscillator",
        "params": {"omega0": 1.0, "W": 10.0, "beta_bath": 3.0},
        "initial": [1.0, 0.0, 9.0],
        "regime": "non_markovian",
        "t_max": 2.0,
        "dt_out": 0.1,
        "output_path": output
    })
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn identical_configs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "a.json", &oscillator_config("a.csv"));
    write_config(dir.path(), "b.json", &oscillator_config("b.csv"));
    assert!(releq(&["oscillator", "--config", "a.json"], dir.path()).status.success());
    assert!(releq(&["oscillator", "--config", "b.json"], dir.path()).status.success());
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    let b = fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("t,re_a,im_a,n,S,beta\n"));
    assert_eq!(rows(&text).len(), 21);
}

#[test]
fn metadata_echo_reproduces_output() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "run.json", &oscillator_config("first.csv"));
    assert!(releq(&["oscillator", "--config", "run.json", "--markovian"], dir.path()).status.success());
    let meta: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("first.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["regime"], "markovian");
    assert_eq!(meta["rows"], 21);
    assert_eq!(meta["version"], env!("CARGO_PKG_VERSION"));
    assert!(meta["wall_time_s"].as_f64().unwrap() >= 0.0);

    let again = tempfile::tempdir().unwrap();
    let mut echo = meta["config"].clone();
    echo["output_path"] = json!("second.csv");
    write_config(again.path(), "echo.json", &echo);
    assert!(releq(&["oscillator", "--config", "echo.json"], again.path()).status.success());
    assert_eq!(
        fs::read(dir.path().join("first.csv")).unwrap(),
        fs::read(again.path().join("second.csv")).unwrap()
    );
}

#[test]
fn zero_horizon_correlators() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "model": "corr",
        "params": {"omega0": 1.0, "W": 10.0, "beta_bath": 3.0},
        "t_max": 0.0,
        "dt_out": 0.1,
        "output_path": "corr.csv"
    });
    write_config(dir.path(), "corr.json", &cfg);
    let out = releq(&["corr", "--config", "corr.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(fs::read_to_string(dir.path().join("corr.csv")).unwrap(), "t,re_f,im_f,re_f_beta,im_f_beta\n");
}

#[test]
fn output_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "run.json", &oscillator_config("ignored.csv"));
    let out = releq(&["oscillator", "--config", "run.json", "--output", "sub/chosen.csv"], dir.path());
    assert!(out.status.success());
    assert!(dir.path().join("sub/chosen.csv").exists());
    assert!(dir.path().join("sub/chosen.meta.json").exists());
    assert!(!dir.path().join("ignored.csv").exists());
}

#[test]
fn configuration_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(releq(&["oscillator", "--config", "missing.json"], dir.path()).status.code(), Some(2));

    fs::write(dir.path().join("broken.json"), "{ not json").unwrap();
    assert_eq!(releq(&["oscillator", "--config", "broken.json"], dir.path()).status.code(), Some(2));

    write_config(dir.path(), "osc.json", &oscillator_config("o.csv"));
    assert_eq!(releq(&["tls", "--config", "osc.json"], dir.path()).status.code(), Some(2));

    let mut bad = oscillator_config("o.csv");
    bad["dt_out"] = json!(-1.0);
    write_config(dir.path(), "bad.json", &bad);
    let out = releq(&["oscillator", "--config", "bad.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dt_out"));

    let mut detuned = json!({
        "model": "tls",
        "params": {"omega0": 1.0, "W": 10.0, "beta_bath": 3.0, "Omega": 0.2, "omegaL": 1.3},
        "initial": [0.0, 0.0, 0.0],
        "t_max": 1.0,
        "dt_out": 0.1,
        "output_path": "t.csv"
    });
    write_config(dir.path(), "detuned.json", &detuned);
    assert_eq!(releq(&["tls", "--config", "detuned.json"], dir.path()).status.code(), Some(2));
    detuned["params"]["omegaL"] = json!(1.0);
    write_config(dir.path(), "detuned.json", &detuned);
    assert_eq!(releq(&["tls", "--config", "detuned.json"], dir.path()).status.code(), Some(0));
}

#[test]
fn numerical_failures_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    // coherent state: n_eff = 0, no finite temperature
    let mut cfg = oscillator_config("o.csv");
    cfg["initial"] = json!([1.0, 0.0, 1.0]);
    write_config(dir.path(), "pure.json", &cfg);
    let out = releq(&["oscillator", "--config", "pure.json"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("numerical failure"));

    let spin = json!({
        "model": "maxent_solve",
        "params": {"omega0": 1.0, "W": 10.0, "beta_bath": 3.0},
        "operators": "spin_half",
        "initial": [0.5, 0.0, 0.0],
        "output_path": "m.csv"
    });
    write_config(dir.path(), "spin.json", &spin);
    assert_eq!(releq(&["maxent-solve", "--config", "spin.json"], dir.path()).status.code(), Some(3));
}

#[test]
fn maxent_solve_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "model": "maxent_solve",
        "params": {"omega0": 1.0, "W": 10.0, "beta_bath": 3.0},
        "operators": "spin_half",
        "initial": [0.3, 0.0, 0.0],
        "output_path": "m.csv"
    });
    write_config(dir.path(), "m.json", &cfg);
    assert!(releq(&["maxent-solve", "--config", "m.json"], dir.path()).status.success());
    let csv = fs::read_to_string(dir.path().join("m.csv")).unwrap();
    let sz_row = csv.lines().find(|l| l.starts_with("sigma_z,")).unwrap();
    let f2: f64 = sz_row.split(',').nth(3).unwrap().parse().unwrap();
    assert!((f2 + 2.0 * std::f64::consts::LN_2).abs() < 1e-8);
    let meta: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("m.meta.json")).unwrap()).unwrap();
    let s = meta["summary"]["entropy"].as_f64().unwrap();
    assert!((s - 0.500_402_423_538_188_4).abs() < 1e-8);
}

#[test]
fn oscillator_thermalizes_at_bath_temperature() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = oscillator_config("fig1.csv");
    cfg["t_max"] = json!(8.0);
    cfg["dt_out"] = json!(0.5);
    write_config(dir.path(), "fig1.json", &cfg);
    assert!(releq(&["oscillator", "--config", "fig1.json", "--markovian"], dir.path()).status.success());
    let data = rows(&fs::read_to_string(dir.path().join("fig1.csv")).unwrap());
    let last = data.last().unwrap();
    assert!((last[5] - 3.0).abs() < 1e-3);
    assert!((last[3] - 1.0 / (3f64.exp() - 1.0)).abs() < 1e-5);
}

#[test]
fn tls_scenario_warns_and_heats() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "model": "tls",
        "params": {"omega0": 1.0, "W": 10.0, "beta_bath": 3.0, "Omega": 5.0, "omegaL": 1.0},
        "initial": [0.0, 0.0, 0.0],
        "regime": "non_markovian",
        "t_max": 8.0,
        "dt_out": 0.05,
        "output_path": "fig2.csv"
    });
    write_config(dir.path(), "fig2.json", &cfg);
    let out = releq(&["tls", "--config", "fig2.json"], dir.path());
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    let meta: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("fig2.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["warnings"].as_array().unwrap().len(), 1);
    let data = rows(&fs::read_to_string(dir.path().join("fig2.csv")).unwrap());
    assert!(data.iter().all(|r| r[1].hypot(r[2].hypot(r[3])) < 0.5));
    assert!(data.last().unwrap()[5] < 3.0);
}

#[test]
fn sweep_runs_every_config() {
    let dir = tempfile::tempdir().unwrap();
    for k in 0..4 {
        let mut cfg = oscillator_config(&format!("out/run{k}.csv"));
        cfg["initial"] = json!([1.0, 0.0, 5.0 + k as f64]);
        write_config(dir.path(), &format!("run{k}.json"), &cfg);
    }
    let out = releq(&["oscillator", "--sweep", "."], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for k in 0..4 {
        let data = rows(&fs::read_to_string(dir.path().join(format!("out/run{k}.csv"))).unwrap());
        assert_eq!(data[0][3], 5.0 + k as f64);
    }
    // rerunning over the same directory skips metadata files
    assert!(releq(&["oscillator", "--sweep", "."], dir.path()).status.success());

    fs::write(dir.path().join("zz.json"), "[]").unwrap();
    assert_eq!(releq(&["oscillator", "--sweep", "."], dir.path()).status.code(), Some(2));
}
