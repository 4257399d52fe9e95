use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn kgband(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kgband")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn negativity_of_neighbouring_sample_points() {
    let doc = json(&kgband(&["negativity", "--lambda", "0.1", "--separation", "1"]));
    let e_n = doc["result"]["e_n"].as_f64().unwrap();
    assert!((e_n / 1.013e-3 - 1.0).abs() < 0.05, "{e_n}");
    assert!((e_n - 1.008_667_6e-3).abs() < 1e-9, "{e_n}");
    assert_eq!(doc["result"]["entangled"], Value::Bool(true));
    assert_eq!(doc["config"]["lambda"], 0.1);
    assert_eq!(doc["metadata"]["version"], env!("CARGO_PKG_VERSION"));
    assert!(doc["metadata"].get("wall_time_s").is_none());
}

#[test]
fn nu_excess_sweep_csv_with_fit() {
    let out = kgband(&["sweep", "--quantity", "nu_excess", "--lambda-geom", "1e-3:1e-1:13", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "lambda,value,d_phi2,d_pi2");
    let rows: Vec<Vec<f64>> = lines[1..]
        .iter()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 13);
    assert!(rows.windows(2).all(|w| w[1][0] > w[0][0]));
    let fit = lines.iter().find(|l| l.starts_with("# fit ")).expect("fit line");
    let exponent: f64 = fit
        .split_whitespace()
        .find_map(|kv| kv.strip_prefix("exponent="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((exponent - 4.0).abs() < 0.05, "{exponent}");
}

#[test]
fn negativity_sweep_recovers_inverse_square_law_prefactor() {
    let doc = json(&kgband(&["sweep", "--quantity", "e_n", "--lambda-geom", "1e-3:1e-1:9"]));
    let fit = &doc["fit"];
    assert!((fit["exponent"].as_f64().unwrap() - 2.0).abs() < 0.05);
    let pref = fit["prefactor"].as_f64().unwrap();
    assert!((pref * std::f64::consts::PI.powi(2) - 1.0).abs() < 0.05, "{pref}");
    assert!(doc.get("errors").is_none());
}

#[test]
fn invalid_lambda_exits_with_config_code() {
    let out = kgband(&["negativity", "--lambda", "1.5", "--separation", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lambda must lie in (0,1)"));
    assert!(out.stdout.is_empty());

    let out = kgband(&["moments", "--modes", "7"]);
    assert_eq!(out.status.code(), Some(2));
    let out = kgband(&["moments", "--lambda-geom", "1e-3:2:5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missed_tolerance_exits_with_accuracy_code_and_keeps_artifact() {
    let out = kgband(&["bogoliubov-check", "--lambda", "0.3", "--tolerance", "1e-30"]);
    assert_eq!(out.status.code(), Some(3));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(doc["result"]["fock_residual"].as_f64().unwrap() > 1e-30);
    assert!(String::from_utf8_lossy(&out.stderr).contains("requested tolerance"));
}

#[test]
fn oracle_aliasing_is_a_config_error() {
    let out = kgband(&["oracle", "--lambda", "0.2", "--spacing", "20"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("aliasing"));
}

#[test]
fn identical_configs_give_identical_bytes() {
    let args = ["sweep", "--quantity", "temperature", "--lambda-geom", "1e-4:1e-1:8"];
    let a = kgband(&args);
    let b = kgband(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn echoed_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    let second = dir.path().join("second.json");
    let out = kgband(&[
        "entropy",
        "--lambda",
        "0.37",
        "--modes",
        "2",
        "--separation",
        "2",
        "--output",
        path_str(&first),
    ]);
    assert!(out.status.success());
    let out = kgband(&["entropy", "--config", path_str(&first), "--output", path_str(&second)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let a: Value = serde_json::from_str(&std::fs::read_to_string(&first).unwrap()).unwrap();
    let mut b: Value = serde_json::from_str(&std::fs::read_to_string(&second).unwrap()).unwrap();
    // the output path is the only key that differs
    b["config"]["output"] = a["config"]["output"].clone();
    assert_eq!(a, b);

    // a config from another command is rejected
    let out = kgband(&["moments", "--config", path_str(&first)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn key_value_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# pair at two spacings\nlambda = 0.1\nseparation = 2\n").unwrap();
    let doc = json(&kgband(&["negativity", "--config", path_str(&cfg)]));
    assert_eq!(doc["config"]["separation"], 2);
    let e2 = doc["result"]["e_n"].as_f64().unwrap();
    let doc = json(&kgband(&["negativity", "--config", path_str(&cfg), "--separation", "1"]));
    let e1 = doc["result"]["e_n"].as_f64().unwrap();
    assert!(e1 > 3.5 * e2 && e1 < 4.5 * e2);

    std::fs::write(&cfg, "lambda 0.1\n").unwrap();
    assert_eq!(kgband(&["negativity", "--config", path_str(&cfg)]).status.code(), Some(2));
    std::fs::write(&cfg, "colour = red\n").unwrap();
    assert_eq!(kgband(&["negativity", "--config", path_str(&cfg)]).status.code(), Some(2));
}

#[test]
fn failed_sweep_points_are_recorded_not_fatal() {
    let doc = json(&kgband(&[
        "sweep",
        "--dimension",
        "2",
        "--shape",
        "sphere",
        "--quantity",
        "e_n",
        "--lambda-geom",
        "0.01:0.1:4",
    ]));
    assert_eq!(doc["result"]["rows"].as_array().unwrap().len(), 0);
    assert_eq!(doc["errors"].as_array().unwrap().len(), 5);
    assert!(doc.get("fit").is_none());
}

#[test]
fn record_written_by_one_run_is_read_by_another() {
    let dir = tempfile::tempdir().unwrap();
    let rec = dir.path().join("state.rec");
    let a = json(&kgband(&[
        "reconstruct",
        "--lambda",
        "0.25",
        "--center",
        "1.7",
        "--window-radius",
        "80",
        "--points",
        "0.3,-4.0",
        "--record-out",
        path_str(&rec),
    ]));
    let text = std::fs::read_to_string(&rec).unwrap();
    assert!(text.starts_with("params dimension=1 lambda=0.25 shape=box\noffset 0.0\nwindow -80 80\n"));
    let b = json(&kgband(&["reconstruct", "--input", path_str(&rec), "--points", "0.3,-4.0"]));
    assert_eq!(a["result"]["rows"], b["result"]["rows"]);
}

#[test]
fn povm_and_evolution_summaries() {
    let doc = json(&kgband(&["povm", "--window-radius", "256"]));
    let p = doc["result"]["probability"].as_f64().unwrap();
    assert!((p - 0.9028).abs() < 1e-4);
    assert!(doc["result"]["nonidempotency"].as_f64().unwrap() > 0.01);

    let doc = json(&kgband(&["evolve", "--lambda", "0.1", "--time", "100"]));
    assert!(doc["result"]["max_phase_error"].as_f64().unwrap() <= 1.25e-3);
    assert!((doc["result"]["norm_exact"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn timing_lives_in_metadata_only() {
    let doc = json(&kgband(&["temperature", "--timing"]));
    assert!(doc["metadata"]["wall_time_s"].as_f64().unwrap() >= 0.0);
    assert!((doc["result"]["temperature"].as_f64().unwrap() / 0.0695 - 1.0).abs() < 0.01);
}
