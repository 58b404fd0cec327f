use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_friction-lab"));
    c.env_remove("FRICTION_LAB_LOG");
    c
}

fn write_config(dir: &Path, cfg: &Value) -> PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path
}

fn run(dir: &Path, cfg: &Value, args: &[&str]) -> Output {
    let path = write_config(dir, cfg);
    bin()
        .args(args)
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap()
}

fn stdout_json(o: &Output) -> Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn stderr_error(o: &Output) -> Value {
    let text = String::from_utf8_lossy(&o.stderr);
    let line = text.lines().find(|l| l.starts_with('{')).unwrap_or_else(|| panic!("no error json in {text}"));
    serde_json::from_str::<Value>(line).unwrap()["error"].clone()
}

#[test]
fn kernel_eval_minimal_friction() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &json!({ "kernel": { "alpha": 1.0, "sigma": 1.0, "epsilon": 0.0 } }), &["kernel", "eval"]);
    assert_eq!(stdout_json(&o), json!({ "friction": 0.5 }));
}

#[test]
fn kernel_eval_domain_and_pole() {
    let dir = TempDir::new().unwrap();
    let domain = json!({ "domain": { "stakeholders": [
        { "id": "a", "stake": 1.0, "alignment": 1.0, "entropy": 0.0, "voice": 1.0, "consents": true },
        { "id": "b", "stake": 1.0, "alignment": 0.0, "entropy": 0.0, "voice": 0.0, "consents": false }
    ] } });
    let v = stdout_json(&run(dir.path(), &domain, &["kernel", "eval"]));
    assert_eq!(v["friction"], json!(1.5));
    assert_eq!(v["legitimacy"], json!(0.5));

    let o = run(dir.path(), &json!({ "kernel": { "alpha": -1.0, "sigma": 1.0, "epsilon": 0.0 } }), &["kernel", "eval"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_error(&o)["kind"], "domain");
}

#[test]
fn missing_config_file() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.json");
    let o = bin().args(["kernel", "eval", "--config"]).arg(&missing).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let err = stderr_error(&o);
    assert_eq!(err["kind"], "io");
    assert_eq!(err["path"], json!(missing));
}

#[test]
fn schema_violation_names_field() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &json!({ "marl": { "agent": { "episodes": -3 } } }), &["marl", "run"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr_error(&o);
    assert_eq!(err["kind"], "config");
    assert_eq!(err["field"], "marl.agent.episodes");
}

#[test]
fn missing_block_and_unknown_subcommand() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &json!({}), &["rom", "stationary"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr_error(&o)["message"].as_str().unwrap().contains("rom"));
    let o = bin().arg("frobnicate").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn allocation_and_estimates() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({
        "allocation": {
            "stakes": [[1.0], [1.0]],
            "alignments": [[[1.0], [0.0]], [[1.0], [1.0]]],
            "entropies": [[0.0, 0.0], [0.0, 0.0]]
        },
        "estimate": {
            "entropy": { "mode": "channel", "joint": [[0.5, 0.0], [0.0, 0.5]] },
            "proxy": { "mode": "volatility", "realized": 5.7, "baseline": 1.0 }
        }
    });
    let v = stdout_json(&run(dir.path(), &cfg, &["kernel", "alloc"]));
    assert_eq!(v, json!({ "assignment": [1], "friction": 0.5 }));
    assert_eq!(stdout_json(&run(dir.path(), &cfg, &["estimate", "entropy"])), json!({ "entropy": 0.0 }));
    assert_eq!(stdout_json(&run(dir.path(), &cfg, &["estimate", "proxy"])), json!({ "proxy": 5.7 }));
    assert_eq!(run(dir.path(), &cfg, &["estimate", "stake"]).status.code(), Some(2));
}

fn block_system() -> Value {
    json!({
        "weights": [1.0, 1.0, 2.0, 2.0],
        "survival": [0.9, 0.9, 0.5, 0.5],
        "mutation": [
            [0.5, 0.2, 0.2, 0.1],
            [0.3, 0.4, 0.1, 0.2],
            [0.1, 0.1, 0.4, 0.4],
            [0.15, 0.05, 0.3, 0.5]
        ]
    })
}

#[test]
fn rom_subcommands() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({ "rom": { "system": block_system(), "dt": 0.01, "steps": 100, "record_every": 10 } });
    let v = stdout_json(&run(dir.path(), &cfg, &["rom", "simulate"]));
    assert_eq!(v["rows"], 11);
    let csv = fs::read_to_string(dir.path().join("out/rom_trajectory.csv")).unwrap();
    assert_eq!(csv.lines().count(), 12);
    assert!(csv.starts_with("step,t,p0,p1,p2,p3\n0,0,0.25,"));
    let v = stdout_json(&run(dir.path(), &cfg, &["rom", "stationary"]));
    assert!(v["residual"].as_f64().unwrap() < 1e-8);
    let p: Vec<f64> = serde_json::from_value(v["stationary"].clone()).unwrap();
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn coarse_subcommands() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({ "coarse": { "system": block_system(), "partition": [0, 0, 1, 1] } });
    let v = stdout_json(&run(dir.path(), &cfg, &["coarse", "check"]));
    assert_eq!(v["lumpable"], true);
    let v = stdout_json(&run(dir.path(), &cfg, &["coarse", "grain"]));
    assert_eq!(v["system"]["mutation"].as_array().unwrap().len(), 2);
    assert!(dir.path().join("out/coarse_system.json").is_file());

    let mut sys = block_system();
    sys["mutation"][0] = json!([0.5, 0.15, 0.25, 0.1]);
    let cfg = json!({ "coarse": { "system": sys, "partition": [0, 0, 1, 1] } });
    assert_eq!(stdout_json(&run(dir.path(), &cfg, &["coarse", "check"]))["lumpable"], false);
    let o = run(dir.path(), &cfg, &["coarse", "grain"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn dynamics_subcommands() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({ "dynamics": {
        "path": {
            "sigma": [[0.0, 1.0], [10.0, 1.0]],
            "alpha": [[0.0, 0.0], [10.0, 0.5]],
            "epsilon": [[0.0, 0.5], [10.0, 0.0]]
        },
        "times": [0.0, 5.0],
        "horizon": 10.0,
        "samples": 11
    } });
    let v = stdout_json(&run(dir.path(), &cfg, &["dyn", "rate"]));
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["friction"], json!(1.5));
    assert!(rows[0]["rate"].as_f64().unwrap() < 0.0);
    let v = stdout_json(&run(dir.path(), &cfg, &["dyn", "lyapunov"]));
    assert_eq!(v["conditions_hold"], true);
}

fn tiny_sweep() -> Value {
    json!({
        "master_seed": 5,
        "marl": {
            "design": {
                "alpha_levels": [0.0, 0.8],
                "sigma_levels": [0.2, 1.0],
                "epsilon_levels": [0.0, 1.0],
                "replications": 2
            },
            "env": { "episode_length": 20 },
            "agent": { "approximator": { "kind": "tabular", "bins": 4 }, "learn_rate": 0.1, "discount": 0.9, "episodes": 20 },
            "metrics": { "alignment_samples": 200 }
        },
        "analysis": { "permutations": 99 }
    })
}

#[test]
fn sweep_analyze_plot_pipeline() {
    let dir = TempDir::new().unwrap();
    let cfg = tiny_sweep();
    let v = stdout_json(&run(dir.path(), &cfg, &["marl", "run", "--workers", "2"]));
    assert_eq!(v["records"], 16);
    let csv_path = dir.path().join("out/metrics.csv");
    let csv = fs::read_to_string(&csv_path).unwrap();
    let records = friction_marl::read_csv_path(&csv_path).unwrap();
    assert_eq!(friction_marl::to_csv_string(&records).unwrap(), csv);

    stdout_json(&run(dir.path(), &cfg, &["analyze"]));
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/analysis.json")).unwrap()).unwrap();
    let ids: Vec<&str> = report["hypotheses"].as_array().unwrap().iter().map(|h| h["hypothesis"].as_str().unwrap()).collect();
    for h in ["H1", "H2", "H3", "H4"] {
        assert!(ids.contains(&h), "{h} missing");
    }
    assert!(dir.path().join("out/coefficients.csv").is_file());

    let v = stdout_json(&run(dir.path(), &cfg, &["plot", "heatmap"]));
    assert_eq!(v["cells"], 4);
    let svg = fs::read_to_string(dir.path().join("out/heatmap.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
}

#[test]
fn sweep_output_ignores_worker_count() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    stdout_json(&run(a.path(), &tiny_sweep(), &["marl", "run", "--workers", "1"]));
    stdout_json(&run(b.path(), &tiny_sweep(), &["marl", "run", "--workers", "3"]));
    let read = |d: &TempDir| fs::read(d.path().join("out/metrics.csv")).unwrap();
    assert_eq!(read(&a), read(&b));

    let c = TempDir::new().unwrap();
    stdout_json(&run(c.path(), &tiny_sweep(), &["marl", "run", "--seed", "6"]));
    assert_ne!(read(&a), read(&c));
}

#[test]
fn heatmap_reports_missing_cells() {
    let dir = TempDir::new().unwrap();
    let records = vec![
        "0,0,0,0,0,0.2,0,1,0.5,never,0,0,0,0.2,",
        "1,1,0,0,0.8,1,0,2,0.5,3,0,0,0,0.5555555555555556,",
    ];
    let header = friction_marl::COLUMNS.join(",");
    let csv = format!("{header}\n{}\n", records.join("\n"));
    let input = dir.path().join("partial.csv");
    fs::write(&input, csv).unwrap();
    let cfg = json!({ "heatmap": { "input": "partial.csv" } });
    let o = run(dir.path(), &cfg, &["plot", "heatmap"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr_error(&o);
    assert_eq!(err["kind"], "grid");
    assert_eq!(err["missing"], json!([[0.8, 0.2], [0.0, 1.0]]));
}

#[test]
fn analyze_without_metrics_file() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &json!({}), &["analyze"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr_error(&o)["path"].as_str().unwrap().ends_with("metrics.csv"));
}
