use std::fs;
use std::process::Command;

use abel_tv_cli::{
    phantom_field, run_experiment, verify_bounds, ExperimentConfig, PhantomChoice, RunConfig,
    RunOutcome, RunStatus, RESULTS_HEADER,
};

fn run(variance_fraction: f64, lambda: f64, seed: u64) -> RunConfig {
    RunConfig {
        variance_fraction,
        lambda,
        tau: 0.2,
        gamma: 0.2,
        max_iter: 300,
        seed,
        record_every: 50,
    }
}

fn config(dir: &std::path::Path, runs: Vec<RunConfig>) -> ExperimentConfig {
    ExperimentConfig {
        grid_n: 32,
        phantom: PhantomChoice::Builtin("nested-annuli".into()),
        runs,
        output_dir: dir.to_path_buf(),
    }
}

#[test]
fn empty_runs_rejected() {
    let text = r#"{"grid_n": 32, "phantom": "four-blobs", "runs": [], "output_dir": "x"}"#;
    let err = ExperimentConfig::from_json(text).unwrap_err();
    assert!(format!("{err:#}").contains("no runs"));
}

#[test]
fn bad_configs_rejected() {
    let bad = [
        r#"{"grid_n": 1, "phantom": "four-blobs", "runs": [{"variance_fraction": 0, "lambda": 1, "tau": 0.2, "gamma": 0.2, "max_iter": 5, "seed": 1}], "output_dir": "x"}"#,
        r#"{"grid_n": 32, "phantom": "nope", "runs": [{"variance_fraction": 0, "lambda": 1, "tau": 0.2, "gamma": 0.2, "max_iter": 5, "seed": 1}], "output_dir": "x"}"#,
        r#"{"grid_n": 32, "phantom": "four-blobs", "runs": [{"variance_fraction": 0, "lambda": -1, "tau": 0.2, "gamma": 0.2, "max_iter": 5, "seed": 1}], "output_dir": "x"}"#,
        r#"{"grid_n": 32, "phantom": "four-blobs", "runs": [{"variance_fraction": 0, "lambda": 1, "tau": 0.2, "gamma": 0.2, "max_iter": 0, "seed": 1}], "output_dir": "x"}"#,
    ];
    for text in bad {
        assert!(ExperimentConfig::from_json(text).is_err(), "{text}");
    }
}

#[test]
fn inline_phantom_parses() {
    let text = r#"{"grid_n": 16, "output_dir": "x",
        "phantom": {"shapes": [{"kind": "rect", "r": [0.0, 0.5], "z": [-0.5, 0.5], "level": 1.0}]},
        "runs": [{"variance_fraction": 0, "lambda": 1, "tau": 0.2, "gamma": 0.2, "max_iter": 5, "seed": 1}]}"#;
    let cfg = ExperimentConfig::from_json(text).unwrap();
    assert!(matches!(cfg.phantom, PhantomChoice::Spec(ref s) if s.shapes.len() == 1));
    assert_eq!(cfg.runs[0].record_every, 100);
}

#[test]
fn outputs_are_complete_and_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let runs = vec![run(0.0025, 50.0, 1), run(0.0005, 80.0, 2)];
    let out = run_experiment(&config(a.path(), runs.clone())).unwrap();
    run_experiment(&config(b.path(), runs)).unwrap();

    let csv = fs::read_to_string(a.path().join("results.csv")).unwrap();
    assert_eq!(
        csv,
        fs::read_to_string(b.path().join("results.csv")).unwrap()
    );
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], RESULTS_HEADER);
    assert_eq!(lines.len(), 3);
    assert!(lines[1..].iter().all(|l| l.ends_with(",ok")));
    assert_eq!(out.reports().len(), 2);
    assert!(out.all_ok());

    for name in ["summary.json", "u0.csv", "f0.csv"] {
        assert!(a.path().join(name).is_file(), "{name}");
    }
    for i in 0..2 {
        for name in ["energy.csv", "u_star.csv", "f.csv", "f_star.csv"] {
            assert!(
                a.path().join(format!("run-{i}")).join(name).is_file(),
                "{name}"
            );
        }
    }
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["runs"][0]["noise_norm_source"], "realized");
    assert!(summary["runs"][1]["onion_err_l2_uh"].as_f64().unwrap() > 0.0);
}

#[test]
fn noise_free_large_weight_recovers() {
    let dir = tempfile::tempdir().unwrap();
    let mut r = run(0.0, 1e5, 1);
    r.max_iter = 500;
    let out = run_experiment(&config(dir.path(), vec![r])).unwrap();
    let rep = out.reports()[0];
    assert!(rep.err_l2_uh <= 0.02, "{}", rep.err_l2_uh);
}

#[test]
fn failed_runs_keep_their_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_experiment(&config(dir.path(), vec![run(0.0, 10.0, 1)])).unwrap();
    let failed = RunOutcome {
        status: RunStatus::Failed("diverged at iteration 3, badly".into()),
        report: None,
        solve: None,
        ..out.runs[0].clone()
    };
    let row = failed.csv_row();
    assert_eq!(row.split(',').count(), RESULTS_HEADER.split(',').count());
    assert!(row.starts_with("0,"));
    assert!(row.ends_with("failed: diverged at iteration 3; badly"));
}

#[test]
fn bounds_subcommand_logic() {
    assert!(verify_bounds(1, 0).is_err());
    let (report, text) = verify_bounds(1, 50).unwrap();
    assert!(report.passed());
    assert!(text.contains("product-l2"));
}

#[test]
fn phantom_lookup() {
    let u = phantom_field("four-blobs", 32).unwrap();
    assert_eq!(u.values().amax(), 1.0);
    assert!(phantom_field("no-such-phantom", 32).is_err());
}

#[test]
fn binary_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_abel-tv");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.csv");
    let status = Command::new(exe)
        .args([
            "phantom",
            "--name",
            "nested-annuli",
            "--grid-n",
            "16",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(fs::read_to_string(&out).unwrap().starts_with("# grid"));

    let status = Command::new(exe)
        .args(["verify-bounds", "--trials", "20"])
        .output()
        .unwrap();
    assert!(status.status.success());

    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"grid_n": 16, "phantom": "nested-annuli", "runs": [], "output_dir": "o"}"#,
    )
    .unwrap();
    let out = Command::new(exe)
        .arg("run")
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no runs"));
}
