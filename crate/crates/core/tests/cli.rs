use std::path::{Path, PathBuf};

use uavlora::cli::{self, ED_SWEEP, UAV_SWEEP};

fn run(args: &[&str]) -> i32 {
    cli::run(std::iter::once("uavlora").chain(args.iter().copied()))
}

/// The single run directory created under `out`.
fn only_run(out: &Path) -> PathBuf {
    let dirs: Vec<PathBuf> = std::fs::read_dir(out).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(dirs.len(), 1, "{dirs:?}");
    dirs.into_iter().next().unwrap()
}

fn data_lines(path: &Path) -> usize {
    std::fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#')).count() - 1
}

#[test]
fn validate_config_accepts_the_shipped_file() {
    let shipped = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../config/default.toml");
    assert_eq!(run(&["validate-config", "--config", shipped.to_str().unwrap()]), 0);
    assert_eq!(run(&["validate-config"]), 0);
}

#[test]
fn bad_configs_exit_with_code_two() {
    assert_eq!(run(&["validate-config", "--override", "world.num_uavs=0"]), 2);
    assert_eq!(run(&["validate-config", "--override", "world.no_such_key=1"]), 2);
    assert_eq!(run(&["validate-config", "--override", "missing_equals"]), 2);
    assert_eq!(run(&["no-such-command"]), 2);
}

#[test]
fn simulate_writes_config_association_and_trace() {
    let out = tempfile::tempdir().unwrap();
    let o = out.path().to_str().unwrap();
    assert_eq!(run(&["simulate", "--seed", "3", "--policy", "random", "--out", o]), 0);
    let dir = only_run(out.path());
    let name = dir.file_name().unwrap().to_str().unwrap().to_string();
    assert!(name.contains("-s3-"), "{name}");
    for f in ["config.toml", "association.csv", "trace.jsonl"] {
        assert!(dir.join(f).is_file(), "missing {f}");
    }
    let (header, records) = uavlora::env::trace::read_trace(&dir.join("trace.jsonl")).unwrap();
    assert_eq!(header.seed, 3);
    assert_eq!(records.len(), 150);
    // mappo without a checkpoint is a usage error
    assert_eq!(run(&["simulate", "--policy", "mappo", "--out", o]), 2);
}

#[test]
fn evaluate_sweeps_every_point_for_every_seed() {
    let out = tempfile::tempdir().unwrap();
    let o = out.path().to_str().unwrap();
    assert_eq!(
        run(&["evaluate", "--policy", "greedy", "--override", "seeds=[1,2]", "--override", "world.horizon=3", "--out", o]),
        0
    );
    let dir = only_run(out.path());
    assert_eq!(data_lines(&dir.join("eval_eds.csv")), ED_SWEEP.len() * 2);
    assert_eq!(data_lines(&dir.join("eval_uavs.csv")), UAV_SWEEP.count() * 2);
}

#[test]
fn train_then_evaluate_and_export() {
    let out = tempfile::tempdir().unwrap();
    let o = out.path().to_str().unwrap();
    let small = [
        "--override",
        "train.total_env_steps=64",
        "--override",
        "train.hidden_dim=8",
        "--override",
        "train.epochs=1",
    ];
    let mut args = vec!["train", "--seed", "5", "--out", o];
    args.extend(small);
    assert_eq!(run(&args), 0);
    let train_dir = only_run(out.path());
    let seed_dir = train_dir.join("seed-5");
    let rows = uavlora::metrics::read_metrics(&seed_dir.join("metrics.csv")).unwrap();
    assert_eq!(rows.len(), 2);
    let policy = seed_dir.join("policy.json");
    assert!(policy.is_file() && seed_dir.join("critic.json").is_file());

    let eval_out = tempfile::tempdir().unwrap();
    let mut args = vec![
        "evaluate",
        "--seed",
        "5",
        "--checkpoint",
        policy.to_str().unwrap(),
        "--override",
        "world.horizon=2",
        "--out",
        eval_out.path().to_str().unwrap(),
    ];
    args.extend(small);
    assert_eq!(run(&args), 0);
    let eval_dir = only_run(eval_out.path());

    let plots = tempfile::tempdir().unwrap();
    assert_eq!(
        run(&[
            "export-plots",
            "--run",
            train_dir.to_str().unwrap(),
            "--run",
            eval_dir.to_str().unwrap(),
            "--out",
            plots.path().to_str().unwrap(),
        ]),
        0
    );
    let plot_dir = only_run(plots.path());
    assert_eq!(data_lines(&plot_dir.join("reward_curve.csv")), 2);
    assert!(data_lines(&plot_dir.join("ee_bars.csv")) > 0);
}

#[test]
fn oracle_reports_the_tiny_instance() {
    let out = tempfile::tempdir().unwrap();
    assert_eq!(run(&["oracle", "--seed", "4", "--out", out.path().to_str().unwrap()]), 0);
    let text = std::fs::read_to_string(only_run(out.path()).join("oracle.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let first = &v.as_array().map_or(&v, |a| &a[0]);
    assert_eq!(first["oracle"]["evaluations"], 64);
    assert!(first["oracle"]["ee_bits_per_joule"].as_f64().unwrap() >= first["greedy_ee"].as_f64().unwrap());
}
