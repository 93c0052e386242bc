use std::path::Path;
use std::process::{Command, Output};

fn musched(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_musched")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn unknown_profile_is_a_config_error() {
    assert_eq!(code(&musched(&["baseline", "--profile", "nope"])), 1);
}

#[test]
fn bad_toml_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[search]\nc_puct = -1.0\n").unwrap();
    assert_eq!(code(&musched(&["baseline", "--profile", "tiny", "--config", path(&cfg)])), 1);
    std::fs::write(&cfg, "[search]\nno_such_key = 1\n").unwrap();
    assert_eq!(code(&musched(&["baseline", "--profile", "tiny", "--config", path(&cfg)])), 1);
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&musched(&["train"])), 1);
    assert_eq!(code(&musched(&["frobnicate"])), 1);
}

#[test]
fn missing_checkpoint_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = musched(&[
        "evaluate",
        "--profile",
        "tiny",
        "--checkpoint",
        path(&dir.path().join("absent.ckpt")),
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn selfcheck_passes_on_tiny() {
    let out = musched(&["selfcheck", "--profile", "tiny"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(code(&out), 0, "{text}");
    assert!(text.lines().all(|l| l.starts_with("[PASS]")), "{text}");
}

#[test]
fn train_evaluate_export_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let cfg = dir.path().join("small.toml");
    std::fs::write(&cfg, "[training]\nn_iterations = 1\nenvs_per_iteration = 4\nepochs = 2\nholdout_envs = 4\n[search]\nn_simulations = 20\n[evaluation]\nn_envs = 6\n").unwrap();
    let common = ["--profile", "tiny", "--config", path(&cfg), "--seed", "3"];

    let mut args = vec!["train"];
    args.extend(common);
    args.extend(["--out", path(&run)]);
    assert_eq!(code(&musched(&args)), 0);
    for f in ["config.toml", "metrics.jsonl", "iter000.ckpt", "iter001.ckpt", "final.ckpt"] {
        assert!(run.join(f).exists(), "{f} missing");
    }
    let metrics = std::fs::read_to_string(run.join("metrics.jsonl")).unwrap();
    assert_eq!(metrics.lines().count(), 2);
    let first: serde_json::Value = serde_json::from_str(metrics.lines().next().unwrap()).unwrap();
    assert_eq!(first["iteration"], 0);

    let eval = dir.path().join("eval");
    let ckpt = run.join("final.ckpt");
    let mut args = vec!["evaluate"];
    args.extend(common);
    args.extend(["--checkpoint", path(&ckpt), "--out", path(&eval)]);
    assert_eq!(code(&musched(&args)), 0);
    let report = eval.join("snr_ce_perfect.json");
    let csv = std::fs::read_to_string(eval.join("snr_ce_perfect.csv")).unwrap();
    assert!(csv.starts_with("ratio,cdf\n"));

    let again = dir.path().join("again.csv");
    assert_eq!(code(&musched(&["export-cdf", path(&report), "--out", path(&again)])), 0);
    assert_eq!(std::fs::read_to_string(&again).unwrap(), csv);
}

#[test]
fn baseline_and_oracle_write_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    std::fs::write(&cfg, "[evaluation]\nn_envs = 5\n").unwrap();
    let b = dir.path().join("b.json");
    assert_eq!(code(&musched(&["baseline", "--profile", "tiny", "--config", path(&cfg), "--out", path(&b)])), 0);
    let rewards: Vec<f64> = serde_json::from_str(&std::fs::read_to_string(&b).unwrap()).unwrap();
    assert_eq!(rewards.len(), 5);

    let o = dir.path().join("o.json");
    assert_eq!(code(&musched(&["oracle", "--profile", "tiny", "--config", path(&cfg), "--out", path(&o)])), 0);
    let rows: Vec<serde_json::Value> = serde_json::from_str(&std::fs::read_to_string(&o).unwrap()).unwrap();
    assert_eq!(rows.len(), 5);
    for r in rows {
        assert!(r["oracle"].as_f64().unwrap() >= r["baseline"].as_f64().unwrap());
    }
}

#[test]
fn oracle_refuses_large_trees() {
    // desk: 10 actions over 6 subbands is exactly the default budget, so shrink it
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("budget.toml");
    std::fs::write(&cfg, "[evaluation]\nn_envs = 1\noracle_budget = 1000\n").unwrap();
    assert_eq!(code(&musched(&["oracle", "--profile", "desk", "--config", path(&cfg)])), 2);
}
