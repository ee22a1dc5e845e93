use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ris_ddpg::ExperimentConfig;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ris-ddpg"))
}

fn run(args: &[&str]) -> Output {
    let out = bin().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "{args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn tiny_config(path: &Path) {
    let mut cfg = ExperimentConfig::desk();
    cfg.scenario.m = 2;
    cfg.scenario.n = 3;
    cfg.scenario.k = 2;
    cfg.scenario.intervals = 10;
    cfg.agent.episodes = 3;
    cfg.agent.batch_size = 8;
    cfg.agent.learning_start = 16;
    cfg.agent.actor_hidden = vec![8];
    cfg.agent.critic_hidden = vec![8];
    cfg.agent.extraction_samples = 10;
    cfg.baseline.iterations = 3;
    cfg.sweep.n_values = vec![2, 4];
    cfg.sweep.episodes = Some(1);
    cfg.run.n_mc = 10;
    cfg.save(path).unwrap();
}

#[test]
fn show_config_defaults() {
    let desk = run(&["show-config"]);
    let cfg = ExperimentConfig::from_toml_str(&String::from_utf8(desk.stdout).unwrap()).unwrap();
    assert_eq!(cfg, ExperimentConfig::desk());

    let paper = run(&["show-config", "--paper-scale", "--seed", "9"]);
    let cfg = ExperimentConfig::from_toml_str(&String::from_utf8(paper.stdout).unwrap()).unwrap();
    assert_eq!((cfg.scenario.m, cfg.scenario.n, cfg.scenario.k), (8, 80, 10));
    assert_eq!(cfg.run.seed, 9);
}

#[test]
fn convergence_then_eval_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cfg.toml");
    tiny_config(&config);
    let out = dir.path().join("run");
    let (c, o) = (config.to_str().unwrap(), out.to_str().unwrap());
    run(&["convergence", "--config", c, "--out", o, "--seed", "5"]);
    for f in ["convergence.csv", "training_log.csv", "manifest.toml", "actor.ckpt", "critic.ckpt"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let first = fs::read(out.join("convergence.csv")).unwrap();
    assert_eq!(fs::read_to_string(out.join("convergence.csv")).unwrap().lines().count(), 1 + 3);

    let again = dir.path().join("again");
    run(&["convergence", "--config", c, "--out", again.to_str().unwrap(), "--seed", "5"]);
    assert_eq!(first, fs::read(again.join("convergence.csv")).unwrap());

    let eval = run(&["eval-checkpoint", "--config", c, "--out", o, "--seed", "5"]);
    assert!(String::from_utf8_lossy(&eval.stdout).contains("ergodic min-rate"));
    assert!(out.join("eval.csv").exists());
}

#[test]
fn sweeps_write_one_row_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cfg.toml");
    tiny_config(&config);
    let c = config.to_str().unwrap();
    let rate = dir.path().join("rate");
    run(&["rate-sweep", "--config", c, "--out", rate.to_str().unwrap(), "--n", "2,3,6"]);
    let text = fs::read_to_string(rate.join("rate_sweep.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 3);
    assert!(text.starts_with("n,pilot_factor,"));

    let cx = dir.path().join("cx");
    run(&["complexity", "--config", c, "--out", cx.to_str().unwrap()]);
    let text = fs::read_to_string(cx.join("complexity.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 2);
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[1], "1");
        assert_eq!(cols[2], "10");
    }
}

#[test]
fn clamped_sweep_point_prints_notice() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cfg.toml");
    tiny_config(&config);
    let c = config.to_str().unwrap();
    let out = run(&["rate-sweep", "--config", c, "--out", dir.path().join("o").to_str().unwrap(), "--n", "60"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("no data slots"));
}

#[test]
fn bad_inputs_fail() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    fs::write(&config, "[scenario]\nm = 0\n").unwrap();
    let out = bin().args(["convergence", "--config", config.to_str().unwrap()]).output().unwrap();
    assert!(!out.status.success());
    let out = bin().args(["eval-checkpoint", "--checkpoint", "/nonexistent/actor.ckpt"]).output().unwrap();
    assert!(!out.status.success());
}
