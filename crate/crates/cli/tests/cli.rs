use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn sdrl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdrl")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn fixtures_validate_cleanly() {
    for f in ["montezuma.bc", "taxi.bc"] {
        let o = sdrl(&["validate", fixture(f).to_str().unwrap()]);
        assert!(o.status.success(), "{f}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn uniform_gains_fill_seven_steps() {
    let m = fixture("montezuma.bc");
    let o = sdrl(&["plan", m.to_str().unwrap(), "--from", "loc=mp", "--max-len", "7", "--inf", "10"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("# quality 70.000000\n"), "{text}");
    let actions = text.lines().find_map(|l| l.strip_prefix("# actions ")).unwrap();
    assert_eq!(actions.split(' ').count(), 7);
}

#[test]
fn oracle_reports_the_coupon_plan() {
    let t = fixture("taxi.bc");
    let o = sdrl(&["oracle", t.to_str().unwrap(), "--from", "start", "--max-len", "6", "--taxi-task", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("collect"), "{text}");
    assert!(text.contains("dropoff"), "{text}");
}

#[test]
fn bad_input_exit_codes() {
    let m = fixture("montezuma.bc");
    assert_eq!(sdrl(&["plan"]).status.code(), Some(2));
    assert_eq!(sdrl(&["validate", "/nonexistent/x.bc"]).status.code(), Some(2));
    assert_eq!(sdrl(&["plan", m.to_str().unwrap(), "--from", "loc=nowhere"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.bc");
    std::fs::write(&broken, "fluent f : bool\ninertial g\n").unwrap();
    assert_eq!(sdrl(&["validate", broken.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn run_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.cfg");
    std::fs::write(
        &cfg,
        "env = synthetic\nsynthetic_nodes = 3\nsynthetic_labels = 2\nsynthetic_edges = 0:0:1:1, 1:1:2:2, 0:1:2:-1\nepisodes = 200\nseeds = 1..2\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = sdrl(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["seed_1_curve.csv", "seed_2_plan.txt", "summary.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let o = sdrl(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seeds", "9..1"]);
    assert_eq!(o.status.code(), Some(2));
}
