use std::path::Path;
use std::process::{Command, Output};

fn relmario(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relmario"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn train_logs_a_trajectory_that_replays() {
    let dir = tempfile::tempdir().unwrap();
    let o = relmario(
        &["train", "--episodes", "30", "--out", "c.csv", "--log-trajectory", "t.log", "--checkpoint", "q.txt"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("episodes         30"));
    let csv = std::fs::read_to_string(dir.path().join("c.csv")).unwrap();
    assert_eq!(csv.lines().count(), 31);

    let o = relmario(&["replay", "--level-file", "t.log.level", "--trajectory", "t.log"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("replay ok"));

    // Continue from the checkpoint.
    let o = relmario(&["train", "--episodes", "5", "--init-checkpoint", "q.txt"], dir.path());
    assert!(o.status.success());
}

#[test]
fn tampered_trajectory_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = relmario(&["train", "--episodes", "3", "--log-trajectory", "t.log"], dir.path());
    assert!(o.status.success());
    let path = dir.path().join("t.log");
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines.pop();
    std::fs::write(&path, lines.join("\n")).unwrap();
    let o = relmario(&["replay", "--level-file", "t.log.level", "--trajectory", "t.log"], dir.path());
    assert!(!o.status.success());
}

#[test]
fn command_line_flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.cfg"), "# test\nepisodes = 40\nagent = scripted\nrun_seed = 9\n").unwrap();
    let o = relmario(&["train", "--config", "run.cfg", "--episodes", "7"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("agent            scripted"));
    assert!(out.contains("episodes         7"));
}

#[test]
fn compare_prints_one_row_per_agent() {
    let dir = tempfile::tempdir().unwrap();
    let o = relmario(
        &["compare", "--episodes", "10", "--agents", "scripted,random", "--out-dir", "cmp"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("scripted") && out.contains("random"));
    assert!(dir.path().join("cmp/random_run2.csv").exists());
}

#[test]
fn bad_input_fails_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let o = relmario(&["train", "--agent", "nope"], dir.path());
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown agent"));
    let o = relmario(&["compare", "--runs", "2", "--episodes", "5"], dir.path());
    assert!(!o.status.success());
    let o = relmario(&["train", "--alpha", "0", "--episodes", "1"], dir.path());
    assert!(!o.status.success());
}

#[test]
fn gen_level_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = relmario(&["gen-level", "--seed", "4", "--difficulty", "2"], dir.path());
    let b = relmario(&["gen-level", "--seed", "4", "--difficulty", "2"], dir.path());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
}
