use std::fs;
use std::process::{Command, Output};

fn bsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bsim")).args(args).output().expect("spawn bsim")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn unknown_key_is_a_usage_error() {
    let o = bsim(&["tone", "colour=blue"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));
}

#[test]
fn missing_subcommand_is_a_usage_error() {
    assert_eq!(bsim(&[]).status.code(), Some(2));
    assert_eq!(bsim(&["warp"]).status.code(), Some(2));
}

#[test]
fn rejected_parameter_value_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = bsim(&["--out", out, "uplink", "rate=1", "trials=1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn command_line_overrides_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# uplink sweep\nrate = 5.5\ntrials = 7\nseed = 9\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let line = stdout(&bsim(&["--config", cfg, "--show-config", "uplink", "trials=3"]));
    assert!(line.contains("rate=5.5"), "{line}");
    assert!(line.contains("trials=3"), "{line}");
    assert!(line.contains("seed=9"), "{line}");

    let line = stdout(&bsim(&["--config", cfg, "--seed", "4", "--show-config", "uplink", "seed=5"]));
    assert!(line.contains("seed=4"), "{line}");
}

#[test]
fn csv_outputs_carry_the_resolved_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let o = bsim(&["--seed", "12", "--out", dir.path().to_str().unwrap(), "tone", "channel=39"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("tone_fraction"));
    let csv = fs::read_to_string(dir.path().join("tone_spectrum.csv")).unwrap();
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("# bsim tone "), "{header}");
    assert!(header.contains("channel=39") && header.contains("seed=12"), "{header}");
    assert_eq!(lines.next(), Some("freq_hz,power_db"));
    assert!(dir.path().join("tone.iq.meta").exists());
}
