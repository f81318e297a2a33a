use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ssdf(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ssdf"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn ssdf")
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

const SCENARIO: &str = r#"
sensors = 12
malicious = 2
attack = "cooperative_masking"
test = "tm"
estimator = "mlg"
snr_db = [-21.0, -19.0]
trials = 500
table_replications = 5000
"#;

#[test]
fn sweep_writes_csv_and_is_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.toml"), SCENARIO).unwrap();
    ok(&ssdf(
        dir.path(),
        &["sweep", "--config", "s.toml", "--out", "a.csv", "--threads", "1"],
    ));
    ok(&ssdf(
        dir.path(),
        &["sweep", "--config", "s.toml", "--out", "b.csv", "--threads", "4"],
    ));
    let a = fs::read_to_string(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, fs::read_to_string(dir.path().join("b.csv")).unwrap());
    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(
        lines[0],
        "sweep_var,q_fa,q_d,mu_detection_rate,honest_exclusion_rate,mean_estimated_t,trials,seed"
    );
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("-2.10000000000e1,"));
    assert!(lines[1].ends_with(",500,1"));
    assert!(dir.path().join("ssdf-critical-values.txt").exists());
}

#[test]
fn run_overrides_seed_and_trials() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.toml"), SCENARIO).unwrap();
    let out = ok(&ssdf(
        dir.path(),
        &[
            "run", "--config", "s.toml", "--seed", "7", "--trials", "50", "--snr-db", "-18",
        ],
    ));
    let row = out.lines().nth(1).unwrap();
    assert!(row.starts_with("-1.80000000000e1,"));
    assert!(row.ends_with(",50,7"));
}

#[test]
fn sweep_range_over_thresholds() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.toml"), SCENARIO).unwrap();
    let out = ok(&ssdf(
        dir.path(),
        &[
            "sweep",
            "--config",
            "s.toml",
            "--var",
            "threshold",
            "--from",
            "0.99",
            "--to",
            "1.03",
            "--points",
            "5",
        ],
    ));
    assert_eq!(out.lines().count(), 6);
}

#[test]
fn table_builds_a_versioned_cache() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.toml"), SCENARIO).unwrap();
    ok(&ssdf(dir.path(), &["table", "--config", "s.toml", "--out", "cv.txt"]));
    let text = fs::read_to_string(dir.path().join("cv.txt")).unwrap();
    assert!(text.starts_with("# ssdf-critical-values v1\n"));
    assert!(text.lines().any(|l| l.starts_with("tm_half_gap 12 ")));
    // a second pass finds everything and leaves the file alone
    ok(&ssdf(dir.path(), &["table", "--config", "s.toml", "--out", "cv.txt"]));
    assert_eq!(text, fs::read_to_string(dir.path().join("cv.txt")).unwrap());
}

#[test]
fn no_build_fails_on_missing_values() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.toml"), SCENARIO).unwrap();
    let out = ssdf(dir.path(), &["run", "--config", "s.toml", "--no-build"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("lacks critical values"));
}

#[test]
fn bad_config_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.toml"), "sensors = 6\nmalicious = 3\n").unwrap();
    let out = ssdf(dir.path(), &["run", "--config", "s.toml"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("malicious"));
}
