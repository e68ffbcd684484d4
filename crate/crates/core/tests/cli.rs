use std::fs;
use std::path::Path;
use std::process::Command;

fn ecgame(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_ecgame")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_writes_named_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.conf", "r_max = 8\n");
    let out = dir.path().join("out");
    let o = ecgame(&["run", "--config", &cfg, "--seed", "9", "--out", out.to_str().unwrap(), "--svg"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("sweep-r-9.csv")).unwrap();
    let data: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data[0], "r,p_success,p_recover,throughput,delay,valid");
    assert_eq!(data.len(), 1 + 9);
    assert!(csv.contains("# seed: 9"));
    let svg = fs::read_to_string(out.join("sweep-r-9.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn cells_are_finite_or_none() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.conf", "scenario = modes\nm_nodes = 1\n");
    let o = ecgame(&["run", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("modes-1.csv")).unwrap();
    for line in csv.lines().filter(|l| !l.starts_with('#')).skip(1) {
        for cell in line.split(',') {
            let lower = cell.to_ascii_lowercase();
            assert!(!lower.contains("nan") && !lower.contains("inf"), "{line}");
            assert!(cell == "none" || cell == "true" || cell == "false" || cell.parse::<f64>().is_ok_and(f64::is_finite));
        }
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.conf", "scenario = modes\nevaluator = simulated\nslots = 5000\n");
    let mut outputs = Vec::new();
    for sub in ["a", "b"] {
        let out = dir.path().join(sub);
        let o = ecgame(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--svg"]);
        assert_eq!(o.status.code(), Some(0));
        outputs.push((fs::read(out.join("modes-1.csv")).unwrap(), fs::read(out.join("modes-1.svg")).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn config_and_usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad_key = write_config(dir.path(), "bad.conf", "speed = 3\n");
    let o = ecgame(&["run", "--config", &bad_key]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("speed"));

    let bad_range = write_config(dir.path(), "range.conf", "alpha = -1\n");
    let o = ecgame(&["validate", "--config", &bad_range]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha"));

    assert_eq!(ecgame(&["run", "--config", "/nonexistent/x.conf"]).status.code(), Some(1));
    assert_eq!(ecgame(&["run"]).status.code(), Some(1));
    assert_eq!(ecgame(&["frobnicate"]).status.code(), Some(1));
    let good = write_config(dir.path(), "good.conf", "");
    assert_eq!(ecgame(&["run", "--config", &good, "--scenario", "fig9"]).status.code(), Some(1));
    assert_eq!(ecgame(&["--help"]).status.code(), Some(0));
}

#[test]
fn equilibrium_scenario_reports_both_starts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.conf", "scenario = equilibrium\n");
    let o = ecgame(&["run", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("equilibrium-1.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("all-0,"));
    assert!(rows[1].starts_with("all-16,"));
}

#[test]
fn validate_exit_code_matches_checks() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.conf", "");
    let o = ecgame(&["validate", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    let csv = fs::read_to_string(dir.path().join("validate-1.csv")).unwrap();
    let any_failed = csv.lines().filter(|l| !l.starts_with('#')).skip(1).any(|l| l.ends_with(",false"));
    assert_eq!(o.status.code(), Some(if any_failed { 2 } else { 0 }));
    assert!(String::from_utf8_lossy(&o.stdout).contains("checks"));
}
