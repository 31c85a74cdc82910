use std::path::Path;
use std::process::Command;

use shiftwalk::cli::{read_json, run};
use shiftwalk::RunError;

fn argv(s: &str, out: &Path) -> Vec<String> {
    let mut v: Vec<String> = std::iter::once("shiftwalk").chain(s.split_whitespace()).map(String::from).collect();
    v.push("--out".into());
    v.push(out.display().to_string());
    v
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shiftwalk"))
}

#[test]
fn trajectory_example_is_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cmd = "trajectory --map example1 --eps 0.01 --delta 0.01 --x0 0.9 --steps 10000 --seed 7";
    let out = run(argv(cmd, a.path())).unwrap();
    run(argv(cmd, b.path())).unwrap();
    assert_eq!(out.artifacts, ["trajectory.csv", "trajectory.json", "manifest.json"]);
    let csv = String::from_utf8(read(a.path(), "trajectory.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 10_002);
    assert_eq!(lines[1], "0,0.9,0.9,0");
    for name in ["trajectory.csv", "trajectory.json"] {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name}");
    }
}

#[test]
fn manifest_reruns_the_experiment() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run(argv("transitions --map example1 --eps 4 --delta 4 --samples 20000 --seed 3", a.path())).unwrap();
    let m = read_json(&a.path().join("manifest.json")).unwrap();
    assert_eq!(m["command"], "transitions");
    assert_eq!(m["seed"], 3);
    assert_eq!(m["config"]["command"]["transitions"]["samples"], 20000);
    assert_eq!(m["artifacts"][0], "transitions.json");
    assert!(m["timings"]["compute_seconds"].as_f64().unwrap() >= 0.0);
    let mut again: Vec<String> = vec!["shiftwalk".into()];
    again.extend(m["argv"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_string()));
    let pos = again.iter().position(|x| x == "--out").unwrap();
    again[pos + 1] = b.path().display().to_string();
    run(again).unwrap();
    assert_eq!(read(a.path(), "transitions.json"), read(b.path(), "transitions.json"));
    let r = read_json(&a.path().join("transitions.json")).unwrap();
    assert_eq!(r["rows"].as_array().unwrap().len(), 3);
    assert!(r["max_abs_z"].as_f64().unwrap() < 5.0);
}

#[test]
fn config_file_matches_flags() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run(argv("independence --map example1 --eps 4 --delta 4 --steps 5 --paths 2000 --seed 9", a.path())).unwrap();
    let cfg = b.path().join("run.toml");
    std::fs::write(&cfg, "command = \"independence\"\nmap = \"example1\"\neps = 4.0\ndelta = 4.0\nsteps = 5\npaths = 2000\nseed = 9\n").unwrap();
    run(argv(&format!("--config {}", cfg.display()), b.path())).unwrap();
    assert_eq!(read(a.path(), "independence.json"), read(b.path(), "independence.json"));
}

#[test]
fn thread_count_does_not_change_results() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cmd = "fclt --map example2 --kappa 1 --n 200 --paths 300 --t-grid 0.5,1 --bound 1000 --seed 4";
    run(argv(&format!("{cmd} --threads 1"), a.path())).unwrap();
    run(argv(&format!("{cmd} --threads 4"), b.path())).unwrap();
    for name in ["fclt.json", "paths.csv"] {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name}");
    }
    let r = read_json(&a.path().join("fclt.json")).unwrap();
    assert_eq!(r["marginals"].as_array().unwrap().len(), 2);
    assert_eq!(r["alpha"], 1.0);
}

#[test]
fn every_subcommand_writes_its_report() {
    let cases = [
        ("validate --map example2 --kappa 2", "validate.json"),
        ("conjugacy --map conjugated_example1 --depth 4 --samples 2000 --probes 200 --seed 1", "conjugacy.json"),
        ("density --map example1 --eps 0.1 --delta 0.2 --grid 200 --refine 5", "density.csv"),
        ("density --map example1 --eps 0.1 --delta 0.1 --method closed --terms 20", "density.csv"),
        ("fp-convergence --eps 0.001 --delta 0.002 --x 0.5 --n-max 10", "fp_convergence.json"),
        ("table1 --grid 200", "table1.json"),
        ("ctrw --eps 0.5 --delta 0.5 --m 20 --horizon 50 --paths 200 --init uniform --seed 2", "jumps.csv"),
    ];
    for (cmd, artifact) in cases {
        let d = tempfile::tempdir().unwrap();
        let out = run(argv(cmd, d.path())).unwrap_or_else(|e| panic!("{cmd}: {e}"));
        assert!(out.artifacts.iter().any(|a| a == artifact), "{cmd}");
        assert!(d.path().join("manifest.json").exists());
    }
    let d = tempfile::tempdir().unwrap();
    run(argv("conjugacy --map example1 --eps 4 --delta 4 --depth 3 --samples 1000 --seed 1", d.path())).unwrap();
    let knots = String::from_utf8(read(d.path(), "knots.csv")).unwrap();
    assert!(knots.starts_with("u,h_u,h_u_minus_u\n0,0,0\n"));
}

#[test]
fn errors_are_classified() {
    let d = tempfile::tempdir().unwrap();
    assert!(matches!(run(argv("validate --map nope", d.path())), Err(RunError::Config(_))));
    assert!(matches!(run(argv("table1 --grid x", d.path())), Err(RunError::Config(_))));
    assert!(matches!(run(argv("fp-convergence --x 3", d.path())), Err(RunError::Config(_))));
    assert!(matches!(run(argv("validate --map climbing_sine --a 0.5 --strict", d.path())), Err(RunError::Validation(_))));
    assert!(matches!(run(argv("conjugacy --map example1 --eps 0.01 --delta 0.01 --seed 1", d.path())), Err(RunError::Validation(_))));
    assert!(matches!(run(argv("ctrw --m 10 --horizon 1 --paths 5 --init uniform --seed 1", d.path())), Err(RunError::Numeric(_))));
    // the manifest is written even when the run fails
    assert!(d.path().join("manifest.json").exists());
}

#[test]
fn binary_exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| bin().args(args).arg("--out").arg(d.path()).output().unwrap().status.code();
    assert_eq!(code(&["table1", "--grid", "100"]), Some(0));
    assert_eq!(code(&["trajectory", "--bogus"]), Some(2));
    assert_eq!(code(&["validate", "--map", "climbing_sine", "--a", "0.5", "--strict"]), Some(3));
    assert_eq!(code(&["ctrw", "--m", "10", "--horizon", "1", "--paths", "5", "--init", "uniform", "--seed", "1"]), Some(4));
    let help = bin().arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("fp-convergence"));
}

#[test]
fn thread_count_from_environment() {
    let d = tempfile::tempdir().unwrap();
    let out = bin().args(["table1", "--grid", "100", "--out"]).arg(d.path()).env("SHIFTWALK_THREADS", "2").output().unwrap();
    assert!(out.status.success());
    let m = read_json(&d.path().join("manifest.json")).unwrap();
    assert_eq!(m["threads"], 2);
}
