//! End-to-end checks of the `coopsim` binary beyond the acceptance
//! criteria: flag handling, overrides, and result-file contents.

use std::path::Path;
use std::process::Command;

use coopsim::payoff::{Mode, ProblemFile, ResultReport};

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");

fn run_cli(args: &[&str]) -> (i32, String, String) {
    let output = Command::new(env!("CARGO_BIN_EXE_coopsim"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        output.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&output.stdout).into_owned(),
        String::from_utf8_lossy(&output.stderr).into_owned(),
    )
}

#[test]
fn help_exits_zero_and_lists_subcommands() {
    let (code, stdout, _) = run_cli(&["--help"]);
    assert_eq!(code, 0);
    for subcommand in ["simulate", "optimize", "validate", "metrics"] {
        assert!(stdout.contains(subcommand), "help missing {subcommand}");
    }
    let (code, stdout, _) = run_cli(&["simulate", "--help"]);
    assert_eq!(code, 0);
    for flag in ["--scenario", "--seed", "--epochs", "--out"] {
        assert!(stdout.contains(flag), "simulate help missing {flag}");
    }
}

#[test]
fn missing_required_argument_exits_three_with_usage() {
    let (code, _, stderr) = run_cli(&["optimize", "--method", "brute", "--out", "/tmp/x.json"]);
    assert_eq!(code, 3);
    assert!(stderr.to_lowercase().contains("usage"), "{stderr}");

    let (code, _, _) = run_cli(&["validate"]);
    assert_eq!(code, 3, "validate needs exactly one target");
}

#[test]
fn single_action_problem_gives_same_result_for_both_methods() {
    let dir = tempfile::tempdir().unwrap();
    let problem_path = dir.path().join("m1.json");
    let problem = ProblemFile {
        n: 3,
        alphabet: vec!["only".to_string()],
        mode: Mode::Directed,
        beliefs: vec![vec![vec![0.5]; 2]; 3],
        payoff_coop: vec![vec![vec![2.0]; 2]; 3],
        payoff_noncoop: vec![vec![vec![-1.0]; 2]; 3],
    };
    std::fs::write(&problem_path, serde_json::to_string(&problem).unwrap()).unwrap();

    let mut reports = Vec::new();
    for method in ["brute", "ga"] {
        let out = dir.path().join(format!("{method}.json"));
        let (code, _, stderr) = run_cli(&[
            "optimize",
            "--problem",
            problem_path.to_str().unwrap(),
            "--method",
            method,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{stderr}");
        let report: ResultReport =
            serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
        reports.push(report);
    }
    let (brute, ga) = (&reports[0], &reports[1]);
    assert_eq!(brute.profile, ga.profile);
    assert_eq!(brute.member_payoffs, ga.member_payoffs);
    assert_eq!(brute.team_payoff, ga.team_payoff);
    assert_eq!(brute.genome, ga.genome);
    assert_ne!(brute.method, ga.method);
}

#[test]
fn seed_flag_overrides_the_scenario_seed() {
    let scenario = format!("{FIXTURES}/scenario_basic.json");
    let dir = tempfile::tempdir().unwrap();

    // Default seed (42, from the file) must equal an explicit --seed 42
    // and differ from --seed 7.
    let outputs: Vec<Vec<u8>> = [None, Some("42"), Some("7")]
        .iter()
        .enumerate()
        .map(|(k, seed)| {
            let out = dir.path().join(format!("run{k}"));
            let mut args = vec!["simulate", "--scenario", &scenario];
            if let Some(seed) = seed {
                args.extend(["--seed", seed]);
            }
            let out_str = out.to_str().unwrap().to_string();
            args.extend(["--out", &out_str]);
            let (code, _, stderr) = run_cli(&args);
            assert_eq!(code, 0, "{stderr}");
            std::fs::read(out.join("trajectory.jsonl")).unwrap()
        })
        .collect();
    assert_eq!(outputs[0], outputs[1]);
    assert_ne!(outputs[0], outputs[2]);
}

#[test]
fn epochs_flag_shortens_the_run() {
    let scenario = format!("{FIXTURES}/scenario_basic.json");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("short");
    let (code, _, _) = run_cli(&[
        "simulate",
        "--scenario",
        &scenario,
        "--epochs",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let lines = std::fs::read_to_string(out.join("trajectory.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 3);
}

#[test]
fn metrics_rejects_garbage_and_empty_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, "not json\n").unwrap();
    let out = dir.path().join("out.csv");
    let (code, _, stderr) = run_cli(&[
        "metrics",
        "--trajectory",
        bad.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(stderr.contains("line 1"), "{stderr}");
    assert!(!out.exists(), "no partial output on failure");

    let empty = dir.path().join("empty.jsonl");
    std::fs::write(&empty, "").unwrap();
    let (code, _, _) = run_cli(&[
        "metrics",
        "--trajectory",
        empty.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 1, "empty trajectory is a validation failure");
}

#[test]
fn validate_reports_missing_pair_model() {
    let scenario = format!("{FIXTURES}/scenario_basic.json");
    let dir = tempfile::tempdir().unwrap();
    let mut file: coopsim::sim::ScenarioFile =
        serde_json::from_str(&std::fs::read_to_string(&scenario).unwrap()).unwrap();
    file.pairs.retain(|p| !(p.from == "r2" && p.to == "r3"));
    let path = dir.path().join("missing_pair.json");
    std::fs::write(&path, serde_json::to_string(&file).unwrap()).unwrap();

    let (code, stdout, _) = run_cli(&["validate", "--scenario", path.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(stdout.contains("missing pair model for r2->r3"), "{stdout}");
    assert!(Path::new(FIXTURES).exists());
}
