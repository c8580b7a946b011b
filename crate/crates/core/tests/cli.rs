use std::path::PathBuf;
use std::process::Command;

use tamperlab::cli::{self, replay, run_suite_with, ExperimentConfig, SuiteReport};
use tamperlab::LabError;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tamperlab"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tamperlab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn small_twirl(seed: u64) -> ExperimentConfig {
    let mut c = ExperimentConfig::new("twirl-identities")
        .with_param("states", 8.into())
        .with_param("pq_states", 1.into());
    c.seed = seed;
    c
}

fn small_tdc() -> ExperimentConfig {
    let mut c = ExperimentConfig::new("tdc-reduction")
        .with_param("sections", serde_json::json!(["tdc", "bounded"]))
        .with_param("lambdas", serde_json::json!([2]));
    c.trials = Some(6);
    c
}

#[test]
fn worker_count_does_not_change_results() {
    for cfg in [small_twirl(5), small_tdc()] {
        let one = run_suite_with(&cfg, 1).unwrap();
        let three = run_suite_with(&cfg, 3).unwrap();
        assert_eq!(one, three);
    }
}

#[test]
fn seeds_change_sampled_values() {
    let a = run_suite_with(&small_twirl(1), 1).unwrap();
    let b = run_suite_with(&small_twirl(2), 1).unwrap();
    assert_ne!(a.config_hash, b.config_hash);
    assert!(a.checks.iter().zip(&b.checks).any(|(x, y)| x.value != y.value));
}

#[test]
fn every_certification_carries_the_config_hash() {
    let cfg = small_tdc();
    let rep = run_suite_with(&cfg, 1).unwrap();
    assert_eq!(rep.reports.len(), 2);
    for r in &rep.reports {
        assert_eq!(r.config_hash.as_deref(), Some(cfg.hash().as_str()));
        assert_eq!(r.records.len(), 6);
    }
}

#[test]
fn replay_matches_and_detects_edits() {
    let rep = run_suite_with(&small_tdc(), 1).unwrap();
    let out = replay(&rep).unwrap();
    assert!(out.matches(), "{:?}", out.mismatches);
    assert!(out.max_difference <= cli::REPLAY_TOLERANCE);

    let mut edited = rep.clone();
    edited.config.seed += 1;
    assert!(matches!(replay(&edited), Err(LabError::HashMismatch { .. })));

    let mut tampered = rep;
    tampered.checks[0].value += 1e-3;
    assert!(!replay(&tampered).unwrap().matches());
}

#[test]
fn output_hash_ignores_output_location() {
    let mut a = small_twirl(1);
    a.output = Some(cli::OutputSpec { path: "x.json".into(), format: cli::OutputFormat::Json });
    assert_eq!(a.hash(), small_twirl(1).hash());
}

#[test]
fn binary_run_and_replay() {
    let cfg_path = scratch("twirl.json");
    std::fs::write(&cfg_path, serde_json::to_string(&small_twirl(9)).unwrap()).unwrap();
    let out_path = scratch("twirl-report.json");
    let st = bin().args(["run", "--config"]).arg(&cfg_path).arg("--out").arg(&out_path).env("TAMPERLAB_WORKERS", "2").output().unwrap().status;
    assert_eq!(st.code(), Some(0));
    let rep: SuiteReport = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert!(rep.passed);
    assert_eq!(rep.seed, 9);

    let st = bin().args(["replay", "--report"]).arg(&out_path).output().unwrap().status;
    assert_eq!(st.code(), Some(0));

    let mut edited: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    edited["config"]["seed"] = 10.into();
    let edited_path = scratch("twirl-edited.json");
    std::fs::write(&edited_path, edited.to_string()).unwrap();
    let out = bin().args(["replay", "--report"]).arg(&edited_path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("hash mismatch"));
}

#[test]
fn binary_writes_csv() {
    let out_path = scratch("capacity.csv");
    let st = bin()
        .args(["run", "--suite", "capacity", "--seed", "4", "--out"])
        .arg(&out_path)
        .output()
        .unwrap()
        .status;
    assert_eq!(st.code(), Some(0));
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.starts_with("kind,name,index,value"));
    assert!(text.lines().skip(1).all(|l| l.starts_with("check,")));
}

#[test]
fn invalid_configs_exit_with_two_and_write_nothing() {
    let cases = [
        r#"{"suite": "no-such-suite"}"#,
        r#"{"suite": "lrss", "unknown_field": 1}"#,
        r#"{"suite": "lrss", "params": {"colour": 3}}"#,
        r#"{"suite": "tdc-reduction", "params": {"lambdas": "two"}}"#,
        r#"{"suite": "twirl-identities", "tolerances": {"slack": -1}}"#,
        "not json",
    ];
    for (i, text) in cases.iter().enumerate() {
        let cfg_path = scratch(&format!("bad{i}.json"));
        let out_path = scratch(&format!("bad{i}-out.json"));
        std::fs::write(&cfg_path, text).unwrap();
        let out = bin().args(["run", "--config"]).arg(&cfg_path).arg("--out").arg(&out_path).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "case {text}");
        assert!(!out_path.exists(), "case {text}");
    }
    let out = bin().args(["run", "--suite", "capacity"]).env("TAMPERLAB_WORKERS", "zero").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn violated_check_exits_with_one_and_keeps_the_report() {
    let cfg = ExperimentConfig::new("tdc-reduction")
        .with_param("sections", serde_json::json!(["substitution"]))
        .with_param("include_substitution", true.into());
    let cfg_path = scratch("sub.json");
    std::fs::write(&cfg_path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let out_path = scratch("sub-out.json");
    let st = bin().args(["run", "--config"]).arg(&cfg_path).arg("--out").arg(&out_path).output().unwrap().status;
    assert_eq!(st.code(), Some(1));
    let rep: SuiteReport = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert!(!rep.passed);
    let failed = rep.failed_checks();
    assert_eq!(failed.len(), 1);
    assert!(failed[0].note.as_deref().unwrap().contains("out-of-model"));
}

#[test]
fn suites_subcommand_lists_all() {
    let out = bin().arg("suites").output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().collect::<Vec<_>>(), cli::SUITES.to_vec());
}
