//! End-to-end acceptance run: twelve criteria, one PASS/FAIL line each.
//!
//! The criteria run one after another inside a single test so that the
//! wall-clock limits are measured without other tests competing for cores.
//! Lines go straight to stderr so they show up even when output is captured.

use std::io::Write;
use std::time::{Duration, Instant};

use serde_json::json;
use tamperlab::cli::{run_suite_with, ExperimentConfig, SuiteReport};

struct Criterion {
    id: usize,
    title: &'static str,
    limit: Duration,
    configs: Vec<ExperimentConfig>,
}

fn cfg(suite: &str, params: serde_json::Value) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(suite);
    if let serde_json::Value::Object(m) = params {
        c.params = m.into_iter().collect();
    }
    c.seed = 20240601;
    c
}

fn with_trials(mut c: ExperimentConfig, n: usize) -> ExperimentConfig {
    c.trials = Some(n);
    c
}

fn criteria() -> Vec<Criterion> {
    let min = |m: u64| Duration::from_secs(60 * m);
    let sec = Duration::from_secs;
    vec![
        Criterion {
            id: 1,
            title: "twirl identities",
            limit: sec(10),
            configs: vec![cfg("twirl-identities", json!({"states": 100}))],
        },
        Criterion {
            id: 2,
            title: "Bell-test acceptance bound",
            limit: sec(30),
            configs: vec![cfg(
                "tdc-reduction",
                json!({"sections": ["bell"], "bell_ranks": [1, 2, 4], "bell_lambdas": [2, 3, 4, 5, 6], "bell_states": 100}),
            )],
        },
        Criterion {
            id: 3,
            title: "reduction TDC, bounded variant and substitution attack",
            limit: min(5),
            configs: vec![with_trials(
                cfg("tdc-reduction", json!({"sections": ["tdc", "bounded", "substitution"], "lambdas": [2, 3, 4], "bounded_lambda": 3, "bounded_a": 1})),
                200,
            )],
        },
        Criterion {
            id: 4,
            title: "three-share TDC with bounded storage",
            limit: min(10),
            configs: vec![with_trials(cfg("tdc3-bounded", json!({"cases": [[2, 0], [3, 0], [3, 1]]})), 200)],
        },
        Criterion {
            id: 5,
            title: "single-bit LOCC^2 code",
            limit: min(2),
            configs: vec![cfg("bitnmc-locc2", json!({"ns": [2, 3, 4]}))],
        },
        Criterion {
            id: 6,
            title: "two-share QNMC against LO^2",
            limit: min(10),
            configs: vec![with_trials(cfg("qnmc2-lo", json!({"k": 3})), 200)],
        },
        Criterion {
            id: 7,
            title: "four-share NMC against LOCC",
            limit: min(5),
            configs: vec![with_trials(cfg("nmc4-locc", json!({})), 100)],
        },
        Criterion {
            id: 8,
            title: "triangle gadget and TDSS verdict logic",
            limit: min(10),
            configs: vec![cfg("gadget", json!({"lambdas": [1, 2], "positions": [1, 2]})), cfg("tdss", json!({}))],
        },
        Criterion {
            id: 9,
            title: "leakage-resilient secret sharing",
            limit: min(5),
            configs: vec![with_trials(cfg("lrss", json!({"p": 3, "t": 2, "k": 1, "mu": 1, "eta": 6})), 100)],
        },
        Criterion {
            id: 10,
            title: "encryption connections",
            limit: min(3),
            configs: vec![cfg("encryption", json!({}))],
        },
        Criterion {
            id: 11,
            title: "capacity entropy checks",
            limit: min(2),
            configs: vec![cfg("capacity", json!({}))],
        },
        Criterion {
            id: 12,
            title: "single-qubit NM characterization",
            limit: min(2),
            configs: vec![cfg("single-qubit-nm", json!({"channels": 500}))],
        },
    ]
}

fn summary(reports: &[SuiteReport]) -> String {
    let checks: Vec<_> = reports.iter().flat_map(|r| &r.checks).collect();
    let failed: Vec<_> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        format!("{} checks", checks.len())
    } else {
        format!("{} of {} checks failed: {}", failed.len(), checks.len(), failed.join("; "))
    }
}

#[test]
fn acceptance_criteria() {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut stderr = std::io::stderr();
    let mut failures = Vec::new();
    stderr.write_all(b"\n").unwrap();
    for c in criteria() {
        let start = Instant::now();
        let reports: Result<Vec<SuiteReport>, _> = c.configs.iter().map(|cfg| run_suite_with(cfg, workers)).collect();
        let elapsed = start.elapsed();
        let (ok, detail) = match &reports {
            Err(e) => (false, format!("error: {e}")),
            Ok(r) => {
                let checks_ok = r.iter().all(|x| x.passed);
                let time_ok = elapsed <= c.limit;
                let mut d = summary(r);
                if !time_ok {
                    d += &format!("; over the {:?} limit", c.limit);
                }
                (checks_ok && time_ok, d)
            }
        };
        let line = format!(
            "{} criterion {:>2} ({}): {} in {:.1}s (limit {}s)\n",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.title,
            detail,
            elapsed.as_secs_f64(),
            c.limit.as_secs()
        );
        stderr.write_all(line.as_bytes()).unwrap();
        if let Ok(r) = &reports {
            for check in r.iter().flat_map(|x| &x.checks) {
                let row = format!(
                    "       {} {} = {:.6e} vs {:.6e} [{}, slack {:e}]\n",
                    if check.passed { "ok  " } else { "FAIL" },
                    check.name,
                    check.value,
                    check.bound,
                    check.bound_formula,
                    check.slack
                );
                stderr.write_all(row.as_bytes()).unwrap();
            }
        }
        if !ok {
            failures.push(c.id);
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
