//! Experiment runner behind the `tamperlab` binary.
//!
//! A run takes an [`ExperimentConfig`], executes one suite on a rayon pool
//! sized by `TAMPERLAB_WORKERS` and returns a [`SuiteReport`]. Every random
//! draw comes from a stream keyed by the seed and the trial index, so the
//! worker count never changes the numbers.

pub mod config;
pub mod report;
pub mod suites;

use std::path::Path;

pub use config::{ExperimentConfig, OutputFormat, OutputSpec, Params, Tolerances, SUITES};
pub use report::{Check, Relation, SuiteReport};

use crate::error::{LabError, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Largest difference tolerated between a recorded and a replayed value.
pub const REPLAY_TOLERANCE: f64 = 1e-9;

/// Worker count from `TAMPERLAB_WORKERS`, defaulting to one.
pub fn workers_from_env() -> Result<usize> {
    match std::env::var("TAMPERLAB_WORKERS") {
        Err(_) => Ok(1),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(LabError::InvalidConfig(format!("TAMPERLAB_WORKERS must be a positive integer, got `{v}`"))),
        },
    }
}

pub fn run_suite(cfg: &ExperimentConfig) -> Result<SuiteReport> {
    run_suite_with(cfg, workers_from_env()?)
}

pub fn run_suite_with(cfg: &ExperimentConfig, workers: usize) -> Result<SuiteReport> {
    cfg.check_basic()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| LabError::InvalidConfig(e.to_string()))?;
    let outcome = pool.install(|| suites::run(cfg))?;
    let hash = cfg.hash();
    let mut reports = outcome.reports;
    for r in &mut reports {
        r.config_hash = Some(hash.clone());
    }
    let passed = outcome.checks.iter().all(|c| c.passed);
    Ok(SuiteReport {
        suite: cfg.suite.clone(),
        version: VERSION.into(),
        config: cfg.clone(),
        config_hash: hash,
        seed: cfg.seed,
        checks: outcome.checks,
        reports,
        notes: outcome.notes,
        passed,
    })
}

pub fn write_report(report: &SuiteReport, out: &OutputSpec) -> Result<()> {
    let text = match out.format {
        OutputFormat::Json => serde_json::to_string_pretty(report).map_err(|e| LabError::Io(e.to_string()))?,
        OutputFormat::Csv => report.to_csv(),
    };
    let path = Path::new(&out.path);
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| LabError::Io(e.to_string()))?;
    }
    std::fs::write(path, text).map_err(|e| LabError::Io(e.to_string()))
}

pub fn read_report(path: &Path) -> Result<SuiteReport> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| LabError::InvalidConfig(format!("{}: {e}", path.display())))
}

/// Outcome of replaying a stored report.
#[derive(Debug)]
pub struct ReplayOutcome {
    pub fresh: SuiteReport,
    pub max_difference: f64,
    pub mismatches: Vec<String>,
}

impl ReplayOutcome {
    pub fn matches(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Re-runs the configuration embedded in `stored` and compares the results.
///
/// The stored hash must match the embedded configuration, otherwise the
/// report was edited and [`LabError::HashMismatch`] is returned.
pub fn replay(stored: &SuiteReport) -> Result<ReplayOutcome> {
    let computed = stored.config.hash();
    if computed != stored.config_hash {
        return Err(LabError::HashMismatch { recorded: stored.config_hash.clone(), computed });
    }
    if stored.version != VERSION {
        return Err(LabError::InvalidConfig(format!("report written by version {}, this is {VERSION}", stored.version)));
    }
    let fresh = run_suite(&stored.config)?;
    let mut mismatches = Vec::new();
    let mut max_difference: f64 = 0.0;
    let mut pairs: Vec<(String, f64, f64)> = Vec::new();
    if stored.checks.len() != fresh.checks.len() || stored.reports.len() != fresh.reports.len() {
        mismatches.push("different number of checks or reports".into());
    } else {
        for (a, b) in stored.checks.iter().zip(&fresh.checks) {
            pairs.push((format!("check `{}`", a.name), a.value, b.value));
        }
        for (ra, rb) in stored.reports.iter().zip(&fresh.reports) {
            if ra.records.len() != rb.records.len() {
                pairs.push((format!("report `{}` trial count", ra.code), ra.records.len() as f64, rb.records.len() as f64));
                continue;
            }
            for (ta, tb) in ra.records.iter().zip(&rb.records) {
                pairs.push((format!("{} trial {}", ra.code, ta.index), ta.residual, tb.residual));
            }
        }
    }
    for (what, a, b) in pairs {
        let d = if a == b { 0.0 } else { (a - b).abs() };
        max_difference = max_difference.max(d);
        if d.is_nan() || d > REPLAY_TOLERANCE {
            mismatches.push(format!("{what}: recorded {a:e}, replayed {b:e}"));
        }
    }
    Ok(ReplayOutcome { fresh, max_difference, mismatches })
}
