use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::fit::{fit_nm, fit_td, worst_basis_residual, Fit};
use crate::adversary::Adversary;
use crate::error::{LabError, Result};
use crate::qcodes::scheme::effective_choi;
use crate::qcodes::CodingScheme;
use crate::qstate::Mat;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMode {
    /// Tamper detection: replacement is the abort symbol.
    Td,
    /// Non-malleability on the Choi state (average case).
    Nm,
    /// Non-malleability plus a computational-basis sweep compared against
    /// `2^k` times the average-case residual.
    Worst,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Certified,
    Violated,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TrialRecord {
    pub index: usize,
    pub adversary: String,
    pub p: f64,
    pub residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub worst_basis: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SecurityReport {
    pub code: String,
    pub model: String,
    pub mode: FitMode,
    pub trials: usize,
    /// Fitted `p` of the trial attaining the largest residual.
    pub p: f64,
    pub residual: f64,
    pub bound: f64,
    pub bound_formula: String,
    pub slack: f64,
    pub verdict: Verdict,
    pub seed: u64,
    #[serde(default)]
    pub config_hash: Option<String>,
    #[serde(default)]
    pub notes: Vec<String>,
    pub records: Vec<TrialRecord>,
}

/// What is being certified and against which bound.
#[derive(Clone, Debug)]
pub struct CertifyTarget {
    pub code: String,
    pub model: String,
    pub bound: f64,
    pub bound_formula: String,
    pub slack: f64,
    pub mode: FitMode,
}

/// Independent generator for trial `index`, derived by hashing the master
/// seed with the index so results do not depend on scheduling.
pub fn trial_rng(seed: u64, index: usize) -> ChaCha20Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update((index as u64).to_le_bytes());
    ChaCha20Rng::from_seed(h.finalize().into())
}

pub fn fit_with(mode: FitMode, j: &Mat) -> Result<(Fit, Option<f64>)> {
    match mode {
        FitMode::Td => Ok((fit_td(j)?, None)),
        FitMode::Nm => Ok((fit_nm(j)?, None)),
        FitMode::Worst => {
            let f = fit_nm(j)?;
            let w = worst_basis_residual(j, &f)?;
            Ok((f, Some(w)))
        }
    }
}

/// Runs `trials` experiments; `make(i, rng)` returns the adversary name and
/// the effective Choi state of trial `i`. Records come back in index order.
pub fn certify_trials<F>(target: &CertifyTarget, trials: usize, seed: u64, make: F) -> Result<SecurityReport>
where
    F: Fn(usize, &mut ChaCha20Rng) -> Result<(String, Mat)> + Sync,
{
    let records: Vec<TrialRecord> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let (name, j) = make(i, &mut rng)?;
            let (fit, worst) = fit_with(target.mode, &j)?;
            Ok(TrialRecord { index: i, adversary: name, p: fit.p, residual: fit.residual, worst_basis: worst })
        })
        .collect::<Result<_>>()?;
    Ok(summarize(target, seed, records))
}

/// Folds trial records into a report: the worst residual decides.
pub fn summarize(target: &CertifyTarget, seed: u64, records: Vec<TrialRecord>) -> SecurityReport {
    let worst = records.iter().max_by(|a, b| a.residual.total_cmp(&b.residual).then(b.index.cmp(&a.index)));
    let (p, residual) = worst.map_or((1.0, 0.0), |r| (r.p, r.residual));
    let verdict = if records.is_empty() || !target.bound.is_finite() {
        Verdict::Inconclusive
    } else if residual <= target.bound + target.slack {
        Verdict::Certified
    } else {
        Verdict::Violated
    };
    SecurityReport {
        code: target.code.clone(),
        model: target.model.clone(),
        mode: target.mode,
        trials: records.len(),
        p,
        residual,
        bound: target.bound,
        bound_formula: target.bound_formula.clone(),
        slack: target.slack,
        verdict,
        seed,
        config_hash: None,
        notes: vec![],
        records,
    }
}

/// Certification of an explicit code against a listed adversary family by
/// dense simulation.
pub fn certify_dense(
    code: &dyn CodingScheme,
    adversaries: &[(String, Adversary)],
    mode: FitMode,
    slack: f64,
    seed: u64,
) -> Result<SecurityReport> {
    let desc = code.descriptor();
    let target = CertifyTarget {
        code: desc.name.clone(),
        model: adversaries.first().map_or("none".into(), |(_, a)| a.model.tag()),
        bound: desc.bound.unwrap_or(f64::INFINITY),
        bound_formula: desc.bound_formula.clone(),
        slack,
        mode,
    };
    let records: Vec<TrialRecord> = adversaries
        .iter()
        .enumerate()
        .map(|(i, (name, adv))| {
            let j = effective_choi(code, Some(adv))?;
            let (fit, worst) = fit_with(mode, &j)?;
            Ok(TrialRecord { index: i, adversary: name.clone(), p: fit.p, residual: fit.residual, worst_basis: worst })
        })
        .collect::<Result<_>>()?;
    Ok(summarize(&target, seed, records))
}

/// Checks the basis sweep against `2^k` times the average-case residual
/// for every record; returns the largest excess (negative when all pass).
pub fn worst_case_excess(report: &SecurityReport, message_dim: usize) -> Result<f64> {
    if report.mode != FitMode::Worst {
        return Err(LabError::InvalidParameter("report was not produced in worst mode".into()));
    }
    Ok(report
        .records
        .iter()
        .map(|r| r.worst_basis.unwrap_or(0.0) - message_dim as f64 * r.residual)
        .fold(f64::NEG_INFINITY, f64::max))
}
