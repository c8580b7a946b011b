use serde::{Deserialize, Serialize};

use super::cq::CqState;
use super::linalg::*;
use crate::error::{LabError, Result};

/// Outcome of the projective test `{Phi^{(x) lambda}, I - Phi^{(x) lambda}}`.
#[derive(Clone, Debug)]
pub struct BellTestOutcome {
    pub accept_prob: f64,
    /// Normalized post-measurement state on acceptance (zero if never accepted).
    pub post_accept: CqState,
    /// Normalized post-measurement state on rejection (zero if never rejected).
    pub post_reject: CqState,
}

fn qubit_count(state: &CqState, ids: &[&str]) -> Result<usize> {
    let mut n = 0;
    for id in ids {
        let r = state.layout().get(id)?;
        if !r.is_quantum() || !r.dim.is_power_of_two() {
            return Err(LabError::InvalidParameter(format!("`{id}` is not a qubit register")));
        }
        n += r.size;
    }
    Ok(n)
}

/// Bell test between `reg_e` and `reg_ehat`, pairing qubits in order.
pub fn bell_test(state: &CqState, reg_e: &[&str], reg_ehat: &[&str]) -> Result<BellTestOutcome> {
    let ne = qubit_count(state, reg_e)?;
    let nh = qubit_count(state, reg_ehat)?;
    if ne != nh {
        return Err(LabError::DimensionMismatch(format!("Bell test on {ne} vs {nh} qubits")));
    }
    let layout = state.layout();
    let qdims = layout.quantum_dims();
    let mut targets = vec![];
    for id in reg_e.iter().chain(reg_ehat) {
        targets.push(layout.quantum_index(id)?);
    }
    let proj = epr_block(ne);
    let dt = proj.nrows();
    let comp = identity(dt) - &proj;
    let mut acc = std::collections::BTreeMap::new();
    let mut rej = std::collections::BTreeMap::new();
    let mut p = 0.0;
    for (k, m) in state.branches() {
        let a = apply_kraus_on(m, &qdims, &targets, std::slice::from_ref(&proj));
        let b = apply_kraus_on(m, &qdims, &targets, std::slice::from_ref(&comp));
        p += a.trace().re;
        acc.insert(k.clone(), a);
        rej.insert(k.clone(), b);
    }
    let total = state.trace();
    let q = total - p;
    let norm = |mut b: std::collections::BTreeMap<Vec<u64>, Mat>, w: f64| {
        if w > 1e-15 {
            for v in b.values_mut() {
                *v = v.unscale(w);
            }
        }
        b
    };
    Ok(BellTestOutcome {
        accept_prob: p,
        post_accept: CqState::new_unchecked(layout.clone(), norm(acc, p))?,
        post_reject: CqState::new_unchecked(layout.clone(), norm(rej, q))?,
    })
}

/// Acceptance probability of the Bell test on a pure vector over
/// `[E (n qubits), Ehat (n qubits)]`, i.e. `|<Phi^{(x)n}|psi>|^2`.
/// Works beyond the dense-state cap.
pub fn bell_accept_pure(psi: &Vector, n: usize) -> f64 {
    let d = 1usize << n;
    let a = 1.0 / (d as f64).sqrt();
    let mut s = ZERO;
    for i in 0..d {
        s += psi[i * d + i] * a;
    }
    s.norm_sqr()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SchmidtProfile {
    /// Registers on the first side of the cut.
    pub cut: Vec<String>,
    /// Numerical Schmidt rank; `None` means not computed (mixed states).
    pub declared_number: Option<usize>,
    pub coefficients: Vec<f64>,
}

pub const SCHMIDT_TOL: f64 = 1e-9;

/// Schmidt decomposition of a pure single-branch state across `cut | rest`.
pub fn schmidt_structure(state: &CqState, cut: &[&str]) -> Result<SchmidtProfile> {
    if state.layout().classical().count() > 0 || !state.is_pure(1e-8) {
        return Err(LabError::NotPure);
    }
    let v = state.pure_vector()?;
    let layout = state.layout();
    let qdims = layout.quantum_dims();
    let mut perm = vec![];
    for id in cut {
        perm.push(layout.quantum_index(id)?);
    }
    for i in 0..qdims.len() {
        if !perm.contains(&i) {
            perm.push(i);
        }
    }
    let pv = permute_vector(&v, &qdims, &perm);
    let da: usize = cut.iter().map(|id| layout.get(id).unwrap().dim).product();
    let db = pv.len() / da;
    let m = Mat::from_fn(da, db, |i, j| pv[i * db + j]);
    let mut sv = singular_values(&m);
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let rank = sv.iter().filter(|&&s| s > SCHMIDT_TOL).count();
    Ok(SchmidtProfile {
        cut: cut.iter().map(|s| s.to_string()).collect(),
        declared_number: Some(rank),
        coefficients: sv.into_iter().filter(|&s| s > SCHMIDT_TOL).collect(),
    })
}

/// Pure state `sum_{r<R} sqrt(c_r) |a_r>|b_r>` on `d (x) d` with the given
/// Schmidt coefficients and orthonormal frames (columns of `ua`, `ub`).
pub fn with_schmidt(coeffs: &[f64], ua: &Mat, ub: &Mat) -> Vector {
    let d = ua.nrows();
    let mut v = Vector::zeros(d * d);
    for (k, c) in coeffs.iter().enumerate() {
        let a = ua.column(k);
        let b = ub.column(k);
        for i in 0..d {
            for j in 0..d {
                v[i * d + j] += a[i] * b[j] * c.sqrt();
            }
        }
    }
    v
}
