use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::qcodes::KeyedShape;
use crate::qstate::linalg::*;

/// Outcome of fitting an effective Choi state to a target convex form.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Fit {
    pub p: f64,
    /// Upper bound on the trace-norm distance to the target family.
    pub residual: f64,
    /// Fitted replacement on the output register (abort for tamper detection).
    #[serde(skip)]
    pub gamma: Option<Mat>,
}

/// Message dimension of a Choi state on `(Mp, Mref)` with `dim(Mp) = d + 1`.
pub fn message_dim_of(j: &Mat) -> Result<usize> {
    let n = j.nrows();
    // n = (d + 1) d
    let d = ((1.0 + 4.0 * n as f64).sqrt() - 1.0) / 2.0;
    let d = d.round() as usize;
    if d < 1 || (d + 1) * d != n || j.ncols() != n {
        return Err(LabError::DimensionMismatch(format!("{n} is not (d+1)d for any d")));
    }
    Ok(d)
}

fn shape_of(j: &Mat) -> Result<KeyedShape> {
    Ok(KeyedShape { d_m: message_dim_of(j)?, d_e: 1 })
}

/// Best `p` in `p Phi + (1 - p) abort (x) U` by ternary search; the
/// residual is convex in `p`.
pub fn fit_td(j: &Mat) -> Result<Fit> {
    let shape = shape_of(j)?;
    let (phi, abort) = (shape.phi(), shape.abort());
    let residual = |p: f64| trace_norm_herm(&(j - phi.scale(p) - abort.scale(1.0 - p)));
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..100 {
        let a = lo + (hi - lo) / 3.0;
        let b = hi - (hi - lo) / 3.0;
        if residual(a) <= residual(b) {
            hi = b;
        } else {
            lo = a;
        }
        if hi - lo < 1e-10 {
            break;
        }
    }
    let mut best = (0.5 * (lo + hi), residual(0.5 * (lo + hi)));
    for p in [0.0, 1.0] {
        let v = residual(p);
        if v < best.1 {
            best = (p, v);
        }
    }
    Ok(Fit { p: best.0, residual: best.1, gamma: Some(abort_output(shape.d_m)) })
}

fn abort_output(d: usize) -> Mat {
    let mut g = zeros(d + 1, d + 1);
    g[(d, d)] = r(1.0);
    g
}

/// The dense-grid residual of the tamper-detection form, for cross-checks.
pub fn td_residual_at(j: &Mat, p: f64) -> Result<f64> {
    let shape = shape_of(j)?;
    Ok(trace_norm_herm(&(j - shape.phi().scale(p) - shape.abort().scale(1.0 - p))))
}

/// Replacement guess `gamma(p)`: positive part of `Tr_ref(J - p Phi)`,
/// renormalized; the maximally mixed message when nothing is left.
fn gamma_at(j: &Mat, phi: &Mat, d: usize, p: f64) -> Mat {
    let rest = partial_trace(&(j - phi.scale(p)), &[d + 1, d], &[0]);
    let pos = positive_part(&hermitize(&rest));
    let t = pos.trace().re;
    if t <= 1e-12 {
        let mut u = zeros(d + 1, d + 1);
        for i in 0..d {
            u[(i, i)] = r(1.0 / d as f64);
        }
        u
    } else {
        pos.unscale(t)
    }
}

fn nm_residual(j: &Mat, phi: &Mat, d: usize, p: f64) -> (f64, Mat) {
    if p >= 1.0 {
        let g = gamma_at(j, phi, d, 0.0);
        return (trace_norm_herm(&(j - phi)), g);
    }
    let g = gamma_at(j, phi, d, p);
    let model = phi.scale(p) + kron(&g, &maximally_mixed(d)).scale(1.0 - p);
    (trace_norm_herm(&(j - model)), g)
}

/// Best `p Phi + (1 - p) gamma (x) U` over a refined grid in `p`, with
/// `gamma` recovered from the reference marginal. The residual is an upper
/// bound on the true best-fit distance.
pub fn fit_nm(j: &Mat) -> Result<Fit> {
    let d = message_dim_of(j)?;
    let phi = KeyedShape { d_m: d, d_e: 1 }.phi();
    let eval = |p: f64| nm_residual(j, &phi, d, p);
    let grid = 100;
    let mut best_p = 0.0;
    let mut best = f64::INFINITY;
    for i in 0..=grid {
        let p = i as f64 / grid as f64;
        let (v, _) = eval(p);
        if v < best {
            best = v;
            best_p = p;
        }
    }
    // Golden-section refinement inside the winning cell.
    let (mut lo, mut hi) = ((best_p - 1.0 / grid as f64).max(0.0), (best_p + 1.0 / grid as f64).min(1.0));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if eval(a).0 <= eval(b).0 {
            hi = b;
        } else {
            lo = a;
        }
    }
    let mid = 0.5 * (lo + hi);
    let (v, _) = eval(mid);
    if v < best {
        best = v;
        best_p = mid;
    }
    let (_, gamma) = eval(best_p);
    Ok(Fit { p: best_p, residual: best, gamma: Some(gamma) })
}

/// The effective channel applied to a message state, read off the Choi
/// state: `d Tr_ref[J (I (x) sigma^T)]`.
pub fn channel_from_choi(j: &Mat, sigma: &Mat) -> Result<Mat> {
    let d = message_dim_of(j)?;
    let op = kron(&identity(d + 1), &sigma.transpose());
    Ok(partial_trace(&(j * op), &[d + 1, d], &[0]).scale(d as f64))
}

/// Largest deviation from the fitted form over computational-basis inputs:
/// `max_i || Lambda(|i><i|) - p |i><i| - (1 - p) gamma ||_1`.
pub fn worst_basis_residual(j: &Mat, fit: &Fit) -> Result<f64> {
    let d = message_dim_of(j)?;
    let gamma = fit.gamma.clone().unwrap_or_else(|| abort_output(d));
    let mut worst: f64 = 0.0;
    for i in 0..d {
        let out = channel_from_choi(j, &projector(&basis_ket(d, i)))?;
        let mut target = gamma.scale(1.0 - fit.p);
        target[(i, i)] += r(fit.p);
        worst = worst.max(trace_norm_herm(&(out - target)));
    }
    Ok(worst)
}
