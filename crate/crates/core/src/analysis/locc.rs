use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::{measurement_net, NetBasis};
use crate::error::{LabError, Result};
use crate::qstate::linalg::*;

/// Best bias found over the strategy family, with the strategy's name.
/// This is a lower bound on the LOCC distinguishability.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LoccBias {
    pub bias: f64,
    pub strategy: String,
    pub strategies: usize,
    pub family: String,
}

/// Conditional states of side `keep` after measuring side `meas` of a
/// bipartite operator in `basis`: `Tr_meas[(|b><b| (x) I) rho]`.
fn conditionals(rho: &Mat, dims: [usize; 2], meas: usize, basis: &Mat) -> Vec<Mat> {
    let keep = 1 - meas;
    (0..basis.ncols())
        .map(|o| {
            let p = projector(&basis.column(o).into_owned());
            let op = if meas == 0 { kron(&p, &identity(dims[1])) } else { kron(&identity(dims[0]), &p) };
            partial_trace(&(&op * rho * &op), &dims, &[keep])
        })
        .collect()
}

/// Helstrom term for the residue left with the last party.
fn helstrom(a: &Mat, b: &Mat) -> f64 {
    0.5 * trace_norm_herm(&(a - b))
}

/// Largest `|P[guess 0 | rho0] - P[guess 0 | rho1]|` over one- and (when
/// `depth >= 2`) two-round strategies in which the parties measure in net
/// bases, announce outcomes, and the last party applies the optimal
/// measurement to its conditional states.
pub fn locc_bias_lower_bound<R: Rng + ?Sized>(
    rho0: &Mat,
    rho1: &Mat,
    dims: [usize; 2],
    n_random: usize,
    depth: usize,
    rng: &mut R,
) -> Result<LoccBias> {
    if rho0.nrows() != dims[0] * dims[1] || rho1.nrows() != rho0.nrows() {
        return Err(LabError::DimensionMismatch("bipartite states".into()));
    }
    if depth == 0 {
        return Err(LabError::InvalidParameter("depth must be at least 1".into()));
    }
    let nets: Vec<Vec<NetBasis>> = dims
        .iter()
        .map(|&d| {
            if !d.is_power_of_two() {
                return Err(LabError::InvalidParameter("net bases need qubit sides".into()));
            }
            Ok(measurement_net(d.trailing_zeros() as usize, n_random, rng))
        })
        .collect::<Result<_>>()?;
    let mut best = LoccBias { bias: 0.0, strategy: "none".into(), strategies: 0, family: format!("net bases, depth {depth}") };
    let consider = |bias: f64, name: String, best: &mut LoccBias| {
        best.strategies += 1;
        if bias > best.bias + 1e-13 {
            best.bias = bias;
            best.strategy = name;
        }
    };
    let qubit_net = measurement_net(1, n_random, rng);
    for first in 0..2 {
        let second = 1 - first;
        if depth >= 2 && dims[first] > 2 {
            // Round one: `first` measures its leading qubit. Round two:
            // `second` measures in the best net basis for that outcome.
            // The first party then answers optimally with what it kept.
            let rest = dims[first] / 2;
            for nb in &qubit_net {
                let mut total = 0.0;
                for o in 0..2 {
                    let p = kron(&projector(&nb.basis.column(o).into_owned()), &identity(rest));
                    let op = if first == 0 { kron(&p, &identity(dims[1])) } else { kron(&identity(dims[0]), &p) };
                    let (s0, s1) = (&op * rho0 * &op, &op * rho1 * &op);
                    let mut best_o = helstrom(&partial_trace(&s0, &dims, &[second]), &partial_trace(&s1, &dims, &[second]));
                    for nb2 in &nets[second] {
                        let d0 = conditionals(&s0, dims, second, &nb2.basis);
                        let d1 = conditionals(&s1, dims, second, &nb2.basis);
                        best_o = best_o.max(d0.iter().zip(&d1).map(|(a, b)| helstrom(a, b)).sum());
                    }
                    total += best_o;
                }
                consider(total, format!("{first}:qubit0/{} -> {second}:adaptive -> {first}:helstrom", nb.name), &mut best);
            }
        }
        for nb in &nets[first] {
            let c0 = conditionals(rho0, dims, first, &nb.basis);
            let c1 = conditionals(rho1, dims, first, &nb.basis);
            let one: f64 = c0.iter().zip(&c1).map(|(a, b)| helstrom(a, b)).sum();
            consider(one, format!("{first}:{} -> helstrom", nb.name), &mut best);
        }
    }
    Ok(best)
}

/// Total variation distance between two laws on the same outcomes.
pub fn tv_distance(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}
