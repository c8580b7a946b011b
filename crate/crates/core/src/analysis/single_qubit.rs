use nalgebra::{Matrix3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::pauli_clifford::clifford_group;
use crate::qstate::linalg::*;
use crate::qstate::Channel;

/// Points of the Fibonacci sphere net.
pub const SPHERE_POINTS: usize = 233;
/// Random traceless unitaries added to the Clifford part of the Choi net.
pub const CHOI_RANDOM: usize = 64;

/// Affine (Bloch) form `r -> T r + t` of a qubit channel and the two
/// non-malleability diagnostics computed from it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QubitNmCheck {
    pub t_matrix: [[f64; 3]; 3],
    pub t_vector: [f64; 3],
    /// Min, mean and max of the negation bias over the sphere net.
    pub bias_min: f64,
    pub bias_mean: f64,
    pub bias_max: f64,
    /// Exact spread `max - min` over the whole sphere.
    pub exact_spread: f64,
    /// Negation bias implied by the overlap of the Choi state with
    /// maximally entangled states orthogonal to `Phi`: min, mean and max
    /// over the Choi net.
    pub choi_min: f64,
    pub choi_mean: f64,
    pub choi_max: f64,
    /// Mean raw overlap `<beta|J|beta>` over the Choi net.
    pub overlap_mean: f64,
    /// `|| T - (1 - 2p) I ||_F` with `p` the mean bias.
    pub scalar_gap: f64,
    pub t_norm: f64,
}

impl QubitNmCheck {
    pub fn sphere_spread(&self) -> f64 {
        self.bias_max - self.bias_min
    }

    pub fn choi_spread(&self) -> f64 {
        self.choi_max - self.choi_min
    }

    /// Non-malleable with error `eps` by the sphere-net criterion.
    pub fn sphere_verdict(&self, eps: f64) -> bool {
        self.sphere_spread() <= 2.0 * eps
    }

    pub fn choi_verdict(&self, eps: f64) -> bool {
        self.choi_spread() <= 2.0 * eps
    }

    /// The shift vector bound `||t|| <= 2 (p + eps)`.
    pub fn shift_consistent(&self, eps: f64) -> bool {
        self.t_norm <= 2.0 * (self.bias_mean + eps) + 1e-9
    }
}

/// `n` nearly uniform unit vectors.
pub fn fibonacci_sphere(n: usize) -> Vec<Vector3<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let rad = (1.0 - z * z).sqrt();
            let th = golden * i as f64;
            Vector3::new(rad * th.cos(), rad * th.sin(), z)
        })
        .collect()
}

fn bloch_op(v: &Vector3<f64>) -> Mat {
    let p = pauli_matrices();
    p[1].scale(v[0]) + p[2].scale(v[1]) + p[3].scale(v[2])
}

/// Affine form of a qubit channel.
pub fn affine_form(ch: &Channel) -> Result<(Matrix3<f64>, Vector3<f64>)> {
    if ch.din() != 2 || ch.dout() != 2 {
        return Err(LabError::DimensionMismatch("single-qubit channel expected".into()));
    }
    ch.validate(1e-9)?;
    let p = pauli_matrices();
    let mut t = Matrix3::zeros();
    let mut s = Vector3::zeros();
    let img = ch.apply(&identity(2));
    for i in 0..3 {
        s[i] = 0.5 * (&p[i + 1] * &img).trace().re;
        let out = ch.apply(&p[i + 1]);
        for k in 0..3 {
            t[(k, i)] = 0.5 * (&p[k + 1] * &out).trace().re;
        }
    }
    Ok((t, s))
}

/// Traceless unitaries of the Choi net: Cliffords with zero trace (up to
/// phase) followed by random Pauli-axis rotations by pi.
pub fn choi_net() -> Result<Vec<Mat>> {
    let mut net = vec![];
    for c in clifford_group(1)? {
        if c.unitary.trace().norm() < 1e-9 {
            net.push(c.unitary.clone());
        }
    }
    let mut rng = ChaCha20Rng::seed_from_u64(0x0c401);
    for _ in 0..CHOI_RANDOM {
        let v = random_pure(2, &mut rng);
        let (a, b) = (v[0], v[1]);
        // Bloch vector of a random pure state: a uniform axis.
        let axis = Vector3::new(2.0 * (a.conj() * b).re, 2.0 * (a.conj() * b).im, a.norm_sqr() - b.norm_sqr());
        net.push(bloch_op(&axis));
    }
    Ok(net)
}

/// Negation bias `(1 - v^T T v) / 2`, averaged over the pair `(v, -v)`.
fn negation_bias(t: &Matrix3<f64>, v: &Vector3<f64>) -> f64 {
    0.5 * (1.0 - v.dot(&(t * v)))
}

/// Sphere-net and Choi-net diagnostics of a qubit channel.
pub fn single_qubit_nm_check(ch: &Channel) -> Result<QubitNmCheck> {
    let (t, s) = affine_form(ch)?;
    let biases: Vec<f64> = fibonacci_sphere(SPHERE_POINTS).iter().map(|v| negation_bias(&t, v)).collect();
    let mean = biases.iter().sum::<f64>() / biases.len() as f64;
    let sym = (t + t.transpose()) * 0.5;
    let ev = sym.symmetric_eigenvalues();
    let exact_spread = 0.5 * (ev.max() - ev.min());

    // Choi state of the channel on (reference, output).
    let phi = projector(&max_entangled(2));
    let mut choi = zeros(4, 4);
    for k in &ch.kraus {
        let big = kron(&identity(2), k);
        choi += &big * &phi * big.adjoint();
    }
    let net = choi_net()?;
    // <beta_n|J|beta_n> = (1 - tr T)/4 + n^T T n / 2, so the negation bias
    // along n is (1 - tr T)/4 + 1/2 - <beta_n|J|beta_n>.
    let offset = 0.25 * (1.0 - t.trace()) + 0.5;
    let mut overlaps = vec![];
    let choi_vals: Vec<f64> = net
        .iter()
        .map(|v| {
            let beta = kron(&identity(2), v) * max_entangled(2);
            let overlap = (beta.adjoint() * &choi * &beta)[(0, 0)].re;
            overlaps.push(overlap);
            offset - overlap
        })
        .collect();
    let cmean = choi_vals.iter().sum::<f64>() / choi_vals.len() as f64;
    let scalar_gap = (t - Matrix3::identity() * (1.0 - 2.0 * mean)).norm();
    let arr = |m: &Matrix3<f64>| [[m[(0, 0)], m[(0, 1)], m[(0, 2)]], [m[(1, 0)], m[(1, 1)], m[(1, 2)]], [m[(2, 0)], m[(2, 1)], m[(2, 2)]]];
    Ok(QubitNmCheck {
        t_matrix: arr(&t),
        t_vector: [s[0], s[1], s[2]],
        bias_min: biases.iter().cloned().fold(f64::INFINITY, f64::min),
        bias_mean: mean,
        bias_max: biases.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        exact_spread,
        choi_min: choi_vals.iter().cloned().fold(f64::INFINITY, f64::min),
        choi_mean: cmean,
        choi_max: choi_vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        overlap_mean: overlaps.iter().sum::<f64>() / overlaps.len() as f64,
        scalar_gap,
        t_norm: s.norm(),
    })
}

/// Largest angular gap of a direction net, estimated against a dense
/// reference sample (antipodal points identified).
pub fn net_resolution(net: &[Vector3<f64>]) -> f64 {
    let probe = fibonacci_sphere(20_000);
    probe
        .iter()
        .map(|p| net.iter().map(|v| p.dot(v).abs().min(1.0).acos()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

/// Axes of the Choi net as unit vectors.
pub fn choi_axes() -> Result<Vec<Vector3<f64>>> {
    let p = pauli_matrices();
    Ok(choi_net()?
        .iter()
        .map(|u| {
            // u = e^{i phase} n.sigma; recover n from tr(sigma_k u).
            let c: Vec<C64> = (1..4).map(|k| (&p[k] * u).trace() * 0.5).collect();
            let phase = c.iter().max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap()).map(|z| z / z.norm()).unwrap();
            Vector3::new((c[0] / phase).re, (c[1] / phase).re, (c[2] / phase).re).normalize()
        })
        .collect())
}
