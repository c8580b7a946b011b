use std::collections::{HashSet, VecDeque};
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::pauli::PauliOp;
use crate::error::{LabError, Result};
use crate::qstate::linalg::*;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CliffordSource {
    Enumerated(usize),
    Sampled(u64),
}

#[derive(Clone, Debug)]
pub struct CliffordOp {
    pub n: usize,
    pub unitary: Mat,
    pub source: CliffordSource,
}

impl CliffordOp {
    /// `U^dagger P U`, returned as a Pauli with tracked phase.
    pub fn conjugate_pauli(&self, p: &PauliOp) -> Option<PauliOp> {
        let m = self.unitary.adjoint() * p.matrix() * &self.unitary;
        match_pauli(&m, self.n)
    }
}

/// Identifies `m` as `i^k * P` for a Pauli `P`, if it is one.
pub fn match_pauli(m: &Mat, n: usize) -> Option<PauliOp> {
    let d = 1usize << n;
    for idx in 0..d * d {
        let p = PauliOp::from_index(n, idx);
        let pm = p.matrix();
        // <P, m> / d gives the coefficient of P in m.
        let coef = (pm.adjoint() * m).trace() / d as f64;
        if (coef.norm() - 1.0).abs() < 1e-9 {
            for k in 0..4u8 {
                let ph = [ONE, I, -ONE, -I][k as usize];
                if (coef - ph).norm() < 1e-9 {
                    return Some(PauliOp { phase: (p.phase + k) % 4, ..p });
                }
            }
        }
    }
    None
}

/// Canonical key of a unitary modulo global phase.
fn phase_key(u: &Mat) -> Vec<(i64, i64)> {
    let mut ph = ONE;
    for x in u.iter() {
        if x.norm() > 1e-6 {
            ph = x.conj() / x.norm();
            break;
        }
    }
    u.iter()
        .map(|x| {
            let y = x * ph;
            ((y.re * 1e6).round() as i64, (y.im * 1e6).round() as i64)
        })
        .collect()
}

fn generators(n: usize) -> Vec<Mat> {
    let h = hadamard();
    let s = phase_s();
    let id = identity(2);
    match n {
        1 => vec![h, s],
        2 => vec![
            h.kronecker(&id),
            id.kronecker(&h),
            s.kronecker(&id),
            id.kronecker(&s),
            cnot(),
        ],
        _ => unreachable!(),
    }
}

fn enumerate(n: usize) -> Vec<CliffordOp> {
    let gens = generators(n);
    let d = 1usize << n;
    let mut seen = HashSet::new();
    let mut out = vec![];
    let mut queue = VecDeque::new();
    let start = identity(d);
    seen.insert(phase_key(&start));
    queue.push_back(start);
    while let Some(u) = queue.pop_front() {
        for g in &gens {
            let v = g * &u;
            let key = phase_key(&v);
            if seen.insert(key) {
                queue.push_back(v);
            }
        }
        let idx = out.len();
        out.push(CliffordOp { n, unitary: u, source: CliffordSource::Enumerated(idx) });
    }
    out
}

static GROUP1: OnceLock<Vec<CliffordOp>> = OnceLock::new();
static GROUP2: OnceLock<Vec<CliffordOp>> = OnceLock::new();

/// The Clifford group modulo phase on `n <= 2` qubits, memoized.
pub fn clifford_group(n: usize) -> Result<&'static [CliffordOp]> {
    match n {
        1 => Ok(GROUP1.get_or_init(|| enumerate(1))),
        2 => Ok(GROUP2.get_or_init(|| enumerate(2))),
        _ => Err(LabError::EnumerationTooLarge(format!("Clifford group on {n} qubits"))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupKind {
    Pauli,
    CliffordModPhase,
}

/// Complete, duplicate-free operator list modulo phase.
pub fn enumerate_group(n: usize, which: GroupKind) -> Result<Vec<Mat>> {
    if !(1..=2).contains(&n) {
        return Err(LabError::EnumerationTooLarge(format!("{n} qubits")));
    }
    Ok(match which {
        GroupKind::Pauli => super::pauli::pauli_group(n).iter().map(|p| p.matrix()).collect(),
        GroupKind::CliffordModPhase => clifford_group(n)?.iter().map(|c| c.unitary.clone()).collect(),
    })
}

/// Uniformly random Clifford (mod phase) on `n <= 4` qubits: random
/// symplectic images of the `X_i`, `Z_i` with random signs, realized as a
/// unitary through the stabilizer state of the `Z` images.
pub fn random_clifford<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Mat> {
    if n == 0 || n > 4 {
        return Err(LabError::InvalidParameter(format!("symplectic sampler supports 1..=4 qubits, got {n}")));
    }
    let mask = (1u64 << n) - 1;
    let mut xs: Vec<PauliOp> = vec![];
    let mut zs: Vec<PauliOp> = vec![];
    let commutes_with_all = |p: &PauliOp, xs: &[PauliOp], zs: &[PauliOp]| {
        xs.iter().chain(zs).all(|q| p.commutes(q))
    };
    for _ in 0..n {
        let v = loop {
            let cand = PauliOp::hermitian(n, rng.gen::<u64>() & mask, rng.gen::<u64>() & mask);
            if !cand.is_identity_mod_phase() && commutes_with_all(&cand, &xs, &zs) {
                break cand;
            }
        };
        let w = loop {
            let cand = PauliOp::hermitian(n, rng.gen::<u64>() & mask, rng.gen::<u64>() & mask);
            if cand.symplectic(&v) == 1 && commutes_with_all(&cand, &xs, &zs) {
                break cand;
            }
        };
        let sx = 2 * (rng.gen::<bool>() as u8);
        let sz = 2 * (rng.gen::<bool>() as u8);
        xs.push(PauliOp { phase: (v.phase + sx) % 4, ..v });
        zs.push(PauliOp { phase: (w.phase + sz) % 4, ..w });
    }
    Ok(unitary_from_images(&xs, &zs))
}

/// Unitary `U` with `U X_i U^dagger = xs[i]` and `U Z_i U^dagger = zs[i]`
/// (up to global phase).
pub fn unitary_from_images(xs: &[PauliOp], zs: &[PauliOp]) -> Mat {
    let n = xs.len();
    let d = 1usize << n;
    let mut proj = identity(d);
    for z in zs {
        proj = &proj * (identity(d) + z.matrix()).scale(0.5);
    }
    let mut best = 0;
    let mut best_norm = 0.0;
    for j in 0..d {
        let nrm = proj.column(j).norm();
        if nrm > best_norm {
            best_norm = nrm;
            best = j;
        }
    }
    let s: Vector = proj.column(best).into_owned().unscale(best_norm);
    let xm: Vec<Mat> = xs.iter().map(|x| x.matrix()).collect();
    let mut u = zeros(d, d);
    for col in 0..d {
        let mut v = s.clone();
        // |x> = X_0^{x_0} ... |0>, so U|x> applies the images in reverse order.
        for q in (0..n).rev() {
            if (col >> (n - 1 - q)) & 1 == 1 {
                v = &xm[q] * v;
            }
        }
        u.set_column(col, &v);
    }
    u
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignGrade {
    /// Exactly uniform over the enumerated Clifford group (n <= 2).
    Ideal,
    /// Uniform random Clifford from the symplectic sampler (n <= 4).
    TwoDesign,
    /// Uniform Pauli; a 1-design only.
    OneDesign,
}

/// A family of unitaries indexed by a classical key.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KeyedUnitaryFamily {
    pub n: usize,
    pub grade: DesignGrade,
    /// Nominal key length in bits (`5n`-bit format kept as metadata).
    pub key_bits: u32,
    /// Keys are integers in `0..key_space`; every such key is valid.
    pub key_space: u64,
}

impl KeyedUnitaryFamily {
    pub fn new(n: usize, grade: DesignGrade) -> Result<Self> {
        let key_space = match grade {
            DesignGrade::Ideal => clifford_group(n)?.len() as u64,
            DesignGrade::TwoDesign => {
                if n == 0 || n > 4 {
                    return Err(LabError::InvalidParameter("two_design sampler needs 1..=4 qubits".into()));
                }
                u64::MAX
            }
            DesignGrade::OneDesign => 1u64 << (2 * n),
        };
        Ok(KeyedUnitaryFamily { n, grade, key_bits: (5 * n) as u32, key_space })
    }

    pub fn sample(&self, key: u64) -> Result<CliffordOp> {
        match self.grade {
            DesignGrade::Ideal => {
                let g = clifford_group(self.n)?;
                let k = (key % self.key_space) as usize;
                Ok(g[k].clone())
            }
            DesignGrade::TwoDesign => {
                let mut rng = ChaCha20Rng::seed_from_u64(key);
                Ok(CliffordOp { n: self.n, unitary: random_clifford(self.n, &mut rng)?, source: CliffordSource::Sampled(key) })
            }
            DesignGrade::OneDesign => {
                let p = PauliOp::from_index(self.n, (key % self.key_space) as usize);
                Ok(CliffordOp { n: self.n, unitary: p.matrix(), source: CliffordSource::Sampled(key) })
            }
        }
    }

    /// Additive slack for certified bounds from approximate sampling.
    pub fn sampling_slack(&self) -> f64 {
        match self.grade {
            DesignGrade::Ideal => 0.0,
            DesignGrade::TwoDesign => 2.0 * 2f64.powi(-2 * self.n as i32),
            DesignGrade::OneDesign => f64::INFINITY,
        }
    }

    /// Whether the family may back a tamper-detection certificate.
    pub fn supports_tamper_detection(&self) -> bool {
        self.grade != DesignGrade::OneDesign
    }
}
