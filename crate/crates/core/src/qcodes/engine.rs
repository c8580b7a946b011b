//! Closed-form effective Choi states of Clifford-keyed codes under an
//! ideal key functionality.
//!
//! A tampering attempt is summarized by the probability that both key
//! sources survive, the channel of the party holding the encrypted register
//! `A` (with its private memory `W_q`), the channel of the party holding
//! the trap half `Ehat` (with memory `W_p`), and the state the two parties
//! share on `W_q (x) W_p`. Averaging the Clifford key splits the first
//! channel into an identity part and a depolarizing part, which gives the
//! output in terms of a handful of traces.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::sampler::{random_function, random_local_channel, AncillaKind, SamplerConfig};
use crate::classical::{IdealKeyNmc, SplitFunctions};
use crate::error::{LabError, Result};
use crate::qstate::linalg::*;

/// Dimensions of a keyed code: message `d_m`, trap half `d_e`. The key acts
/// on `A = (M, E)` of dimension `d_m d_e`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct KeyedShape {
    pub d_m: usize,
    pub d_e: usize,
}

impl KeyedShape {
    pub fn new(k: usize, lambda: usize) -> Self {
        KeyedShape { d_m: 1 << k, d_e: 1 << lambda }
    }

    pub fn d_a(&self) -> usize {
        self.d_m * self.d_e
    }

    /// `|Phi><Phi|` on `(Mp, Mref)` with `Mp` carrying the abort level.
    pub fn phi(&self) -> Mat {
        let d = self.d_m;
        let mut v = Vector::zeros((d + 1) * d);
        for i in 0..d {
            v[i * d + i] = r(1.0 / (d as f64).sqrt());
        }
        projector(&v)
    }

    /// `U (x) U` on `(Mp, Mref)`: maximally mixed message, no abort.
    pub fn mixed(&self) -> Mat {
        let d = self.d_m;
        let mut out = zeros((d + 1) * d, (d + 1) * d);
        for i in 0..d * d {
            out[(i, i)] = r(1.0 / (d * d) as f64);
        }
        out
    }

    /// `|abort><abort| (x) U`.
    pub fn abort(&self) -> Mat {
        let d = self.d_m;
        let mut out = zeros((d + 1) * d, (d + 1) * d);
        for j in 0..d {
            out[(d * d + j, d * d + j)] = r(1.0 / d as f64);
        }
        out
    }

    /// `|m><m| (x) U` for a fixed replacement message `m`.
    pub fn replaced(&self, m: &Vector) -> Result<Mat> {
        let d = self.d_m;
        if m.len() != d {
            return Err(LabError::DimensionMismatch("replacement message".into()));
        }
        let mut mp = Vector::zeros(d + 1);
        mp.rows_mut(0, d).copy_from(m);
        Ok(kron(&projector(&mp), &maximally_mixed(d)))
    }
}

/// A local channel acting on the first `sub_dim` levels block of a keyed
/// register together with a private memory of dimension `w_dim`, given by
/// Kraus operators on `sub (x) W`. The rest of the register is untouched.
#[derive(Clone, Debug)]
pub struct Hook {
    pub kraus: Vec<Mat>,
    pub sub_dim: usize,
    pub w_dim: usize,
}

impl Hook {
    pub fn new(kraus: Vec<Mat>, sub_dim: usize, w_dim: usize) -> Result<Self> {
        let d = sub_dim * w_dim;
        let mut s = zeros(d, d);
        for k in &kraus {
            if k.nrows() != d || k.ncols() != d {
                return Err(LabError::DimensionMismatch("hook Kraus operator".into()));
            }
            s += k.adjoint() * k;
        }
        let dev = max_abs_diff(&s, &identity(d));
        if dev > 1e-8 {
            return Err(LabError::BadChannel { expected: "trace preserving", deviation: dev });
        }
        Ok(Hook { kraus, sub_dim, w_dim })
    }

    pub fn identity(sub_dim: usize, w_dim: usize) -> Self {
        Hook { kraus: vec![identity(sub_dim * w_dim)], sub_dim, w_dim }
    }

    /// `Tr_sub[K] / sub_dim` for each Kraus operator.
    fn traced(&self) -> Vec<Mat> {
        let w = self.w_dim;
        self.kraus
            .iter()
            .map(|k| {
                let mut m = zeros(w, w);
                for s in 0..self.sub_dim {
                    m += k.view((s * w, s * w), (w, w));
                }
                m.unscale(self.sub_dim as f64)
            })
            .collect()
    }

    /// Blocks `<a|K|b> / sqrt(sub_dim)`: Kraus operators of the fully
    /// averaged map on `W`.
    fn blocks(&self) -> Vec<Mat> {
        let w = self.w_dim;
        let s = (self.sub_dim as f64).sqrt();
        let mut out = vec![];
        for k in &self.kraus {
            for a in 0..self.sub_dim {
                for b in 0..self.sub_dim {
                    out.push(k.view((a * w, b * w), (w, w)).into_owned().unscale(s));
                }
            }
        }
        out
    }
}

/// Everything the closed form needs from one tampering attempt.
#[derive(Clone, Debug)]
pub struct KeyedAttack {
    /// Probability that both key sources are left unchanged.
    pub p_same: f64,
    pub q: Hook,
    /// Channel on the trap half; `None` when the code has no trap.
    pub p: Option<Hook>,
    /// Shared state on `W_q (x) W_p`.
    pub shared: Mat,
}

/// Scalar summary of the same-key branch.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SameKeyTerms {
    pub a1: f64,
    pub a2: f64,
    pub t1: f64,
    pub t2: f64,
}

fn weight(q_ops: &[Mat], p_ops: &[Mat], rho: &Mat) -> f64 {
    let mut total = 0.0;
    for m in q_ops {
        for l in p_ops {
            let op = kron(m, l);
            total += (&op * rho * op.adjoint()).trace().re;
        }
    }
    total
}

impl KeyedAttack {
    fn wp(&self) -> usize {
        self.p.as_ref().map_or(self.shared.nrows() / self.q.w_dim, |p| p.w_dim)
    }

    pub fn validate(&self, shape: &KeyedShape) -> Result<()> {
        if shape.d_a() % self.q.sub_dim != 0 {
            return Err(LabError::DimensionMismatch("q hook block does not divide the keyed register".into()));
        }
        if let Some(p) = &self.p {
            if shape.d_e % p.sub_dim != 0 {
                return Err(LabError::DimensionMismatch("p hook block does not divide the trap register".into()));
            }
        } else if shape.d_e != 1 {
            return Err(LabError::InvalidParameter("trap present but no trap-side hook".into()));
        }
        let d = self.q.w_dim * self.wp();
        if self.shared.nrows() != d || !is_psd(&self.shared, 1e-9) || (self.shared.trace().re - 1.0).abs() > 1e-9 {
            return Err(LabError::InvalidParameter("shared memory state is not a density matrix of the right size".into()));
        }
        if !(0.0..=1.0).contains(&self.p_same) {
            return Err(LabError::InvalidParameter("p_same outside [0, 1]".into()));
        }
        Ok(())
    }

    pub fn terms(&self) -> SameKeyTerms {
        let wp = self.wp();
        let ell: Vec<Mat> = match &self.p {
            Some(p) => p.traced(),
            None => vec![identity(wp)],
        };
        let id_p = vec![identity(wp)];
        let m1 = self.q.traced();
        let all = self.q.blocks();
        let a1 = weight(&m1, &ell, &self.shared);
        let a_tot = weight(&all, &ell, &self.shared);
        let t1 = weight(&m1, &id_p, &self.shared);
        let t_tot = weight(&all, &id_p, &self.shared);
        SameKeyTerms { a1, a2: a_tot - a1, t1, t2: t_tot - t1 }
    }
}

/// Output when the key is unchanged.
pub fn j_same(shape: &KeyedShape, attack: &KeyedAttack) -> Result<Mat> {
    attack.validate(shape)?;
    let SameKeyTerms { a1, a2, t1, t2 } = attack.terms();
    let d2 = (shape.d_a() * shape.d_a()) as f64;
    let c = d2 / (d2 - 1.0);
    let cp = 1.0 / (d2 - 1.0);
    let e2 = (shape.d_e * shape.d_e) as f64;
    let coef_phi = a1 - cp * a2;
    let coef_mixed = c * t2 / e2;
    let coef_abort = (t1 - a1) - cp * (t2 - a2) + c * t2 * (1.0 - 1.0 / e2);
    Ok(shape.phi().scale(coef_phi) + shape.mixed().scale(coef_mixed) + shape.abort().scale(coef_abort))
}

/// Output when the decoder's key is independent of the encoder's.
pub fn j_fresh(shape: &KeyedShape) -> Mat {
    let e2 = (shape.d_e * shape.d_e) as f64;
    shape.mixed().scale(1.0 / e2) + shape.abort().scale(1.0 - 1.0 / e2)
}

/// Effective Choi state of one tampering attempt.
pub fn effective(shape: &KeyedShape, attack: &KeyedAttack) -> Result<Mat> {
    Ok(j_same(shape, attack)?.scale(attack.p_same) + j_fresh(shape).scale(1.0 - attack.p_same))
}

/// Resources granted to the two quantum parties.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KeyedSampler {
    pub k: usize,
    pub lambda: usize,
    /// Memory qubits of the party holding `A`.
    pub q_memory: usize,
    /// Memory qubits of the party holding the trap half.
    pub p_memory: usize,
    /// Whether the two memories start entangled.
    pub entangled: bool,
    /// Largest `sub (x) W` dimension a sampled channel acts on.
    pub max_block: usize,
    pub x_bits: u32,
    pub y_bits: u32,
    pub cfg: SamplerConfig,
}

impl KeyedSampler {
    pub fn new(k: usize, lambda: usize) -> Self {
        KeyedSampler {
            k,
            lambda,
            q_memory: 0,
            p_memory: 0,
            entangled: false,
            max_block: 64,
            x_bits: 4,
            y_bits: 4,
            cfg: SamplerConfig::default(),
        }
    }

    pub fn shape(&self) -> KeyedShape {
        KeyedShape::new(self.k, self.lambda)
    }

    fn block(&self, total_qubits: usize, w_qubits: usize) -> usize {
        let mut s = total_qubits;
        while s > 1 && (1usize << (s + w_qubits)) > self.max_block {
            s -= 1;
        }
        1 << s
    }

    fn hook<R: Rng + ?Sized>(&self, total_qubits: usize, w_qubits: usize, rng: &mut R) -> Result<Hook> {
        let sub = self.block(total_qubits, w_qubits);
        let w = 1 << w_qubits;
        let ch = random_local_channel(vec![sub * w], &self.cfg, rng);
        Hook::new(ch.kraus, sub, w)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<KeyedAttack> {
        let key = IdealKeyNmc::new(self.k as u32 + self.lambda as u32, self.x_bits, self.y_bits)?;
        let hook = SplitFunctions {
            f: random_function(1 << self.x_bits, rng),
            g: random_function(1 << self.y_bits, rng),
        };
        let p_same = key.analyze(&hook)?.p_same();
        let q = self.hook(self.k + self.lambda, self.q_memory, rng)?;
        let p = if self.lambda > 0 { Some(self.hook(self.lambda, self.p_memory, rng)?) } else { None };
        let (wq, wp) = (1usize << self.q_memory, 1usize << self.p_memory);
        let shared = if self.entangled && wq > 1 && wp > 1 {
            match self.cfg.ancilla {
                AncillaKind::RandomPure => projector(&random_pure(wq * wp, rng)),
                AncillaKind::Epr => {
                    let d = wq.min(wp);
                    let mut v = Vector::zeros(wq * wp);
                    for i in 0..d {
                        v[i * wp + i] = r(1.0 / (d as f64).sqrt());
                    }
                    projector(&v)
                }
            }
        } else {
            kron(&projector(&random_pure(wq, rng)), &projector(&random_pure(wp, rng)))
        };
        Ok(KeyedAttack { p_same, q, p, shared })
    }
}
