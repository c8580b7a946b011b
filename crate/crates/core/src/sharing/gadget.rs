use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::fit::{channel_from_choi, fit_td};
use crate::error::{LabError, Result};
use crate::pauli_clifford::pauli::pauli_twirl_on;
use crate::qcodes::engine::{effective, Hook};
use crate::qcodes::{KeyedAttack, KeyedSampler, KeyedShape};
use crate::qstate::linalg::*;

/// The three registers of one party's tamper-detection encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GadgetRegister {
    /// The Clifford-encrypted message and trap half.
    Q,
    /// One key source together with the other trap half.
    YEhat,
    /// The other key source.
    X,
}

/// One row of the routing table: register `register` of the encoding made
/// by position `tdc` is held by position `holder`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Route {
    pub tdc: usize,
    pub register: GadgetRegister,
    pub holder: usize,
}

/// Three parties `a < b < c` (positions 0, 1, 2) each encode their message
/// with trap size `(i + 1) lambda`; position `i` keeps `Q_i`, hands `X_i`
/// to position `i - 1` and `(Y_i, Ehat_i)` to position `i + 1` (mod 3).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GadgetInstance {
    pub parties: [usize; 3],
    pub lambda: usize,
    /// Message bits per position.
    pub k: usize,
}

/// Distance of a two-position marginal from maximally mixed, per encoding.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairwiseReport {
    pub missing: usize,
    pub messages: [u64; 3],
    /// Per encoding: the register the pair lacks and the trace-norm distance.
    pub parts: Vec<(usize, GadgetRegister, f64)>,
    /// Sum over encodings; bounds the distance of the product marginal.
    pub distance: f64,
    pub route: String,
}

/// Share-wise tamper detection of one position under one attack.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShareWiseTrial {
    pub position: usize,
    /// `max_m P[M' not in {m, abort}]` over basis messages.
    pub wrong_probability: f64,
    pub residual: f64,
}

/// Outcome law of one encoding for a basis message: recovered value
/// probabilities followed by the abort probability.
pub type OutcomeLaw = Vec<f64>;

impl GadgetInstance {
    pub fn new(parties: [usize; 3], lambda: usize, k: usize) -> Result<Self> {
        if !(parties[0] < parties[1] && parties[1] < parties[2]) {
            return Err(LabError::InvalidParameter(format!("parties {parties:?} are not increasing")));
        }
        if lambda == 0 || lambda > 2 || k == 0 || k > 2 {
            // Footprint sum_i (k + 2 (i + 1) lambda) = 3k + 12 lambda qubits.
            return Err(LabError::DimensionCap { dim: 1usize << (3 * k + 12 * lambda).min(60), cap: 1 << 30 });
        }
        Ok(GadgetInstance { parties, lambda, k })
    }

    pub fn lambdas(&self) -> [usize; 3] {
        [self.lambda, 2 * self.lambda, 3 * self.lambda]
    }

    pub fn holder(tdc: usize, register: GadgetRegister) -> usize {
        match register {
            GadgetRegister::Q => tdc,
            GadgetRegister::YEhat => (tdc + 1) % 3,
            GadgetRegister::X => (tdc + 2) % 3,
        }
    }

    pub fn routing() -> Vec<Route> {
        let mut out = vec![];
        for tdc in 0..3 {
            for register in [GadgetRegister::Q, GadgetRegister::YEhat, GadgetRegister::X] {
                out.push(Route { tdc, register, holder: Self::holder(tdc, register) });
            }
        }
        out
    }

    /// Registers held by a position, derived from the routing table.
    pub fn position_registers(position: usize) -> Vec<(usize, GadgetRegister)> {
        let mut regs: Vec<(usize, GadgetRegister)> =
            Self::routing().into_iter().filter(|r| r.holder == position).map(|r| (r.tdc, r.register)).collect();
        regs.sort_by_key(|&(tdc, reg)| (reg, tdc));
        regs
    }

    /// Quantum qubits of the whole gadget: `sum_i (k + 2 lambda_i)`.
    pub fn footprint_qubits(&self) -> usize {
        self.lambdas().iter().map(|l| self.k + 2 * l).sum()
    }

    pub fn shape(&self, tdc: usize) -> KeyedShape {
        KeyedShape::new(self.k, self.lambdas()[tdc])
    }

    /// Attacks on encoding `tdc` as seen from that encoding alone: the
    /// holder of `Q_i` also holds the trap half `Ehat_{i-1}` of the
    /// previous encoding, which acts as `lambda_{i-1}` qubits of memory
    /// entangled with the other holders.
    pub fn share_wise_sampler(&self, tdc: usize) -> KeyedSampler {
        let mut s = KeyedSampler::new(self.k, self.lambdas()[tdc]);
        s.q_memory = self.lambdas()[(tdc + 2) % 3];
        s.p_memory = 2;
        s.entangled = true;
        s
    }

    /// `2^{4 - lambda}` with an ideal key.
    pub fn share_wise_bound(&self) -> f64 {
        2f64.powi(4 - self.lambda as i32)
    }

    /// `6 * 2^{-lambda}` with an ideal key.
    pub fn pairwise_bound(&self) -> f64 {
        6.0 * 2f64.powi(-(self.lambda as i32))
    }

    /// Output law of encoding `tdc` for basis message `m` under `attack`.
    pub fn outcome_law(&self, tdc: usize, attack: &KeyedAttack, m: u64) -> Result<OutcomeLaw> {
        let shape = self.shape(tdc);
        let j = effective(&shape, attack)?;
        let rho = projector(&basis_ket(shape.d_m, m as usize));
        let out = channel_from_choi(&j, &rho)?;
        Ok((0..=shape.d_m).map(|i| out[(i, i)].re.max(0.0)).collect())
    }

    pub fn identity_attack(&self) -> KeyedAttack {
        KeyedAttack { p_same: 1.0, q: Hook::identity(1, 1), p: Some(Hook::identity(1, 1)), shared: identity(1) }
    }

    /// Untampered encode and decode; every position recovers its message.
    pub fn honest(&self, messages: [u64; 3]) -> Result<Option<[u64; 3]>> {
        let id = self.identity_attack();
        let mut out = [0u64; 3];
        for tdc in 0..3 {
            let law = self.outcome_law(tdc, &id, messages[tdc])?;
            let (best, p) = law.iter().enumerate().fold((0, 0.0), |acc, (i, &p)| if p > acc.1 { (i, p) } else { acc });
            if best == self.shape(tdc).d_m || p < 1.0 - 1e-9 {
                return Ok(None);
            }
            out[tdc] = best as u64;
        }
        Ok(Some(out))
    }

    /// Samples one attack on position `tdc` and measures share-wise
    /// tamper detection.
    pub fn share_wise_trial<R: Rng + ?Sized>(&self, tdc: usize, rng: &mut R) -> Result<ShareWiseTrial> {
        let sampler = self.share_wise_sampler(tdc);
        let attack = sampler.sample(rng)?;
        self.share_wise_for(tdc, &attack)
    }

    pub fn share_wise_for(&self, tdc: usize, attack: &KeyedAttack) -> Result<ShareWiseTrial> {
        let shape = self.shape(tdc);
        let j = effective(&shape, attack)?;
        let residual = fit_td(&j)?.residual;
        let mut wrong: f64 = 0.0;
        for m in 0..shape.d_m as u64 {
            let law = self.outcome_law(tdc, attack, m)?;
            let w: f64 = law[..shape.d_m].iter().enumerate().filter(|&(i, _)| i as u64 != m).map(|(_, p)| p).sum();
            wrong = wrong.max(w);
        }
        Ok(ShareWiseTrial { position: tdc, wrong_probability: wrong, residual })
    }

    /// Distance of the marginal of the two positions other than `missing`
    /// from maximally mixed, with an ideal key. Encodings small enough are
    /// twirled explicitly over the Pauli group; larger ones use the
    /// partial-trace form of the same average.
    pub fn pairwise_independence(&self, missing: usize, messages: [u64; 3]) -> Result<PairwiseReport> {
        if missing > 2 {
            return Err(LabError::InvalidParameter("position out of range".into()));
        }
        let mut parts = vec![];
        let mut dense = true;
        for tdc in 0..3 {
            let lacking = [GadgetRegister::Q, GadgetRegister::YEhat, GadgetRegister::X]
                .into_iter()
                .find(|&r| Self::holder(tdc, r) == missing)
                .expect("every position holds one register of every encoding");
            let (d, used_dense) = self.encoding_marginal_distance(tdc, lacking, messages[tdc])?;
            dense &= used_dense;
            parts.push((tdc, lacking, d));
        }
        let distance = parts.iter().map(|p| p.2).sum();
        Ok(PairwiseReport {
            missing,
            messages,
            parts,
            distance,
            route: if dense { "pauli-twirl".into() } else { "pauli-twirl+partial-trace".into() },
        })
    }

    fn encoding_marginal_distance(&self, tdc: usize, lacking: GadgetRegister, m: u64) -> Result<(f64, bool)> {
        let shape = self.shape(tdc);
        let (dm, de) = (shape.d_m, shape.d_e);
        let lam = self.lambdas()[tdc];
        // One trap pair; the trap of lambda pairs is its tensor power.
        let pair = epr();
        let half = partial_trace(&pair, &[2, 2], &[1]);
        match lacking {
            GadgetRegister::Q => {
                // Sources uniform and the trap half of a maximally entangled state.
                let ehat = kron_all(&vec![half; lam]);
                Ok((trace_norm_herm(&(ehat - maximally_mixed(de))), true))
            }
            GadgetRegister::X | GadgetRegister::YEhat => {
                // The remaining source leaves the key uniform, so Q (with the
                // trap half when held) sees a uniformly random Pauli on
                // (M, E) followed by the key's Clifford.
                let with_trap = lacking == GadgetRegister::X;
                let msg = projector(&basis_ket(dm, m as usize));
                let small = dm * de * de <= 128;
                if small {
                    let traps = epr_block(lam);
                    let rho = kron(&msg, &traps);
                    let twirled = pauli_twirl_on(&rho, &[dm, de, de], &[0, 1]);
                    let marginal = if with_trap { twirled } else { partial_trace(&twirled, &[dm, de, de], &[0, 1]) };
                    let target = maximally_mixed(marginal.nrows());
                    Ok((trace_norm_herm(&(marginal - target)), true))
                } else {
                    // Pauli average on (M, E): I/d_A (x) Tr_{M E}(rho).
                    let ehat = kron_all(&vec![half; lam]);
                    let reduced = if with_trap { ehat } else { identity(1) };
                    let d = trace_norm_herm(&(&reduced - maximally_mixed(reduced.nrows())));
                    Ok((d, false))
                }
            }
        }
    }
}
