use std::collections::BTreeMap;

use serde_json::json;

use super::scheme::{output_register, CodingScheme, SchemeDescriptor};
use crate::adversary::Adversary;
use crate::error::{LabError, Result};
use crate::pauli_clifford::PauliOp;
use crate::qstate::linalg::*;
use crate::qstate::{Channel, ChannelKind, CqState, Register, RegisterLayout};

/// Single-bit code against two-party LOCC tampering. A zero is `n` EPR
/// pairs split across the shares; a one is a uniformly random non-trivial
/// Bell product. The decoder measures the pairs in the Bell basis.
#[derive(Clone, Debug)]
pub struct BitNmcLocc2 {
    pub n: usize,
}

impl BitNmcLocc2 {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > 5 {
            return Err(LabError::InvalidParameter(format!("pairs per side must be 1..=5, got {n}")));
        }
        Ok(BitNmcLocc2 { n })
    }

    pub fn side_dim(&self) -> usize {
        1 << self.n
    }

    /// `(P_{ab} (x) I)|Phi>` for the Pauli of index `idx` on share A.
    pub fn bell_vector(&self, idx: usize) -> Vector {
        let d = self.side_dim();
        let p = PauliOp::from_index(self.n, idx).matrix();
        kron(&p, &identity(d)) * max_entangled(d)
    }

    /// `Enc(0)` as a density matrix on `A (x) B`.
    pub fn enc0(&self) -> Mat {
        projector(&max_entangled(self.side_dim()))
    }

    /// `Enc(1) = (I - |Phi><Phi|) / (4^n - 1)`, the uniform mixture over the
    /// non-trivial Bell states.
    pub fn enc1(&self) -> Mat {
        let d2 = self.side_dim() * self.side_dim();
        (identity(d2) - self.enc0()).unscale((d2 - 1) as f64)
    }

    /// `Enc(1)` summed branch by branch over the explicit Bell mixture.
    pub fn enc1_branches(&self) -> Mat {
        let d2 = self.side_dim() * self.side_dim();
        let mut acc = zeros(d2, d2);
        for idx in 1..d2 {
            acc += projector(&self.bell_vector(idx));
        }
        acc.unscale((d2 - 1) as f64)
    }

    /// `P[Dec = 0]` after the adversary acts on `Enc(1)`, computed per Kraus
    /// pair as `<v|Enc(1)|v>` with `v = (A^dag (x) B^dag)|Phi>`.
    pub fn flip_probability(&self, adv: &Adversary) -> Result<f64> {
        let d = self.side_dim();
        let d2 = (d * d) as f64;
        if adv.ancilla.is_some() {
            return Err(LabError::InvalidParameter("the fast route covers ancilla-free adversaries only".into()));
        }
        let mut total = 0.0;
        for t in &adv.transcripts {
            if t.maps.len() != 2 {
                return Err(LabError::InvalidParameter("expected a two-party adversary".into()));
            }
            let a = t.maps[0].uniform_channel()?;
            let b = t.maps[1].uniform_channel()?;
            if a.din() != d || b.din() != d || a.dout() != d || b.dout() != d {
                return Err(LabError::DimensionMismatch("adversary maps vs pair register".into()));
            }
            // (A^dag (x) B^dag) vec(I)/sqrt d = vec(A^dag B^*)/sqrt d in row-major order.
            for ka in &a.kraus {
                for kb in &b.kraus {
                    let m = ka.adjoint() * kb.conjugate();
                    let norm2: f64 = m.iter().map(|z| z.norm_sqr()).sum::<f64>() / d as f64;
                    let overlap = m.trace() / d as f64;
                    total += (norm2 - overlap.norm_sqr()) / (d2 - 1.0);
                }
            }
        }
        Ok(total)
    }
}

impl CodingScheme for BitNmcLocc2 {
    fn descriptor(&self) -> SchemeDescriptor {
        SchemeDescriptor {
            name: "bitnmc_locc2".into(),
            params: json!({ "n": self.n }),
            bound_formula: "2^(1+e-n)".into(),
            bound: Some(2f64.powi(1 - self.n as i32)),
            shares: 2,
            notes: vec![],
        }
    }

    fn message_dim(&self) -> usize {
        2
    }

    fn code_layout(&self) -> RegisterLayout {
        RegisterLayout::new(vec![Register::qubits("A", self.n, 0), Register::qubits("B", self.n, 1)]).expect("bit code layout")
    }

    /// The message is read in the computational basis; coherences between
    /// the two bit values are discarded.
    fn encode(&self, state: &CqState, msg: &str) -> Result<CqState> {
        let d = self.side_dim();
        let d2 = d * d;
        let mut kraus = vec![kron_outer(&max_entangled(d), &basis_ket(2, 0))];
        let w = 1.0 / ((d2 - 1) as f64).sqrt();
        for idx in 1..d2 {
            kraus.push(kron_outer(&self.bell_vector(idx), &basis_ket(2, 1)).scale(w));
        }
        let ch = Channel::from_kraus_unchecked(kraus, vec![2], vec![d, d], ChannelKind::Cptp);
        let layout = self.code_layout();
        state.apply_channel_replace(&ch, &[msg], layout.registers().to_vec())
    }

    fn decode(&self, state: &CqState) -> Result<CqState> {
        let d = self.side_dim();
        let layout = state.layout();
        let qdims = layout.quantum_dims();
        let ta = layout.quantum_index("A")?;
        let tb = layout.quantum_index("B")?;
        let rest: Vec<usize> = (0..qdims.len()).filter(|&k| k != ta && k != tb).collect();
        let dr: usize = rest.iter().map(|&k| qdims[k]).product();
        let mut perm = vec![ta, tb];
        perm.extend(rest.iter().copied());
        let mut regs: Vec<Register> = layout.registers().iter().filter(|r| r.id != "A" && r.id != "B").cloned().collect();
        regs.push(output_register(2));
        let new_layout = RegisterLayout::with_cap(regs, layout.cap())?;
        let mut out = BTreeMap::new();
        for (k, m) in state.branches() {
            let moved = permute_factors(m, &qdims, &perm);
            let block = |i: usize, j: usize| moved.view((i * dr, j * dr), (dr, dr)).into_owned();
            let mut accept = zeros(dr, dr);
            let mut total = zeros(dr, dr);
            for a in 0..d {
                for b in 0..d {
                    accept += block(a * d + a, b * d + b);
                }
                for b in 0..d {
                    total += block(a * d + b, a * d + b);
                }
            }
            accept.unscale_mut(d as f64);
            let reject = &total - &accept;
            // Rest first, output last.
            let mut o = zeros(dr * 3, dr * 3);
            for i in 0..dr {
                for j in 0..dr {
                    o[(i * 3, j * 3)] = accept[(i, j)];
                    o[(i * 3 + 1, j * 3 + 1)] = reject[(i, j)];
                }
            }
            out.insert(k.clone(), o);
        }
        CqState::new_unchecked(new_layout, out)
    }
}

/// `|v><e|` for a ket `v` and a basis ket `e`.
fn kron_outer(v: &Vector, e: &Vector) -> Mat {
    v * e.adjoint()
}
