use std::collections::BTreeMap;

use serde_json::json;

use super::scheme::{output_register, CodingScheme, SchemeDescriptor};
use crate::error::{LabError, Result};
use crate::pauli_clifford::PauliOp;
use crate::qstate::linalg::*;
use crate::qstate::{Channel, ChannelKind, CqState, Register, RegisterLayout};

/// Hides one bit in `n` Bell pairs: the bit is the parity of the number of
/// singlets. Share A holds the first half of every pair, share B the second.
#[derive(Clone, Debug)]
pub struct BellParityHiding {
    pub n: usize,
}

/// Number of singlets in the Bell product labelled by a Pauli index
/// (a qubit carrying `Y` marks a singlet).
pub fn singlet_count(n: usize, idx: usize) -> usize {
    let p = PauliOp::from_index(n, idx);
    (p.x & p.z).count_ones() as usize
}

impl BellParityHiding {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > 4 {
            return Err(LabError::InvalidParameter(format!("hiding pairs must be 1..=4, got {n}")));
        }
        Ok(BellParityHiding { n })
    }

    pub fn side_dim(&self) -> usize {
        1 << self.n
    }

    pub fn bell_vector(&self, idx: usize) -> Vector {
        let d = self.side_dim();
        kron(&PauliOp::from_index(self.n, idx).matrix(), &identity(d)) * max_entangled(d)
    }

    fn indices(&self, bit: usize) -> Vec<usize> {
        let d2 = self.side_dim() * self.side_dim();
        (0..d2).filter(|&i| singlet_count(self.n, i) % 2 == bit).collect()
    }

    /// `Enc(b)` on `A (x) B`.
    pub fn encode_bit(&self, bit: usize) -> Mat {
        let idx = self.indices(bit);
        let d2 = self.side_dim() * self.side_dim();
        let mut acc = zeros(d2, d2);
        for &i in &idx {
            acc += projector(&self.bell_vector(i));
        }
        acc.unscale(idx.len() as f64)
    }

    /// Outcome law `[P(0), P(1)]` of the Bell-basis parity decoder.
    pub fn decode_law(&self, rho: &Mat) -> [f64; 2] {
        let mut law = [0.0; 2];
        for bit in 0..2 {
            for i in self.indices(bit) {
                let v = self.bell_vector(i);
                law[bit] += (v.adjoint() * rho * &v)[(0, 0)].re;
            }
        }
        law
    }
}

/// The channel `|m><m| -> states[m]` after reading `m` in the computational
/// basis; coherences between messages are discarded.
pub fn preparation_channel(states: &[Mat], out_dims: Vec<usize>) -> Result<Channel> {
    let din = states.len();
    let mut kraus = vec![];
    for (m, rho) in states.iter().enumerate() {
        let (vals, vecs) = eigh(rho);
        for (i, &l) in vals.iter().enumerate() {
            if l > 1e-13 {
                let v = vecs.column(i).scale(l.sqrt());
                kraus.push(&v * basis_ket(din, m).adjoint());
            }
        }
    }
    Channel::new(kraus, vec![din], out_dims, ChannelKind::Cptp)
}

impl CodingScheme for BellParityHiding {
    fn descriptor(&self) -> SchemeDescriptor {
        SchemeDescriptor {
            name: "bell_parity_hiding".into(),
            params: json!({ "n": self.n }),
            bound_formula: "measured LOCC bias (lower bound over a strategy catalog)".into(),
            bound: None,
            shares: 2,
            notes: vec![],
        }
    }

    fn message_dim(&self) -> usize {
        2
    }

    fn code_layout(&self) -> RegisterLayout {
        RegisterLayout::new(vec![Register::qubits("A", self.n, 0), Register::qubits("B", self.n, 1)]).expect("hiding layout")
    }

    fn encode(&self, state: &CqState, msg: &str) -> Result<CqState> {
        let d = self.side_dim();
        let ch = preparation_channel(&[self.encode_bit(0), self.encode_bit(1)], vec![d, d])?;
        state.apply_channel_replace(&ch, &[msg], self.code_layout().registers().to_vec())
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
        let vecs: Vec<(usize, Vector)> =
            (0..d * d).map(|i| (singlet_count(self.n, i) % 2, self.bell_vector(i))).collect();
        let mut out = BTreeMap::new();
        for (k, m) in state.branches() {
            let moved = permute_factors(m, &qdims, &perm);
            let mut o = zeros(dr * 3, dr * 3);
            for (bit, v) in &vecs {
                // (<v| (x) I) rho (|v> (x) I) on the remaining registers.
                let row = Mat::from_iterator(1, v.len(), v.iter().map(|z| z.conj()));
                let bra = kron(&row, &identity(dr));
                let blk = &bra * &moved * bra.adjoint();
                for i in 0..dr {
                    for j in 0..dr {
                        o[(i * 3 + bit, j * 3 + bit)] += blk[(i, j)];
                    }
                }
            }
            out.insert(k.clone(), o);
        }
        CqState::new_unchecked(new_layout, out)
    }
}
