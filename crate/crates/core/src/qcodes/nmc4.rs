use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::hiding::{preparation_channel, singlet_count, BellParityHiding};
use super::scheme::{output_register, CodingScheme, SchemeDescriptor};
use crate::classical::{nm_fit_lp, ClassicalNmc};
use crate::error::{LabError, Result};
use crate::qstate::linalg::*;
use crate::qstate::{Channel, ChannelKind, CqState, Register, RegisterLayout};

const SHARES: [&str; 4] = ["L1", "L2", "R1", "R2"];

/// Four-share code: a split-state classical code whose two shares are each
/// hidden bit by bit in Bell-parity instances. `L1`/`L2` hold the two halves
/// of the left share's hiding pairs and `R1`/`R2` those of the right share.
#[derive(Clone, Debug)]
pub struct Nmc4Locc {
    pub inner: ClassicalNmc,
    pub hiding: BellParityHiding,
}

impl Nmc4Locc {
    pub fn new(inner: ClassicalNmc, hiding: BellParityHiding) -> Result<Self> {
        let qubits = (inner.n1 + inner.n2) as usize * 2 * hiding.n;
        if qubits > 10 {
            return Err(LabError::DimensionCap { dim: 1 << qubits, cap: 1 << 10 });
        }
        Ok(Nmc4Locc { inner, hiding })
    }

    fn half_dim(&self, bits: u32) -> usize {
        1 << (bits as usize * self.hiding.n)
    }

    /// Hiding state of a `bits`-bit share value, ordered (all A halves, all B halves).
    pub fn hidden_share(&self, value: u64, bits: u32) -> Mat {
        let nb = bits as usize;
        let d = self.hiding.side_dim();
        let parts: Vec<Mat> = (0..nb).map(|j| self.hiding.encode_bit(((value >> (nb - 1 - j)) & 1) as usize)).collect();
        let m = kron_all(&parts);
        permute_factors(&m, &vec![d; 2 * nb], &halves_perm(nb))
    }

    /// `Enc(m)` on `L1 L2 R1 R2`.
    pub fn encode_classical(&self, m: u64) -> Mat {
        let cws = self.inner.codewords(m);
        let (dl, dr) = (self.half_dim(self.inner.n1), self.half_dim(self.inner.n2));
        let mut acc = zeros(dl * dl * dr * dr, dl * dl * dr * dr);
        for &(x, y) in cws {
            acc += kron(&self.hidden_share(x, self.inner.n1), &self.hidden_share(y, self.inner.n2));
        }
        acc.unscale(cws.len() as f64)
    }

    /// Bell-basis vectors of a share block labelled by their decoded value.
    fn share_basis(&self, bits: u32) -> Vec<(u64, Vector)> {
        let nb = bits as usize;
        let d = self.hiding.side_dim();
        let per = d * d;
        let mut out = vec![];
        for combo in 0..per.pow(nb as u32) {
            let idx = digits(combo, &vec![per; nb]);
            let mut v = Vector::from_element(1, r(1.0));
            let mut value = 0u64;
            for &i in &idx {
                v = kron_vec(&v, &self.hiding.bell_vector(i));
                value = (value << 1) | (singlet_count(self.hiding.n, i) % 2) as u64;
            }
            out.push((value, permute_vector(&v, &vec![d; 2 * nb], &halves_perm(nb))));
        }
        out
    }

    fn decode_channel(&self) -> Result<Channel> {
        let left = self.share_basis(self.inner.n1);
        let right = self.share_basis(self.inner.n2);
        let outs = self.inner.outcomes();
        let mut kraus = vec![];
        for (x, vl) in &left {
            for (y, vr) in &right {
                let o = self.inner.decode(*x, *y).map_or(self.inner.reject_index(), |m| m as usize);
                kraus.push(basis_ket(outs, o) * kron_vec(vl, vr).adjoint());
            }
        }
        let (dl, dr) = (self.half_dim(self.inner.n1), self.half_dim(self.inner.n2));
        Channel::new(kraus, vec![dl, dl, dr, dr], vec![outs], ChannelKind::Cptp)
    }
}

/// Interleaved `(A_0 B_0 A_1 B_1 ...)` to `(A_0 A_1 ... B_0 B_1 ...)`.
fn halves_perm(nb: usize) -> Vec<usize> {
    (0..2 * nb).map(|p| if p < nb { 2 * p } else { 2 * (p - nb) + 1 }).collect()
}

impl CodingScheme for Nmc4Locc {
    fn descriptor(&self) -> SchemeDescriptor {
        let eps_nm = self.inner.verified_error;
        SchemeDescriptor {
            name: "nmc4_locc".into(),
            params: json!({ "k": self.inner.k, "share_bits": [self.inner.n1, self.inner.n2], "hiding_pairs": self.hiding.n }),
            bound_formula: "2*eps_LOCC + eps_NM".into(),
            bound: None,
            shares: 4,
            notes: vec![format!("inner eps_NM = {eps_nm:?}; eps_LOCC is measured, not proven")],
        }
    }

    fn message_dim(&self) -> usize {
        self.inner.messages() as usize
    }

    fn code_layout(&self) -> RegisterLayout {
        let (l, r) = (self.inner.n1 as usize * self.hiding.n, self.inner.n2 as usize * self.hiding.n);
        RegisterLayout::new(vec![
            Register::qubits(SHARES[0], l, 0),
            Register::qubits(SHARES[1], l, 1),
            Register::qubits(SHARES[2], r, 2),
            Register::qubits(SHARES[3], r, 3),
        ])
        .expect("four-share layout")
    }

    fn encode(&self, state: &CqState, msg: &str) -> Result<CqState> {
        let states: Vec<Mat> = (0..self.inner.messages()).map(|m| self.encode_classical(m)).collect();
        let layout = self.code_layout();
        let ch = preparation_channel(&states, layout.quantum_dims())?;
        state.apply_channel_replace(&ch, &[msg], layout.registers().to_vec())
    }

    fn decode(&self, state: &CqState) -> Result<CqState> {
        let ch = self.decode_channel()?;
        state.apply_channel_replace(&ch, &SHARES, vec![output_register(self.message_dim())])
    }
}

/// One transcript of a tampering strategy against ideal hiding: since no
/// party learns anything about the hidden values, the transcript law is a
/// fixed distribution, and the left and right pairs each undergo a
/// stochastic map (`left[x][x']`, `right[y][y']`) chosen by the transcript.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MockBranch {
    pub weight: f64,
    pub left: Vec<Vec<f64>>,
    pub right: Vec<Vec<f64>>,
}

/// A tampering strategy against the four-share code with ideal hiding.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MockLocc4 {
    pub label: String,
    pub branches: Vec<MockBranch>,
}

fn stochastic_ok(m: &[Vec<f64>], n: usize) -> bool {
    m.len() == n && m.iter().all(|row| row.len() == n && row.iter().all(|&p| p >= -1e-12) && (row.iter().sum::<f64>() - 1.0).abs() < 1e-9)
}

impl MockLocc4 {
    pub fn identity(inner: &ClassicalNmc) -> Self {
        let eye = |n: usize| (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        MockLocc4 {
            label: "identity".into(),
            branches: vec![MockBranch { weight: 1.0, left: eye(1 << inner.n1), right: eye(1 << inner.n2) }],
        }
    }

    pub fn validate(&self, inner: &ClassicalNmc) -> Result<()> {
        let total: f64 = self.branches.iter().map(|b| b.weight).sum();
        if (total - 1.0).abs() > 1e-9 || self.branches.iter().any(|b| b.weight < 0.0) {
            return Err(LabError::BadChannel { expected: "a transcript law", deviation: (total - 1.0).abs() });
        }
        for b in &self.branches {
            if !stochastic_ok(&b.left, 1 << inner.n1) || !stochastic_ok(&b.right, 1 << inner.n2) {
                return Err(LabError::BadChannel { expected: "stochastic share maps", deviation: f64::NAN });
            }
        }
        Ok(())
    }

    /// The transcript law; by construction it ignores the share values.
    pub fn transcript_law(&self, _x: u64, _y: u64) -> Vec<f64> {
        self.branches.iter().map(|b| b.weight).collect()
    }

    /// `law[m][o]`: probability the code decodes to outcome `o` from message `m`.
    pub fn induced_law(&self, inner: &ClassicalNmc) -> Vec<Vec<f64>> {
        let outs = inner.outcomes();
        (0..inner.messages())
            .map(|m| {
                let cws = inner.codewords(m);
                let mut row = vec![0.0; outs];
                for b in &self.branches {
                    for &(x, y) in cws {
                        for (x2, &px) in b.left[x as usize].iter().enumerate() {
                            if px == 0.0 {
                                continue;
                            }
                            for (y2, &py) in b.right[y as usize].iter().enumerate() {
                                let o = inner.decode(x2 as u64, y2 as u64).map_or(inner.reject_index(), |v| v as usize);
                                row[o] += b.weight * px * py / cws.len() as f64;
                            }
                        }
                    }
                }
                row
            })
            .collect()
    }

    /// Distance of the induced message channel to the nearest
    /// identity-or-replacement mixture.
    pub fn nm_residual(&self, inner: &ClassicalNmc) -> Result<f64> {
        self.validate(inner)?;
        nm_fit_lp(&self.induced_law(inner), inner.outcomes(), 1)
    }
}

fn random_stochastic<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let kind = rng.gen_range(0..5);
    let c = rng.gen_range(0..n);
    let mask = rng.gen_range(0..n);
    (0..n)
        .map(|i| {
            let mut row = vec![0.0; n];
            match kind {
                0 => row[i] = 1.0,
                1 => row[c] = 1.0,
                2 => row[i ^ mask] = 1.0,
                3 => row[rng.gen_range(0..n)] = 1.0,
                _ => {
                    let w: Vec<f64> = (0..n).map(|_| -rng.gen::<f64>().ln()).collect();
                    let s: f64 = w.iter().sum();
                    row.iter_mut().zip(&w).for_each(|(r, x)| *r = x / s);
                }
            }
            row
        })
        .collect()
}

/// A one-round strategy: one party measures, announcing one of up to four
/// outcomes, and every outcome selects independent left and right maps.
pub fn sample_mock_locc4<R: Rng + ?Sized>(inner: &ClassicalNmc, rng: &mut R) -> MockLocc4 {
    let outcomes = rng.gen_range(1..=4);
    let w: Vec<f64> = (0..outcomes).map(|_| -rng.gen::<f64>().ln()).collect();
    let s: f64 = w.iter().sum();
    let actor = rng.gen_range(0..4);
    MockLocc4 {
        label: format!("1r/actor{actor}/{outcomes}"),
        branches: w
            .iter()
            .map(|&wi| MockBranch {
                weight: wi / s,
                left: random_stochastic(1 << inner.n1, rng),
                right: random_stochastic(1 << inner.n2, rng),
            })
            .collect(),
    }
}
