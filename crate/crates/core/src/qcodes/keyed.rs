use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::scheme::{classical_controlled_decode, mixture_encode, output_register, CodingScheme, SchemeDescriptor, REFERENCE_SHARE};
use crate::error::{LabError, Result};
use crate::pauli_clifford::{clifford_group, random_clifford, PauliOp};
use crate::qstate::linalg::*;
use crate::qstate::{Channel, ChannelKind, CqState, Register, RegisterLayout};

/// Concrete key function for the explicit keyed codes: the pair `(x, y)`
/// selects `C_b P_a` on `n` qubits.
///
/// When both sources carry at least `2n` bits, the low `2n` bits xor to the
/// Pauli index `a` and the remaining bits xor to the Clifford index `b`. The
/// pair `(a, b)` is then uniform given either source alone, so the encrypted
/// register is exactly maximally mixed given one source. Otherwise `a` and
/// `b` are both pseudorandom in `(x, y)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KeyTable {
    pub n: usize,
    pub x_bits: u32,
    pub y_bits: u32,
    pub seed: u64,
}

impl KeyTable {
    pub fn new(n: usize, x_bits: u32, y_bits: u32, seed: u64) -> Result<Self> {
        if n == 0 || n > 4 || x_bits == 0 || y_bits == 0 || x_bits + y_bits > 12 {
            return Err(LabError::InvalidParameter(format!("key table n={n} x_bits={x_bits} y_bits={y_bits}")));
        }
        Ok(KeyTable { n, x_bits, y_bits, seed })
    }

    /// The xor-structured table: `2n` Pauli bits plus one Clifford bit per
    /// source while the twelve-bit budget allows it.
    pub fn pauli_xor(n: usize, seed: u64) -> Result<Self> {
        let bits = (2 * n as u32 + 1).min(6).max(2 * n as u32);
        Self::new(n, bits, bits, seed)
    }

    pub fn is_pauli_xor(&self) -> bool {
        self.x_bits == self.y_bits && self.x_bits as usize >= 2 * self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn unitary(&self, x: u64, y: u64) -> Result<Mat> {
        let (mut rng, a) = if self.is_pauli_xor() {
            let z = x ^ y;
            let b = z >> (2 * self.n);
            (ChaCha20Rng::seed_from_u64(self.seed ^ (b << 20) ^ 0x5eed), (z & ((1 << (2 * self.n)) - 1)) as usize)
        } else {
            let mut g = ChaCha20Rng::seed_from_u64(self.seed ^ (x << 32) ^ (y << 8) ^ 0x5eed);
            let a = g.gen_range(0..1usize << (2 * self.n));
            (g, a)
        };
        let c = if self.n <= 2 {
            let g = clifford_group(self.n)?;
            g[rng.gen_range(0..g.len())].unitary.clone()
        } else {
            random_clifford(self.n, &mut rng)?
        };
        Ok(c * PauliOp::from_index(self.n, a).matrix())
    }

    pub fn pairs(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        (0..1u64 << self.x_bits).flat_map(move |x| (0..1u64 << self.y_bits).map(move |y| (x, y)))
    }

    pub fn weight(&self) -> f64 {
        1.0 / (1u64 << (self.x_bits + self.y_bits)) as f64
    }
}

/// The `d_e^2` Bell vectors `(P (x) I)|Phi>` on `n + n` qubits, trivial one first.
pub fn bell_basis(n: usize) -> Vec<Vector> {
    let d = 1 << n;
    (0..d * d).map(|idx| kron(&PauliOp::from_index(n, idx).matrix(), &identity(d)) * max_entangled(d)).collect()
}

/// Decoder tail shared by the tamper-detecting codes: a Bell test between
/// two `n_e`-qubit halves, keeping the message on acceptance and writing the
/// abort level otherwise. `col(m, e, ehat)` gives the input index.
pub fn bell_test_channel(d_m: usize, n_e: usize, din: usize, col: impl Fn(usize, usize, usize) -> usize) -> Channel {
    let d_e = 1usize << n_e;
    let abort = d_m;
    let basis = bell_basis(n_e);
    let mut kraus = vec![];
    let mut acc = zeros(d_m + 1, din);
    for m in 0..d_m {
        for e in 0..d_e {
            acc[(m, col(m, e, e))] = r(1.0 / (d_e as f64).sqrt());
        }
    }
    kraus.push(acc);
    for beta in basis.iter().skip(1) {
        for m in 0..d_m {
            let mut k = zeros(d_m + 1, din);
            for e in 0..d_e {
                for h in 0..d_e {
                    k[(abort, col(m, e, h))] = beta[e * d_e + h].conj();
                }
            }
            kraus.push(k);
        }
    }
    Channel::from_kraus_unchecked(kraus, vec![din], vec![d_m + 1], ChannelKind::Cptp)
}

fn reorder_code_last(s: &CqState, layout: &RegisterLayout) -> Result<CqState> {
    let mut order: Vec<String> = s.ids().into_iter().filter(|id| !layout.contains(id)).collect();
    order.extend(layout.ids());
    s.reorder(&order.iter().map(String::as_str).collect::<Vec<_>>())
}

fn merge(state: &CqState, ids: &[&str], dims: Vec<usize>, into: &str) -> Result<CqState> {
    let d = dims.iter().product();
    let ch = Channel::from_kraus_unchecked(vec![identity(d)], dims, vec![d], ChannelKind::Cptp);
    state.apply_channel_replace(&ch, ids, vec![Register::qudit(into, d, REFERENCE_SHARE)])
}

fn with_epr(state: &CqState, lambda: usize, e: Register, ehat: Register) -> Result<CqState> {
    let l = RegisterLayout::new(vec![e, ehat])?;
    state.tensor(&CqState::quantum(l, epr_block(lambda))?)
}

/// Two-share quantum code keyed by a split classical pair: share 0 holds
/// `Y`, share 1 holds `X` and `Z = C_{(x,y)} M C_{(x,y)}^dag`.
#[derive(Clone, Debug)]
pub struct KeyedTwoSplit {
    pub key: KeyTable,
}

impl KeyedTwoSplit {
    pub fn new(key: KeyTable) -> Self {
        KeyedTwoSplit { key }
    }

    pub fn k(&self) -> usize {
        self.key.n
    }
}

impl CodingScheme for KeyedTwoSplit {
    fn descriptor(&self) -> SchemeDescriptor {
        let k = self.k() as i32;
        SchemeDescriptor {
            name: "keyed_two_split".into(),
            params: json!({ "k": self.k(), "x_bits": self.key.x_bits, "y_bits": self.key.y_bits, "seed": self.key.seed }),
            bound_formula: "eps_key + 2^(2-k) (average case)".into(),
            bound: Some(2f64.powi(2 - k)),
            shares: 2,
            notes: vec![],
        }
    }

    fn message_dim(&self) -> usize {
        self.key.dim()
    }

    fn code_layout(&self) -> RegisterLayout {
        RegisterLayout::new(vec![
            Register::bits("Y", self.key.y_bits as usize, 0),
            Register::bits("X", self.key.x_bits as usize, 1),
            Register::qubits("Z", self.k(), 1),
        ])
        .expect("two-split layout")
    }

    fn encode(&self, state: &CqState, msg: &str) -> Result<CqState> {
        let d = self.message_dim();
        let w = self.key.weight();
        let branches: Vec<(Vec<u64>, f64, Channel)> = self
            .key
            .pairs()
            .map(|(x, y)| Ok((vec![y, x], w, Channel::unitary(self.key.unitary(x, y)?, vec![d])?)))
            .collect::<Result<_>>()?;
        let l = self.code_layout();
        let s = mixture_encode(state, msg, &branches, &[l.get("Z")?.clone()], &[l.get("Y")?.clone(), l.get("X")?.clone()])?;
        reorder_code_last(&s, &l)
    }

    fn decode(&self, state: &CqState) -> Result<CqState> {
        let d = self.message_dim();
        classical_controlled_decode(state, &["X", "Y"], &["Z"], output_register(d), |v| {
            let u = self.key.unitary(v[0], v[1])?;
            let mut k = zeros(d + 1, d);
            k.view_mut((0, 0), (d, d)).copy_from(&u.adjoint());
            Ok(Channel::from_kraus_unchecked(vec![k], vec![d], vec![d + 1], ChannelKind::Cptp))
        })
    }
}

/// Adds an EPR trap to a non-malleable code: the inner code encodes the
/// message together with `E`, the partner half `Ehat` becomes a new share,
/// and the decoder aborts unless `(E', Ehat')` passes the Bell test.
pub struct TdcCompiler {
    pub inner: Box<dyn CodingScheme>,
    pub lambda: usize,
    /// Pre-shared qubits granted to the holder of `Ehat`, if bounded.
    pub storage: Option<usize>,
}

impl TdcCompiler {
    pub fn new(inner: Box<dyn CodingScheme>, lambda: usize, storage: Option<usize>) -> Result<Self> {
        let d_e = 1usize << lambda;
        let cap = inner.message_dim();
        if lambda == 0 || cap % d_e != 0 || cap / d_e < 2 {
            return Err(LabError::InvalidParameter(format!(
                "lambda = {lambda} leaves no message room in an inner code of dimension {cap}"
            )));
        }
        Ok(TdcCompiler { inner, lambda, storage })
    }

    fn d_e(&self) -> usize {
        1 << self.lambda
    }

    fn trap_share(&self) -> usize {
        self.inner.code_layout().shares().len()
    }

    pub fn bound(&self) -> f64 {
        let eps = self.inner.descriptor().bound.unwrap_or(0.0);
        let extra = self.storage.unwrap_or(0) as i32;
        eps + 2f64.powi(1 + extra - self.lambda as i32)
    }
}

impl CodingScheme for TdcCompiler {
    fn descriptor(&self) -> SchemeDescriptor {
        let inner = self.inner.descriptor();
        let formula = match self.storage {
            Some(_) => "eps_inner + 2^(1+a-lambda)",
            None => "eps_inner + 2^(1-lambda)",
        };
        SchemeDescriptor {
            name: "tdc_compiled".into(),
            params: json!({ "lambda": self.lambda, "storage": self.storage, "inner": inner.name, "inner_params": inner.params }),
            bound_formula: formula.into(),
            bound: Some(self.bound()),
            shares: inner.shares + 1,
            notes: vec![],
        }
    }

    fn message_dim(&self) -> usize {
        self.inner.message_dim() / self.d_e()
    }

    fn code_layout(&self) -> RegisterLayout {
        let mut regs = self.inner.code_layout().registers().to_vec();
        regs.push(Register::qubits("Ehat", self.lambda, self.trap_share()));
        RegisterLayout::new(regs).expect("compiled layout")
    }

    fn encode(&self, state: &CqState, msg: &str) -> Result<CqState> {
        let s = with_epr(
            state,
            self.lambda,
            Register::qubits("E", self.lambda, REFERENCE_SHARE),
            Register::qubits("Ehat", self.lambda, self.trap_share()),
        )?;
        let s = merge(&s, &[msg, "E"], vec![self.message_dim(), self.d_e()], "ME")?;
        let s = self.inner.encode(&s, "ME")?;
        reorder_code_last(&s, &self.code_layout())
    }

    fn decode(&self, state: &CqState) -> Result<CqState> {
        let s = self.inner.decode(state)?;
        let (d_m, d_e) = (self.message_dim(), self.d_e());
        let inner_abort = d_m * d_e;
        let din = (inner_abort + 1) * d_e;
        let test = bell_test_channel(d_m, self.lambda, din, |m, e, h| (m * d_e + e) * d_e + h);
        let mut kraus = test.kraus;
        for h in 0..d_e {
            let mut k = zeros(d_m + 1, din);
            k[(d_m, inner_abort * d_e + h)] = ONE;
            kraus.push(k);
        }
        let ch = Channel::from_kraus_unchecked(kraus, vec![inner_abort + 1, d_e], vec![d_m + 1], ChannelKind::Cptp);
        s.apply_channel_replace(&ch, &[super::scheme::OUTPUT, "Ehat"], vec![output_register(d_m)])
    }
}

/// Which half of the trap pair is encrypted next to the message.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Tdc3Wiring {
    /// `Z = C_R(E, M)`; share 1 holds `(Y, Ehat)`.
    #[default]
    Figure,
    /// `Z = C_R(Ehat, M)`; share 1 holds `(Y, E)`.
    Text,
}

/// Three-share tamper-detecting code: share 0 holds `X`, share 1 holds `Y`
/// and one trap half, share 2 holds the encryption of the other trap half
/// with the message under the key derived from `(x, y)`.
#[derive(Clone, Debug)]
pub struct Tdc3 {
    pub key: KeyTable,
    pub k: usize,
    pub lambda: usize,
    pub wiring: Tdc3Wiring,
    /// Pre-shared qubits granted to the holder of `Z`.
    pub storage: usize,
}

impl Tdc3 {
    pub fn new(key: KeyTable, k: usize, lambda: usize, wiring: Tdc3Wiring, storage: usize) -> Result<Self> {
        if k == 0 || lambda == 0 || key.n != k + lambda {
            return Err(LabError::InvalidParameter(format!("key acts on {} qubits, need k + lambda = {}", key.n, k + lambda)));
        }
        Ok(Tdc3 { key, k, lambda, wiring, storage })
    }

    fn names(&self) -> (&'static str, &'static str) {
        // (encrypted half, kept half)
        match self.wiring {
            Tdc3Wiring::Figure => ("E", "Ehat"),
            Tdc3Wiring::Text => ("Ehat", "E"),
        }
    }

    pub fn bound(&self) -> f64 {
        6.0 * 2f64.powi(self.storage as i32 - self.lambda as i32)
    }
}

impl CodingScheme for Tdc3 {
    fn descriptor(&self) -> SchemeDescriptor {
        SchemeDescriptor {
            name: "tdc3".into(),
            params: json!({ "k": self.k, "lambda": self.lambda, "storage": self.storage, "wiring": self.wiring,
                            "x_bits": self.key.x_bits, "y_bits": self.key.y_bits, "seed": self.key.seed }),
            bound_formula: "2 eps_key + 6 * 2^(e3-lambda)".into(),
            bound: Some(self.bound()),
            shares: 3,
            notes: vec![format!("wiring: {:?}", self.wiring)],
        }
    }

    fn message_dim(&self) -> usize {
        1 << self.k
    }

    fn code_layout(&self) -> RegisterLayout {
        let (_, kept) = self.names();
        RegisterLayout::new(vec![
            Register::bits("X", self.key.x_bits as usize, 0),
            Register::bits("Y", self.key.y_bits as usize, 1),
            Register::qubits(kept, self.lambda, 1),
            Register::qubits("Z", self.k + self.lambda, 2),
        ])
        .expect("tdc3 layout")
    }

    fn encode(&self, state: &CqState, msg: &str) -> Result<CqState> {
        let (enc, _) = self.names();
        let s = with_epr(state, self.lambda, Register::qubits("E", self.lambda, 1), Register::qubits("Ehat", self.lambda, 1))?;
        let d_e = 1usize << self.lambda;
        let d = d_e * self.message_dim();
        let s = merge(&s, &[enc, msg], vec![d_e, self.message_dim()], "EM")?;
        let w = self.key.weight();
        let branches: Vec<(Vec<u64>, f64, Channel)> = self
            .key
            .pairs()
            .map(|(x, y)| Ok((vec![x, y], w, Channel::unitary(self.key.unitary(x, y)?, vec![d])?)))
            .collect::<Result<_>>()?;
        let l = self.code_layout();
        let s = mixture_encode(&s, "EM", &branches, &[l.get("Z")?.clone()], &[l.get("X")?.clone(), l.get("Y")?.clone()])?;
        reorder_code_last(&s, &l)
    }

    fn decode(&self, state: &CqState) -> Result<CqState> {
        let (_, kept) = self.names();
        let d_m = self.message_dim();
        let d_e = 1usize << self.lambda;
        let d = d_e * d_m;
        let din = d * d_e;
        let test = bell_test_channel(d_m, self.lambda, din, |m, e, h| (e * d_m + m) * d_e + h);
        classical_controlled_decode(state, &["X", "Y"], &["Z", kept], output_register(d_m), |v| {
            let undo = kron(&self.key.unitary(v[0], v[1])?.adjoint(), &identity(d_e));
            let kraus = test.kraus.iter().map(|k| k * &undo).collect();
            Ok(Channel::from_kraus_unchecked(kraus, vec![d, d_e], vec![d_m + 1], ChannelKind::Cptp))
        })
    }
}
