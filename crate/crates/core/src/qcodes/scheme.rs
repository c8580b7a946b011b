use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::adversary::Adversary;
use crate::error::{LabError, Result};
use crate::qstate::linalg::*;
use crate::qstate::{Channel, CqState, Register, RegisterLayout};

/// Register id of the message an encoder consumes.
pub const MESSAGE: &str = "M";
/// Register id of the decoder output: the message space plus one abort level.
pub const OUTPUT: &str = "Mp";
/// Reference system purifying the message.
pub const REFERENCE: &str = "Mref";
/// Share index used for registers no tampering party holds.
pub const REFERENCE_SHARE: usize = 1000;

/// Provenance record for a scheme: its name, construction knobs and the
/// error bound it is expected to meet.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SchemeDescriptor {
    pub name: String,
    pub params: serde_json::Value,
    pub bound_formula: String,
    pub bound: Option<f64>,
    pub shares: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// An encode/decode pair over a share-partitioned register layout.
///
/// `encode` replaces the quantum register `msg` (dimension `message_dim`)
/// by the registers of `code_layout`; `decode` replaces those registers by
/// [`OUTPUT`], of dimension `message_dim + 1`, whose last level is the abort
/// symbol. Registers not belonging to the code pass through untouched.
pub trait CodingScheme: Send + Sync {
    fn descriptor(&self) -> SchemeDescriptor;
    fn message_dim(&self) -> usize;
    fn code_layout(&self) -> RegisterLayout;
    fn encode(&self, state: &CqState, msg: &str) -> Result<CqState>;
    fn decode(&self, state: &CqState) -> Result<CqState>;

    fn abort_index(&self) -> usize {
        self.message_dim()
    }
}

pub fn output_register(message_dim: usize) -> Register {
    Register::qudit(OUTPUT, message_dim + 1, REFERENCE_SHARE)
}

/// `|Phi><Phi|` on `[M, Mref]`.
pub fn message_with_reference(message_dim: usize) -> Result<CqState> {
    let layout = RegisterLayout::new(vec![
        Register::qudit(MESSAGE, message_dim, REFERENCE_SHARE),
        Register::qudit(REFERENCE, message_dim, REFERENCE_SHARE + 1),
    ])?;
    CqState::pure(layout, &max_entangled(message_dim))
}

/// A message state on `M` alone.
pub fn message_state(rho: &Mat) -> Result<CqState> {
    let layout = RegisterLayout::new(vec![Register::qudit(MESSAGE, rho.nrows(), REFERENCE_SHARE)])?;
    CqState::quantum(layout, rho.clone())
}

pub fn encode_message(code: &dyn CodingScheme, rho: &Mat) -> Result<CqState> {
    code.encode(&message_state(rho)?, MESSAGE)
}

/// `Dec(Lambda(Enc(rho)))` as a matrix on the output register.
pub fn tampered_output(code: &dyn CodingScheme, adv: Option<&Adversary>, rho: &Mat) -> Result<Mat> {
    let mut s = encode_message(code, rho)?;
    if let Some(a) = adv {
        s = a.apply(&s)?;
    }
    let out = code.decode(&s)?;
    Ok(out.tensor_and_trace(&[OUTPUT])?.quantum_part())
}

/// Effective Choi state on `[Mp, Mref]` of `Dec o Lambda o Enc`.
pub fn effective_choi(code: &dyn CodingScheme, adv: Option<&Adversary>) -> Result<Mat> {
    let phi = message_with_reference(code.message_dim())?;
    let mut s = code.encode(&phi, MESSAGE)?;
    if let Some(a) = adv {
        s = a.apply(&s)?;
    }
    let out = code.decode(&s)?;
    Ok(out.tensor_and_trace(&[OUTPUT, REFERENCE])?.reorder(&[OUTPUT, REFERENCE])?.quantum_part())
}

/// A deterministic classical state holding `values` on `regs`.
pub fn classical_point(regs: Vec<Register>, values: Vec<u64>, cap: usize) -> Result<CqState> {
    let layout = RegisterLayout::with_cap(regs, cap)?;
    let mut b = BTreeMap::new();
    b.insert(values, identity(1));
    CqState::new_unchecked(layout, b)
}

/// Encoder as a mixture over classical outputs: branch `(values, w, ch)`
/// applies `ch` to `msg` (producing `q_regs`) and writes `values` into
/// `c_regs`, with probability `w`.
pub fn mixture_encode(
    state: &CqState,
    msg: &str,
    branches: &[(Vec<u64>, f64, Channel)],
    q_regs: &[Register],
    c_regs: &[Register],
) -> Result<CqState> {
    let mut acc: Option<CqState> = None;
    for (vals, w, ch) in branches {
        let s = state.apply_channel_replace(ch, &[msg], q_regs.to_vec())?;
        let point = classical_point(c_regs.to_vec(), vals.clone(), s.layout().cap())?;
        let s = s.tensor(&point)?.scaled(*w);
        acc = Some(match acc {
            None => s,
            Some(a) => a.add(&s)?,
        });
    }
    acc.ok_or_else(|| LabError::InvalidParameter("empty encoder mixture".into()))
}

/// Decoder that reads the classical code registers `c_ids` and applies the
/// channel `dec(values)` from the quantum code registers `q_ids` to `out`.
/// The code registers are consumed; `out` is appended to the layout.
pub fn classical_controlled_decode(
    state: &CqState,
    c_ids: &[&str],
    q_ids: &[&str],
    out: Register,
    dec: impl Fn(&[u64]) -> Result<Channel>,
) -> Result<CqState> {
    let layout = state.layout();
    let cpos: Vec<usize> = c_ids.iter().map(|id| layout.classical_index(id)).collect::<Result<_>>()?;
    let qdims = layout.quantum_dims();
    let targets: Vec<usize> = q_ids.iter().map(|id| layout.quantum_index(id)).collect::<Result<_>>()?;
    let rest: Vec<usize> = (0..qdims.len()).filter(|k| !targets.contains(k)).collect();
    let keep_c: Vec<usize> = (0..layout.classical().count()).filter(|k| !cpos.contains(k)).collect();
    let mut regs: Vec<Register> = layout
        .registers()
        .iter()
        .filter(|r| !c_ids.contains(&r.id.as_str()) && !q_ids.contains(&r.id.as_str()))
        .cloned()
        .collect();
    regs.push(out.clone());
    let new_layout = RegisterLayout::with_cap(regs, layout.cap())?;
    let mut cache: HashMap<Vec<u64>, Channel> = HashMap::new();
    let mut branches: BTreeMap<Vec<u64>, Mat> = BTreeMap::new();
    for (k, m) in state.branches() {
        let cv: Vec<u64> = cpos.iter().map(|&i| k[i]).collect();
        if !cache.contains_key(&cv) {
            cache.insert(cv.clone(), dec(&cv)?);
        }
        let ch = &cache[&cv];
        if ch.dout() != out.dim {
            return Err(LabError::DimensionMismatch("decoder output dimension".into()));
        }
        let o = if targets.is_empty() {
            // Nothing quantum to read: the output is prepared from scratch.
            let mut moved = zeros(ch.dout() * m.nrows(), ch.dout() * m.nrows());
            for kr in &ch.kraus {
                let big = kr.kronecker(&identity(m.nrows()));
                moved += &big * m * big.adjoint();
            }
            moved
        } else {
            ch.apply_on(m, &qdims, &targets).0
        };
        let mut nd = vec![ch.dout()];
        nd.extend(rest.iter().map(|&k| qdims[k]));
        // Output factor first; move it to the end.
        let mut perm: Vec<usize> = (1..=rest.len()).collect();
        perm.push(0);
        let o = permute_factors(&o, &nd, &perm);
        let nk: Vec<u64> = keep_c.iter().map(|&i| k[i]).collect();
        match branches.get_mut(&nk) {
            Some(acc) => *acc += o,
            None => {
                branches.insert(nk, o);
            }
        }
    }
    CqState::new_unchecked(new_layout, branches)
}
