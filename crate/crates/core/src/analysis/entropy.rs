use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::qcodes::scheme::encode_message;
use crate::qcodes::CodingScheme;
use crate::qstate::linalg::*;
use crate::qstate::CqState;

/// Entropies of a uniformly random classical message `X` against its
/// encoding `Q` and against the first share `Q1`, in bits.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EntropyReport {
    pub message_bits: f64,
    pub code_qubits: f64,
    pub first_share_qubits: f64,
    /// `S(X|Q)`; zero exactly when `X` is recoverable from `Q`.
    pub conditional: f64,
    /// `I(X : Q1)`.
    pub mutual_first: f64,
    /// `k - (1 - alpha) n` with `alpha = |Q1| / n`.
    pub separable_floor: f64,
    pub perfectly_correct: bool,
}

/// Entropy of a classical-quantum state, counting the classical registers.
pub fn cq_entropy(s: &CqState) -> f64 {
    let mut ev = vec![];
    for m in s.branches().values() {
        ev.extend(eigvalsh(m));
    }
    shannon_bits(&ev)
}

/// Holevo quantity `S(sum p rho) - sum p S(rho)` of a uniform ensemble.
pub fn holevo(states: &[CqState]) -> Result<f64> {
    let w = 1.0 / states.len() as f64;
    let mut avg = states[0].scaled(w);
    for s in &states[1..] {
        avg = avg.add(&s.scaled(w))?;
    }
    let inner: f64 = states.iter().map(cq_entropy).sum::<f64>() * w;
    Ok(cq_entropy(&avg) - inner)
}

fn log_size(s: &CqState, ids: &[String]) -> f64 {
    ids.iter().map(|id| (s.layout().get(id).expect("known id").dim as f64).log2()).sum()
}

/// Builds `rho_{XQ}` for basis messages and evaluates the conditional
/// entropy and the first-share mutual information.
pub fn entropy_suite(code: &dyn CodingScheme, first_share: usize, tol: f64) -> Result<EntropyReport> {
    let d = code.message_dim();
    let encoded: Vec<CqState> = (0..d).map(|m| encode_message(code, &projector(&basis_ket(d, m)))).collect::<Result<_>>()?;
    let k = (d as f64).log2();
    let chi = holevo(&encoded)?;
    let layout = code.code_layout();
    let first = layout.share_ids(first_share);
    let keep: Vec<&str> = first.iter().map(String::as_str).collect();
    let marg: Vec<CqState> = encoded.iter().map(|e| e.tensor_and_trace(&keep)).collect::<Result<_>>()?;
    let mutual_first = holevo(&marg)?;
    let n = log_size(&encoded[0], &layout.ids());
    let n1 = log_size(&encoded[0], &first);
    let conditional = k - chi;
    Ok(EntropyReport {
        message_bits: k,
        code_qubits: n,
        first_share_qubits: n1,
        conditional,
        mutual_first,
        separable_floor: k - (n - n1),
        perfectly_correct: conditional.abs() <= tol,
    })
}
