use serde_json::json;

use super::scheme::{CodingScheme, SchemeDescriptor, OUTPUT, REFERENCE_SHARE};
use crate::error::{LabError, Result};
use crate::qstate::linalg::*;
use crate::qstate::{Channel, ChannelKind, CqState, Register, RegisterLayout};

const PADDED: &str = "Mpad";

/// Shrinks the message of `inner` by `lambda` qubits and fills them with a
/// maximally mixed pad before encoding; the pad is discarded after decoding.
pub struct PadCompiler {
    pub inner: Box<dyn CodingScheme>,
    pub lambda: usize,
}

impl PadCompiler {
    pub fn new(inner: Box<dyn CodingScheme>, lambda: usize) -> Result<Self> {
        let d = inner.message_dim();
        let pad = 1usize << lambda;
        if d % pad != 0 || d / pad < 2 {
            return Err(LabError::InvalidParameter(format!("cannot pad {lambda} qubits into a {d}-dimensional message")));
        }
        Ok(PadCompiler { inner, lambda })
    }

    fn pad_dim(&self) -> usize {
        1 << self.lambda
    }

    /// Single-share encryption bound `4 sqrt(eps + 2^(1-lambda))`.
    pub fn encryption_bound(&self) -> Option<f64> {
        self.inner.descriptor().bound.map(|e| 4.0 * (e + 2f64.powi(1 - self.lambda as i32)).sqrt())
    }
}

impl CodingScheme for PadCompiler {
    fn descriptor(&self) -> SchemeDescriptor {
        let inner = self.inner.descriptor();
        SchemeDescriptor {
            name: format!("pad({})", inner.name),
            params: json!({ "lambda": self.lambda, "inner": inner.params }),
            bound_formula: format!("{} ; single-share: 4*sqrt(eps + 2^(1-lambda))", inner.bound_formula),
            bound: inner.bound,
            shares: inner.shares,
            notes: inner.notes,
        }
    }

    fn message_dim(&self) -> usize {
        self.inner.message_dim() / self.pad_dim()
    }

    fn code_layout(&self) -> RegisterLayout {
        self.inner.code_layout()
    }

    fn encode(&self, state: &CqState, msg: &str) -> Result<CqState> {
        if self.lambda == 0 {
            return self.inner.encode(state, msg);
        }
        let (dm, dp) = (self.message_dim(), self.pad_dim());
        // |i> -> |i> (x) I/dp as the Kraus family { |i>|j> <i| / sqrt dp }.
        let kraus: Vec<Mat> = (0..dp)
            .map(|j| Mat::from_fn(dm * dp, dm, |row, col| if row == col * dp + j { r(1.0 / (dp as f64).sqrt()) } else { r(0.0) }))
            .collect();
        let ch = Channel::new(kraus, vec![dm], vec![dm * dp], ChannelKind::Cptp)?;
        let s = state.apply_channel_replace(&ch, &[msg], vec![Register::qudit(PADDED, dm * dp, REFERENCE_SHARE)])?;
        self.inner.encode(&s, PADDED)
    }

    fn decode(&self, state: &CqState) -> Result<CqState> {
        let s = self.inner.decode(state)?;
        if self.lambda == 0 {
            return Ok(s);
        }
        let (dm, dp) = (self.message_dim(), self.pad_dim());
        let din = self.inner.message_dim() + 1;
        // Keep the message part, trace the pad; the inner abort maps to ours.
        let mut kraus = vec![];
        for j in 0..dp {
            kraus.push(Mat::from_fn(dm + 1, din, |row, col| {
                if row < dm && col == row * dp + j {
                    r(1.0)
                } else {
                    r(0.0)
                }
            }));
        }
        kraus.push(Mat::from_fn(dm + 1, din, |row, col| if row == dm && col == din - 1 { r(1.0) } else { r(0.0) }));
        let ch = Channel::new(kraus, vec![din], vec![dm + 1], ChannelKind::Cptp)?;
        s.apply_channel_replace(&ch, &[OUTPUT], vec![super::scheme::output_register(dm)])
    }
}
