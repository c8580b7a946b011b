use std::collections::BTreeMap;

use serde_json::json;

use super::scheme::{classical_controlled_decode, output_register, CodingScheme, SchemeDescriptor};
use crate::error::{LabError, Result};
use crate::qstate::linalg::*;
use crate::qstate::{Channel, ChannelKind, CqState, Register, RegisterLayout};

/// A perfectly correct two-share code that leaks on purpose.
///
/// With probability `q` the message qubit sits in the clear on the left
/// share and the right share holds `|0>`; otherwise the left share holds
/// junk and the message moves to the right share. A classical flag on the
/// right share records which case occurred.
#[derive(Clone, Debug)]
pub struct LeakyTwoSplit {
    pub q: f64,
}

impl LeakyTwoSplit {
    pub fn new(q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(LabError::InvalidParameter(format!("leak probability {q} outside [0, 1]")));
        }
        Ok(LeakyTwoSplit { q })
    }

    /// Bias of the left-share test `|0><0|` between the encodings of `|0>`
    /// and `|1>`.
    pub fn planted_bias(&self) -> f64 {
        self.q
    }
}

fn swap_in(q_slot: usize) -> Mat {
    // M -> (l, r) with the message placed on slot `q_slot`.
    let mut k = zeros(4, 2);
    for m in 0..2 {
        let row = if q_slot == 0 { m * 2 } else { m };
        k[(row, m)] = ONE;
    }
    k
}

impl CodingScheme for LeakyTwoSplit {
    fn descriptor(&self) -> SchemeDescriptor {
        SchemeDescriptor {
            name: "leaky_two_split".into(),
            params: json!({ "q": self.q }),
            bound_formula: "none (leaks with bias q)".into(),
            bound: None,
            shares: 2,
            notes: vec![],
        }
    }

    fn message_dim(&self) -> usize {
        2
    }

    fn code_layout(&self) -> RegisterLayout {
        RegisterLayout::new(vec![Register::qubits("l", 1, 0), Register::qubits("r", 1, 1), Register::bits("f", 1, 1)])
            .expect("leaky layout")
    }

    fn encode(&self, state: &CqState, msg: &str) -> Result<CqState> {
        let clear = Channel::from_kraus_unchecked(vec![swap_in(0)], vec![2], vec![2, 2], ChannelKind::Cptp);
        // Junk on l: the maximally mixed state, via two Kraus operators.
        let hidden = Channel::from_kraus_unchecked(
            (0..2)
                .map(|j| {
                    let mut k = zeros(4, 2);
                    for m in 0..2 {
                        k[(j * 2 + m, m)] = r(0.5f64.sqrt());
                    }
                    k
                })
                .collect(),
            vec![2],
            vec![2, 2],
            ChannelKind::Cptp,
        );
        let q_regs = [Register::qubits("l", 1, 0), Register::qubits("r", 1, 1)];
        let layout = self.code_layout();
        let mut acc: Option<CqState> = None;
        for (flag, w, ch) in [(0u64, self.q, &clear), (1, 1.0 - self.q, &hidden)] {
            if w == 0.0 {
                continue;
            }
            let s = state.apply_channel_replace(ch, &[msg], q_regs.to_vec())?;
            let mut b = BTreeMap::new();
            b.insert(vec![flag], identity(1));
            let flag_state = CqState::new_unchecked(RegisterLayout::new(vec![Register::bits("f", 1, 1)])?, b)?;
            let s = s.tensor(&flag_state)?.scaled(w);
            acc = Some(match acc {
                None => s,
                Some(a) => a.add(&s)?,
            });
        }
        let s = acc.expect("at least one branch has weight");
        let mut order: Vec<String> = s.ids().into_iter().filter(|id| !layout.contains(id)).collect();
        order.extend(layout.ids());
        s.reorder(&order.iter().map(String::as_str).collect::<Vec<_>>())
    }

    fn decode(&self, state: &CqState) -> Result<CqState> {
        classical_controlled_decode(state, &["f"], &["l", "r"], output_register(2), |v| {
            let keep = v[0] as usize;
            // Output the kept slot, trace the other.
            let mut kraus = vec![];
            for j in 0..2 {
                let mut k = zeros(3, 4);
                for m in 0..2 {
                    let col = if keep == 0 { m * 2 + j } else { j * 2 + m };
                    k[(m, col)] = ONE;
                }
                kraus.push(k);
            }
            Ok(Channel::from_kraus_unchecked(kraus, vec![2, 2], vec![3], ChannelKind::Cptp))
        })
    }
}
