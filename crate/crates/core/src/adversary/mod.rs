//! Tampering adversaries in the split-state models: local operations,
//! local operations with bounded pre-shared ancillas, unbounded ancillas
//! and classically coordinated local operations. Also the named attacks
//! and the random samplers used by the certification suites.

pub mod attacks;
pub mod catalog;
pub mod local;
pub mod locc;
pub mod sampler;
pub mod serial;

use serde::{Deserialize, Serialize};

pub use attacks::{lambda1_attack, lambda2_attack, substitution_attack, swap_attack};
pub use catalog::{measurement_net, tampering_catalog, NetBasis};
pub use local::{LocalMap, ShareShape};
pub use locc::{LoccNode, DEFAULT_ROUND_CAP};
pub use sampler::{random_function, sample_bounded, sample_lo, SamplerConfig};
pub use serial::AdversaryDesc;

use crate::error::{LabError, Result};
use crate::qstate::linalg::*;
use crate::qstate::{CqState, RegisterLayout};

/// Tolerance for the trace contract of composite adversaries.
pub const ADVERSARY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Model {
    /// Tensor product of local channels, no shared resources.
    Lo,
    /// Local channels plus a pre-shared ancilla with per-share qubit budgets.
    LoBounded { budgets: Vec<usize> },
    /// Local channels plus an arbitrary pre-shared ancilla.
    LoStar,
    /// Classically coordinated local operations.
    Locc { rounds: usize },
}

impl Model {
    pub fn tag(&self) -> String {
        match self {
            Model::Lo => "LO".into(),
            Model::LoBounded { budgets } => format!("LO_bounded{budgets:?}"),
            Model::LoStar => "LO_star".into(),
            Model::Locc { rounds } => format!("LOCC(rounds={rounds})"),
        }
    }
}

/// One transcript of a tampering strategy: a local map per share.
#[derive(Clone, Debug)]
pub struct Transcript {
    pub label: String,
    pub maps: Vec<LocalMap>,
}

/// A validated tampering channel `sum_c (x)_i E_i^c` acting on the shares
/// `shares` of a code layout (plus an optional pre-shared ancilla).
#[derive(Clone, Debug)]
pub struct Adversary {
    pub model: Model,
    pub shares: Vec<usize>,
    pub ancilla: Option<CqState>,
    /// Keep the ancilla registers in the output (augmented experiments).
    pub retain_ancilla: bool,
    pub transcripts: Vec<Transcript>,
    pub tree: Option<LoccNode>,
}

/// Shapes of every share of `layout`, in share order.
pub fn share_shapes(layout: &RegisterLayout) -> Vec<(usize, ShareShape)> {
    layout.shares().into_iter().map(|s| (s, ShareShape::of(layout, s))).collect()
}

fn combined_layout(code: &RegisterLayout, ancilla: Option<&CqState>) -> Result<RegisterLayout> {
    match ancilla {
        None => Ok(code.clone()),
        Some(a) => {
            let cap = code.cap().max(code.quantum_dim() * a.layout().quantum_dim());
            RegisterLayout::with_cap(code.registers().to_vec(), cap)?.concat(a.layout())
        }
    }
}

fn check_maps(layout: &RegisterLayout, shares: &[usize], maps: &[LocalMap], cptp: bool) -> Result<()> {
    if maps.len() != shares.len() {
        return Err(LabError::DimensionMismatch(format!("{} local maps for {} shares", maps.len(), shares.len())));
    }
    for (&s, m) in shares.iter().zip(maps) {
        let shape = ShareShape::of(layout, s);
        m.check_against(&shape)?;
        if cptp {
            m.validate_tp(&shape, 1e-9)?;
        }
    }
    Ok(())
}

impl Adversary {
    /// Local operations: one trace-preserving map per share of `layout`, in
    /// share order.
    pub fn build_lo(layout: &RegisterLayout, maps: Vec<LocalMap>) -> Result<Self> {
        let shares = layout.shares();
        check_maps(layout, &shares, &maps, true)?;
        Ok(Adversary {
            model: Model::Lo,
            shares,
            ancilla: None,
            retain_ancilla: false,
            transcripts: vec![Transcript { label: String::new(), maps }],
            tree: None,
        })
    }

    /// Local operations with a pre-shared ancilla. Each ancilla register
    /// carries the share index of the party holding it; its quantum qubits
    /// count against that share's budget.
    pub fn build_lo_bounded(
        layout: &RegisterLayout,
        maps: Vec<LocalMap>,
        ancilla: Option<CqState>,
        budgets: &[usize],
    ) -> Result<Self> {
        let shares = layout.shares();
        if budgets.len() != shares.len() {
            return Err(LabError::InvalidParameter(format!("{} budgets for {} shares", budgets.len(), shares.len())));
        }
        if let Some(a) = &ancilla {
            for r in a.layout().registers() {
                let Some(pos) = shares.iter().position(|&s| s == r.share) else {
                    return Err(LabError::InvalidParameter(format!("ancilla register `{}` on unknown share {}", r.id, r.share)));
                };
                let used: usize = a.layout().quantum().filter(|q| q.share == r.share).map(|q| q.size).sum();
                if used > budgets[pos] {
                    return Err(LabError::BudgetExceeded { share: r.share, used, budget: budgets[pos] });
                }
            }
        }
        let mut adv = Self::build_lo_star(layout, maps, ancilla)?;
        adv.model = Model::LoBounded { budgets: budgets.to_vec() };
        Ok(adv)
    }

    /// Local operations with an arbitrary pre-shared ancilla.
    pub fn build_lo_star(layout: &RegisterLayout, maps: Vec<LocalMap>, ancilla: Option<CqState>) -> Result<Self> {
        let shares = layout.shares();
        if let Some(a) = &ancilla {
            a.validate(1e-9)?;
            if let Some(r) = a.layout().registers().iter().find(|r| !shares.contains(&r.share)) {
                return Err(LabError::InvalidParameter(format!("ancilla register `{}` on unknown share {}", r.id, r.share)));
            }
        }
        let full = combined_layout(layout, ancilla.as_ref())?;
        check_maps(&full, &shares, &maps, true)?;
        Ok(Adversary {
            model: Model::LoStar,
            shares,
            ancilla,
            retain_ancilla: false,
            transcripts: vec![Transcript { label: String::new(), maps }],
            tree: None,
        })
    }

    /// Flattens a round tree into transcripts and checks that the sum over
    /// transcripts is trace preserving.
    pub fn build_locc(layout: &RegisterLayout, tree: LoccNode, round_cap: usize) -> Result<Self> {
        let shares = layout.shares();
        let shapes: Vec<ShareShape> = shares.iter().map(|&s| ShareShape::of(layout, s)).collect();
        let (transcripts, rounds) = locc::flatten(&tree, &shapes, round_cap)?;
        for t in &transcripts {
            check_maps(layout, &shares, &t.maps, false)?;
        }
        locc::validate_sum(&transcripts, &shapes, ADVERSARY_TOL)?;
        Ok(Adversary {
            model: Model::Locc { rounds },
            shares,
            ancilla: None,
            retain_ancilla: false,
            transcripts,
            tree: Some(tree),
        })
    }

    pub fn identity(layout: &RegisterLayout) -> Result<Self> {
        let maps = layout.shares().iter().map(|&s| LocalMap::identity(&ShareShape::of(layout, s))).collect();
        Self::build_lo(layout, maps)
    }

    pub fn retaining(mut self) -> Self {
        self.retain_ancilla = true;
        self
    }

    /// Per-transcript branch: the subnormalized state after transcript `c`.
    pub fn apply_transcript(&self, state: &CqState, c: usize) -> Result<CqState> {
        let mut s = match &self.ancilla {
            Some(a) => state.tensor(a)?,
            None => state.clone(),
        };
        for m in &self.transcripts[c].maps {
            s = m.apply(&s)?;
        }
        if self.ancilla.is_some() && !self.retain_ancilla {
            let ids = state.ids();
            let keep: Vec<&str> = ids.iter().map(String::as_str).collect();
            s = s.tensor_and_trace(&keep)?;
        }
        Ok(s)
    }

    /// Applies the adversary; registers outside its shares are untouched.
    pub fn apply(&self, state: &CqState) -> Result<CqState> {
        let mut acc: Option<CqState> = None;
        for c in 0..self.transcripts.len() {
            let s = self.apply_transcript(state, c)?;
            acc = Some(match acc {
                None => s,
                Some(a) => a.add(&s)?,
            });
        }
        let out = acc.ok_or_else(|| LabError::InvalidParameter("adversary without transcripts".into()))?;
        let (before, after) = (state.trace(), out.trace());
        if (before - after).abs() > ADVERSARY_TOL {
            return Err(LabError::BadTrace(after));
        }
        Ok(out)
    }

    /// Probability of each transcript on `state`.
    pub fn transcript_law(&self, state: &CqState) -> Result<Vec<f64>> {
        (0..self.transcripts.len()).map(|c| Ok(self.apply_transcript(state, c)?.trace())).collect()
    }

    /// Composite map on the whole code (quantum part, no ancilla), as a
    /// superoperator. Only for small layouts without classical registers.
    pub fn superop(&self, layout: &RegisterLayout) -> Result<Mat> {
        if layout.classical().next().is_some() || self.ancilla.is_some() {
            return Err(LabError::InvalidParameter("superoperator needs a purely quantum layout and no ancilla".into()));
        }
        let d = layout.quantum_dim();
        let dims = layout.quantum_dims();
        let mut total = zeros(d * d, d * d);
        for t in &self.transcripts {
            let mut s = identity(d * d);
            for m in &t.maps {
                let targets: Vec<usize> = m.quantum.iter().map(|id| layout.quantum_index(id)).collect::<Result<_>>()?;
                let ch = m.uniform_channel()?;
                let kraus: Vec<Mat> = ch.kraus.iter().map(|k| embed(k, &dims, &targets)).collect();
                s = superop(&kraus) * s;
            }
            total += s;
        }
        Ok(total)
    }
}
