use std::collections::BTreeMap;

use itertools::Itertools;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::gadget::{GadgetInstance, GadgetRegister};
use super::lrss::{LrssScheme, LrssShare};
use crate::error::{LabError, Result};

pub type Triangle = [usize; 3];

/// Which side of a triangle a party's register bundle belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Corner {
    A,
    B,
    C,
}

/// One bundle in a party's share: its corner of a triangle and the gadget
/// registers that corner holds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub triangle: Triangle,
    pub corner: Corner,
    pub registers: Vec<(usize, GadgetRegister)>,
}

/// What the gadget decoder of one triangle reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriangleVerdict {
    Reject,
    Accept([LrssShare; 3]),
}

/// Number of shares the tamper-detecting decoder asks for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderThreshold {
    TPlus2,
    TPlus3,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TdssMode {
    /// Dense simulation of every gadget.
    Full,
    /// Classical decoder logic fed with per-gadget verdicts.
    Component,
}

/// Why the bipartite decoder stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecodeOutcome {
    Message(u8),
    GadgetRejected,
    Inconsistent,
    RecRejected,
}

impl DecodeOutcome {
    pub fn message(&self) -> Option<u8> {
        match self {
            DecodeOutcome::Message(m) => Some(*m),
            _ => None,
        }
    }
}

/// Threshold sharing whose classical shares are spread over triangle
/// gadgets: every triple `a < b < c` of parties carries one gadget
/// encoding `(M_a, M_b, M_c)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TdssScheme {
    pub lrss: LrssScheme,
    pub lambda: usize,
    pub threshold: DecoderThreshold,
}

/// The share bundle of one sharing: classical shares plus the layout of
/// gadget registers per party.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TdssShares {
    pub classical: Vec<LrssShare>,
    pub slots: Vec<Vec<Slot>>,
}

/// Law of one gadget's verdict: abort probability and, for each of the
/// `2^3` patterns of which corners are recovered correctly (bit set means
/// altered), the probability of accepting with that pattern.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerdictLaw {
    pub reject: f64,
    pub patterns: [f64; 8],
}

/// Decoder outcome probabilities over verdict combinations.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ComponentLaw {
    pub correct: f64,
    pub abort: f64,
    pub wrong: f64,
}

impl VerdictLaw {
    /// Independent corners: `laws[i] = (p_correct, p_altered, p_abort)`.
    pub fn from_corners(laws: [(f64, f64, f64); 3]) -> Self {
        let mut patterns = [0.0; 8];
        for (pat, slot) in patterns.iter_mut().enumerate() {
            *slot = (0..3).map(|i| if pat >> i & 1 == 1 { laws[i].1 } else { laws[i].0 }).product();
        }
        let reject = 1.0 - patterns.iter().sum::<f64>();
        VerdictLaw { reject: reject.max(0.0), patterns }
    }
}

impl TdssScheme {
    pub fn new(lrss: LrssScheme, lambda: usize, threshold: DecoderThreshold) -> Result<Self> {
        if lrss.p < 3 {
            return Err(LabError::InvalidParameter("triangles need at least three parties".into()));
        }
        if lambda == 0 {
            return Err(LabError::InvalidParameter("gadget traps need lambda >= 1".into()));
        }
        Ok(TdssScheme { lrss, lambda, threshold })
    }

    pub fn p(&self) -> usize {
        self.lrss.p
    }

    pub fn t(&self) -> usize {
        self.lrss.t
    }

    pub fn decode_size(&self) -> usize {
        match self.threshold {
            DecoderThreshold::TPlus2 => self.t() + 2,
            DecoderThreshold::TPlus3 => self.t() + 3,
        }
    }

    pub fn triangles(&self) -> Vec<Triangle> {
        (0..self.p()).combinations(3).map(|v| [v[0], v[1], v[2]]).collect()
    }

    /// The gadget of one triangle as the engine sees it: one message bit
    /// per corner, standing for the corner's share.
    pub fn gadget(&self, tri: Triangle) -> Result<GadgetInstance> {
        GadgetInstance::new(tri, self.lambda, 1)
    }

    /// Qubits a dense simulation of every gadget would need.
    pub fn footprint_qubits(&self) -> usize {
        let k = self.lrss.message_bits() as usize;
        self.triangles().len() * (3 * k + 12 * self.lambda)
    }

    /// The bundles held by party `i`: corner A of triangles it leads, B of
    /// those it sits in the middle of, C of those it closes.
    pub fn party_slots(&self, i: usize) -> Vec<Slot> {
        let mut out = vec![];
        for tri in self.triangles() {
            if let Some(pos) = tri.iter().position(|&x| x == i) {
                let corner = [Corner::A, Corner::B, Corner::C][pos];
                out.push(Slot { triangle: tri, corner, registers: GadgetInstance::position_registers(pos) });
            }
        }
        out
    }

    pub fn share<R: Rng + ?Sized>(&self, m: u8, rng: &mut R) -> TdssShares {
        TdssShares { classical: self.lrss.share(m, rng), slots: (0..self.p()).map(|i| self.party_slots(i)).collect() }
    }

    /// Verdicts of untampered gadgets: every corner recovers its share.
    pub fn honest_verdicts(&self, shares: &TdssShares) -> BTreeMap<Triangle, TriangleVerdict> {
        self.triangles()
            .into_iter()
            .map(|t| (t, TriangleVerdict::Accept(t.map(|i| shares.classical[i].clone()))))
            .collect()
    }

    /// Decodes every triangle inside `t` and reconstructs from all of `t`.
    /// Meant for untampered shares; any set of at least `max(t, 3)`
    /// parties works.
    pub fn reconstruct(&self, t: &[usize], verdicts: &BTreeMap<Triangle, TriangleVerdict>) -> Result<DecodeOutcome> {
        let t = normalized(t, self.p())?;
        if t.len() < self.t().max(3) {
            return Err(LabError::InvalidParameter(format!("{} parties cannot reconstruct", t.len())));
        }
        let recovered = match collect_side(&t, verdicts)? {
            Ok(r) => r,
            Err(outcome) => return Ok(outcome),
        };
        let shares: Vec<(usize, LrssShare)> = t.iter().map(|&i| (i, recovered[&i].clone())).collect();
        Ok(match self.lrss.reconstruct(&shares)? {
            Some(m) => DecodeOutcome::Message(m),
            None => DecodeOutcome::RecRejected,
        })
    }

    /// The tamper-detecting decoder. `U` is the three smallest indices of
    /// `t`; gadgets are decoded only within `U` and within `t \ U`. The
    /// lowest index of each side is dropped before reconstruction, so every
    /// share used was recovered from a middle or last corner at least once.
    pub fn decode(&self, t: &[usize], verdicts: &BTreeMap<Triangle, TriangleVerdict>) -> Result<DecodeOutcome> {
        let t = normalized(t, self.p())?;
        if t.len() < self.decode_size() {
            return Err(LabError::InvalidParameter(format!("decoder needs {} shares, got {}", self.decode_size(), t.len())));
        }
        if t.len() < 6 {
            return Err(LabError::InvalidParameter("both sides of the partition need a triangle".into()));
        }
        let (u, rest) = t.split_at(3);
        let mut recovered = BTreeMap::new();
        for side in [u, rest] {
            match collect_side(side, verdicts)? {
                Ok(r) => recovered.extend(r),
                Err(outcome) => return Ok(outcome),
            }
        }
        let used: Vec<(usize, LrssShare)> =
            u[1..].iter().chain(&rest[1..]).map(|&i| (i, recovered[&i].clone())).collect();
        Ok(match self.lrss.reconstruct(&used)? {
            Some(m) => DecodeOutcome::Message(m),
            None => DecodeOutcome::RecRejected,
        })
    }

    pub fn share_rec(
        &self,
        mode: TdssMode,
        t: &[usize],
        verdicts: &BTreeMap<Triangle, TriangleVerdict>,
    ) -> Result<DecodeOutcome> {
        match mode {
            TdssMode::Full => Err(LabError::DimensionCap { dim: 1usize << self.footprint_qubits().min(60), cap: 1024 }),
            TdssMode::Component => self.decode(t, verdicts),
        }
    }

    /// Outcome law of the decoder when each triangle's verdict is drawn
    /// independently from `laws`, by enumerating every combination.
    /// Altered shares are modelled by flipping the lowest source bit.
    pub fn component_law(
        &self,
        m: u8,
        shares: &TdssShares,
        t: &[usize],
        laws: &BTreeMap<Triangle, VerdictLaw>,
    ) -> Result<ComponentLaw> {
        let t = normalized(t, self.p())?;
        let (u, rest) = t.split_at(3.min(t.len()));
        let tris: Vec<Triangle> = self
            .triangles()
            .into_iter()
            .filter(|tri| tri.iter().all(|x| u.contains(x)) || tri.iter().all(|x| rest.contains(x)))
            .collect();
        if tris.len() > 6 {
            return Err(LabError::EnumerationTooLarge(format!("{} triangles", tris.len())));
        }
        let mut out = ComponentLaw::default();
        for choice in tris.iter().map(|_| 0..9usize).multi_cartesian_product() {
            let mut prob = 1.0;
            let mut verdicts = BTreeMap::new();
            for (tri, &c) in tris.iter().zip(&choice) {
                let law = laws.get(tri).ok_or_else(|| LabError::InvalidParameter(format!("no verdict law for {tri:?}")))?;
                let (p, v) = if c == 8 {
                    (law.reject, TriangleVerdict::Reject)
                } else {
                    (law.patterns[c], TriangleVerdict::Accept(altered(tri, c, &shares.classical)))
                };
                prob *= p;
                verdicts.insert(*tri, v);
            }
            if prob == 0.0 {
                continue;
            }
            match self.decode(&t, &verdicts)? {
                DecodeOutcome::Message(x) if x == m => out.correct += prob,
                DecodeOutcome::Message(_) => out.wrong += prob,
                _ => out.abort += prob,
            }
        }
        Ok(out)
    }
}

/// The shares of `tri` with the corners flagged in `pattern` altered.
pub fn altered(tri: &Triangle, pattern: usize, classical: &[LrssShare]) -> [LrssShare; 3] {
    let mut out = tri.map(|i| classical[i].clone());
    for (pos, s) in out.iter_mut().enumerate() {
        if pattern >> pos & 1 == 1 {
            *s = match s {
                LrssShare::Ok { w, seeds } => LrssShare::Ok { w: *w ^ 1, seeds: seeds.clone() },
                LrssShare::Rejected { m } => LrssShare::Rejected { m: *m ^ 1 },
            };
        }
    }
    out
}

fn normalized(t: &[usize], p: usize) -> Result<Vec<usize>> {
    let mut v = t.to_vec();
    v.sort_unstable();
    v.dedup();
    if v.len() != t.len() || v.iter().any(|&i| i >= p) {
        return Err(LabError::InvalidParameter(format!("{t:?} is not a set of parties below {p}")));
    }
    Ok(v)
}

/// Decodes the triangles inside `side`; the recovered share of every
/// party, or the reason to abort.
fn collect_side(
    side: &[usize],
    verdicts: &BTreeMap<Triangle, TriangleVerdict>,
) -> Result<std::result::Result<BTreeMap<usize, LrssShare>, DecodeOutcome>> {
    let mut seen: BTreeMap<usize, LrssShare> = BTreeMap::new();
    for v in side.iter().copied().combinations(3) {
        let tri = [v[0], v[1], v[2]];
        match verdicts.get(&tri) {
            None => return Err(LabError::InvalidParameter(format!("no verdict for triangle {tri:?}"))),
            Some(TriangleVerdict::Reject) => return Ok(Err(DecodeOutcome::GadgetRejected)),
            Some(TriangleVerdict::Accept(sh)) => {
                for (i, s) in tri.iter().zip(sh) {
                    if let Some(prev) = seen.get(i) {
                        if prev != s {
                            return Ok(Err(DecodeOutcome::Inconsistent));
                        }
                    } else {
                        seen.insert(*i, s.clone());
                    }
                }
            }
        }
    }
    Ok(Ok(seen))
}
