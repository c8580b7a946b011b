use serde::{Deserialize, Serialize};

use super::local::{LocalMap, ShareShape};
use super::serial::LocalMapDesc;
use super::Transcript;
use crate::error::{LabError, Result};
use crate::qstate::linalg::*;

/// Rounds allowed in a strategy tree unless configured otherwise.
pub const DEFAULT_ROUND_CAP: usize = 3;

/// A classically coordinated strategy. In a round one share (by position
/// in share order) applies an instrument; the announced outcome selects the
/// continuation. A leaf applies one finishing map per share.
#[derive(Clone, Debug)]
pub enum LoccNode {
    Finish(Vec<LocalMap>),
    Round { actor: usize, instrument: Vec<LocalMap>, responses: Vec<LoccNode> },
}

/// JSON form of a strategy tree.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum LoccNodeDesc {
    Finish { maps: Vec<LocalMapDesc> },
    Round { actor: usize, instrument: Vec<LocalMapDesc>, responses: Vec<LoccNodeDesc> },
}

impl From<&LoccNode> for LoccNodeDesc {
    fn from(n: &LoccNode) -> Self {
        match n {
            LoccNode::Finish(maps) => LoccNodeDesc::Finish { maps: maps.iter().map(LocalMapDesc::from).collect() },
            LoccNode::Round { actor, instrument, responses } => LoccNodeDesc::Round {
                actor: *actor,
                instrument: instrument.iter().map(LocalMapDesc::from).collect(),
                responses: responses.iter().map(LoccNodeDesc::from).collect(),
            },
        }
    }
}

impl LoccNodeDesc {
    pub fn to_node(&self) -> Result<LoccNode> {
        Ok(match self {
            LoccNodeDesc::Finish { maps } => LoccNode::Finish(maps.iter().map(|m| m.to_map()).collect::<Result<_>>()?),
            LoccNodeDesc::Round { actor, instrument, responses } => LoccNode::Round {
                actor: *actor,
                instrument: instrument.iter().map(|m| m.to_map()).collect::<Result<_>>()?,
                responses: responses.iter().map(|r| r.to_node()).collect::<Result<_>>()?,
            },
        })
    }
}

impl LoccNode {
    /// No communication: every share finishes with its map.
    pub fn finish(maps: Vec<LocalMap>) -> Self {
        LoccNode::Finish(maps)
    }

    pub fn depth(&self) -> usize {
        match self {
            LoccNode::Finish(_) => 0,
            LoccNode::Round { responses, .. } => 1 + responses.iter().map(LoccNode::depth).max().unwrap_or(0),
        }
    }
}

fn walk(
    node: &LoccNode,
    acc: Vec<LocalMap>,
    label: String,
    shapes: &[ShareShape],
    out: &mut Vec<Transcript>,
) -> Result<()> {
    match node {
        LoccNode::Finish(maps) => {
            if maps.len() != shapes.len() {
                return Err(LabError::DimensionMismatch(format!("{} finishing maps for {} shares", maps.len(), shapes.len())));
            }
            let mut done = Vec::with_capacity(maps.len());
            for ((a, m), sh) in acc.iter().zip(maps).zip(shapes) {
                m.check_against(sh)?;
                done.push(a.then(m, sh.cvalues())?);
            }
            out.push(Transcript { label, maps: done });
        }
        LoccNode::Round { actor, instrument, responses } => {
            let sh = shapes
                .get(*actor)
                .ok_or_else(|| LabError::InvalidParameter(format!("round actor {actor} out of range")))?;
            if responses.len() != instrument.len() {
                return Err(LabError::InvalidParameter(format!(
                    "{} responses for an instrument with {} outcomes",
                    responses.len(),
                    instrument.len()
                )));
            }
            validate_instrument(instrument, sh)?;
            for (o, (branch, next)) in instrument.iter().zip(responses).enumerate() {
                let mut acc2 = acc.clone();
                acc2[*actor] = acc2[*actor].then(branch, sh.cvalues())?;
                let l = if label.is_empty() { format!("{actor}:{o}") } else { format!("{label},{actor}:{o}") };
                walk(next, acc2, l, shapes, out)?;
            }
        }
    }
    Ok(())
}

/// The branches of an instrument must sum to a trace-preserving map for
/// every classical input value.
pub fn validate_instrument(instrument: &[LocalMap], shape: &ShareShape) -> Result<()> {
    if instrument.is_empty() {
        return Err(LabError::InvalidParameter("instrument without outcomes".into()));
    }
    let d = shape.qdim();
    let nv = if instrument.iter().all(|b| b.rules.len() == 1) { 1 } else { shape.cvalues() };
    for b in instrument {
        b.check_against(shape)?;
    }
    for v in 0..nv as u64 {
        let mut s = zeros(d, d);
        for b in instrument {
            s += b.effect(v, d);
        }
        let dev = max_abs_diff(&s, &identity(d));
        if dev > 1e-8 * d as f64 {
            return Err(LabError::BadChannel { expected: "a normalized instrument", deviation: dev });
        }
    }
    Ok(())
}

/// Flattens a tree into transcripts; returns them with the tree depth.
pub fn flatten(tree: &LoccNode, shapes: &[ShareShape], round_cap: usize) -> Result<(Vec<Transcript>, usize)> {
    let depth = tree.depth();
    if depth > round_cap {
        return Err(LabError::InvalidParameter(format!("{depth} rounds exceed the cap of {round_cap}")));
    }
    let acc: Vec<LocalMap> = shapes.iter().map(LocalMap::identity).collect();
    let mut out = vec![];
    walk(tree, acc, String::new(), shapes, &mut out)?;
    Ok((out, depth))
}

/// Checks `sum_c (x)_i (E_i^c)^dagger-effects = I` for every joint
/// classical input (up to 4096 combinations).
pub fn validate_sum(transcripts: &[Transcript], shapes: &[ShareShape], tol: f64) -> Result<()> {
    let depends = transcripts.iter().any(|t| t.maps.iter().any(|m| m.rules.len() > 1));
    let combos: usize = if depends { shapes.iter().map(ShareShape::cvalues).product() } else { 1 };
    if combos > 4096 {
        return Err(LabError::EnumerationTooLarge(format!("{combos} classical input combinations")));
    }
    let dims: Vec<usize> = shapes.iter().map(ShareShape::cvalues).collect();
    let d: usize = shapes.iter().map(ShareShape::qdim).product();
    for idx in 0..combos {
        let vs = if depends { digits(idx, &dims) } else { vec![0; shapes.len()] };
        let mut total = zeros(d, d);
        for t in transcripts {
            let parts: Vec<Mat> = t.maps.iter().zip(shapes).zip(&vs).map(|((m, sh), &v)| m.effect(v as u64, sh.qdim())).collect();
            total += kron_all(&parts);
        }
        let dev = max_abs_diff(&total, &identity(d));
        if dev > tol * d as f64 {
            return Err(LabError::BadChannel { expected: "trace preserving on average", deviation: dev });
        }
    }
    Ok(())
}
