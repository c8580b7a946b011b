use serde::{Deserialize, Serialize};

use super::local::LocalMap;
use super::locc::LoccNodeDesc;
use super::{Adversary, Model, Transcript};
use crate::error::Result;
use crate::qstate::{ChannelDesc, CqStateDesc};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LocalMapDesc {
    pub quantum: Vec<String>,
    pub classical: Vec<String>,
    /// Per classical input value: list of `(written value, channel)`.
    pub rules: Vec<Vec<(Option<u64>, ChannelDesc)>>,
}

impl From<&LocalMap> for LocalMapDesc {
    fn from(m: &LocalMap) -> Self {
        LocalMapDesc {
            quantum: m.quantum.clone(),
            classical: m.classical.clone(),
            rules: m.rules.iter().map(|r| r.iter().map(|(o, ch)| (*o, ChannelDesc::from(ch))).collect()).collect(),
        }
    }
}

impl LocalMapDesc {
    pub fn to_map(&self) -> Result<LocalMap> {
        let rules = self
            .rules
            .iter()
            .map(|r| r.iter().map(|(o, ch)| Ok((*o, ch.to_channel()?))).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        Ok(LocalMap { quantum: self.quantum.clone(), classical: self.classical.clone(), rules })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TranscriptDesc {
    pub label: String,
    pub maps: Vec<LocalMapDesc>,
}

/// JSON descriptor of an adversary: model tag, the flattened transcripts
/// with row-major Kraus matrices, and the strategy tree when there is one.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdversaryDesc {
    #[serde(flatten)]
    pub model: Model,
    pub shares: Vec<usize>,
    pub ancilla: Option<CqStateDesc>,
    pub retain_ancilla: bool,
    pub transcripts: Vec<TranscriptDesc>,
    pub tree: Option<LoccNodeDesc>,
}

impl From<&Adversary> for AdversaryDesc {
    fn from(a: &Adversary) -> Self {
        AdversaryDesc {
            model: a.model.clone(),
            shares: a.shares.clone(),
            ancilla: a.ancilla.as_ref().map(CqStateDesc::from),
            retain_ancilla: a.retain_ancilla,
            transcripts: a
                .transcripts
                .iter()
                .map(|t| TranscriptDesc { label: t.label.clone(), maps: t.maps.iter().map(LocalMapDesc::from).collect() })
                .collect(),
            tree: a.tree.as_ref().map(LoccNodeDesc::from),
        }
    }
}

impl AdversaryDesc {
    /// Rebuilds the adversary; every channel is re-validated on the way.
    pub fn to_adversary(&self) -> Result<Adversary> {
        Ok(Adversary {
            model: self.model.clone(),
            shares: self.shares.clone(),
            ancilla: self.ancilla.as_ref().map(|a| a.to_state()).transpose()?,
            retain_ancilla: self.retain_ancilla,
            transcripts: self
                .transcripts
                .iter()
                .map(|t| Ok(Transcript { label: t.label.clone(), maps: t.maps.iter().map(|m| m.to_map()).collect::<Result<_>>()? }))
                .collect::<Result<_>>()?,
            tree: self.tree.as_ref().map(|t| t.to_node()).transpose()?,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("descriptor serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| crate::error::LabError::InvalidConfig(e.to_string()))
    }
}
