use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};

pub const SUITES: [&str; 13] = [
    "twirl-identities",
    "tdc-reduction",
    "tdc3-bounded",
    "qnmc2-lo",
    "bitnmc-locc2",
    "nmc4-locc",
    "gadget",
    "tdss",
    "lrss",
    "locc-nmss",
    "encryption",
    "capacity",
    "single-qubit-nm",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: String,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_psd")]
    pub psd: f64,
    #[serde(default = "default_trace")]
    pub trace: f64,
    /// Added to every upper bound a suite checks.
    #[serde(default = "default_slack")]
    pub slack: f64,
}

fn default_psd() -> f64 {
    1e-9
}

fn default_trace() -> f64 {
    1e-9
}

fn default_slack() -> f64 {
    1e-3
}

fn default_seed() -> u64 {
    1
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { psd: default_psd(), trace: default_trace(), slack: default_slack() }
    }
}

/// One experiment: a suite, its construction knobs and the seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub suite: String,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

/// The fields that determine a run; the output location is excluded.
#[derive(Serialize)]
struct Hashed<'a> {
    suite: &'a str,
    params: &'a BTreeMap<String, Value>,
    seed: u64,
    trials: Option<usize>,
    tolerances: &'a Tolerances,
}

impl ExperimentConfig {
    pub fn new(suite: &str) -> Self {
        ExperimentConfig {
            suite: suite.into(),
            params: BTreeMap::new(),
            seed: default_seed(),
            trials: None,
            tolerances: Tolerances::default(),
            output: None,
        }
    }

    pub fn with_param(mut self, key: &str, value: Value) -> Self {
        self.params.insert(key.into(), value);
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| LabError::InvalidConfig(e.to_string()))
    }

    /// SHA-256 of the canonical JSON of the run-determining fields.
    pub fn hash(&self) -> String {
        let view = Hashed {
            suite: &self.suite,
            params: &self.params,
            seed: self.seed,
            trials: self.trials,
            tolerances: &self.tolerances,
        };
        let bytes = serde_json::to_vec(&view).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn check_basic(&self) -> Result<()> {
        if !SUITES.contains(&self.suite.as_str()) {
            return Err(LabError::InvalidConfig(format!("unknown suite `{}`", self.suite)));
        }
        let t = &self.tolerances;
        for (name, v) in [("psd", t.psd), ("trace", t.trace), ("slack", t.slack)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(LabError::InvalidConfig(format!("tolerance {name} must be a non-negative number")));
            }
        }
        Ok(())
    }

    pub fn params(&self, allowed: &[&str]) -> Result<Params<'_>> {
        if let Some(k) = self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(LabError::InvalidConfig(format!("suite `{}` has no parameter `{k}`", self.suite)));
        }
        Ok(Params { map: &self.params })
    }
}

/// Typed access to suite parameters with defaults.
pub struct Params<'a> {
    map: &'a BTreeMap<String, Value>,
}

fn bad(key: &str, what: &str) -> LabError {
    LabError::InvalidConfig(format!("parameter `{key}` must be {what}"))
}

impl Params<'_> {
    pub fn usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.map.get(key) {
            None => Ok(default),
            Some(v) => v.as_u64().map(|x| x as usize).ok_or_else(|| bad(key, "a non-negative integer")),
        }
    }

    pub fn f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.map.get(key) {
            None => Ok(default),
            Some(v) => v.as_f64().filter(|x| x.is_finite()).ok_or_else(|| bad(key, "a number")),
        }
    }

    pub fn bool(&self, key: &str, default: bool) -> Result<bool> {
        match self.map.get(key) {
            None => Ok(default),
            Some(v) => v.as_bool().ok_or_else(|| bad(key, "a boolean")),
        }
    }

    pub fn usizes(&self, key: &str, default: &[usize]) -> Result<Vec<usize>> {
        match self.map.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => serde_json::from_value(v.clone()).map_err(|_| bad(key, "a list of non-negative integers")),
        }
    }

    pub fn pairs(&self, key: &str, default: &[(usize, usize)]) -> Result<Vec<(usize, usize)>> {
        match self.map.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => serde_json::from_value(v.clone()).map_err(|_| bad(key, "a list of integer pairs")),
        }
    }

    pub fn strings(&self, key: &str, default: &[&str]) -> Result<Vec<String>> {
        match self.map.get(key) {
            None => Ok(default.iter().map(|s| s.to_string()).collect()),
            Some(v) => serde_json::from_value(v.clone()).map_err(|_| bad(key, "a list of strings")),
        }
    }
}
