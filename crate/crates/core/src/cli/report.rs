use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::analysis::SecurityReport;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `value <= bound + slack`
    AtMost,
    /// `value >= bound - slack`
    AtLeast,
    /// `|value - bound| <= slack`
    Equals,
}

/// One numeric claim checked by a suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub bound: f64,
    pub bound_formula: String,
    pub slack: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, relation: Relation, bound: f64, formula: impl Into<String>, slack: f64) -> Self {
        let passed = value.is_finite()
            && match relation {
                Relation::AtMost => value <= bound + slack,
                Relation::AtLeast => value >= bound - slack,
                Relation::Equals => (value - bound).abs() <= slack,
            };
        Check { name: name.into(), value, relation, bound, bound_formula: formula.into(), slack, passed, note: None }
    }

    pub fn at_most(name: impl Into<String>, value: f64, bound: f64, formula: impl Into<String>, slack: f64) -> Self {
        Self::new(name, value, Relation::AtMost, bound, formula, slack)
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64, formula: impl Into<String>, slack: f64) -> Self {
        Self::new(name, value, Relation::AtLeast, bound, formula, slack)
    }

    pub fn equals(name: impl Into<String>, value: f64, target: f64, formula: impl Into<String>, slack: f64) -> Self {
        Self::new(name, value, Relation::Equals, target, formula, slack)
    }

    pub fn noted(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Everything one suite run produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub reports: Vec<SecurityReport>,
    pub notes: Vec<String>,
    pub passed: bool,
}

impl SuiteReport {
    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    /// Flat CSV: one row per check and one per certification trial.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,name,index,value,relation,bound,slack,passed,extra\n");
        let esc = |s: &str| if s.contains([',', '"', '\n']) { format!("\"{}\"", s.replace('"', "\"\"")) } else { s.to_string() };
        for c in &self.checks {
            out += &format!(
                "check,{},,{:e},{},{:e},{:e},{},{}\n",
                esc(&c.name),
                c.value,
                serde_json::to_value(c.relation).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
                c.bound,
                c.slack,
                c.passed,
                esc(&c.bound_formula)
            );
        }
        for r in &self.reports {
            for t in &r.records {
                out += &format!(
                    "trial,{},{},{:e},at_most,{:e},{:e},{},{}\n",
                    esc(&r.code),
                    t.index,
                    t.residual,
                    r.bound,
                    r.slack,
                    t.residual <= r.bound + r.slack,
                    esc(&format!("p={:e}", t.p))
                );
            }
        }
        out
    }
}
