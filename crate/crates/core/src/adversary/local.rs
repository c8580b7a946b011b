use std::collections::BTreeMap;

use crate::error::{LabError, Result};
use crate::qstate::linalg::*;
use crate::qstate::{Channel, ChannelKind, CqState, RegisterLayout};

/// Registers a share holds, in layout order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShareShape {
    pub share: usize,
    pub quantum: Vec<String>,
    pub quantum_dims: Vec<usize>,
    pub classical: Vec<String>,
    pub classical_dims: Vec<usize>,
}

impl ShareShape {
    pub fn of(layout: &RegisterLayout, share: usize) -> Self {
        let q: Vec<_> = layout.quantum().filter(|r| r.share == share).collect();
        let c: Vec<_> = layout.classical().filter(|r| r.share == share).collect();
        ShareShape {
            share,
            quantum: q.iter().map(|r| r.id.clone()).collect(),
            quantum_dims: q.iter().map(|r| r.dim).collect(),
            classical: c.iter().map(|r| r.id.clone()).collect(),
            classical_dims: c.iter().map(|r| r.dim).collect(),
        }
    }

    pub fn qdim(&self) -> usize {
        self.quantum_dims.iter().product()
    }

    /// Number of joint classical values.
    pub fn cvalues(&self) -> usize {
        self.classical_dims.iter().product()
    }

    pub fn qubits(&self) -> usize {
        self.quantum_dims.iter().map(|d| d.next_power_of_two().trailing_zeros() as usize).sum()
    }
}

/// One output of a local rule: the new joint classical value (`None` keeps
/// the input value) and the CP map applied to the quantum registers.
pub type RuleBranch = (Option<u64>, Channel);

/// A local cq-operation of one share. For each joint classical input value
/// (or a single entry shared by every value) it lists CP maps on the
/// share's quantum registers tagged by the classical value they write. The
/// maps of one input sum to a channel for trace-preserving operations.
#[derive(Clone, Debug)]
pub struct LocalMap {
    pub quantum: Vec<String>,
    pub classical: Vec<String>,
    pub rules: Vec<Vec<RuleBranch>>,
}

fn joint_value(vals: &[u64], dims: &[usize]) -> u64 {
    vals.iter().zip(dims).fold(0u64, |acc, (v, d)| acc * *d as u64 + v)
}

fn split_value(mut v: u64, dims: &[usize]) -> Vec<u64> {
    let mut out = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = v % dims[k] as u64;
        v /= dims[k] as u64;
    }
    out
}

impl LocalMap {
    pub fn identity(shape: &ShareShape) -> Self {
        Self::quantum_only(shape, Channel::identity(shape.quantum_dims.clone()))
    }

    /// Same channel for every classical value; classical data untouched.
    pub fn quantum_only(shape: &ShareShape, ch: Channel) -> Self {
        LocalMap { quantum: shape.quantum.clone(), classical: shape.classical.clone(), rules: vec![vec![(None, ch)]] }
    }

    /// Deterministic classical relabeling `table[v]` followed by the
    /// channel `channels[v]` (or `channels[0]` for every value).
    pub fn relabel(shape: &ShareShape, table: &[u64], channels: &[Channel]) -> Result<Self> {
        if table.len() != shape.cvalues() {
            return Err(LabError::DimensionMismatch(format!("relabel table of {} for {} values", table.len(), shape.cvalues())));
        }
        if channels.len() != 1 && channels.len() != table.len() {
            return Err(LabError::DimensionMismatch("one channel or one per classical value".into()));
        }
        let rules = table
            .iter()
            .enumerate()
            .map(|(v, &t)| vec![(Some(t), channels[if channels.len() == 1 { 0 } else { v }].clone())])
            .collect();
        Ok(LocalMap { quantum: shape.quantum.clone(), classical: shape.classical.clone(), rules })
    }

    pub fn rule(&self, v: u64) -> &[RuleBranch] {
        if self.rules.len() == 1 {
            &self.rules[0]
        } else {
            &self.rules[v as usize]
        }
    }

    /// The single channel of a classical-free uniform map.
    pub fn uniform_channel(&self) -> Result<Channel> {
        match self.rules.as_slice() {
            [r] => {
                let mut kraus = vec![];
                for (o, ch) in r {
                    if o.is_some() {
                        return Err(LabError::InvalidParameter("map writes classical values".into()));
                    }
                    kraus.extend(ch.kraus.iter().cloned());
                }
                let first = &r[0].1;
                Ok(Channel::from_kraus_unchecked(kraus, first.in_dims.clone(), first.out_dims.clone(), ChannelKind::Cp))
            }
            _ => Err(LabError::InvalidParameter("map depends on classical values".into())),
        }
    }

    pub fn check_against(&self, shape: &ShareShape) -> Result<()> {
        if self.quantum != shape.quantum || self.classical != shape.classical {
            return Err(LabError::LayoutMismatch(format!(
                "local map on {:?}/{:?}, share {} holds {:?}/{:?}",
                self.quantum, self.classical, shape.share, shape.quantum, shape.classical
            )));
        }
        let nv = shape.cvalues();
        if self.rules.len() != 1 && self.rules.len() != nv {
            return Err(LabError::DimensionMismatch(format!("{} rules for {} classical values", self.rules.len(), nv)));
        }
        let d = shape.qdim();
        for r in &self.rules {
            for (o, ch) in r {
                if ch.din() != d || ch.dout() != d {
                    return Err(LabError::DimensionMismatch(format!(
                        "local channel {}->{} on a share of dimension {d}",
                        ch.din(),
                        ch.dout()
                    )));
                }
                if let Some(v) = o {
                    if *v as usize >= nv {
                        return Err(LabError::DimensionMismatch(format!("classical output {v} out of {nv}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// `sum_k K_k^dagger K_k` over the branches of the rule for `v`.
    pub fn effect(&self, v: u64, d: usize) -> Mat {
        let mut s = zeros(d, d);
        for (_, ch) in self.rule(v) {
            for k in &ch.kraus {
                s += k.adjoint() * k;
            }
        }
        s
    }

    pub fn validate_tp(&self, shape: &ShareShape, tol: f64) -> Result<()> {
        let d = shape.qdim();
        let n = if self.rules.len() == 1 { 1 } else { shape.cvalues() };
        for v in 0..n as u64 {
            let dev = max_abs_diff(&self.effect(v, d), &identity(d));
            if dev > tol * d as f64 {
                return Err(LabError::BadChannel { expected: "trace preserving", deviation: dev });
            }
        }
        Ok(())
    }

    /// `next` after `self`.
    pub fn then(&self, next: &LocalMap, cvalues: usize) -> Result<LocalMap> {
        if self.quantum != next.quantum || self.classical != next.classical {
            return Err(LabError::LayoutMismatch("composing maps on different registers".into()));
        }
        let uniform = self.rules.len() == 1 && next.rules.len() == 1;
        let n = if uniform { 1 } else { cvalues };
        let mut rules = Vec::with_capacity(n);
        for v in 0..n as u64 {
            let mut out = vec![];
            for (o1, c1) in self.rule(v) {
                let mid = o1.unwrap_or(v);
                for (o2, c2) in next.rule(mid) {
                    out.push((o2.or(*o1), c1.then(c2)?));
                }
            }
            rules.push(out);
        }
        Ok(LocalMap { quantum: self.quantum.clone(), classical: self.classical.clone(), rules })
    }

    /// Applies the map to the registers it names; other registers untouched.
    pub fn apply(&self, state: &CqState) -> Result<CqState> {
        let layout = state.layout();
        let qdims = layout.quantum_dims();
        let targets: Vec<usize> = self.quantum.iter().map(|id| layout.quantum_index(id)).collect::<Result<_>>()?;
        let cpos: Vec<usize> = self.classical.iter().map(|id| layout.classical_index(id)).collect::<Result<_>>()?;
        let cdims: Vec<usize> = self.classical.iter().map(|id| layout.get(id).map(|r| r.dim)).collect::<Result<_>>()?;
        let mut out: BTreeMap<Vec<u64>, Mat> = BTreeMap::new();
        for (k, m) in state.branches() {
            let vals: Vec<u64> = cpos.iter().map(|&i| k[i]).collect();
            let v = joint_value(&vals, &cdims);
            for (o, ch) in self.rule(v) {
                let nv = o.unwrap_or(v);
                let mut nk = k.clone();
                for (p, x) in cpos.iter().zip(split_value(nv, &cdims)) {
                    nk[*p] = x;
                }
                let nm = if targets.is_empty() {
                    let w: f64 = ch.kraus.iter().map(|k| k[(0, 0)].norm_sqr()).sum();
                    m.scale(w)
                } else {
                    apply_kraus_on(m, &qdims, &targets, &ch.kraus)
                };
                match out.get_mut(&nk) {
                    Some(acc) => *acc += nm,
                    None => {
                        out.insert(nk, nm);
                    }
                }
            }
        }
        CqState::new_unchecked(layout.clone(), out)
    }
}
