use rand::Rng;
use serde::{Deserialize, Serialize};

use super::local::{LocalMap, ShareShape};
use super::Adversary;
use crate::error::Result;
use crate::qstate::linalg::*;
use crate::qstate::{Channel, ChannelKind, CqState, Register, RegisterLayout};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AncillaKind {
    /// Haar-random pure state over all ancilla registers.
    RandomPure,
    /// Bell pairs between consecutive shares, as many as the budgets allow.
    Epr,
}

/// Declared measure of the random-adversary sampler.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Environment dimension of the Stinespring dilation.
    pub env_dim: usize,
    /// Fixed weight of the identity component; drawn uniformly when absent.
    pub identity_weight: Option<f64>,
    pub ancilla: AncillaKind,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig { env_dim: 4, identity_weight: None, ancilla: AncillaKind::RandomPure }
    }
}

/// Random self-map of `0..n`: each point is left fixed with probability
/// `u ~ U[0, 1]` (one draw per function) and sent uniformly otherwise.
pub fn random_function<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<u64> {
    let u: f64 = rng.gen();
    (0..n as u64).map(|x| if rng.gen::<f64>() < u { x } else { rng.gen_range(0..n as u64) }).collect()
}

/// `w * id + (1 - w) * (random Stinespring channel)` in Kraus form.
pub fn random_local_channel<R: Rng + ?Sized>(dims: Vec<usize>, cfg: &SamplerConfig, rng: &mut R) -> Channel {
    let d: usize = dims.iter().product();
    if d == 1 {
        return Channel::identity(dims);
    }
    let w = cfg.identity_weight.unwrap_or_else(|| rng.gen());
    let st = Channel::random_stinespring(dims.clone(), cfg.env_dim, rng);
    let mut kraus = vec![identity(d).scale(w.sqrt())];
    kraus.extend(st.kraus.iter().map(|k| k.scale((1.0 - w).sqrt())));
    Channel::from_kraus_unchecked(kraus, dims.clone(), dims, ChannelKind::Cptp)
}

pub fn random_local_map<R: Rng + ?Sized>(shape: &ShareShape, cfg: &SamplerConfig, rng: &mut R) -> Result<LocalMap> {
    let ch = random_local_channel(shape.quantum_dims.clone(), cfg, rng);
    if shape.classical.is_empty() {
        return Ok(LocalMap::quantum_only(shape, ch));
    }
    let table = random_function(shape.cvalues(), rng);
    LocalMap::relabel(shape, &table, &[ch])
}

/// Random local-operations adversary on every share of `layout`.
pub fn sample_lo<R: Rng + ?Sized>(layout: &RegisterLayout, cfg: &SamplerConfig, rng: &mut R) -> Result<Adversary> {
    let maps = layout
        .shares()
        .iter()
        .map(|&s| random_local_map(&ShareShape::of(layout, s), cfg, rng))
        .collect::<Result<_>>()?;
    Adversary::build_lo(layout, maps)
}

/// Ancilla with `budgets[i]` qubits for the i-th share of `layout`.
pub fn random_ancilla<R: Rng + ?Sized>(
    layout: &RegisterLayout,
    budgets: &[usize],
    kind: AncillaKind,
    rng: &mut R,
) -> Result<Option<CqState>> {
    let shares = layout.shares();
    let regs: Vec<Register> = shares
        .iter()
        .zip(budgets)
        .filter(|(_, &b)| b > 0)
        .map(|(&s, &b)| Register::qubits(format!("anc{s}"), b, s))
        .collect();
    if regs.is_empty() {
        return Ok(None);
    }
    let total: usize = regs.iter().map(|r| r.size).sum();
    let anc_layout = RegisterLayout::with_cap(regs.clone(), (1usize << total).max(layout.cap()))?;
    let psi = match kind {
        AncillaKind::RandomPure => random_pure(1 << total, rng),
        AncillaKind::Epr => {
            // Greedily pair free qubits of different registers.
            let mut free: Vec<Vec<usize>> = vec![];
            let mut offset = 0;
            for r in &regs {
                free.push((offset..offset + r.size).collect());
                offset += r.size;
            }
            let dims = vec![2; total];
            let mut v = basis_ket(1 << total, 0);
            for i in 0..regs.len() {
                while let Some(&a) = free[i].first() {
                    let Some(k) = (i + 1..regs.len()).find(|&k| !free[k].is_empty()) else { break };
                    let b = free[k].remove(0);
                    free[i].remove(0);
                    v = apply_op_vec(&v, &dims, &[a], &hadamard());
                    v = apply_op_vec(&v, &dims, &[a, b], &cnot());
                }
            }
            v
        }
    };
    Ok(Some(CqState::pure(anc_layout, &psi)?))
}

/// Random bounded-storage adversary: a random ancilla within `budgets`
/// and random local maps on each share together with its ancilla part.
pub fn sample_bounded<R: Rng + ?Sized>(
    layout: &RegisterLayout,
    budgets: &[usize],
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<Adversary> {
    let ancilla = random_ancilla(layout, budgets, cfg.ancilla, rng)?;
    let full = match &ancilla {
        Some(a) => RegisterLayout::with_cap(layout.registers().to_vec(), usize::MAX)?.concat(a.layout())?,
        None => layout.clone(),
    };
    let maps = full
        .shares()
        .iter()
        .map(|&s| random_local_map(&ShareShape::of(&full, s), cfg, rng))
        .collect::<Result<_>>()?;
    Adversary::build_lo_bounded(layout, maps, ancilla, budgets)
}
