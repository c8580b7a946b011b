use std::collections::BTreeMap;
use std::fmt::Debug;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::locc::{locc_bias_lower_bound, tv_distance};
use crate::classical::{nm_fit_lp, Shamir};
use crate::error::{LabError, Result};
use crate::qcodes::BellParityHiding;
use crate::qstate::linalg::*;

/// A classical threshold scheme small enough to enumerate.
pub trait ClassicalSharing: Debug + Send + Sync {
    fn parties(&self) -> usize;
    fn threshold(&self) -> usize;
    /// Size of the share (and message) alphabet.
    fn alphabet(&self) -> usize;
    /// Number of coin settings; `share_with_coins` is a bijection onto
    /// sharings of a fixed message as `coins` ranges over them.
    fn coin_count(&self) -> usize;
    fn share_with_coins(&self, m: u8, coins: usize) -> Vec<u8>;
    fn reconstruct(&self, shares: &[(usize, u8)]) -> Result<u8>;
}

impl ClassicalSharing for Shamir {
    fn parties(&self) -> usize {
        self.parties
    }

    fn threshold(&self) -> usize {
        self.threshold
    }

    fn alphabet(&self) -> usize {
        self.field.order() as usize
    }

    fn coin_count(&self) -> usize {
        self.alphabet().pow(self.randomness_len() as u32)
    }

    fn share_with_coins(&self, m: u8, coins: usize) -> Vec<u8> {
        let q = self.alphabet();
        let coeffs: Vec<u8> = (0..self.randomness_len()).map(|i| (coins / q.pow(i as u32) % q) as u8).collect();
        self.share_with(m, &coeffs)
    }

    fn reconstruct(&self, shares: &[(usize, u8)]) -> Result<u8> {
        Shamir::reconstruct(self, shares)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Half {
    X,
    Y,
}

/// Register `X_{u,v}` or `Y_{u,v}`: one half of the encoding of share `u`
/// made for the pairing with `v`. `X_{u,v}` sits with `u`, `Y_{u,v}` with `v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NmssRegister {
    pub half: Half,
    pub share: usize,
    pub partner: usize,
}

impl NmssRegister {
    pub fn holder(&self) -> usize {
        match self.half {
            Half::X => self.share,
            Half::Y => self.partner,
        }
    }
}

/// What a party does to one register it holds, without looking at it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlindAction {
    Keep,
    /// XOR a fixed value into the register.
    Mask(u8),
    /// Replace the register by a uniform value.
    Scramble,
}

/// One transcript outcome and the actions it selects.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NmssBranch {
    pub weight: f64,
    pub actions: BTreeMap<NmssRegister, BlindAction>,
}

impl NmssBranch {
    pub fn action(&self, reg: &NmssRegister) -> BlindAction {
        self.actions.get(reg).copied().unwrap_or(BlindAction::Keep)
    }
}

/// A one-round strategy under ideal hiding: an announced outcome picks
/// blind actions on every register. The transcript law cannot depend on
/// the hidden values.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NmssMock {
    pub label: String,
    pub branches: Vec<NmssBranch>,
}

/// Joint tampering on the classical shares of one partition block:
/// `matrix[in][out]` over block share vectors (first member most significant).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockChannel {
    pub block: Vec<usize>,
    pub matrix: Vec<Vec<f64>>,
}

/// What one tampering run reduces to on the classical scheme.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReductionRecord {
    pub set: Vec<usize>,
    pub partition: Vec<Vec<usize>>,
    /// Per transcript branch: weight and block channels.
    pub branches: Vec<(f64, Vec<BlockChannel>)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NmssReport {
    pub label: String,
    pub factorization_tv: Option<f64>,
    pub branch_residuals: Vec<f64>,
    /// Residual of the induced message channel.
    pub residual: f64,
    /// `sum_b w_b residual_b`, which the residual cannot exceed.
    pub weighted_bound: f64,
    pub transcript_tv: f64,
}

/// Transcript distance for one register pair under real hiding.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HiddenTranscript {
    pub s0: u8,
    pub s1: u8,
    pub tv: f64,
    pub eps_locc: f64,
    pub bound: f64,
}

#[derive(Debug)]
pub struct LoccNmssScheme {
    pub classical: Box<dyn ClassicalSharing>,
}

const DIRECT_BUDGET: usize = 1 << 24;

impl LoccNmssScheme {
    pub fn new(classical: Box<dyn ClassicalSharing>) -> Result<Self> {
        if classical.parties() < 2 {
            return Err(LabError::InvalidParameter("pairing needs two parties".into()));
        }
        if classical.alphabet() > 256 {
            return Err(LabError::InvalidParameter("share alphabet must fit a byte".into()));
        }
        Ok(LoccNmssScheme { classical })
    }

    /// The toy instance: Shamir with five parties, threshold three, over `GF(8)`.
    pub fn toy() -> Result<Self> {
        Self::new(Box::new(Shamir::new(5, 3, 3)?))
    }

    pub fn p(&self) -> usize {
        self.classical.parties()
    }

    pub fn q(&self) -> usize {
        self.classical.alphabet()
    }

    pub fn registers(&self) -> Vec<NmssRegister> {
        let p = self.p();
        let mut out = vec![];
        for share in 0..p {
            for partner in (0..p).filter(|&v| v != share) {
                for half in [Half::X, Half::Y] {
                    out.push(NmssRegister { half, share, partner });
                }
            }
        }
        out
    }

    /// The registers party `i` holds: `X_{i,j}` and `Y_{j,i}` for all `j != i`.
    pub fn party_registers(&self, i: usize) -> Vec<NmssRegister> {
        self.registers().into_iter().filter(|r| r.holder() == i).collect()
    }

    /// Consecutive pairs of the sorted set; an odd set ends with a triple.
    pub fn partition(&self, set: &[usize]) -> Result<Vec<Vec<usize>>> {
        let mut t = set.to_vec();
        t.sort_unstable();
        t.dedup();
        if t.len() != set.len() || t.iter().any(|&i| i >= self.p()) {
            return Err(LabError::InvalidParameter(format!("{set:?} is not a set of parties")));
        }
        if t.len() < 2 {
            return Err(LabError::InvalidParameter("at least two parties are needed".into()));
        }
        let mut blocks: Vec<Vec<usize>> = t.chunks(2).map(|c| c.to_vec()).collect();
        if t.len() % 2 == 1 {
            let last = blocks.pop().expect("odd set has a tail");
            blocks.last_mut().expect("at least one pair").extend(last);
        }
        Ok(blocks)
    }

    /// Who decodes share `u` with it inside its block: the next member,
    /// wrapping around.
    pub fn partner_in(block: &[usize], u: usize) -> usize {
        let pos = block.iter().position(|&x| x == u).expect("member of block");
        block[(pos + 1) % block.len()]
    }

    /// Honest run: every share is decoded from its pair and the classical
    /// scheme reconstructs from the whole set.
    pub fn honest(&self, m: u8, coins: usize, set: &[usize]) -> Result<u8> {
        let shares = self.classical.share_with_coins(m, coins);
        let mut used = vec![];
        for block in self.partition(set)? {
            for &u in &block {
                let pad = (coins.wrapping_mul(31).wrapping_add(u * 7) % self.q()) as u8;
                let (x, y) = (pad, shares[u] ^ pad);
                used.push((u, x ^ y));
            }
        }
        used.sort_unstable();
        self.classical.reconstruct(&used)
    }

    /// Law of the decoded share `u` given its true value, under one branch.
    fn share_law(&self, branch: &NmssBranch, u: usize, v: usize, s: u8) -> Vec<f64> {
        let q = self.q();
        let ax = branch.action(&NmssRegister { half: Half::X, share: u, partner: v });
        let ay = branch.action(&NmssRegister { half: Half::Y, share: u, partner: v });
        let mut law = vec![0.0; q];
        match (ax, ay) {
            (BlindAction::Scramble, _) | (_, BlindAction::Scramble) => law.iter_mut().for_each(|p| *p = 1.0 / q as f64),
            (a, b) => {
                let mask = |a: BlindAction| if let BlindAction::Mask(d) = a { d } else { 0 };
                law[(s ^ mask(a) ^ mask(b)) as usize] = 1.0;
            }
        }
        law
    }

    pub fn reduction(&self, adv: &NmssMock, set: &[usize]) -> Result<ReductionRecord> {
        let partition = self.partition(set)?;
        let q = self.q();
        let mut branches = vec![];
        for br in &adv.branches {
            let mut chans = vec![];
            for block in &partition {
                let n = q.pow(block.len() as u32);
                let mut matrix = vec![vec![1.0; n]; n];
                for (i, row) in matrix.iter_mut().enumerate() {
                    let ins = digits(i, &vec![q; block.len()]);
                    let laws: Vec<Vec<f64>> = block
                        .iter()
                        .zip(&ins)
                        .map(|(&u, &s)| self.share_law(br, u, Self::partner_in(block, u), s as u8))
                        .collect();
                    for (o, cell) in row.iter_mut().enumerate() {
                        let outs = digits(o, &vec![q; block.len()]);
                        *cell = laws.iter().zip(&outs).map(|(l, &x)| l[x]).product();
                    }
                }
                chans.push(BlockChannel { block: block.clone(), matrix });
            }
            branches.push((br.weight, chans));
        }
        Ok(ReductionRecord { set: partition.concat(), partition, branches })
    }

    /// Distance between the directly simulated joint tampering on the
    /// shares of `set` (pads and scrambled values enumerated register by
    /// register) and the product of the record's block channels.
    pub fn factorization_tv(&self, adv: &NmssMock, set: &[usize]) -> Result<f64> {
        let rec = self.reduction(adv, set)?;
        let q = self.q();
        let order = rec.set.clone();
        let n = order.len();
        let joint_dim = q.pow(n as u32);
        let mut worst: f64 = 0.0;
        for (br, (_, chans)) in adv.branches.iter().zip(&rec.branches) {
            let pairs: Vec<(usize, usize)> = rec
                .partition
                .iter()
                .flat_map(|b| b.iter().map(|&u| (u, Self::partner_in(b, u))).collect::<Vec<_>>())
                .collect();
            let regs: Vec<(NmssRegister, NmssRegister)> = pairs
                .iter()
                .map(|&(u, v)| {
                    (NmssRegister { half: Half::X, share: u, partner: v }, NmssRegister { half: Half::Y, share: u, partner: v })
                })
                .collect();
            let scrambled: Vec<NmssRegister> = regs
                .iter()
                .flat_map(|(a, b)| [*a, *b])
                .filter(|r| br.action(r) == BlindAction::Scramble)
                .collect();
            let scramble_dim = q.pow(scrambled.len() as u32);
            let cost = joint_dim.saturating_mul(joint_dim).saturating_mul(scramble_dim);
            if cost > DIRECT_BUDGET {
                return Err(LabError::EnumerationTooLarge(format!("direct simulation needs {cost} steps")));
            }
            for input in 0..joint_dim {
                let s = digits(input, &vec![q; n]);
                let mut direct = vec![0.0; joint_dim];
                let weight = 1.0 / (joint_dim * scramble_dim) as f64;
                for pads in 0..joint_dim {
                    let r = digits(pads, &vec![q; n]);
                    for sc in 0..scramble_dim {
                        let vals = digits(sc, &vec![q; scrambled.len()]);
                        let apply = |reg: &NmssRegister, x: u8| -> u8 {
                            match br.action(reg) {
                                BlindAction::Keep => x,
                                BlindAction::Mask(d) => x ^ d,
                                BlindAction::Scramble => {
                                    vals[scrambled.iter().position(|z| z == reg).expect("listed")] as u8
                                }
                            }
                        };
                        let mut out = 0;
                        for (k, (rx, ry)) in regs.iter().enumerate() {
                            let x = apply(rx, r[k] as u8);
                            let y = apply(ry, s[k] as u8 ^ r[k] as u8);
                            out = out * q + (x ^ y) as usize;
                        }
                        direct[out] += weight;
                    }
                }
                let mut product = vec![1.0; joint_dim];
                for (o, cell) in product.iter_mut().enumerate() {
                    let outs = digits(o, &vec![q; n]);
                    let mut off = 0;
                    for ch in chans {
                        let k = ch.block.len();
                        let idx = |v: &[usize]| v.iter().fold(0, |a, &x| a * q + x);
                        *cell *= ch.matrix[idx(&s[off..off + k])][idx(&outs[off..off + k])];
                        off += k;
                    }
                }
                worst = worst.max(tv_distance(&direct, &product));
            }
        }
        Ok(worst)
    }

    /// `law[m][m']` of the message after tampering under one branch's
    /// block channels, averaged over the classical scheme's coins.
    fn branch_law(&self, rec: &ReductionRecord, chans: &[BlockChannel]) -> Result<Vec<Vec<f64>>> {
        let q = self.q();
        let t = self.classical.threshold();
        let used: Vec<usize> = rec.set[..t.min(rec.set.len())].to_vec();
        // Blocks touching the parties the reconstruction reads.
        let relevant: Vec<&BlockChannel> = chans.iter().filter(|c| c.block.iter().any(|u| used.contains(u))).collect();
        let width: usize = relevant.iter().map(|c| c.block.len()).sum();
        let coins = self.classical.coin_count();
        let mut law = vec![vec![0.0; q]; q];
        for (m, row) in law.iter_mut().enumerate() {
            for c in 0..coins {
                let shares = self.classical.share_with_coins(m as u8, c);
                for o in 0..q.pow(width as u32) {
                    let outs = digits(o, &vec![q; width]);
                    let mut prob = 1.0;
                    let mut tampered = BTreeMap::new();
                    let mut off = 0;
                    for ch in &relevant {
                        let k = ch.block.len();
                        let idx = |v: &[usize]| v.iter().fold(0, |a, &x| a * q + x);
                        let ins: Vec<usize> = ch.block.iter().map(|&u| shares[u] as usize).collect();
                        prob *= ch.matrix[idx(&ins)][idx(&outs[off..off + k])];
                        for (j, &u) in ch.block.iter().enumerate() {
                            tampered.insert(u, outs[off + j] as u8);
                        }
                        off += k;
                    }
                    if prob == 0.0 {
                        continue;
                    }
                    let pts: Vec<(usize, u8)> = used.iter().map(|&u| (u, tampered[&u])).collect();
                    row[self.classical.reconstruct(&pts)? as usize] += prob / coins as f64;
                }
            }
        }
        Ok(law)
    }

    /// Runs the reduction for one strategy and compares the induced
    /// message channel with its per-branch parts.
    pub fn evaluate(&self, adv: &NmssMock, set: &[usize], check_factorization: bool) -> Result<NmssReport> {
        adv.validate()?;
        let rec = self.reduction(adv, set)?;
        let q = self.q();
        let mut total = vec![vec![0.0; q]; q];
        let mut branch_residuals = vec![];
        let mut weighted_bound = 0.0;
        for (w, chans) in &rec.branches {
            let law = self.branch_law(&rec, chans)?;
            let res = nm_fit_lp(&law, q, 1)?;
            weighted_bound += w * res;
            branch_residuals.push(res);
            for (acc, row) in total.iter_mut().zip(&law) {
                acc.iter_mut().zip(row).for_each(|(a, b)| *a += w * b);
            }
        }
        let residual = nm_fit_lp(&total, q, 1)?;
        let factorization_tv = if check_factorization { Some(self.factorization_tv(adv, set)?) } else { None };
        let shares0 = self.classical.share_with_coins(0, 0);
        let shares1 = self.classical.share_with_coins((q - 1) as u8, coins_last(self));
        let transcript_tv = tv_distance(&adv.transcript_law(&shares0), &adv.transcript_law(&shares1));
        Ok(NmssReport { label: adv.label.clone(), factorization_tv, branch_residuals, residual, weighted_bound, transcript_tv })
    }

    /// One-round transcript distance for a single register pair when the
    /// share bits are hidden in Bell-parity pairs: both holders measure
    /// every hiding pair in the computational basis and announce. The
    /// distance is computed exactly and set against `(p + 1)` times the
    /// best bias found for one hidden bit.
    pub fn hidden_transcript<R: Rng + ?Sized>(
        &self,
        hiding: &BellParityHiding,
        s0: u8,
        s1: u8,
        n_random: usize,
        rng: &mut R,
    ) -> Result<HiddenTranscript> {
        let bits = (self.q() as f64).log2().ceil() as usize;
        let d = hiding.side_dim();
        let laws: Vec<Vec<f64>> = (0..2)
            .map(|b| {
                let rho = hiding.encode_bit(b);
                (0..d * d).map(|i| rho[(i, i)].re.max(0.0)).collect()
            })
            .collect();
        let transcript = |s: u8| -> Vec<f64> {
            let mut out = vec![1.0];
            for k in (0..bits).rev() {
                let l = &laws[(s >> k & 1) as usize];
                out = out.iter().flat_map(|a| l.iter().map(move |b| a * b)).collect();
            }
            out
        };
        let tv = tv_distance(&transcript(s0), &transcript(s1));
        let eps = locc_bias_lower_bound(&hiding.encode_bit(0), &hiding.encode_bit(1), [d, d], n_random, 1, rng)?.bias;
        Ok(HiddenTranscript { s0, s1, tv, eps_locc: eps, bound: (self.p() + 1) as f64 * eps })
    }
}

fn coins_last(s: &LoccNmssScheme) -> usize {
    s.classical.coin_count() - 1
}

impl NmssMock {
    pub fn identity() -> Self {
        NmssMock { label: "identity".into(), branches: vec![NmssBranch { weight: 1.0, actions: BTreeMap::new() }] }
    }

    pub fn validate(&self) -> Result<()> {
        let total: f64 = self.branches.iter().map(|b| b.weight).sum();
        if self.branches.is_empty() || (total - 1.0).abs() > 1e-9 || self.branches.iter().any(|b| b.weight < 0.0) {
            return Err(LabError::BadChannel { expected: "a transcript law", deviation: (total - 1.0).abs() });
        }
        Ok(())
    }

    /// The transcript law; under ideal hiding it ignores the shares.
    pub fn transcript_law(&self, _shares: &[u8]) -> Vec<f64> {
        self.branches.iter().map(|b| b.weight).collect()
    }

    /// Up to four outcomes, each choosing blind actions on the registers of
    /// `scheme`; at most `max_scrambles` scrambles per branch.
    pub fn sample<R: Rng + ?Sized>(scheme: &LoccNmssScheme, max_scrambles: usize, rng: &mut R) -> Self {
        let outcomes = rng.gen_range(1..=4);
        let w: Vec<f64> = (0..outcomes).map(|_| -rng.gen::<f64>().ln()).collect();
        let s: f64 = w.iter().sum();
        let q = scheme.q();
        let branches = w
            .iter()
            .map(|&wi| {
                let mut actions = BTreeMap::new();
                let mut scrambles = 0;
                for reg in scheme.registers() {
                    let roll: f64 = rng.gen();
                    let a = if roll < 0.5 {
                        BlindAction::Keep
                    } else if roll < 0.9 || scrambles >= max_scrambles {
                        BlindAction::Mask(rng.gen_range(0..q) as u8)
                    } else {
                        scrambles += 1;
                        BlindAction::Scramble
                    };
                    if a != BlindAction::Keep {
                        actions.insert(reg, a);
                    }
                }
                NmssBranch { weight: wi / s, actions }
            })
            .collect();
        NmssMock { label: format!("1r/{outcomes}"), branches }
    }
}
