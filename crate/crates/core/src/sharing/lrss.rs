use itertools::Itertools;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classical::{LinearExtractor, Shamir};
use crate::error::{LabError, Result};
use crate::qstate::linalg::*;

/// One party's share: a source string whose extraction under the party's
/// seed is its message share, plus one threshold share of every seed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LrssShare {
    Ok { w: u64, seeds: Vec<u8> },
    /// The encoder's preimage sampling failed; the share carries the
    /// message share in the clear and reconstruction aborts.
    Rejected { m: u8 },
}

/// Every random choice of one sharing, for exhaustive enumeration.
#[derive(Clone, Debug)]
pub struct LrssCoins {
    pub message_coeffs: Vec<u8>,
    pub seeds: Vec<u8>,
    pub preimage_index: Vec<u64>,
    /// Per seed, the higher-order coefficients of its threshold sharing.
    pub seed_coeffs: Vec<Vec<u8>>,
}

/// Threshold sharing resilient to a few parties leaking a short quantum
/// state about their shares. Messages are shared with `mshare`; party `i`
/// publishes a random preimage `W_i` of its share under the extractor with
/// seed `R_i`, and the seeds are shared with threshold `k + 1`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LrssScheme {
    pub p: usize,
    pub t: usize,
    /// Largest number of leaking parties.
    pub k: usize,
    /// Leakage length in qubits.
    pub mu: usize,
    pub mshare: Shamir,
    pub sdshare: Shamir,
    pub ext: LinearExtractor,
}

/// Measured ingredients of the leakage bound.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LrssErrors {
    /// Quantum-proof extractor error for sources with `eta - mu` bits of
    /// min-entropy (leftover hashing with the measured collision probability).
    pub eps_ext: f64,
    /// Largest distance of any `k` message shares from uniform.
    pub eps_u: f64,
    pub eps_priv: f64,
    pub eps_priv_seed: f64,
    /// `P[fiber empty]` for a uniform share value and seed.
    pub inversion_failure: f64,
}

impl LrssErrors {
    /// `2 (eps_priv + eps_priv') + 2 p (eps_ext + eps_u)`.
    pub fn leakage_bound(&self, p: usize) -> f64 {
        2.0 * (self.eps_priv + self.eps_priv_seed) + 2.0 * p as f64 * (self.eps_ext + self.eps_u)
    }

    pub fn reject_bound(&self, p: usize) -> f64 {
        p as f64 * (self.eps_ext + self.eps_u)
    }
}

/// A leakage channel on one party's share: one `2^mu`-dimensional state per
/// share value.
#[derive(Clone, Debug)]
pub struct LeakChannel {
    pub label: String,
    pub dim: usize,
    table: Vec<Mat>,
}

fn min_field_bits(p: usize) -> u32 {
    let mut w = 1;
    while (1usize << w) <= p {
        w += 1;
    }
    w
}

impl LrssScheme {
    /// Message shares over `GF(2^w)` with the smallest `w` exceeding `p`
    /// (so messages have `w` bits), seeds of `d` bits, sources of `eta` bits.
    pub fn new(p: usize, t: usize, k: usize, mu: usize, eta: u32, d: u32) -> Result<Self> {
        if k == 0 || k >= t {
            return Err(LabError::InvalidParameter(format!("need 0 < k < t, got k={k}, t={t}")));
        }
        if mu > 2 {
            return Err(LabError::InvalidParameter("leakage above two qubits is not simulated".into()));
        }
        let w = min_field_bits(p);
        let mshare = Shamir::new(p, t, w)?;
        let sdshare = Shamir::new(p, k + 1, d)?;
        let ext = LinearExtractor::new(eta, d, w)?;
        if (eta as usize) < w as usize + mu {
            return Err(LabError::InvalidParameter("sources must be longer than share plus leakage".into()));
        }
        Ok(LrssScheme { p, t, k, mu, mshare, sdshare, ext })
    }

    pub fn message_bits(&self) -> u32 {
        self.mshare.field.w
    }

    pub fn messages(&self) -> u64 {
        1 << self.message_bits()
    }

    fn seed_index(&self, seeds: &[u8]) -> usize {
        seeds.iter().rev().fold(0usize, |acc, &s| (acc << self.ext.d) | s as usize)
    }

    /// Number of distinct share values (accepted shares first, then the
    /// rejected markers).
    pub fn share_values(&self) -> usize {
        let seeds = 1usize << (self.ext.d as usize * self.p);
        (1usize << self.ext.eta) * seeds + self.messages() as usize
    }

    pub fn share_value_index(&self, s: &LrssShare) -> usize {
        let seeds = 1usize << (self.ext.d as usize * self.p);
        match s {
            LrssShare::Ok { w, seeds: sd } => *w as usize * seeds + self.seed_index(sd),
            LrssShare::Rejected { m } => (1usize << self.ext.eta) * seeds + *m as usize,
        }
    }

    pub fn share_from_index(&self, idx: usize) -> LrssShare {
        let seeds = 1usize << (self.ext.d as usize * self.p);
        let ok = (1usize << self.ext.eta) * seeds;
        if idx >= ok {
            return LrssShare::Rejected { m: (idx - ok) as u8 };
        }
        let mut rest = idx % seeds;
        let mask = (1usize << self.ext.d) - 1;
        let sd = (0..self.p)
            .map(|_| {
                let v = (rest & mask) as u8;
                rest >>= self.ext.d;
                v
            })
            .collect();
        LrssShare::Ok { w: (idx / seeds) as u64, seeds: sd }
    }

    pub fn share_with(&self, m: u8, coins: &LrssCoins) -> Vec<LrssShare> {
        let ms = self.mshare.share_with(m, &coins.message_coeffs);
        let mut ws = Vec::with_capacity(self.p);
        for i in 0..self.p {
            match self.ext.fiber(ms[i] as u64, coins.seeds[i] as u64) {
                Some(f) => ws.push(f.element(coins.preimage_index[i] % f.size())),
                None => return ms.into_iter().map(|m| LrssShare::Rejected { m }).collect(),
            }
        }
        let seed_shares: Vec<Vec<u8>> =
            (0..self.p).map(|j| self.sdshare.share_with(coins.seeds[j], &coins.seed_coeffs[j])).collect();
        (0..self.p).map(|i| LrssShare::Ok { w: ws[i], seeds: (0..self.p).map(|j| seed_shares[j][i]).collect() }).collect()
    }

    pub fn sample_coins<R: Rng + ?Sized>(&self, rng: &mut R) -> LrssCoins {
        let fm = (self.mshare.field.order() - 1) as u8;
        let fs = (self.sdshare.field.order() - 1) as u8;
        LrssCoins {
            message_coeffs: (0..self.mshare.randomness_len()).map(|_| rng.gen::<u8>() & fm).collect(),
            seeds: (0..self.p).map(|_| rng.gen::<u8>() & fs).collect(),
            preimage_index: (0..self.p).map(|_| rng.gen::<u64>()).collect(),
            seed_coeffs: (0..self.p).map(|_| (0..self.sdshare.randomness_len()).map(|_| rng.gen::<u8>() & fs).collect()).collect(),
        }
    }

    pub fn share<R: Rng + ?Sized>(&self, m: u8, rng: &mut R) -> Vec<LrssShare> {
        let coins = self.sample_coins(rng);
        self.share_with(m, &coins)
    }

    /// Reconstruction from `(party, share)` pairs; `Ok(None)` is the abort
    /// symbol (a rejected share was presented).
    pub fn reconstruct(&self, shares: &[(usize, LrssShare)]) -> Result<Option<u8>> {
        if shares.len() < self.t {
            return Err(LabError::InvalidParameter(format!("{} shares given, {} needed", shares.len(), self.t)));
        }
        let mut ok = Vec::with_capacity(shares.len());
        for (i, s) in shares {
            match s {
                LrssShare::Ok { w, seeds } if seeds.len() == self.p => ok.push((*i, *w, seeds)),
                _ => return Ok(None),
            }
        }
        let seeds: Vec<u8> = (0..self.p)
            .map(|j| {
                let pts: Vec<(usize, u8)> = ok.iter().map(|(i, _, s)| (*i, s[j])).collect();
                self.sdshare.reconstruct(&pts)
            })
            .collect::<Result<_>>()?;
        let ms: Vec<(usize, u8)> = ok.iter().map(|&(i, w, _)| (i, self.ext.extract(w, seeds[i] as u64) as u8)).collect();
        Ok(Some(self.mshare.reconstruct(&ms)?))
    }

    /// All message-share vectors of `m` with equal weight.
    fn message_share_vectors(&self, m: u8) -> Vec<Vec<u8>> {
        let q = self.mshare.field.order() as usize;
        let len = self.mshare.randomness_len();
        (0..q.pow(len as u32))
            .map(|i| {
                let c: Vec<u8> = digits(i, &vec![q; len]).into_iter().map(|v| v as u8).collect();
                self.mshare.share_with(m, &c)
            })
            .collect()
    }

    /// Exact probability that the encoder emits rejected shares for `m`.
    pub fn reject_probability(&self, m: u8) -> f64 {
        let seeds = self.ext.seeds();
        let empty: Vec<f64> = (0..self.messages())
            .map(|y| (0..seeds).filter(|&s| self.ext.fiber(y, s).is_none()).count() as f64 / seeds as f64)
            .collect();
        let vecs = self.message_share_vectors(m);
        vecs.iter().map(|ms| 1.0 - ms.iter().map(|&v| 1.0 - empty[v as usize]).product::<f64>()).sum::<f64>() / vecs.len() as f64
    }

    /// Measures every component error exhaustively.
    pub fn measured_errors(&self) -> Result<LrssErrors> {
        let eps_ext = self.ext.leftover_error((self.ext.eta as usize - self.mu) as f64);
        let n = self.messages() as usize;
        let mut eps_u: f64 = 0.0;
        let mut eps_priv: f64 = 0.0;
        let laws: Vec<Vec<Vec<u8>>> = (0..n as u8).map(|m| self.message_share_vectors(m)).collect();
        for subset in (0..self.p).combinations(self.k) {
            for vecs in &laws {
                let law = subset_law(vecs, &subset, n);
                let uniform = 1.0 / law.len() as f64;
                eps_u = eps_u.max(0.5 * law.iter().map(|p| (p - uniform).abs()).sum::<f64>());
            }
        }
        for subset in (0..self.p).combinations(self.t - 1) {
            let base = subset_law(&laws[0], &subset, n);
            for vecs in &laws[1..] {
                let law = subset_law(vecs, &subset, n);
                eps_priv = eps_priv.max(0.5 * law.iter().zip(&base).map(|(a, b)| (a - b).abs()).sum::<f64>());
            }
        }
        // Any k seed shares of a threshold-(k+1) sharing are uniform.
        let eps_priv_seed = 0.0;
        Ok(LrssErrors { eps_ext, eps_u, eps_priv, eps_priv_seed, inversion_failure: self.ext.inversion_failure() })
    }

    /// Trace distance (half the trace norm) between the leaked states of
    /// `m0` and `m1`: party `observer` keeps its share in the clear and
    /// party `leaker` sends `channel` applied to its share. Only single
    /// observers and leakers are simulated.
    pub fn leakage_distance(&self, m0: u8, m1: u8, observer: Option<usize>, leaker: Option<usize>, channel: &LeakChannel) -> Result<f64> {
        if observer.is_some() && observer == leaker {
            return Err(LabError::InvalidParameter("observer and leaker must differ".into()));
        }
        if observer.map_or(false, |o| o >= self.p) || leaker.map_or(false, |l| l >= self.p) {
            return Err(LabError::InvalidParameter("party index out of range".into()));
        }
        if self.t < 2 || self.k < 1 {
            return Err(LabError::InvalidParameter("leakage family is empty".into()));
        }
        if leaker.is_some() && channel.table.len() != self.share_values() {
            return Err(LabError::DimensionMismatch("leakage table size".into()));
        }
        let a = self.leaked_state(m0, observer, leaker, channel)?;
        let b = self.leaked_state(m1, observer, leaker, channel)?;
        let dim = if leaker.is_some() { channel.dim } else { 1 };
        let mut total = 0.0;
        for (x, y) in a.chunks(dim * dim * 2).zip(b.chunks(dim * dim * 2)) {
            let diff: Vec<f64> = x.iter().zip(y).map(|(u, v)| u - v).collect();
            if diff.iter().all(|v| v.abs() < 1e-15) {
                continue;
            }
            total += trace_norm_herm(&unflatten(&diff, dim));
        }
        Ok(0.5 * total)
    }

    /// The cq state as a flat array: for each observer share value, the
    /// (sub-normalized) leakage state stored as interleaved re/im entries.
    fn leaked_state(&self, m: u8, observer: Option<usize>, leaker: Option<usize>, channel: &LeakChannel) -> Result<Vec<f64>> {
        let dim = if leaker.is_some() { channel.dim } else { 1 };
        let cell = dim * dim * 2;
        let nseed = 1usize << self.ext.d;
        let nsd = 1usize << (self.ext.d as usize * self.p);
        let nm = self.messages() as usize;
        let obs_values = if observer.is_some() { self.share_values() } else { 1 };
        let trivial = vec![1.0, 0.0];
        let leak_of = |idx: usize| -> Vec<f64> {
            match leaker {
                Some(_) => flatten(&channel.table[idx]),
                None => trivial.clone(),
            }
        };
        // Leaker's state averaged over its preimage, keyed by (share, seed, seed shares).
        let fibers: Vec<Vec<Option<crate::classical::Fiber>>> =
            (0..nm).map(|y| (0..nseed).map(|s| self.ext.fiber(y as u64, s as u64)).collect()).collect();
        let mut lbar_cache: std::collections::HashMap<(u8, usize, usize), Vec<f64>> = Default::default();
        let mut lbar = |mb: u8, rb: usize, sb: usize| -> Vec<f64> {
            lbar_cache
                .entry((mb, rb, sb))
                .or_insert_with(|| {
                    let f = fibers[mb as usize][rb].as_ref().expect("non-empty fiber");
                    let mut acc = vec![0.0; cell];
                    for e in 0..f.size() {
                        let w = f.element(e) as usize;
                        let v = leak_of(w * nsd + sb);
                        acc.iter_mut().zip(&v).for_each(|(a, x)| *a += x);
                    }
                    acc.iter_mut().for_each(|a| *a /= f.size() as f64);
                    acc
                })
                .clone()
        };
        // acc[(ma, ra, sa)] before spreading over the observer's preimages.
        let mut acc = vec![0.0; nm * nseed * nsd * cell];
        let mut out = vec![0.0; obs_values * cell];
        let rejected_base = (1usize << self.ext.eta) * nsd;
        let ms_vecs = self.message_share_vectors(m);
        let w_ms = 1.0 / ms_vecs.len() as f64;
        let qs = self.sdshare.field.order() as usize;
        let seed_coeff_choices = qs.pow(self.sdshare.randomness_len() as u32);
        let w_seed = 1.0 / (nseed.pow(self.p as u32) as f64);
        let w_coeff = 1.0 / (seed_coeff_choices.pow(self.p as u32) as f64);
        for ms in &ms_vecs {
            for r in (0..self.p).map(|_| 0..nseed).multi_cartesian_product() {
                let weight = w_ms * w_seed;
                if (0..self.p).any(|i| fibers[ms[i] as usize][r[i]].is_none()) {
                    let o = observer.map_or(0, |o| rejected_base + ms[o] as usize);
                    let l = leaker.map_or(trivial.clone(), |l| leak_of(rejected_base + ms[l] as usize));
                    out[o * cell..(o + 1) * cell].iter_mut().zip(&l).for_each(|(a, x)| *a += weight * x);
                    continue;
                }
                // Threshold shares of every seed under every coefficient choice.
                let per_seed: Vec<Vec<(u8, u8)>> = (0..self.p)
                    .map(|j| {
                        (0..seed_coeff_choices)
                            .map(|ci| {
                                let coeffs = digits(ci, &vec![qs; self.sdshare.randomness_len()]);
                                let coeffs: Vec<u8> = coeffs.iter().map(|&c| c as u8).collect();
                                let sh = self.sdshare.share_with(r[j] as u8, &coeffs);
                                (observer.map_or(0, |o| sh[o]), leaker.map_or(0, |l| sh[l]))
                            })
                            .collect()
                    })
                    .collect();
                for combo in (0..self.p).map(|_| 0..seed_coeff_choices).multi_cartesian_product() {
                    let (mut sa, mut sb) = (0usize, 0usize);
                    for j in (0..self.p).rev() {
                        let (x, y) = per_seed[j][combo[j]];
                        sa = (sa << self.ext.d) | x as usize;
                        sb = (sb << self.ext.d) | y as usize;
                    }
                    let l = match leaker {
                        Some(lk) => lbar(ms[lk], r[lk], sb),
                        None => trivial.clone(),
                    };
                    let w = weight * w_coeff;
                    let key = match observer {
                        Some(o) => (ms[o] as usize * nseed + r[o]) * nsd + sa,
                        None => 0,
                    };
                    acc[key * cell..(key + 1) * cell].iter_mut().zip(&l).for_each(|(a, x)| *a += w * x);
                }
            }
        }
        match observer {
            None => {
                for key in 0..acc.len() / cell {
                    for c in 0..cell {
                        out[c] += acc[key * cell + c];
                    }
                }
            }
            Some(_) => {
                // Spread (share, seed) mass uniformly over the preimages.
                for wa in 0..(1usize << self.ext.eta) {
                    for ra in 0..nseed {
                        let ma = self.ext.extract(wa as u64, ra as u64) as usize;
                        let size = fibers[ma][ra].as_ref().map_or(1, |f| f.size()) as f64;
                        for sa in 0..nsd {
                            let key = (ma * nseed + ra) * nsd + sa;
                            let o = wa * nsd + sa;
                            for c in 0..cell {
                                out[o * cell + c] += acc[key * cell + c] / size;
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

fn subset_law(vecs: &[Vec<u8>], subset: &[usize], n: usize) -> Vec<f64> {
    let mut law = vec![0.0; n.pow(subset.len() as u32)];
    for v in vecs {
        let idx = subset.iter().fold(0usize, |acc, &i| acc * n + v[i] as usize);
        law[idx] += 1.0 / vecs.len() as f64;
    }
    law
}

fn flatten(m: &Mat) -> Vec<f64> {
    m.iter().flat_map(|z| [z.re, z.im]).collect()
}

fn unflatten(v: &[f64], dim: usize) -> Mat {
    Mat::from_iterator(dim, dim, v.chunks(2).map(|p| c(p[0], p[1])))
}

impl LeakChannel {
    pub fn from_fn(label: &str, scheme: &LrssScheme, f: impl Fn(&LrssShare) -> Mat) -> Result<Self> {
        let dim = 1usize << scheme.mu;
        let table: Vec<Mat> = (0..scheme.share_values()).map(|i| f(&scheme.share_from_index(i))).collect();
        if table.iter().any(|m| m.nrows() != dim || !is_psd(m, 1e-9) || (m.trace().re - 1.0).abs() > 1e-9) {
            return Err(LabError::BadChannel { expected: "a state per share value", deviation: f64::NAN });
        }
        Ok(LeakChannel { label: label.into(), dim, table })
    }

    /// The same state for every share value.
    pub fn constant(scheme: &LrssScheme, state: &Mat) -> Result<Self> {
        Self::from_fn("constant", scheme, |_| state.clone())
    }

    /// A random leakage channel: independent random states per value, a
    /// parity of the source bits, a bit of the extractor output under a
    /// guessed seed, or a parity of the seed shares, each in a random basis.
    pub fn sample<R: Rng + ?Sized>(scheme: &LrssScheme, rng: &mut R) -> Result<Self> {
        let dim = 1usize << scheme.mu;
        let kind = rng.gen_range(0..4);
        let u = haar_unitary(dim, rng);
        let ket = |b: usize| {
            let v = &u * basis_ket(dim, b % dim);
            projector(&v)
        };
        match kind {
            0 => {
                let states: Vec<Mat> = (0..scheme.share_values()).map(|_| random_density(dim, 1 + rng.gen_range(0..dim), rng)).collect();
                Ok(LeakChannel { label: "random-states".into(), dim, table: states })
            }
            1 => {
                let masks: Vec<u64> = (0..scheme.mu).map(|_| rng.gen_range(1..(1u64 << scheme.ext.eta))).collect();
                Self::from_fn("source-parity", scheme, |s| match s {
                    LrssShare::Ok { w, .. } => ket(masks.iter().enumerate().map(|(i, m)| ((w & m).count_ones() as usize % 2) << i).sum()),
                    LrssShare::Rejected { m } => ket(*m as usize),
                })
            }
            2 => {
                let guess = rng.gen_range(0..scheme.ext.seeds());
                Self::from_fn("extract-guess", scheme, |s| match s {
                    LrssShare::Ok { w, .. } => ket(scheme.ext.extract(*w, guess) as usize),
                    LrssShare::Rejected { m } => ket(*m as usize),
                })
            }
            _ => {
                let mask = rng.gen_range(1..(1usize << (scheme.ext.d as usize * scheme.p)));
                Self::from_fn("seed-parity", scheme, |s| match s {
                    LrssShare::Ok { seeds, .. } => {
                        let idx = scheme.seed_index(seeds);
                        ket((idx & mask).count_ones() as usize % 2)
                    }
                    LrssShare::Rejected { .. } => ket(0),
                })
            }
        }
    }
}
