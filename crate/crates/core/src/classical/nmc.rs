use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use minilp::{ComparisonOp, OptimizationDirection, Problem, Variable};
use crate::error::{LabError, Result};

/// Upper limit on enumerated `(f, g)` pairs.
pub const PAIR_BUDGET: u64 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NmGrade {
    Exhaustive,
    Ideal,
    Heuristic,
}

/// Split-state code on `(x, y)` with `x` of `n1` bits and `y` of `n2` bits.
/// The decoder is a lookup table; the encoder of `m` is uniform over the
/// cells that decode to `m`, which makes the code perfectly correct.
#[derive(Clone, Debug)]
pub struct ClassicalNmc {
    pub k: u32,
    pub n1: u32,
    pub n2: u32,
    labels: Vec<Option<u64>>,
    codewords: Vec<Vec<(u64, u64)>>,
    pub grade: NmGrade,
    /// `None` when the error is assumed rather than computed.
    pub verified_error: Option<f64>,
}

/// JSON form: one list of `"x:y"` hex cells per message.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CodeTable {
    pub k: u32,
    pub share_bits: (u32, u32),
    pub encoding: Vec<Vec<String>>,
    pub grade: NmGrade,
    pub verified_error: Option<f64>,
}

/// A tampering pair given by explicit tables `f: x -> x'`, `g: y -> y'`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitFunctions {
    pub f: Vec<u64>,
    pub g: Vec<u64>,
}

impl SplitFunctions {
    pub fn identity(n1: u32, n2: u32) -> Self {
        SplitFunctions { f: (0..1u64 << n1).collect(), g: (0..1u64 << n2).collect() }
    }
}

/// The tampering pairs an oracle ranges over.
#[derive(Clone, Debug)]
pub enum FunctionFamily {
    All,
    Listed(Vec<SplitFunctions>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NmReport {
    pub error: f64,
    pub worst: SplitFunctions,
    pub pairs: u64,
    pub distinct_tables: usize,
}

/// Decodes the `idx`-th function of `{0..2^n} -> {0..2^n}` in base `2^n`.
fn function_from_index(n: u32, mut idx: u64) -> Vec<u64> {
    let size = 1u64 << n;
    (0..size)
        .map(|_| {
            let v = idx % size;
            idx /= size;
            v
        })
        .collect()
}

fn function_count(n: u32) -> Option<u64> {
    let size = 1u64 << n;
    size.checked_pow(size as u32)
}

impl ClassicalNmc {
    /// Builds the code from its decoding table (`x * 2^n2 + y` order).
    pub fn from_labels(k: u32, n1: u32, n2: u32, labels: Vec<Option<u64>>) -> Result<Self> {
        if labels.len() != 1usize << (n1 + n2) {
            return Err(LabError::DimensionMismatch("decoding table size".into()));
        }
        let msgs = 1u64 << k;
        let mut codewords = vec![vec![]; msgs as usize];
        for (cell, lab) in labels.iter().enumerate() {
            if let Some(m) = lab {
                if *m >= msgs {
                    return Err(LabError::InvalidParameter(format!("label {m} outside message space")));
                }
                codewords[*m as usize].push(((cell >> n2) as u64, (cell & ((1 << n2) - 1)) as u64));
            }
        }
        if codewords.iter().any(|c| c.is_empty()) {
            return Err(LabError::InvalidParameter("some message has no codeword".into()));
        }
        Ok(ClassicalNmc { k, n1, n2, labels, codewords, grade: NmGrade::Heuristic, verified_error: None })
    }

    /// One-bit toy: `x = y = m`, anything else rejects.
    pub fn repetition_bit() -> Self {
        Self::from_labels(1, 1, 1, vec![Some(0), None, None, Some(1)]).expect("valid table")
    }

    pub fn messages(&self) -> u64 {
        1 << self.k
    }

    /// Outcome alphabet size: messages plus the reject symbol.
    pub fn outcomes(&self) -> usize {
        self.messages() as usize + 1
    }

    pub fn reject_index(&self) -> usize {
        self.messages() as usize
    }

    pub fn codewords(&self, m: u64) -> &[(u64, u64)] {
        &self.codewords[m as usize]
    }

    pub fn encode<R: Rng + ?Sized>(&self, m: u64, rng: &mut R) -> (u64, u64) {
        *self.codewords[m as usize].choose(rng).expect("non-empty")
    }

    pub fn decode(&self, x: u64, y: u64) -> Option<u64> {
        self.labels[((x << self.n2) | y) as usize]
    }

    fn outcome(&self, x: u64, y: u64) -> usize {
        self.decode(x, y).map_or(self.reject_index(), |m| m as usize)
    }

    pub fn to_table(&self) -> CodeTable {
        CodeTable {
            k: self.k,
            share_bits: (self.n1, self.n2),
            encoding: self.codewords.iter().map(|cs| cs.iter().map(|(x, y)| format!("{x:x}:{y:x}")).collect()).collect(),
            grade: self.grade,
            verified_error: self.verified_error,
        }
    }

    pub fn from_table(t: &CodeTable) -> Result<Self> {
        let (n1, n2) = t.share_bits;
        let mut labels = vec![None; 1usize << (n1 + n2)];
        for (m, cells) in t.encoding.iter().enumerate() {
            for cell in cells {
                let (xs, ys) = cell.split_once(':').ok_or_else(|| LabError::InvalidConfig(format!("bad cell `{cell}`")))?;
                let x = u64::from_str_radix(xs, 16).map_err(|e| LabError::InvalidConfig(e.to_string()))?;
                let y = u64::from_str_radix(ys, 16).map_err(|e| LabError::InvalidConfig(e.to_string()))?;
                if x >> n1 != 0 || y >> n2 != 0 {
                    return Err(LabError::InvalidConfig(format!("cell `{cell}` outside share space")));
                }
                labels[((x << n2) | y) as usize] = Some(m as u64);
            }
        }
        let mut code = Self::from_labels(t.k, n1, n2, labels)?;
        code.grade = t.grade;
        code.verified_error = t.verified_error;
        Ok(code)
    }

    /// Outcome counts after tampering: `counts[m][o]`, or `counts[m][o * 2^n1 + x]`
    /// jointly with the original left share when `augmented`.
    pub fn tampered_counts(&self, sf: &SplitFunctions, augmented: bool) -> Vec<Vec<u32>> {
        let width = if augmented { self.outcomes() << self.n1 } else { self.outcomes() };
        self.codewords
            .iter()
            .map(|cs| {
                let mut row = vec![0u32; width];
                for &(x, y) in cs {
                    let o = self.outcome(sf.f[x as usize], sf.g[y as usize]);
                    let idx = if augmented { (o << self.n1) | x as usize } else { o };
                    row[idx] += 1;
                }
                row
            })
            .collect()
    }

    /// Exact distance of one tampered outcome law to the best
    /// `p * (m, side) + (1 - p) * D` form.
    pub fn nm_error_of_counts(&self, counts: &[Vec<u32>], augmented: bool) -> Result<f64> {
        let probs: Vec<Vec<f64>> = counts
            .iter()
            .zip(&self.codewords)
            .map(|(row, cs)| row.iter().map(|&c| c as f64 / cs.len() as f64).collect())
            .collect();
        let side = if augmented { 1usize << self.n1 } else { 1 };
        nm_fit_lp(&probs, self.outcomes(), side)
    }

    fn pair_iter<'a>(&'a self, family: &'a FunctionFamily) -> Result<(u64, Box<dyn Fn(u64) -> SplitFunctions + Sync + 'a>)> {
        match family {
            FunctionFamily::Listed(list) => Ok((list.len() as u64, Box::new(move |i| list[i as usize].clone()))),
            FunctionFamily::All => {
                let (cf, cg) = match (function_count(self.n1), function_count(self.n2)) {
                    (Some(a), Some(b)) => (a, b),
                    _ => return Err(LabError::EnumerationTooLarge("function space overflows".into())),
                };
                let total = cf.checked_mul(cg).filter(|&t| t <= PAIR_BUDGET).ok_or_else(|| {
                    LabError::EnumerationTooLarge(format!("{cf} x {cg} function pairs exceed {PAIR_BUDGET}"))
                })?;
                let (n1, n2) = (self.n1, self.n2);
                Ok((total, Box::new(move |i| SplitFunctions { f: function_from_index(n1, i / cg), g: function_from_index(n2, i % cg) })))
            }
        }
    }

    /// Worst-case non-malleability error over a function family, computed
    /// exactly per distinct outcome table.
    pub fn nm_error_exhaustive(&self, augmented: bool, family: &FunctionFamily) -> Result<NmReport> {
        let (total, pair) = self.pair_iter(family)?;
        let tables: Vec<Vec<Vec<u32>>> =
            (0..total).into_par_iter().map(|i| self.tampered_counts(&pair(i), augmented)).collect();
        let mut first_seen: BTreeMap<&Vec<Vec<u32>>, u64> = BTreeMap::new();
        for (i, t) in tables.iter().enumerate() {
            first_seen.entry(t).or_insert(i as u64);
        }
        let unique: Vec<(&Vec<Vec<u32>>, u64)> = first_seen.into_iter().collect();
        let errors: Vec<Result<f64>> = unique.par_iter().map(|(t, _)| self.nm_error_of_counts(t, augmented)).collect();
        // Largest error wins; near-ties go to the smallest enumeration index.
        let mut best: Option<(f64, u64)> = None;
        for ((_, idx), e) in unique.iter().zip(errors) {
            let e = e?;
            let take = match best {
                None => true,
                Some((be, bi)) => e > be + 1e-12 || ((e - be).abs() <= 1e-12 && *idx < bi),
            };
            if take {
                best = Some((e, *idx));
            }
        }
        let (error, idx) = best.ok_or_else(|| LabError::InvalidParameter("empty function family".into()))?;
        Ok(NmReport { error: error.max(0.0), worst: pair(idx), pairs: total, distinct_tables: unique.len() })
    }

    /// Largest advantage `P[Dec((f,g)(Enc(b))) = not b] - 1/2` for a uniform bit.
    pub fn flip_bias(&self, family: &FunctionFamily) -> Result<f64> {
        if self.k != 1 {
            return Err(LabError::InvalidParameter("flip bias is defined for one-bit codes".into()));
        }
        let (total, pair) = self.pair_iter(family)?;
        let best = (0..total)
            .into_par_iter()
            .map(|i| {
                let c = self.tampered_counts(&pair(i), false);
                let p0 = c[0][1] as f64 / self.codewords[0].len() as f64;
                let p1 = c[1][0] as f64 / self.codewords[1].len() as f64;
                0.5 * (p0 + p1) - 0.5
            })
            .reduce(|| f64::NEG_INFINITY, f64::max);
        Ok(best)
    }
}

/// `min_{p, D} max_m TV(P_m, p * delta_m (x) y + (1 - p) * D)` as a linear
/// program; `probs[m][o * side + s]` is the law of outcome `o` with side
/// value `s`, and `y` ranges over laws of the side value.
pub fn nm_fit_lp(probs: &[Vec<f64>], outcomes: usize, side: usize) -> Result<f64> {
    let cells = outcomes * side;
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let t = lp.add_var(1.0, (0.0, f64::INFINITY));
    let y: Vec<Variable> = (0..side).map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
    let q: Vec<Variable> = (0..cells).map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
    let norm: Vec<(Variable, f64)> = y.iter().chain(&q).map(|&v| (v, 1.0)).collect();
    lp.add_constraint(norm, ComparisonOp::Eq, 1.0);
    for (m, row) in probs.iter().enumerate() {
        let mut tv = vec![(t, 1.0)];
        for o in 0..outcomes {
            for s in 0..side {
                let c = o * side + s;
                // slack >= |row[c] - model| with model = q[c] (+ y[s] on the diagonal).
                let slack = lp.add_var(0.0, (0.0, f64::INFINITY));
                let mut model = vec![(q[c], 1.0)];
                if o == m {
                    model.push((y[s], 1.0));
                }
                let up: Vec<(Variable, f64)> = std::iter::once((slack, 1.0)).chain(model.iter().copied()).collect();
                lp.add_constraint(up, ComparisonOp::Ge, row[c]);
                let down: Vec<(Variable, f64)> =
                    std::iter::once((slack, 1.0)).chain(model.iter().map(|&(v, a)| (v, -a))).collect();
                lp.add_constraint(down, ComparisonOp::Ge, -row[c]);
                tv.push((slack, -0.5));
            }
        }
        lp.add_constraint(tv, ComparisonOp::Ge, 0.0);
    }
    let sol = lp.solve().map_err(|e| LabError::InvalidParameter(format!("fit program: {e}")))?;
    Ok(sol.objective())
}

/// Randomized search over decoding tables, keeping the candidate with the
/// smallest exhaustively verified error.
pub fn search_tiny_nmc<R: Rng + ?Sized>(
    k: u32,
    share_bits: (u32, u32),
    trials: usize,
    deterministic: bool,
    rng: &mut R,
) -> Result<ClassicalNmc> {
    let (n1, n2) = share_bits;
    let cells = 1usize << (n1 + n2);
    let msgs = 1usize << k;
    if msgs > cells {
        return Err(LabError::InvalidParameter(format!("{msgs} messages cannot fit in {cells} cells")));
    }
    let mut best: Option<ClassicalNmc> = None;
    for _ in 0..trials {
        let labels: Vec<Option<u64>> = if deterministic {
            let mut order: Vec<usize> = (0..cells).collect();
            order.shuffle(rng);
            let mut l = vec![None; cells];
            for (m, &cell) in order.iter().take(msgs).enumerate() {
                l[cell] = Some(m as u64);
            }
            l
        } else {
            (0..cells)
                .map(|_| {
                    let v = rng.gen_range(0..=msgs);
                    (v < msgs).then_some(v as u64)
                })
                .collect()
        };
        let Ok(mut code) = ClassicalNmc::from_labels(k, n1, n2, labels) else { continue };
        let err = code.nm_error_exhaustive(false, &FunctionFamily::All)?.error;
        code.grade = NmGrade::Exhaustive;
        code.verified_error = Some(err);
        if best.as_ref().map_or(true, |b| err < b.verified_error.unwrap_or(f64::INFINITY) - 1e-12) {
            best = Some(code);
        }
    }
    best.ok_or(LabError::NoCandidate)
}
