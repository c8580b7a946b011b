use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::nmc::{NmGrade, SplitFunctions};
use crate::error::{LabError, Result};

fn parity(v: u64) -> u64 {
    (v.count_ones() & 1) as u64
}

/// Seeded Toeplitz hashing `{0,1}^eta -> {0,1}^l`. The `eta + l - 1`
/// diagonal bits are a fixed pseudorandom expansion of the `d`-bit seed,
/// so every seed gives a linear map of the source.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LinearExtractor {
    pub eta: u32,
    pub d: u32,
    pub l: u32,
}

/// Solution set of `A w = y` over GF(2).
#[derive(Clone, Debug)]
pub struct Fiber {
    pub particular: u64,
    pub kernel: Vec<u64>,
}

impl Fiber {
    pub fn size(&self) -> u64 {
        1 << self.kernel.len()
    }

    pub fn element(&self, mut idx: u64) -> u64 {
        let mut w = self.particular;
        for &k in &self.kernel {
            if idx & 1 == 1 {
                w ^= k;
            }
            idx >>= 1;
        }
        w
    }
}

impl LinearExtractor {
    pub fn new(eta: u32, d: u32, l: u32) -> Result<Self> {
        if eta == 0 || eta > 32 || l == 0 || l > eta || d > 16 {
            return Err(LabError::InvalidParameter(format!("extractor sizes eta={eta} d={d} l={l}")));
        }
        Ok(LinearExtractor { eta, d, l })
    }

    pub fn seeds(&self) -> u64 {
        1 << self.d
    }

    /// Rows of the seed's matrix, each an `eta`-bit mask.
    pub fn matrix(&self, seed: u64) -> Vec<u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x7e5d_0000 ^ seed);
        let diag: Vec<u64> = (0..self.eta + self.l - 1).map(|_| rng.gen::<bool>() as u64).collect();
        (0..self.l)
            .map(|i| {
                let mut row = 0u64;
                for j in 0..self.eta {
                    // Entry (i, j) depends only on i - j.
                    let bit = diag[(i + self.eta - 1 - j) as usize];
                    row |= bit << j;
                }
                row
            })
            .collect()
    }

    pub fn extract(&self, w: u64, seed: u64) -> u64 {
        self.matrix(seed).iter().enumerate().fold(0, |acc, (i, row)| acc | (parity(row & w) << i))
    }

    /// Gaussian elimination over GF(2); `None` when `y` is outside the image.
    pub fn fiber(&self, y: u64, seed: u64) -> Option<Fiber> {
        let mut rows: Vec<(u64, u64)> = self.matrix(seed).into_iter().enumerate().map(|(i, r)| (r, (y >> i) & 1)).collect();
        let mut pivots: Vec<(u32, usize)> = vec![];
        let mut rank = 0;
        for col in 0..self.eta {
            let Some(p) = (rank..rows.len()).find(|&i| (rows[i].0 >> col) & 1 == 1) else { continue };
            rows.swap(rank, p);
            let (pr, pb) = rows[rank];
            for (i, r) in rows.iter_mut().enumerate() {
                if i != rank && (r.0 >> col) & 1 == 1 {
                    r.0 ^= pr;
                    r.1 ^= pb;
                }
            }
            pivots.push((col, rank));
            rank += 1;
        }
        if rows[rank..].iter().any(|r| r.1 == 1) {
            return None;
        }
        let mut particular = 0u64;
        for &(col, row) in &pivots {
            particular |= rows[row].1 << col;
        }
        let pivot_cols: Vec<u32> = pivots.iter().map(|p| p.0).collect();
        let kernel = (0..self.eta)
            .filter(|c| !pivot_cols.contains(c))
            .map(|free| {
                let mut v = 1u64 << free;
                for &(col, row) in &pivots {
                    if (rows[row].0 >> free) & 1 == 1 {
                        v |= 1 << col;
                    }
                }
                v
            })
            .collect();
        Some(Fiber { particular, kernel })
    }

    /// Uniform preimage of `y` under the seed's map, or `None` (reject).
    pub fn invert<R: Rng + ?Sized>(&self, y: u64, seed: u64, rng: &mut R) -> Option<u64> {
        let f = self.fiber(y, seed)?;
        Some(f.element(rng.gen_range(0..f.size())))
    }

    /// `P_{y, s}[fiber empty]` for uniform `y` and seed.
    pub fn inversion_failure(&self) -> f64 {
        let ys = 1u64 << self.l;
        let empty: u64 = (0..self.seeds()).map(|s| (0..ys).filter(|&y| self.fiber(y, s).is_none()).count() as u64).sum();
        empty as f64 / (ys * self.seeds()) as f64
    }

    /// `max_{w != w'} P_s[Ext(w, s) = Ext(w', s)]`.
    pub fn collision_probability(&self) -> f64 {
        let mats: Vec<Vec<u64>> = (0..self.seeds()).map(|s| self.matrix(s)).collect();
        let mut worst = 0u64;
        for v in 1..(1u64 << self.eta) {
            let c = mats.iter().filter(|m| m.iter().all(|r| parity(r & v) == 0)).count() as u64;
            worst = worst.max(c);
        }
        worst as f64 / self.seeds() as f64
    }

    /// Leftover-hash estimate for a source with `min_entropy` bits given
    /// the side information: `1/2 sqrt(2^l cp - 1 + 2^{l - k})`.
    pub fn leftover_error(&self, min_entropy: f64) -> f64 {
        let cp = self.collision_probability();
        let excess = (2f64.powi(self.l as i32) * cp - 1.0).max(0.0);
        0.5 * (excess + 2f64.powf(self.l as f64 - min_entropy)).sqrt()
    }
}

/// Inner-product extractor on two `n`-bit sources.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ToyNmExt {
    pub n: u32,
}

/// Which law the left source follows in an extraction measurement.
#[derive(Clone, Copy, Debug)]
pub enum SourceLaw {
    Uniform,
    Constant(u64),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NmExtMeasurement {
    pub error: f64,
    pub grade: NmGrade,
    pub pairs: u64,
}

impl ToyNmExt {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 || n > 5 {
            return Err(LabError::InvalidParameter(format!("toy extractor supports 1..=5 bits, got {n}")));
        }
        Ok(ToyNmExt { n })
    }

    pub fn ext(&self, x: u64, y: u64) -> u64 {
        parity(x & y)
    }

    fn xs(&self, law: SourceLaw) -> Vec<u64> {
        match law {
            SourceLaw::Uniform => (0..1u64 << self.n).collect(),
            SourceLaw::Constant(c) => vec![c],
        }
    }

    /// `|P[Ext = 1] - 1/2|` with a uniform right source.
    pub fn output_bias(&self, law: SourceLaw) -> f64 {
        let xs = self.xs(law);
        let ny = 1u64 << self.n;
        let ones: u64 = xs.iter().map(|&x| (0..ny).filter(|&y| self.ext(x, y) == 1).count() as u64).sum();
        (ones as f64 / (xs.len() as u64 * ny) as f64 - 0.5).abs()
    }

    /// Distance of `(Ext(X, Y), Y)` from `(U, Y)`.
    pub fn strong_error(&self, law: SourceLaw) -> f64 {
        let xs = self.xs(law);
        let ny = 1u64 << self.n;
        let mut total = 0.0;
        for y in 0..ny {
            let ones = xs.iter().filter(|&&x| self.ext(x, y) == 1).count() as f64 / xs.len() as f64;
            total += (ones - 0.5).abs();
        }
        total / ny as f64
    }

    /// `P[f(X) = X and g(Y) = Y]`.
    pub fn p_same(&self, sf: &SplitFunctions) -> f64 {
        let fx = sf.f.iter().enumerate().filter(|(i, &v)| *i as u64 == v).count();
        let gy = sf.g.iter().enumerate().filter(|(i, &v)| *i as u64 == v).count();
        (fx * gy) as f64 / (1u64 << (2 * self.n)) as f64
    }

    /// Distance of the law of `(R, R', same)` from the ideal form.
    pub fn nm_error_of(&self, sf: &SplitFunctions) -> f64 {
        let size = 1u64 << self.n;
        let w = 1.0 / (size * size) as f64;
        // actual[same][r][r']
        let mut actual = [[[0.0f64; 2]; 2]; 2];
        for x in 0..size {
            for y in 0..size {
                let (xp, yp) = (sf.f[x as usize], sf.g[y as usize]);
                let same = (xp == x && yp == y) as usize;
                actual[same][self.ext(x, y) as usize][self.ext(xp, yp) as usize] += w;
            }
        }
        let p_same: f64 = actual[1].iter().flatten().sum();
        let p_diff = 1.0 - p_same;
        let mut dist = 0.0;
        for r in 0..2 {
            for rp in 0..2 {
                let ideal_same = if r == rp { p_same * 0.5 } else { 0.0 };
                let marg: f64 = actual[0][0][rp] + actual[0][1][rp];
                let ideal_diff = if p_diff > 0.0 { 0.5 * marg } else { 0.0 };
                dist += (actual[1][r][rp] - ideal_same).abs() + (actual[0][r][rp] - ideal_diff).abs();
            }
        }
        0.5 * dist
    }

    /// Exhaustive over all tampering pairs for `n <= 2`, otherwise a
    /// sampled estimate.
    pub fn nm_error<R: Rng + ?Sized>(&self, samples: u64, rng: &mut R) -> NmExtMeasurement {
        let size = 1u64 << self.n;
        let func = |mut idx: u64| -> Vec<u64> {
            (0..size)
                .map(|_| {
                    let v = idx % size;
                    idx /= size;
                    v
                })
                .collect()
        };
        if self.n <= 2 {
            let count = size.pow(size as u32);
            let mut worst: f64 = 0.0;
            for i in 0..count {
                for j in 0..count {
                    worst = worst.max(self.nm_error_of(&SplitFunctions { f: func(i), g: func(j) }));
                }
            }
            NmExtMeasurement { error: worst, grade: NmGrade::Exhaustive, pairs: count * count }
        } else {
            let mut worst: f64 = 0.0;
            for _ in 0..samples {
                let f = (0..size).map(|_| rng.gen_range(0..size)).collect();
                let g = (0..size).map(|_| rng.gen_range(0..size)).collect();
                worst = worst.max(self.nm_error_of(&SplitFunctions { f, g }));
            }
            NmExtMeasurement { error: worst, grade: NmGrade::Heuristic, pairs: samples }
        }
    }
}
