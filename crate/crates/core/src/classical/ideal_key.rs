use serde::{Deserialize, Serialize};

use super::nmc::SplitFunctions;
use crate::error::{LabError, Result};

/// Trusted key functionality on split sources `x` (`x_bits`) and `y`
/// (`y_bits`): the honest key `R` is uniform on `key_bits` bits, and after
/// tampering `R' = R` exactly when both sources are left unchanged.
/// Otherwise `R'` is independent of `R`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IdealKeyNmc {
    pub key_bits: u32,
    pub x_bits: u32,
    pub y_bits: u32,
}

/// How the tampered key is drawn when the sources changed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TamperedKey {
    /// Uniform and independent of everything else.
    Fresh,
    /// A value fixed by the adversary's constant choices.
    Fixed(u64),
}

/// What the functionality extracts from a tampering pair.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KeyTamper {
    /// Probability that `f(x) = x` for uniform `x`.
    pub p_x_fixed: f64,
    pub p_y_fixed: f64,
    pub f_constant: Option<u64>,
    pub g_constant: Option<u64>,
}

impl KeyTamper {
    pub fn p_same(&self) -> f64 {
        self.p_x_fixed * self.p_y_fixed
    }
}

fn fixed_fraction(table: &[u64]) -> f64 {
    table.iter().enumerate().filter(|(i, &v)| *i as u64 == v).count() as f64 / table.len() as f64
}

fn constant_of(table: &[u64]) -> Option<u64> {
    let first = *table.first()?;
    table.iter().all(|&v| v == first).then_some(first)
}

impl IdealKeyNmc {
    pub fn new(key_bits: u32, x_bits: u32, y_bits: u32) -> Result<Self> {
        if key_bits == 0 || key_bits > 16 || x_bits == 0 || y_bits == 0 || x_bits > 12 || y_bits > 12 {
            return Err(LabError::InvalidParameter("ideal key sizes out of range".into()));
        }
        Ok(IdealKeyNmc { key_bits, x_bits, y_bits })
    }

    pub fn key_space(&self) -> u64 {
        1 << self.key_bits
    }

    pub fn analyze(&self, hook: &SplitFunctions) -> Result<KeyTamper> {
        if hook.f.len() != 1usize << self.x_bits || hook.g.len() != 1usize << self.y_bits {
            return Err(LabError::DimensionMismatch("tampering tables vs source sizes".into()));
        }
        Ok(KeyTamper {
            p_x_fixed: fixed_fraction(&hook.f),
            p_y_fixed: fixed_fraction(&hook.g),
            f_constant: constant_of(&hook.f),
            g_constant: constant_of(&hook.g),
        })
    }

    /// Public key value attached to a constant source pair.
    pub fn key_of_constants(&self, x0: u64, y0: u64) -> u64 {
        let mut z = (x0 << self.y_bits | y0).wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        (z ^ (z >> 31)) & (self.key_space() - 1)
    }

    /// The tampered-key rule the functionality applies for this hook.
    pub fn tampered_rule(&self, kt: &KeyTamper) -> TamperedKey {
        match (kt.f_constant, kt.g_constant) {
            (Some(x0), Some(y0)) => TamperedKey::Fixed(self.key_of_constants(x0, y0)),
            _ => TamperedKey::Fresh,
        }
    }

    /// Joint law `P[R = r, R' = r']` obtained by running the functionality
    /// over every source pair and honest key.
    pub fn joint_law(&self, hook: &SplitFunctions) -> Result<Vec<Vec<f64>>> {
        let kt = self.analyze(hook)?;
        let rule = self.tampered_rule(&kt);
        let ks = self.key_space() as usize;
        let nx = 1usize << self.x_bits;
        let ny = 1usize << self.y_bits;
        let w = 1.0 / (nx * ny * ks) as f64;
        let mut law = vec![vec![0.0; ks]; ks];
        for x in 0..nx {
            for y in 0..ny {
                let same = hook.f[x] == x as u64 && hook.g[y] == y as u64;
                for (r, row) in law.iter_mut().enumerate() {
                    if same {
                        row[r] += w;
                    } else {
                        match rule {
                            TamperedKey::Fixed(v) => row[v as usize] += w,
                            TamperedKey::Fresh => {
                                for cell in row.iter_mut() {
                                    *cell += w / ks as f64;
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(law)
    }

    /// `p_same * U_{R = R'} + (1 - p_same) * U_R (x) law(R')`.
    pub fn declared_law(&self, p_same: f64, rule: TamperedKey) -> Vec<Vec<f64>> {
        let ks = self.key_space() as usize;
        let u = 1.0 / ks as f64;
        let mut law = vec![vec![0.0; ks]; ks];
        for (r, row) in law.iter_mut().enumerate() {
            row[r] += p_same * u;
            match rule {
                TamperedKey::Fixed(v) => row[v as usize] += (1.0 - p_same) * u,
                TamperedKey::Fresh => {
                    for cell in row.iter_mut() {
                        *cell += (1.0 - p_same) * u * u;
                    }
                }
            }
        }
        law
    }
}
