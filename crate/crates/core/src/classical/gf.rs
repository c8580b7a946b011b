use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Reduction polynomials (with the leading bit) for `GF(2^w)`, `w = 1..=8`.
const POLYS: [u32; 9] = [0, 0b11, 0b111, 0b1011, 0b10011, 0b100101, 0b1000011, 0b10000011, 0b100011011];

/// The field `GF(2^w)` with elements stored as the low `w` bits of a `u8`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gf2w {
    pub w: u32,
}

impl Gf2w {
    pub fn new(w: u32) -> Result<Self> {
        if !(1..=8).contains(&w) {
            return Err(LabError::InvalidParameter(format!("field width {w} outside 1..=8")));
        }
        Ok(Gf2w { w })
    }

    pub fn order(&self) -> u32 {
        1 << self.w
    }

    pub fn add(&self, a: u8, b: u8) -> u8 {
        a ^ b
    }

    pub fn mul(&self, a: u8, b: u8) -> u8 {
        let poly = POLYS[self.w as usize];
        let top = 1u32 << self.w;
        let (mut a, mut b, mut acc) = (a as u32, b as u32, 0u32);
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a <<= 1;
            if a & top != 0 {
                a ^= poly;
            }
        }
        acc as u8
    }

    pub fn pow(&self, a: u8, mut e: u32) -> u8 {
        let (mut base, mut acc) = (a, 1u8);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: u8) -> Option<u8> {
        if a == 0 {
            None
        } else {
            Some(self.pow(a, self.order() - 2))
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = u8> {
        (0..self.order()).map(|v| v as u8)
    }
}
