use rand::Rng;
use serde::{Deserialize, Serialize};

use super::gf::Gf2w;
use crate::error::{LabError, Result};

/// Threshold sharing over `GF(2^w)`: party `i` (0-based) receives the
/// polynomial evaluated at `i + 1`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Shamir {
    pub parties: usize,
    pub threshold: usize,
    pub field: Gf2w,
}

impl Shamir {
    pub fn new(parties: usize, threshold: usize, field_bits: u32) -> Result<Self> {
        let field = Gf2w::new(field_bits)?;
        if field.order() as usize <= parties {
            return Err(LabError::FieldTooSmall { w: field_bits, parties });
        }
        if threshold == 0 || threshold > parties {
            return Err(LabError::InvalidParameter(format!("threshold {threshold} for {parties} parties")));
        }
        Ok(Shamir { parties, threshold, field })
    }

    /// Number of random coefficients consumed by one sharing.
    pub fn randomness_len(&self) -> usize {
        self.threshold - 1
    }

    /// Shares `secret` using the explicit higher-order coefficients.
    pub fn share_with(&self, secret: u8, coeffs: &[u8]) -> Vec<u8> {
        assert_eq!(coeffs.len(), self.randomness_len());
        (0..self.parties)
            .map(|i| {
                let x = (i + 1) as u8;
                // Horner evaluation from the top coefficient down.
                let mut acc = 0u8;
                for &c in coeffs.iter().rev() {
                    acc = self.field.add(self.field.mul(acc, x), c);
                }
                self.field.add(self.field.mul(acc, x), secret)
            })
            .collect()
    }

    pub fn share<R: Rng + ?Sized>(&self, secret: u8, rng: &mut R) -> Vec<u8> {
        let mask = (self.field.order() - 1) as u8;
        let coeffs: Vec<u8> = (0..self.randomness_len()).map(|_| rng.gen::<u8>() & mask).collect();
        self.share_with(secret, &coeffs)
    }

    /// Lagrange interpolation at zero from the first `threshold` of the
    /// given `(party, value)` pairs.
    pub fn reconstruct(&self, shares: &[(usize, u8)]) -> Result<u8> {
        if shares.len() < self.threshold {
            return Err(LabError::InvalidParameter(format!(
                "{} shares given, {} needed",
                shares.len(),
                self.threshold
            )));
        }
        let used = &shares[..self.threshold];
        let f = &self.field;
        let mut secret = 0u8;
        for (j, &(pj, vj)) in used.iter().enumerate() {
            let xj = (pj + 1) as u8;
            let mut num = 1u8;
            let mut den = 1u8;
            for (m, &(pm, _)) in used.iter().enumerate() {
                if m != j {
                    let xm = (pm + 1) as u8;
                    num = f.mul(num, xm);
                    den = f.mul(den, f.add(xm, xj));
                }
            }
            let inv = f.inv(den).ok_or_else(|| LabError::InvalidParameter("repeated party index".into()))?;
            secret = f.add(secret, f.mul(vj, f.mul(num, inv)));
        }
        Ok(secret)
    }
}
