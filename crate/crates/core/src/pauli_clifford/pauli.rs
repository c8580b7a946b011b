use serde::{Deserialize, Serialize};

use crate::qstate::linalg::*;

/// `i^phase * prod_q X_q^{x_q} Z_q^{z_q}`. Bit `q` of the masks refers to
/// qubit `q`, with qubit 0 the most significant tensor factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliOp {
    pub n: usize,
    pub x: u64,
    pub z: u64,
    pub phase: u8,
}

impl PauliOp {
    pub fn identity(n: usize) -> Self {
        PauliOp { n, x: 0, z: 0, phase: 0 }
    }

    /// Hermitian Pauli with the given bits (each `Y` carries its factor `i`).
    pub fn hermitian(n: usize, x: u64, z: u64) -> Self {
        let phase = ((x & z).count_ones() % 4) as u8;
        PauliOp { n, x, z, phase }
    }

    /// Parses labels such as `"XIZ"`; leading `-` or `i` set the phase.
    pub fn from_label(label: &str) -> Option<Self> {
        let mut s = label;
        let mut phase = 0u8;
        if let Some(rest) = s.strip_prefix('-') {
            phase = 2;
            s = rest;
        }
        if let Some(rest) = s.strip_prefix('i') {
            phase = (phase + 1) % 4;
            s = rest;
        }
        let n = s.len();
        let (mut x, mut z) = (0u64, 0u64);
        for (q, ch) in s.chars().enumerate() {
            let bit = 1u64 << q;
            match ch {
                'I' => {}
                'X' => x |= bit,
                'Z' => z |= bit,
                'Y' => {
                    x |= bit;
                    z |= bit;
                    phase = (phase + 1) % 4;
                }
                _ => return None,
            }
        }
        Some(PauliOp { n, x, z, phase })
    }

    /// Index in `0..4^n` of the Hermitian Pauli with these bits
    /// (two bits per qubit: `x` high, `z` low; qubit 0 most significant).
    pub fn index(&self) -> usize {
        let mut idx = 0usize;
        for q in 0..self.n {
            let xb = (self.x >> q) & 1;
            let zb = (self.z >> q) & 1;
            idx = idx * 4 + (2 * xb + zb) as usize;
        }
        idx
    }

    pub fn from_index(n: usize, mut idx: usize) -> Self {
        let (mut x, mut z) = (0u64, 0u64);
        for q in (0..n).rev() {
            let d = idx % 4;
            idx /= 4;
            if d & 2 != 0 {
                x |= 1 << q;
            }
            if d & 1 != 0 {
                z |= 1 << q;
            }
        }
        PauliOp::hermitian(n, x, z)
    }

    pub fn is_identity_mod_phase(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Product `self * other` with phase tracking.
    pub fn compose(&self, other: &PauliOp) -> PauliOp {
        assert_eq!(self.n, other.n);
        // X^a Z^b X^c Z^d = (-1)^{|b & c|} X^{a+c} Z^{b+d}
        let sign = 2 * ((self.z & other.x).count_ones() % 2) as u8;
        PauliOp {
            n: self.n,
            x: self.x ^ other.x,
            z: self.z ^ other.z,
            phase: (self.phase + other.phase + sign) % 4,
        }
    }

    /// Symplectic form: 0 if the operators commute, 1 otherwise.
    pub fn symplectic(&self, other: &PauliOp) -> u32 {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2
    }

    pub fn commutes(&self, other: &PauliOp) -> bool {
        self.symplectic(other) == 0
    }

    pub fn matrix(&self) -> Mat {
        let x = Mat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let z = Mat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
        let mut m = identity(1);
        for q in 0..self.n {
            let mut f = identity(2);
            if (self.x >> q) & 1 == 1 {
                f = &f * &x;
            }
            if (self.z >> q) & 1 == 1 {
                f = &f * &z;
            }
            m = m.kronecker(&f);
        }
        let ph = [ONE, I, -ONE, -I][self.phase as usize];
        m * ph
    }

    pub fn label(&self) -> String {
        let mut phase = self.phase;
        let mut s = String::new();
        for q in 0..self.n {
            let xb = (self.x >> q) & 1;
            let zb = (self.z >> q) & 1;
            s.push(match (xb, zb) {
                (0, 0) => 'I',
                (1, 0) => 'X',
                (0, 1) => 'Z',
                _ => {
                    phase = (phase + 3) % 4;
                    'Y'
                }
            });
        }
        let prefix = ["", "i", "-", "-i"][phase as usize];
        format!("{prefix}{s}")
    }
}

/// All `4^n` Hermitian Paulis (phase quotiented), in index order.
pub fn pauli_group(n: usize) -> Vec<PauliOp> {
    (0..1usize << (2 * n)).map(|i| PauliOp::from_index(n, i)).collect()
}

/// `(1/4^|A|) sum_Q (Q (x) I) rho (Q (x) I)^dagger` on the factors `targets`.
pub fn pauli_twirl_on(rho: &Mat, dims: &[usize], targets: &[usize]) -> Mat {
    let na: usize = targets.iter().map(|&t| dims[t].trailing_zeros() as usize).sum();
    let ps = pauli_group(na);
    let w = 1.0 / ps.len() as f64;
    let kraus: Vec<Mat> = ps.iter().map(|p| p.matrix().scale(w.sqrt())).collect();
    apply_kraus_on(rho, dims, targets, &kraus)
}
