use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub const DEFAULT_DIM_CAP: usize = 1 << 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegKind {
    Quantum,
    Classical,
}

/// A named register. `size` counts qubits or bits; `dim` is the number of
/// basis states (quantum) or values (classical). Qudit registers such as a
/// message space extended by an abort flag have `dim` not a power of two.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register {
    pub id: String,
    pub kind: RegKind,
    pub size: usize,
    pub dim: usize,
    pub share: usize,
}

impl Register {
    pub fn qubits(id: impl Into<String>, n: usize, share: usize) -> Self {
        Register { id: id.into(), kind: RegKind::Quantum, size: n, dim: 1 << n, share }
    }

    pub fn qudit(id: impl Into<String>, dim: usize, share: usize) -> Self {
        let size = (usize::BITS - (dim.max(2) - 1).leading_zeros()) as usize;
        Register { id: id.into(), kind: RegKind::Quantum, size, dim, share }
    }

    pub fn bits(id: impl Into<String>, n: usize, share: usize) -> Self {
        Register { id: id.into(), kind: RegKind::Classical, size: n, dim: 1 << n, share }
    }

    pub fn classical_values(id: impl Into<String>, values: usize, share: usize) -> Self {
        let size = (usize::BITS - (values.max(2) - 1).leading_zeros()) as usize;
        Register { id: id.into(), kind: RegKind::Classical, size, dim: values, share }
    }

    pub fn is_quantum(&self) -> bool {
        self.kind == RegKind::Quantum
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterLayout {
    registers: Vec<Register>,
    cap: usize,
}

impl RegisterLayout {
    pub fn new(registers: Vec<Register>) -> Result<Self> {
        Self::with_cap(registers, DEFAULT_DIM_CAP)
    }

    pub fn with_cap(registers: Vec<Register>, cap: usize) -> Result<Self> {
        for (i, a) in registers.iter().enumerate() {
            if registers[..i].iter().any(|b| b.id == a.id) {
                return Err(LabError::DuplicateRegister(a.id.clone()));
            }
            if a.is_quantum() && a.dim < 2 {
                return Err(LabError::InvalidParameter(format!(
                    "quantum register `{}` must have at least one qubit",
                    a.id
                )));
            }
        }
        let layout = RegisterLayout { registers, cap };
        let dim = layout.quantum_dim();
        if dim > cap {
            return Err(LabError::DimensionCap { dim, cap });
        }
        Ok(layout)
    }

    pub fn empty() -> Self {
        RegisterLayout { registers: vec![], cap: DEFAULT_DIM_CAP }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn get(&self, id: &str) -> Result<&Register> {
        self.registers
            .iter()
            .find(|r| r.id == id)
            .ok_or_else(|| LabError::UnknownRegister(id.to_string()))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.registers.iter().any(|r| r.id == id)
    }

    pub fn quantum(&self) -> impl Iterator<Item = &Register> {
        self.registers.iter().filter(|r| r.is_quantum())
    }

    pub fn classical(&self) -> impl Iterator<Item = &Register> {
        self.registers.iter().filter(|r| !r.is_quantum())
    }

    pub fn quantum_dims(&self) -> Vec<usize> {
        self.quantum().map(|r| r.dim).collect()
    }

    pub fn quantum_dim(&self) -> usize {
        self.quantum().map(|r| r.dim).product()
    }

    /// Position of a quantum register among the quantum registers.
    pub fn quantum_index(&self, id: &str) -> Result<usize> {
        self.quantum()
            .position(|r| r.id == id)
            .ok_or_else(|| LabError::UnknownRegister(id.to_string()))
    }

    /// Position of a classical register among the classical registers.
    pub fn classical_index(&self, id: &str) -> Result<usize> {
        self.classical()
            .position(|r| r.id == id)
            .ok_or_else(|| LabError::UnknownRegister(id.to_string()))
    }

    pub fn share_of(&self, id: &str) -> Result<usize> {
        Ok(self.get(id)?.share)
    }

    /// Ids of every register assigned to `share`.
    pub fn share_ids(&self, share: usize) -> Vec<String> {
        self.registers.iter().filter(|r| r.share == share).map(|r| r.id.clone()).collect()
    }

    pub fn shares(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.registers.iter().map(|r| r.share).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// Sub-layout keeping the listed registers in layout order.
    pub fn restrict(&self, keep: &[&str]) -> Result<Self> {
        for k in keep {
            self.get(k)?;
        }
        Ok(RegisterLayout {
            registers: self.registers.iter().filter(|r| keep.contains(&r.id.as_str())).cloned().collect(),
            cap: self.cap,
        })
    }

    pub fn concat(&self, other: &Self) -> Result<Self> {
        let mut regs = self.registers.clone();
        regs.extend(other.registers.iter().cloned());
        Self::with_cap(regs, self.cap.max(other.cap))
    }

    pub fn ids(&self) -> Vec<String> {
        self.registers.iter().map(|r| r.id.clone()).collect()
    }
}
