//! Numerical laboratory for split-state quantum tamper-detection codes,
//! non-malleable codes and tamper-resilient secret sharing.

pub mod adversary;
pub mod analysis;
pub mod classical;
pub mod cli;
pub mod error;
pub mod pauli_clifford;
pub mod qcodes;
pub mod qstate;
pub mod sharing;

pub use error::{LabError, Result};
