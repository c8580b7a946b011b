//! Pauli operators in symplectic form, Clifford enumeration and sampling,
//! keyed unitary families and the twirl identities they satisfy.

pub mod clifford;
pub mod pauli;
pub mod twirl;

pub use clifford::{
    clifford_group, enumerate_group, random_clifford, CliffordOp, CliffordSource, DesignGrade, GroupKind,
    KeyedUnitaryFamily,
};
pub use pauli::{pauli_group, PauliOp};
pub use twirl::{
    clifford_pq_twirl, clifford_pq_twirl_closed_form, clifford_twirled_attack, pauli_one_design_twirl,
    transpose_trick_check, twirl_with_side_info, TwirlDecomposition,
};
