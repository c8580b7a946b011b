//! Labeled-register density matrices, hybrid classical-quantum states,
//! channels, distance measures and Bell-pair machinery.

pub mod bell;
pub mod channel;
pub mod cq;
pub mod layout;
pub mod linalg;
pub mod serial;

pub use bell::{bell_accept_pure, bell_test, schmidt_structure, with_schmidt, BellTestOutcome, SchmidtProfile};
pub use channel::{Channel, ChannelKind, Instrument};
pub use cq::{canonical_purification, metrics, Assignment, CqState};
pub use layout::{RegKind, Register, RegisterLayout, DEFAULT_DIM_CAP};
pub use linalg::{Mat, Vector, C64};
pub use serial::{ChannelDesc, CqStateDesc, MatDesc};
