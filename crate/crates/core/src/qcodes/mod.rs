//! Quantum code constructions and compilers, each exposed as a [`CodingScheme`].

pub mod bitnmc;
pub mod engine;
pub mod hiding;
pub mod keyed;
pub mod leaky;
pub mod nmc4;
pub mod pad;
pub mod scheme;

pub use bitnmc::BitNmcLocc2;
pub use engine::{KeyedAttack, KeyedSampler, KeyedShape};
pub use hiding::BellParityHiding;
pub use keyed::{bell_basis, KeyTable, KeyedTwoSplit, Tdc3, Tdc3Wiring, TdcCompiler};
pub use leaky::LeakyTwoSplit;
pub use nmc4::{sample_mock_locc4, MockLocc4, Nmc4Locc};
pub use pad::PadCompiler;
pub use scheme::{CodingScheme, SchemeDescriptor};
