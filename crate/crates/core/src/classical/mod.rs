//! Classical building blocks: finite fields, threshold sharing, tiny
//! split-state codes with exact oracles, an ideal key functionality and
//! seeded extractors.

pub mod extractor;
pub mod gf;
pub mod ideal_key;
pub mod nmc;
pub mod shamir;

pub use extractor::{Fiber, LinearExtractor, NmExtMeasurement, SourceLaw, ToyNmExt};
pub use gf::Gf2w;
pub use ideal_key::{IdealKeyNmc, KeyTamper, TamperedKey};
pub use nmc::{nm_fit_lp, search_tiny_nmc, ClassicalNmc, CodeTable, FunctionFamily, NmGrade, NmReport, SplitFunctions};
pub use shamir::Shamir;
