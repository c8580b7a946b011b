//! Threshold sharing built on the codes: tamper-detecting triangle
//! gadgets, leakage-resilient sharing and LOCC non-malleable sharing.

pub mod gadget;
pub mod lrss;
pub mod nmss;
pub mod tdss;

pub use gadget::{GadgetInstance, GadgetRegister, PairwiseReport, Route, ShareWiseTrial};
pub use lrss::{LeakChannel, LrssErrors, LrssScheme, LrssShare};
pub use nmss::{BlindAction, ClassicalSharing, LoccNmssScheme, NmssMock, NmssRegister, NmssReport, ReductionRecord};
pub use tdss::{ComponentLaw, DecodeOutcome, DecoderThreshold, TdssMode, TdssScheme, TriangleVerdict, VerdictLaw};
