//! Security estimators: convex-form fits of effective channels, share
//! privacy, entropies, LOCC distinguishability and the single-qubit
//! non-malleability test.

pub mod certify;
pub mod entropy;
pub mod fit;
pub mod locc;
pub mod privacy;
pub mod single_qubit;

pub use certify::{certify_dense, certify_trials, trial_rng, CertifyTarget, FitMode, SecurityReport, TrialRecord, Verdict};
pub use entropy::{entropy_suite, EntropyReport};
pub use fit::{fit_nm, fit_td, Fit};
pub use locc::{locc_bias_lower_bound, tv_distance, LoccBias};
pub use privacy::{share_group_privacy, single_share_privacy};
pub use single_qubit::{single_qubit_nm_check, QubitNmCheck};
