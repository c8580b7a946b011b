use thiserror::Error;

/// Errors raised by state construction, channel application and the experiment harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("unknown register `{0}`")]
    UnknownRegister(String),
    #[error("duplicate register id `{0}`")]
    DuplicateRegister(String),
    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("quantum dimension {dim} exceeds the cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("operator is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("trace {0:.12} is not 1")]
    BadTrace(f64),
    #[error("channel is not {expected}: deviation {deviation:.3e}")]
    BadChannel { expected: &'static str, deviation: f64 },
    #[error("state is not pure")]
    NotPure,
    #[error("enumeration too large: {0}")]
    EnumerationTooLarge(String),
    #[error("ancilla budget exceeded on share {share}: {used} > {budget} qubits")]
    BudgetExceeded { share: usize, used: usize, budget: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("field too small: 2^{w} <= {parties}")]
    FieldTooSmall { w: u32, parties: usize },
    #[error("no perfectly correct candidate found")]
    NoCandidate,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("config hash mismatch: report has {recorded}, recomputed {computed}")]
    HashMismatch { recorded: String, computed: String },
    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, LabError>;
