use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("base {0} is not a prime in 2..=31")]
    InvalidBase(u32),
    #[error("no inverse of zero")]
    NoInverse,
    #[error("digit {digit} is not in F_{base}")]
    DigitOutOfRange { digit: u32, base: u8 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("base mismatch: {0} vs {1}")]
    BaseMismatch(u8, u8),
    #[error("invalid design: {0}")]
    InvalidDesign(&'static str),
    #[error("precision exceeded: index needs {needed} digits, precision is {precision}")]
    PrecisionExceeded { needed: usize, precision: usize },
    #[error("enumeration of {0} compositions exceeds the guard")]
    EnumerationTooLarge(u128),
    #[error("requested {requested} Sobol' dimensions, table has {available}; extend direction-number table")]
    SobolTableExceeded { requested: usize, available: usize },
    #[error("malformed direction-number table at line {0}")]
    MalformedTable(usize),
    #[error("closed form unavailable for alpha = {0} (supported: 1, 2 in base 2)")]
    ClosedFormUnavailable(u32),
    #[error("median requires odd replicate count, got {0}")]
    EvenReplicateCount(usize),
    #[error("trials must be at least 1")]
    ZeroTrials,
    #[error("probability {0} is outside (0, 1)")]
    InvalidProbability(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}
