use thiserror::Error;

/// Error type shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid ring parameters: {0}")]
    InvalidRing(String),
    #[error("ring mismatch between operands")]
    RingMismatch,
    #[error("coefficient index {index} out of range (slot degree {degree})")]
    ExtIndexOutOfRange { index: usize, degree: usize },
    #[error("invalid encoding parameters: {0}")]
    InvalidEncoding(String),
    #[error("value {value} not encodable in range [0, {capacity})")]
    ValueOutOfRange { value: i64, capacity: u64 },
    #[error("parameter search exhausted (max_p={max_p}, max_m={max_m})")]
    SearchExhausted { max_p: u64, max_m: u64 },
    #[error("interpolation points must be pairwise distinct mod p")]
    DuplicatePoints,
    #[error("{0} interpolation points exceed the field size p={1}")]
    TooManyPoints(usize, u64),
    #[error("need f < n/2, got n={n}, f={f}")]
    InvalidTrim { n: usize, f: usize },
    #[error("median requires an odd number of inputs, got {0}")]
    EvenMedian(usize),
    #[error("need at least one input")]
    EmptyInput,
    #[error("plaintext modulus p={p} too small for n={n} rank interpolation points")]
    ModulusTooSmallForRanks { p: u64, n: usize },
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("subsample size 2f+1={want} exceeds n={n}")]
    SubsampleTooLarge { want: usize, n: usize },
    #[error("idx parse error: {0}")]
    IdxFormat(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
