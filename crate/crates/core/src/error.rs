use thiserror::Error;

use crate::ntt::Order;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("argument `{0}` must be nonzero")]
    Zero(&'static str),

    #[error("modulus {0} is even; only odd moduli are supported")]
    EvenModulus(u64),

    #[error("modulus {0} is too small (must be at least 3)")]
    ModulusTooSmall(u64),

    #[error("modulus has {bits} bits, the limit for this operation is {max}")]
    ModulusTooLarge { bits: u32, max: u32 },

    #[error("{0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("bit size {bits} is out of range [{min}, {max}]")]
    BitsOutOfRange { bits: u32, min: u32, max: u32 },

    #[error("index {index} does not fit in {bits} bits")]
    IndexOutOfRange { index: usize, bits: u32 },

    #[error("no {bits}-bit prime congruent to 1 mod {step} was found")]
    PrimeNotFound { bits: u32, step: u64 },

    #[error("invalid plan: {0}")]
    InvalidPlan(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("polynomial is in {found:?} order, expected {expected:?}")]
    OrderMismatch { expected: Order, found: Order },

    #[error("unsupported transform size: {0}")]
    UnsupportedSize(String),

    #[error("coefficient {index} is {value}, not below the modulus {modulus}")]
    CoefficientOutOfRange {
        index: usize,
        value: String,
        modulus: String,
    },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
