use core::fmt;

/// Errors raised when constructing models, parameters or oracle inputs.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// The border interval `[1/n, 1 - 1/n]` degenerates for `n < 3`.
    ProblemSizeTooSmall { n: usize },
    /// Non-finite, non-positive or overflowing population size.
    InvalidPopulationSize { mu: f64 },
    /// A grid index outside `[0, 2m]`.
    GridIndexOutOfRange { index: u32, max: u32 },
    LengthMismatch { expected: usize, found: usize },
    /// Exhaustive enumeration is limited to small problem sizes.
    OracleTooLarge { n: usize, max: usize },
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ProblemSizeTooSmall { n } => {
                write!(f, "problem size n = {n} is too small, n must be at least 3")
            }
            Error::InvalidPopulationSize { mu } => {
                write!(f, "invalid hypothetical population size {mu}")
            }
            Error::GridIndexOutOfRange { index, max } => {
                write!(f, "grid index {index} outside [0, {max}]")
            }
            Error::LengthMismatch { expected, found } => {
                write!(f, "expected length {expected}, found {found}")
            }
            Error::OracleTooLarge { n, max } => {
                write!(f, "exact enumeration needs n <= {max}, got n = {n}")
            }
            Error::InvalidParameter { name, reason } => write!(f, "invalid {name}: {reason}"),
        }
    }
}

impl core::error::Error for Error {}
