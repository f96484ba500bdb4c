use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two matrices (or a matrix and a vector) are not conformable.
    Shape {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    /// A sequence does not have the expected length.
    Length {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    /// A NaN or infinite value was supplied or produced.
    NonFinite { what: &'static str },
    /// A real value lies outside the representable encoding range.
    OutOfRange { value: f64, min: f64, max: f64 },
    /// The QUBO needs more logical variables than the annealer can hold.
    Budget { required: usize, available: usize },
    /// Exhaustive search was asked for more variables than the cap allows.
    TooLarge { n_vars: usize, cap: usize },
    /// A statistic needs more samples than were provided.
    TooFewSamples { needed: usize, found: usize },
    /// The factorization input holds a negative entry.
    NegativeEntry { row: usize, col: usize, value: f64 },
    /// A configuration parameter violates its invariant.
    InvalidConfig(&'static str),
    /// A linear system could not be solved.
    Singular,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Shape { op, left, right } => write!(
                f,
                "{op}: incompatible shapes {}x{} and {}x{}",
                left.0, left.1, right.0, right.1
            ),
            Error::Length {
                what,
                expected,
                found,
            } => write!(f, "{what}: expected length {expected}, found {found}"),
            Error::NonFinite { what } => write!(f, "{what}: non-finite value"),
            Error::OutOfRange { value, min, max } => {
                write!(
                    f,
                    "value {value} outside representable range [{min}, {max}]"
                )
            }
            Error::Budget {
                required,
                available,
            } => write!(
                f,
                "problem needs {required} logical variables but only {available} are available \
                 (fully connected embedding limit)"
            ),
            Error::TooLarge { n_vars, cap } => write!(
                f,
                "exhaustive search over {n_vars} variables exceeds the cap of {cap}"
            ),
            Error::TooFewSamples { needed, found } => {
                write!(
                    f,
                    "statistic needs at least {needed} samples, found {found}"
                )
            }
            Error::NegativeEntry { row, col, value } => write!(
                f,
                "input matrix must be non-negative, found {value} at ({row}, {col})"
            ),
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::Singular => f.write_str("singular linear system"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
