use alloc::string::String;
use core::fmt;

/// Errors produced by score construction, design assembly and model fitting.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    Domain(String),
    /// A score transformation overflowed the representable range.
    Overflow {
        /// Family parameter p1 (gamma, g or epsilon) at the failure point.
        p1: f64,
        /// Family parameter p2 (delta or h) at the failure point.
        p2: f64,
    },
    /// Score spacing too small to rescale.
    DegenerateSpacing(f64),
    /// The design matrix is rank deficient; carries the aliased column name.
    RankDeficient(String),
    /// A column referenced by a term or response is missing from the frame.
    MissingColumn(String),
    /// Malformed input data (bad label, bad cell, inconsistent length).
    Data(String),
    /// Every candidate evaluation of an optimization objective was invalid.
    NoValidEvaluation,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Overflow { p1, p2 } => write!(
                f,
                "score transform overflow at parameters ({p1}, {p2})"
            ),
            Error::DegenerateSpacing(gap) => write!(
                f,
                "score spacing {gap:e} too small for anchor rescaling"
            ),
            Error::RankDeficient(name) => {
                write!(f, "design matrix is rank deficient: column '{name}' is aliased")
            }
            Error::MissingColumn(name) => write!(f, "column '{name}' not found"),
            Error::Data(msg) => write!(f, "data error: {msg}"),
            Error::NoValidEvaluation => {
                write!(f, "objective was invalid at every evaluated point")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
