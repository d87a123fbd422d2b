use alloc::string::String;
use core::fmt;

/// Errors reported by the core crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A function argument lies outside the domain of the operation.
    Domain(String),
    /// An object failed its construction invariants.
    Invalid(String),
    /// `alpha` was requested at a point where the objective is not positive.
    UndefinedRatio { u: f64, value: f64 },
    /// Vectors or matrices of incompatible shapes were combined.
    DimensionMismatch { expected: usize, found: usize },
    /// The smoothing designer could not certify any ratio.
    InfeasibleDesign(String),
    /// A PSD state lost positive definiteness.
    NotPositiveDefinite,
    /// A run violated a bound that the theory guarantees.
    CertificateBreach(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Invalid(m) => write!(f, "invalid input: {m}"),
            Error::UndefinedRatio { u, value } => {
                write!(f, "ratio undefined at u = {u}: objective value {value} is not positive")
            }
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::InfeasibleDesign(m) => write!(f, "infeasible design: {m}"),
            Error::NotPositiveDefinite => f.write_str("matrix is not positive definite"),
            Error::CertificateBreach(m) => write!(f, "certificate breach: {m}"),
        }
    }
}

impl core::error::Error for Error {}
