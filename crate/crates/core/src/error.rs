use alloc::string::String;
use core::fmt;

/// Errors reported by the numerical routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Invalid sizes or non-finite construction parameters.
    Parameter(String),
    /// Input outside the mathematical domain of an operation.
    Domain(String),
    /// A quantity became non-finite or overflowed.
    Numeric(String),
    /// A time step violated the conservation or finiteness checks.
    StepRejected(String),
    /// The concentration guard fired during an attractive flow.
    BlowUp { time: f64, peak: f64 },
    /// The step budget ran out before the horizon was reached.
    Integration { time: f64, steps: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Parameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Numeric(msg) => write!(f, "numeric error: {msg}"),
            Error::StepRejected(msg) => write!(f, "step rejected: {msg}"),
            Error::BlowUp { time, peak } => {
                write!(f, "concentration guard fired at t = {time} (peak {peak})")
            }
            Error::Integration { time, steps } => {
                write!(f, "step budget exhausted at t = {time} after {steps} steps")
            }
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn parameter(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn numeric(msg: impl Into<String>) -> Error {
    Error::Numeric(msg.into())
}
