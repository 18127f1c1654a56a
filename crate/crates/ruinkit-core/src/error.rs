//! Error type shared by every solver in the crate.

use alloc::string::String;
use core::fmt;

/// Everything the solvers can reject or fail on.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Market parameters violate a structural requirement (e.g. `mu <= r`).
    InvalidParams(&'static str),
    /// A problem instance is inconsistent (e.g. barrier above the ruin level).
    InvalidSpec(&'static str),
    /// An evaluation point lies outside the domain of the requested quantity.
    Domain(&'static str),
    /// An iterative method failed to converge or a bracket could not be found.
    SolverFailure {
        context: &'static str,
        detail: String,
    },
    /// A numerical routine finished but missed its accuracy target.
    Numerics {
        context: &'static str,
        achieved: f64,
        requested: f64,
    },
    /// An internal invariant was violated; indicates a bug, not bad input.
    Internal(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParams(msg) => write!(f, "invalid market parameters: {msg}"),
            Error::InvalidSpec(msg) => write!(f, "invalid problem specification: {msg}"),
            Error::Domain(msg) => write!(f, "argument outside domain: {msg}"),
            Error::SolverFailure { context, detail } => {
                write!(f, "solver failure in {context}: {detail}")
            }
            Error::Numerics {
                context,
                achieved,
                requested,
            } => write!(
                f,
                "accuracy target missed in {context}: achieved {achieved:.3e}, requested {requested:.3e}"
            ),
            Error::Internal(msg) => write!(f, "internal invariant violated: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
