//! Error type for the binary and its support modules.
//!
//! Everything that can go wrong is folded into three exit classes so scripts
//! can dispatch on the code alone: 3 for a problem with the requested inputs,
//! 4 for a solver or simulation failure, 1 for anything environmental.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// The request itself is bad: unusable parameters, a malformed config
    /// file, an out-of-domain evaluation point. Messages carry their own
    /// context, so none is added here.
    #[error("{0}")]
    Spec(String),
    /// The inputs were acceptable but a numerical routine failed.
    #[error("{0}")]
    Solver(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Process exit code for this error. Flag parsing errors exit with 2
    /// before any of this code runs, so the classes stay distinct.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Spec(_) => 3,
            CliError::Solver(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<ruinkit_core::Error> for CliError {
    fn from(e: ruinkit_core::Error) -> Self {
        use ruinkit_core::Error as E;
        match e {
            E::InvalidParams(_) | E::InvalidSpec(_) | E::Domain(_) => {
                CliError::Spec(e.to_string())
            }
            E::SolverFailure { .. } | E::Numerics { .. } | E::Internal(_) => {
                CliError::Solver(e.to_string())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ruinkit_core::Error;

    #[test]
    fn exit_codes_split_by_class() {
        let spec: CliError = Error::InvalidSpec("bad").into();
        assert_eq!(spec.exit_code(), 3);
        let domain: CliError = Error::Domain("outside").into();
        assert_eq!(domain.exit_code(), 3);
        let solver: CliError = Error::SolverFailure {
            context: "test",
            detail: "no convergence".into(),
        }
        .into();
        assert_eq!(solver.exit_code(), 4);
        let io: CliError = std::io::Error::new(std::io::ErrorKind::NotFound, "gone").into();
        assert_eq!(io.exit_code(), 1);
    }

    #[test]
    fn messages_are_single_line() {
        let e: CliError = Error::InvalidSpec("ruin level must lie below the safe level").into();
        let msg = e.to_string();
        assert!(!msg.contains('\n'));
        assert!(msg.starts_with("invalid problem specification: "));
        assert_eq!(msg.matches("specification").count(), 1);
    }
}
