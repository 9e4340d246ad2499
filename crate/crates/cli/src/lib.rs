//! Library half of the `lvem` command line tool: mesh file I/O, convergence
//! and timing studies, config handling and SVG plotting. The binary in
//! `main.rs` only parses flags and dispatches here.

pub mod config;
pub mod meshio;
pub mod plot;
pub mod study;

use std::fmt;

/// Process exit codes used by the binary.
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Error carrying the exit code the binary should terminate with.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_VALIDATION,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_NUMERICAL,
            message: message.into(),
        }
    }
}

impl From<lvem_core::Error> for CliError {
    fn from(err: lvem_core::Error) -> Self {
        use lvem_core::Error as E;
        let code = match err {
            E::FitNotConverged { .. } | E::SolverFailure(_) | E::SvdFailure | E::RankZero => {
                EXIT_NUMERICAL
            }
            _ => EXIT_VALIDATION,
        };
        CliError {
            code,
            message: err.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::validation(err.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
