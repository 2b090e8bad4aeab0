//! Command-line front end over the core library: evolves tree controllers,
//! simulates runs into JSON reports and SVG frames, and calibrates field
//! constants, always alongside a provenance manifest.

pub mod args;
pub mod calibrate;
pub mod commands;
pub mod io;
pub mod svg;

/// Errors that terminate a command, mapped onto process exit codes:
/// usage and configuration problems exit 2, an infeasible calibration
/// sweep exits 3.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Infeasible(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Infeasible(_) => 3,
        }
    }
}

impl From<morphoevo_core::Error> for CliError {
    fn from(e: morphoevo_core::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(format!("io: {e}"))
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
