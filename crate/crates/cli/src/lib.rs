//! Library behind the `circulant` binary: configuration, scenario runs,
//! figure reproduction, tuning, sweeps and ion-chain reports.

pub mod checks;
pub mod config;
pub mod csv;
pub mod figures;
pub mod ionchain;
pub mod scenario;
pub mod sweep;
pub mod tune;

use circulant_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("dispersive margin {margin:.3} below the hard limit {limit}")]
    Margin { margin: f64, limit: f64 },
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    /// 2 config, 3 non-convergence, 4 degeneracy or instability, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                CoreError::InvalidParameter { .. } | CoreError::IndexOutOfRange { .. } => 2,
                CoreError::NonConvergence { .. } => 3,
                CoreError::Degenerate { .. }
                | CoreError::Instability(_)
                | CoreError::Resonance(_)
                | CoreError::NotHermitian { .. }
                | CoreError::NotUnitary { .. } => 4,
            },
            CliError::Margin { .. } => 4,
            CliError::Io { .. } => 1,
        }
    }
}

/// Overrides coming from command-line flags.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub tolerance: Option<f64>,
    pub out: Option<std::path::PathBuf>,
    pub seed: Option<u64>,
}
