//! Scenario files, seed sweeps and report output for the `mbcast` binary.

pub mod experiment;
pub mod scenario;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Core(#[from] mbcast_core::Error),
}

impl CliError {
    /// 1 for invariant violations, 2 for bad input.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invariant(_) => 1,
            CliError::Input(_) | CliError::Core(_) => 2,
        }
    }
}
