//! Command-line front end: curves, single-record posteriors, MSE sweeps and
//! the self-check report, each written as CSV with a JSON run manifest.

pub mod args;
pub mod commands;
pub mod config;
pub mod manifest;
pub mod output;
pub mod presets;

use std::path::Path;

use args::{Cli, Command};
use manifest::RunManifest;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Numeric(tmsv_core::Error),
    #[error("{failed} sweep point(s) failed")]
    Points { failed: usize },
    #[error("{failed} verification check(s) failed")]
    Verify { failed: usize },
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
}

impl CliError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            context: path.display().to_string(),
            source,
        }
    }

    pub(crate) fn csv(e: csv::Error) -> Self {
        CliError::Io {
            context: "writing CSV".into(),
            source: e.into(),
        }
    }

    /// 1 usage, 2 numerical or capacity failure, 3 failed verification.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 1,
            CliError::Numeric(_) | CliError::Points { .. } => 2,
            CliError::Verify { .. } => 3,
        }
    }
}

impl From<tmsv_core::Error> for CliError {
    fn from(e: tmsv_core::Error) -> Self {
        match e {
            tmsv_core::Error::InvalidParameter(msg) => CliError::Usage(msg),
            other => CliError::Numeric(other),
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Signal(a) => commands::execute(&a.resolve(), a.out.as_deref()),
        Command::Fisher(a) => commands::execute(&a.resolve(), a.out.as_deref()),
        Command::Posterior(a) => commands::execute(&a.resolve()?, a.out.as_deref()),
        Command::Sweep(a) => commands::execute(&a.resolve()?, a.out.as_deref()),
        Command::Verify(a) => commands::execute(&a.resolve(), a.out.as_deref()),
        Command::Replay(a) => {
            let manifest = RunManifest::read(&a.manifest)?;
            commands::execute(&manifest.config, Some(&a.out))
        }
    }
}
