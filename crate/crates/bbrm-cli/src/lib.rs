//! Experiment driver: configuration, deterministic parallel sampling, CSV and
//! JSON outputs, merging of partial runs, and the verification subcommands.

pub mod config;
pub mod output;
pub mod partial;
pub mod run;
pub mod verify;

pub use config::{Kind, RunConfig};
pub use output::{RunManifest, Table};
pub use run::{execute, merge_files, run, RunOutput};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("computation failed: {0}")]
    Numerical(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 1 usage, 2 verification or numerical failure, 3 i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Verification(_) | CliError::Numerical(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<bbrm::Error> for CliError {
    fn from(e: bbrm::Error) -> Self {
        use bbrm::Error as E;
        match e {
            E::Io(io) => CliError::Io(io),
            E::InvalidParam(_) | E::Format(_) | E::NotHermitian(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        if e.is_io() {
            CliError::Io(e.into())
        } else {
            CliError::Usage(format!("malformed json: {e}"))
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::Io(io),
            other => CliError::Io(std::io::Error::other(format!("{other:?}"))),
        }
    }
}
