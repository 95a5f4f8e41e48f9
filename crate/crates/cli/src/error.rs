use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {msg}", path = path.display())]
    Config { path: PathBuf, msg: String },

    #[error("{path}:{line}: experiment {index} `{name}`: {msg}", path = path.display())]
    Invalid {
        path: PathBuf,
        line: usize,
        index: usize,
        name: String,
        msg: String,
    },

    #[error("experiment `{name}`: {source}")]
    Solver {
        name: String,
        #[source]
        source: spectral_core::Error,
    },

    #[error("output {path}: {source}", path = path.display())]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for configuration and output problems, 3 for solver failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Solver { .. } => 3,
            _ => 2,
        }
    }
}
