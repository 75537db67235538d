use std::path::{Path, PathBuf};

use radar_mot::config::ConfigError;
use radar_mot::error::FilterError;
use radar_mot::format::FormatError;
use radar_mot::pipelines::PipelineError;
use radar_mot::scenario::ScenarioError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Format {
        path: PathBuf,
        #[source]
        source: FormatError,
    },
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Pipeline(PipelineError),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn format(path: &Path, source: FormatError) -> Self {
        match source {
            FormatError::Io(e) => CliError::io(path, e),
            other => CliError::Format {
                path: path.to_path_buf(),
                source: other,
            },
        }
    }

    /// 1: bad input, 2: bad configuration, 3: internal invariant violated.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Format { .. } | CliError::Input(_) => 1,
            CliError::Config(_) | CliError::Scenario(_) => 2,
            CliError::Pipeline(PipelineError::Filter(FilterError::InvalidConfig(_))) => 2,
            CliError::Pipeline(PipelineError::Filter(_)) => 3,
            CliError::Pipeline(_) => 1,
            CliError::Internal(_) => 3,
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        CliError::Pipeline(e)
    }
}
