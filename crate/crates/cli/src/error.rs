use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Lib(#[from] mmflaw::Error),

    /// Bad flags, config files or input paths.
    #[error("{0}")]
    Invalid(String),

    #[error("cannot read {path}: {source}")]
    Input {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn input(path: &Path, source: std::io::Error) -> Self {
        CliError::Input {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn output(path: &Path, source: std::io::Error) -> Self {
        CliError::Output {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn missing(flag: &str) -> Self {
        CliError::Invalid(format!("missing {flag} (give the flag or set it in --config)"))
    }

    /// 1 for problems with what the user asked for, 2 for failures while running.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(e) if e.is_validation() => 1,
            CliError::Invalid(_) | CliError::Input { .. } => 1,
            _ => 2,
        }
    }
}
