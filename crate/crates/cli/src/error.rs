use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config syntax error: {message}")]
    ConfigSyntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("io error on {}: {message}", path.display())]
    Io { path: PathBuf, message: String },

    #[error(transparent)]
    Core(#[from] polaron_core::Error),
}

impl CliError {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }

    pub fn position(&self) -> Option<(usize, usize)> {
        match self {
            CliError::ConfigSyntax { line, column, .. } => Some((*line, *column)),
            _ => None,
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            CliError::ConfigSyntax { .. } => "config-syntax",
            CliError::Config { .. } => "config",
            CliError::Io { .. } => "io",
            CliError::Core(e) => e.category(),
        }
    }

    /// Distinct per category; 2 is left to argument parsing.
    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "config-syntax" => 3,
            "config" => 4,
            "io" => 5,
            "parameter" => 10,
            "domain" => 11,
            "numerical" => 12,
            "convergence" => 13,
            "empty-basis" => 14,
            "budget" => 15,
            "non-degeneracy" => 16,
            "singular" => 17,
            "consistency" => 18,
            _ => 1,
        }
    }
}
