use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid config: {field}: {message}")]
    Validation { field: String, message: String },

    #[error("numeric error in {operation}{}: {source}", point_suffix(.point))]
    Numeric {
        operation: String,
        point: Option<Vec<f64>>,
        #[source]
        source: gds_core::Error,
    },

    #[error("expectation failed: {0}")]
    Expectation(String),

    #[error("unknown preset `{0}` (see `gds list-presets`)")]
    UnknownPreset(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn point_suffix(p: &Option<Vec<f64>>) -> String {
    match p {
        Some(p) => format!(" at {p:?}"),
        None => String::new(),
    }
}

impl CliError {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Validation { .. } | CliError::UnknownPreset(_) => 2,
            CliError::Numeric { .. } => 3,
            CliError::Expectation(_) => 4,
            CliError::Io { .. } => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Wraps a core error with the operation and point it came from.
pub(crate) trait NumericContext<T> {
    fn during(self, operation: &str, point: Option<&[f64]>) -> Result<T>;
}

impl<T> NumericContext<T> for gds_core::Result<T> {
    fn during(self, operation: &str, point: Option<&[f64]>) -> Result<T> {
        self.map_err(|source| CliError::Numeric {
            operation: operation.to_string(),
            point: point.map(<[f64]>::to_vec),
            source,
        })
    }
}
