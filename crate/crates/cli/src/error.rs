use fraclat::LabError;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error{}: {message}", location(.file, .line))]
    Config {
        file: Option<PathBuf>,
        line: Option<usize>,
        message: String,
    },
    #[error("{operation} failed: {source}")]
    Computation {
        operation: String,
        #[source]
        source: LabError,
    },
    #[error("cannot write {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn location(file: &Option<PathBuf>, line: &Option<usize>) -> String {
    match (file, line) {
        (Some(f), Some(l)) => format!(" at {}:{l}", f.display()),
        (Some(f), None) => format!(" in {}", f.display()),
        (None, Some(l)) => format!(" at line {l}"),
        (None, None) => String::new(),
    }
}

impl CliError {
    /// 2 for configuration problems, 1 for everything that happens after.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Computation { .. } | CliError::Io { .. } => 1,
        }
    }

    pub fn computation(operation: &str) -> impl FnOnce(LabError) -> CliError + '_ {
        move |source| CliError::Computation {
            operation: operation.to_string(),
            source,
        }
    }
}

impl From<LabError> for CliError {
    /// The operation name is filled in by the dispatcher.
    fn from(source: LabError) -> Self {
        CliError::Computation {
            operation: String::new(),
            source,
        }
    }
}

impl CliError {
    pub fn named(self, operation: &str) -> Self {
        match self {
            CliError::Computation { operation: o, source } if o.is_empty() => CliError::Computation {
                operation: operation.to_string(),
                source,
            },
            other => other,
        }
    }
}
