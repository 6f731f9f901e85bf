use std::fmt;
use std::process::ExitCode;

/// Usage and configuration problems exit with 2, failures while running
/// an experiment with 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(2),
            CliError::Runtime(_) => ExitCode::from(1),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<localtime::Error> for CliError {
    fn from(e: localtime::Error) -> Self {
        use localtime::Error::*;
        match e {
            NegativeRate { .. }
            | TooSmall(_)
            | NonConservative { .. }
            | Shape(_)
            | UnknownLabel(_)
            | EmptySubset
            | Domain(_)
            | NotTridiagonal
            | NotInterval
            | NotSymmetric
            | NotSrw
            | TooEarly(_) => CliError::Usage(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}
