//! CLI failure classification. Every error belongs to one of three
//! stages, each with its own exit code, so scripts can tell a broken
//! config from a broken dataset from a failed run.

use std::fmt;

/// Exit code for configuration problems: bad flags, unparseable or
/// invalid config files, unknown algorithm names.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code for dataset problems: missing files, schema mismatches,
/// classes too small for the requested folds or quotas.
pub const EXIT_DATA: i32 = 3;
/// Exit code for failures after inputs were accepted: training
/// divergence, unwritable outputs.
pub const EXIT_RUNTIME: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Data(String),
    Runtime(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> CliError {
        CliError::Config(msg.into())
    }

    pub fn data(err: impl fmt::Display) -> CliError {
        CliError::Data(err.to_string())
    }

    pub fn runtime(err: impl fmt::Display) -> CliError {
        CliError::Runtime(err.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Data(_) => EXIT_DATA,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "error(config): {msg}"),
            CliError::Data(msg) => write!(f, "error(data): {msg}"),
            CliError::Runtime(msg) => write!(f, "error(runtime): {msg}"),
        }
    }
}

impl std::error::Error for CliError {}
