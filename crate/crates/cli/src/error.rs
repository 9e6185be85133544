use std::fmt;
use std::process::ExitCode;

use treeprobe::ErrorKind;

/// Failure of a command, carrying the process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_INPUT: u8 = 3;
pub const EXIT_INTERNAL: u8 = 4;

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    pub fn internal(err: impl fmt::Display) -> Self {
        CliError {
            code: EXIT_INTERNAL,
            message: err.to_string(),
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code)
    }
}

impl From<treeprobe::Error> for CliError {
    fn from(err: treeprobe::Error) -> Self {
        let code = match err.kind() {
            ErrorKind::Config => EXIT_CONFIG,
            ErrorKind::Input => EXIT_INPUT,
            ErrorKind::Invariant => EXIT_INTERNAL,
        };
        CliError {
            code,
            message: err.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}
