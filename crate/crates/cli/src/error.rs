use std::fmt;

pub const EXIT_CONFIG: i32 = 64;
pub const EXIT_IO: i32 = 74;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    /// The input is well formed but the analysis cannot proceed; carries the
    /// exit code of the corresponding report status.
    Refused(i32, String),
}

impl CliError {
    pub fn config(e: impl fmt::Display) -> CliError {
        CliError::Config(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io(_) => EXIT_IO,
            CliError::Refused(code, _) => *code,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Refused(_, m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
