use std::fmt;

/// Failure classes with distinct exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Invalid or unresolvable configuration (exit 2).
    Config(String),
    /// Training or integration produced non-finite values (exit 3).
    Divergence(String),
    /// Anything else, e.g. I/O (exit 1).
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Divergence(_) => 3,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Divergence(m) => write!(f, "divergence: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<qntk::Error> for CliError {
    fn from(e: qntk::Error) -> Self {
        use qntk::Error as E;
        match e {
            E::Divergence { step, msg } => CliError::Divergence(format!("step {step}: {msg}")),
            E::Io(_) | E::Csv(_) | E::Serde(_) => CliError::Runtime(e.to_string()),
            other => CliError::Config(other.to_string()),
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
