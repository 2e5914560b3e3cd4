use mlz::MlzError;

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    /// A model or check did not satisfy its conditions.
    Validation(String),
    /// Malformed or inconsistent input.
    Config(String),
    /// A computation could not reach the required accuracy.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Validation(_) => 1,
            Self::Config(_) => 2,
            Self::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Validation(m) => write!(f, "validation failed: {m}"),
            Self::Config(m) => write!(f, "config error: {m}"),
            Self::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<MlzError> for CliError {
    fn from(e: MlzError) -> Self {
        use MlzError::*;
        let msg = e.to_string();
        match e {
            InvalidConfig(_) | UnknownParameter(_) | Dimension(_) => Self::Config(msg),
            DegenerateIntermediate { .. } | AmbiguousOrder(..) | PathCap(_) | NormDrift(_) => Self::Numerical(msg),
            _ => Self::Validation(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Config(format!("i/o: {e}"))
    }
}
