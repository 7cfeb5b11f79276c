use std::fmt;

use edft::EdftError;

/// Error classes mapped to exit codes: numerical failures exit 1, usage
/// and I/O problems exit 2.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Io(String),
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Numerical(_) => 1,
            Failure::Usage(_) | Failure::Io(_) => 2,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "usage",
            Failure::Io(_) => "io",
            Failure::Numerical(_) => "numerical",
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Io(m) | Failure::Numerical(m) => m,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": { "kind": self.kind(), "message": self.message() } }).to_string()
    }

    pub fn io(context: impl fmt::Display, err: impl fmt::Display) -> Self {
        Failure::Io(format!("{context}: {err}"))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind(), self.message())
    }
}

impl From<EdftError> for Failure {
    fn from(e: EdftError) -> Self {
        match e {
            EdftError::SingularOrIndefinite
            | EdftError::RecursionBreakdown { .. }
            | EdftError::NonPositiveDiagonal { .. }
            | EdftError::SingularAutocorrelation
            | EdftError::SingularQ => Failure::Numerical(e.to_string()),
            EdftError::Csv(_) => Failure::Io(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}
