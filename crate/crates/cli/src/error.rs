use std::fmt;

use serde_json::json;

/// Failure classes with their process exit codes.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Precondition(semidiag::Error),
    Other(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Precondition(_) => 3,
            CliError::Other(_) => 1,
        }
    }

    pub fn status(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config-error",
            CliError::Precondition(_) => "precondition-failed",
            CliError::Other(_) => "error",
        }
    }

    /// One-line JSON report for stderr.
    pub fn to_json(&self) -> String {
        let mut v = json!({ "status": self.status(), "code": self.exit_code(), "message": self.to_string() });
        if let CliError::Precondition(e) = self {
            v["reason"] = json!(reason(e));
            if let semidiag::Error::Embedded { n, ratios } = e {
                v["n"] = json!(n);
                v["ratios"] = json!(ratios);
            }
        }
        v.to_string()
    }
}

fn reason(e: &semidiag::Error) -> &'static str {
    use semidiag::Error::*;
    match e {
        Embedded { .. } => "embedded",
        OutsideUnitCube { .. } => "outside_unit_cube",
        NonCommuting { .. } => "non_commuting",
        DiagonalizationFailed { .. } => "diagonalization_failed",
        UnreachableLevel { .. } => "unreachable_level",
        Refused(_) => "refused",
        _ => "other",
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "{m}"),
            CliError::Precondition(e) => write!(f, "{e}"),
            CliError::Other(e) => write!(f, "{e:#}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<semidiag::Error> for CliError {
    fn from(e: semidiag::Error) -> Self {
        use semidiag::Error::*;
        match e {
            InvalidPsi(_) | Parse { .. } => CliError::Config(e.to_string()),
            Embedded { .. }
            | OutsideUnitCube { .. }
            | NonCommuting { .. }
            | DiagonalizationFailed { .. }
            | UnreachableLevel { .. }
            | Refused(_) => CliError::Precondition(e),
            other => CliError::Other(other.into()),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Other(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.into())
    }
}
