use serde::Serialize;
use thiserror::Error;

use corrlab::billiard::BilliardError;
use corrlab::clt::CltError;
use corrlab::correlations::CorrelationError;
use corrlab::dynamics::DynamicsError;
use corrlab::regularity::RegularityError;
use corrlab::transfer::TransferError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error{}: {message}", field.as_ref().map(|f| format!(" at `{f}`")).unwrap_or_default())]
    Config {
        field: Option<String>,
        message: String,
    },
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("degenerate observable: {0}")]
    Degenerate(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Numeric(_) => 3,
            CliError::Degenerate(_) => 4,
            CliError::Io(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config { .. } => "config",
            CliError::Numeric(_) => "numeric",
            CliError::Degenerate(_) => "degenerate-observable",
            CliError::Io(_) => "io",
        }
    }

    pub fn report(&self) -> ErrorReport {
        ErrorReport {
            status: "error",
            kind: self.kind(),
            exit_code: self.exit_code(),
            field: match self {
                CliError::Config { field, .. } => field.clone(),
                _ => None,
            },
            message: self.to_string(),
        }
    }
}

/// Machine-readable failure record written to stderr and `error.json`.
#[derive(Clone, Debug, Serialize)]
pub struct ErrorReport {
    pub status: &'static str,
    pub kind: &'static str,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    pub message: String,
}

impl From<CltError> for CliError {
    fn from(e: CltError) -> Self {
        match e {
            CltError::Degenerate(m) => CliError::Degenerate(m),
            CltError::Schedule(m) => CliError::Config {
                field: Some("schedule".into()),
                message: m,
            },
            other => CliError::Numeric(other.to_string()),
        }
    }
}

macro_rules! numeric_from {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Numeric(e.to_string())
            }
        })*
    };
}

numeric_from!(
    DynamicsError,
    CorrelationError,
    TransferError,
    BilliardError,
    RegularityError,
    serde_json::Error
);

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e.to_string()))
    }
}
