//! Failures and their exit codes.

use serde::Serialize;

use zzbound_core::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    /// Unparseable or inconsistent configuration.
    Config,
    /// A numerical routine did not reach its tolerance, or a flag was raised
    /// under `--strict`.
    Convergence,
    /// Anything else: I/O, internal contract violations.
    Runtime,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliError {
    pub kind: FailureKind,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partial: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_estimate: Option<f64>,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self { kind: FailureKind::Config, message: message.into(), partial: None, error_estimate: None }
    }

    pub fn convergence(message: impl Into<String>) -> Self {
        Self { kind: FailureKind::Convergence, message: message.into(), partial: None, error_estimate: None }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        Self { kind: FailureKind::Runtime, message: message.into(), partial: None, error_estimate: None }
    }

    /// Library errors caused by the inputs count as configuration errors.
    pub fn from_core(e: Error) -> Self {
        match e {
            Error::Convergence { partial, error_estimate } => Self {
                kind: FailureKind::Convergence,
                message: e.to_string(),
                partial: Some(partial),
                error_estimate: Some(error_estimate),
            },
            Error::Contract(_) => Self::runtime(e.to_string()),
            _ => Self::config(e.to_string()),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            FailureKind::Config => 2,
            FailureKind::Convergence => 3,
            FailureKind::Runtime => 1,
        }
    }

    /// One-line JSON record for stderr.
    pub fn record(&self) -> String {
        #[derive(Serialize)]
        struct Record<'a> {
            error: &'a CliError,
            exit_code: i32,
        }
        serde_json::to_string(&Record { error: self, exit_code: self.exit_code() }).expect("serializable")
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}
