//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    /// Invalid physical argument or out-of-domain evaluation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Bad configuration file or inconsistent numerics setup.
    #[error("config error{}: {msg}", fmt_line(.line))]
    Config { line: Option<usize>, msg: String },

    /// Ensemble grew past the configured hard cap.
    #[error("resource error: {0}")]
    Resource(String),

    /// Numerical failure (step-size guard, non-finite state, ...).
    #[error("numerics error: {0}")]
    Numerics(String),

    /// Observable diagnostic could not be computed as requested.
    #[error("diagnostic error: {0}")]
    Diagnostic(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

fn fmt_line(line: &Option<usize>) -> String {
    match line {
        Some(n) => format!(" (line {n})"),
        None => String::new(),
    }
}

impl SimError {
    pub fn domain(msg: impl Into<String>) -> Self {
        SimError::Domain(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        SimError::Config { line: None, msg: msg.into() }
    }

    pub fn config_at(line: usize, msg: impl Into<String>) -> Self {
        SimError::Config { line: Some(line), msg: msg.into() }
    }

    pub fn numerics(msg: impl Into<String>) -> Self {
        SimError::Numerics(msg.into())
    }

    pub fn resource(msg: impl Into<String>) -> Self {
        SimError::Resource(msg.into())
    }

    pub fn diagnostic(msg: impl Into<String>) -> Self {
        SimError::Diagnostic(msg.into())
    }

    /// Short category tag used for CLI exit reporting.
    pub fn category(&self) -> &'static str {
        match self {
            SimError::Domain(_) => "domain",
            SimError::Config { .. } => "config",
            SimError::Resource(_) => "resource-cap",
            SimError::Numerics(_) => "numerics",
            SimError::Diagnostic(_) => "diagnostic",
            SimError::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
