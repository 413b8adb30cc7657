//! CLI error classification and exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("{context}: {source}")]
    Numeric {
        context: &'static str,
        source: cswap_core::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization failed: {0}")]
    Serde(String),
}

impl CliError {
    pub fn config(path: impl Into<String>, message: impl ToString) -> Self {
        CliError::Config {
            path: path.into(),
            message: message.to_string(),
        }
    }

    /// Exit code: 2 for invalid configs, 3 for numerical preconditions that
    /// the inputs fail to satisfy, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Numeric { .. } => 3,
            _ => 1,
        }
    }

    /// A remediation hint for precondition failures.
    pub fn hint(&self) -> Option<&'static str> {
        match self {
            CliError::Numeric { source, .. } => match source {
                cswap_core::Error::OrthogonalPrePostSelection { .. } => Some(
                    "the pre- and post-selected states have vanishing overlap; weak values \
                     require Tr[rho_in rho_fin] != 0",
                ),
                cswap_core::Error::OverlapTooSmall { .. } => Some(
                    "the overlap estimate is within sampling noise; increase k or choose \
                     states with larger Tr[rho_in rho_fin]",
                ),
                cswap_core::Error::ZeroSwapOverlap { .. } => Some(
                    "the state has zero SWAP overlap (e.g. a singlet); the normalizing \
                     ratio is undefined",
                ),
                cswap_core::Error::NotATwoTimeState { .. } => {
                    Some("the functional violates positivity and corresponds to no two-time state")
                }
                _ => None,
            },
            _ => None,
        }
    }
}

/// Wrap a core error produced while executing a validated config.
pub fn numeric(context: &'static str) -> impl Fn(cswap_core::Error) -> CliError {
    move |source| CliError::Numeric { context, source }
}
