use crate::transport::TransportError;

#[derive(Debug, thiserror::Error)]
pub enum GatewayError {
    #[error("no prompt asset for language `{0}`")]
    UnsupportedLanguage(String),
    #[error("prompt of {used} characters exceeds the budget of {budget}")]
    BudgetExceeded { used: usize, budget: usize },
    #[error("completion failed after {attempts} attempt(s): {source}")]
    Transport {
        attempts: u32,
        #[source]
        source: TransportError,
    },
    #[error("invalid prompt asset `{name}`: {message}")]
    InvalidAsset { name: String, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

impl GatewayError {
    pub fn code(&self) -> &'static str {
        match self {
            GatewayError::UnsupportedLanguage(_) => "unsupported-language",
            GatewayError::BudgetExceeded { .. } => "budget-exceeded",
            GatewayError::Transport { .. } => "transport-error",
            GatewayError::InvalidAsset { .. } => "invalid-asset",
            GatewayError::Io { .. } => "io-error",
        }
    }
}
