//! Chat front-end: turns plan descriptions into [`PlanIR`](spat_core::PlanIR)
//! through a language model behind a pluggable [`Transport`].
//!
//! The [`ReplayTransport`] serves recorded exchanges keyed by a digest of the
//! request messages, so everything above the transport runs offline and
//! deterministically.

mod complete;
mod error;
mod prompts;
mod session;
mod transport;

pub use complete::{build_messages, complete, turn, CompletionConfig, TurnOutcome};
pub use error::GatewayError;
pub use prompts::{Language, PromptAssets};
pub use session::{ChatSession, Role, Turn};
pub use transport::{
    digest, CompletionRequest, Fixture, HttpTransport, Message, RecordingTransport,
    ReplayTransport, Transport, TransportError,
};
