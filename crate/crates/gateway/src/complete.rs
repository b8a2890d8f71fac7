use std::path::Path;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use spat_core::plan_ir::parse_llm_output;
use spat_core::{Diagnostic, PlanIR};

use crate::error::GatewayError;
use crate::prompts::PromptAssets;
use crate::session::{ChatSession, Role};
use crate::transport::{CompletionRequest, Message, Transport};

pub const ENV_API_KEY: &str = "SPAT_API_KEY";
pub const ENV_API_BASE: &str = "SPAT_API_BASE";
pub const ENV_MODEL: &str = "SPAT_MODEL";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase")]
pub struct CompletionConfig {
    pub endpoint: String,
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    /// Extra attempts after the first on transient failures.
    pub retries: u32,
    pub timeout_secs: u64,
    pub retry_backoff_ms: u64,
    /// Upper bound on the characters sent in one request.
    pub max_prompt_chars: Option<usize>,
    #[serde(skip_serializing)]
    pub api_key: Option<String>,
}

impl Default for CompletionConfig {
    fn default() -> Self {
        CompletionConfig {
            endpoint: "https://api.openai.com/v1".into(),
            model: "gpt-4o".into(),
            temperature: 0.7,
            max_tokens: 4096,
            retries: 2,
            timeout_secs: 120,
            retry_backoff_ms: 500,
            max_prompt_chars: None,
            api_key: None,
        }
    }
}

impl CompletionConfig {
    pub fn load(path: &Path) -> Result<Self, GatewayError> {
        let io = |message: String| GatewayError::Io {
            path: path.display().to_string(),
            message,
        };
        let text = std::fs::read_to_string(path).map_err(|e| io(e.to_string()))?;
        let cfg: CompletionConfig = serde_json::from_str(&text).map_err(|e| io(e.to_string()))?;
        cfg.check().map_err(io)?;
        Ok(cfg)
    }

    /// Applies `SPAT_API_KEY`, `SPAT_API_BASE` and `SPAT_MODEL` when set.
    pub fn with_env(mut self) -> Self {
        if let Ok(key) = std::env::var(ENV_API_KEY) {
            self.api_key = Some(key);
        }
        if let Ok(base) = std::env::var(ENV_API_BASE) {
            self.endpoint = base;
        }
        if let Ok(model) = std::env::var(ENV_MODEL) {
            self.model = model;
        }
        self
    }

    pub fn check(&self) -> Result<(), String> {
        if !(self.temperature >= 0.0) {
            return Err(format!("temperature {} is negative", self.temperature));
        }
        Ok(())
    }
}

/// System prompt, the session's turns in order, then the new user text.
pub fn build_messages(
    assets: &PromptAssets,
    session: &ChatSession,
    user_text: &str,
) -> Result<Vec<Message>, GatewayError> {
    let mut out = Vec::with_capacity(session.turns.len() + 2);
    out.push(Message::new(
        Role::System.as_str(),
        assets.system(session.language)?,
    ));
    for t in &session.turns {
        out.push(Message::new(t.role.as_str(), &t.text));
    }
    out.push(Message::new(Role::User.as_str(), user_text));
    Ok(out)
}

/// Sends the messages, retrying transient failures up to `cfg.retries` times.
pub fn complete(
    messages: &[Message],
    cfg: &CompletionConfig,
    transport: &dyn Transport,
) -> Result<String, GatewayError> {
    let used: usize = messages.iter().map(|m| m.content.chars().count()).sum();
    if let Some(budget) = cfg.max_prompt_chars {
        if used > budget {
            return Err(GatewayError::BudgetExceeded { used, budget });
        }
    }
    let request = CompletionRequest {
        model: cfg.model.clone(),
        messages: messages.to_vec(),
        temperature: cfg.temperature,
        max_tokens: cfg.max_tokens,
    };
    let mut attempts = 0;
    loop {
        attempts += 1;
        match transport.send(&request) {
            Ok(text) => return Ok(text),
            Err(e) if e.is_transient() && attempts <= cfg.retries => {
                thread::sleep(Duration::from_millis(
                    cfg.retry_backoff_ms * u64::from(attempts),
                ));
            }
            Err(source) => return Err(GatewayError::Transport { attempts, source }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TurnOutcome {
    pub assistant: String,
    /// The parsed plan, or why the reply could not be parsed.
    pub result: Result<PlanIR, Vec<Diagnostic>>,
    /// Parser warnings (unknown keys, extra result objects).
    pub warnings: Vec<Diagnostic>,
}

/// One exchange. On a parse failure the turns are still recorded and the
/// session keeps its previous plan. Transport failures leave the session
/// unchanged.
pub fn turn(
    session: &mut ChatSession,
    assets: &PromptAssets,
    user_text: &str,
    cfg: &CompletionConfig,
    transport: &dyn Transport,
) -> Result<TurnOutcome, GatewayError> {
    let messages = build_messages(assets, session, user_text)?;
    let assistant = complete(&messages, cfg, transport)?;
    session.push(Role::User, user_text);
    session.push(Role::Assistant, &assistant);
    let (result, warnings) = match parse_llm_output(&assistant) {
        Ok(out) => {
            session.latest_ir = Some(out.ir.clone());
            (Ok(out.ir), out.warnings)
        }
        Err(e) => (
            Err(vec![Diagnostic::error(
                e.code(),
                "assistant",
                e.to_string(),
            )]),
            Vec::new(),
        ),
    };
    Ok(TurnOutcome {
        assistant,
        result,
        warnings,
    })
}
