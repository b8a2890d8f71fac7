use serde::{Deserialize, Serialize};
use spat_core::validate::ValidationReport;
use spat_core::{ColorTable, PlanIR};

use crate::prompts::Language;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub role: Role,
    pub text: String,
    /// RFC 3339, UTC.
    pub timestamp: String,
}

/// One conversation. Turns alternate user, assistant; the system prompt is
/// not stored and is prepended when messages are built.
#[derive(Debug, Clone, PartialEq)]
pub struct ChatSession {
    pub id: String,
    pub language: Language,
    pub turns: Vec<Turn>,
    /// IR of the last assistant turn that parsed.
    pub latest_ir: Option<PlanIR>,
    pub latest_table: Option<ColorTable>,
    pub latest_report: Option<ValidationReport>,
}

impl ChatSession {
    pub fn new(language: Language) -> Self {
        Self::with_id(uuid::Uuid::new_v4().to_string(), language)
    }

    pub fn with_id(id: impl Into<String>, language: Language) -> Self {
        ChatSession {
            id: id.into(),
            language,
            turns: Vec::new(),
            latest_ir: None,
            latest_table: None,
            latest_report: None,
        }
    }

    pub(crate) fn push(&mut self, role: Role, text: &str) {
        self.turns.push(Turn {
            role,
            text: text.to_owned(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
        });
    }
}
