use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::GatewayError;

const SYSTEM_EN: &str = include_str!("../assets/prompts/system.en.md");
const SYSTEM_ZH: &str = include_str!("../assets/prompts/system.zh.md");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    En,
    Zh,
}

impl Language {
    pub const ALL: [Language; 2] = [Language::En, Language::Zh];

    pub fn code(self) -> &'static str {
        match self {
            Language::En => "en",
            Language::Zh => "zh",
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Language {
    type Err = GatewayError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "en" => Ok(Language::En),
            "zh" => Ok(Language::Zh),
            _ => Err(GatewayError::UnsupportedLanguage(s.to_owned())),
        }
    }
}

/// System prompts per language.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptAssets {
    prompts: BTreeMap<Language, String>,
}

impl Default for PromptAssets {
    fn default() -> Self {
        Self::builtin()
    }
}

impl PromptAssets {
    /// The prompts shipped with the crate.
    pub fn builtin() -> Self {
        PromptAssets {
            prompts: [
                (Language::En, SYSTEM_EN.to_owned()),
                (Language::Zh, SYSTEM_ZH.to_owned()),
            ]
            .into(),
        }
    }

    pub fn from_map(prompts: BTreeMap<Language, String>) -> Result<Self, GatewayError> {
        let assets = PromptAssets { prompts };
        assets.check()?;
        Ok(assets)
    }

    /// Reads `system.<lang>.md` for each language present in `dir`.
    pub fn from_dir(dir: &Path) -> Result<Self, GatewayError> {
        let mut prompts = BTreeMap::new();
        for lang in Language::ALL {
            let path = dir.join(format!("system.{lang}.md"));
            if !path.exists() {
                continue;
            }
            let text = std::fs::read_to_string(&path).map_err(|e| GatewayError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            prompts.insert(lang, text);
        }
        Self::from_map(prompts)
    }

    /// Every prompt is non-empty and names the three results.
    pub fn check(&self) -> Result<(), GatewayError> {
        for (lang, text) in &self.prompts {
            let name = format!("system.{lang}.md");
            if text.trim().is_empty() {
                return Err(GatewayError::InvalidAsset {
                    name,
                    message: "empty prompt".into(),
                });
            }
            for key in ["result1", "result2", "result3"] {
                if !text.contains(key) {
                    return Err(GatewayError::InvalidAsset {
                        name,
                        message: format!("prompt does not mention `{key}`"),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn system(&self, lang: Language) -> Result<&str, GatewayError> {
        self.prompts
            .get(&lang)
            .map(String::as_str)
            .ok_or_else(|| GatewayError::UnsupportedLanguage(lang.to_string()))
    }

    pub fn languages(&self) -> impl Iterator<Item = Language> + '_ {
        self.prompts.keys().copied()
    }
}
