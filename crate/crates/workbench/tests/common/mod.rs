#![allow(dead_code)]

pub mod oracle;

use std::fs;
use std::path::{Path, PathBuf};

use std::collections::VecDeque;
use std::sync::Mutex;

use spat_gateway::{
    turn, ChatSession, CompletionConfig, CompletionRequest, Fixture, Language, PromptAssets,
    Transport, TransportError,
};
use spat_workbench::dataset::BenchCase;

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn cases_dir() -> PathBuf {
    corpus_dir().join("cases")
}

pub fn replay_dir() -> PathBuf {
    corpus_dir().join("replay")
}

pub fn updating(var: &str) -> bool {
    std::env::var(var).is_ok_and(|v| v == "1")
}

/// Recorded assistant replies, one per user turn.
pub fn recorded_replies(case: &BenchCase) -> Vec<String> {
    (1..=case.turns().len())
        .map(|i| {
            let p = case.dir.join("recorded").join(format!("turn{i}.txt"));
            fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
        })
        .collect()
}

/// Answers each request with the next scripted reply and keeps the requests.
pub struct Scripted {
    replies: Mutex<VecDeque<String>>,
    pub seen: Mutex<Vec<CompletionRequest>>,
}

impl Scripted {
    pub fn new(replies: impl IntoIterator<Item = String>) -> Self {
        Scripted {
            replies: Mutex::new(replies.into_iter().collect()),
            seen: Mutex::new(Vec::new()),
        }
    }
}

impl Transport for Scripted {
    fn send(&self, req: &CompletionRequest) -> Result<String, TransportError> {
        self.seen.lock().unwrap().push(req.clone());
        self.replies
            .lock()
            .unwrap()
            .pop_front()
            .ok_or_else(|| TransportError::Malformed("script exhausted".into()))
    }
}

/// Runs the recorded conversation through the gateway and returns one
/// fixture per turn.
pub fn fixtures_for(case: &BenchCase, assets: &PromptAssets) -> Vec<Fixture> {
    let replies = recorded_replies(case);
    let script = Scripted::new(replies.clone());
    let cfg = CompletionConfig::default();
    let mut session = ChatSession::with_id(case.id.clone(), case.meta.language);
    for text in case.turns() {
        turn(&mut session, assets, text, &cfg, &script).expect("scripted turn");
    }
    let seen = script.seen.into_inner().unwrap();
    seen.into_iter()
        .zip(replies)
        .map(|(req, reply)| Fixture::new(req.messages, reply))
        .collect()
}

pub fn language_name(l: Language) -> &'static str {
    l.code()
}
