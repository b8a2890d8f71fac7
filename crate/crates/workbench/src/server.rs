//! HTTP session API.
//!
//! ```text
//! GET  /api/health
//! POST /api/sessions                      {"language": "en"}
//! GET  /api/sessions/{id}
//! POST /api/sessions/{id}/messages        {"text": "..."}
//! GET  /api/sessions/{id}/export/{format} json | csv | svg | text
//! POST /api/assemble                      plan IR
//! POST /api/validate                      colour table (json export)
//! ```

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use spat_core::emit::{export_with_palette, ExportFormat};
use spat_core::plan_ir::{parse_llm_output, serialize};
use spat_core::validate::{validate, ValidationReport};
use spat_core::{ColorTable, Diagnostic, IntersectionConfig, PlanIR};
use spat_gateway::{turn, ChatSession, CompletionConfig, Language, PromptAssets, Transport, Turn};

use crate::pipeline::assemble;

pub struct AppState {
    pub cfg: IntersectionConfig,
    pub assets: PromptAssets,
    pub completion: CompletionConfig,
    pub transport: Arc<dyn Transport>,
    sessions: Mutex<HashMap<String, Arc<tokio::sync::Mutex<ChatSession>>>>,
}

impl AppState {
    pub fn new(
        cfg: IntersectionConfig,
        assets: PromptAssets,
        completion: CompletionConfig,
        transport: Arc<dyn Transport>,
    ) -> Self {
        AppState {
            cfg,
            assets,
            completion,
            transport,
            sessions: Mutex::new(HashMap::new()),
        }
    }

    fn session(&self, id: &str) -> Option<Arc<tokio::sync::Mutex<ChatSession>>> {
        self.sessions
            .lock()
            .expect("session map lock")
            .get(id)
            .cloned()
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}", get(get_session))
        .route("/api/sessions/{id}/messages", post(post_message))
        .route("/api/sessions/{id}/export/{format}", get(export_table))
        .route("/api/assemble", post(assemble_ir))
        .route("/api/validate", post(validate_table))
        .with_state(state)
}

pub async fn serve(state: Arc<AppState>, port: u16) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
    axum::serve(listener, router(state)).await
}

struct ApiError {
    status: StatusCode,
    code: String,
    message: String,
    diagnostics: Vec<Diagnostic>,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code: code.to_owned(),
            message: message.into(),
            diagnostics: Vec::new(),
        }
    }

    fn no_session(id: &str) -> Self {
        Self::new(
            StatusCode::NOT_FOUND,
            "unknown-session",
            format!("no session `{id}`"),
        )
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({
            "error": {"code": self.code, "message": self.message},
            "diagnostics": self.diagnostics,
        });
        (self.status, Json(body)).into_response()
    }
}

fn table_value(table: &ColorTable) -> Value {
    serde_json::from_str(&table.to_json()).expect("table json")
}

fn ir_value(ir: &PlanIR) -> Value {
    serde_json::from_str(&serialize(ir)).expect("ir json")
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SessionView {
    id: String,
    language: Language,
    transcript: Vec<Turn>,
    ir: Option<Value>,
    cycle: Option<u32>,
    table: Option<Value>,
    report: Option<ValidationReport>,
}

fn view(s: &ChatSession) -> SessionView {
    SessionView {
        id: s.id.clone(),
        language: s.language,
        transcript: s.turns.clone(),
        ir: s.latest_ir.as_ref().map(ir_value),
        cycle: s.latest_table.as_ref().map(|t| t.cycle),
        table: s.latest_table.as_ref().map(table_value),
        report: s.latest_report.clone(),
    }
}

async fn health() -> Json<Value> {
    Json(json!({"status": "ok"}))
}

#[derive(Deserialize, Default)]
struct CreateSession {
    language: Option<String>,
}

async fn create_session(
    State(state): State<Arc<AppState>>,
    body: Bytes,
) -> Result<impl IntoResponse, ApiError> {
    let req: CreateSession = if body.iter().all(u8::is_ascii_whitespace) {
        CreateSession::default()
    } else {
        serde_json::from_slice(&body)
            .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "bad-request", e.to_string()))?
    };
    let language = match req.language {
        Some(code) => code
            .parse::<Language>()
            .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.code(), e.to_string()))?,
        None => Language::En,
    };
    state
        .assets
        .system(language)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.code(), e.to_string()))?;
    let session = ChatSession::new(language);
    let v = view(&session);
    state.sessions.lock().expect("session map lock").insert(
        session.id.clone(),
        Arc::new(tokio::sync::Mutex::new(session)),
    );
    Ok((StatusCode::CREATED, Json(v)))
}

async fn get_session(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Json<SessionView>, ApiError> {
    let s = state
        .session(&id)
        .ok_or_else(|| ApiError::no_session(&id))?;
    let guard = s.lock().await;
    Ok(Json(view(&guard)))
}

#[derive(Deserialize)]
struct PostMessage {
    text: String,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct TurnResponse {
    session: String,
    assistant: String,
    /// The plan from this turn and its assembly succeeded.
    ok: bool,
    ir: Option<Value>,
    cycle: Option<u32>,
    table: Option<Value>,
    report: Option<ValidationReport>,
    diagnostics: Vec<Diagnostic>,
}

async fn post_message(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<TurnResponse>, ApiError> {
    let s = state
        .session(&id)
        .ok_or_else(|| ApiError::no_session(&id))?;
    let req: PostMessage = serde_json::from_slice(&body)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "bad-request", e.to_string()))?;
    if req.text.trim().is_empty() {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            "bad-request",
            "empty message",
        ));
    }

    // held across the turn: one turn in flight per session
    let mut guard = s.lock().await;
    let mut session = guard.clone();
    let st = state.clone();
    let (session, result) = tokio::task::spawn_blocking(move || {
        let r = turn(
            &mut session,
            &st.assets,
            &req.text,
            &st.completion,
            st.transport.as_ref(),
        );
        (session, r)
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?;
    let outcome =
        result.map_err(|e| ApiError::new(StatusCode::BAD_GATEWAY, e.code(), e.to_string()))?;
    *guard = session;

    let mut diagnostics = outcome.warnings;
    let mut ok = false;
    match &outcome.result {
        Ok(ir) => match assemble(ir, &state.cfg) {
            Ok(a) => {
                diagnostics.extend(a.warnings);
                guard.latest_table = Some(a.table);
                guard.latest_report = Some(a.report);
                ok = true;
            }
            Err(e) => diagnostics.extend(e.all_diagnostics()),
        },
        Err(errors) => diagnostics.extend(errors.iter().cloned()),
    }
    let v = view(&guard);
    Ok(Json(TurnResponse {
        session: v.id,
        assistant: outcome.assistant,
        ok,
        ir: v.ir,
        cycle: v.cycle,
        table: v.table,
        report: v.report,
        diagnostics,
    }))
}

async fn export_table(
    State(state): State<Arc<AppState>>,
    Path((id, format)): Path<(String, String)>,
) -> Result<Response, ApiError> {
    let s = state
        .session(&id)
        .ok_or_else(|| ApiError::no_session(&id))?;
    let format: ExportFormat = format.parse().map_err(|e: spat_core::emit::EmitError| {
        ApiError::new(StatusCode::BAD_REQUEST, e.code(), e.to_string())
    })?;
    let guard = s.lock().await;
    let table = guard.latest_table.as_ref().ok_or_else(|| {
        ApiError::new(
            StatusCode::NOT_FOUND,
            "no-table",
            "the session has no assembled plan yet",
        )
    })?;
    let bytes = export_with_palette(table, format, &state.cfg.palette);
    Ok(([(header::CONTENT_TYPE, format.content_type())], bytes).into_response())
}

async fn assemble_ir(
    State(state): State<Arc<AppState>>,
    body: String,
) -> Result<Json<Value>, ApiError> {
    let parsed = parse_llm_output(&body)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.code(), e.to_string()))?;
    match assemble(&parsed.ir, &state.cfg) {
        Ok(a) => {
            let mut diagnostics = parsed.warnings;
            diagnostics.extend(a.warnings);
            Ok(Json(json!({
                "cycle": a.table.cycle,
                "table": table_value(&a.table),
                "report": a.report,
                "diagnostics": diagnostics,
            })))
        }
        Err(e) => {
            let mut err = ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.code(), e.to_string());
            err.diagnostics = e.all_diagnostics();
            Err(err)
        }
    }
}

async fn validate_table(
    State(state): State<Arc<AppState>>,
    body: String,
) -> Result<Json<ValidationReport>, ApiError> {
    let table = ColorTable::from_json(&body)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.code(), e.to_string()))?;
    Ok(Json(validate(&table, &state.cfg)))
}
