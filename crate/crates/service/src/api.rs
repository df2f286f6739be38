//! Route handlers. Facilitator routes take the facilitator key as a bearer
//! credential; participant routes (`/me/...`) take a participant token.

use std::sync::{Arc, Mutex};

use axum::extract::rejection::JsonRejection;
use axum::extract::{FromRequestParts, Path, Query, State};
use axum::http::request::Parts;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use procap_core::model::{AnswerOption, ProcessAttribute, Role};
use procap_core::reporting::render_report;
use procap_core::survey::{Participant, ParticipantProgress, RosterAssignment};
use procap_core::{
    AccessToken, Assessment, AssessmentId, AssessmentState, CapabilityLevel, MeasurementConfig, ParticipantId,
    ProcessId, ReportFormat, Store,
};
use serde::{Deserialize, Serialize};

use crate::error::ApiError;

pub type Clock = Arc<dyn Fn() -> DateTime<Utc> + Send + Sync>;

pub struct AppState {
    store: Arc<Mutex<Store>>,
    facilitator_key: String,
    clock: Clock,
}

impl AppState {
    pub fn new(store: Store, facilitator_key: impl Into<String>) -> Arc<Self> {
        Self::with_clock(store, facilitator_key, Arc::new(Utc::now))
    }

    pub fn with_clock(store: Store, facilitator_key: impl Into<String>, clock: Clock) -> Arc<Self> {
        Arc::new(Self {
            store: Arc::new(Mutex::new(store)),
            facilitator_key: facilitator_key.into(),
            clock,
        })
    }

    fn now(&self) -> DateTime<Utc> {
        (self.clock)()
    }

    /// Runs `f` against the store on the blocking pool; store writes fsync.
    async fn with_store<T, F>(&self, f: F) -> Result<T, ApiError>
    where
        T: Send + 'static,
        F: FnOnce(&mut Store) -> Result<T, ApiError> + Send + 'static,
    {
        let store = self.store.clone();
        tokio::task::spawn_blocking(move || {
            let mut guard = store.lock().map_err(|_| ApiError::internal("store lock poisoned"))?;
            f(&mut guard)
        })
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    let api = Router::new()
        .route("/assessments", post(create_assessment).get(list_assessments))
        .route("/assessments/{id}", get(get_assessment))
        .route("/assessments/{id}/participants", post(register_participant))
        .route("/assessments/{id}/open", post(open_assessment))
        .route("/assessments/{id}/close", post(close_assessment))
        .route("/assessments/{id}/progress", get(assessment_progress))
        .route("/assessments/{id}/results", get(results))
        .route("/assessments/{id}/report", post(build_report).get(get_report))
        .route("/me/questionnaire", get(my_questionnaire))
        .route("/me/responses", post(submit_response))
        .route("/me/progress", get(my_progress));
    Router::new()
        .route("/healthz", get(health))
        .nest("/api/v1", api)
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such route") })
        .with_state(state)
}

// ---- credentials ----

fn bearer(parts: &Parts) -> Option<&str> {
    let value = parts.headers.get(header::AUTHORIZATION)?.to_str().ok()?;
    let (scheme, rest) = value.split_once(' ')?;
    scheme.eq_ignore_ascii_case("bearer").then(|| rest.trim()).filter(|t| !t.is_empty())
}

fn constant_time_eq(a: &[u8], b: &[u8]) -> bool {
    a.len() == b.len() && a.iter().zip(b).fold(0u8, |acc, (x, y)| acc | (x ^ y)) == 0
}

pub struct Facilitator;

impl FromRequestParts<Arc<AppState>> for Facilitator {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &Arc<AppState>) -> Result<Self, Self::Rejection> {
        match bearer(parts) {
            Some(key) if constant_time_eq(key.as_bytes(), state.facilitator_key.as_bytes()) => Ok(Facilitator),
            _ => Err(ApiError::unauthorized()),
        }
    }
}

/// Participant token as presented; checked against the store by handlers.
pub struct ParticipantAuth(AccessToken);

impl FromRequestParts<Arc<AppState>> for ParticipantAuth {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, _: &Arc<AppState>) -> Result<Self, Self::Rejection> {
        bearer(parts)
            .map(|t| ParticipantAuth(AccessToken::from_secret(t)))
            .ok_or_else(ApiError::unauthorized)
    }
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    payload.map(|Json(v)| v).map_err(|e| ApiError::invalid(e.body_text()))
}

// ---- views ----

#[derive(Debug, Serialize, Deserialize)]
pub struct ParticipantView {
    pub id: ParticipantId,
    pub display_name: String,
    pub assignments: Vec<RosterAssignment>,
}

impl From<&Participant> for ParticipantView {
    fn from(p: &Participant) -> Self {
        Self {
            id: p.id.clone(),
            display_name: p.display_name.clone(),
            assignments: p
                .assignments
                .iter()
                .map(|(process, role)| RosterAssignment { process: process.clone(), role: *role })
                .collect(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AssessmentView {
    pub id: AssessmentId,
    pub org_profile: String,
    pub processes: Vec<ProcessId>,
    pub target_level: CapabilityLevel,
    pub state: AssessmentState,
    pub bank_fingerprint: String,
    pub created_at: DateTime<Utc>,
    pub opened_at: Option<DateTime<Utc>>,
    pub closed_at: Option<DateTime<Utc>>,
    pub reported_at: Option<DateTime<Utc>>,
    pub participants: Vec<ParticipantView>,
    pub response_count: usize,
}

impl From<&Assessment> for AssessmentView {
    fn from(a: &Assessment) -> Self {
        Self {
            id: a.id().clone(),
            org_profile: a.org_profile().to_string(),
            processes: a.processes().to_vec(),
            target_level: a.target_level(),
            state: a.state(),
            bank_fingerprint: a.bank_fingerprint().to_string(),
            created_at: a.created_at(),
            opened_at: a.opened_at(),
            closed_at: a.closed_at(),
            reported_at: a.reported_at(),
            participants: a.participants().iter().map(ParticipantView::from).collect(),
            response_count: a.response_count(),
        }
    }
}

// ---- facilitator handlers ----

#[derive(Debug, Deserialize)]
struct CreateAssessment {
    id: Option<String>,
    org_profile: String,
    processes: Vec<ProcessId>,
    target_level: Option<CapabilityLevel>,
}

async fn create_assessment(
    _: Facilitator,
    State(state): State<Arc<AppState>>,
    payload: Result<Json<CreateAssessment>, JsonRejection>,
) -> Result<(StatusCode, Json<AssessmentView>), ApiError> {
    let req = body(payload)?;
    let now = state.now();
    let view = state
        .with_store(move |s| {
            let id = match req.id {
                Some(id) if id.trim().is_empty() => return Err(ApiError::invalid("id must be non-empty")),
                Some(id) => AssessmentId(id),
                None => next_assessment_id(s),
            };
            let target = req.target_level.unwrap_or(CapabilityLevel::CL5);
            let a = s.create_assessment(id, &req.org_profile, req.processes, target, now)?;
            Ok(AssessmentView::from(a))
        })
        .await?;
    Ok((StatusCode::CREATED, Json(view)))
}

fn next_assessment_id(s: &Store) -> AssessmentId {
    let mut n = s.assessments().count() + 1;
    loop {
        let id = AssessmentId(format!("A{n:04}"));
        if s.assessment(&id).is_err() {
            return id;
        }
        n += 1;
    }
}

async fn list_assessments(_: Facilitator, State(state): State<Arc<AppState>>) -> Result<Json<Vec<AssessmentView>>, ApiError> {
    let list = state
        .with_store(|s| Ok(s.assessments().map(AssessmentView::from).collect()))
        .await?;
    Ok(Json(list))
}

async fn get_assessment(
    _: Facilitator,
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Json<AssessmentView>, ApiError> {
    let view = state
        .with_store(move |s| Ok(AssessmentView::from(s.assessment(&AssessmentId(id))?)))
        .await?;
    Ok(Json(view))
}

#[derive(Debug, Deserialize)]
struct RegisterParticipant {
    display_name: String,
    assignments: Vec<RosterAssignment>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Registered {
    pub participant: ParticipantView,
    /// Shown once; only its hash is stored.
    pub token: String,
}

async fn register_participant(
    _: Facilitator,
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    payload: Result<Json<RegisterParticipant>, JsonRejection>,
) -> Result<(StatusCode, Json<Registered>), ApiError> {
    let req = body(payload)?;
    if req.display_name.trim().is_empty() {
        return Err(ApiError::invalid("display_name must be non-empty"));
    }
    let out = state
        .with_store(move |s| {
            let pairs: Vec<(ProcessId, Role)> = req.assignments.iter().map(|a| (a.process.clone(), a.role)).collect();
            let (p, token) = s.register_participant(&AssessmentId(id), &req.display_name, &pairs)?;
            Ok(Registered { participant: ParticipantView::from(&p), token: token.expose().to_string() })
        })
        .await?;
    Ok((StatusCode::CREATED, Json(out)))
}

async fn open_assessment(
    _: Facilitator,
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Json<AssessmentView>, ApiError> {
    let now = state.now();
    let view = state
        .with_store(move |s| {
            let id = AssessmentId(id);
            s.open_assessment(&id, now)?;
            Ok(AssessmentView::from(s.assessment(&id)?))
        })
        .await?;
    Ok(Json(view))
}

async fn close_assessment(
    _: Facilitator,
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Json<AssessmentView>, ApiError> {
    let now = state.now();
    let view = state
        .with_store(move |s| {
            let id = AssessmentId(id);
            s.close_assessment(&id, now)?;
            Ok(AssessmentView::from(s.assessment(&id)?))
        })
        .await?;
    Ok(Json(view))
}

async fn assessment_progress(
    _: Facilitator,
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let snap = state
        .with_store(move |s| {
            let a = s.assessment(&AssessmentId(id))?;
            Ok(a.progress(s.bank()))
        })
        .await?;
    Ok(Json(snap).into_response())
}

async fn results(
    _: Facilitator,
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let r = state
        .with_store(move |s| Ok(s.measure(&AssessmentId(id), &MeasurementConfig::default())?))
        .await?;
    Ok(Json(r).into_response())
}

async fn build_report(
    _: Facilitator,
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let now = state.now();
    let report = state
        .with_store(move |s| Ok(s.build_report(&AssessmentId(id), &MeasurementConfig::default(), now)?))
        .await?;
    Ok((StatusCode::CREATED, Json(report)).into_response())
}

#[derive(Debug, Deserialize)]
struct FormatQuery {
    format: Option<String>,
}

async fn get_report(
    _: Facilitator,
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<FormatQuery>,
) -> Result<Response, ApiError> {
    let format: ReportFormat = q.format.as_deref().unwrap_or("structured").parse()?;
    let bytes = state
        .with_store(move |s| Ok(render_report(s.report(&AssessmentId(id))?, format)))
        .await?;
    let content_type = match format {
        ReportFormat::Structured => "application/json",
        ReportFormat::Markdown => "text/markdown; charset=utf-8",
        ReportFormat::Html => "text/html; charset=utf-8",
    };
    Ok(([(header::CONTENT_TYPE, content_type)], bytes).into_response())
}

async fn health(State(state): State<Arc<AppState>>) -> Result<Response, ApiError> {
    let fingerprint = state.with_store(|s| Ok(s.bank().fingerprint().to_string())).await?;
    Ok(Json(serde_json::json!({
        "service": "procap",
        "version": env!("CARGO_PKG_VERSION"),
        "bank_fingerprint": fingerprint,
    }))
    .into_response())
}

// ---- participant handlers ----

#[derive(Debug, Serialize, Deserialize)]
pub struct QuestionnaireItem {
    pub process: ProcessId,
    pub role: Role,
    pub question: String,
    pub attribute: ProcessAttribute,
    pub text: String,
    pub answer: Option<AnswerOption>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Questionnaire {
    pub assessment: AssessmentId,
    pub participant: ParticipantId,
    pub state: AssessmentState,
    pub items: Vec<QuestionnaireItem>,
}

async fn my_questionnaire(
    ParticipantAuth(token): ParticipantAuth,
    State(state): State<Arc<AppState>>,
) -> Result<Json<Questionnaire>, ApiError> {
    let q = state
        .with_store(move |s| {
            let (a, pid) = s.resolve_token(&token)?;
            let items = a
                .allocate_questionnaire(s.bank(), &pid)?
                .into_iter()
                .map(|q| QuestionnaireItem {
                    process: q.process.clone(),
                    role: q.role,
                    question: q.question.id.clone(),
                    attribute: q.question.attribute,
                    text: q.question.text.clone(),
                    answer: a
                        .responses()
                        .find(|r| r.participant == pid && &r.process == q.process && r.question == q.question.id)
                        .map(|r| r.answer),
                })
                .collect();
            Ok(Questionnaire { assessment: a.id().clone(), participant: pid, state: a.state(), items })
        })
        .await?;
    Ok(Json(q))
}

#[derive(Debug, Deserialize)]
struct SubmitResponse {
    process: Option<ProcessId>,
    question: String,
    answer: AnswerOption,
}

async fn submit_response(
    ParticipantAuth(token): ParticipantAuth,
    State(state): State<Arc<AppState>>,
    payload: Result<Json<SubmitResponse>, JsonRejection>,
) -> Result<Response, ApiError> {
    // A bad credential is reported as such even when the body is also bad.
    let check = AccessToken::from_secret(token.expose());
    state.with_store(move |s| s.resolve_token(&check).map(|_| ()).map_err(ApiError::from)).await?;
    let req = body(payload)?;
    let now = state.now();
    let (assessment, response) = state
        .with_store(move |s| Ok(s.submit_response(&token, req.process.as_ref(), &req.question, req.answer, now)?))
        .await?;
    Ok(Json(serde_json::json!({ "assessment": assessment, "response": response })).into_response())
}

async fn my_progress(
    ParticipantAuth(token): ParticipantAuth,
    State(state): State<Arc<AppState>>,
) -> Result<Json<ParticipantProgress>, ApiError> {
    let p = state
        .with_store(move |s| {
            let (a, pid) = s.resolve_token(&token)?;
            a.progress(s.bank())
                .participants
                .into_iter()
                .find(|p| p.participant == pid)
                .ok_or_else(|| ApiError::internal("participant missing from progress"))
        })
        .await?;
    Ok(Json(p))
}
