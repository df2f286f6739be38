use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use procap_core::measurement::MeasurementError;
use procap_core::survey::SurveyError;
use procap_core::{ReportError, StoreError};
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub code: &'static str,
    pub message: String,
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self { status, code, message: message.into() }
    }

    pub fn unauthorized() -> Self {
        Self::new(StatusCode::UNAUTHORIZED, "unauthorized", "missing or invalid credential")
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_request", message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }

    fn conflict(message: String) -> Self {
        Self::new(StatusCode::CONFLICT, "conflict", message)
    }

    fn not_found(message: String) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody { code: self.code, message: self.message };
        (self.status, Json(body)).into_response()
    }
}

impl From<SurveyError> for ApiError {
    fn from(e: SurveyError) -> Self {
        let msg = e.to_string();
        match e {
            SurveyError::AuthError => Self::unauthorized(),
            SurveyError::InvalidState { .. } => Self::conflict(msg),
            SurveyError::BankMismatch | SurveyError::Corrupt(_) => Self::internal(msg),
            _ => Self::invalid(msg),
        }
    }
}

impl From<MeasurementError> for ApiError {
    fn from(e: MeasurementError) -> Self {
        match e {
            MeasurementError::InvalidState(_) => Self::conflict(e.to_string()),
            MeasurementError::UnknownProcess(_) => Self::invalid(e.to_string()),
            _ => Self::internal(e.to_string()),
        }
    }
}

impl From<ReportError> for ApiError {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::InvalidState(_) => Self::conflict(e.to_string()),
            ReportError::UnsupportedFormat(_) => Self::invalid(e.to_string()),
            _ => Self::internal(e.to_string()),
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::UnknownAssessment(_) | StoreError::NoReport(_) => Self::not_found(e.to_string()),
            StoreError::DuplicateAssessment(_) => Self::conflict(e.to_string()),
            StoreError::Survey(s) => s.into(),
            StoreError::Measurement(m) => m.into(),
            StoreError::Report(r) => r.into(),
            StoreError::Io(_) | StoreError::Locked(_) | StoreError::Corrupt(_) => {
                tracing::error!(error = %e, "store failure");
                Self::internal("storage failure")
            }
        }
    }
}
