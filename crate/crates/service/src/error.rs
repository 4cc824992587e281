use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;

use riskreg::RiskError;

use crate::store::StoreError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldError {
    pub code: String,
    pub field: String,
    pub message: String,
}

impl FieldError {
    pub fn new(code: &str, field: &str, message: impl Into<String>) -> Self {
        FieldError {
            code: code.into(),
            field: field.into(),
            message: message.into(),
        }
    }
}

/// Error response body: `{code, message, field?, errors?}`.
#[derive(Debug, Clone, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub code: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<FieldError>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code: code.into(),
            message: message.into(),
            field: None,
            errors: Vec::new(),
        }
    }

    pub fn with_field(mut self, field: &str) -> Self {
        self.field = Some(field.into());
        self
    }

    /// 422 carrying every field-level problem; the first one is lifted into
    /// the top-level `code`/`message`/`field`.
    pub fn validation(errors: Vec<FieldError>) -> Self {
        let first = errors
            .first()
            .cloned()
            .unwrap_or_else(|| FieldError::new("ValidationError", "", "invalid input"));
        ApiError {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            code: first.code,
            message: first.message,
            field: (!first.field.is_empty()).then_some(first.field),
            errors,
        }
    }
}

impl From<RiskError> for ApiError {
    fn from(err: RiskError) -> Self {
        let field = match &err {
            RiskError::Range { field, .. } => Some(field.to_string()),
            _ => None,
        };
        let status = match err {
            RiskError::Parse { .. } => StatusCode::BAD_REQUEST,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        ApiError {
            status,
            code: err.code().into(),
            message: err.to_string(),
            field,
            errors: Vec::new(),
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(err: StoreError) -> Self {
        match err {
            StoreError::Conflict { .. } => ApiError::new(StatusCode::CONFLICT, "RevisionConflict", err.to_string()),
            StoreError::NotFound(_) => ApiError::new(StatusCode::NOT_FOUND, "UnknownEntry", err.to_string()),
            StoreError::Duplicate(_) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "DuplicateId", err.to_string()).with_field("entry.id")
            }
            StoreError::Domain(e) => e.into(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self)).into_response()
    }
}
