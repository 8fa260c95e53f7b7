use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde_json::{json, Value};
use thiserror::Error;
use trustscore_core::active::SessionError;
use trustscore_core::dataset::DatasetError;
use trustscore_core::model::DataError;

/// Failure while loading the service's inputs at startup.
#[derive(Debug, Error)]
pub enum StartupError {
    #[error("dataset {path}: {source}")]
    Dataset { path: String, source: DatasetError },
    #[error("scorecards {path}: {source}")]
    Scorecards { path: String, source: DatasetError },
    #[error("tweets {path}: {source}")]
    Tweets { path: String, source: DataError },
    #[error("session store {path}: {message}")]
    Store { path: String, message: String },
    #[error("cannot listen on {addr}: {source}")]
    Bind { addr: String, source: std::io::Error },
    #[error("server error: {0}")]
    Serve(std::io::Error),
}

/// An HTTP error with a JSON body `{"error": ..., ...}`.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: Value,
}

impl ApiError {
    pub fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError { status, body: json!({ "error": message.into() }) }
    }

    pub fn not_found(what: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, what)
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }

    pub fn conflict(message: impl Into<String>) -> Self {
        Self::new(StatusCode::CONFLICT, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, message)
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        match &e {
            SessionError::LabelMismatch { missing, unexpected } => ApiError {
                status: StatusCode::BAD_REQUEST,
                body: json!({ "error": e.to_string(), "missing": missing, "unexpected": unexpected }),
            },
            SessionError::InvalidConfig(_) => ApiError::bad_request(e.to_string()),
            SessionError::Completed
            | SessionError::PendingBatchExists
            | SessionError::NoPendingBatch
            | SessionError::AlreadyStarted => ApiError::conflict(e.to_string()),
            _ => ApiError::internal(e.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}
