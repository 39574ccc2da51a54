use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("no session with id `{0}`")]
    NotFound(String),
    #[error("invalid session config: {0}")]
    InvalidConfig(String),
    #[error("no query is pending; fetch one first")]
    NoPendingQuery,
    #[error("session is busy with another request")]
    Busy,
    #[error("invalid request: {0}")]
    BadRequest(String),
    #[error("grid must be at least 2, got {0}")]
    InvalidGrid(usize),
    #[error("{0}")]
    Unsupported(String),
    #[error("stored session is corrupt: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Model(#[from] prefgp::Error),
    #[error("storage: {0}")]
    Io(#[from] std::io::Error),
    #[error("stored session is unreadable: {0}")]
    Json(#[from] serde_json::Error),
}

/// Error payload returned by every endpoint.
#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub code: &'static str,
    pub message: String,
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::NotFound(_) => "not_found",
            ServiceError::InvalidConfig(_) => "invalid_config",
            ServiceError::NoPendingQuery => "no_pending_query",
            ServiceError::Busy => "conflict",
            ServiceError::BadRequest(_) => "bad_request",
            ServiceError::InvalidGrid(_) => "invalid_grid",
            ServiceError::Unsupported(_) => "unsupported",
            ServiceError::Corrupt(_) => "corrupt_session",
            ServiceError::Model(_) => "model_error",
            ServiceError::Io(_) | ServiceError::Json(_) => "storage_error",
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::InvalidConfig(_) | ServiceError::BadRequest(_) | ServiceError::InvalidGrid(_) => {
                StatusCode::BAD_REQUEST
            }
            ServiceError::NoPendingQuery | ServiceError::Busy => StatusCode::CONFLICT,
            ServiceError::Unsupported(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::Corrupt(_) | ServiceError::Model(_) | ServiceError::Io(_) | ServiceError::Json(_) => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = self.status();
        if status.is_server_error() {
            log::error!("{self}");
        }
        (status, Json(ErrorBody { code: self.code(), message: self.to_string() })).into_response()
    }
}
