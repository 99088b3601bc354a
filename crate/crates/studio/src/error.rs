use std::io;

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StudioError {
    #[error("no session {0}")]
    UnknownSession(String),
    /// An index outside the current keypoint, control point or frame range.
    #[error("{0}")]
    OutOfRange(String),
    #[error("{message}")]
    Invalid {
        message: String,
        stage: Option<&'static str>,
        offset: Option<usize>,
    },
    #[error("invalid parameters: {}", .0.join("; "))]
    Violations(Vec<String>),
    /// The request needs an input the session does not have yet.
    #[error("{0}")]
    Missing(String),
    #[error("storage error: {0}")]
    Io(#[from] io::Error),
}

impl StudioError {
    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        StudioError::Invalid { message: message.into(), stage: None, offset: None }
    }

    pub(crate) fn stage(stage: &'static str, err: impl std::fmt::Display) -> Self {
        StudioError::Invalid { message: format!("{stage} stage failed: {err}"), stage: Some(stage), offset: None }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            StudioError::UnknownSession(_) | StudioError::OutOfRange(_) => StatusCode::NOT_FOUND,
            StudioError::Invalid { .. } | StudioError::Violations(_) => StatusCode::UNPROCESSABLE_ENTITY,
            StudioError::Missing(_) => StatusCode::CONFLICT,
            StudioError::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    stage: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    offset: Option<usize>,
    #[serde(skip_serializing_if = "<[String]>::is_empty")]
    violations: &'a [String],
}

impl IntoResponse for StudioError {
    fn into_response(self) -> Response {
        let (stage, offset, violations) = match &self {
            StudioError::Invalid { stage, offset, .. } => (*stage, *offset, &[][..]),
            StudioError::Violations(v) => (None, None, v.as_slice()),
            _ => (None, None, &[][..]),
        };
        if self.status().is_server_error() {
            log::error!("{self}");
        }
        let body = ErrorBody { error: self.to_string(), stage, offset, violations };
        (self.status(), Json(body)).into_response()
    }
}
