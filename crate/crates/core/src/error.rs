use std::path::PathBuf;

use thiserror::Error;

use crate::annotation::Violation;

pub type Result<T, E = LightError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum LightError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("mask has no light pixels")]
    EmptyMask,

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{} validation violation(s); first: {}", .0.len(), .0.first().map(|v| v.to_string()).unwrap_or_default())]
    Validation(Vec<Violation>),

    #[error("keypoint conflict in scene {scene_id}, vehicle {vehicle_id}: {detail}")]
    Conflict {
        scene_id: String,
        vehicle_id: String,
        detail: String,
    },

    #[error("recall undefined: dataset has no ground truths")]
    UndefinedRecall,

    #[error("alignment error: {} prediction id(s) without label, {} label id(s) without prediction", .missing_labels.len(), .missing_predictions.len())]
    Alignment {
        missing_labels: Vec<String>,
        missing_predictions: Vec<String>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl LightError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        LightError::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LightError::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the filesystem rather than by the data.
    pub fn is_io(&self) -> bool {
        matches!(self, LightError::Io { .. } | LightError::Image { .. })
    }
}
