use std::path::PathBuf;

use thiserror::Error;

use crate::manifest::Stage;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("invalid {kind} record(s): {}", .ids.join(", "))]
    InvalidRecords {
        kind: &'static str,
        ids: Vec<String>,
    },

    #[error("duplicate id(s) in manifest: {}", .0.join(", "))]
    DuplicateIds(Vec<String>),

    #[error("{path}:{line}: manifest parse error: {message}")]
    ManifestParse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: unknown stage name `{name}`")]
    UnknownStage { path: PathBuf, name: String },

    #[error("{path}: manifest belongs to stage `{found}`, expected `{expected}`")]
    StageMismatch {
        path: PathBuf,
        expected: Stage,
        found: Stage,
    },

    #[error("{path}: config hash mismatch (manifest {found}, current {expected})")]
    HashMismatch {
        path: PathBuf,
        expected: String,
        found: String,
    },

    #[error("missing prerequisite stage `{0}`")]
    MissingPrerequisite(Stage),

    #[error("unknown chart type `{0}`")]
    UnknownChartType(String),

    #[error("unsupported chart type `{0}` for the offline script bank")]
    UnsupportedChartType(String),

    #[error("backend transport error: {0}")]
    Transport(String),

    #[error("{role} output failed validation after {attempts} attempt(s): {reason}\nlast raw output:\n{raw}")]
    Validation {
        role: &'static str,
        attempts: u32,
        reason: String,
        raw: String,
    },

    #[error(
        "data shortfall for `{chart_type}`: produced {produced} of {requested}, floor is {floor}"
    )]
    Shortfall {
        chart_type: String,
        produced: usize,
        requested: usize,
        floor: usize,
    },

    #[error("could not produce {requested} distinct styles (grid holds {grid})")]
    StyleExhausted { requested: usize, grid: usize },

    #[error("mixed chart types in composition: `{0}` vs `{1}`")]
    MixedChartTypes(String, String),

    #[error("unresolved reference: {0}")]
    Unresolved(String),

    #[error("sandbox runtime unavailable: {0}")]
    SandboxUnavailable(String),

    #[error("render failure budget exceeded: {ok} of {total} ok (need {required:.0}%); failures: {histogram}")]
    RenderBudget {
        ok: usize,
        total: usize,
        required: f64,
        histogram: String,
    },

    #[error("instance `{0}` was not accepted by the filter")]
    RejectedInstance(String),

    #[error("instance `{0}` has no description QA")]
    MissingDescription(String),

    #[error("empty question")]
    EmptyQuestion,

    #[error("dangling image reference `{0}`")]
    DanglingImage(String),

    #[error("duplicate prediction for record `{record_id}` qa {qa_index}")]
    DuplicatePrediction { record_id: String, qa_index: usize },

    #[error("prediction for record `{record_id}` qa {qa_index} does not match any benchmark QA")]
    UnknownPrediction { record_id: String, qa_index: usize },

    #[error("review decision references unknown record `{0}`")]
    UnknownReviewRecord(String),

    #[error("benchmark quota must be at least 1")]
    ZeroQuota,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::MissingPrerequisite(_) => 3,
            Error::HashMismatch { .. } => 4,
            _ => 1,
        }
    }
}
