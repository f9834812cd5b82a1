use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{kind} `{id}` not found")]
    NotFound { kind: &'static str, id: String },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("rejected: {0}")]
    Rejected(String),

    #[error("conflict: {0}")]
    Conflict(String),

    #[error("unanalyzable query {0:?}: no terms survive stop-list filtering")]
    Unanalyzable(String),

    #[error("node {0} has no queryable terms")]
    NoQueryableTerms(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("translation adapter failed: {0}")]
    Translation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn not_found(kind: &'static str, id: impl Into<String>) -> Self {
        Error::NotFound { kind, id: id.into() }
    }

    /// Stable machine-readable error code, used in API error bodies and the C ABI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotFound { .. } => "not_found",
            Error::Parse { .. } => "parse_error",
            Error::Validation(_) => "validation_error",
            Error::Rejected(_) => "rejected",
            Error::Conflict(_) => "conflict",
            Error::Unanalyzable(_) => "unanalyzable_query",
            Error::NoQueryableTerms(_) => "no_queryable_terms",
            Error::Config(_) => "config_error",
            Error::Precondition(_) => "precondition_violated",
            Error::Translation(_) => "translation_failed",
            Error::Io(_) => "io_error",
            Error::Json(_) => "json_error",
        }
    }

    /// Whether the error is attributable to caller input rather than an internal fault.
    pub fn is_user_error(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::Translation(_))
    }
}
