use thiserror::Error;

use crate::model::EntityKind;

/// Violations of the canonical model's invariants.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown entity kind `{0}`")]
    UnknownKind(String),
    #[error("identifier `{id}` is not a valid {kind} id")]
    BadIdentifier { kind: EntityKind, id: String },
    #[error("invalid predicate slug `{0}`")]
    BadSlug(String),
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("domain mismatch: `{predicate}` expects a {expected} subject, found {found}")]
    DomainMismatch {
        predicate: String,
        expected: EntityKind,
        found: EntityKind,
    },
    #[error("range mismatch: `{predicate}` expects a {expected} object, found {found}")]
    RangeMismatch {
        predicate: String,
        expected: EntityKind,
        found: EntityKind,
    },
    #[error("invalid source token `{0}`")]
    BadSource(String),
    #[error("invalid PubMed id `{0}`")]
    BadPublication(String),
    #[error("invalid taxon id `{0}`")]
    BadTaxon(String),
    #[error("unknown multiplicity bucket `{0}`")]
    BadBucket(String),
    #[error("row {index}: {source}")]
    InvalidRow {
        index: usize,
        source: Box<ModelError>,
    },
}

impl ModelError {
    /// Short rejection reason for diagnostics.
    pub fn reason(&self) -> String {
        match self {
            ModelError::DomainMismatch { .. } => "domain mismatch".into(),
            ModelError::RangeMismatch { .. } => "range mismatch".into(),
            ModelError::InvalidRow { source, .. } => source.reason(),
            other => other.to_string(),
        }
    }
}
