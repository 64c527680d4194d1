use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Rows missing for one label when a split cannot be satisfied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shortfall {
    pub label: String,
    pub requested: usize,
    pub available: usize,
}

impl std::fmt::Display for Shortfall {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: requested {}, available {} (short by {})",
            self.label,
            self.requested,
            self.available,
            self.requested - self.available
        )
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("header: {0}")]
    Header(String),
    #[error("line {line}: expected {expected} fields, found {found}")]
    Arity {
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: unknown label {value:?}")]
    UnknownLabel { line: u64, value: String },
    #[error("line {line}, column {column:?}: invalid value {value:?}")]
    InvalidValue {
        line: u64,
        column: String,
        value: String,
    },
    #[error("schema: {0}")]
    Schema(String),
    #[error("feature {0:?} is not in the schema")]
    UnknownFeature(String),
    #[error("label {label:?} has no mapping in the {view} view")]
    UnmappedLabel { label: String, view: String },
    #[error("insufficient rows: {}", .0.iter().map(|s| s.to_string()).collect::<Vec<_>>().join("; "))]
    Shortfall(Vec<Shortfall>),
    #[error("dataset has no records")]
    EmptyDataset,
    #[error("width mismatch: expected {expected} values, found {found}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("class counts are all zero")]
    ZeroCounts,
    #[error("no split: feature {0} has fewer than two distinct values")]
    NoSplit(usize),
    #[error("dead refinement: no positive coverage")]
    DeadRefinement,
    #[error("no records of the target class")]
    NoPositives,
    #[error("unknown class label {0:?}")]
    UnknownClass(String),
    #[error("length mismatch: {0} predictions, {1} truths")]
    LengthMismatch(usize, usize),
    #[error("metric undefined: {0}")]
    Undefined(&'static str),
    #[error("model format, line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("unknown learner {0:?}")]
    UnknownLearner(String),
    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(line: usize, msg: impl Into<String>) -> Self {
        Error::Format {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn stage(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |e| Error::Stage {
            stage,
            source: Box::new(e),
        }
    }

    /// Innermost error, looking through stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}
