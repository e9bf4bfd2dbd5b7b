use std::path::PathBuf;

use thiserror::Error;

use crate::schedule::ModelRecord;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("variable index {index} is outside 1..={p}")]
    InvalidVariableIndex { index: usize, p: usize },
    #[error("records were built under different cost profiles")]
    InconsistentProfile,
    #[error("no model in the schedule fits within budget {budget}")]
    NoFeasibleModel { budget: String },
    #[error("the forest engine needs at least two variables, got {p}")]
    EngineNeedsTwoVariables { p: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("evaluation set is empty")]
    EmptyEvaluationSet,
    #[error("labels are constant; at least two classes are required")]
    DegenerateLabels,
    #[error("no feature varies; the regularization path is empty")]
    DegenerateFeatures,
    #[error("coordinate descent did not converge for class {class} at lambda {lambda}")]
    ConvergenceFailure { class: usize, lambda: f64 },
    #[error("invalid cost {0}: costs must be finite and positive")]
    InvalidCost(f64),
    #[error("a removal sequence needs at least three variables, got {p}")]
    SequenceTooShort {
        p: usize,
        full_model: Box<ModelRecord>,
    },
    #[error("exhaustive search over {p} variables exceeds the cap of {cap}")]
    ProblemTooLarge { p: usize, cap: usize },
    #[error("invalid correlation {0}: |rho| must be below 1")]
    InvalidCorrelation(f64),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("parse error at row {row}, column {col}: {msg}")]
    ParseError { row: usize, col: usize, msg: String },
    #[error("label column '{0}' not found in header")]
    UnknownLabelColumn(String),
    #[error("dataset has {n} rows; at least 5 are needed for a 60/20/20 split")]
    DatasetTooSmall { n: usize },
    #[error("smoothing needs at least 5 points, got {0}")]
    TooFewPoints(usize),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{member} sequence failed: {source}")]
    MemberFailed {
        member: &'static str,
        #[source]
        source: Box<Error>,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Coarse failure classes, used by the command line to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Computation,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidConfig(_) => ErrorKind::Usage,
            Error::InvalidVariableIndex { .. }
            | Error::InconsistentProfile
            | Error::InvalidCost(_)
            | Error::InvalidCorrelation(_)
            | Error::EmptyDataset
            | Error::ParseError { .. }
            | Error::UnknownLabelColumn(_)
            | Error::DatasetTooSmall { .. }
            | Error::DimensionMismatch { .. }
            | Error::DegenerateLabels
            | Error::DegenerateFeatures
            | Error::InvalidSchedule(_)
            | Error::Io { .. } => ErrorKind::Data,
            Error::MemberFailed { source, .. } => source.kind(),
            _ => ErrorKind::Computation,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
