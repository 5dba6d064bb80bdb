use thiserror::Error;

pub type Result<T> = std::result::Result<T, AopfError>;

#[derive(Debug, Error)]
pub enum AopfError {
    #[error("index {index} out of range for {len} nodes")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("self-loop on node {0} in input edge list")]
    SelfLoopInInput(usize),

    #[error("matrix is not symmetric at ({row}, {col})")]
    AsymmetricInput { row: usize, col: usize },

    #[error("shape mismatch in {op}: {detail}")]
    ShapeMismatch { op: &'static str, detail: String },

    #[error("parameter outside the Jacobi domain: {0}")]
    DomainError(String),

    #[error("dropout probability {0} not in [0, 1)")]
    InvalidProbability(f64),

    #[error("loss mask selects no nodes")]
    EmptyMask,

    #[error("label {label} of node {node} not in [0, {classes})")]
    LabelOutOfRange { node: usize, label: usize, classes: usize },

    #[error("backward called on a {rows}x{cols} value, expected a scalar")]
    NonScalarLoss { rows: usize, cols: usize },

    #[error("dataset schema: {0}")]
    SchemaError(String),

    #[error("dataset validation: {0}")]
    ValidationError(String),

    #[error("need at least {needed} nodes for {folds}-fold splitting, got {got}")]
    TooFewNodes { needed: usize, folds: usize, got: usize },

    #[error("invalid configuration: {0}")]
    ConfigError(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl AopfError {
    /// Stable variant name, printed by the CLI on runtime failures.
    pub fn kind(&self) -> &'static str {
        match self {
            AopfError::IndexOutOfRange { .. } => "IndexOutOfRange",
            AopfError::SelfLoopInInput(_) => "SelfLoopInInput",
            AopfError::AsymmetricInput { .. } => "AsymmetricInput",
            AopfError::ShapeMismatch { .. } => "ShapeMismatch",
            AopfError::DomainError(_) => "DomainError",
            AopfError::InvalidProbability(_) => "InvalidProbability",
            AopfError::EmptyMask => "EmptyMask",
            AopfError::LabelOutOfRange { .. } => "LabelOutOfRange",
            AopfError::NonScalarLoss { .. } => "NonScalarLoss",
            AopfError::SchemaError(_) => "SchemaError",
            AopfError::ValidationError(_) => "ValidationError",
            AopfError::TooFewNodes { .. } => "TooFewNodes",
            AopfError::ConfigError(_) => "ConfigError",
            AopfError::Io(_) => "IoError",
        }
    }

    pub(crate) fn shape(op: &'static str, detail: impl Into<String>) -> Self {
        AopfError::ShapeMismatch {
            op,
            detail: detail.into(),
        }
    }
}
