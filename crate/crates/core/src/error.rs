use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid radar configuration: {0}")]
    InvalidConfig(String),

    #[error("scatterer {index} is outside the unambiguous window: {reason}")]
    OutOfWindow { index: usize, reason: String },

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("training set is empty")]
    EmptyTrainingSet,

    #[error("cannot retain {d} principal components from a {rows}x{cols} training matrix")]
    PcaDimension { d: usize, rows: usize, cols: usize },

    #[error("training matrix is rank deficient: component {index} has zero variance")]
    RankDeficient { index: usize },

    #[error("pooled training variance is zero; gamma=\"scale\" is undefined")]
    ZeroVariance,

    #[error("{0} qubits exceeds the statevector limit of {max}", max = crate::kernels::MAX_QUBITS)]
    TooManyQubits(usize),

    #[error("SMO did not converge within {iterations} iterations (worst KKT violation {violation:.3e})")]
    NoConvergence { iterations: usize, violation: f64 },

    #[error("class {class} has no rows in the {partition} partition")]
    MissingClass { class: usize, partition: &'static str },

    #[error("benchmark cell {cell} failed: {source}")]
    Cell {
        cell: String,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed manifest {path}: {reason}")]
    Manifest { path: PathBuf, reason: String },

    #[error("malformed report {path}: {reason}")]
    Report { path: PathBuf, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
