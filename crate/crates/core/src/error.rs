use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Domain { name: &'static str, reason: String },

    #[error("infeasible correlation {rho}: feasible interval is [{low}, {high}]")]
    InfeasibleCorrelation { rho: f64, low: f64, high: f64 },

    #[error("unsatisfiable tree shape: {0}")]
    TreeShape(String),

    #[error("not enough eligible queries: requested {requested}, found {available}")]
    QueryShortfall { requested: usize, available: usize },

    #[error("correlation is undefined: {0}")]
    UndefinedCorrelation(&'static str),

    #[error("target entity {0} is in the filter set")]
    TargetFiltered(u32),

    #[error("no answers to evaluate in {0} mode")]
    EmptyAnswerSet(&'static str),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
