use std::path::PathBuf;

use thiserror::Error;

use crate::metrics::MetricKind;
use crate::topology::NodeId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cannot compare a {left} cost with a {right} cost")]
    MixedMetric { left: MetricKind, right: MetricKind },

    #[error("link with zero delivery product on path")]
    UnusableLink,

    #[error("link has no delay sample yet")]
    MissingDelay,

    #[error("unknown node {0}")]
    UnknownNode(NodeId),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unknown {what} `{value}`")]
    UnknownName { what: &'static str, value: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
