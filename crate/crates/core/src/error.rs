use thiserror::Error;

use crate::model::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, PartialEq)]
pub enum Error {
    #[error("node index {index} out of range for {n} nodes")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("sender and receiver must differ (both {0})")]
    SameEndpoint(usize),

    #[error("invalid node set: {}", format_violations(.0))]
    InvalidNodes(Vec<Violation>),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("coloring covers {coloring} nodes but the node set has {nodes}")]
    SizeMismatch { coloring: usize, nodes: usize },

    #[error("invalid coloring: {0}")]
    InvalidColoring(String),

    #[error("{0} requires a different instance: {1}")]
    WrongInstance(&'static str, String),

    #[error("search limits exceeded: {0}")]
    LimitsExceeded(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
