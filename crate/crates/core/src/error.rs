use thiserror::Error;

use crate::task_model::NodeId;
use crate::validation::ValidationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown node `{0}`")]
    UnknownNode(NodeId),
    #[error("`{0}` is a task node, expected an action")]
    NotAnAction(NodeId),
    #[error("`{0}` is an action node, expected a task")]
    NotATask(NodeId),
    #[error("invalid child selection for task `{task}`: {reason}")]
    InvalidChoice { task: NodeId, reason: String },
    #[error("no outcome supplied for child `{0}`")]
    MissingChildOutcome(NodeId),
    #[error("unservable action `{0}`: no robot in the team can perform it")]
    Unservable(NodeId),
    #[error("task `{task}` would combine {candidates} alternatives before pruning (cap {cap})")]
    ResourceCap { task: NodeId, candidates: u128, cap: usize },
    #[error("invalid criteria: {0}")]
    InvalidCriteria(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid scheduling problem: {0}")]
    InvalidProblem(String),
    #[error("invalid genotype: {0}")]
    InvalidGenotype(String),
    #[error("cross-schedule deadlock: {0} action(s) can never start")]
    Deadlock(usize),
    #[error("operator sets differ between the merged statistics")]
    MismatchedOperators,
    #[error("mission tree failed validation:\n{0}")]
    Validation(ValidationReport),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<toml::de::Error> for Error {
    fn from(e: toml::de::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
