use thiserror::Error;

use crate::model::{Day, ElementId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("invalid stream: {0}")]
    InvalidStream(String),
    #[error("days out of range: {0}")]
    OutOfRange(String),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("bundle sequence rejected: {0}")]
    Bundle(#[from] BundleViolation),
    #[error("infeasible assignment: {0}")]
    Infeasible(#[from] FeasibilityViolation),
    #[error("problem contract violated: {0}")]
    Contract(String),
    #[error("internal invariant broken: {0}")]
    Internal(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Error {
        Error::Io(e.to_string())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BundleViolation {
    #[error("bundle {index} is out of sequence")]
    OutOfOrder { index: u32 },
    #[error("bundle {index} has {found} entries, expected {expected}")]
    NotDoubled { index: u32, expected: usize, found: usize },
    #[error("bundle {index} drops a prediction of its predecessor")]
    NotSuperset { index: u32 },
    #[error("bundle {index} predicts element {element} on day {day}, before its delivery")]
    Backdated { index: u32, element: ElementId, day: Day },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FeasibilityViolation {
    #[error("day {day} holds {count} events of one kind")]
    Crowded { day: Day, count: usize },
    #[error("element {element} is deleted on day {delete} before its insertion on day {insert}")]
    DeleteBeforeInsert { element: ElementId, insert: Day, delete: Day },
    #[error("element {element} has an unmatched deletion on day {day}")]
    OrphanDelete { element: ElementId, day: Day },
}
