//! Sub-task state machines.
//!
//! A sub-task is stepped once per environment step with the latest
//! observation and answers with an action and its done flag. Two primitives
//! cover every plan: [`MoveSteps`] replays a fixed action for a fixed number
//! of steps, [`MoveTo`] drives a single action component at `±v` until the
//! selected scalar is within a threshold of its target. The
//! [`Stabilizer`] holds arm joints at a reference pose with one re-arming
//! `MoveTo` per joint; its output is added to the main-stream action.

mod move_steps;
mod move_to;
mod selector;
mod stabilizer;

use thiserror::Error;

use crate::action::ActionError;

pub use move_steps::MoveSteps;
pub use move_to::MoveTo;
pub use selector::{ObservationSelector, UnknownSelector};
pub use stabilizer::{Stabilizer, StabilizerConfig, STABILIZER_THRESHOLD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SubTaskStatus {
    pub done: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SubTaskError {
    #[error("sub-task stepped after it finished")]
    AlreadyDone,
    #[error("active index {index} out of range for action dimension {dim}")]
    ActiveIndexOutOfRange { index: usize, dim: usize },
    #[error("selector `{selector}` produced a non-finite value")]
    NonFiniteSelector { selector: String },
    #[error("selector `{selector}` unavailable: {reason}")]
    SelectorUnavailable { selector: String, reason: String },
    #[error("stabilizer reference pose is empty")]
    EmptyReference,
    #[error("invalid sub-task parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Action(#[from] ActionError),
}
