//! Hierarchical robot manipulation from hand-written sub-task plans.
//!
//! * [`action`]: action vectors and the named slot layout.
//! * [`observation`]: robot and object state as seen by sub-tasks.
//! * [`subtasks`]: `MoveSteps`, `MoveTo` and the degenerative stabilizer.
//! * [`plans`]: the TOML plan format and the four bundled task plans.
//! * [`mockenv`]: a deterministic kinematic environment for the tasks.
//! * [`orchestrator`]: episode and batch execution.

pub mod action;
pub mod mockenv;
pub mod observation;
pub mod orchestrator;
pub mod plans;
pub mod subtasks;

pub use action::{new_action, ActionError, ActionIndexMap, ActionVector, Arm, Slot};
pub use mockenv::{EnvConfig, EnvError, MockEnv, StepOutcome, MAX_STEPS};
pub use observation::{ObjectAttributes, ObjectKind, Observation, Pose2, RobotState, TaskKind};
pub use orchestrator::{
    run_batch, run_episode, BatchSummary, EpisodeError, EpisodeErrorKind, EpisodeResult,
    SeedOutcome, StepRecord,
};
pub use plans::{builtin_plan, load_plan, Plan, PlanEntry, PlanError};
pub use subtasks::{
    MoveSteps, MoveTo, ObservationSelector, Stabilizer, StabilizerConfig, SubTaskError,
    SubTaskStatus,
};
