use super::{SubTaskError, SubTaskStatus};
use crate::action::ActionVector;
use crate::observation::Observation;

/// Emits the same action for a pre-determined number of steps.
#[derive(Debug, Clone, PartialEq)]
pub struct MoveSteps {
    fixed_action: ActionVector,
    num_steps: usize,
    steps_taken: usize,
}

impl MoveSteps {
    pub fn new(fixed_action: ActionVector, num_steps: usize) -> Result<Self, SubTaskError> {
        if num_steps == 0 {
            return Err(SubTaskError::InvalidParameter(
                "move_steps needs at least one step".into(),
            ));
        }
        Ok(Self {
            fixed_action,
            num_steps,
            steps_taken: 0,
        })
    }

    pub fn fixed_action(&self) -> &ActionVector {
        &self.fixed_action
    }

    pub fn num_steps(&self) -> usize {
        self.num_steps
    }

    pub fn steps_taken(&self) -> usize {
        self.steps_taken
    }

    pub fn is_done(&self) -> bool {
        self.steps_taken >= self.num_steps
    }

    /// The observation is not consulted; the signature matches every other
    /// sub-task.
    pub fn step(
        &mut self,
        _obs: &Observation,
    ) -> Result<(ActionVector, SubTaskStatus), SubTaskError> {
        if self.is_done() {
            return Err(SubTaskError::AlreadyDone);
        }
        let action = self.fixed_action.clone();
        self.steps_taken += 1;
        Ok((
            action,
            SubTaskStatus {
                done: self.is_done(),
            },
        ))
    }
}
