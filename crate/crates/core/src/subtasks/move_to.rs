use super::{ObservationSelector, SubTaskError, SubTaskStatus};
use crate::action::ActionVector;
use crate::observation::{wrap_angle, Observation};

/// Bang-bang drive of one action component toward a fixed target.
///
/// Each step reads `x` through the selector, computes `d = target - x`
/// (wrapped for angular selectors), emits `+v` on the active component when
/// `d > 0` and `-v` otherwise, and only then records `done = |d| < t`. A
/// sub-task that starts converged therefore still emits one action.
#[derive(Debug, Clone, PartialEq)]
pub struct MoveTo {
    active_index: usize,
    dim: usize,
    target: f64,
    selector: ObservationSelector,
    velocity: f64,
    threshold: f64,
    done: bool,
}

impl MoveTo {
    pub fn new(
        active_index: usize,
        dim: usize,
        target: f64,
        selector: ObservationSelector,
        velocity: f64,
        threshold: f64,
    ) -> Result<Self, SubTaskError> {
        if active_index >= dim {
            return Err(SubTaskError::ActiveIndexOutOfRange {
                index: active_index,
                dim,
            });
        }
        if !(velocity > 0.0 && velocity <= 1.0) {
            return Err(SubTaskError::InvalidParameter(format!(
                "move_to velocity must lie in (0, 1], got {velocity}"
            )));
        }
        if !(threshold > 0.0 && threshold.is_finite()) {
            return Err(SubTaskError::InvalidParameter(format!(
                "move_to threshold must be positive, got {threshold}"
            )));
        }
        if !target.is_finite() {
            return Err(SubTaskError::InvalidParameter(format!(
                "move_to target must be finite, got {target}"
            )));
        }
        Ok(Self {
            active_index,
            dim,
            target,
            selector,
            velocity,
            threshold,
            done: false,
        })
    }

    pub fn active_index(&self) -> usize {
        self.active_index
    }

    pub fn target(&self) -> f64 {
        self.target
    }

    pub fn selector(&self) -> ObservationSelector {
        self.selector
    }

    pub fn velocity(&self) -> f64 {
        self.velocity
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// Signed distance `target - x` for the given observation.
    pub fn distance(&self, obs: &Observation) -> Result<f64, SubTaskError> {
        let x = self.selector.evaluate(obs)?;
        let d = self.target - x;
        Ok(if self.selector.is_angular() {
            wrap_angle(d)
        } else {
            d
        })
    }

    pub fn step(
        &mut self,
        obs: &Observation,
    ) -> Result<(ActionVector, SubTaskStatus), SubTaskError> {
        if self.done {
            return Err(SubTaskError::AlreadyDone);
        }
        let d = self.distance(obs)?;
        let mut action = ActionVector::zeros(self.dim)?;
        let command = if d > 0.0 {
            self.velocity
        } else {
            -self.velocity
        };
        action.set(self.active_index, command)?;
        self.done = d.abs() < self.threshold;
        Ok((action, SubTaskStatus { done: self.done }))
    }

    pub(crate) fn set_velocity(&mut self, velocity: f64) {
        debug_assert!(velocity > 0.0 && velocity <= 1.0);
        self.velocity = velocity;
    }

    pub(crate) fn rearm(&mut self) {
        self.done = false;
    }
}
