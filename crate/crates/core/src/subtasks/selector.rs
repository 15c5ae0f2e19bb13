use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SubTaskError;
use crate::action::Arm;
use crate::observation::{wrap_angle, Observation};

/// Picks the scalar a `MoveTo` drives toward its target.
///
/// Finger selectors average over all arms. The `object_target_*` and
/// `target_bearing_error` selectors are expressed in the robot frame, so a
/// body-frame platform command changes them by exactly the commanded
/// displacement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ObservationSelector {
    PlatformX,
    PlatformY,
    PlatformHeight,
    PlatformYaw,
    FingerX,
    FingerY,
    FingerHeight,
    ObjectX,
    ObjectY,
    /// `(object - target) · heading`
    ObjectTargetForward,
    /// `(object - target) · left`
    ObjectTargetLateral,
    /// `wrap(yaw - bearing(platform → target))`
    TargetBearingError,
    ArmJoint {
        arm: Arm,
        joint: usize,
    },
}

impl ObservationSelector {
    pub const NAMED: [ObservationSelector; 12] = [
        ObservationSelector::PlatformX,
        ObservationSelector::PlatformY,
        ObservationSelector::PlatformHeight,
        ObservationSelector::PlatformYaw,
        ObservationSelector::FingerX,
        ObservationSelector::FingerY,
        ObservationSelector::FingerHeight,
        ObservationSelector::ObjectX,
        ObservationSelector::ObjectY,
        ObservationSelector::ObjectTargetForward,
        ObservationSelector::ObjectTargetLateral,
        ObservationSelector::TargetBearingError,
    ];

    /// Angular quantities use the wrapped difference to their target.
    pub fn is_angular(self) -> bool {
        matches!(
            self,
            ObservationSelector::PlatformYaw | ObservationSelector::TargetBearingError
        )
    }

    pub fn evaluate(self, obs: &Observation) -> Result<f64, SubTaskError> {
        let robot = &obs.robot;
        let value = match self {
            ObservationSelector::PlatformX => robot.platform_x,
            ObservationSelector::PlatformY => robot.platform_y,
            ObservationSelector::PlatformHeight => robot.platform_height,
            ObservationSelector::PlatformYaw => robot.platform_yaw,
            ObservationSelector::FingerX => self.finger(obs)?[0],
            ObservationSelector::FingerY => self.finger(obs)?[1],
            ObservationSelector::FingerHeight => self.finger(obs)?[2],
            ObservationSelector::ObjectX => obs.object.object_pose.x,
            ObservationSelector::ObjectY => obs.object.object_pose.y,
            ObservationSelector::ObjectTargetForward | ObservationSelector::ObjectTargetLateral => {
                let target = self.target(obs)?;
                let dx = obs.object.object_pose.x - target[0];
                let dy = obs.object.object_pose.y - target[1];
                let [c, s] = robot.heading();
                if self == ObservationSelector::ObjectTargetForward {
                    dx * c + dy * s
                } else {
                    -dx * s + dy * c
                }
            }
            ObservationSelector::TargetBearingError => {
                let target = self.target(obs)?;
                let bearing = (target[1] - robot.platform_y).atan2(target[0] - robot.platform_x);
                wrap_angle(robot.platform_yaw - bearing)
            }
            ObservationSelector::ArmJoint { arm, joint } => *robot
                .arm_joints
                .get(arm.index())
                .and_then(|joints| joints.get(joint))
                .ok_or_else(|| SubTaskError::SelectorUnavailable {
                    selector: self.to_string(),
                    reason: "joint not present in observation".into(),
                })?,
        };
        if !value.is_finite() {
            return Err(SubTaskError::NonFiniteSelector {
                selector: self.to_string(),
            });
        }
        Ok(value)
    }

    fn finger(self, obs: &Observation) -> Result<[f64; 3], SubTaskError> {
        if obs.robot.finger_positions.is_empty() {
            return Err(SubTaskError::SelectorUnavailable {
                selector: self.to_string(),
                reason: "no fingers in observation".into(),
            });
        }
        Ok(obs.robot.mean_finger())
    }

    fn target(self, obs: &Observation) -> Result<[f64; 2], SubTaskError> {
        obs.object
            .target_point
            .ok_or_else(|| SubTaskError::SelectorUnavailable {
                selector: self.to_string(),
                reason: "object has no target point".into(),
            })
    }
}

impl fmt::Display for ObservationSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ObservationSelector::PlatformX => "platform_x",
            ObservationSelector::PlatformY => "platform_y",
            ObservationSelector::PlatformHeight => "platform_height",
            ObservationSelector::PlatformYaw => "platform_yaw",
            ObservationSelector::FingerX => "finger_x",
            ObservationSelector::FingerY => "finger_y",
            ObservationSelector::FingerHeight => "finger_height",
            ObservationSelector::ObjectX => "object_x",
            ObservationSelector::ObjectY => "object_y",
            ObservationSelector::ObjectTargetForward => "object_target_forward",
            ObservationSelector::ObjectTargetLateral => "object_target_lateral",
            ObservationSelector::TargetBearingError => "target_bearing_error",
            ObservationSelector::ArmJoint { arm, joint } => {
                let side = match arm {
                    Arm::Left => "left",
                    Arm::Right => "right",
                };
                return write!(f, "{side}_arm_joint_{joint}");
            }
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownSelector(pub String);

impl fmt::Display for UnknownSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown selector `{}`", self.0)
    }
}

impl std::error::Error for UnknownSelector {}

impl FromStr for ObservationSelector {
    type Err = UnknownSelector;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(sel) = Self::NAMED.into_iter().find(|sel| sel.to_string() == s) {
            return Ok(sel);
        }
        match s.parse::<crate::action::Slot>() {
            Ok(crate::action::Slot::ArmJoint { arm, joint }) => {
                Ok(ObservationSelector::ArmJoint { arm, joint })
            }
            _ => Err(UnknownSelector(s.to_string())),
        }
    }
}

impl TryFrom<String> for ObservationSelector {
    type Error = UnknownSelector;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<ObservationSelector> for String {
    fn from(value: ObservationSelector) -> Self {
        value.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for sel in ObservationSelector::NAMED {
            assert_eq!(sel.to_string().parse::<ObservationSelector>().unwrap(), sel);
        }
        let joint: ObservationSelector = "right_arm_joint_4".parse().unwrap();
        assert_eq!(
            joint,
            ObservationSelector::ArmJoint {
                arm: Arm::Right,
                joint: 4
            }
        );
        assert!("handle_angle".parse::<ObservationSelector>().is_err());
        assert!("left_finger_0".parse::<ObservationSelector>().is_err());
    }
}
