//! Normalized action vectors and the named slot layout that indexes them.
//!
//! Every component of a command sent to the robot is a unitless velocity in
//! `[-1, +1]`. Sub-tasks build vectors freely (the stabilizer output is added
//! on top of the main-stream action), and [`ActionVector::clamp`] is applied
//! exactly once, right before the environment consumes the command.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ActionError {
    #[error("action dimension must be positive")]
    ZeroDimension,
    #[error("action dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("unknown action slot `{0}`")]
    UnknownSlot(String),
}

/// A fixed-dimension command vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionVector(Vec<f64>);

impl ActionVector {
    /// The all-zero vector of the given dimension.
    pub fn zeros(dim: usize) -> Result<Self, ActionError> {
        if dim == 0 {
            return Err(ActionError::ZeroDimension);
        }
        Ok(Self(vec![0.0; dim]))
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self, ActionError> {
        if values.is_empty() {
            return Err(ActionError::ZeroDimension);
        }
        Ok(Self(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, index: usize) -> Option<f64> {
        self.0.get(index).copied()
    }

    /// Sets one component. Out-of-range indices are reported, not ignored.
    pub fn set(&mut self, index: usize, value: f64) -> Result<(), ActionError> {
        let dim = self.dim();
        match self.0.get_mut(index) {
            Some(slot) => {
                *slot = value;
                Ok(())
            }
            None => Err(ActionError::DimensionMismatch {
                expected: dim,
                actual: index + 1,
            }),
        }
    }

    /// Component-wise saturation to `[-1, +1]`.
    pub fn clamp(&self) -> Self {
        Self(self.0.iter().map(|v| v.clamp(-1.0, 1.0)).collect())
    }

    /// Component-wise sum. The result is not clamped.
    pub fn add(&self, other: &ActionVector) -> Result<Self, ActionError> {
        if self.dim() != other.dim() {
            return Err(ActionError::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(Self(
            self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect(),
        ))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|v| *v == 0.0)
    }

    /// Indices of the non-zero components.
    pub fn support(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Shorthand for [`ActionVector::zeros`].
pub fn new_action(dim: usize) -> Result<ActionVector, ActionError> {
    ActionVector::zeros(dim)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    Left,
    Right,
}

impl Arm {
    pub const ALL: [Arm; 2] = [Arm::Left, Arm::Right];

    pub fn index(self) -> usize {
        match self {
            Arm::Left => 0,
            Arm::Right => 1,
        }
    }

    pub fn from_index(index: usize) -> Option<Arm> {
        match index {
            0 => Some(Arm::Left),
            1 => Some(Arm::Right),
            _ => None,
        }
    }

    fn prefix(self) -> &'static str {
        match self {
            Arm::Left => "left",
            Arm::Right => "right",
        }
    }
}

/// A named position in the action vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    PlatformX,
    PlatformY,
    PlatformRotation,
    PlatformHeight,
    ArmJoint { arm: Arm, joint: usize },
    Finger { arm: Arm, finger: usize },
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::PlatformX => f.write_str("platform_x"),
            Slot::PlatformY => f.write_str("platform_y"),
            Slot::PlatformRotation => f.write_str("platform_rotation"),
            Slot::PlatformHeight => f.write_str("platform_height"),
            Slot::ArmJoint { arm, joint } => write!(f, "{}_arm_joint_{joint}", arm.prefix()),
            Slot::Finger { arm, finger } => write!(f, "{}_finger_{finger}", arm.prefix()),
        }
    }
}

impl FromStr for Slot {
    type Err = ActionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || ActionError::UnknownSlot(s.to_string());
        match s {
            "platform_x" => return Ok(Slot::PlatformX),
            "platform_y" => return Ok(Slot::PlatformY),
            "platform_rotation" => return Ok(Slot::PlatformRotation),
            "platform_height" => return Ok(Slot::PlatformHeight),
            _ => {}
        }
        let (arm, rest) = if let Some(rest) = s.strip_prefix("left_") {
            (Arm::Left, rest)
        } else if let Some(rest) = s.strip_prefix("right_") {
            (Arm::Right, rest)
        } else {
            return Err(unknown());
        };
        let parse_index = |digits: &str| -> Result<usize, ActionError> {
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(unknown());
            }
            digits.parse().map_err(|_| unknown())
        };
        if let Some(digits) = rest.strip_prefix("arm_joint_") {
            Ok(Slot::ArmJoint {
                arm,
                joint: parse_index(digits)?,
            })
        } else if let Some(digits) = rest.strip_prefix("finger_") {
            Ok(Slot::Finger {
                arm,
                finger: parse_index(digits)?,
            })
        } else {
            Err(unknown())
        }
    }
}

/// Layout of the action vector for one robot configuration.
///
/// Order: platform x, y, rotation, height, then per arm its joints followed
/// by its fingers. Single-arm robots only carry the left arm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionIndexMap {
    arms: usize,
    joints_per_arm: usize,
    fingers_per_arm: usize,
}

pub const PLATFORM_SLOTS: usize = 4;

impl ActionIndexMap {
    pub fn new(arms: usize, joints_per_arm: usize, fingers_per_arm: usize) -> Self {
        assert!((1..=2).contains(&arms), "robots carry one or two arms");
        Self {
            arms,
            joints_per_arm,
            fingers_per_arm,
        }
    }

    /// 4 platform + 7 joints + 2 fingers = 13.
    pub fn single_arm() -> Self {
        Self::new(1, 7, 2)
    }

    /// 4 platform + 2 × (7 joints + 2 fingers) = 22.
    pub fn dual_arm() -> Self {
        Self::new(2, 7, 2)
    }

    pub fn dim(&self) -> usize {
        PLATFORM_SLOTS + self.arms * self.per_arm()
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn joints_per_arm(&self) -> usize {
        self.joints_per_arm
    }

    pub fn fingers_per_arm(&self) -> usize {
        self.fingers_per_arm
    }

    fn per_arm(&self) -> usize {
        self.joints_per_arm + self.fingers_per_arm
    }

    pub fn index_of(&self, slot: Slot) -> Option<usize> {
        match slot {
            Slot::PlatformX => Some(0),
            Slot::PlatformY => Some(1),
            Slot::PlatformRotation => Some(2),
            Slot::PlatformHeight => Some(3),
            Slot::ArmJoint { arm, joint } => (arm.index() < self.arms
                && joint < self.joints_per_arm)
                .then(|| PLATFORM_SLOTS + arm.index() * self.per_arm() + joint),
            Slot::Finger { arm, finger } => {
                (arm.index() < self.arms && finger < self.fingers_per_arm).then(|| {
                    PLATFORM_SLOTS + arm.index() * self.per_arm() + self.joints_per_arm + finger
                })
            }
        }
    }

    pub fn slot_at(&self, index: usize) -> Option<Slot> {
        match index {
            0 => Some(Slot::PlatformX),
            1 => Some(Slot::PlatformY),
            2 => Some(Slot::PlatformRotation),
            3 => Some(Slot::PlatformHeight),
            i if i < self.dim() => {
                let offset = i - PLATFORM_SLOTS;
                let arm = Arm::from_index(offset / self.per_arm())?;
                let within = offset % self.per_arm();
                Some(if within < self.joints_per_arm {
                    Slot::ArmJoint { arm, joint: within }
                } else {
                    Slot::Finger {
                        arm,
                        finger: within - self.joints_per_arm,
                    }
                })
            }
            _ => None,
        }
    }

    pub fn slots(&self) -> impl Iterator<Item = Slot> + '_ {
        (0..self.dim()).filter_map(|i| self.slot_at(i))
    }

    /// Resolves a slot name against this layout.
    pub fn index_of_name(&self, name: &str) -> Result<usize, ActionError> {
        let slot: Slot = name.parse()?;
        self.index_of(slot)
            .ok_or_else(|| ActionError::UnknownSlot(name.to_string()))
    }

    pub fn joint_index(&self, arm: usize, joint: usize) -> Option<usize> {
        self.index_of(Slot::ArmJoint {
            arm: Arm::from_index(arm)?,
            joint,
        })
    }

    pub fn finger_indices(&self, arm: usize) -> Vec<usize> {
        let Some(arm) = Arm::from_index(arm) else {
            return Vec::new();
        };
        (0..self.fingers_per_arm)
            .filter_map(|finger| self.index_of(Slot::Finger { arm, finger }))
            .collect()
    }
}
