//! Structured observations: robot state, object attributes, step index.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::action::ActionIndexMap;

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let mut a = angle % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    OpenCabinetDoor,
    OpenCabinetDrawer,
    MoveBucket,
    PushChair,
}

impl TaskKind {
    pub const ALL: [TaskKind; 4] = [
        TaskKind::OpenCabinetDoor,
        TaskKind::OpenCabinetDrawer,
        TaskKind::MoveBucket,
        TaskKind::PushChair,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::OpenCabinetDoor => "open_cabinet_door",
            TaskKind::OpenCabinetDrawer => "open_cabinet_drawer",
            TaskKind::MoveBucket => "move_bucket",
            TaskKind::PushChair => "push_chair",
        }
    }

    pub fn object_kind(self) -> ObjectKind {
        match self {
            TaskKind::OpenCabinetDoor => ObjectKind::Door,
            TaskKind::OpenCabinetDrawer => ObjectKind::Drawer,
            TaskKind::MoveBucket => ObjectKind::Bucket,
            TaskKind::PushChair => ObjectKind::Chair,
        }
    }

    /// Bucket and chair are held with both arms.
    pub fn is_dual_arm(self) -> bool {
        matches!(self, TaskKind::MoveBucket | TaskKind::PushChair)
    }

    pub fn action_map(self) -> ActionIndexMap {
        if self.is_dual_arm() {
            ActionIndexMap::dual_arm()
        } else {
            ActionIndexMap::single_arm()
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownTaskKind(pub String);

impl fmt::Display for UnknownTaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "unknown task kind `{}` (expected one of open_cabinet_door, open_cabinet_drawer, move_bucket, push_chair)",
            self.0
        )
    }
}

impl std::error::Error for UnknownTaskKind {}

impl FromStr for TaskKind {
    type Err = UnknownTaskKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TaskKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| UnknownTaskKind(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectKind {
    Door,
    Drawer,
    Bucket,
    Chair,
}

impl ObjectKind {
    pub fn is_articulated(self) -> bool {
        matches!(self, ObjectKind::Door | ObjectKind::Drawer)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub platform_x: f64,
    pub platform_y: f64,
    pub platform_height: f64,
    /// Radians in `(-π, π]`.
    pub platform_yaw: f64,
    /// One joint-angle list per arm.
    pub arm_joints: Vec<Vec<f64>>,
    /// Fingertip point per arm, world frame.
    pub finger_positions: Vec<[f64; 3]>,
    /// Finger closure per arm, 0 = open, 1 = closed.
    pub finger_closure: Vec<f64>,
    pub grasping: Vec<bool>,
}

impl RobotState {
    pub fn arms(&self) -> usize {
        self.arm_joints.len()
    }

    /// Mean fingertip over all arms.
    pub fn mean_finger(&self) -> [f64; 3] {
        let n = self.finger_positions.len().max(1) as f64;
        let mut sum = [0.0; 3];
        for p in &self.finger_positions {
            for k in 0..3 {
                sum[k] += p[k];
            }
        }
        sum.map(|s| s / n)
    }

    pub fn heading(&self) -> [f64; 2] {
        [self.platform_yaw.cos(), self.platform_yaw.sin()]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectAttributes {
    pub kind: ObjectKind,
    /// Door/drawer handle, or the midpoint of the two grasp sites for
    /// bucket (rim) and chair (armrests).
    pub handle_position: [f64; 3],
    /// Door angle (rad) or drawer extension (m).
    pub articulation_value: Option<f64>,
    /// Articulation at full opening; present with `articulation_value`.
    pub articulation_target: Option<f64>,
    pub object_pose: Pose2,
    /// Height of the object's base above the floor.
    pub base_height: f64,
    /// Placement goal (bucket platform or chair red point).
    pub target_point: Option<[f64; 2]>,
    pub size_extents: [f64; 3],
}

impl ObjectAttributes {
    /// Checks the kind-dependent presence rules of optional fields.
    pub fn is_consistent(&self) -> bool {
        let articulated = self.kind.is_articulated();
        self.articulation_value.is_some() == articulated
            && self.articulation_target.is_some() == articulated
            && self.target_point.is_some() == !articulated
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub robot: RobotState,
    pub object: ObjectAttributes,
    pub step_index: usize,
}
