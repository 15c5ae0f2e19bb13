use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::observation::{wrap_angle, ObjectKind, Observation};

/// Symbolic `MoveTo` target, evaluated once against the first observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetExpr {
    Literal(f64),
    HandleX,
    HandleY,
    HandleHeight,
    ArmrestHeight,
    TargetX,
    TargetY,
    /// Yaw that squarely faces the object's front.
    FrontYaw,
    /// Bearing from the platform to the object.
    FacingObject,
    /// Bearing from the platform to the target point.
    FacingTarget,
}

const NAMED: [(TargetExpr, &str); 9] = [
    (TargetExpr::HandleX, "handle_x"),
    (TargetExpr::HandleY, "handle_y"),
    (TargetExpr::HandleHeight, "handle_height"),
    (TargetExpr::ArmrestHeight, "armrest_height"),
    (TargetExpr::TargetX, "target_x"),
    (TargetExpr::TargetY, "target_y"),
    (TargetExpr::FrontYaw, "front_yaw"),
    (TargetExpr::FacingObject, "facing_yaw(object)"),
    (TargetExpr::FacingTarget, "facing_yaw(target)"),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnresolvedTarget {
    pub expr: String,
    pub reason: String,
}

impl fmt::Display for UnresolvedTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cannot resolve target `{}`: {}", self.expr, self.reason)
    }
}

impl TargetExpr {
    pub fn evaluate(self, obs: &Observation) -> Result<f64, UnresolvedTarget> {
        let object = &obs.object;
        let robot = &obs.robot;
        let fail = |reason: &str| UnresolvedTarget {
            expr: self.to_string(),
            reason: reason.to_string(),
        };
        let articulated = || {
            if object.kind.is_articulated() {
                Ok(())
            } else {
                Err(fail("object has no handle"))
            }
        };
        let target = || {
            object
                .target_point
                .ok_or_else(|| fail("object has no target point"))
        };
        let value = match self {
            TargetExpr::Literal(v) => v,
            TargetExpr::HandleX => {
                articulated()?;
                object.handle_position[0]
            }
            TargetExpr::HandleY => {
                articulated()?;
                object.handle_position[1]
            }
            TargetExpr::HandleHeight => {
                articulated()?;
                object.handle_position[2]
            }
            TargetExpr::ArmrestHeight => {
                if object.kind != ObjectKind::Chair {
                    return Err(fail("object has no armrests"));
                }
                object.handle_position[2]
            }
            TargetExpr::TargetX => target()?[0],
            TargetExpr::TargetY => target()?[1],
            TargetExpr::FrontYaw => {
                articulated()?;
                wrap_angle(object.object_pose.yaw + std::f64::consts::PI)
            }
            TargetExpr::FacingObject => (object.object_pose.y - robot.platform_y)
                .atan2(object.object_pose.x - robot.platform_x),
            TargetExpr::FacingTarget => {
                let t = target()?;
                (t[1] - robot.platform_y).atan2(t[0] - robot.platform_x)
            }
        };
        if !value.is_finite() {
            return Err(fail("value is not finite"));
        }
        Ok(value)
    }
}

impl fmt::Display for TargetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetExpr::Literal(v) => write!(f, "{v}"),
            other => {
                let name = NAMED
                    .iter()
                    .find(|(e, _)| e == other)
                    .map(|(_, n)| *n)
                    .expect("every symbolic target is named");
                f.write_str(name)
            }
        }
    }
}

impl FromStr for TargetExpr {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim();
        if let Some((expr, _)) = NAMED.iter().find(|(_, n)| *n == trimmed) {
            return Ok(*expr);
        }
        match trimmed.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(TargetExpr::Literal(v)),
            _ => Err(format!(
                "unknown target expression `{s}` (expected a number or one of {})",
                NAMED.map(|(_, n)| n).join(", ")
            )),
        }
    }
}

impl Serialize for TargetExpr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            TargetExpr::Literal(v) => serializer.serialize_f64(*v),
            other => serializer.serialize_str(&other.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for TargetExpr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Integer(i64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Number(v) => Ok(TargetExpr::Literal(v)),
            Raw::Integer(v) => Ok(TargetExpr::Literal(v as f64)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}
