//! Deterministic kinematic stand-in for the four manipulation tasks.
//!
//! Pure kinematics integrated with explicit Euler at a fixed `dt`: platform
//! translation is commanded in the robot frame, rotation and height directly,
//! arm joints as joint velocities and fingers as closure rates. Arms holding
//! something pick up zero-mean Gaussian joint noise every step. Grasps are
//! binary: a closing command within `grasp_radius` of a grasp site attaches,
//! `detach_open_steps` consecutive opening commands release.
//!
//! * door / drawer: while attached, the platform's displacement projected on
//!   the handle's motion direction drives the articulation.
//! * bucket / chair: once both arms hold the object it follows the mean
//!   fingertip rigidly. A released bucket drops onto whatever is below it.

mod kinematics;
mod layout;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::{ActionIndexMap, ActionVector};
use crate::observation::{wrap_angle, ObjectAttributes, Observation, RobotState, TaskKind};

pub use kinematics::{
    arm_tip, body_to_world, fingertip, mount_offset, world_to_body, JOINTS_PER_ARM, READY_POSE,
    STOWED_POSE,
};

/// Episode step cap.
pub const MAX_STEPS: usize = 200;

pub const MIN_PLATFORM_HEIGHT: f64 = 0.1;
pub const MAX_PLATFORM_HEIGHT: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    /// Seconds per step.
    pub dt: f64,
    /// m/s per unit command (platform translation and height).
    pub linear_scale: f64,
    /// rad/s per unit command (platform rotation, arm joints); closure/s for fingers.
    pub angular_scale: f64,
    /// Per-step joint noise on arms with an attachment, radians.
    pub disturbance_std: f64,
    pub grasp_radius: f64,
    pub detach_open_steps: usize,
    pub max_steps: usize,
    pub handle_height_min: f64,
    pub handle_height_max: f64,
    pub door_open_fraction: f64,
    pub drawer_open_fraction: f64,
    pub bucket_xy_tolerance: f64,
    pub bucket_height_tolerance: f64,
    pub chair_xy_tolerance: f64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            dt: 0.05,
            linear_scale: 1.0,
            angular_scale: 1.0,
            disturbance_std: 0.01,
            grasp_radius: 0.05,
            detach_open_steps: 3,
            max_steps: MAX_STEPS,
            handle_height_min: 0.55,
            handle_height_max: 0.95,
            door_open_fraction: 0.9,
            drawer_open_fraction: 0.9,
            bucket_xy_tolerance: 0.1,
            bucket_height_tolerance: 0.05,
            chair_xy_tolerance: 0.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("action dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("action component {index} is not finite")]
    NonFiniteAction { index: usize },
    #[error("episode already reached its {0}-step cap")]
    EpisodeOver(usize),
    #[error("invalid environment config: {0}")]
    InvalidConfig(String),
}

impl EnvConfig {
    pub fn validate(&self) -> Result<(), EnvError> {
        let positive = [
            ("dt", self.dt),
            ("linear_scale", self.linear_scale),
            ("angular_scale", self.angular_scale),
            ("grasp_radius", self.grasp_radius),
            ("door_open_fraction", self.door_open_fraction),
            ("drawer_open_fraction", self.drawer_open_fraction),
            ("bucket_xy_tolerance", self.bucket_xy_tolerance),
            ("bucket_height_tolerance", self.bucket_height_tolerance),
            ("chair_xy_tolerance", self.chair_xy_tolerance),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(EnvError::InvalidConfig(format!(
                    "`{name}` must be positive"
                )));
            }
        }
        if !(self.disturbance_std >= 0.0 && self.disturbance_std.is_finite()) {
            return Err(EnvError::InvalidConfig(
                "`disturbance_std` must be non-negative".into(),
            ));
        }
        if self.detach_open_steps == 0 || self.max_steps == 0 {
            return Err(EnvError::InvalidConfig(
                "`detach_open_steps` and `max_steps` must be positive".into(),
            ));
        }
        if self.max_steps > MAX_STEPS {
            return Err(EnvError::InvalidConfig(format!(
                "`max_steps` may not exceed {MAX_STEPS}"
            )));
        }
        if self.handle_height_min.partial_cmp(&self.handle_height_max)
            != Some(std::cmp::Ordering::Less)
        {
            return Err(EnvError::InvalidConfig(
                "`handle_height_min` must be below `handle_height_max`".into(),
            ));
        }
        Ok(())
    }

    /// Reads a TOML config document; missing keys keep their defaults.
    pub fn from_toml_str(text: &str) -> Result<Self, EnvError> {
        let config: EnvConfig =
            toml::from_str(text).map_err(|e| EnvError::InvalidConfig(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }
}

/// Task-specific geometry that is not part of the observation.
#[derive(Debug, Clone, PartialEq)]
pub enum Fixture {
    Door {
        hinge: [f64; 2],
        /// +1 when the handle sits at larger y than the hinge.
        side: f64,
        radius: f64,
        handle_height: f64,
    },
    Drawer {
        closed_handle: [f64; 3],
        /// Pull direction, unit, world frame.
        axis: [f64; 2],
    },
    Bucket {
        radius: f64,
        height: f64,
        platform_radius: f64,
        platform_top: f64,
    },
    Chair {
        armrest_half_spacing: f64,
        armrest_length: f64,
        armrest_height: f64,
    },
}

/// Rigid binding of a carried object to the mean fingertip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Carry {
    /// Object base center minus the mean fingertip, platform frame.
    pub offset: [f64; 3],
    pub yaw_offset: f64,
}

#[derive(Debug, Clone)]
pub struct EnvState {
    pub task: TaskKind,
    pub robot: RobotState,
    pub object: ObjectAttributes,
    pub fixture: Fixture,
    pub carry: Option<Carry>,
    /// Consecutive opening commands per arm.
    pub open_streak: Vec<usize>,
    pub step: usize,
    rng: ChaCha8Rng,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub observation: Observation,
    pub success: bool,
    pub done: bool,
}

/// A seeded episode of one task.
#[derive(Debug, Clone)]
pub struct MockEnv {
    config: EnvConfig,
    map: ActionIndexMap,
    state: EnvState,
}

impl MockEnv {
    pub fn reset(
        task: TaskKind,
        config: EnvConfig,
        seed: u64,
    ) -> Result<(Self, Observation), EnvError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (robot, object, fixture) = layout::sample(task, &config, &mut rng);
        let arms = robot.arms();
        let state = EnvState {
            task,
            robot,
            object,
            fixture,
            carry: None,
            open_streak: vec![0; arms],
            step: 0,
            rng,
        };
        let env = Self {
            config,
            map: task.action_map(),
            state,
        };
        let obs = env.observation();
        Ok((env, obs))
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn action_map(&self) -> &ActionIndexMap {
        &self.map
    }

    pub fn state(&self) -> &EnvState {
        &self.state
    }

    pub fn observation(&self) -> Observation {
        Observation {
            robot: self.state.robot.clone(),
            object: self.state.object.clone(),
            step_index: self.state.step,
        }
    }

    pub fn success(&self) -> bool {
        success(&self.state, &self.config)
    }

    pub fn step(&mut self, action: &ActionVector) -> Result<StepOutcome, EnvError> {
        let dim = self.map.dim();
        if action.dim() != dim {
            return Err(EnvError::DimensionMismatch {
                expected: dim,
                actual: action.dim(),
            });
        }
        if let Some(index) = action.values().iter().position(|v| !v.is_finite()) {
            return Err(EnvError::NonFiniteAction { index });
        }
        if self.state.step >= self.config.max_steps {
            return Err(EnvError::EpisodeOver(self.config.max_steps));
        }
        let a = action.clamp();
        let cfg = &self.config;
        let map = &self.map;
        let state = &mut self.state;
        let robot = &mut state.robot;
        let arms = robot.arms();
        let held_at_start = robot.grasping.clone();

        // Platform: body-frame translation, planar command saturated to unit norm.
        let (mut cx, mut cy) = (a.values()[0], a.values()[1]);
        let norm = cx.hypot(cy);
        if norm > 1.0 {
            cx /= norm;
            cy /= norm;
        }
        let step_len = cfg.linear_scale * cfg.dt;
        let delta = body_to_world(robot.platform_yaw, [cx * step_len, cy * step_len]);
        robot.platform_x += delta[0];
        robot.platform_y += delta[1];
        robot.platform_yaw =
            wrap_angle(robot.platform_yaw + a.values()[2] * cfg.angular_scale * cfg.dt);
        robot.platform_height = (robot.platform_height + a.values()[3] * step_len)
            .clamp(MIN_PLATFORM_HEIGHT, MAX_PLATFORM_HEIGHT);

        // Arm joints, then disturbance on arms that were holding something.
        let noise =
            Normal::new(0.0, cfg.disturbance_std.max(f64::MIN_POSITIVE)).expect("finite std");
        let noise_cap = 3.0 * cfg.disturbance_std;
        let mut finger_command = vec![0.0; arms];
        for arm in 0..arms {
            for joint in 0..map.joints_per_arm() {
                let i = map.joint_index(arm, joint).expect("joint in layout");
                robot.arm_joints[arm][joint] += a.values()[i] * cfg.angular_scale * cfg.dt;
            }
            if held_at_start[arm] && cfg.disturbance_std > 0.0 {
                for q in robot.arm_joints[arm].iter_mut() {
                    let n: f64 = noise.sample(&mut state.rng);
                    *q += n.clamp(-noise_cap, noise_cap);
                }
            }
            let fingers = map.finger_indices(arm);
            let mean =
                fingers.iter().map(|&i| a.values()[i]).sum::<f64>() / fingers.len().max(1) as f64;
            finger_command[arm] = mean;
            robot.finger_closure[arm] =
                (robot.finger_closure[arm] + mean * cfg.angular_scale * cfg.dt).clamp(0.0, 1.0);
        }
        refresh_fingertips(robot);

        // Object motion under the attachments held at the start of the step.
        match state.fixture {
            Fixture::Door {
                hinge,
                side,
                radius,
                handle_height,
            } => {
                if held_at_start.iter().any(|h| *h) {
                    let theta = state.object.articulation_value.unwrap_or(0.0);
                    let tangent = [-theta.cos(), -side * theta.sin()];
                    let projected = delta[0] * tangent[0] + delta[1] * tangent[1];
                    let limit = state.object.articulation_target.unwrap_or(0.0);
                    let theta = (theta + projected / radius).clamp(0.0, limit);
                    state.object.articulation_value = Some(theta);
                    state.object.handle_position =
                        layout::door_handle(hinge, side, radius, handle_height, theta);
                }
            }
            Fixture::Drawer {
                closed_handle,
                axis,
            } => {
                if held_at_start.iter().any(|h| *h) {
                    let e = state.object.articulation_value.unwrap_or(0.0);
                    let projected = delta[0] * axis[0] + delta[1] * axis[1];
                    let limit = state.object.articulation_target.unwrap_or(0.0);
                    let e = (e + projected).clamp(0.0, limit);
                    state.object.articulation_value = Some(e);
                    state.object.handle_position = [
                        closed_handle[0] + e * axis[0],
                        closed_handle[1] + e * axis[1],
                        closed_handle[2],
                    ];
                }
            }
            Fixture::Bucket { .. } | Fixture::Chair { .. } => {
                if let Some(carry) = state.carry {
                    let finger = robot.mean_finger();
                    let offset =
                        body_to_world(robot.platform_yaw, [carry.offset[0], carry.offset[1]]);
                    state.object.object_pose.x = finger[0] + offset[0];
                    state.object.object_pose.y = finger[1] + offset[1];
                    state.object.object_pose.yaw =
                        wrap_angle(robot.platform_yaw + carry.yaw_offset);
                    if matches!(state.fixture, Fixture::Bucket { .. }) {
                        state.object.base_height = finger[2] + carry.offset[2];
                    }
                }
            }
        }

        // Attach and detach.
        for (arm, &command) in finger_command.iter().enumerate() {
            if command < 0.0 {
                state.open_streak[arm] += 1;
            } else {
                state.open_streak[arm] = 0;
            }
            if robot.grasping[arm] {
                if state.open_streak[arm] >= cfg.detach_open_steps {
                    robot.grasping[arm] = false;
                }
            } else if command > 0.0 {
                let tip = robot.finger_positions[arm];
                let distance = layout::grasp_distance(&state.fixture, &state.object, arm, tip);
                if distance < cfg.grasp_radius {
                    robot.grasping[arm] = true;
                }
            }
        }

        let carried_kind = matches!(
            state.fixture,
            Fixture::Bucket { .. } | Fixture::Chair { .. }
        );
        if carried_kind {
            let all_held = robot.grasping.iter().all(|h| *h);
            match (state.carry, all_held) {
                (None, true) => {
                    let finger = robot.mean_finger();
                    let rel = world_to_body(
                        robot.platform_yaw,
                        [
                            state.object.object_pose.x - finger[0],
                            state.object.object_pose.y - finger[1],
                        ],
                    );
                    state.carry = Some(Carry {
                        offset: [rel[0], rel[1], state.object.base_height - finger[2]],
                        yaw_offset: wrap_angle(state.object.object_pose.yaw - robot.platform_yaw),
                    });
                }
                (Some(_), false) => state.carry = None,
                _ => {}
            }
            if state.carry.is_none() {
                if let Fixture::Bucket { .. } = state.fixture {
                    state.object.base_height =
                        layout::support_height(&state.fixture, &state.object);
                }
            }
            layout::refresh_grasp_center(&state.fixture, &mut state.object);
        }

        state.step += 1;
        let success = success(state, cfg);
        let done = success || state.step >= cfg.max_steps;
        Ok(StepOutcome {
            observation: self.observation(),
            success,
            done,
        })
    }
}

fn refresh_fingertips(robot: &mut RobotState) {
    let arms = robot.arms();
    for arm in 0..arms {
        robot.finger_positions[arm] = fingertip(
            [robot.platform_x, robot.platform_y],
            robot.platform_yaw,
            robot.platform_height,
            mount_offset(arm, arms),
            &robot.arm_joints[arm],
        );
    }
}

/// Task success predicate.
pub fn success(state: &EnvState, config: &EnvConfig) -> bool {
    let object = &state.object;
    let planar_error = || {
        object
            .target_point
            .map(|t| (object.object_pose.x - t[0]).hypot(object.object_pose.y - t[1]))
    };
    match state.fixture {
        Fixture::Door { .. } => match (object.articulation_value, object.articulation_target) {
            (Some(v), Some(t)) => v >= config.door_open_fraction * t,
            _ => false,
        },
        Fixture::Drawer { .. } => match (object.articulation_value, object.articulation_target) {
            (Some(v), Some(t)) => v >= config.drawer_open_fraction * t,
            _ => false,
        },
        Fixture::Bucket { platform_top, .. } => {
            let released = state.robot.grasping.iter().all(|h| !h);
            let placed = planar_error().is_some_and(|e| e <= config.bucket_xy_tolerance);
            let resting =
                (object.base_height - platform_top).abs() <= config.bucket_height_tolerance;
            released && placed && resting
        }
        Fixture::Chair { .. } => planar_error().is_some_and(|e| e <= config.chair_xy_tolerance),
    }
}

#[cfg(test)]
mod tests;
