//! Randomized initial scenes and per-fixture geometry.

use std::f64::consts::PI;

use rand::Rng;

use super::kinematics::{arm_tip, fingertip, mount_offset, READY_POSE, STOWED_POSE};
use super::{EnvConfig, Fixture};
use crate::observation::{wrap_angle, ObjectAttributes, ObjectKind, Pose2, RobotState, TaskKind};

const CABINET_DEPTH: f64 = 0.5;
const CHAIR_ARMREST_LENGTH: f64 = 0.3;
const BUCKET_PLATFORM_RADIUS: f64 = 0.3;

fn sym<R: Rng>(rng: &mut R, half: f64) -> f64 {
    rng.random_range(-half..half)
}

fn robot(arms: usize, pose: [f64; 7], x: f64, y: f64, yaw: f64, height: f64) -> RobotState {
    let mut robot = RobotState {
        platform_x: x,
        platform_y: y,
        platform_height: height,
        platform_yaw: yaw,
        arm_joints: vec![pose.to_vec(); arms],
        finger_positions: vec![[0.0; 3]; arms],
        finger_closure: vec![0.0; arms],
        grasping: vec![false; arms],
    };
    for arm in 0..arms {
        robot.finger_positions[arm] = fingertip(
            [x, y],
            yaw,
            height,
            mount_offset(arm, arms),
            &robot.arm_joints[arm],
        );
    }
    robot
}

/// Handle of a door opened by `theta` about its vertical hinge.
pub(super) fn door_handle(hinge: [f64; 2], side: f64, radius: f64, z: f64, theta: f64) -> [f64; 3] {
    [
        hinge[0] - radius * theta.sin(),
        hinge[1] + side * radius * theta.cos(),
        z,
    ]
}

pub(super) fn sample<R: Rng>(
    task: TaskKind,
    config: &EnvConfig,
    rng: &mut R,
) -> (RobotState, ObjectAttributes, Fixture) {
    match task {
        TaskKind::OpenCabinetDoor | TaskKind::OpenCabinetDrawer => cabinet(task, config, rng),
        TaskKind::MoveBucket => bucket(rng),
        TaskKind::PushChair => chair(rng),
    }
}

fn cabinet<R: Rng>(
    task: TaskKind,
    config: &EnvConfig,
    rng: &mut R,
) -> (RobotState, ObjectAttributes, Fixture) {
    let cx = sym(rng, 0.1);
    let cy = sym(rng, 0.1);
    let front_x = cx - CABINET_DEPTH / 2.0;
    let z = rng.random_range(config.handle_height_min..config.handle_height_max);

    let (handle, fixture, target) = if task == TaskKind::OpenCabinetDoor {
        let width = rng.random_range(0.35..0.55);
        let center = cy + sym(rng, 0.2);
        let side = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let hinge = [front_x, center - side * width / 2.0];
        let radius = 0.85 * width;
        let target = rng.random_range(1.0..1.3);
        let fixture = Fixture::Door {
            hinge,
            side,
            radius,
            handle_height: z,
        };
        (door_handle(hinge, side, radius, z, 0.0), fixture, target)
    } else {
        let handle = [front_x, cy + sym(rng, 0.25), z];
        let target = rng.random_range(0.25..0.4);
        let fixture = Fixture::Drawer {
            closed_handle: handle,
            axis: [-1.0, 0.0],
        };
        (handle, fixture, target)
    };

    let reach = arm_tip(&READY_POSE)[0];
    let height = rng.random_range(0.75..0.85);
    let yaw = sym(rng, 0.4);
    let x = handle[0] - reach - rng.random_range(0.2..0.45);
    let y = handle[1] + sym(rng, 0.35);

    let object = ObjectAttributes {
        kind: task.object_kind(),
        handle_position: handle,
        articulation_value: Some(0.0),
        articulation_target: Some(target),
        object_pose: Pose2 {
            x: cx,
            y: cy,
            yaw: PI,
        },
        base_height: 0.0,
        target_point: None,
        size_extents: [CABINET_DEPTH, 1.0, 1.2],
    };
    (robot(1, STOWED_POSE, x, y, yaw, height), object, fixture)
}

fn bucket<R: Rng>(rng: &mut R) -> (RobotState, ObjectAttributes, Fixture) {
    let x = sym(rng, 0.5);
    let y = sym(rng, 0.5);
    let yaw = sym(rng, PI);
    let bearing = yaw + sym(rng, 0.5);
    let distance = rng.random_range(0.82..1.0);
    let radius = rng.random_range(0.19..0.21);
    let bucket_height = 0.36 + sym(rng, 0.005);
    let height = 0.36 - arm_tip(&READY_POSE)[2] + sym(rng, 0.005);

    let target_bearing = bearing + sym(rng, 0.6);
    let target_distance = rng.random_range(1.5..1.9);
    let platform_top = rng.random_range(0.1..0.2);
    let target = [
        x + target_distance * target_bearing.cos(),
        y + target_distance * target_bearing.sin(),
    ];

    let center = [x + distance * bearing.cos(), y + distance * bearing.sin()];
    let object = ObjectAttributes {
        kind: ObjectKind::Bucket,
        handle_position: [center[0], center[1], bucket_height],
        articulation_value: None,
        articulation_target: None,
        object_pose: Pose2 {
            x: center[0],
            y: center[1],
            yaw: sym(rng, PI),
        },
        base_height: 0.0,
        target_point: Some(target),
        size_extents: [2.0 * radius, 2.0 * radius, bucket_height],
    };
    let fixture = Fixture::Bucket {
        radius,
        height: bucket_height,
        platform_radius: BUCKET_PLATFORM_RADIUS,
        platform_top,
    };
    (robot(2, STOWED_POSE, x, y, yaw, height), object, fixture)
}

fn chair<R: Rng>(rng: &mut R) -> (RobotState, ObjectAttributes, Fixture) {
    let x = sym(rng, 0.5);
    let y = sym(rng, 0.5);
    let yaw = sym(rng, PI);
    let height = rng.random_range(0.75..0.85);
    let distance = rng.random_range(1.12..1.30);
    let half_spacing = rng.random_range(0.195..0.205);
    let armrest_height = rng.random_range(0.55..0.75);

    let bearing = yaw + sym(rng, 0.6);
    let target_distance = rng.random_range(2.0..2.6);
    let target = [
        x + target_distance * bearing.cos(),
        y + target_distance * bearing.sin(),
    ];

    let center = [x + distance * yaw.cos(), y + distance * yaw.sin()];
    let object = ObjectAttributes {
        kind: ObjectKind::Chair,
        handle_position: [center[0], center[1], armrest_height],
        articulation_value: None,
        articulation_target: None,
        object_pose: Pose2 {
            x: center[0],
            y: center[1],
            yaw,
        },
        base_height: 0.0,
        target_point: Some(target),
        size_extents: [0.6, 0.6, 0.9],
    };
    let fixture = Fixture::Chair {
        armrest_half_spacing: half_spacing,
        armrest_length: CHAIR_ARMREST_LENGTH,
        armrest_height,
    };
    (robot(2, READY_POSE, x, y, yaw, height), object, fixture)
}

/// Distance from a fingertip of `arm` to the grasp site it can close on.
pub(super) fn grasp_distance(
    fixture: &Fixture,
    object: &ObjectAttributes,
    arm: usize,
    tip: [f64; 3],
) -> f64 {
    let pose = &object.object_pose;
    match *fixture {
        Fixture::Door { .. } | Fixture::Drawer { .. } => {
            let h = object.handle_position;
            ((tip[0] - h[0]).powi(2) + (tip[1] - h[1]).powi(2) + (tip[2] - h[2]).powi(2)).sqrt()
        }
        Fixture::Bucket { radius, height, .. } => {
            let radial = (tip[0] - pose.x).hypot(tip[1] - pose.y) - radius;
            let vertical = tip[2] - (object.base_height + height);
            radial.hypot(vertical)
        }
        Fixture::Chair {
            armrest_half_spacing,
            armrest_length,
            armrest_height,
        } => {
            // Left arm (0) takes the left armrest.
            let side = if arm == 0 { 1.0 } else { -1.0 };
            let (s, c) = pose.yaw.sin_cos();
            let forward = [c, s];
            let left = [-s, c];
            let mid = [
                pose.x + side * armrest_half_spacing * left[0],
                pose.y + side * armrest_half_spacing * left[1],
            ];
            let rel = [tip[0] - mid[0], tip[1] - mid[1]];
            let along = (rel[0] * forward[0] + rel[1] * forward[1])
                .clamp(-armrest_length / 2.0, armrest_length / 2.0);
            let nearest = [mid[0] + along * forward[0], mid[1] + along * forward[1]];
            let dz = tip[2] - (object.base_height + armrest_height);
            ((tip[0] - nearest[0]).powi(2) + (tip[1] - nearest[1]).powi(2) + dz * dz).sqrt()
        }
    }
}

/// Height a released bucket comes to rest at.
pub(super) fn support_height(fixture: &Fixture, object: &ObjectAttributes) -> f64 {
    match *fixture {
        Fixture::Bucket {
            platform_radius,
            platform_top,
            ..
        } => match object.target_point {
            Some(t)
                if (object.object_pose.x - t[0]).hypot(object.object_pose.y - t[1])
                    <= platform_radius =>
            {
                platform_top
            }
            _ => 0.0,
        },
        _ => object.base_height,
    }
}

/// Keeps `handle_position` on the grasp center of a movable object.
pub(super) fn refresh_grasp_center(fixture: &Fixture, object: &mut ObjectAttributes) {
    let z = match *fixture {
        Fixture::Bucket { height, .. } => object.base_height + height,
        Fixture::Chair { armrest_height, .. } => object.base_height + armrest_height,
        _ => return,
    };
    object.object_pose.yaw = wrap_angle(object.object_pose.yaw);
    object.handle_position = [object.object_pose.x, object.object_pose.y, z];
}
