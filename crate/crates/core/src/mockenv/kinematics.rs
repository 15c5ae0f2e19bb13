//! Simplified forward kinematics for the platform-mounted arms.
//!
//! Joints 0 and 1..6 are read as: 0 shoulder yaw, 1 shoulder pitch,
//! 3 elbow pitch, 5 wrist pitch; the remaining joints are rolls about the
//! link axes and do not move the fingertip. Positive pitch raises the link.

pub const UPPER_ARM: f64 = 0.4;
pub const FOREARM: f64 = 0.35;
pub const HAND: f64 = 0.12;

/// Lateral mount offset of each arm for dual-arm robots.
pub const DUAL_ARM_MOUNT: f64 = 0.2;

pub const JOINTS_PER_ARM: usize = 7;

/// Folded pose the single-arm and bucket robots start in.
pub const STOWED_POSE: [f64; JOINTS_PER_ARM] = [0.0, 1.2, 0.0, -2.2, 0.0, 1.0, 0.0];

/// Pose reached from [`STOWED_POSE`] by the builtin arm initialization
/// (joint 1 at -1, joint 3 at +1 for ten 0.05 s steps).
pub const READY_POSE: [f64; JOINTS_PER_ARM] = [0.0, 0.7, 0.0, -1.7, 0.0, 1.0, 0.0];

/// Mount point of `arm` in the platform frame (forward, left).
pub fn mount_offset(arm: usize, arms: usize) -> [f64; 2] {
    if arms == 1 {
        [0.0, 0.0]
    } else if arm == 0 {
        [0.0, DUAL_ARM_MOUNT]
    } else {
        [0.0, -DUAL_ARM_MOUNT]
    }
}

/// Fingertip relative to the mount, platform frame: (forward, left, up).
pub fn arm_tip(joints: &[f64]) -> [f64; 3] {
    let q = |i: usize| joints.get(i).copied().unwrap_or(0.0);
    let a1 = q(1);
    let a2 = a1 + q(3);
    let a3 = a2 + q(5);
    let reach = UPPER_ARM * a1.cos() + FOREARM * a2.cos() + HAND * a3.cos();
    let up = UPPER_ARM * a1.sin() + FOREARM * a2.sin() + HAND * a3.sin();
    [reach * q(0).cos(), reach * q(0).sin(), up]
}

/// World-frame fingertip of one arm.
pub fn fingertip(
    platform: [f64; 2],
    yaw: f64,
    height: f64,
    mount: [f64; 2],
    joints: &[f64],
) -> [f64; 3] {
    let tip = arm_tip(joints);
    let fx = mount[0] + tip[0];
    let fy = mount[1] + tip[1];
    let (s, c) = yaw.sin_cos();
    [
        platform[0] + c * fx - s * fy,
        platform[1] + s * fx + c * fy,
        height + tip[2],
    ]
}

pub fn body_to_world(yaw: f64, v: [f64; 2]) -> [f64; 2] {
    let (s, c) = yaw.sin_cos();
    [c * v[0] - s * v[1], s * v[0] + c * v[1]]
}

pub fn world_to_body(yaw: f64, v: [f64; 2]) -> [f64; 2] {
    body_to_world(-yaw, v)
}
