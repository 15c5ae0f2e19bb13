use super::*;
use crate::observation::ObjectKind;

fn zero(env: &MockEnv) -> ActionVector {
    ActionVector::zeros(env.action_map().dim()).unwrap()
}

fn command(env: &MockEnv, slots: &[(&str, f64)]) -> ActionVector {
    let mut a = zero(env);
    for (name, value) in slots {
        a.set(env.action_map().index_of_name(name).unwrap(), *value)
            .unwrap();
    }
    a
}

#[test]
fn reset_is_deterministic_per_seed() {
    for task in TaskKind::ALL {
        let (_, a) = MockEnv::reset(task, EnvConfig::default(), 42).unwrap();
        let (_, b) = MockEnv::reset(task, EnvConfig::default(), 42).unwrap();
        let (_, c) = MockEnv::reset(task, EnvConfig::default(), 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.step_index, 0);
        assert_eq!(a.object.kind, task.object_kind());
        assert!(a.object.is_consistent());
    }
}

#[test]
fn resets_vary_across_seeds() {
    for task in TaskKind::ALL {
        let mut poses: Vec<(u64, u64, u64)> = (0..100)
            .map(|seed| {
                let (_, obs) = MockEnv::reset(task, EnvConfig::default(), seed).unwrap();
                (
                    obs.robot.platform_x.to_bits(),
                    obs.robot.platform_y.to_bits(),
                    obs.robot.platform_yaw.to_bits(),
                )
            })
            .collect();
        poses.sort_unstable();
        poses.dedup();
        assert!(poses.len() >= 99, "{task}: {} distinct", poses.len());
    }
}

#[test]
fn handle_heights_stay_in_band() {
    let config = EnvConfig::default();
    for task in [TaskKind::OpenCabinetDoor, TaskKind::OpenCabinetDrawer] {
        for seed in 0..200 {
            let (_, obs) = MockEnv::reset(task, config.clone(), seed).unwrap();
            let z = obs.object.handle_position[2];
            assert!(z >= config.handle_height_min && z < config.handle_height_max);
            assert_eq!(obs.object.articulation_value, Some(0.0));
        }
    }
}

#[test]
fn fresh_reset_is_not_success() {
    for task in TaskKind::ALL {
        for seed in 0..50 {
            let (env, _) = MockEnv::reset(task, EnvConfig::default(), seed).unwrap();
            assert!(!env.success(), "{task} seed {seed}");
        }
    }
}

#[test]
fn forward_command_moves_one_step_length() {
    let (mut env, obs) =
        MockEnv::reset(TaskKind::OpenCabinetDrawer, EnvConfig::default(), 5).unwrap();
    let a = command(&env, &[("platform_x", 1.0)]);
    let out = env.step(&a).unwrap();
    let dx = out.observation.robot.platform_x - obs.robot.platform_x;
    let dy = out.observation.robot.platform_y - obs.robot.platform_y;
    assert!((dx.hypot(dy) - 0.05).abs() < 1e-12);
    let heading = obs.robot.heading();
    assert!((dx * heading[0] + dy * heading[1] - 0.05).abs() < 1e-12);
    assert_eq!(out.observation.step_index, 1);
}

#[test]
fn planar_command_is_saturated() {
    let (mut env, obs) = MockEnv::reset(TaskKind::PushChair, EnvConfig::default(), 1).unwrap();
    let a = command(&env, &[("platform_x", 1.0), ("platform_y", 1.0)]);
    let next = env.step(&a).unwrap().observation;
    let d = (next.robot.platform_x - obs.robot.platform_x)
        .hypot(next.robot.platform_y - obs.robot.platform_y);
    assert!((d - 0.05).abs() < 1e-12);
}

#[test]
fn out_of_range_commands_are_clamped() {
    let (mut a_env, _) = MockEnv::reset(TaskKind::MoveBucket, EnvConfig::default(), 9).unwrap();
    let mut b_env = a_env.clone();
    let big = command(
        &a_env,
        &[("platform_rotation", 7.0), ("left_arm_joint_2", -3.0)],
    );
    let unit = command(
        &a_env,
        &[("platform_rotation", 1.0), ("left_arm_joint_2", -1.0)],
    );
    assert_eq!(a_env.step(&big).unwrap(), b_env.step(&unit).unwrap());
}

#[test]
fn bad_actions_are_rejected() {
    let (mut env, _) = MockEnv::reset(TaskKind::OpenCabinetDoor, EnvConfig::default(), 0).unwrap();
    let short = ActionVector::zeros(5).unwrap();
    assert_eq!(
        env.step(&short),
        Err(EnvError::DimensionMismatch {
            expected: 13,
            actual: 5
        })
    );
    let mut nan = zero(&env);
    nan.set(3, f64::NAN).unwrap();
    assert_eq!(env.step(&nan), Err(EnvError::NonFiniteAction { index: 3 }));
}

#[test]
fn step_cap_is_enforced() {
    let config = EnvConfig {
        max_steps: 3,
        ..EnvConfig::default()
    };
    let (mut env, _) = MockEnv::reset(TaskKind::OpenCabinetDrawer, config, 0).unwrap();
    let a = zero(&env);
    assert!(!env.step(&a).unwrap().done);
    assert!(!env.step(&a).unwrap().done);
    assert!(env.step(&a).unwrap().done);
    assert_eq!(env.step(&a), Err(EnvError::EpisodeOver(3)));
}

#[test]
fn config_validation_and_toml() {
    assert!(EnvConfig::default().validate().is_ok());
    let c = EnvConfig::from_toml_str("dt = 0.1\ndisturbance_std = 0.0\n").unwrap();
    assert_eq!(c.dt, 0.1);
    assert_eq!(c.disturbance_std, 0.0);
    assert_eq!(c.grasp_radius, 0.05);
    assert!(EnvConfig::from_toml_str("dt = -1.0").is_err());
    assert!(EnvConfig::from_toml_str("max_steps = 500").is_err());
    assert!(EnvConfig::from_toml_str("unknown_key = 1").is_err());
}

/// Puts the single-arm fingertip on the handle and closes the hand.
fn grasped_drawer(seed: u64) -> MockEnv {
    let (mut env, _) =
        MockEnv::reset(TaskKind::OpenCabinetDrawer, EnvConfig::default(), seed).unwrap();
    let state = &mut env.state;
    state.robot.arm_joints[0] = READY_POSE.to_vec();
    state.robot.platform_yaw = 0.0;
    let tip = arm_tip(&READY_POSE);
    let h = state.object.handle_position;
    state.robot.platform_x = h[0] - tip[0];
    state.robot.platform_y = h[1] - tip[1];
    state.robot.platform_height = h[2] - tip[2];
    refresh_fingertips(&mut state.robot);
    let close = command(&env, &[("left_finger_0", 1.0), ("left_finger_1", 1.0)]);
    env.step(&close).unwrap();
    assert!(env.state().robot.grasping[0]);
    env
}

#[test]
fn drawer_follows_platform_pull() {
    let mut env = grasped_drawer(7);
    let target = env.state().object.articulation_target.unwrap();
    let pull = command(
        &env,
        &[
            ("platform_x", -1.0),
            ("left_finger_0", 1.0),
            ("left_finger_1", 1.0),
        ],
    );
    // 0.05 m per step.
    for _ in 0..4 {
        env.step(&pull).unwrap();
    }
    let e = env.state().object.articulation_value.unwrap();
    assert!((e - 0.2).abs() < 1e-9, "{e}");
    for _ in 0..20 {
        env.step(&pull).unwrap();
    }
    assert_eq!(env.state().object.articulation_value, Some(target));
    assert!(env.success());
}

#[test]
fn articulation_is_monotone_under_pulling() {
    for task in [TaskKind::OpenCabinetDoor, TaskKind::OpenCabinetDrawer] {
        let (mut env, _) = MockEnv::reset(task, EnvConfig::default(), 3).unwrap();
        env.state.robot.grasping[0] = true;
        let pull = command(&env, &[("platform_x", -1.0), ("left_arm_joint_1", 0.3)]);
        let mut last = 0.0;
        for _ in 0..60 {
            let out = env.step(&pull).unwrap();
            let v = out.observation.object.articulation_value.unwrap();
            assert!(v >= last);
            last = v;
            if out.done {
                break;
            }
        }
        assert!(env.success(), "{task}");
    }
}

#[test]
fn open_command_releases_after_streak() {
    let mut env = grasped_drawer(2);
    let open = command(&env, &[("left_finger_0", -1.0), ("left_finger_1", -1.0)]);
    env.step(&open).unwrap();
    env.step(&open).unwrap();
    assert!(env.state().robot.grasping[0]);
    env.step(&open).unwrap();
    assert!(!env.state().robot.grasping[0]);
}

#[test]
fn closing_far_from_grasp_site_does_nothing() {
    let (mut env, _) = MockEnv::reset(TaskKind::MoveBucket, EnvConfig::default(), 4).unwrap();
    let close = command(
        &env,
        &[
            ("left_finger_0", 1.0),
            ("left_finger_1", 1.0),
            ("right_finger_0", 1.0),
            ("right_finger_1", 1.0),
        ],
    );
    for _ in 0..5 {
        env.step(&close).unwrap();
    }
    assert!(env.state().robot.grasping.iter().all(|g| !g));
    assert!(env.state().robot.finger_closure.iter().all(|c| *c > 0.0));
}

#[test]
fn disturbance_only_hits_holding_arms() {
    let (mut env, obs) = MockEnv::reset(TaskKind::PushChair, EnvConfig::default(), 8).unwrap();
    env.state.robot.grasping = vec![true, false];
    let a = zero(&env);
    let next = env.step(&a).unwrap().observation;
    assert_ne!(next.robot.arm_joints[0], obs.robot.arm_joints[0]);
    assert_eq!(next.robot.arm_joints[1], obs.robot.arm_joints[1]);
    let cap = 3.0 * env.config().disturbance_std;
    for (q, q0) in next.robot.arm_joints[0]
        .iter()
        .zip(&obs.robot.arm_joints[0])
    {
        assert!((q - q0).abs() <= cap + 1e-15);
    }
}

#[test]
fn no_teleporting() {
    let config = EnvConfig::default();
    let (mut env, mut obs) = MockEnv::reset(TaskKind::MoveBucket, config.clone(), 6).unwrap();
    env.state.robot.grasping = vec![true, true];
    let lin = config.linear_scale * config.dt;
    let turn = config.angular_scale * config.dt;
    let ang = turn + 3.0 * config.disturbance_std;
    for i in 0..40 {
        let mut a = zero(&env);
        for j in 0..a.dim() {
            a.set(j, if (i + j) % 3 == 0 { 1.0 } else { -0.7 }).unwrap();
        }
        let next = env.step(&a).unwrap().observation;
        let d = (next.robot.platform_x - obs.robot.platform_x)
            .hypot(next.robot.platform_y - obs.robot.platform_y);
        assert!(d <= lin + 1e-12);
        assert!((next.robot.platform_height - obs.robot.platform_height).abs() <= lin + 1e-12);
        assert!(wrap_angle(next.robot.platform_yaw - obs.robot.platform_yaw).abs() <= turn + 1e-12);
        for (arm, joints) in next.robot.arm_joints.iter().enumerate() {
            for (q, q0) in joints.iter().zip(&obs.robot.arm_joints[arm]) {
                assert!((q - q0).abs() <= ang + 1e-12);
            }
        }
        obs = next;
    }
}

#[test]
fn bucket_success_needs_release_and_support() {
    let config = EnvConfig::default();
    let (mut env, _) = MockEnv::reset(TaskKind::MoveBucket, config.clone(), 12).unwrap();
    let Fixture::Bucket { platform_top, .. } = env.state.fixture else {
        panic!("bucket fixture");
    };
    let target = env.state.object.target_point.unwrap();
    env.state.object.object_pose.x = target[0] + 0.05;
    env.state.object.object_pose.y = target[1];
    env.state.object.base_height = platform_top;
    env.state.robot.grasping = vec![true, true];
    assert!(!env.success());
    env.state.robot.grasping = vec![false, false];
    assert!(env.success());
    env.state.object.base_height = platform_top + 0.2;
    assert!(!env.success());
    env.state.object.base_height = platform_top;
    env.state.object.object_pose.x = target[0] + 0.2;
    assert!(!env.success());
    assert_eq!(env.state.object.kind, ObjectKind::Bucket);
}

#[test]
fn released_bucket_drops_to_support() {
    let (mut env, _) = MockEnv::reset(TaskKind::MoveBucket, EnvConfig::default(), 12).unwrap();
    let target = env.state.object.target_point.unwrap();
    env.state.object.object_pose.x = target[0];
    env.state.object.object_pose.y = target[1];
    env.state.object.base_height = 0.5;
    let a = zero(&env);
    let out = env.step(&a).unwrap();
    let Fixture::Bucket { platform_top, .. } = env.state.fixture else {
        panic!("bucket fixture");
    };
    assert_eq!(out.observation.object.base_height, platform_top);
    assert!(out.success && out.done);
}

#[test]
fn chair_success_is_planar_distance() {
    let (mut env, _) = MockEnv::reset(TaskKind::PushChair, EnvConfig::default(), 0).unwrap();
    let t = env.state.object.target_point.unwrap();
    env.state.object.object_pose.x = t[0] + 0.1;
    env.state.object.object_pose.y = t[1] - 0.1;
    assert!(env.success());
    env.state.object.object_pose.x = t[0] + 0.12;
    assert!(!env.success());
}
