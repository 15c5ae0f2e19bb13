use serde::{Deserialize, Serialize};

use super::{MoveTo, ObservationSelector, SubTaskError};
use crate::action::{ActionIndexMap, ActionVector, Arm};
use crate::observation::Observation;

/// Error threshold of every stabilizing joint corrector.
pub const STABILIZER_THRESHOLD: f64 = 0.01;

/// Gain schedule of the degenerative stabilizer.
///
/// The correction velocity decays geometrically from `initial_velocity`
/// by `decay` per step and never drops below `floor_velocity`. `decay = 1`
/// gives a constant-gain stabilizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StabilizerConfig {
    pub initial_velocity: f64,
    pub decay: f64,
    pub floor_velocity: f64,
}

impl Default for StabilizerConfig {
    fn default() -> Self {
        Self {
            initial_velocity: 0.2,
            decay: 0.995,
            floor_velocity: 0.02,
        }
    }
}

impl StabilizerConfig {
    pub fn validate(&self) -> Result<(), SubTaskError> {
        let v0 = self.initial_velocity;
        let floor = self.floor_velocity;
        if !(v0 > 0.0 && v0 <= 1.0) {
            return Err(SubTaskError::InvalidParameter(format!(
                "stabilizer initial velocity must lie in (0, 1], got {v0}"
            )));
        }
        if !(floor > 0.0 && floor <= v0) {
            return Err(SubTaskError::InvalidParameter(format!(
                "stabilizer floor velocity must lie in (0, {v0}], got {floor}"
            )));
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return Err(SubTaskError::InvalidParameter(format!(
                "stabilizer decay must lie in (0, 1], got {}",
                self.decay
            )));
        }
        Ok(())
    }

    /// Correction velocity after `k` stabilizer steps.
    pub fn velocity_at(&self, k: usize) -> f64 {
        let exp = i32::try_from(k).unwrap_or(i32::MAX);
        (self.initial_velocity * self.decay.powi(exp)).max(self.floor_velocity)
    }
}

/// Keeps arm joints at a reference pose.
///
/// One [`MoveTo`] per joint targets the reference angle with threshold
/// [`STABILIZER_THRESHOLD`]. Unlike a plan sub-task, a converged joint
/// re-arms as soon as its error is back at or above the threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct Stabilizer {
    reference: Vec<Vec<f64>>,
    joints: Vec<MoveTo>,
    config: StabilizerConfig,
    dim: usize,
    steps: usize,
    enabled: bool,
}

impl Stabilizer {
    /// Builds the per-joint correctors from a per-arm reference pose.
    pub fn init(
        reference: Vec<Vec<f64>>,
        map: &ActionIndexMap,
        config: StabilizerConfig,
    ) -> Result<Self, SubTaskError> {
        config.validate()?;
        if reference.is_empty() || reference.iter().all(|arm| arm.is_empty()) {
            return Err(SubTaskError::EmptyReference);
        }
        if reference.len() > map.arms() {
            return Err(SubTaskError::InvalidParameter(format!(
                "reference has {} arms, robot has {}",
                reference.len(),
                map.arms()
            )));
        }
        let mut joints = Vec::new();
        for (arm_index, angles) in reference.iter().enumerate() {
            if angles.len() != map.joints_per_arm() {
                return Err(SubTaskError::InvalidParameter(format!(
                    "reference arm {arm_index} has {} joints, robot has {}",
                    angles.len(),
                    map.joints_per_arm()
                )));
            }
            let arm = Arm::from_index(arm_index).expect("at most two arms");
            for (joint, &angle) in angles.iter().enumerate() {
                let index = map
                    .joint_index(arm_index, joint)
                    .expect("joint within layout");
                joints.push(MoveTo::new(
                    index,
                    map.dim(),
                    angle,
                    ObservationSelector::ArmJoint { arm, joint },
                    config.initial_velocity,
                    STABILIZER_THRESHOLD,
                )?);
            }
        }
        Ok(Self {
            reference,
            joints,
            config,
            dim: map.dim(),
            steps: 0,
            enabled: true,
        })
    }

    pub fn reference(&self) -> &[Vec<f64>] {
        &self.reference
    }

    pub fn correctors(&self) -> &[MoveTo] {
        &self.joints
    }

    pub fn is_enabled(&self) -> bool {
        self.enabled
    }

    pub fn set_enabled(&mut self, enabled: bool) {
        self.enabled = enabled;
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Action indices the stabilizer may write to.
    pub fn stabilized_indices(&self) -> Vec<usize> {
        self.joints.iter().map(MoveTo::active_index).collect()
    }

    /// Sum of the per-joint corrections, zero everywhere else.
    ///
    /// A disabled stabilizer returns the zero vector.
    pub fn step(&mut self, obs: &Observation) -> Result<ActionVector, SubTaskError> {
        let mut out = ActionVector::zeros(self.dim)?;
        if !self.enabled {
            return Ok(out);
        }
        let velocity = self.config.velocity_at(self.steps);
        for corrector in &mut self.joints {
            if corrector.is_done() {
                if corrector.distance(obs)?.abs() < STABILIZER_THRESHOLD {
                    continue;
                }
                corrector.rearm();
            }
            corrector.set_velocity(velocity);
            let (action, _) = corrector.step(obs)?;
            out = out.add(&action)?;
        }
        self.steps += 1;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subtasks::fixtures::observation;

    fn single() -> ActionIndexMap {
        ActionIndexMap::new(1, 2, 2)
    }

    #[test]
    fn one_corrector_per_joint() {
        let s = Stabilizer::init(
            vec![vec![0.1, -0.3]],
            &single(),
            StabilizerConfig::default(),
        )
        .unwrap();
        let targets: Vec<f64> = s.correctors().iter().map(MoveTo::target).collect();
        assert_eq!(targets, vec![0.1, -0.3]);
        assert!(s
            .correctors()
            .iter()
            .all(|c| c.threshold() == STABILIZER_THRESHOLD));
        assert_eq!(STABILIZER_THRESHOLD, 0.01);
    }

    #[test]
    fn empty_reference_rejected() {
        assert_eq!(
            Stabilizer::init(vec![], &single(), StabilizerConfig::default()),
            Err(SubTaskError::EmptyReference)
        );
        assert_eq!(
            Stabilizer::init(vec![vec![]], &single(), StabilizerConfig::default()),
            Err(SubTaskError::EmptyReference)
        );
        assert!(Stabilizer::init(vec![vec![0.0]], &single(), StabilizerConfig::default()).is_err());
    }

    #[test]
    fn converged_reference_emits_once_then_rests() {
        let map = single();
        let mut obs = observation(1, 2);
        let mut s =
            Stabilizer::init(vec![vec![0.0, 0.0]], &map, StabilizerConfig::default()).unwrap();
        let first = s.step(&obs).unwrap();
        // d = 0 takes the negative branch on every joint.
        assert_eq!(first.get(4), Some(-0.2));
        assert_eq!(first.get(5), Some(-0.2));
        assert!(s.correctors().iter().all(MoveTo::is_done));

        // Inside the band nothing is emitted.
        obs.robot.arm_joints[0] = vec![0.005, -0.005];
        assert!(s.step(&obs).unwrap().is_zero());
    }

    #[test]
    fn displaced_joint_is_pushed_back_and_rearms() {
        let map = single();
        let mut obs = observation(1, 2);
        let mut s =
            Stabilizer::init(vec![vec![0.0, 0.0]], &map, StabilizerConfig::default()).unwrap();
        s.step(&obs).unwrap();
        obs.robot.arm_joints[0][0] = 0.5;
        let out = s.step(&obs).unwrap();
        let v = StabilizerConfig::default().velocity_at(1);
        assert_eq!(out.get(4), Some(-v));
        assert_eq!(out.get(5), Some(0.0));
        assert_eq!(out.support(), vec![4]);
    }

    #[test]
    fn output_stays_on_joint_indices() {
        let map = ActionIndexMap::dual_arm();
        let mut obs = observation(2, 7);
        obs.robot.arm_joints[0][3] = 0.4;
        obs.robot.arm_joints[1][6] = -0.4;
        let reference = vec![vec![0.0; 7], vec![0.0; 7]];
        let mut s = Stabilizer::init(reference, &map, StabilizerConfig::default()).unwrap();
        let allowed = s.stabilized_indices();
        for _ in 0..5 {
            let out = s.step(&obs).unwrap();
            assert!(out.support().iter().all(|i| allowed.contains(i)));
            for slot in ["platform_x", "left_finger_0", "right_finger_1"] {
                assert_eq!(out.get(map.index_of_name(slot).unwrap()), Some(0.0));
            }
        }
    }

    #[test]
    fn gain_schedule() {
        let c = StabilizerConfig::default();
        assert_eq!(c.velocity_at(0), 0.2);
        assert!((c.velocity_at(100) - 0.2 * 0.995f64.powi(100)).abs() < 1e-15);
        assert_eq!(c.velocity_at(10_000), 0.02);
        let constant = StabilizerConfig { decay: 1.0, ..c };
        assert_eq!(constant.velocity_at(500), 0.2);
        assert!(StabilizerConfig {
            floor_velocity: 0.5,
            ..c
        }
        .validate()
        .is_err());
    }

    #[test]
    fn disabled_stabilizer_is_silent() {
        let map = single();
        let mut obs = observation(1, 2);
        obs.robot.arm_joints[0][0] = 1.0;
        let mut s =
            Stabilizer::init(vec![vec![0.0, 0.0]], &map, StabilizerConfig::default()).unwrap();
        s.set_enabled(false);
        assert!(s.step(&obs).unwrap().is_zero());
    }
}
