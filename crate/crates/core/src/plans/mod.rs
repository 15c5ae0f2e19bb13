//! Task solutions as ordered sub-task lists.
//!
//! A plan document is TOML: a top-level `task` key followed by one
//! `[[entry]]` table per sub-task, executed strictly in order.
//!
//! ```toml
//! task = "open_cabinet_drawer"
//!
//! [[entry]]
//! kind = "move_steps"          # fixed action for `steps` steps
//! label = "grasp the handle"
//! steps = 15
//! action = { left_finger_0 = 1.0, left_finger_1 = 1.0 }
//!
//! [[entry]]
//! kind = "move_to"             # drive `slot` at ±velocity until |target - selector| < threshold
//! label = "align finger height"
//! slot = "platform_height"
//! selector = "finger_height"
//! target = "handle_height"     # or a number
//! velocity = 0.35
//! threshold = 0.01
//!
//! [[entry]]
//! kind = "stabilizer_on"       # optional: initial_velocity, decay, floor_velocity
//! label = "hold the arm pose"
//! ```

mod target;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::{ActionIndexMap, ActionVector};
use crate::observation::{Observation, TaskKind};
use crate::subtasks::{MoveSteps, MoveTo, ObservationSelector, StabilizerConfig, SubTaskError};

pub use target::{TargetExpr, UnresolvedTarget};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("plan document is empty")]
    Empty,
    #[error("malformed plan document: {0}")]
    Parse(String),
    #[error("entry {index} ({label}): {message}")]
    Invalid {
        index: usize,
        label: String,
        message: String,
    },
    #[error("plan has no entries")]
    NoEntries,
    #[error("plan is for {plan} but the observed object belongs to {observed}")]
    KindMismatch { plan: String, observed: String },
    #[error("entry {index} ({label}): {source}")]
    Resolve {
        index: usize,
        label: String,
        source: SubTaskErrorOrTarget,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SubTaskErrorOrTarget {
    #[error("{0}")]
    Target(String),
    #[error(transparent)]
    SubTask(#[from] SubTaskError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlanEntry {
    MoveSteps {
        label: String,
        steps: usize,
        /// Slot name → command; unnamed slots are zero.
        action: BTreeMap<String, f64>,
    },
    MoveTo {
        label: String,
        slot: String,
        selector: ObservationSelector,
        target: TargetExpr,
        velocity: f64,
        threshold: f64,
    },
    StabilizerOn {
        label: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        initial_velocity: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        decay: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        floor_velocity: Option<f64>,
    },
}

impl PlanEntry {
    pub fn label(&self) -> &str {
        match self {
            PlanEntry::MoveSteps { label, .. }
            | PlanEntry::MoveTo { label, .. }
            | PlanEntry::StabilizerOn { label, .. } => label,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            PlanEntry::MoveSteps { .. } => "move_steps",
            PlanEntry::MoveTo { .. } => "move_to",
            PlanEntry::StabilizerOn { .. } => "stabilizer_on",
        }
    }

    pub fn is_marker(&self) -> bool {
        matches!(self, PlanEntry::StabilizerOn { .. })
    }

    fn stabilizer_config(&self) -> Option<StabilizerConfig> {
        match self {
            PlanEntry::StabilizerOn {
                initial_velocity,
                decay,
                floor_velocity,
                ..
            } => {
                let d = StabilizerConfig::default();
                Some(StabilizerConfig {
                    initial_velocity: initial_velocity.unwrap_or(d.initial_velocity),
                    decay: decay.unwrap_or(d.decay),
                    floor_velocity: floor_velocity.unwrap_or(d.floor_velocity),
                })
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub task: TaskKind,
    #[serde(rename = "entry", default)]
    pub entries: Vec<PlanEntry>,
}

impl Plan {
    pub fn action_map(&self) -> ActionIndexMap {
        self.task.action_map()
    }

    /// Entries that consume environment steps.
    pub fn executable_count(&self) -> usize {
        self.entries.iter().filter(|e| !e.is_marker()).count()
    }

    pub fn marker_count(&self) -> usize {
        self.entries.iter().filter(|e| e.is_marker()).count()
    }

    pub fn kinds(&self) -> Vec<&'static str> {
        self.entries.iter().map(PlanEntry::kind_name).collect()
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        if self.entries.is_empty() {
            return Err(PlanError::NoEntries);
        }
        let map = self.action_map();
        let mut seen_marker = false;
        for (index, entry) in self.entries.iter().enumerate() {
            let invalid = |message: String| PlanError::Invalid {
                index,
                label: entry.label().to_string(),
                message,
            };
            match entry {
                PlanEntry::MoveSteps { steps, action, .. } => {
                    if *steps == 0 {
                        return Err(invalid("`steps` must be positive".into()));
                    }
                    for (slot, value) in action {
                        map.index_of_name(slot)
                            .map_err(|e| invalid(e.to_string()))?;
                        if !value.is_finite() {
                            return Err(invalid(format!("command for `{slot}` is not finite")));
                        }
                    }
                }
                PlanEntry::MoveTo {
                    slot,
                    selector,
                    velocity,
                    threshold,
                    ..
                } => {
                    map.index_of_name(slot)
                        .map_err(|e| invalid(e.to_string()))?;
                    if let ObservationSelector::ArmJoint { arm, joint } = selector {
                        if map.joint_index(arm.index(), *joint).is_none() {
                            return Err(invalid(format!(
                                "selector `{selector}` is outside the robot layout"
                            )));
                        }
                    }
                    if !(*velocity > 0.0 && *velocity <= 1.0) {
                        return Err(invalid(format!(
                            "`velocity` must lie in (0, 1], got {velocity}"
                        )));
                    }
                    if !(*threshold > 0.0 && threshold.is_finite()) {
                        return Err(invalid(format!(
                            "`threshold` must be positive, got {threshold}"
                        )));
                    }
                }
                PlanEntry::StabilizerOn { .. } => {
                    if seen_marker {
                        return Err(invalid("`stabilizer_on` may appear at most once".into()));
                    }
                    seen_marker = true;
                    entry
                        .stabilizer_config()
                        .expect("marker")
                        .validate()
                        .map_err(|e| invalid(e.to_string()))?;
                }
            }
        }
        Ok(())
    }
}

/// Parses and validates a plan document.
pub fn load_plan(text: &str) -> Result<Plan, PlanError> {
    if text.trim().is_empty() {
        return Err(PlanError::Empty);
    }
    let plan: Plan = toml::from_str(text).map_err(|e| PlanError::Parse(e.to_string()))?;
    plan.validate()?;
    Ok(plan)
}

pub fn serialize_plan(plan: &Plan) -> String {
    toml::to_string(plan).expect("plans always serialize")
}

const DOOR: &str = include_str!("../../plans/open_cabinet_door.toml");
const DRAWER: &str = include_str!("../../plans/open_cabinet_drawer.toml");
const BUCKET: &str = include_str!("../../plans/move_bucket.toml");
const CHAIR: &str = include_str!("../../plans/push_chair.toml");

/// The bundled document for a task.
pub fn builtin_document(task: TaskKind) -> &'static str {
    match task {
        TaskKind::OpenCabinetDoor => DOOR,
        TaskKind::OpenCabinetDrawer => DRAWER,
        TaskKind::MoveBucket => BUCKET,
        TaskKind::PushChair => CHAIR,
    }
}

pub fn builtin_plan(task: TaskKind) -> Plan {
    let plan = load_plan(builtin_document(task)).expect("bundled plans are valid");
    assert_eq!(plan.task, task, "bundled plan task mismatch");
    plan
}

/// A plan entry instantiated against the first observation of an episode.
#[derive(Debug, Clone, PartialEq)]
pub enum SubTask {
    MoveSteps(MoveSteps),
    MoveTo(MoveTo),
    StabilizerOn {
        config: StabilizerConfig,
        activated: bool,
    },
}

impl SubTask {
    pub fn is_done(&self) -> bool {
        match self {
            SubTask::MoveSteps(t) => t.is_done(),
            SubTask::MoveTo(t) => t.is_done(),
            SubTask::StabilizerOn { activated, .. } => *activated,
        }
    }

    pub fn is_marker(&self) -> bool {
        matches!(self, SubTask::StabilizerOn { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedEntry {
    pub label: String,
    pub task: SubTask,
}

/// Instantiates every entry, evaluating symbolic targets once.
pub fn resolve(plan: &Plan, init_obs: &Observation) -> Result<Vec<ResolvedEntry>, PlanError> {
    plan.validate()?;
    if plan.task.object_kind() != init_obs.object.kind {
        return Err(PlanError::KindMismatch {
            plan: plan.task.to_string(),
            observed: format!("{:?}", init_obs.object.kind).to_lowercase(),
        });
    }
    let map = plan.action_map();
    plan.entries
        .iter()
        .enumerate()
        .map(|(index, entry)| {
            let wrap = |source: SubTaskErrorOrTarget| PlanError::Resolve {
                index,
                label: entry.label().to_string(),
                source,
            };
            let task = match entry {
                PlanEntry::MoveSteps { steps, action, .. } => {
                    let mut fixed = ActionVector::zeros(map.dim())
                        .map_err(|e| wrap(SubTaskError::from(e).into()))?;
                    for (slot, value) in action {
                        let i = map
                            .index_of_name(slot)
                            .map_err(|e| wrap(SubTaskError::from(e).into()))?;
                        fixed
                            .set(i, *value)
                            .map_err(|e| wrap(SubTaskError::from(e).into()))?;
                    }
                    SubTask::MoveSteps(MoveSteps::new(fixed, *steps).map_err(|e| wrap(e.into()))?)
                }
                PlanEntry::MoveTo {
                    slot,
                    selector,
                    target,
                    velocity,
                    threshold,
                    ..
                } => {
                    let i = map
                        .index_of_name(slot)
                        .map_err(|e| wrap(SubTaskError::from(e).into()))?;
                    let value = target
                        .evaluate(init_obs)
                        .map_err(|e| wrap(SubTaskErrorOrTarget::Target(e.to_string())))?;
                    SubTask::MoveTo(
                        MoveTo::new(i, map.dim(), value, *selector, *velocity, *threshold)
                            .map_err(|e| wrap(e.into()))?,
                    )
                }
                PlanEntry::StabilizerOn { .. } => SubTask::StabilizerOn {
                    config: entry.stabilizer_config().expect("marker"),
                    activated: false,
                },
            };
            Ok(ResolvedEntry {
                label: entry.label().to_string(),
                task,
            })
        })
        .collect()
}
