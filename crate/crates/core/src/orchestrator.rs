//! Runs a plan against the mock environment.
//!
//! Each control step picks the first unfinished entry. A `stabilizer_on`
//! marker consumes no step: it captures the current arm pose as the
//! stabilizer reference and the loop moves on to the next entry. Otherwise
//! the entry's action plus the stabilizer's correction is clamped once and
//! sent to the environment. The episode ends when the environment reports
//! success or the step cap, or when every entry has finished.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::ActionVector;
use crate::mockenv::{EnvConfig, EnvError, MockEnv};
use crate::observation::{Observation, TaskKind};
use crate::plans::{resolve, Plan, PlanError, ResolvedEntry, SubTask};
use crate::subtasks::{Stabilizer, SubTaskError};

/// One control step as executed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    /// Index of the active plan entry.
    pub subtask: usize,
    pub label: String,
    /// Observation the action was computed from.
    pub observation: Observation,
    /// Main-stream sub-task output.
    pub main: ActionVector,
    /// Stabilizer correction, once enabled.
    pub stabilizer: Option<ActionVector>,
    /// `main + stabilizer` before clamping.
    pub commanded: ActionVector,
    /// Clamped action sent to the environment.
    pub action: ActionVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub task: TaskKind,
    pub seed: u64,
    pub success: bool,
    pub steps: usize,
    /// Active entry index per step.
    pub subtask_trace: Vec<usize>,
    /// Steps consumed per plan entry.
    pub subtask_calls: Vec<usize>,
    pub trajectory: Vec<StepRecord>,
    pub initial_observation: Observation,
    pub final_observation: Observation,
    /// Step at which the stabilizer was switched on.
    pub stabilizer_enabled_at: Option<usize>,
    /// Whether every plan entry finished.
    pub plan_completed: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EpisodeErrorKind {
    #[error("plan is for {plan}, episode task is {task}")]
    TaskMismatch { plan: TaskKind, task: TaskKind },
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("entry {index} ({label}): {source}")]
    SubTask {
        index: usize,
        label: String,
        source: SubTaskError,
    },
    #[error("stabilizer: {0}")]
    Stabilizer(SubTaskError),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("episode failed at step {step}: {kind}")]
pub struct EpisodeError {
    pub step: usize,
    pub kind: EpisodeErrorKind,
}

fn at(step: usize) -> impl Fn(EpisodeErrorKind) -> EpisodeError {
    move |kind| EpisodeError { step, kind }
}

/// Runs one seeded episode of `task` under `plan`.
pub fn run_episode(
    task: TaskKind,
    plan: &Plan,
    config: &EnvConfig,
    seed: u64,
) -> Result<EpisodeResult, EpisodeError> {
    if plan.task != task {
        return Err(at(0)(EpisodeErrorKind::TaskMismatch {
            plan: plan.task,
            task,
        }));
    }
    let (mut env, mut obs) =
        MockEnv::reset(task, config.clone(), seed).map_err(|e| at(0)(e.into()))?;
    let initial_observation = obs.clone();
    let mut entries: Vec<ResolvedEntry> = resolve(plan, &obs).map_err(|e| at(0)(e.into()))?;

    let map = env.action_map().clone();
    let mut stabilizer: Option<Stabilizer> = None;
    let mut stabilizer_enabled_at = None;
    let mut trajectory = Vec::new();
    let mut subtask_trace = Vec::new();
    let mut subtask_calls = vec![0; entries.len()];
    let mut step = 0;
    let mut plan_completed = false;

    loop {
        let Some(index) = entries.iter().position(|e| !e.task.is_done()) else {
            plan_completed = true;
            break;
        };
        let entry = &mut entries[index];
        let fail = |source: SubTaskError| {
            at(step)(EpisodeErrorKind::SubTask {
                index,
                label: entry.label.clone(),
                source,
            })
        };
        let main = match &mut entry.task {
            SubTask::StabilizerOn { config, activated } => {
                let s = Stabilizer::init(obs.robot.arm_joints.clone(), &map, *config)
                    .map_err(|e| at(step)(EpisodeErrorKind::Stabilizer(e)))?;
                stabilizer = Some(s);
                stabilizer_enabled_at = Some(step);
                *activated = true;
                continue;
            }
            SubTask::MoveSteps(t) => t.step(&obs).map_err(fail)?.0,
            SubTask::MoveTo(t) => t.step(&obs).map_err(fail)?.0,
        };
        let correction = match stabilizer.as_mut() {
            Some(s) => Some(
                s.step(&obs)
                    .map_err(|e| at(step)(EpisodeErrorKind::Stabilizer(e)))?,
            ),
            None => None,
        };
        let commanded = match &correction {
            Some(c) => main
                .add(c)
                .map_err(|e| at(step)(EpisodeErrorKind::Stabilizer(e.into())))?,
            None => main.clone(),
        };
        let action = commanded.clamp();
        let outcome = env.step(&action).map_err(|e| at(step)(e.into()))?;

        subtask_trace.push(index);
        subtask_calls[index] += 1;
        trajectory.push(StepRecord {
            step,
            subtask: index,
            label: entries[index].label.clone(),
            observation: std::mem::replace(&mut obs, outcome.observation),
            main,
            stabilizer: correction,
            commanded,
            action,
        });
        step += 1;
        if outcome.done {
            break;
        }
    }

    Ok(EpisodeResult {
        task,
        seed,
        success: env.success(),
        steps: step,
        subtask_trace,
        subtask_calls,
        trajectory,
        initial_observation,
        final_observation: obs,
        stabilizer_enabled_at,
        plan_completed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed: u64,
    pub success: bool,
    pub steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub task: TaskKind,
    pub episodes: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_steps: f64,
    pub per_seed: Vec<SeedOutcome>,
}

impl BatchSummary {
    /// Summarizes per-seed results; errors count as failures.
    pub fn from_results(
        task: TaskKind,
        results: &[(u64, Result<EpisodeResult, EpisodeError>)],
    ) -> Self {
        let per_seed: Vec<SeedOutcome> = results
            .iter()
            .map(|(seed, r)| match r {
                Ok(ep) => SeedOutcome {
                    seed: *seed,
                    success: ep.success,
                    steps: ep.steps,
                    error: None,
                },
                Err(e) => SeedOutcome {
                    seed: *seed,
                    success: false,
                    steps: e.step,
                    error: Some(e.to_string()),
                },
            })
            .collect();
        let episodes = per_seed.len();
        let successes = per_seed.iter().filter(|o| o.success).count();
        let (success_rate, mean_steps) = if episodes == 0 {
            (0.0, 0.0)
        } else {
            (
                successes as f64 / episodes as f64,
                per_seed.iter().map(|o| o.steps as f64).sum::<f64>() / episodes as f64,
            )
        };
        Self {
            task,
            episodes,
            successes,
            success_rate,
            mean_steps,
            per_seed,
        }
    }
}

/// Runs one episode per seed on `jobs` worker threads.
///
/// Results are ordered by seed and identical for any `jobs`.
pub fn run_batch(
    task: TaskKind,
    plan: &Plan,
    config: &EnvConfig,
    seeds: &[u64],
    jobs: usize,
) -> Vec<(u64, Result<EpisodeResult, EpisodeError>)> {
    let run = || {
        let mut results: Vec<_> = seeds
            .par_iter()
            .map(|&seed| (seed, run_episode(task, plan, config, seed)))
            .collect();
        results.sort_by_key(|(seed, _)| *seed);
        results
    };
    match rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
    {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plans::{builtin_plan, load_plan};

    #[test]
    fn builtin_plans_succeed_on_a_few_seeds() {
        let config = EnvConfig::default();
        for task in TaskKind::ALL {
            let plan = builtin_plan(task);
            for seed in 0..5 {
                let ep = run_episode(task, &plan, &config, seed).unwrap();
                assert!(
                    ep.success,
                    "{task} seed {seed} failed after {} steps",
                    ep.steps
                );
                assert!(ep.steps <= config.max_steps);
            }
        }
    }

    #[test]
    fn marker_consumes_no_step() {
        let task = TaskKind::MoveBucket;
        let plan = builtin_plan(task);
        let ep = run_episode(task, &plan, &EnvConfig::default(), 3).unwrap();
        let marker = plan.entries.iter().position(|e| e.is_marker()).unwrap();
        assert_eq!(ep.subtask_calls[marker], 0);
        assert!(!ep.subtask_trace.contains(&marker));
        let at = ep.stabilizer_enabled_at.unwrap();
        assert!(ep.trajectory[..at].iter().all(|r| r.stabilizer.is_none()));
        assert!(ep.trajectory[at..].iter().all(|r| r.stabilizer.is_some()));
        // The first stabilized step belongs to the entry after the marker.
        assert_eq!(ep.trajectory[at].subtask, marker + 1);
    }

    #[test]
    fn commanded_is_sum_and_action_is_its_clamp() {
        let task = TaskKind::PushChair;
        let ep = run_episode(task, &builtin_plan(task), &EnvConfig::default(), 11).unwrap();
        for r in &ep.trajectory {
            let expected = match &r.stabilizer {
                Some(s) => r.main.add(s).unwrap(),
                None => r.main.clone(),
            };
            assert_eq!(r.commanded, expected);
            assert_eq!(r.action, r.commanded.clamp());
        }
    }

    #[test]
    fn trace_is_monotone_and_counts_match() {
        let task = TaskKind::OpenCabinetDoor;
        let ep = run_episode(task, &builtin_plan(task), &EnvConfig::default(), 2).unwrap();
        assert!(ep.subtask_trace.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(ep.subtask_calls.iter().sum::<usize>(), ep.steps);
        assert_eq!(ep.trajectory.len(), ep.steps);
        for (i, r) in ep.trajectory.iter().enumerate() {
            assert_eq!(r.step, i);
            assert_eq!(r.observation.step_index, i);
        }
        assert_eq!(ep.final_observation.step_index, ep.steps);
    }

    #[test]
    fn plan_exhaustion_ends_episode_without_success() {
        let text = r#"
task = "open_cabinet_drawer"

[[entry]]
kind = "move_steps"
label = "idle"
steps = 4
action = {}
"#;
        let plan = load_plan(text).unwrap();
        let ep = run_episode(TaskKind::OpenCabinetDrawer, &plan, &EnvConfig::default(), 0).unwrap();
        assert_eq!(ep.steps, 4);
        assert!(ep.plan_completed);
        assert!(!ep.success);
    }

    #[test]
    fn step_cap_bounds_long_plans() {
        let text = r#"
task = "open_cabinet_drawer"

[[entry]]
kind = "move_steps"
label = "idle"
steps = 500
action = {}
"#;
        let plan = load_plan(text).unwrap();
        let ep = run_episode(TaskKind::OpenCabinetDrawer, &plan, &EnvConfig::default(), 0).unwrap();
        assert_eq!(ep.steps, 200);
        assert!(!ep.plan_completed);
    }

    #[test]
    fn mismatched_task_is_rejected() {
        let plan = builtin_plan(TaskKind::MoveBucket);
        let err = run_episode(TaskKind::PushChair, &plan, &EnvConfig::default(), 0).unwrap_err();
        assert!(matches!(err.kind, EpisodeErrorKind::TaskMismatch { .. }));
    }

    #[test]
    fn batch_is_independent_of_job_count() {
        let task = TaskKind::OpenCabinetDrawer;
        let plan = builtin_plan(task);
        let seeds: Vec<u64> = (0..12).rev().collect();
        let config = EnvConfig::default();
        let one = run_batch(task, &plan, &config, &seeds, 1);
        let four = run_batch(task, &plan, &config, &seeds, 4);
        assert_eq!(one, four);
        let order: Vec<u64> = one.iter().map(|(s, _)| *s).collect();
        assert_eq!(order, (0..12).collect::<Vec<_>>());
        let summary = BatchSummary::from_results(task, &one);
        assert_eq!(summary.episodes, 12);
        assert_eq!(
            summary.successes,
            summary.per_seed.iter().filter(|o| o.success).count()
        );
    }
}
