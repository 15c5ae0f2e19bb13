//! Trajectory log format.
//!
//! One JSON object per line. The first line is a `header` record carrying
//! [`LOG_SCHEMA`], the task, seed and environment config; then one `step`
//! record per control step; the last line is a `result` record with the
//! final observation. Step records hold the observation the action was
//! computed from, so feeding the logged actions back through a freshly reset
//! environment must reproduce each following record's observation.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use hrm_core::{
    ActionVector, EnvConfig, EpisodeResult, MockEnv, Observation, StepRecord, TaskKind,
};
use serde::{Deserialize, Serialize};

pub const LOG_SCHEMA: &str = "hrm-trajectory/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum LogRecord {
    Header(LogHeader),
    Step(Box<LogStep>),
    Result(Box<LogResult>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub schema: String,
    pub task: TaskKind,
    pub seed: u64,
    /// `builtin` or the plan path as given.
    pub plan: String,
    pub action_slots: Vec<String>,
    pub config: EnvConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlatformPose {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
    pub height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectSummary {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
    pub base_height: f64,
    pub handle: [f64; 3],
    pub articulation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogStep {
    pub step: usize,
    pub subtask: usize,
    pub label: String,
    /// Clamped action sent to the environment.
    pub action: ActionVector,
    pub main: ActionVector,
    pub stabilizer: Option<ActionVector>,
    pub platform: PlatformPose,
    pub object: ObjectSummary,
    pub observation: Observation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogResult {
    pub success: bool,
    pub steps: usize,
    pub plan_completed: bool,
    pub stabilizer_enabled_at: Option<usize>,
    pub final_observation: Observation,
}

impl LogStep {
    fn from_record(r: &StepRecord) -> Self {
        let robot = &r.observation.robot;
        let object = &r.observation.object;
        Self {
            step: r.step,
            subtask: r.subtask,
            label: r.label.clone(),
            action: r.action.clone(),
            main: r.main.clone(),
            stabilizer: r.stabilizer.clone(),
            platform: PlatformPose {
                x: robot.platform_x,
                y: robot.platform_y,
                yaw: robot.platform_yaw,
                height: robot.platform_height,
            },
            object: ObjectSummary {
                x: object.object_pose.x,
                y: object.object_pose.y,
                yaw: object.object_pose.yaw,
                base_height: object.base_height,
                handle: object.handle_position,
                articulation: object.articulation_value,
            },
            observation: r.observation.clone(),
        }
    }
}

/// Log lines of one episode, newline-terminated.
pub fn render_log(episode: &EpisodeResult, plan: &str, config: &EnvConfig) -> String {
    let header = LogRecord::Header(LogHeader {
        schema: LOG_SCHEMA.to_string(),
        task: episode.task,
        seed: episode.seed,
        plan: plan.to_string(),
        action_slots: episode
            .task
            .action_map()
            .slots()
            .map(|s| s.to_string())
            .collect(),
        config: config.clone(),
    });
    let mut out = String::new();
    let mut push = |record: &LogRecord| {
        out.push_str(&serde_json::to_string(record).expect("log records serialize"));
        out.push('\n');
    };
    push(&header);
    for r in &episode.trajectory {
        push(&LogRecord::Step(Box::new(LogStep::from_record(r))));
    }
    push(&LogRecord::Result(Box::new(LogResult {
        success: episode.success,
        steps: episode.steps,
        plan_completed: episode.plan_completed,
        stabilizer_enabled_at: episode.stabilizer_enabled_at,
        final_observation: episode.final_observation.clone(),
    })));
    out
}

pub fn write_log(
    path: &Path,
    episode: &EpisodeResult,
    plan: &str,
    config: &EnvConfig,
) -> Result<()> {
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    w.write_all(render_log(episode, plan, config).as_bytes())
        .and_then(|_| w.flush())
        .with_context(|| format!("writing {}", path.display()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedLog {
    pub header: LogHeader,
    pub steps: Vec<LogStep>,
    pub result: LogResult,
}

pub fn read_log(path: &Path) -> Result<ParsedLog> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut header = None;
    let mut steps = Vec::new();
    let mut result = None;
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.with_context(|| format!("reading {}", path.display()))?;
        let record: LogRecord = serde_json::from_str(&line)
            .with_context(|| format!("{}:{}: malformed record", path.display(), n + 1))?;
        match (record, n) {
            (LogRecord::Header(h), 0) => header = Some(h),
            (LogRecord::Step(s), n) if n > 0 && result.is_none() => steps.push(*s),
            (LogRecord::Result(r), n) if n > 0 && result.is_none() => result = Some(*r),
            _ => bail!("{}:{}: record out of order", path.display(), n + 1),
        }
    }
    let header = header.with_context(|| format!("{}: missing header", path.display()))?;
    ensure!(
        header.schema == LOG_SCHEMA,
        "{}: unsupported schema `{}`",
        path.display(),
        header.schema
    );
    let result = result.with_context(|| format!("{}: missing result record", path.display()))?;
    Ok(ParsedLog {
        header,
        steps,
        result,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayReport {
    pub steps: usize,
    /// Steps whose successor observation differed from the log.
    pub mismatches: Vec<usize>,
}

impl ReplayReport {
    pub fn is_exact(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Re-executes the logged actions and compares every observation.
pub fn replay(log: &ParsedLog) -> Result<ReplayReport> {
    let h = &log.header;
    let (mut env, initial) = MockEnv::reset(h.task, h.config.clone(), h.seed)?;
    let mut mismatches = Vec::new();
    if let Some(first) = log.steps.first() {
        if first.observation != initial {
            mismatches.push(0);
        }
    }
    for (i, step) in log.steps.iter().enumerate() {
        let next = env.step(&step.action)?.observation;
        let expected = log
            .steps
            .get(i + 1)
            .map(|s| &s.observation)
            .unwrap_or(&log.result.final_observation);
        if &next != expected {
            mismatches.push(i + 1);
        }
    }
    Ok(ReplayReport {
        steps: log.steps.len(),
        mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use hrm_core::{builtin_plan, run_episode};

    fn episode(task: TaskKind, seed: u64) -> EpisodeResult {
        run_episode(task, &builtin_plan(task), &EnvConfig::default(), seed).unwrap()
    }

    #[test]
    fn every_line_is_a_record_and_header_leads() {
        let ep = episode(TaskKind::OpenCabinetDrawer, 1);
        let text = render_log(&ep, "builtin", &EnvConfig::default());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), ep.steps + 2);
        assert!(lines[0].contains(r#""record":"header""#));
        assert!(lines[0].contains(LOG_SCHEMA));
        for line in &lines[1..lines.len() - 1] {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            for key in ["step", "label", "action", "platform", "object"] {
                assert!(v.get(key).is_some(), "missing {key}");
            }
            assert_eq!(v["action"].as_array().unwrap().len(), 13);
        }
        assert!(lines.last().unwrap().contains(r#""record":"result""#));
    }

    #[test]
    fn write_read_replay_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        for task in TaskKind::ALL {
            let ep = episode(task, 4);
            let path = dir.path().join(format!("{task}.jsonl"));
            write_log(&path, &ep, "builtin", &EnvConfig::default()).unwrap();
            let parsed = read_log(&path).unwrap();
            assert_eq!(parsed.steps.len(), ep.steps);
            assert_eq!(parsed.result.final_observation, ep.final_observation);
            let report = replay(&parsed).unwrap();
            assert!(report.is_exact(), "{task}: {:?}", report.mismatches);
        }
    }

    #[test]
    fn tampered_action_is_detected() {
        let ep = episode(TaskKind::PushChair, 0);
        let text = render_log(&ep, "builtin", &EnvConfig::default());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("log.jsonl");
        fs::write(&path, text).unwrap();
        let mut parsed = read_log(&path).unwrap();
        parsed.steps[5].action.set(0, 0.0).unwrap();
        parsed.steps[5].action.set(1, 0.0).unwrap();
        parsed.steps[5].action.set(2, 1.0).unwrap();
        let report = replay(&parsed).unwrap();
        assert_eq!(report.mismatches.first(), Some(&6));
    }

    #[test]
    fn malformed_logs_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        fs::write(&path, "{\"record\":\"step\"}\n").unwrap();
        assert!(read_log(&path).is_err());
        fs::write(&path, "not json\n").unwrap();
        let err = read_log(&path).unwrap_err().to_string();
        assert!(err.contains(":1:"), "{err}");
    }
}
