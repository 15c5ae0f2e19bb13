use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, ensure, Context, Result};
use hrm_core::plans::{load_plan, Plan};
use hrm_core::{builtin_plan, run_batch, BatchSummary, EnvConfig, SeedOutcome, TaskKind};
use serde::{Deserialize, Serialize};

use crate::log::write_log;

pub const SUMMARY_SCHEMA: &str = "hrm-summary/1";
pub const SUMMARY_FILE: &str = "summary.json";

/// Inclusive seed range, written `A..B` (or `A..=B`, or a single `A`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRange {
    pub start: u64,
    pub end: u64,
}

impl SeedRange {
    pub fn seeds(&self) -> Vec<u64> {
        (self.start..=self.end).collect()
    }

    pub fn len(&self) -> usize {
        (self.end - self.start) as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl FromStr for SeedRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |t: &str| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| format!("invalid seed `{t}` in `{s}`"))
        };
        let (start, end) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b.strip_prefix('=').unwrap_or(b))?),
            None => {
                let v = parse(s)?;
                (v, v)
            }
        };
        if end < start {
            return Err(format!("seed range `{s}` is empty"));
        }
        Ok(Self { start, end })
    }
}

impl fmt::Display for SeedRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanSource {
    Builtin,
    File(PathBuf),
}

impl PlanSource {
    pub fn parse(s: &str) -> Self {
        if s == "builtin" {
            Self::Builtin
        } else {
            Self::File(PathBuf::from(s))
        }
    }

    pub fn load(&self, task: TaskKind) -> Result<Plan> {
        let plan = match self {
            Self::Builtin => builtin_plan(task),
            Self::File(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading plan file {}", path.display()))?;
                load_plan(&text).with_context(|| format!("loading plan {}", path.display()))?
            }
        };
        ensure!(
            plan.task == task,
            "plan is for {} but --task is {task}",
            plan.task
        );
        Ok(plan)
    }
}

impl fmt::Display for PlanSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Builtin => f.write_str("builtin"),
            Self::File(p) => write!(f, "{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Verbosity {
    Quiet,
    #[default]
    Normal,
    Verbose,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub task: TaskKind,
    pub plan: PlanSource,
    pub config: EnvConfig,
    pub seeds: SeedRange,
    pub out: PathBuf,
    pub jobs: usize,
    pub verbosity: Verbosity,
}

impl RunManifest {
    pub fn new(task: TaskKind, seeds: SeedRange, out: impl Into<PathBuf>) -> Self {
        Self {
            task,
            plan: PlanSource::Builtin,
            config: EnvConfig::default(),
            seeds,
            out: out.into(),
            jobs: 1,
            verbosity: Verbosity::Quiet,
        }
    }
}

pub fn load_config(path: &Path) -> Result<EnvConfig> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    EnvConfig::from_toml_str(&text).with_context(|| format!("loading config {}", path.display()))
}

/// The `summary.json` document written by [`cmd_run`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema: String,
    pub task: TaskKind,
    pub plan: String,
    pub seeds: SeedRange,
    pub episodes: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_steps: f64,
    /// Episodes that stopped on an error instead of running to completion.
    pub errors: usize,
    pub per_seed: Vec<SeedOutcome>,
}

impl RunSummary {
    fn new(manifest: &RunManifest, batch: BatchSummary) -> Self {
        Self {
            schema: SUMMARY_SCHEMA.to_string(),
            task: batch.task,
            plan: manifest.plan.to_string(),
            seeds: manifest.seeds,
            episodes: batch.episodes,
            successes: batch.successes,
            success_rate: batch.success_rate,
            mean_steps: batch.mean_steps,
            errors: batch.per_seed.iter().filter(|o| o.error.is_some()).count(),
            per_seed: batch.per_seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub summary: RunSummary,
    pub summary_path: PathBuf,
    pub logs: Vec<PathBuf>,
}

impl RunOutcome {
    /// Whether every episode ran to completion, successful or not.
    pub fn all_executed(&self) -> bool {
        self.summary.errors == 0
    }
}

pub fn log_file_name(task: TaskKind, seed: u64) -> String {
    format!("episode_{task}_{seed}.jsonl")
}

/// Runs every seed and writes one log per completed episode plus the summary.
///
/// Plan, config and output directory problems abort before anything is
/// written.
pub fn cmd_run(manifest: &RunManifest) -> Result<RunOutcome> {
    manifest.config.validate()?;
    let plan = manifest.plan.load(manifest.task)?;
    fs::create_dir_all(&manifest.out)
        .with_context(|| format!("creating output directory {}", manifest.out.display()))?;
    let meta = fs::metadata(&manifest.out)?;
    if !meta.is_dir() || meta.permissions().readonly() {
        bail!(
            "output directory {} is not writable",
            manifest.out.display()
        );
    }

    let seeds = manifest.seeds.seeds();
    let results = run_batch(
        manifest.task,
        &plan,
        &manifest.config,
        &seeds,
        manifest.jobs,
    );
    let plan_name = manifest.plan.to_string();
    let mut logs = Vec::new();
    for (seed, result) in &results {
        match result {
            Ok(episode) => {
                let path = manifest.out.join(log_file_name(manifest.task, *seed));
                write_log(&path, episode, &plan_name, &manifest.config)?;
                if manifest.verbosity == Verbosity::Verbose {
                    eprintln!(
                        "seed {seed}: {} in {} steps",
                        if episode.success {
                            "success"
                        } else {
                            "failure"
                        },
                        episode.steps
                    );
                }
                logs.push(path);
            }
            Err(e) => {
                if manifest.verbosity != Verbosity::Quiet {
                    eprintln!("seed {seed}: {e}");
                }
            }
        }
    }

    let summary = RunSummary::new(
        manifest,
        BatchSummary::from_results(manifest.task, &results),
    );
    let summary_path = manifest.out.join(SUMMARY_FILE);
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    fs::write(&summary_path, text)
        .with_context(|| format!("writing {}", summary_path.display()))?;
    Ok(RunOutcome {
        summary,
        summary_path,
        logs,
    })
}
