use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use hrm_cli::{
    build_report, cmd_run, load_config, read_log, render, replay, PlanSource, ReportFormat,
    RunManifest, SeedRange, Verbosity,
};
use hrm_core::plans::builtin_document;
use hrm_core::{EnvConfig, TaskKind};

#[derive(Parser)]
#[command(
    name = "hrm",
    version,
    about = "Run rule-based manipulation plans in the mock environment"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded episodes and write per-episode logs plus summary.json.
    Run {
        #[arg(long)]
        task: TaskKind,
        /// `builtin` or a path to a plan document.
        #[arg(long, default_value = "builtin")]
        plan: String,
        /// Inclusive range, e.g. `1..10`.
        #[arg(long, default_value = "0..99")]
        seeds: SeedRange,
        /// Environment config document; unset keys keep their defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, env = "HRM_OUT_DIR", default_value = "hrm-out")]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(short, long, conflicts_with = "verbose")]
        quiet: bool,
        /// Print one line per episode.
        #[arg(short, long)]
        verbose: bool,
    },
    /// Tabulate success rates from one or more summary files.
    Report {
        #[arg(required = true)]
        summaries: Vec<PathBuf>,
        #[arg(long, default_value = "table")]
        format: ReportFormat,
    },
    /// Re-execute a trajectory log and check every observation.
    Replay { log: PathBuf },
    /// Print the bundled plan document for a task.
    Plan { task: TaskKind },
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run {
            task,
            plan,
            seeds,
            config,
            out,
            jobs,
            quiet,
            verbose,
        } => {
            let config = match config {
                Some(path) => load_config(&path)?,
                None => EnvConfig::default(),
            };
            let verbosity = match (quiet, verbose) {
                (true, _) => Verbosity::Quiet,
                (_, true) => Verbosity::Verbose,
                _ => Verbosity::Normal,
            };
            let manifest = RunManifest {
                task,
                plan: PlanSource::parse(&plan),
                config,
                seeds,
                out,
                jobs,
                verbosity,
            };
            let outcome = cmd_run(&manifest)?;
            let s = &outcome.summary;
            if verbosity != Verbosity::Quiet {
                println!(
                    "{}: {}/{} succeeded (rate {:.3}, mean steps {:.1}), summary at {}",
                    s.task,
                    s.successes,
                    s.episodes,
                    s.success_rate,
                    s.mean_steps,
                    outcome.summary_path.display()
                );
            }
            if outcome.all_executed() {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("error: {} episode(s) stopped on an error", s.errors);
                Ok(ExitCode::FAILURE)
            }
        }
        Command::Report { summaries, format } => {
            let report = build_report(&summaries)?;
            for skipped in &report.skipped {
                eprintln!("warning: skipping {}: {}", skipped.source, skipped.reason);
            }
            print!("{}", render(&report, format));
            Ok(ExitCode::SUCCESS)
        }
        Command::Replay { log } => {
            let parsed = read_log(&log)?;
            let report = replay(&parsed)?;
            if report.is_exact() {
                println!(
                    "{}: {} steps reproduced exactly",
                    log.display(),
                    report.steps
                );
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!(
                    "{}: observations differ after steps {:?}",
                    log.display(),
                    report.mismatches
                );
                Ok(ExitCode::FAILURE)
            }
        }
        Command::Plan { task } => {
            print!("{}", builtin_document(task));
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
