//! Batch runner, trajectory logs and report tables for `hrm-core`.

pub mod log;
pub mod report;
pub mod run;

pub use log::{
    read_log, render_log, replay, write_log, LogRecord, ParsedLog, ReplayReport, LOG_SCHEMA,
};
pub use report::{build_report, render, render_table, Report, ReportFormat, ReportRow};
pub use run::{
    cmd_run, load_config, log_file_name, PlanSource, RunManifest, RunOutcome, RunSummary,
    SeedRange, Verbosity, SUMMARY_FILE, SUMMARY_SCHEMA,
};
