//! Command-line front end: configuration, suites and report writing.

pub mod config;
pub mod report;
pub mod suites;

use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use subconvexity_core::Error as CoreError;

use config::RunConfig;
use report::{write_outputs, RunHeader, RunReport, Table};
use suites::Suite;

/// Bad flags, unreadable or invalid configuration.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

/// Process exit status of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    /// Every check passed.
    Pass = 0,
    /// The suite ran to completion and at least one check failed.
    Fail = 1,
    /// Invalid input: configuration, domain or precondition errors.
    Usage = 2,
    /// A budget or accuracy failure; a partial report was written.
    Incomplete = 3,
}

impl Status {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// Maps an error raised by a suite to its exit status.
pub fn classify(error: &anyhow::Error) -> Status {
    if error.downcast_ref::<UsageError>().is_some() {
        return Status::Usage;
    }
    match error.downcast_ref::<CoreError>() {
        Some(CoreError::Domain(_) | CoreError::Precondition(_) | CoreError::NotCoprime { .. }) => Status::Usage,
        _ => Status::Incomplete,
    }
}

/// The outcome of one suite run.
pub struct Outcome {
    pub report: RunReport,
    pub header: RunHeader,
    pub table: Table,
    pub status: Status,
}

/// Runs `suite`, catching errors into the report.
pub fn run(suite: Suite, config: &RunConfig) -> Outcome {
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64());
    let clock = Instant::now();
    let mut report = RunReport::new(suite.name(), suite.topic(), config);
    let mut table = Table::default();
    let status = match suite.run(config, &mut report, &mut table) {
        Ok(()) if report.finish() => Status::Pass,
        Ok(()) => Status::Fail,
        Err(error) => {
            report.error = Some(format!("{error:#}"));
            report.finish();
            classify(&error)
        }
    };
    let header = RunHeader {
        suite: suite.name().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        started_unix: started,
        wall_seconds: clock.elapsed().as_secs_f64(),
        threads: rayon::current_num_threads(),
    };
    Outcome {
        report,
        header,
        table,
        status,
    }
}

/// Runs `suite` and writes its outputs under `out`.
pub fn run_and_write(suite: Suite, config: &RunConfig, out: &Path, csv: bool) -> anyhow::Result<Outcome> {
    let outcome = run(suite, config);
    let table = (csv && !outcome.table.columns.is_empty()).then_some(&outcome.table);
    write_outputs(out, &outcome.report, &outcome.header, table)?;
    Ok(outcome)
}
