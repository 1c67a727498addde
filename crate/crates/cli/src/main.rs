use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use subconvexity_cli::config::RunConfig;
use subconvexity_cli::suites::Suite;
use subconvexity_cli::{run_and_write, Status};

/// Numerical verification suites for the twisted GL(3) subconvexity argument.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    /// Suite to run.
    #[arg(value_enum, required_unless_present = "list")]
    suite: Option<Suite>,

    /// TOML file overriding the bundled defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for reports.
    #[arg(long, global = true, default_value = "reports")]
    out: PathBuf,

    /// Overrides the `tolerance` key.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Overrides the `seed` key.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Overrides a configuration key, e.g. `--set weil_c_max=100`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    assignments: Vec<String>,

    /// Also write the suite's table as CSV.
    #[arg(long, global = true)]
    csv: bool,

    /// List the suites and what each checks.
    #[arg(long)]
    list: bool,
}

fn main() -> ExitCode {
    match real_main() {
        Ok(status) => ExitCode::from(status.code() as u8),
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::from(subconvexity_cli::classify(&error).code() as u8)
        }
    }
}

fn real_main() -> anyhow::Result<Status> {
    let args = Args::parse();
    if args.list {
        for suite in Suite::ALL {
            println!("{:<20} {}", suite.name(), suite.topic());
        }
        return Ok(Status::Pass);
    }
    let suite = args.suite.context("no suite given")?;

    let mut assignments = args.assignments.clone();
    if let Some(tol) = args.tol {
        assignments.push(format!("tolerance = {tol:e}"));
    }
    if let Some(seed) = args.seed {
        assignments.push(format!("seed = {seed}"));
    }
    let config = RunConfig::load(args.config.as_deref(), &assignments)?;
    if let Some(threads) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("cannot configure the thread pool")?;
    }

    let outcome = run_and_write(suite, &config, &args.out, args.csv)?;
    for check in &outcome.report.checks {
        println!(
            "{} {}: observed {} bound {}",
            if check.pass { "PASS" } else { "FAIL" },
            check.name,
            check.observed,
            check.bound
        );
    }
    if let Some(error) = &outcome.report.error {
        eprintln!("error: {error}");
    }
    println!(
        "{}: {} ({:.2} s, reports in {})",
        suite,
        if outcome.report.pass { "pass" } else { "fail" },
        outcome.header.wall_seconds,
        args.out.display()
    );
    Ok(outcome.status)
}
