//! Runs every acceptance criterion with the bundled configuration and prints one verdict line each.

use std::process::ExitCode;

use subconvexity_cli::config::RunConfig;
use subconvexity_cli::suites::Suite;
use subconvexity_cli::{run, Status};

struct Criterion {
    number: u32,
    title: &'static str,
    suite: Suite,
    runtime_limit_seconds: f64,
}

const CRITERIA: [Criterion; 11] = [
    Criterion {
        number: 1,
        title: "Weil bound scan, c <= 2000",
        suite: Suite::WeilScan,
        runtime_limit_seconds: 600.0,
    },
    Criterion {
        number: 2,
        title: "character sum closed form",
        suite: Suite::CharsumVerify,
        runtime_limit_seconds: f64::INFINITY,
    },
    Criterion {
        number: 3,
        title: "key identity, exact Poisson form",
        suite: Suite::Keylemma,
        runtime_limit_seconds: 1800.0,
    },
    Criterion {
        number: 4,
        title: "stationary-phase residual slope",
        suite: Suite::Stationary,
        runtime_limit_seconds: f64::INFINITY,
    },
    Criterion {
        number: 5,
        title: "double integral bound constants",
        suite: Suite::FrakjBound,
        runtime_limit_seconds: f64::INFINITY,
    },
    Criterion {
        number: 6,
        title: "Bessel kernel against its asymptotics",
        suite: Suite::BesselKernel,
        runtime_limit_seconds: f64::INFINITY,
    },
    Criterion {
        number: 7,
        title: "Voronoi identity for d3",
        suite: Suite::VoronoiVerify,
        runtime_limit_seconds: 7200.0,
    },
    Criterion {
        number: 8,
        title: "spacing sums",
        suite: Suite::Spacing,
        runtime_limit_seconds: f64::INFINITY,
    },
    Criterion {
        number: 9,
        title: "exponent optimizer",
        suite: Suite::OptimizeExponents,
        runtime_limit_seconds: 1.0,
    },
    Criterion {
        number: 10,
        title: "connection check",
        suite: Suite::Decompose,
        runtime_limit_seconds: f64::INFINITY,
    },
    Criterion {
        number: 11,
        title: "twisted d3 partial sums growth",
        suite: Suite::MillerScan,
        runtime_limit_seconds: f64::INFINITY,
    },
];

fn main() -> ExitCode {
    let config = RunConfig::default();
    let mut failures = 0;
    for criterion in &CRITERIA {
        let outcome = run(criterion.suite, &config);
        let seconds = outcome.header.wall_seconds;
        let in_time = seconds <= criterion.runtime_limit_seconds;
        let pass = outcome.status == Status::Pass && in_time;
        let mut detail = String::new();
        if let Some(error) = &outcome.report.error {
            detail = format!("; error: {error}");
        } else if let Some(check) = outcome.report.checks.iter().find(|c| !c.pass) {
            detail = format!(
                "; failed {}: observed {} bound {}",
                check.name, check.observed, check.bound
            );
        } else if !in_time {
            detail = format!("; runtime above {} s", criterion.runtime_limit_seconds);
        }
        println!(
            "criterion {} ({}, suite {}): {} [{} checks, {:.2} s{}]",
            criterion.number,
            criterion.title,
            criterion.suite,
            if pass { "PASS" } else { "FAIL" },
            outcome.report.checks.len(),
            seconds,
            detail
        );
        if !pass {
            failures += 1;
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        CRITERIA.len() - failures,
        CRITERIA.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
