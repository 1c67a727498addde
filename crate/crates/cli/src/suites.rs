use std::fmt;

use anyhow::Result;
use clap::ValueEnum;
use subconvexity_core::arith::gcd;
use subconvexity_core::bessel3::{cross_validate, exponential_envelope, FitOptions, Sign, SpectralParams};
use subconvexity_core::decomposition::{
    connection_check, connection_residual_scan, f1_sharp_diagnostic, key_identity_check, optimize_exponents, s_n,
    stationary_residual_scan,
};
use subconvexity_core::expsums::{
    fit_correlation_constant, frak_c_scan, miller_scan, spacing_scan, weil_scan, MillerScanConfig,
};
use subconvexity_core::oscint::{
    frakj_acceptance_grid, frakj_bound_fit, frakj_outer_phase, frakj_outer_phase_derivative, SmoothWeight,
};
use subconvexity_core::voronoi::{annihilate_log_moments, d3_provider, verify_voronoi, VoronoiCase};

use crate::config::RunConfig;
use crate::report::{Check, RunReport, Table};

/// Every verification suite, one per module operation group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    WeilScan,
    CharsumVerify,
    CorrelationVerify,
    Spacing,
    MillerScan,
    Stationary,
    FrakjBound,
    BesselKernel,
    VoronoiVerify,
    Keylemma,
    Decompose,
    OptimizeExponents,
}

impl Suite {
    pub const ALL: [Suite; 12] = [
        Suite::WeilScan,
        Suite::CharsumVerify,
        Suite::CorrelationVerify,
        Suite::Spacing,
        Suite::MillerScan,
        Suite::Stationary,
        Suite::FrakjBound,
        Suite::BesselKernel,
        Suite::VoronoiVerify,
        Suite::Keylemma,
        Suite::Decompose,
        Suite::OptimizeExponents,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::WeilScan => "weil-scan",
            Suite::CharsumVerify => "charsum-verify",
            Suite::CorrelationVerify => "correlation-verify",
            Suite::Spacing => "spacing",
            Suite::MillerScan => "miller-scan",
            Suite::Stationary => "stationary",
            Suite::FrakjBound => "frakj-bound",
            Suite::BesselKernel => "bessel-kernel",
            Suite::VoronoiVerify => "voronoi-verify",
            Suite::Keylemma => "keylemma",
            Suite::Decompose => "decompose",
            Suite::OptimizeExponents => "optimize-exponents",
        }
    }

    /// The statement the suite checks.
    pub fn topic(self) -> &'static str {
        match self {
            Suite::WeilScan => "Weil bound for every classical Kloosterman sum S(a,b;c) with c up to c_max",
            Suite::CharsumVerify => "closed form of the complete sum over a mod M of two twisted Kloosterman sums",
            Suite::CorrelationVerify => "correlation sums of two Kloosterman sums against the multiplicative bound",
            Suite::Spacing => "spacing count of l1 r2 p2 - l2 r1 p1, plain and filtered by a congruence mod M",
            Suite::MillerScan => "growth of additively twisted d3 partial sums at minor-arc frequencies",
            Suite::Stationary => "stationary-phase residual of the zero-frequency integral as t doubles",
            Suite::FrakjBound => "trivial and spacing bounds for the double oscillatory integral",
            Suite::BesselKernel => "GL(3) Bessel kernel by Mellin-Barnes integration against its asymptotic expansion",
            Suite::VoronoiVerify => "GL(3) Voronoi summation for d3 with a moment-annihilated weight",
            Suite::Keylemma => "Poisson summation of the twisted r-sum into generalized Kloosterman sums",
            Suite::Decompose => "amplified sum F1, its dual term O and the connection with the twisted sum",
            Suite::OptimizeExponents => "exact minimization of the largest exponent in the final bound",
        }
    }

    pub fn run(self, config: &RunConfig, report: &mut RunReport, table: &mut Table) -> Result<()> {
        match self {
            Suite::WeilScan => weil(config, report, table),
            Suite::CharsumVerify => charsum(config, report, table),
            Suite::CorrelationVerify => correlation(config, report, table),
            Suite::Spacing => spacing(config, report, table),
            Suite::MillerScan => miller(config, report, table),
            Suite::Stationary => stationary(config, report, table),
            Suite::FrakjBound => frakj(config, report, table),
            Suite::BesselKernel => bessel(config, report, table),
            Suite::VoronoiVerify => voronoi(config, report, table),
            Suite::Keylemma => keylemma(config, report, table),
            Suite::Decompose => decompose(config, report, table),
            Suite::OptimizeExponents => exponents(config, report, table),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn cells<T: ToString>(values: &[T]) -> Vec<String> {
    values.iter().map(ToString::to_string).collect()
}

fn weil(config: &RunConfig, report: &mut RunReport, table: &mut Table) -> Result<()> {
    let scan = weil_scan(config.weil_c_max);
    *table = Table::new(&["c_max", "sums_checked", "violations", "max_ratio"]);
    table.push(cells(&[
        scan.c_max.to_string(),
        scan.sums_checked.to_string(),
        scan.violations.len().to_string(),
        scan.max_ratio.to_string(),
    ]));
    report.check(Check::at_most("violations", scan.violations.len() as f64, 0.0));
    report.check(Check::at_most("max_ratio", scan.max_ratio, 1.0 + scan.relative_slack));
    report.record("weil_scan", &scan);
    Ok(())
}

fn charsum(config: &RunConfig, report: &mut RunReport, table: &mut Table) -> Result<()> {
    let scan = frak_c_scan(&config.charsum_moduli, 1e-6)?;
    *table = Table::new(&["tuples", "violations", "max_scaled_error"]);
    table.push(cells(&[
        scan.tuples.to_string(),
        scan.violations.to_string(),
        scan.max_scaled_error.to_string(),
    ]));
    report.check(Check::at_most("violations", scan.violations as f64, 0.0));
    report.check(Check::at_most(
        "max |brute - closed| / M^2",
        scan.max_scaled_error,
        scan.tolerance,
    ));
    report.record("scan", &scan);
    Ok(())
}

fn correlation(config: &RunConfig, report: &mut RunReport, table: &mut Table) -> Result<()> {
    let fit = fit_correlation_constant(
        config.correlation_s_max,
        &config.correlation_t_values,
        &config.correlation_n_values,
    );
    *table = Table::new(&["points", "c0", "trivial_modulus_ratio"]);
    table.push(cells(&[
        fit.points.to_string(),
        fit.c0.to_string(),
        fit.trivial_modulus_ratio.to_string(),
    ]));
    report.check(Check::at_most("c0", fit.c0, config.correlation_c0_max));
    report.check(Check::at_most(
        "ratio at [s1,s2] = 1",
        fit.trivial_modulus_ratio,
        1.0 + 1e-9,
    ));
    report.record("fit", &fit);
    Ok(())
}

fn spacing(config: &RunConfig, report: &mut RunReport, table: &mut Table) -> Result<()> {
    let scan = spacing_scan(&config.spacing_anchors, &config.spacing_moduli)?;
    *table = Table::new(&["P", "L", "R", "modulus", "value", "comparison", "ratio"]);
    for r in &scan.reports {
        table.push(cells(&[
            r.p_anchor.to_string(),
            r.l_anchor.to_string(),
            r.r_anchor.to_string(),
            r.modulus.map_or_else(|| "none".to_string(), |m| m.to_string()),
            r.value.to_string(),
            r.comparison.to_string(),
            r.ratio.to_string(),
        ]));
    }
    let max = config.spacing_ratio_max;
    report.check(Check::at_most("max ratio", scan.max_ratio, max));
    report.check(Check::at_most("max M * filtered ratio", scan.max_filtered_ratio, max));
    report.check(Check::at_most(
        "max M * filtered / unfiltered",
        scan.max_gain_ratio,
        max,
    ));
    report.check(Check::equal("filtered <= unfiltered", scan.filter_monotone, true));
    report.record("scan", &scan);
    Ok(())
}

fn miller(config: &RunConfig, report: &mut RunReport, table: &mut Table) -> Result<()> {
    let scan_config = MillerScanConfig {
        x_min: config.miller_x_min,
        x_max: config.miller_x_max,
        grid_points: config.miller_grid_points,
        alpha_samples: config.miller_alpha_samples,
        max_rational_denominator: config.miller_rational_denominator,
        seed: config.seed,
    };
    let scan = miller_scan(&scan_config, &d3_provider())?;
    *table = Table::new(&["X", "max_random", "max_rational", "alpha_zero"]);
    for i in 0..scan.x_grid.len() {
        table.push(cells(&[
            scan.x_grid[i].to_string(),
            scan.max_random[i].to_string(),
            scan.max_rational[i].to_string(),
            scan.alpha_zero[i].to_string(),
        ]));
    }
    report.check(Check::at_most(
        "fitted exponent",
        scan.fitted_exponent,
        config.miller_exponent_max,
    ));
    report.record("scan", &scan);
    Ok(())
}

fn stationary(config: &RunConfig, report: &mut RunReport, table: &mut Table) -> Result<()> {
    let scan = stationary_residual_scan(&config.experiment(), config.stationary_n_ratio, &config.stationary_ts)?;
    *table = Table::new(&["t", "residual"]);
    for (t, r) in scan.ts.iter().zip(&scan.residuals) {
        table.push(cells(&[t, r]));
    }
    report.check(Check::at_most(
        "mean log2 residual ratio",
        scan.mean_log2_ratio,
        config.stationary_slope_max,
    ));
    report.record("scan", &scan);
    Ok(())
}

fn frakj(config: &RunConfig, report: &mut RunReport, table: &mut Table) -> Result<()> {
    let grid = frakj_acceptance_grid(&config.frakj_moduli, &config.frakj_ts, config.frakj_points, config.seed)?;
    let fit = frakj_bound_fit(&grid)?;
    *table = Table::new(&[
        "M",
        "t",
        "r1",
        "p1",
        "l1",
        "r2",
        "p2",
        "l2",
        "abs_value",
        "trivial_bound",
        "spacing_bound",
    ]);
    for (g, r) in grid.iter().zip(&fit.reports) {
        table.push(cells(&[
            g.modulus.to_string(),
            g.t.to_string(),
            g.first.r.to_string(),
            g.first.p.to_string(),
            g.first.ell.to_string(),
            g.second.r.to_string(),
            g.second.p.to_string(),
            g.second.ell.to_string(),
            r.value.norm().to_string(),
            r.trivial_bound.to_string(),
            r.spacing_bound.map_or_else(|| "none".to_string(), |b| b.to_string()),
        ]));
    }
    // central differences of the outer phase against its closed-form derivative
    let mut derivative_error = 0.0f64;
    for r in fit.reports.iter().take(40) {
        for y in [1.0, 1.25, 1.5, 1.75, 2.0] {
            let h = 1e-5;
            let fd = (frakj_outer_phase(y + h, r.z1, r.z2) - frakj_outer_phase(y - h, r.z1, r.z2)) / (2.0 * h);
            derivative_error = derivative_error.max((fd - frakj_outer_phase_derivative(y, r.z1, r.z2)).abs());
        }
    }
    report.check(Check::at_least(
        "grid points",
        fit.points as f64,
        config.frakj_points as f64,
    ));
    report.check(Check::at_most("C1", fit.c1, config.frakj_constant_max));
    report.check(Check::at_most("C2", fit.c2, config.frakj_constant_max));
    report.check(Check::at_most(
        "max relative quadrature error",
        fit.max_relative_error,
        1e-6,
    ));
    report.check(Check::at_most(
        "phase derivative error",
        derivative_error,
        config.frakj_derivative_tol,
    ));
    report.record("points", fit.points);
    report.record("spacing_points", fit.spacing_points);
    report.record("c1", fit.c1);
    report.record("c2", fit.c2);
    report.record("max_relative_error", fit.max_relative_error);
    report.record("derivative_error", derivative_error);
    Ok(())
}

fn bessel(config: &RunConfig, report: &mut RunReport, table: &mut Table) -> Result<()> {
    *table = Table::new(&["sign", "u", "x", "relative_error"]);
    let params = SpectralParams::trivial();
    for (label, sign) in [("plus", Sign::Plus), ("minus", Sign::Minus)] {
        let cv = cross_validate(sign, &params, FitOptions::default(), &config.bessel_us)?;
        for &(u, rel) in &cv.points {
            table.push(cells(&[
                label.to_string(),
                u.to_string(),
                (u * u * u).to_string(),
                rel.to_string(),
            ]));
        }
        report.check(Check::at_most(
            format!("{label}: max relative error"),
            cv.max_rel_error,
            config.bessel_rel_max,
        ));
        report.check(Check::at_most(
            format!("{label}: |B0| refit discrepancy"),
            cv.leading_discrepancy,
            1e-4,
        ));
        let envelope = exponential_envelope(sign, &params, &config.bessel_envelope_us, 30)?;
        report.check(Check::at_most(
            format!("{label}: exponential envelope constant"),
            envelope.constant,
            config.bessel_envelope_max,
        ));
        report.record(&format!("{label}_cross_validation"), &cv);
        report.record(&format!("{label}_envelope"), &envelope);
    }
    Ok(())
}

fn voronoi(config: &RunConfig, report: &mut RunReport, table: &mut Table) -> Result<()> {
    let base = SmoothWeight::bump_with_sharpness(1.0, 8.0, 40.0)?;
    let weight = annihilate_log_moments(&base, config.voronoi_log_moments)?;
    let mut cases = Vec::new();
    for &c in &config.voronoi_moduli {
        for a in (1..c.max(2)).filter(|&a| gcd(a as u64, c as u64) == 1) {
            cases.push(VoronoiCase {
                m: 1,
                a,
                c,
                n_scale: config.voronoi_n_scale,
            });
        }
    }
    let reports = verify_voronoi(&d3_provider(), &cases, &weight, 1e-6)?;
    *table = Table::new(&["m", "a", "c", "N", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "rel_error"]);
    for r in &reports {
        table.push(cells(&[
            r.case.m.to_string(),
            r.case.a.to_string(),
            r.case.c.to_string(),
            r.case.n_scale.to_string(),
            r.lhs.re.to_string(),
            r.lhs.im.to_string(),
            r.rhs.re.to_string(),
            r.rhs.im.to_string(),
            r.rel_error.to_string(),
        ]));
        let name = format!("(m, a, c) = ({}, {}, {})", r.case.m, r.case.a, r.case.c);
        match &r.skipped {
            Some(reason) if r.case.c == 1 => report.record(&name, reason),
            Some(reason) => report.check(Check::equal(name, reason, "evaluated")),
            None => report.check(Check::at_most(name, r.rel_error, config.voronoi_rel_max)),
        }
    }
    report.record("cases", &reports);
    Ok(())
}

fn keylemma(config: &RunConfig, report: &mut RunReport, table: &mut Table) -> Result<()> {
    *table = Table::new(&[
        "M",
        "t",
        "p",
        "l",
        "n",
        "r_max",
        "rel_error_exact",
        "quadrature_error",
        "rel_error_stationary",
    ]);
    let mut runs = Vec::new();
    for &m in &config.keylemma_moduli {
        for &t in &config.keylemma_ts {
            let experiment = config.experiment().with(m, t, config.n_scale);
            experiment.validate()?;
            let (p, ell) = (experiment.p_primes()[0], experiment.l_primes()[0]);
            let r = key_identity_check(&experiment, p, ell, config.keylemma_n)?;
            table.push(cells(&[
                m.to_string(),
                t.to_string(),
                p.to_string(),
                ell.to_string(),
                r.n.to_string(),
                r.r_max.to_string(),
                r.rel_error_exact.to_string(),
                r.quadrature_error.to_string(),
                r.rel_error_stationary.to_string(),
            ]));
            report.check(Check::at_most(
                format!("M = {m}, t = {t}: relative error"),
                r.rel_error_exact,
                config.tolerance,
            ));
            runs.push(r);
        }
    }
    report.record("runs", &runs);
    Ok(())
}

fn decompose(config: &RunConfig, report: &mut RunReport, table: &mut Table) -> Result<()> {
    let experiment = config.experiment();
    let twisted = s_n(&experiment)?;
    let connection = connection_check(&experiment)?;
    let sharp = f1_sharp_diagnostic(&experiment)?;
    let scan = connection_residual_scan(&experiment, &config.decompose_ts)?;
    *table = Table::new(&["t", "connection_residual"]);
    for (t, r) in &scan {
        table.push(cells(&[t, r]));
    }
    let (lo, hi) = config.decompose_ratio_range;
    let envelope = config.decompose_envelope_max;
    report.check(Check::at_most(
        "Poisson identity relative error",
        connection.identity_rel_error,
        config.tolerance,
    ));
    report.check(Check::at_least("|connection ratio| lower", connection.ratio.norm(), lo));
    report.check(Check::at_most("|connection ratio| upper", connection.ratio.norm(), hi));
    report.check(Check::at_most(
        "F1 envelope constant",
        connection.f1_envelope.ratio,
        envelope,
    ));
    report.check(Check::at_most(
        "O envelope constant",
        connection.o_envelope.ratio,
        envelope,
    ));
    report.check(Check::at_most("p | r part envelope constant", sharp.ratio, envelope));
    for pair in scan.windows(2) {
        report.check(Check::at_most(
            format!("residual at t = {}", pair[1].0),
            pair[1].1,
            pair[0].1,
        ));
    }
    report.record("twisted_sum", twisted);
    report.record("connection", &connection);
    report.record("sharp_part", &sharp);
    report.record("residual_scan", &scan);
    Ok(())
}

fn exponents(_config: &RunConfig, report: &mut RunReport, table: &mut Table) -> Result<()> {
    let s = optimize_exponents();
    *table = Table::new(&["quantity", "value"]);
    for (name, value) in [
        ("P exponent", s.p_exponent),
        ("L exponent", s.l_exponent),
        ("delta", s.delta),
        ("final exponent", s.final_exponent),
    ] {
        table.push(cells(&[name.to_string(), value.to_string()]));
    }
    report.check(Check::equal("P exponent", s.p_exponent, "5/18"));
    report.check(Check::equal("L exponent", s.l_exponent, "1/9"));
    report.check(Check::equal("delta", s.delta, "1/18"));
    report.check(Check::equal("final exponent", s.final_exponent, "13/18"));
    report.check(Check::equal("L < P", s.l_exponent < s.p_exponent, true));
    report.check(Check::equal("constraint strict", s.constraint_strict, true));
    report.record("p_exponent", s.p_exponent.to_string());
    report.record("l_exponent", s.l_exponent.to_string());
    report.record("delta", s.delta.to_string());
    report.record("final_exponent", s.final_exponent.to_string());
    report.record(
        "delta_interval",
        [s.delta_interval.0.to_string(), s.delta_interval.1.to_string()],
    );
    report.record("active_terms", &s.active_terms);
    Ok(())
}
