//! Validation suites with measured-versus-tolerated reports.

use std::fmt;

use num_complex::Complex64;
use patsvd_core::inversion::{coefficient_error_bounds, dirichlet_forward_trace, dirichlet_recover, triples_from_modes};
use patsvd_core::modal::{gram_matrix, mode_samples, select_modes, AngularGrid, ModalCoefficients, ModeSelection};
use patsvd_core::radial::bessel::reference_frequencies;
use patsvd_core::radial::{
    classify_origin, fitted_order, solve_radial_modes, BoundaryCondition, Dimension, EndpointClass, RadialGrid,
    SoundSpeedProfile,
};
use patsvd_core::wave::{
    cosine_pair_bound, forward_spectral, h_inner_product, h_norm, sample_psi, simulate_fdtd, FdtdConfig, TimeGrid,
};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::profile_spec::make_profile;

pub const SUITES: [&str; 6] = ["bessel", "gram", "prop1", "crossfdtd", "dirichlet", "classify"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(suite: &str) -> Self {
        Self {
            suite: suite.into(),
            checks: Vec::new(),
        }
    }

    /// Records `measured <= tolerance`.
    fn at_most(&mut self, name: impl Into<String>, measured: f64, tolerance: f64) {
        self.checks.push(Check {
            name: name.into(),
            measured,
            tolerance,
            passed: measured <= tolerance,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "[{}] {}: measured {:.3e}, tolerance {:.3e}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.measured,
                c.tolerance
            )?;
        }
        write!(f, "{}: {}", self.suite, if self.passed() { "passed" } else { "FAILED" })
    }
}

pub fn run_suite(name: &str) -> Result<SuiteReport> {
    match name {
        "bessel" => bessel_suite(),
        "gram" => gram(),
        "prop1" => prop1(),
        "crossfdtd" => crossfdtd(),
        "dirichlet" => dirichlet(),
        "classify" => Ok(classify()),
        other => Err(LabError::Config(format!("unknown suite '{other}' (one of {})", SUITES.join(", ")))),
    }
}

fn unit() -> Result<SoundSpeedProfile> {
    make_profile("const:1")
}

fn bessel_suite() -> Result<SuiteReport> {
    let mut report = SuiteReport::new("bessel");
    let c = unit()?;
    let (bc, dim) = (BoundaryCondition::Neumann, Dimension::Two);
    for l in 0..3 {
        let exact = reference_frequencies(l, 8, bc, dim)?;
        let sizes = [512, 1024, 2048, 4096];
        let mut errors = vec![Vec::new(); 8];
        for &n in &sizes {
            let modes = solve_radial_modes(&c, l, 8, &RadialGrid::new(n)?, bc, dim)?;
            for (k, m) in modes.iter().enumerate() {
                errors[k].push(if exact[k] == 0.0 { m.mu } else { (m.mu - exact[k]) / exact[k] });
            }
        }
        let worst = errors.iter().map(|e| e[3].abs()).fold(0.0, f64::max);
        report.at_most(format!("l={l} max relative frequency error at N=4096"), worst, 1e-4);
        for (k, e) in errors.iter().enumerate() {
            if exact[k] > 0.0 {
                let p = fitted_order(&sizes[..3], &e[..3]);
                report.at_most(format!("l={l} k={} |order - 2|", k + 1), (p - 2.0).abs(), 0.2);
            }
        }
    }
    let grid = RadialGrid::new(4096)?;
    let constant = &solve_radial_modes(&c, 0, 1, &grid, bc, dim)?[0];
    report.at_most("constant mode frequency", constant.mu, 1e-8);
    let flat = constant.values.iter().map(|v| (v - 2f64.sqrt()).abs()).fold(0.0, f64::max);
    report.at_most("constant mode samples minus sqrt(2)", flat, 1e-8);
    let ball = solve_radial_modes(&c, 0, 2, &grid, BoundaryCondition::Neumann, Dimension::Three)?;
    report.at_most("3D Neumann l=0 second frequency (tan x = x)", (ball[1].mu - 4.49341).abs(), 1e-4);
    Ok(report)
}

fn gram() -> Result<SuiteReport> {
    let mut report = SuiteReport::new("gram");
    let c = make_profile("c1")?;
    let grid = RadialGrid::new(2048)?;
    let mut modes = select_modes(&c, ModeSelection::Count(200), &grid, BoundaryCondition::Neumann, Dimension::Two)?;
    modes.truncate(200);
    let l_max = modes.iter().map(|m| m.index.radial_l()).max().unwrap_or(0);
    let g = gram_matrix(&modes, &c, &AngularGrid::for_degree(Dimension::Two, l_max))?;
    report.at_most("first 200 modes under c1, max |G - I|", g.max_deviation_from_identity(), 1e-6);
    Ok(report)
}

fn prop1() -> Result<SuiteReport> {
    let mut report = SuiteReport::new("prop1");
    let ang = AngularGrid::circle(4)?;
    let key = patsvd_core::modal::ModeIndex::disk(0, 2).angular_key();
    for (a, b, horizon) in [
        (3.83171, 7.01559, 200.0),
        (1.84118, 5.33144, 100.0),
        (3.05424, 4.20119, 400.0),
        (6.70613, 8.01524, 50.0),
    ] {
        let time = TimeGrid::with_horizon(horizon, 0.02)?;
        let pa = sample_psi(key, a, &ang, time)?;
        let pb = sample_psi(key, b, &ang, time)?;
        let off = h_inner_product(&pa, &pb)?.norm();
        let diag = (h_inner_product(&pa, &pa)?.re - 1.0).abs();
        report.at_most(format!("ι={a} ι'={b} A={horizon} off-diagonal vs 2/(Δι A)"), off, 2.0 / ((b - a) * horizon));
        report.at_most(format!("ι={a} A={horizon} diagonal error vs 1/(2 ι A)"), diag, 1.0 / (2.0 * a * horizon));
        report.at_most(format!("ι={a} ι'={b} A={horizon} off-diagonal vs closed bound"), off, cosine_pair_bound(a, b, horizon));
    }
    Ok(report)
}

fn crossfdtd() -> Result<SuiteReport> {
    let mut report = SuiteReport::new("crossfdtd");
    let (n_r, n_theta) = (512, 16);
    let ang = AngularGrid::circle(n_theta)?;
    let grid = RadialGrid::new(n_r)?;
    let time = TimeGrid::with_horizon(20.0, 0.05)?;
    for (spec, l, k) in [("const:1", 0, 2), ("c1", 3, 2), ("c2", 2, 3)] {
        let c = make_profile(spec)?;
        let modes = select_modes(
            &c,
            ModeSelection::Rectangle { l_max: l as u32, k_max: k },
            &grid,
            BoundaryCondition::Neumann,
            Dimension::Two,
        )?;
        let mode = modes
            .iter()
            .find(|m| m.index == patsvd_core::modal::ModeIndex::disk(l, k))
            .expect("mode in rectangle");
        let f = mode_samples(mode, &grid, &ang)?;
        let run = simulate_fdtd(&f, &c, &FdtdConfig::new(n_r, n_theta, 0.45)?, time)?;
        let unit: ModalCoefficients = [(mode.index, Complex64::new(1.0, 0.0))].into_iter().collect();
        let spectral = forward_spectral(&unit, &modes, time, &ang)?;
        let diff = run.trace.combine(Complex64::new(1.0, 0.0), &spectral, Complex64::new(-1.0, 0.0))?;
        report.at_most(format!("{spec} mode {} relative L2 trace difference", mode.index), h_norm(&diff) / h_norm(&spectral), 0.02);
        report.at_most(format!("{spec} mode {} energy drift", mode.index), run.energy_drift(), 0.005);
    }
    Ok(report)
}

fn dirichlet() -> Result<SuiteReport> {
    let mut report = SuiteReport::new("dirichlet");
    let c = unit()?;
    let grid = RadialGrid::new(4096)?;
    let disk = solve_radial_modes(&c, 0, 2, &grid, BoundaryCondition::Dirichlet, Dimension::Two)?;
    report.at_most("first Dirichlet frequency vs 2.40483", (disk[0].mu - 2.40483).abs(), 1e-4);
    report.at_most("second Dirichlet frequency vs 5.52008", (disk[1].mu - 5.52008).abs(), 1e-4);

    let c1 = make_profile("c1")?;
    let grid = RadialGrid::new(512)?;
    let mut modes = select_modes(&c1, ModeSelection::Count(50), &grid, BoundaryCondition::Dirichlet, Dimension::Two)?;
    modes.truncate(50);
    let triples = triples_from_modes(&modes)?;
    let l_max = modes.iter().map(|m| m.index.radial_l()).max().unwrap_or(0);
    let ang = AngularGrid::for_degree(Dimension::Two, l_max);
    let mu_max = modes.iter().map(|m| m.mu).fold(0.0, f64::max);
    let time = TimeGrid::with_horizon(200.0, 0.7 / mu_max)?;
    let truth: ModalCoefficients = modes
        .iter()
        .enumerate()
        .map(|(i, m)| (m.index, Complex64::new(1.0 / (1.0 + i as f64), 0.3 * (i as f64).cos())))
        .collect();
    let trace = dirichlet_forward_trace(&truth, &triples, time, &ang)?;
    let bounds = coefficient_error_bounds(&triples, &truth, time.horizon());
    let mut worst = 0.0_f64;
    for (t, b) in triples.iter().zip(&bounds) {
        let err = (dirichlet_recover(&trace, t)? - truth.get(&t.index()).unwrap_or_default()).norm();
        worst = worst.max(err / b);
    }
    report.at_most("50-mode round trip, max error / per-coefficient bound", worst, 1.0);
    Ok(report)
}

fn classify() -> SuiteReport {
    let mut report = SuiteReport::new("classify");
    for dim in [Dimension::Two, Dimension::Three] {
        for l in 0..8 {
            let want = if l == 0 { EndpointClass::LimitCircle } else { EndpointClass::LimitPoint };
            let mismatch = if classify_origin(dim, l) == want { 0.0 } else { 1.0 };
            report.at_most(format!("{}D l={l} is {want:?}", dim.value()), mismatch, 0.0);
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suites_pass() {
        for suite in ["classify", "prop1"] {
            let report = run_suite(suite).unwrap();
            assert!(report.passed(), "{report}");
        }
        assert!(run_suite("nonsense").is_err());
    }

    #[test]
    fn failing_checks_are_reported() {
        let mut r = SuiteReport::new("x");
        r.at_most("a", 2.0, 1.0);
        assert!(!r.passed());
        assert!(r.to_string().contains("[FAIL] a"));
    }
}
