//! End-to-end runs: modes, data, recovery, synthesis, artifacts.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use num_complex::Complex64;
use patsvd_core::inversion::{algorithm1_lsq, reconstruct, ReconstructionReport};
use patsvd_core::io::{save_grid_function, save_trace};
use patsvd_core::modal::{mode_samples, project, synthesize, weighted_norm, GridFunction, ModalCoefficients, ModeIndex};
use patsvd_core::radial::{Dimension, SoundSpeedProfile};
use patsvd_core::wave::{forward_fdtd, forward_spectral, h_norm, simulate_fdtd, BoundaryTrace};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{DataSource, Method, RunConfig, RunPlan};
use crate::error::{LabError, Result, StageExt};
use crate::image::export_image;

/// Raster size of exported images.
pub const IMAGE_SIZE: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mode_count: usize,
    pub horizon: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub crosstalk_bound: f64,
    /// Trace-space residual of the recovered coefficients.
    pub residual: f64,
    /// `‖g - f‖ / ‖f‖` in `L²(B, 1/c)`.
    pub relative_error_weighted: f64,
    /// The same in plain `L²(B)`.
    pub relative_error_plain: f64,
    /// Distance of the phantom from the span of the retained modes.
    pub truncation_error_weighted: f64,
    pub degenerate_clusters: usize,
    #[serde(default)]
    pub fdtd_energy_drift: Option<f64>,
    #[serde(default)]
    pub fdtd_stride: Option<usize>,
}

/// The in-memory products of a run.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub phantom: GridFunction,
    pub trace: BoundaryTrace,
    pub reconstruction: GridFunction,
    pub report: ReconstructionReport,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub name: String,
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timestamps {
    pub started_unix: f64,
    pub finished_unix: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: RunConfig,
    pub config_sha256: String,
    pub stages: Vec<String>,
    pub artifacts: Vec<Artifact>,
    pub metrics: Metrics,
    pub timestamps: Timestamps,
}

impl Manifest {
    /// The manifest without its timestamps, for run-to-run comparison.
    pub fn without_timestamps(&self) -> Self {
        Manifest {
            timestamps: Timestamps {
                started_unix: 0.0,
                finished_unix: 0.0,
            },
            ..self.clone()
        }
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

/// Relative distance in `L²(B, 1/c)`.
pub fn relative_error(g: &GridFunction, f: &GridFunction, profile: &SoundSpeedProfile) -> Result<f64> {
    let diff = g.combine(Complex64::new(1.0, 0.0), f, Complex64::new(-1.0, 0.0))?;
    let base = weighted_norm(f, profile);
    let d = weighted_norm(&diff, profile);
    Ok(if base > 0.0 { d / base } else { d })
}

fn add_noise(trace: &mut BoundaryTrace, relative: f64, seed: u64) -> Result<()> {
    let sigma = relative * trace.max_abs();
    if sigma == 0.0 {
        return Ok(());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| LabError::Config(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let real = trace.is_real();
    for v in trace.samples.iter_mut() {
        v.re += normal.sample(&mut rng);
        if !real {
            v.im += normal.sample(&mut rng);
        }
    }
    Ok(())
}

/// Forward data of the phantom and, for least squares, of every mode.
fn simulate(plan: &RunPlan, phantom: &GridFunction) -> Result<(BoundaryTrace, Option<f64>, Option<usize>)> {
    match (&plan.config.data, &plan.fdtd) {
        (DataSource::Fdtd { .. }, Some(cfg)) => {
            let run = simulate_fdtd(phantom, &plan.profile, cfg, plan.time).stage("forward")?;
            Ok((run.trace.clone(), Some(run.energy_drift()), Some(run.stride)))
        }
        _ => {
            let x = project(phantom, &plan.modes, &plan.profile).stage("forward")?;
            let trace = forward_spectral(&x, &plan.modes, plan.time, &plan.angular).stage("forward")?;
            Ok((trace, None, None))
        }
    }
}

/// Traces of the individual modes through the configured data path.
pub fn basis_traces(plan: &RunPlan) -> Result<Vec<(ModeIndex, BoundaryTrace)>> {
    plan.modes
        .par_iter()
        .map(|m| {
            let trace = match &plan.fdtd {
                Some(cfg) => {
                    let f = mode_samples(m, &plan.radial, &plan.angular)?;
                    forward_fdtd(&f, &plan.profile, cfg, plan.time)?
                }
                None => {
                    let unit: ModalCoefficients = [(m.index, Complex64::new(1.0, 0.0))].into_iter().collect();
                    forward_spectral(&unit, &plan.modes, plan.time, &plan.angular)?
                }
            };
            Ok((m.index, trace))
        })
        .collect::<patsvd_core::Result<_>>()
        .stage("basis")
}

/// Phantom samples and its (possibly noisy) boundary data.
pub fn forward_data(plan: &RunPlan) -> Result<(GridFunction, BoundaryTrace, Option<f64>, Option<usize>)> {
    let phantom = plan.config.phantom.sample(&plan.radial, &plan.angular, &plan.modes)?;
    let (mut trace, drift, stride) = simulate(plan, &phantom)?;
    if let Some(noise) = plan.config.noise {
        add_noise(&mut trace, noise.relative, noise.seed)?;
    }
    Ok((phantom, trace, drift, stride))
}

/// Recovers the initial state from boundary data with the configured method.
pub fn recover(plan: &RunPlan, trace: &BoundaryTrace) -> Result<(GridFunction, ReconstructionReport)> {
    let cfg = &plan.config;
    if trace.angular != plan.angular || trace.time != plan.time {
        return Err(LabError::Config(
            "trace grid does not match the configuration's angular and time grids".into(),
        ));
    }
    match cfg.method {
        Method::Direct => {
            reconstruct(trace, &plan.triples, &plan.radial, &plan.angular, cfg.average).stage("recover")
        }
        Method::Lsq => {
            let basis = basis_traces(plan)?;
            let coefficients = algorithm1_lsq(trace, &basis, cfg.regularization).stage("recover")?;
            let g = synthesize(&coefficients, &plan.modes, &plan.radial, &plan.angular).stage("synthesize")?;
            let mut model = trace.scaled(Complex64::new(0.0, 0.0));
            for (index, t) in &basis {
                let c = coefficients.get(index).unwrap_or_default();
                model = model.combine(Complex64::new(1.0, 0.0), t, c).stage("recover")?;
            }
            let diff = model.combine(Complex64::new(1.0, 0.0), trace, Complex64::new(-1.0, 0.0)).stage("recover")?;
            let norm = h_norm(trace);
            let report = ReconstructionReport {
                coefficients,
                residual: if norm > 0.0 { h_norm(&diff) / norm } else { h_norm(&diff) },
                mode_count: plan.modes.len(),
                horizon: plan.time.horizon(),
                crosstalk_bound: patsvd_core::inversion::crosstalk_bound(&plan.triples, plan.time.horizon()),
                average: cfg.average,
                degenerate_clusters: Vec::new(),
            };
            Ok((g, report))
        }
    }
}

/// Runs every stage in memory.
pub fn execute(plan: &RunPlan) -> Result<Outcome> {
    let (phantom, trace, drift, stride) = forward_data(plan)?;
    let (reconstruction, report) = recover(plan, &trace)?;
    let one = SoundSpeedProfile::constant(1.0).stage("metrics")?;
    let projected = synthesize(
        &project(&phantom, &plan.modes, &plan.profile).stage("metrics")?,
        &plan.modes,
        &plan.radial,
        &plan.angular,
    )
    .stage("metrics")?;
    let metrics = Metrics {
        mode_count: plan.modes.len(),
        horizon: plan.time.horizon(),
        dt: plan.time.dt,
        n_steps: plan.time.n_steps,
        crosstalk_bound: report.crosstalk_bound,
        residual: report.residual,
        relative_error_weighted: relative_error(&reconstruction, &phantom, &plan.profile)?,
        relative_error_plain: relative_error(&reconstruction, &phantom, &one)?,
        truncation_error_weighted: relative_error(&projected, &phantom, &plan.profile)?,
        degenerate_clusters: report.degenerate_clusters.len(),
        fdtd_energy_drift: drift,
        fdtd_stride: stride,
    };
    Ok(Outcome {
        phantom,
        trace,
        reconstruction,
        report,
        metrics,
    })
}

/// Real copy of a trace whose imaginary part is rounding noise.
pub fn real_trace(trace: &BoundaryTrace) -> Option<BoundaryTrace> {
    let tol = 1e-12 * trace.max_abs().max(f64::MIN_POSITIVE);
    if trace.samples.iter().any(|v| v.im.abs() > tol) {
        return None;
    }
    let mut t = trace.clone();
    t.samples.iter_mut().for_each(|v| v.im = 0.0);
    Some(t)
}

fn record(dir: &Path, name: &str, file: &str, artifacts: &mut Vec<Artifact>) -> Result<()> {
    let bytes = std::fs::read(dir.join(file))?;
    artifacts.push(Artifact {
        name: name.into(),
        file: file.into(),
        sha256: sha256_hex(&bytes),
        bytes: bytes.len() as u64,
    });
    Ok(())
}

/// Writes every artifact of a finished run into `dir` and returns the
/// manifest (also written as `manifest.json`).
pub fn write_artifacts(plan: &RunPlan, outcome: &Outcome, dir: &Path, started: f64) -> Result<Manifest> {
    std::fs::create_dir_all(dir)?;
    let mut artifacts = Vec::new();
    let config_json = plan.config.to_json()?;
    std::fs::write(dir.join("config.json"), &config_json)?;
    record(dir, "config", "config.json", &mut artifacts)?;

    save_grid_function(dir.join("phantom.grid"), &outcome.phantom).stage("write")?;
    record(dir, "phantom", "phantom.grid", &mut artifacts)?;
    if plan.config.dimension == Dimension::Two {
        if let Some(real) = real_trace(&outcome.trace) {
            save_trace(dir.join("trace.bin"), &real).stage("write")?;
            record(dir, "trace", "trace.bin", &mut artifacts)?;
        }
    }
    save_grid_function(dir.join("reconstruction.grid"), &outcome.reconstruction).stage("write")?;
    record(dir, "reconstruction", "reconstruction.grid", &mut artifacts)?;
    let error_map = outcome
        .reconstruction
        .combine(Complex64::new(1.0, 0.0), &outcome.phantom, Complex64::new(-1.0, 0.0))
        .stage("write")?;
    save_grid_function(dir.join("error.grid"), &error_map).stage("write")?;
    record(dir, "error map", "error.grid", &mut artifacts)?;
    std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(&outcome.report)?)?;
    record(dir, "report", "report.json", &mut artifacts)?;
    if plan.config.dimension == Dimension::Two {
        for (name, field) in [
            ("phantom image", &outcome.phantom),
            ("reconstruction image", &outcome.reconstruction),
            ("error image", &error_map),
        ] {
            let file = format!("{}.pgm", name.split(' ').next().unwrap_or("image"));
            export_image(field, dir.join(&file), IMAGE_SIZE)?;
            record(dir, name, &file, &mut artifacts)?;
        }
    }
    let stages = ["modes", "phantom", "forward", "recover", "synthesize", "write"];
    let manifest = Manifest {
        config: plan.config.clone(),
        config_sha256: sha256_hex(config_json.as_bytes()),
        stages: stages.iter().map(|s| s.to_string()).collect(),
        artifacts,
        metrics: outcome.metrics.clone(),
        timestamps: Timestamps {
            started_unix: started,
            finished_unix: unix_now(),
        },
    };
    std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

/// Plans, runs and writes a configuration into `config.output`.
pub fn run_pipeline(config: &RunConfig) -> Result<Manifest> {
    let started = unix_now();
    let plan = config.plan()?;
    let outcome = execute(&plan)?;
    let dir: PathBuf = config.output.clone();
    write_artifacts(&plan, &outcome, &dir, started)
}
