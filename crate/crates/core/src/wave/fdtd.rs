//! Leapfrog time stepping of `p_tt = c(r) Δp` on the disk with
//! `∂_r p = 0` at `r = 1` and `p_t = 0` at `t = 0`.
//!
//! Space is discretized on the polar grid: conservative finite volumes in
//! `r` (the flux through the origin face vanishes) and a discrete Fourier
//! transform in `θ`. Because `c` is radial, each angular harmonic evolves
//! independently. Harmonic `l` is advanced only on rings `j >= J_l`, with
//! `J_l` the smallest start ring for which the explicit step is stable; this
//! polar filter keeps the time step at the radial CFL limit.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::time::TimeGrid;
use super::trace::BoundaryTrace;
use crate::error::{Error, Result};
use crate::modal::{AngularGrid, GridFunction};
use crate::radial::{
    assemble_discrete_operator, BoundaryCondition, Dimension, RadialGrid, SoundSpeedProfile, SymTridiagonal,
};

/// Harmonics whose initial energy is below this fraction of the total are
/// not evolved.
const HARMONIC_ENERGY_FLOOR: f64 = 1e-24;

/// Safety factor on the per-harmonic stability limit `dt² λ_max < 4`.
const FILTER_MARGIN: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdtdConfig {
    pub radial_cells: usize,
    pub angular_points: usize,
    /// Courant number: internal step `dt <= cfl Δr / sqrt(c_max)`.
    pub cfl: f64,
    /// Internal steps per trace sample; chosen from `cfl` when absent.
    pub stride: Option<usize>,
}

impl FdtdConfig {
    pub fn new(radial_cells: usize, angular_points: usize, cfl: f64) -> Result<Self> {
        let c = Self {
            radial_cells,
            angular_points,
            cfl,
            stride: None,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::Config(format!("cfl must lie in (0, 1), got {}", self.cfl)));
        }
        if self.radial_cells < 8 {
            return Err(Error::Config(format!("FDTD needs at least 8 radial cells, got {}", self.radial_cells)));
        }
        if self.angular_points < 2 {
            return Err(Error::Config("FDTD needs at least 2 angular points".into()));
        }
        if self.stride == Some(0) {
            return Err(Error::Config("stride must be positive".into()));
        }
        Ok(())
    }

    /// Largest stable internal step.
    pub fn max_internal_dt(&self, profile: &SoundSpeedProfile) -> f64 {
        self.cfl / (self.radial_cells as f64 * profile.c_max().sqrt())
    }

    /// Internal steps per trace sample for the given trace grid.
    pub fn resolve_stride(&self, profile: &SoundSpeedProfile, time: &TimeGrid) -> Result<usize> {
        self.validate()?;
        let limit = self.max_internal_dt(profile);
        match self.stride {
            Some(s) => {
                let dt = time.dt / s as f64;
                if dt > limit * (1.0 + 1e-12) {
                    return Err(Error::Config(format!(
                        "internal step {dt:.4e} exceeds the stability limit {limit:.4e} (cfl {})",
                        self.cfl
                    )));
                }
                Ok(s)
            }
            None => Ok((time.dt / limit * (1.0 - 1e-12)).ceil().max(1.0) as usize),
        }
    }
}

/// Output of a simulation.
#[derive(Debug, Clone)]
pub struct FdtdRun {
    pub trace: BoundaryTrace,
    /// Discrete energy at each trace sample (on the half step before it;
    /// after it for the first sample).
    pub energy: Vec<f64>,
    pub internal_dt: f64,
    pub stride: usize,
    /// `(l, J_l)` for every evolved harmonic.
    pub harmonics: Vec<(i32, usize)>,
}

impl FdtdRun {
    /// `max |E(t) - E(0)| / E(0)`.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.energy[0];
        if e0 == 0.0 {
            return 0.0;
        }
        self.energy.iter().fold(0.0_f64, |m, e| m.max((e - e0).abs())) / e0
    }
}

/// Boundary trace of the simulated field.
pub fn forward_fdtd(
    f0: &GridFunction,
    profile: &SoundSpeedProfile,
    config: &FdtdConfig,
    time: TimeGrid,
) -> Result<BoundaryTrace> {
    simulate_fdtd(f0, profile, config, time).map(|run| run.trace)
}

pub fn simulate_fdtd(
    f0: &GridFunction,
    profile: &SoundSpeedProfile,
    config: &FdtdConfig,
    time: TimeGrid,
) -> Result<FdtdRun> {
    config.validate()?;
    let n_theta = match f0.angular {
        AngularGrid::Circle { n_theta } => n_theta,
        AngularGrid::Sphere(_) => {
            return Err(Error::Config("FDTD is implemented for the disk only".into()));
        }
    };
    if f0.radial.n_cells() != config.radial_cells || n_theta != config.angular_points {
        return Err(Error::Shape(format!(
            "initial field is {}x{}, FDTD grid is {}x{}",
            f0.radial.n_cells(),
            n_theta,
            config.radial_cells,
            config.angular_points
        )));
    }
    let stride = config.resolve_stride(profile, &time)?;
    let dt = time.dt / stride as f64;
    let grid = f0.radial;
    let n_r = grid.n_cells();

    // Harmonic coefficients F_l(r_j) = (1/n) Σ_i f(r_j, θ_i) e^{-ilθ_i}.
    let real_input = f0.is_real();
    let lo = -((n_theta as i32 - 1) / 2);
    let hi = n_theta as i32 / 2;
    let orders: Vec<i32> = if real_input { (0..=hi).collect() } else { (lo..=hi).collect() };
    let twiddle = |l: i32| -> Vec<Complex64> {
        (0..n_theta)
            .map(|i| Complex64::from_polar(1.0 / n_theta as f64, -2.0 * PI * (l as i64 * i as i64) as f64 / n_theta as f64))
            .collect()
    };
    let mut harmonics: Vec<(i32, Vec<Complex64>)> = orders
        .iter()
        .map(|&l| {
            let tw = twiddle(l);
            let a: Vec<Complex64> = (0..n_r)
                .map(|j| f0.ring(j).iter().zip(&tw).map(|(f, w)| f * w).sum())
                .collect();
            (l, a)
        })
        .collect();

    // Weight of each harmonic in the full-field energy: 2π Σ_l |F_l|², with
    // the mirrored harmonic folded in for real input.
    let fold = |l: i32| -> f64 {
        if real_input && l > 0 && -l >= lo {
            2.0
        } else {
            1.0
        }
    };
    let mass: Vec<f64> = {
        let op = assemble_discrete_operator(profile, 0, &grid, BoundaryCondition::Neumann, Dimension::Two)?;
        op.weight
    };
    let mass_of = |a: &[Complex64]| -> f64 { a.iter().zip(&mass).map(|(v, w)| v.norm_sqr() * w).sum() };
    let total: f64 = harmonics.iter().map(|(l, a)| fold(*l) * mass_of(a)).sum();
    harmonics.retain(|(l, a)| total > 0.0 && fold(*l) * mass_of(a) >= HARMONIC_ENERGY_FLOOR * total);

    let results: Vec<HarmonicRun> = harmonics
        .par_iter()
        .map(|(l, a0)| evolve_harmonic(*l, a0, profile, &grid, dt, stride, &time))
        .collect::<Result<_>>()?;

    // Boundary trace p(1, θ_i, t_s) = Σ_l fold·F_l(1, t_s) e^{ilθ_i}.
    let n_t = time.n_samples();
    let mut samples = vec![Complex64::default(); n_t * n_theta];
    for run in &results {
        let phases: Vec<Complex64> = (0..n_theta)
            .map(|i| Complex64::from_polar(1.0, 2.0 * PI * (run.l as i64 * i as i64) as f64 / n_theta as f64))
            .collect();
        let mirrored = real_input && run.l > 0 && -run.l >= lo;
        for (s, b) in run.boundary.iter().enumerate() {
            let frame = &mut samples[s * n_theta..(s + 1) * n_theta];
            for (p, e) in frame.iter_mut().zip(&phases) {
                let v = b * e;
                if real_input {
                    p.re += if mirrored { 2.0 * v.re } else { v.re };
                } else {
                    *p += v;
                }
            }
        }
    }
    let mut energy = vec![0.0; n_t];
    for run in &results {
        let f = fold(run.l);
        for (e, v) in energy.iter_mut().zip(&run.energy) {
            *e += 2.0 * PI * f * v;
        }
    }
    let harmonics = results.iter().map(|r| (r.l, r.start_ring)).collect();
    Ok(FdtdRun {
        trace: BoundaryTrace::new(f0.angular.clone(), time, samples)?,
        energy,
        internal_dt: dt,
        stride,
        harmonics,
    })
}

struct HarmonicRun {
    l: i32,
    start_ring: usize,
    boundary: Vec<Complex64>,
    energy: Vec<f64>,
}

/// Smallest start ring for which `dt² λ_max(W⁻¹K)` restricted to the rings
/// `J..` stays below `4 (1 - margin)`.
fn stable_start_ring(scaled: &SymTridiagonal, dt: f64) -> Result<usize> {
    let n = scaled.len();
    let limit = 4.0 * (1.0 - FILTER_MARGIN) / (dt * dt);
    let lambda_max = |j: usize| {
        let sub = SymTridiagonal::new(scaled.diag[j..].to_vec(), scaled.off[j..].to_vec());
        sub.max_eigenvalue()
    };
    if lambda_max(0) <= limit {
        return Ok(0);
    }
    if lambda_max(n - 2) > limit {
        return Err(Error::Config(format!(
            "time step {dt:.3e} is unstable even on the outermost rings"
        )));
    }
    // λ_max of trailing principal blocks decreases with J (interlacing).
    let (mut bad, mut good) = (0, n - 2);
    while good - bad > 1 {
        let mid = (bad + good) / 2;
        if lambda_max(mid) <= limit {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Ok(good)
}

fn evolve_harmonic(
    l: i32,
    a0: &[Complex64],
    profile: &SoundSpeedProfile,
    grid: &RadialGrid,
    dt: f64,
    stride: usize,
    time: &TimeGrid,
) -> Result<HarmonicRun> {
    let op = assemble_discrete_operator(profile, l.unsigned_abs(), grid, BoundaryCondition::Neumann, Dimension::Two)?;
    let start = stable_start_ring(&op.scaled(), dt)?;
    let n = grid.n_cells();
    let m = n - start;
    let k = &op.stiffness;
    let w = &op.weight[start..];
    let dt2 = dt * dt;

    // a_new = cd·a + clo·a_prev_ring + chi·a_next_ring - a_old
    let cd: Vec<f64> = (0..m).map(|j| 2.0 - dt2 * k.diag[start + j] / w[j]).collect();
    let clo: Vec<f64> = (0..m)
        .map(|j| if j == 0 { 0.0 } else { -dt2 * k.off[start + j - 1] / w[j] })
        .collect();
    let chi: Vec<f64> = (0..m)
        .map(|j| if j + 1 == m { 0.0 } else { -dt2 * k.off[start + j] / w[j] })
        .collect();

    let mut prev: Vec<Complex64> = a0[start..].to_vec();
    // Symmetric first step: a¹ = a⁰ - (dt²/2) W⁻¹K a⁰.
    let mut cur: Vec<Complex64> = (0..m)
        .map(|j| {
            let mut v = (cd[j] - 2.0) * prev[j];
            if j > 0 {
                v += clo[j] * prev[j - 1];
            }
            if j + 1 < m {
                v += chi[j] * prev[j + 1];
            }
            prev[j] + 0.5 * v
        })
        .collect();

    let boundary_of = |a: &[Complex64]| (9.0 * a[m - 1] - a[m - 2]) / 8.0;
    let stiff_form = |x: &[Complex64], y: &[Complex64]| -> f64 {
        let mut s = Complex64::default();
        for j in 0..m {
            let mut ky = k.diag[start + j] * y[j];
            if j > 0 {
                ky += k.off[start + j - 1] * y[j - 1];
            }
            if j + 1 < m {
                ky += k.off[start + j] * y[j + 1];
            }
            s += x[j].conj() * ky;
        }
        s.re
    };
    // Conserved leapfrog energy between steps n and n+1.
    let energy_of = |old: &[Complex64], new: &[Complex64]| -> f64 {
        let kinetic: f64 = old.iter().zip(new).zip(w).map(|((a, b), w)| (b - a).norm_sqr() * w).sum::<f64>() / dt2;
        0.5 * kinetic + 0.5 * stiff_form(new, old)
    };

    let n_samples = time.n_samples();
    let mut boundary = Vec::with_capacity(n_samples);
    let mut energy = Vec::with_capacity(n_samples);
    boundary.push(boundary_of(&prev));
    energy.push(energy_of(&prev, &cur));
    let mut step = 1;
    for s in 1..n_samples {
        while step < s * stride {
            leapfrog(&cd, &clo, &chi, &mut prev, &mut cur);
            step += 1;
        }
        let b = boundary_of(&cur);
        if !(b.re.is_finite() && b.im.is_finite()) || cur.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Divergence { step });
        }
        boundary.push(b);
        energy.push(energy_of(&prev, &cur));
    }
    Ok(HarmonicRun {
        l,
        start_ring: start,
        boundary,
        energy,
    })
}

/// Advances `(old, now)` from steps `(n-1, n)` to `(n, n+1)`.
fn leapfrog(cd: &[f64], clo: &[f64], chi: &[f64], old: &mut Vec<Complex64>, now: &mut Vec<Complex64>) {
    let m = cd.len();
    for j in 0..m {
        let mut v = cd[j] * now[j] - old[j];
        if j > 0 {
            v += clo[j] * now[j - 1];
        }
        if j + 1 < m {
            v += chi[j] * now[j + 1];
        }
        old[j] = v;
    }
    std::mem::swap(old, now);
}
