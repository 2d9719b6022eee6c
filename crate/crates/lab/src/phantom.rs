//! Initial-pressure phantoms.

use num_complex::Complex64;
use patsvd_core::modal::{synthesize, AngularGrid, GridFunction, ModalCoefficients, Mode};
use patsvd_core::radial::{Dimension, RadialGrid};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Gaussians are treated as supported within this many widths.
pub const GAUSSIAN_REACH: f64 = 3.0;
/// Smoothed edges are treated as supported within this many edge widths.
pub const EDGE_REACH: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bump {
    pub center: Vec<f64>,
    /// `σ` in `exp(-|x - x0|² / σ²)`.
    pub width: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PhantomSpec {
    GaussianBump {
        bumps: Vec<Bump>,
    },
    /// Indicator of a ball, with a `tanh` edge of width `edge` (sharp if 0).
    Disk {
        center: Vec<f64>,
        radius: f64,
        amplitude: f64,
        #[serde(default)]
        edge: f64,
    },
    /// Indicator of a spherical shell `inner <= |x - c| <= outer`.
    Ring {
        center: Vec<f64>,
        inner: f64,
        outer: f64,
        amplitude: f64,
        #[serde(default)]
        edge: f64,
    },
    ModeCombination {
        coefficients: ModalCoefficients,
    },
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn distance(x: &[f64], c: &[f64]) -> f64 {
    x.iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
}

/// `1` inside radius `r0`, `0` outside, with a `tanh` transition of width `edge`.
fn step(d: f64, r0: f64, edge: f64) -> f64 {
    if edge > 0.0 {
        0.5 * (1.0 - ((d - r0) / edge).tanh())
    } else if d <= r0 {
        1.0
    } else {
        0.0
    }
}

impl PhantomSpec {
    /// A single centred Gaussian.
    pub fn gaussian(center: Vec<f64>, width: f64, amplitude: f64) -> Self {
        PhantomSpec::GaussianBump {
            bumps: vec![Bump {
                center,
                width,
                amplitude,
            }],
        }
    }

    /// Checks the support invariant and the dimension of every centre.
    pub fn validate(&self, dim: Dimension) -> Result<()> {
        let n = dim.value() as usize;
        let check_center = |c: &[f64]| -> Result<()> {
            if c.len() != n || c.iter().any(|v| !v.is_finite()) {
                return Err(LabError::Config(format!("phantom centre {c:?} is not a point in {n}D")));
            }
            Ok(())
        };
        let check_reach = |reach: f64| -> Result<()> {
            if !(reach < 1.0) {
                return Err(LabError::Config(format!(
                    "phantom support reaches radius {reach:.3}, it must stay inside the unit ball"
                )));
            }
            Ok(())
        };
        let check_size = |name: &str, v: f64, allow_zero: bool| -> Result<()> {
            if !(v.is_finite() && (v > 0.0 || (allow_zero && v == 0.0))) {
                return Err(LabError::Config(format!("phantom {name} must be positive, got {v}")));
            }
            Ok(())
        };
        match self {
            PhantomSpec::GaussianBump { bumps } => {
                for b in bumps {
                    check_center(&b.center)?;
                    check_size("width", b.width, false)?;
                    check_reach(norm(&b.center) + GAUSSIAN_REACH * b.width)?;
                }
            }
            PhantomSpec::Disk { center, radius, edge, .. } => {
                check_center(center)?;
                check_size("radius", *radius, false)?;
                check_size("edge", *edge, true)?;
                check_reach(norm(center) + radius + EDGE_REACH * edge)?;
            }
            PhantomSpec::Ring {
                center,
                inner,
                outer,
                edge,
                ..
            } => {
                check_center(center)?;
                check_size("inner radius", *inner, true)?;
                check_size("edge", *edge, true)?;
                if !(outer > inner) {
                    return Err(LabError::Config(format!("ring needs inner < outer, got {inner} and {outer}")));
                }
                check_reach(norm(center) + outer + EDGE_REACH * edge)?;
            }
            PhantomSpec::ModeCombination { coefficients } => {
                if let Some((index, _)) = coefficients.iter().find(|(i, _)| i.dimension() != dim) {
                    return Err(LabError::Config(format!("mode {index} does not belong to {}D", dim.value())));
                }
            }
        }
        Ok(())
    }

    /// Samples the phantom. `modes` supplies the basis for a mode combination
    /// and is ignored otherwise.
    pub fn sample(&self, radial: &RadialGrid, angular: &AngularGrid, modes: &[Mode]) -> Result<GridFunction> {
        self.validate(angular.dimension())?;
        let real = |f: &dyn Fn(&[f64]) -> f64| {
            GridFunction::from_cartesian(*radial, angular.clone(), |x| Complex64::new(f(x), 0.0))
        };
        Ok(match self {
            PhantomSpec::GaussianBump { bumps } => real(&|x| {
                bumps
                    .iter()
                    .map(|b| b.amplitude * (-distance(x, &b.center).powi(2) / (b.width * b.width)).exp())
                    .sum()
            }),
            PhantomSpec::Disk {
                center,
                radius,
                amplitude,
                edge,
            } => real(&|x| amplitude * step(distance(x, center), *radius, *edge)),
            PhantomSpec::Ring {
                center,
                inner,
                outer,
                amplitude,
                edge,
            } => real(&|x| {
                let d = distance(x, center);
                amplitude * (step(d, *outer, *edge) - step(d, *inner, *edge))
            }),
            PhantomSpec::ModeCombination { coefficients } => synthesize(coefficients, modes, radial, angular)?,
        })
    }

    /// The same phantom with every amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            PhantomSpec::GaussianBump { bumps } => bumps.iter_mut().for_each(|b| b.amplitude *= factor),
            PhantomSpec::Disk { amplitude, .. } | PhantomSpec::Ring { amplitude, .. } => *amplitude *= factor,
            PhantomSpec::ModeCombination { coefficients } => {
                *coefficients = coefficients.scaled(Complex64::new(factor, 0.0))
            }
        }
        out
    }
}
