//! Least-squares recovery `min ‖A X - b‖²_H + reg ‖X‖²` whose columns are
//! the traces of individual modes, solved through the normal equations with
//! a Cholesky factorization.
//!
//! The Gram matrix is assembled blockwise: each trace is split by an
//! azimuthal FFT into harmonics, and two traces only interact through the
//! harmonics they share. Harmonics carrying less than `HARMONIC_FLOOR` of a
//! trace's energy are dropped.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Cholesky};
use crate::modal::{AngularGrid, ModalCoefficients, ModeIndex};
use crate::wave::{BoundaryTrace, HorizonAverage};

const HARMONIC_FLOOR: f64 = 1e-24;
const RANK_TOLERANCE: f64 = 1e-12;

/// A trace as a sparse set of azimuthal harmonics, each a dense vector over
/// `(time, colatitude)`, scaled so that Euclidean dot products give the `H`
/// inner product.
struct HarmonicTrace {
    blocks: HashMap<i64, Vec<Complex64>>,
}

struct Splitter {
    n_colat: usize,
    n_azim: usize,
    /// sqrt of (time weight × colatitude weight × Δφ / n_azim)
    ring_scale: Vec<f64>,
    n_times: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl Splitter {
    fn new(template: &BoundaryTrace) -> Self {
        let (n_colat, n_azim) = match template.angular {
            AngularGrid::Circle { n_theta } => (1, n_theta),
            AngularGrid::Sphere(_) => template.angular.shape(),
        };
        let wa = template.angular.weights();
        let wt = template.time.average_weights(HorizonAverage::Uniform);
        let n_times = template.time.n_samples();
        let mut ring_scale = Vec::with_capacity(n_times * n_colat);
        for w in &wt {
            for c in 0..n_colat {
                // weights are constant along each ring of azimuths
                ring_scale.push((w * wa[c * n_azim] / n_azim as f64).sqrt());
            }
        }
        let fft = FftPlanner::new().plan_fft_forward(n_azim);
        Self {
            n_colat,
            n_azim,
            ring_scale,
            n_times,
            fft,
        }
    }

    fn split(&self, trace: &BoundaryTrace) -> HarmonicTrace {
        let rings = self.n_times * self.n_colat;
        let mut spectra = trace.samples.clone();
        self.fft.process(&mut spectra);
        let mut blocks = HashMap::new();
        let mut energies = vec![0.0; self.n_azim];
        for r in 0..rings {
            for m in 0..self.n_azim {
                let v = spectra[r * self.n_azim + m] * self.ring_scale[r];
                spectra[r * self.n_azim + m] = v;
                energies[m] += v.norm_sqr();
            }
        }
        let total: f64 = energies.iter().sum();
        for (m, e) in energies.iter().enumerate() {
            if total > 0.0 && *e >= HARMONIC_FLOOR * total {
                let block: Vec<Complex64> = (0..rings).map(|r| spectra[r * self.n_azim + m]).collect();
                blocks.insert(m as i64, block);
            }
        }
        HarmonicTrace { blocks }
    }
}

fn dot(a: &HarmonicTrace, b: &HarmonicTrace) -> Complex64 {
    let mut total = Complex64::default();
    for (m, va) in &a.blocks {
        if let Some(vb) = b.blocks.get(m) {
            total += va.iter().zip(vb).map(|(x, y)| x * y.conj()).sum::<Complex64>();
        }
    }
    total
}

/// Normal equations of one least-squares problem.
pub struct LsqSystem {
    indices: Vec<ModeIndex>,
    gram: CMatrix,
    rhs: Vec<Complex64>,
    data_norm2: f64,
}

/// One point of a regularization sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgePoint {
    pub regularization: f64,
    pub coefficients: ModalCoefficients,
    /// `‖A X - b‖_H / ‖b‖_H`
    pub residual: f64,
    pub solution_norm: f64,
}

impl LsqSystem {
    pub fn assemble(b: &BoundaryTrace, basis: &[(ModeIndex, BoundaryTrace)]) -> Result<Self> {
        if basis.is_empty() {
            return Err(Error::Config("least squares needs at least one basis trace".into()));
        }
        for (index, t) in basis {
            if !t.same_grid(b) {
                return Err(Error::Shape(format!("basis trace for {index} is on a different grid")));
            }
        }
        let splitter = Splitter::new(b);
        let data = splitter.split(b);
        let columns: Vec<HarmonicTrace> = basis.par_iter().map(|(_, t)| splitter.split(t)).collect();
        let n = columns.len();
        let rows: Vec<Vec<Complex64>> = (0..n)
            .into_par_iter()
            .map(|a| (a..n).map(|c| dot(&columns[c], &columns[a])).collect())
            .collect();
        let mut gram = CMatrix::zeros(n, n);
        for a in 0..n {
            for (off, v) in rows[a].iter().enumerate() {
                let c = a + off;
                gram[(a, c)] = *v;
                gram[(c, a)] = v.conj();
            }
            gram[(a, a)].im = 0.0;
        }
        let rhs = columns.iter().map(|col| dot(&data, col)).collect();
        Ok(Self {
            indices: basis.iter().map(|(i, _)| *i).collect(),
            gram,
            rhs,
            data_norm2: dot(&data, &data).re,
        })
    }

    pub fn gram(&self) -> &CMatrix {
        &self.gram
    }

    pub fn solve(&self, regularization: f64) -> Result<RidgePoint> {
        if !(regularization >= 0.0 && regularization.is_finite()) {
            return Err(Error::Config(format!("regularization must be non-negative, got {regularization}")));
        }
        let mut g = self.gram.clone();
        g.add_diagonal(regularization);
        let factor = Cholesky::factor(&g, RANK_TOLERANCE).map_err(|e| match e {
            Error::Numerical {
                message,
                iterations,
                residual,
            } if regularization == 0.0 => Error::Numerical {
                message: format!("{message}; the basis is rank deficient, use a positive regularization"),
                iterations,
                residual,
            },
            other => other,
        })?;
        let x = factor.solve(&self.rhs);
        // ‖AX - b‖² = X^H G X - 2 Re(X^H r) + ‖b‖²
        let gx = self.gram.matvec(&x);
        let xgx: f64 = x.iter().zip(&gx).map(|(a, b)| (a.conj() * b).re).sum();
        let xr: f64 = x.iter().zip(&self.rhs).map(|(a, b)| (a.conj() * b).re).sum();
        let res2 = (xgx - 2.0 * xr + self.data_norm2).max(0.0);
        let residual = if self.data_norm2 > 0.0 {
            (res2 / self.data_norm2).sqrt()
        } else {
            res2.sqrt()
        };
        let solution_norm = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        Ok(RidgePoint {
            regularization,
            coefficients: self.indices.iter().copied().zip(x).collect(),
            residual,
            solution_norm,
        })
    }
}

/// Coefficients `X` minimizing `‖A X - b‖²_H + reg ‖X‖²`.
pub fn algorithm1_lsq(
    b: &BoundaryTrace,
    basis: &[(ModeIndex, BoundaryTrace)],
    regularization: f64,
) -> Result<ModalCoefficients> {
    LsqSystem::assemble(b, basis)?.solve(regularization).map(|p| p.coefficients)
}

/// Solutions for a list of regularization parameters, sharing one Gram
/// matrix.
pub fn ridge_sweep(
    b: &BoundaryTrace,
    basis: &[(ModeIndex, BoundaryTrace)],
    regularizations: &[f64],
) -> Result<Vec<RidgePoint>> {
    let system = LsqSystem::assemble(b, basis)?;
    regularizations.iter().map(|&r| system.solve(r)).collect()
}
