use num_complex::Complex64;

use super::time::{HorizonAverage, TimeGrid};
use crate::error::{Error, Result};
use crate::modal::{AngularGrid, AngularKey};

/// Boundary samples `p(θ_i, t_s)`, time index outer.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    pub angular: AngularGrid,
    pub time: TimeGrid,
    pub samples: Vec<Complex64>,
}

impl BoundaryTrace {
    pub fn new(angular: AngularGrid, time: TimeGrid, samples: Vec<Complex64>) -> Result<Self> {
        let expected = time.n_samples() * angular.len();
        if samples.len() != expected {
            return Err(Error::Shape(format!(
                "{} trace samples for {} times x {} angles",
                samples.len(),
                time.n_samples(),
                angular.len()
            )));
        }
        if let Some(pos) = samples.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Domain(format!(
                "non-finite trace sample at time index {}",
                pos / angular.len()
            )));
        }
        Ok(Self {
            angular,
            time,
            samples,
        })
    }

    pub fn zeros(angular: AngularGrid, time: TimeGrid) -> Self {
        let n = time.n_samples() * angular.len();
        Self {
            angular,
            time,
            samples: vec![Complex64::default(); n],
        }
    }

    #[inline]
    pub fn at(&self, s: usize, i: usize) -> Complex64 {
        self.samples[s * self.angular.len() + i]
    }

    pub fn frame(&self, s: usize) -> &[Complex64] {
        let n = self.angular.len();
        &self.samples[s * n..(s + 1) * n]
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.angular == other.angular && self.time == other.time
    }

    pub fn is_real(&self) -> bool {
        self.samples.iter().all(|v| v.im == 0.0)
    }

    /// The trace restricted to `[0, n_steps dt]`.
    pub fn truncate(&self, n_steps: usize) -> Result<Self> {
        let time = self.time.truncated(n_steps)?;
        let n = time.n_samples() * self.angular.len();
        Ok(Self {
            angular: self.angular.clone(),
            time,
            samples: self.samples[..n].to_vec(),
        })
    }

    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        if !self.same_grid(other) {
            return Err(Error::Shape("traces live on different grids".into()));
        }
        Ok(Self {
            angular: self.angular.clone(),
            time: self.time,
            samples: self.samples.iter().zip(&other.samples).map(|(x, y)| a * x + b * y).collect(),
        })
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self {
            angular: self.angular.clone(),
            time: self.time,
            samples: self.samples.iter().map(|v| s * v).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// `Σ_i p(θ_i, t_s) conj(Y(θ_i)) w_i` for every time sample.
    pub fn angular_component(&self, key: AngularKey) -> Result<Vec<Complex64>> {
        let y = self.angular.factor_values(key)?;
        let w = self.angular.weights();
        let weighted: Vec<Complex64> = y.iter().zip(&w).map(|(v, w)| v.conj() * w).collect();
        Ok((0..self.time.n_samples())
            .map(|s| self.frame(s).iter().zip(&weighted).map(|(a, b)| a * b).sum())
            .collect())
    }
}

/// Finite-horizon inner product `(2/A) ∫_0^A ∫ u conj(v) dθ dt` with the
/// trapezoid rule in time.
pub fn h_inner_product(u: &BoundaryTrace, v: &BoundaryTrace) -> Result<Complex64> {
    h_inner_product_with(u, v, HorizonAverage::Uniform)
}

/// [`h_inner_product`] with a chosen time average.
pub fn h_inner_product_with(u: &BoundaryTrace, v: &BoundaryTrace, average: HorizonAverage) -> Result<Complex64> {
    if !u.same_grid(v) {
        return Err(Error::Shape("inner product of traces on different grids".into()));
    }
    let wt = u.time.average_weights(average);
    let wa = u.angular.weights();
    let mut total = Complex64::default();
    for (s, ws) in wt.iter().enumerate() {
        if *ws == 0.0 {
            continue;
        }
        let frame: Complex64 = u
            .frame(s)
            .iter()
            .zip(v.frame(s))
            .zip(&wa)
            .map(|((a, b), w)| a * b.conj() * w)
            .sum();
        total += frame * ws;
    }
    Ok(total)
}

/// `sqrt(<u, u>_H)`.
pub fn h_norm(u: &BoundaryTrace) -> f64 {
    h_inner_product(u, u).map(|v| v.re.max(0.0).sqrt()).unwrap_or(f64::NAN)
}

/// Samples `Y_key(θ) cos(μ t)` on the given grids.
pub fn sample_psi(key: AngularKey, mu: f64, angular: &AngularGrid, time: TimeGrid) -> Result<BoundaryTrace> {
    let y = angular.factor_values(key)?;
    let mut samples = Vec::with_capacity(time.n_samples() * y.len());
    for t in time.times() {
        let c = (mu * t).cos();
        samples.extend(y.iter().map(|v| v * c));
    }
    BoundaryTrace::new(angular.clone(), time, samples)
}
