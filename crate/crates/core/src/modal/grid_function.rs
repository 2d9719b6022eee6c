use num_complex::Complex64;

use super::angular::AngularGrid;
use crate::error::{Error, Result};
use crate::radial::{Dimension, RadialGrid, SoundSpeedProfile};

/// Complex samples on a radial × angular product grid, radial index outer.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub radial: RadialGrid,
    pub angular: AngularGrid,
    pub samples: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(radial: RadialGrid, angular: AngularGrid, samples: Vec<Complex64>) -> Result<Self> {
        let expected = radial.n_cells() * angular.len();
        if samples.len() != expected {
            return Err(Error::Shape(format!(
                "{} samples for a {}x{} grid",
                samples.len(),
                radial.n_cells(),
                angular.len()
            )));
        }
        Ok(Self {
            radial,
            angular,
            samples,
        })
    }

    pub fn zeros(radial: RadialGrid, angular: AngularGrid) -> Self {
        let n = radial.n_cells() * angular.len();
        Self {
            radial,
            angular,
            samples: vec![Complex64::default(); n],
        }
    }

    /// Samples `f(r, [angle0, angle1])` with the angle convention of
    /// [`AngularGrid::point`].
    pub fn from_fn(radial: RadialGrid, angular: AngularGrid, f: impl Fn(f64, [f64; 2]) -> Complex64) -> Self {
        let points: Vec<[f64; 2]> = (0..angular.len()).map(|i| angular.point(i)).collect();
        let samples = radial
            .nodes()
            .flat_map(|r| points.iter().map(move |p| (r, *p)))
            .map(|(r, p)| f(r, p))
            .collect();
        Self {
            radial,
            angular,
            samples,
        }
    }

    /// Samples `f(x)` at Cartesian points (`x` has 2 or 3 components).
    pub fn from_cartesian(radial: RadialGrid, angular: AngularGrid, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let dirs: Vec<[f64; 3]> = (0..angular.len()).map(|i| angular.direction(i)).collect();
        let n = angular.dimension().value() as usize;
        let mut samples = Vec::with_capacity(radial.n_cells() * dirs.len());
        for r in radial.nodes() {
            for d in &dirs {
                let x = [r * d[0], r * d[1], r * d[2]];
                samples.push(f(&x[..n]));
            }
        }
        Self {
            radial,
            angular,
            samples,
        }
    }

    pub fn dimension(&self) -> Dimension {
        self.angular.dimension()
    }

    #[inline]
    pub fn at(&self, j: usize, i: usize) -> Complex64 {
        self.samples[j * self.angular.len() + i]
    }

    pub fn ring(&self, j: usize) -> &[Complex64] {
        let n = self.angular.len();
        &self.samples[j * n..(j + 1) * n]
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.radial == other.radial && self.angular == other.angular
    }

    pub fn is_real(&self) -> bool {
        self.samples.iter().all(|v| v.im == 0.0)
    }

    /// Pointwise `a self + b other`.
    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        if !self.same_grid(other) {
            return Err(Error::Shape("grid functions live on different grids".into()));
        }
        let samples = self.samples.iter().zip(&other.samples).map(|(x, y)| a * x + b * y).collect();
        Ok(Self {
            radial: self.radial,
            angular: self.angular.clone(),
            samples,
        })
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self {
            radial: self.radial,
            angular: self.angular.clone(),
            samples: self.samples.iter().map(|v| s * v).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
}

/// Product quadrature on the ball: midpoint in `r` with volume factor
/// `r^(n-1)`, and the angular grid's own weights.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub radial_weights: Vec<f64>,
    pub angular_weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn new(radial: &RadialGrid, angular: &AngularGrid) -> Self {
        let dim = angular.dimension();
        let h = radial.spacing();
        let radial_weights = radial
            .nodes()
            .map(|r| match dim {
                Dimension::Two => r * h,
                Dimension::Three => r * r * h,
            })
            .collect();
        Self {
            radial_weights,
            angular_weights: angular.weights(),
        }
    }

    /// Radial weights including the `1/c` density.
    pub fn weighted_radial(&self, radial: &RadialGrid, profile: &SoundSpeedProfile) -> Vec<f64> {
        radial
            .nodes()
            .zip(&self.radial_weights)
            .map(|(r, w)| w / profile.eval_unchecked(r))
            .collect()
    }
}

/// `∫_B f conj(g) / c dx` by the product quadrature.
pub fn weighted_inner_product(f: &GridFunction, g: &GridFunction, profile: &SoundSpeedProfile) -> Result<Complex64> {
    if !f.same_grid(g) {
        return Err(Error::Shape("inner product of functions on different grids".into()));
    }
    let rule = QuadratureRule::new(&f.radial, &f.angular);
    let wr = rule.weighted_radial(&f.radial, profile);
    let mut total = Complex64::default();
    for (j, w) in wr.iter().enumerate() {
        let ring: Complex64 = f
            .ring(j)
            .iter()
            .zip(g.ring(j))
            .zip(&rule.angular_weights)
            .map(|((a, b), wa)| a * b.conj() * wa)
            .sum();
        total += ring * w;
    }
    Ok(total)
}

/// `sqrt(<f, f>)` in the weighted norm.
pub fn weighted_norm(f: &GridFunction, profile: &SoundSpeedProfile) -> f64 {
    weighted_inner_product(f, f, profile).map(|v| v.re.max(0.0).sqrt()).unwrap_or(f64::NAN)
}
