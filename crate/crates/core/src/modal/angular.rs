use std::f64::consts::PI;

use num_complex::Complex64;

use super::index::AngularKey;
use crate::error::{Error, Result};
use crate::radial::Dimension;

/// Quadrature grid on the unit circle or the unit sphere.
#[derive(Debug, Clone)]
pub enum AngularGrid {
    /// Uniform `θ_i = 2π i / n_theta`, trapezoid weights.
    Circle { n_theta: usize },
    Sphere(SphereGrid),
}

/// Gauss–Legendre colatitudes times uniform azimuths, colatitude outer.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    n_colat: usize,
    n_azim: usize,
    cos_colat: Vec<f64>,
    colat_weights: Vec<f64>,
}

impl PartialEq for AngularGrid {
    fn eq(&self, other: &Self) -> bool {
        self.shape() == other.shape()
    }
}

impl AngularGrid {
    pub fn circle(n_theta: usize) -> Result<Self> {
        if n_theta < 2 {
            return Err(Error::Config(format!("circle grid needs at least 2 points, got {n_theta}")));
        }
        Ok(AngularGrid::Circle { n_theta })
    }

    pub fn sphere(n_colat: usize, n_azim: usize) -> Result<Self> {
        if n_colat < 1 || n_azim < 1 {
            return Err(Error::Config("sphere grid needs at least one colatitude and azimuth".into()));
        }
        let (cos_colat, colat_weights) = gauss_legendre(n_colat);
        Ok(AngularGrid::Sphere(SphereGrid {
            n_colat,
            n_azim,
            cos_colat,
            colat_weights,
        }))
    }

    /// Smallest grid that integrates products of angular factors up to
    /// degree `l_max` exactly.
    pub fn for_degree(dim: Dimension, l_max: u32) -> Self {
        let l = l_max as usize;
        match dim {
            Dimension::Two => AngularGrid::Circle { n_theta: 2 * l + 2 },
            Dimension::Three => Self::sphere(l + 1, 2 * l + 2).expect("positive sizes"),
        }
    }

    pub fn dimension(&self) -> Dimension {
        match self {
            AngularGrid::Circle { .. } => Dimension::Two,
            AngularGrid::Sphere(_) => Dimension::Three,
        }
    }

    /// `(n_theta, 1)` or `(n_colat, n_azim)`.
    pub fn shape(&self) -> (usize, usize) {
        match self {
            AngularGrid::Circle { n_theta } => (*n_theta, 1),
            AngularGrid::Sphere(s) => (s.n_colat, s.n_azim),
        }
    }

    pub fn len(&self) -> usize {
        let (a, b) = self.shape();
        a * b
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Largest degree integrated exactly in products of two factors.
    pub fn max_degree(&self) -> u32 {
        match self {
            AngularGrid::Circle { n_theta } => ((n_theta - 2) / 2) as u32,
            AngularGrid::Sphere(s) => (s.n_colat - 1).min((s.n_azim - 2) / 2) as u32,
        }
    }

    /// `[θ, 0]` on the circle, `[colatitude, azimuth]` on the sphere.
    pub fn point(&self, i: usize) -> [f64; 2] {
        match self {
            AngularGrid::Circle { n_theta } => [2.0 * PI * i as f64 / *n_theta as f64, 0.0],
            AngularGrid::Sphere(s) => {
                let (c, a) = (i / s.n_azim, i % s.n_azim);
                [s.cos_colat[c].acos(), 2.0 * PI * a as f64 / s.n_azim as f64]
            }
        }
    }

    /// Unit vector of point `i` (third component 0 in 2D).
    pub fn direction(&self, i: usize) -> [f64; 3] {
        let [a, b] = self.point(i);
        match self {
            AngularGrid::Circle { .. } => [a.cos(), a.sin(), 0.0],
            AngularGrid::Sphere(_) => [a.sin() * b.cos(), a.sin() * b.sin(), a.cos()],
        }
    }

    /// Quadrature weights; they sum to `2π` (circle) or `4π` (sphere).
    pub fn weights(&self) -> Vec<f64> {
        match self {
            AngularGrid::Circle { n_theta } => vec![2.0 * PI / *n_theta as f64; *n_theta],
            AngularGrid::Sphere(s) => {
                let da = 2.0 * PI / s.n_azim as f64;
                s.colat_weights
                    .iter()
                    .flat_map(|w| std::iter::repeat_n(w * da, s.n_azim))
                    .collect()
            }
        }
    }

    /// Orthonormal angular factor sampled at every grid point.
    pub fn factor_values(&self, key: AngularKey) -> Result<Vec<Complex64>> {
        match self {
            AngularGrid::Circle { n_theta } => {
                let norm = 1.0 / (2.0 * PI).sqrt();
                Ok((0..*n_theta)
                    .map(|i| {
                        let theta = 2.0 * PI * i as f64 / *n_theta as f64;
                        Complex64::from_polar(norm, key.l as f64 * theta)
                    })
                    .collect())
            }
            AngularGrid::Sphere(s) => {
                if key.l < 0 || key.m.unsigned_abs() > key.l as u32 {
                    return Err(Error::Domain(format!("invalid spherical harmonic ({}, {})", key.l, key.m)));
                }
                let mut out = Vec::with_capacity(self.len());
                for &x in &s.cos_colat {
                    let p = normalized_legendre(key.l as u32, key.m, x);
                    for a in 0..s.n_azim {
                        let phi = 2.0 * PI * a as f64 / s.n_azim as f64;
                        out.push(Complex64::from_polar(p, key.m as f64 * phi));
                    }
                }
                Ok(out)
            }
        }
    }
}

/// Orthonormal spherical harmonic `Y_lm(colatitude, azimuth)` with the
/// Condon–Shortley phase.
pub fn spherical_harmonic(l: u32, m: i32, colatitude: f64, azimuth: f64) -> Result<Complex64> {
    if m.unsigned_abs() > l {
        return Err(Error::Domain(format!("|m| = {} exceeds l = {l}", m.unsigned_abs())));
    }
    let p = normalized_legendre(l, m, colatitude.cos());
    Ok(Complex64::from_polar(p, m as f64 * azimuth))
}

/// `Y_lm(θ, 0)`: the associated Legendre function normalized so that
/// `Y_lm = P̄ e^{imφ}` is orthonormal on the sphere, with
/// `Y_{l,-m} = (-1)^m conj(Y_lm)`.
fn normalized_legendre(l: u32, m: i32, x: f64) -> f64 {
    let ma = m.unsigned_abs();
    let s = (1.0 - x * x).max(0.0).sqrt();
    // P̄_m^m
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for i in 1..=ma {
        pmm *= -s * ((2 * i + 1) as f64 / (2 * i) as f64).sqrt();
    }
    let value = if l == ma {
        pmm
    } else {
        let mut prev = pmm;
        let mut cur = x * ((2 * ma + 3) as f64).sqrt() * pmm;
        for ll in (ma + 2)..=l {
            let (lf, mf) = (ll as f64, ma as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
            let next = a * (x * cur - b * prev);
            prev = cur;
            cur = next;
        }
        cur
    };
    if m < 0 && ma % 2 == 1 {
        -value
    } else {
        value
    }
}

/// Gauss–Legendre nodes (ascending) and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
