use serde::{Deserialize, Serialize};

use super::grid::{BoundaryCondition, Dimension, RadialGrid};
use super::operator::{assemble_discrete_operator, DiscreteOperator};
use super::profile::SoundSpeedProfile;
use crate::error::{Error, Result};

/// Eigenvalues with `|λ| <= LAMBDA_CLAMP` are reported as exactly zero.
pub const LAMBDA_CLAMP: f64 = 1e-12;

/// One normalized eigenpair of the radial problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialMode {
    pub dimension: Dimension,
    /// Angular index (non-negative; 2D modes for `-l` share this solve).
    pub l: u32,
    /// Radial index, starting at 1.
    pub k: u32,
    /// Eigenfrequency `μ = sqrt(λ)`.
    pub mu: f64,
    /// Samples at the cell centres of the grid.
    pub values: Vec<f64>,
    /// Extrapolated `h(1)`.
    pub boundary_value: f64,
    /// Extrapolated `h'(1)`.
    pub boundary_derivative: f64,
    pub bc: BoundaryCondition,
}

impl RadialMode {
    pub fn grid(&self) -> RadialGrid {
        RadialGrid::new(self.values.len()).expect("mode without samples")
    }

    /// Gain of the forward operator on this mode: `h(1)` for Neumann,
    /// `h'(1)` for Dirichlet data.
    pub fn singular_value(&self) -> f64 {
        match self.bc {
            BoundaryCondition::Neumann => self.boundary_value,
            BoundaryCondition::Dirichlet => self.boundary_derivative,
        }
    }

    /// Piecewise-linear interpolant of the samples, closed at `r = 1` with
    /// the extrapolated boundary value and at `r = 0` with the regular
    /// behaviour (`h'(0) = 0` for `l = 0`, `h(0) = 0` otherwise).
    pub fn interpolate(&self, r: f64) -> Result<f64> {
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::Domain(format!("radius {r} outside (0, 1]")));
        }
        let n = self.values.len();
        let grid = self.grid();
        let first = grid.node(0);
        let last = grid.node(n - 1);
        let lerp = |x0: f64, y0: f64, x1: f64, y1: f64| y0 + (r - x0) / (x1 - x0) * (y1 - y0);
        if r <= first {
            let h0 = if self.l == 0 {
                (9.0 * self.values[0] - self.values[1]) / 8.0
            } else {
                0.0
            };
            return Ok(lerp(0.0, h0, first, self.values[0]));
        }
        if r >= last {
            return Ok(lerp(last, self.values[n - 1], 1.0, self.boundary_value));
        }
        let s = r * n as f64 - 0.5;
        let j = (s.floor() as usize).min(n - 2);
        Ok(lerp(grid.node(j), self.values[j], grid.node(j + 1), self.values[j + 1]))
    }
}

/// Weyl classification of the singular endpoint `r = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EndpointClass {
    LimitCircle,
    LimitPoint,
}

/// At `λ = 0` the solutions near the origin are `1, ln r` (2D) or `1, r^(2-n)`
/// for `l = 0`, and `r^l, r^(-l-n+2)` for `l >= 1`. Against the weight
/// `r^(n-1)/c` all of them are square integrable exactly when `l = 0`.
pub fn classify_origin(dim: Dimension, l: u32) -> EndpointClass {
    let n = dim.value() as i64;
    let l = l as i64;
    // |r^a|^2 r^(n-1) is integrable near 0 iff 2a + n - 1 > -1
    let integrable = |a: i64| 2 * a + n > 0;
    let solutions_integrable = if l == 0 {
        // 2D: 1 and ln r (log is integrable against r); nD: 1 and r^(2-n)
        n == 2 || integrable(2 - n)
    } else {
        integrable(l) && integrable(-l - n + 2)
    };
    if solutions_integrable {
        EndpointClass::LimitCircle
    } else {
        EndpointClass::LimitPoint
    }
}

/// Boundary data `(h(1), h'(1))` of a discrete mode, both second order.
/// Neumann: the quadratic through the two outermost cell centres with zero
/// slope at `r = 1`. Dirichlet: the boundary flux of the ghost closure,
/// `h'(1) = -2 h_N / Δr`. Differencing the cell values instead loses an
/// order, since they carry `O(Δr²)` errors.
pub fn boundary_values(values: &[f64], grid: &RadialGrid, bc: BoundaryCondition) -> (f64, f64) {
    let n = values.len();
    let last = values[n - 1];
    match bc {
        BoundaryCondition::Neumann => ((9.0 * last - values[n - 2]) / 8.0, 0.0),
        BoundaryCondition::Dirichlet => (0.0, -2.0 * last / grid.spacing()),
    }
}

/// The `count` lowest eigenpairs of the radial problem.
pub fn solve_radial_modes(
    profile: &SoundSpeedProfile,
    l: u32,
    count: usize,
    grid: &RadialGrid,
    bc: BoundaryCondition,
    dim: Dimension,
) -> Result<Vec<RadialMode>> {
    if count > grid.n_cells() {
        return Err(Error::Config(format!(
            "requested {count} modes from a {}-cell grid",
            grid.n_cells()
        )));
    }
    let op = assemble_discrete_operator(profile, l, grid, bc, dim)?;
    extract_modes(&op, l, count, grid, bc, dim)
}

/// Every eigenpair with `μ <= mu_max`, decided by the Sturm count (a mode
/// sitting on the threshold may exceed it by rounding).
pub fn solve_radial_modes_below(
    profile: &SoundSpeedProfile,
    l: u32,
    mu_max: f64,
    grid: &RadialGrid,
    bc: BoundaryCondition,
    dim: Dimension,
) -> Result<Vec<RadialMode>> {
    let op = assemble_discrete_operator(profile, l, grid, bc, dim)?;
    let count = count_below_frequency(&op, mu_max);
    extract_modes(&op, l, count, grid, bc, dim)
}

/// Sturm count of eigenvalues up to `mu^2`, with slack for the rounding
/// gap between bisection and the reported Rayleigh quotient.
pub(crate) fn count_below_frequency(op: &DiscreteOperator, mu: f64) -> usize {
    let scaled = op.scaled();
    let (lo, hi) = scaled.gershgorin();
    let slack = 64.0 * f64::EPSILON * lo.abs().max(hi.abs());
    scaled.count_below(mu * mu + slack + LAMBDA_CLAMP)
}

fn extract_modes(
    op: &DiscreteOperator,
    l: u32,
    count: usize,
    grid: &RadialGrid,
    bc: BoundaryCondition,
    dim: Dimension,
) -> Result<Vec<RadialMode>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let scaled = op.scaled();
    let lambdas: Vec<f64> = (0..count).map(|i| scaled.eigenvalue(i)).collect();
    let vectors = scaled.eigenvectors(&lambdas)?;

    let mut modes = Vec::with_capacity(count);
    for (i, x) in vectors.into_iter().enumerate() {
        let mut values: Vec<f64> = x.iter().zip(&op.weight).map(|(v, w)| v / w.sqrt()).collect();
        let norm = op.mass(&values).sqrt();
        values.iter_mut().for_each(|v| *v /= norm);

        // Rayleigh quotient in flux form: accurate even for the kernel mode.
        let mut lambda = op.energy(&values);
        if lambda.abs() <= LAMBDA_CLAMP || lambda < 0.0 {
            lambda = 0.0;
        }
        let (mut h1, mut dh1) = boundary_values(&values, grid, bc);
        let flip = match bc {
            BoundaryCondition::Neumann => h1 < 0.0,
            BoundaryCondition::Dirichlet => dh1 < 0.0,
        };
        if flip {
            values.iter_mut().for_each(|v| *v = -*v);
            h1 = -h1;
            dh1 = -dh1;
        }
        // Dirichlet reports h(1) = 0 exactly; `-0.0` is cosmetic only.
        if h1 == 0.0 {
            h1 = 0.0;
        }
        modes.push(RadialMode {
            dimension: dim,
            l,
            k: i as u32 + 1,
            mu: lambda.sqrt(),
            values,
            boundary_value: h1,
            boundary_derivative: dh1,
            bc,
        });
    }
    for w in modes.windows(2) {
        if !(w[1].mu > w[0].mu) {
            return Err(Error::numerical(
                format!(
                    "eigenfrequencies not strictly increasing for l={l}: {} then {}",
                    w[0].mu, w[1].mu
                ),
                0,
                w[1].mu - w[0].mu,
            ));
        }
    }
    Ok(modes)
}

/// Estimated convergence order of one eigenfrequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ConvergenceOrder {
    /// Identical on every grid (e.g. the constant Neumann mode).
    Exact,
    Estimated(f64),
    /// Differences did not shrink monotonically.
    Undetermined,
}

/// Richardson estimate of the order of `μ_{k,l}` for `k = 1..=count`, from
/// the three finest of the supplied grid sizes.
pub fn convergence_order(
    profile: &SoundSpeedProfile,
    l: u32,
    bc: BoundaryCondition,
    dim: Dimension,
    sizes: &[usize],
    count: usize,
) -> Result<Vec<ConvergenceOrder>> {
    if sizes.len() < 3 {
        return Err(Error::Config("convergence study needs at least three grid sizes".into()));
    }
    if sizes.windows(2).any(|w| w[1] < 2 * w[0]) {
        return Err(Error::Config("each grid size must be at least twice the previous".into()));
    }
    let finest = &sizes[sizes.len() - 3..];
    let mut mus = Vec::with_capacity(3);
    for &n in finest {
        let grid = RadialGrid::new(n)?;
        let modes = solve_radial_modes(profile, l, count, &grid, bc, dim)?;
        mus.push(modes.iter().map(|m| m.mu).collect::<Vec<_>>());
    }
    let h: Vec<f64> = finest.iter().map(|&n| 1.0 / n as f64).collect();
    Ok((0..count)
        .map(|k| richardson_order(&h, [mus[0][k], mus[1][k], mus[2][k]]))
        .collect())
}

/// Solves `(h0^p - h1^p) / (h1^p - h2^p) = (v0 - v1) / (v1 - v2)` for `p`.
pub fn richardson_order(h: &[f64], values: [f64; 3]) -> ConvergenceOrder {
    let scale = values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let d1 = values[0] - values[1];
    let d2 = values[1] - values[2];
    if d1.abs() <= 1e-12 * scale && d2.abs() <= 1e-12 * scale {
        return ConvergenceOrder::Exact;
    }
    let ratio = d1 / d2;
    if !(ratio > 1.0) || !ratio.is_finite() {
        return ConvergenceOrder::Undetermined;
    }
    let model = |p: f64| (h[0].powf(p) - h[1].powf(p)) / (h[1].powf(p) - h[2].powf(p));
    let (mut lo, mut hi) = (1e-3, 16.0);
    if ratio < model(lo) || ratio > model(hi) {
        return ConvergenceOrder::Undetermined;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if model(mid) < ratio {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    ConvergenceOrder::Estimated(0.5 * (lo + hi))
}

/// Least-squares slope of `log(error)` against `log(spacing)`.
pub fn fitted_order(sizes: &[usize], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = sizes.iter().map(|&n| -(n as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.abs().ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
