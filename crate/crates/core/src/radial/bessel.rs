//! Bessel functions of integer order, spherical Bessel functions, their
//! zeros, and the closed-form radial modes for a constant coefficient.

use super::grid::{BoundaryCondition, Dimension, RadialGrid};
use super::modes::RadialMode;
use crate::error::{Error, Result};

/// Cylindrical Bessel function `J_n(x)` by Miller's backward recurrence,
/// normalized with `J_0 + 2 Σ J_2k = 1`.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if x < 0.0 {
        let v = bessel_j(n, -x);
        return if n.is_multiple_of(2) { v } else { -v };
    }
    let top = (n as f64).max(x);
    let mut m = (top + 30.0 + 2.0 * (40.0 * top).sqrt()) as usize;
    m += m % 2;
    let n = n as usize;
    let (mut jp1, mut j) = (0.0_f64, 1e-300_f64);
    let mut sum = 0.0;
    let mut result = 0.0;
    for k in (1..=m).rev() {
        let jm1 = 2.0 * k as f64 / x * j - jp1;
        jp1 = j;
        j = jm1;
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp1 *= 1e-250;
            sum *= 1e-250;
            result *= 1e-250;
        }
        // j now holds the (k-1)-th value
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            sum += 2.0 * j;
        }
        if k - 1 == n {
            result = j;
        }
    }
    sum += j;
    result / sum
}

/// `J_n'(x)`
pub fn bessel_j_prime(n: u32, x: f64) -> f64 {
    if n == 0 {
        -bessel_j(1, x)
    } else {
        0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x))
    }
}

/// Spherical Bessel function `j_l(x)`.
pub fn spherical_j(l: u32, x: f64) -> f64 {
    let ax = x.abs();
    let sign = if x < 0.0 && l % 2 == 1 { -1.0 } else { 1.0 };
    if ax < 2.0 {
        return sign * spherical_j_series(l, ax);
    }
    let top = (l as f64).max(ax);
    let m = (top + 30.0 + 2.0 * (40.0 * top).sqrt()) as usize;
    let l = l as usize;
    let (mut jp1, mut j) = (0.0_f64, 1e-300_f64);
    let mut result = 0.0;
    let mut j1_trial = 0.0;
    for k in (1..=m).rev() {
        let jm1 = (2 * k + 1) as f64 / ax * j - jp1;
        jp1 = j;
        j = jm1;
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp1 *= 1e-250;
            result *= 1e-250;
            j1_trial *= 1e-250;
        }
        if k - 1 == l {
            result = j;
        }
        if k - 1 == 1 {
            j1_trial = j;
        }
    }
    let j0_exact = ax.sin() / ax;
    let j1_exact = ax.sin() / (ax * ax) - ax.cos() / ax;
    let scale = if j0_exact.abs() >= j1_exact.abs() {
        j0_exact / j
    } else {
        j1_exact / j1_trial
    };
    sign * result * scale
}

fn spherical_j_series(l: u32, x: f64) -> f64 {
    // x^l / (2l+1)!! * Σ (-x²/2)^k / (k! (2l+3)(2l+5)...(2l+2k+1))
    let mut lead = 1.0;
    for i in 1..=l {
        lead *= x / (2 * i + 1) as f64;
    }
    let mut term = lead;
    let mut sum = lead;
    let y = -0.5 * x * x;
    for k in 1..60 {
        term *= y / (k as f64 * (2 * l + 2 * k + 1) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// `j_l'(x)`
pub fn spherical_j_prime(l: u32, x: f64) -> f64 {
    if l == 0 {
        -spherical_j(1, x)
    } else {
        spherical_j(l - 1, x) - (l as f64 + 1.0) / x * spherical_j(l, x)
    }
}

/// The first `count` positive zeros of `f`, scanning upward from `start`.
pub fn positive_zeros(f: impl Fn(f64) -> f64, start: f64, count: usize) -> Result<Vec<f64>> {
    const STEP: f64 = 0.05;
    let limit = start + 10.0 * (count as f64 + 10.0) * std::f64::consts::PI;
    let mut zeros = Vec::with_capacity(count);
    let mut a = start;
    let mut fa = f(a);
    while zeros.len() < count {
        let b = a + STEP;
        if b > limit {
            return Err(Error::numerical(
                format!("root bracketing stopped at x={b:.3} with {} of {count} zeros", zeros.len()),
                zeros.len(),
                f64::NAN,
            ));
        }
        let fb = f(b);
        if fa == 0.0 {
            zeros.push(a);
        } else if fa * fb < 0.0 {
            zeros.push(bisect(&f, a, b, fa));
        }
        a = b;
        fa = fb;
    }
    Ok(zeros)
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fa * fm < 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// Dimensionless frequencies `α` with `μ = sqrt(c0) α` for a constant
/// coefficient: zeros of `J_l'`/`J_l` in 2D and of `j_l'`/`j_l` in 3D, with
/// the constant mode `α = 0` first for Neumann `l = 0`.
pub fn reference_frequencies(l: u32, count: usize, bc: BoundaryCondition, dim: Dimension) -> Result<Vec<f64>> {
    let start = (0.5 * l as f64).max(1e-3);
    let mut out = Vec::with_capacity(count);
    let mut wanted = count;
    if bc == BoundaryCondition::Neumann && l == 0 && count > 0 {
        out.push(0.0);
        wanted -= 1;
    }
    let zeros = match (dim, bc) {
        (Dimension::Two, BoundaryCondition::Neumann) => positive_zeros(|x| bessel_j_prime(l, x), start, wanted)?,
        (Dimension::Two, BoundaryCondition::Dirichlet) => positive_zeros(|x| bessel_j(l, x), start, wanted)?,
        (Dimension::Three, BoundaryCondition::Neumann) => {
            positive_zeros(|x| spherical_j_prime(l, x), start, wanted)?
        }
        (Dimension::Three, BoundaryCondition::Dirichlet) => positive_zeros(|x| spherical_j(l, x), start, wanted)?,
    };
    out.extend(zeros);
    Ok(out)
}

/// Closed-form radial modes for `c ≡ c0`, sampled on `grid` and normalized
/// with the same discrete weighted norm the solver uses.
pub fn bessel_reference_modes(
    c0: f64,
    l: u32,
    count: usize,
    bc: BoundaryCondition,
    dim: Dimension,
    grid: &RadialGrid,
) -> Result<Vec<RadialMode>> {
    if !(c0 > 0.0 && c0.is_finite()) {
        return Err(Error::Domain(format!("constant speed must be positive, got {c0}")));
    }
    let alphas = reference_frequencies(l, count, bc, dim)?;
    let h = grid.spacing();
    let radial = |a: f64, r: f64| match dim {
        Dimension::Two => bessel_j(l, a * r),
        Dimension::Three => spherical_j(l, a * r),
    };
    let radial_prime = |a: f64, r: f64| match dim {
        Dimension::Two => a * bessel_j_prime(l, a * r),
        Dimension::Three => a * spherical_j_prime(l, a * r),
    };
    let mut modes = Vec::with_capacity(count);
    for (i, &alpha) in alphas.iter().enumerate() {
        let mut values: Vec<f64> = grid.nodes().map(|r| radial(alpha, r)).collect();
        let mass: f64 = grid
            .nodes()
            .zip(&values)
            .map(|(r, v)| dim.area_factor(r) / c0 * h * v * v)
            .sum();
        let norm = mass.sqrt();
        values.iter_mut().for_each(|v| *v /= norm);
        let mut h1 = radial(alpha, 1.0) / norm;
        let mut dh1 = radial_prime(alpha, 1.0) / norm;
        match bc {
            BoundaryCondition::Neumann => dh1 = 0.0,
            BoundaryCondition::Dirichlet => h1 = 0.0,
        }
        let flip = match bc {
            BoundaryCondition::Neumann => h1 < 0.0,
            BoundaryCondition::Dirichlet => dh1 < 0.0,
        };
        if flip {
            values.iter_mut().for_each(|v| *v = -*v);
            h1 = -h1;
            dh1 = -dh1;
        }
        modes.push(RadialMode {
            dimension: dim,
            l,
            k: i as u32 + 1,
            mu: c0.sqrt() * alpha,
            values,
            boundary_value: h1,
            boundary_derivative: dh1,
            bc,
        });
    }
    Ok(modes)
}
