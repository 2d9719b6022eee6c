//! 16-bit binary PGM export of disk fields, and the polar/Cartesian
//! resampling behind it.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use patsvd_core::modal::{AngularGrid, GridFunction};
use patsvd_core::radial::RadialGrid;

use crate::error::{LabError, Result};

/// Gray level of a field with no contrast.
pub const MID_GRAY: u16 = 32768;

fn circle_size(g: &GridFunction) -> Result<usize> {
    match g.angular {
        AngularGrid::Circle { n_theta } => Ok(n_theta),
        AngularGrid::Sphere(_) => Err(LabError::Config("image export supports 2D fields only".into())),
    }
}

/// Centre of pixel `(row, col)` on a `size x size` raster of `[-1, 1]²`,
/// with rows running from top (`y = 1`) to bottom.
pub fn pixel_center(row: usize, col: usize, size: usize) -> (f64, f64) {
    let h = 2.0 / size as f64;
    (-1.0 + (col as f64 + 0.5) * h, 1.0 - (row as f64 + 0.5) * h)
}

/// Real part of `g` at polar point `(r, θ)`: linear in `r` between cell
/// centres (towards the ring average at the origin, constant beyond the
/// last centre) and periodic-linear in `θ`.
pub fn polar_value(g: &GridFunction, r: f64, theta: f64) -> Result<f64> {
    let n_theta = circle_size(g)?;
    let n_r = g.radial.n_cells();
    let at_ring = |j: usize| -> f64 {
        let q = theta.rem_euclid(2.0 * PI) / (2.0 * PI) * n_theta as f64;
        let i0 = (q.floor() as usize) % n_theta;
        let i1 = (i0 + 1) % n_theta;
        let t = q - q.floor();
        (1.0 - t) * g.at(j, i0).re + t * g.at(j, i1).re
    };
    let p = r * n_r as f64 - 0.5;
    if p < 0.0 {
        let centre = g.ring(0).iter().map(|v| v.re).sum::<f64>() / n_theta as f64;
        let t = (r / g.radial.node(0)).clamp(0.0, 1.0);
        return Ok((1.0 - t) * centre + t * at_ring(0));
    }
    if p >= (n_r - 1) as f64 {
        return Ok(at_ring(n_r - 1));
    }
    let j0 = p.floor() as usize;
    let t = p - j0 as f64;
    Ok((1.0 - t) * at_ring(j0) + t * at_ring(j0 + 1))
}

/// Row-major `size x size` raster of the real part. Pixels outside the disk
/// hold the value continued from the boundary.
pub fn rasterize(g: &GridFunction, size: usize) -> Result<Vec<f64>> {
    circle_size(g)?;
    let mut out = Vec::with_capacity(size * size);
    for row in 0..size {
        for col in 0..size {
            let (x, y) = pixel_center(row, col, size);
            out.push(polar_value(g, x.hypot(y), y.atan2(x))?);
        }
    }
    Ok(out)
}

/// Bilinear samples of a raster on a polar grid.
pub fn resample_raster(raster: &[f64], size: usize, radial: RadialGrid, n_theta: usize) -> Result<GridFunction> {
    if raster.len() != size * size || size < 2 {
        return Err(LabError::Config(format!("raster has {} pixels, expected {size}²", raster.len())));
    }
    let angular = AngularGrid::circle(n_theta)?;
    let h = 2.0 / size as f64;
    Ok(GridFunction::from_fn(radial, angular, |r, [theta, _]| {
        let (x, y) = (r * theta.cos(), r * theta.sin());
        let cx = ((x + 1.0) / h - 0.5).clamp(0.0, (size - 1) as f64);
        let cy = ((1.0 - y) / h - 0.5).clamp(0.0, (size - 1) as f64);
        let (c0, r0) = ((cx.floor() as usize).min(size - 2), (cy.floor() as usize).min(size - 2));
        let (tx, ty) = (cx - c0 as f64, cy - r0 as f64);
        let p = |row: usize, col: usize| raster[row * size + col];
        let v = (1.0 - ty) * ((1.0 - tx) * p(r0, c0) + tx * p(r0, c0 + 1))
            + ty * ((1.0 - tx) * p(r0 + 1, c0) + tx * p(r0 + 1, c0 + 1));
        Complex64::new(v, 0.0)
    }))
}

/// 16-bit gray levels: min-max scaling over the disk, 0 outside it.
pub fn gray_levels(raster: &[f64], size: usize) -> Vec<u16> {
    let inside = |n: usize| {
        let (x, y) = pixel_center(n / size, n % size, size);
        x * x + y * y < 1.0
    };
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (n, v) in raster.iter().enumerate() {
        if inside(n) {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
    }
    let flat = !(hi - lo > 1e-12 * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE));
    raster
        .iter()
        .enumerate()
        .map(|(n, v)| {
            if !inside(n) {
                0
            } else if flat {
                MID_GRAY
            } else {
                ((v - lo) / (hi - lo) * 65535.0).round() as u16
            }
        })
        .collect()
}

pub fn encode_pgm(levels: &[u16], size: usize) -> Vec<u8> {
    let mut out = format!("P5\n{size} {size}\n65535\n").into_bytes();
    for v in levels {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out
}

pub fn export_image(g: &GridFunction, path: impl AsRef<Path>, size: usize) -> Result<()> {
    let raster = rasterize(g, size)?;
    let bytes = encode_pgm(&gray_levels(&raster, size), size);
    let mut file = std::fs::File::create(path)?;
    file.write_all(&bytes)?;
    Ok(())
}
