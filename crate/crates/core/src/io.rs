//! Binary and CSV file formats. All numbers are little-endian.
//!
//! * `PATMODE1`: the magic, then one record per radial mode until EOF:
//!   `dimension u32, l i32, k u32, bc u8, mu f64, n_cells u32, h1 f64,
//!   dh1 f64`, then `n_cells` f64 samples.
//! * `PATGRID1`: `dimension u32, n_cells u32`, then `n_theta u32` (2D) or
//!   `n_colat u32, n_azim u32` (3D), then interleaved `(re, im)` f64 samples,
//!   radial index outer.
//! * `PATTRAC1`: `n_theta u32, n_steps u32, dt f64`, then real f64 samples,
//!   time outer. `n_steps` counts intervals, so there are `n_steps + 1`
//!   frames.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::modal::{AngularGrid, GridFunction};
use crate::radial::{BoundaryCondition, Dimension, RadialGrid, RadialMode};
use crate::wave::{BoundaryTrace, TimeGrid};

pub const MODE_MAGIC: &[u8; 8] = b"PATMODE1";
pub const GRID_MAGIC: &[u8; 8] = b"PATGRID1";
pub const TRACE_MAGIC: &[u8; 8] = b"PATTRAC1";

/// Entries above this count are refused by the CSV writers.
pub const CSV_LIMIT: usize = 1 << 20;

fn put_u32(w: &mut impl Write, v: u32) -> Result<()> {
    Ok(w.write_all(&v.to_le_bytes())?)
}

fn put_f64(w: &mut impl Write, v: f64) -> Result<()> {
    Ok(w.write_all(&v.to_le_bytes())?)
}

fn get<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf).map_err(|e| match e.kind() {
        ErrorKind::UnexpectedEof => Error::Format("file ends inside a record".into()),
        _ => Error::Io(e),
    })?;
    Ok(buf)
}

fn get_u32(r: &mut impl Read) -> Result<u32> {
    get::<4>(r).map(u32::from_le_bytes)
}

fn get_f64(r: &mut impl Read) -> Result<f64> {
    get::<8>(r).map(f64::from_le_bytes)
}

fn expect_magic(r: &mut impl Read, magic: &[u8; 8]) -> Result<()> {
    let found = get::<8>(r)?;
    if &found != magic {
        return Err(Error::Format(format!(
            "expected magic {}, found {:?}",
            String::from_utf8_lossy(magic),
            String::from_utf8_lossy(&found)
        )));
    }
    Ok(())
}

fn to_u32(v: usize, what: &str) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::Format(format!("{what} {v} does not fit in u32")))
}

fn dimension_from(v: u32) -> Result<Dimension> {
    Dimension::try_from(v).map_err(|_| Error::Format(format!("unsupported dimension {v}")))
}

pub fn write_modes(w: &mut impl Write, modes: &[RadialMode]) -> Result<()> {
    w.write_all(MODE_MAGIC)?;
    for m in modes {
        put_u32(w, m.dimension.value())?;
        w.write_all(&i32::try_from(m.l).map_err(|_| Error::Format("l too large".into()))?.to_le_bytes())?;
        put_u32(w, m.k)?;
        w.write_all(&[m.bc.code()])?;
        put_f64(w, m.mu)?;
        put_u32(w, to_u32(m.values.len(), "n_cells")?)?;
        put_f64(w, m.boundary_value)?;
        put_f64(w, m.boundary_derivative)?;
        for v in &m.values {
            put_f64(w, *v)?;
        }
    }
    Ok(())
}

pub fn read_modes(r: &mut impl Read) -> Result<Vec<RadialMode>> {
    expect_magic(r, MODE_MAGIC)?;
    let mut out = Vec::new();
    loop {
        let mut first = [0u8; 4];
        match r.read(&mut first[..1])? {
            0 => break,
            _ => r.read_exact(&mut first[1..]).map_err(|_| Error::Format("truncated mode header".into()))?,
        }
        let dimension = dimension_from(u32::from_le_bytes(first))?;
        let l = i32::from_le_bytes(get::<4>(r)?);
        let l = u32::try_from(l).map_err(|_| Error::Format(format!("negative radial index l={l}")))?;
        let k = get_u32(r)?;
        let bc = BoundaryCondition::from_code(get::<1>(r)?[0])?;
        let mu = get_f64(r)?;
        let n = get_u32(r)? as usize;
        let boundary_value = get_f64(r)?;
        let boundary_derivative = get_f64(r)?;
        let values = (0..n).map(|_| get_f64(r)).collect::<Result<Vec<_>>>()?;
        out.push(RadialMode {
            dimension,
            l,
            k,
            mu,
            values,
            boundary_value,
            boundary_derivative,
            bc,
        });
    }
    Ok(out)
}

pub fn write_grid_function(w: &mut impl Write, f: &GridFunction) -> Result<()> {
    w.write_all(GRID_MAGIC)?;
    put_u32(w, f.dimension().value())?;
    put_u32(w, to_u32(f.radial.n_cells(), "n_cells")?)?;
    match &f.angular {
        AngularGrid::Circle { n_theta } => put_u32(w, to_u32(*n_theta, "n_theta")?)?,
        AngularGrid::Sphere(_) => {
            let (a, b) = f.angular.shape();
            put_u32(w, to_u32(a, "n_colat")?)?;
            put_u32(w, to_u32(b, "n_azim")?)?;
        }
    }
    for v in &f.samples {
        put_f64(w, v.re)?;
        put_f64(w, v.im)?;
    }
    Ok(())
}

pub fn read_grid_function(r: &mut impl Read) -> Result<GridFunction> {
    expect_magic(r, GRID_MAGIC)?;
    let dimension = dimension_from(get_u32(r)?)?;
    let radial = RadialGrid::new(get_u32(r)? as usize).map_err(|e| Error::Format(e.to_string()))?;
    let angular = match dimension {
        Dimension::Two => AngularGrid::circle(get_u32(r)? as usize),
        Dimension::Three => {
            let a = get_u32(r)? as usize;
            AngularGrid::sphere(a, get_u32(r)? as usize)
        }
    }
    .map_err(|e| Error::Format(e.to_string()))?;
    let n = radial.n_cells() * angular.len();
    let samples = (0..n)
        .map(|_| Ok(Complex64::new(get_f64(r)?, get_f64(r)?)))
        .collect::<Result<Vec<_>>>()?;
    trailing_data(r)?;
    GridFunction::new(radial, angular, samples)
}

fn trailing_data(r: &mut impl Read) -> Result<()> {
    let mut probe = [0u8; 1];
    if r.read(&mut probe)? != 0 {
        return Err(Error::Format("unexpected data after the last sample".into()));
    }
    Ok(())
}

fn require_real_2d(trace: &BoundaryTrace) -> Result<usize> {
    let n_theta = match trace.angular {
        AngularGrid::Circle { n_theta } => n_theta,
        AngularGrid::Sphere(_) => return Err(Error::Type("trace files hold 2D traces only".into())),
    };
    if !trace.is_real() {
        return Err(Error::Type("trace files hold real traces only".into()));
    }
    Ok(n_theta)
}

pub fn write_trace(w: &mut impl Write, trace: &BoundaryTrace) -> Result<()> {
    let n_theta = require_real_2d(trace)?;
    w.write_all(TRACE_MAGIC)?;
    put_u32(w, to_u32(n_theta, "n_theta")?)?;
    put_u32(w, to_u32(trace.time.n_steps, "n_steps")?)?;
    put_f64(w, trace.time.dt)?;
    for v in &trace.samples {
        put_f64(w, v.re)?;
    }
    Ok(())
}

pub fn read_trace(r: &mut impl Read) -> Result<BoundaryTrace> {
    expect_magic(r, TRACE_MAGIC)?;
    let n_theta = get_u32(r)? as usize;
    let n_steps = get_u32(r)? as usize;
    let dt = get_f64(r)?;
    let angular = AngularGrid::circle(n_theta).map_err(|e| Error::Format(e.to_string()))?;
    let time = TimeGrid::new(dt, n_steps).map_err(|e| Error::Format(e.to_string()))?;
    let n = n_theta * time.n_samples();
    let samples = (0..n)
        .map(|_| Ok(Complex64::new(get_f64(r)?, 0.0)))
        .collect::<Result<Vec<_>>>()?;
    trailing_data(r)?;
    BoundaryTrace::new(angular, time, samples)
}

/// `theta_index,time_index,value`, one row per sample. The time step is
/// not stored and must be supplied when reading.
pub fn write_trace_csv(w: &mut impl Write, trace: &BoundaryTrace) -> Result<()> {
    let n_theta = require_real_2d(trace)?;
    if trace.samples.len() > CSV_LIMIT {
        return Err(Error::Config(format!("{} samples is too many for CSV", trace.samples.len())));
    }
    writeln!(w, "theta_index,time_index,value")?;
    for s in 0..trace.time.n_samples() {
        for i in 0..n_theta {
            writeln!(w, "{i},{s},{:e}", trace.at(s, i).re)?;
        }
    }
    Ok(())
}

pub fn read_trace_csv(r: impl BufRead, dt: f64) -> Result<BoundaryTrace> {
    let mut lines = r.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim() != "theta_index,time_index,value" {
        return Err(Error::Format(format!("unexpected CSV header '{header}'")));
    }
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = || Error::Format(format!("bad CSV row {}: '{line}'", n + 2));
        let mut parts = line.split(',');
        let i: usize = parts.next().and_then(|p| p.trim().parse().ok()).ok_or_else(bad)?;
        let s: usize = parts.next().and_then(|p| p.trim().parse().ok()).ok_or_else(bad)?;
        let v: f64 = parts.next().and_then(|p| p.trim().parse().ok()).ok_or_else(bad)?;
        if parts.next().is_some() {
            return Err(bad());
        }
        rows.push((i, s, v));
    }
    let n_theta = rows.iter().map(|r| r.0 + 1).max().unwrap_or(0);
    let n_samples = rows.iter().map(|r| r.1 + 1).max().unwrap_or(0);
    if n_samples < 2 || rows.len() != n_theta * n_samples {
        return Err(Error::Format(format!(
            "CSV rows do not fill a {n_theta} x {n_samples} grid"
        )));
    }
    let angular = AngularGrid::circle(n_theta)?;
    let time = TimeGrid::new(dt, n_samples - 1)?;
    let mut samples = vec![Complex64::new(f64::NAN, 0.0); rows.len()];
    for (i, s, v) in rows {
        samples[s * n_theta + i] = Complex64::new(v, 0.0);
    }
    if samples.iter().any(|v| v.re.is_nan()) {
        return Err(Error::Format("CSV has duplicate or missing cells".into()));
    }
    BoundaryTrace::new(angular, time, samples)
}

/// `radial_index,angular_index,re,im`.
pub fn write_grid_csv(w: &mut impl Write, f: &GridFunction) -> Result<()> {
    if f.samples.len() > CSV_LIMIT {
        return Err(Error::Config(format!("{} samples is too many for CSV", f.samples.len())));
    }
    writeln!(w, "radial_index,angular_index,re,im")?;
    let n_ang = f.angular.len();
    for (n, v) in f.samples.iter().enumerate() {
        writeln!(w, "{},{},{:e},{:e}", n / n_ang, n % n_ang, v.re, v.im)?;
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path)?))
}

pub fn save_modes(path: impl AsRef<Path>, modes: &[RadialMode]) -> Result<()> {
    let mut w = create(path.as_ref())?;
    write_modes(&mut w, modes)?;
    Ok(w.flush()?)
}

pub fn load_modes(path: impl AsRef<Path>) -> Result<Vec<RadialMode>> {
    read_modes(&mut open(path.as_ref())?)
}

pub fn save_grid_function(path: impl AsRef<Path>, f: &GridFunction) -> Result<()> {
    let mut w = create(path.as_ref())?;
    write_grid_function(&mut w, f)?;
    Ok(w.flush()?)
}

pub fn load_grid_function(path: impl AsRef<Path>) -> Result<GridFunction> {
    read_grid_function(&mut open(path.as_ref())?)
}

pub fn save_trace(path: impl AsRef<Path>, trace: &BoundaryTrace) -> Result<()> {
    let mut w = create(path.as_ref())?;
    write_trace(&mut w, trace)?;
    Ok(w.flush()?)
}

pub fn load_trace(path: impl AsRef<Path>) -> Result<BoundaryTrace> {
    read_trace(&mut open(path.as_ref())?)
}
