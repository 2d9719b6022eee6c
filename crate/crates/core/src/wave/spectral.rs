use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use rayon::prelude::*;

use super::time::TimeGrid;
use super::trace::BoundaryTrace;
use crate::error::{Error, Result};
use crate::modal::{AngularGrid, AngularKey, ModalCoefficients, Mode, ModeIndex};

/// Boundary pressure of the series solution:
/// `Σ X_i h_i(1) Y_i(θ) cos(μ_i t)`.
pub fn forward_spectral(
    coeffs: &ModalCoefficients,
    modes: &[Mode],
    time: TimeGrid,
    angular: &AngularGrid,
) -> Result<BoundaryTrace> {
    forward_with_gain(coeffs, modes, time, angular, |m| m.radial.boundary_value)
}

/// The series trace with an arbitrary per-mode boundary gain.
pub(crate) fn forward_with_gain(
    coeffs: &ModalCoefficients,
    modes: &[Mode],
    time: TimeGrid,
    angular: &AngularGrid,
    gain: impl Fn(&Mode) -> f64 + Sync,
) -> Result<BoundaryTrace> {
    let lookup: HashMap<ModeIndex, &Mode> = modes.iter().map(|m| (m.index, m)).collect();
    let mut by_key: BTreeMap<AngularKey, Vec<(f64, Complex64)>> = BTreeMap::new();
    for (index, c) in coeffs.iter() {
        let mode = lookup
            .get(index)
            .ok_or_else(|| Error::Index(format!("no mode for coefficient {index}")))?;
        if mode.index.dimension() != angular.dimension() {
            return Err(Error::Shape(format!("mode {index} does not match the angular grid dimension")));
        }
        let g = gain(mode);
        if !g.is_finite() {
            return Err(Error::Index(format!("mode {index} has no finite boundary data")));
        }
        by_key.entry(index.angular_key()).or_default().push((mode.mu, c * g));
    }
    let l_max = by_key.keys().map(|k| k.l.unsigned_abs()).max().unwrap_or(0);
    if l_max > angular.max_degree() {
        return Err(Error::Config(format!(
            "angular grid resolves degree {} but coefficients reach {l_max}",
            angular.max_degree()
        )));
    }

    let n_t = time.n_samples();
    let n_a = angular.len();
    let parts: Vec<(Vec<Complex64>, Vec<Complex64>)> = by_key
        .par_iter()
        .map(|(key, terms)| {
            let series: Vec<Complex64> = time
                .times()
                .map(|t| terms.iter().map(|(mu, a)| a * (mu * t).cos()).sum())
                .collect();
            Ok((series, angular.factor_values(*key)?))
        })
        .collect::<Result<_>>()?;
    let mut samples = vec![Complex64::default(); n_t * n_a];
    for (series, y) in &parts {
        for (s, a) in series.iter().enumerate() {
            let frame = &mut samples[s * n_a..(s + 1) * n_a];
            for (p, v) in frame.iter_mut().zip(y) {
                *p += a * v;
            }
        }
    }
    BoundaryTrace::new(angular.clone(), time, samples)
}
