use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use super::angular::{spherical_harmonic, AngularGrid};
use super::grid_function::{GridFunction, QuadratureRule};
use super::index::{AngularKey, ModalCoefficients, Mode, ModeIndex};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::radial::modes::count_below_frequency;
use crate::radial::{
    assemble_discrete_operator, solve_radial_modes, solve_radial_modes_below, BoundaryCondition, Dimension,
    RadialGrid, SoundSpeedProfile,
};

/// Value of a full eigenfunction at `(r, angles)`, angles as in
/// [`AngularGrid::point`].
pub fn evaluate_mode(mode: &Mode, r: f64, angles: [f64; 2]) -> Result<Complex64> {
    if r <= 0.0 {
        return Err(Error::Domain(format!("mode evaluated at r = {r}")));
    }
    let h = mode.radial.interpolate(r)?;
    let angular = match mode.index {
        ModeIndex::Disk { l, .. } => Complex64::from_polar(1.0 / (2.0 * PI).sqrt(), l as f64 * angles[0]),
        ModeIndex::Ball { l, m, .. } => spherical_harmonic(l, m, angles[0], angles[1])?,
    };
    Ok(h * angular)
}

fn check_angular_resolution(angular: &AngularGrid, modes: &[Mode]) -> Result<()> {
    let l_max = modes.iter().map(|m| m.index.radial_l()).max().unwrap_or(0);
    if angular.dimension() != modes.first().map_or(angular.dimension(), |m| m.index.dimension()) {
        return Err(Error::Shape("modes and angular grid have different dimensions".into()));
    }
    if l_max > angular.max_degree() {
        let (a, b) = angular.shape();
        return Err(Error::Config(format!(
            "angular grid {a}x{b} resolves degree {} but modes reach {l_max}",
            angular.max_degree()
        )));
    }
    Ok(())
}

fn group_by_key<'a>(modes: impl IntoIterator<Item = &'a Mode>) -> BTreeMap<AngularKey, Vec<&'a Mode>> {
    let mut groups: BTreeMap<AngularKey, Vec<&Mode>> = BTreeMap::new();
    for m in modes {
        groups.entry(m.index.angular_key()).or_default().push(m);
    }
    groups
}

/// Radial samples of `mode` on `grid`, interpolating if it was solved on a
/// different one.
fn radial_on(mode: &Mode, grid: &RadialGrid) -> Result<Vec<f64>> {
    if mode.radial.values.len() == grid.n_cells() {
        Ok(mode.radial.values.clone())
    } else {
        grid.nodes().map(|r| mode.radial.interpolate(r)).collect()
    }
}

/// `<f, φ>` for every mode. The angular integral is a discrete Fourier
/// (or spherical-harmonic) sum per ring, shared by all modes of one
/// angular factor.
pub fn project(f: &GridFunction, modes: &[Mode], profile: &SoundSpeedProfile) -> Result<ModalCoefficients> {
    check_angular_resolution(&f.angular, modes)?;
    for m in modes {
        if m.radial.values.len() != f.radial.n_cells() {
            return Err(Error::Shape(format!(
                "mode {} solved on {} cells, function sampled on {}",
                m.index,
                m.radial.values.len(),
                f.radial.n_cells()
            )));
        }
    }
    let rule = QuadratureRule::new(&f.radial, &f.angular);
    let wr = rule.weighted_radial(&f.radial, profile);
    let groups = group_by_key(modes);
    let results: Vec<Vec<(ModeIndex, Complex64)>> = groups
        .par_iter()
        .map(|(key, members)| {
            let y = f.angular.factor_values(*key)?;
            let weighted: Vec<Complex64> =
                y.iter().zip(&rule.angular_weights).map(|(v, w)| v.conj() * w).collect();
            let ring: Vec<Complex64> = (0..f.radial.n_cells())
                .map(|j| f.ring(j).iter().zip(&weighted).map(|(a, b)| a * b).sum::<Complex64>() * wr[j])
                .collect();
            Ok(members
                .iter()
                .map(|m| {
                    let c: Complex64 = ring.iter().zip(&m.radial.values).map(|(a, h)| a * h).sum();
                    (m.index, c)
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(results.into_iter().flatten().collect())
}

/// `Σ X_i φ_i` sampled on the product grid.
pub fn synthesize(
    coeffs: &ModalCoefficients,
    modes: &[Mode],
    radial: &RadialGrid,
    angular: &AngularGrid,
) -> Result<GridFunction> {
    let lookup: HashMap<ModeIndex, &Mode> = modes.iter().map(|m| (m.index, m)).collect();
    let mut used = Vec::with_capacity(coeffs.len());
    for (index, c) in coeffs.iter() {
        let mode = lookup
            .get(index)
            .ok_or_else(|| Error::Index(format!("no mode for coefficient {index}")))?;
        used.push((*mode, *c));
    }
    check_angular_resolution(angular, &used.iter().map(|(m, _)| (*m).clone()).collect::<Vec<_>>())?;
    let mut by_key: BTreeMap<AngularKey, Vec<(&Mode, Complex64)>> = BTreeMap::new();
    for (m, c) in used {
        by_key.entry(m.index.angular_key()).or_default().push((m, c));
    }
    let n_r = radial.n_cells();
    let n_a = angular.len();
    let parts: Vec<(Vec<Complex64>, Vec<Complex64>)> = by_key
        .par_iter()
        .map(|(key, members)| {
            let mut profile = vec![Complex64::default(); n_r];
            for (m, c) in members {
                for (p, h) in profile.iter_mut().zip(radial_on(m, radial)?) {
                    *p += c * h;
                }
            }
            Ok((profile, angular.factor_values(*key)?))
        })
        .collect::<Result<_>>()?;
    let mut samples = vec![Complex64::default(); n_r * n_a];
    for (radial_part, angular_part) in &parts {
        for (j, rp) in radial_part.iter().enumerate() {
            if *rp == Complex64::default() {
                continue;
            }
            let row = &mut samples[j * n_a..(j + 1) * n_a];
            for (s, y) in row.iter_mut().zip(angular_part) {
                *s += rp * y;
            }
        }
    }
    GridFunction::new(*radial, angular.clone(), samples)
}

/// A single mode sampled on the product grid.
pub fn mode_samples(mode: &Mode, radial: &RadialGrid, angular: &AngularGrid) -> Result<GridFunction> {
    let coeffs: ModalCoefficients = [(mode.index, Complex64::new(1.0, 0.0))].into_iter().collect();
    synthesize(&coeffs, std::slice::from_ref(mode), radial, angular)
}

/// Weighted Gram matrix `G_ab = <φ_b, φ_a>` under the product quadrature.
/// The quadrature is separable, so each entry is an angular overlap times a
/// radial weighted sum.
pub fn gram_matrix(modes: &[Mode], profile: &SoundSpeedProfile, angular: &AngularGrid) -> Result<CMatrix> {
    check_angular_resolution(angular, modes)?;
    let n = modes.len();
    let grid = match modes.first() {
        Some(m) => m.radial.grid(),
        None => return Ok(CMatrix::zeros(0, 0)),
    };
    if modes.iter().any(|m| m.radial.values.len() != grid.n_cells()) {
        return Err(Error::Shape("modes solved on different radial grids".into()));
    }
    let rule = QuadratureRule::new(&grid, angular);
    let wr = rule.weighted_radial(&grid, profile);

    let keys: Vec<AngularKey> = group_by_key(modes).into_keys().collect();
    let key_pos: HashMap<AngularKey, usize> = keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
    let tables: Vec<Vec<Complex64>> = keys.iter().map(|k| angular.factor_values(*k)).collect::<Result<_>>()?;
    let mut ang = CMatrix::zeros(keys.len(), keys.len());
    for a in 0..keys.len() {
        for b in 0..keys.len() {
            ang[(a, b)] = tables[b]
                .iter()
                .zip(&tables[a])
                .zip(&rule.angular_weights)
                .map(|((x, y), w)| x * y.conj() * w)
                .sum();
        }
    }

    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|a| {
            let ka = key_pos[&modes[a].index.angular_key()];
            (0..n)
                .map(|b| {
                    if b < a {
                        return Complex64::default();
                    }
                    let kb = key_pos[&modes[b].index.angular_key()];
                    let radial: f64 = modes[a]
                        .radial
                        .values
                        .iter()
                        .zip(&modes[b].radial.values)
                        .zip(&wr)
                        .map(|((x, y), w)| x * y * w)
                        .sum();
                    ang[(ka, kb)] * radial
                })
                .collect()
        })
        .collect();
    let mut g = CMatrix::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            g[(a, b)] = rows[a][b];
            g[(b, a)] = rows[a][b].conj();
        }
        g[(a, a)].im = 0.0;
    }
    Ok(g)
}

/// How many modes to keep.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeSelection {
    /// The lowest `n` frequencies, rounded up so that `±l` pairs (2D) or
    /// full `m` multiplets (3D) are never split.
    Count(usize),
    /// Every mode with `μ <= mu_max`.
    FrequencyBall(f64),
    /// `|l| <= l_max`, `k <= k_max`.
    Rectangle { l_max: u32, k_max: u32 },
}

fn multiplicity(dim: Dimension, l: u32) -> usize {
    match dim {
        Dimension::Two => {
            if l == 0 {
                1
            } else {
                2
            }
        }
        Dimension::Three => 2 * l as usize + 1,
    }
}

fn expand(radial: Vec<crate::radial::RadialMode>, dim: Dimension) -> Result<Vec<Mode>> {
    let mut out = Vec::new();
    for r in radial {
        let (l, k) = (r.l, r.k);
        let shared = Arc::new(r);
        match dim {
            Dimension::Two => {
                if l > 0 {
                    out.push(Mode::new(ModeIndex::disk(-(l as i32), k), shared.clone())?);
                }
                out.push(Mode::new(ModeIndex::disk(l as i32, k), shared)?);
            }
            Dimension::Three => {
                for m in -(l as i32)..=(l as i32) {
                    out.push(Mode::new(ModeIndex::ball(l, m, k)?, shared.clone())?);
                }
            }
        }
    }
    Ok(out)
}

/// Number of modes with `μ <= mu` over all angular indices.
fn count_modes_below(
    profile: &SoundSpeedProfile,
    mu: f64,
    grid: &RadialGrid,
    bc: BoundaryCondition,
    dim: Dimension,
    l_limit: u32,
) -> Result<usize> {
    let mut total = 0;
    for l in 0..=l_limit {
        let op = assemble_discrete_operator(profile, l, grid, bc, dim)?;
        let n = count_below_frequency(&op, mu);
        if n == 0 {
            break;
        }
        total += n * multiplicity(dim, l);
    }
    Ok(total)
}

/// Builds the mode family for a selection, sorted by `(μ, index)`.
pub fn select_modes(
    profile: &SoundSpeedProfile,
    selection: ModeSelection,
    grid: &RadialGrid,
    bc: BoundaryCondition,
    dim: Dimension,
) -> Result<Vec<Mode>> {
    let l_limit = grid.n_cells() as u32;
    let mut modes = match selection {
        ModeSelection::Rectangle { l_max, k_max } => {
            let per_l: Vec<_> = (0..=l_max)
                .into_par_iter()
                .map(|l| solve_radial_modes(profile, l, k_max as usize, grid, bc, dim))
                .collect::<Result<_>>()?;
            let mut out = Vec::new();
            for family in per_l {
                out.extend(expand(family, dim)?);
            }
            out
        }
        ModeSelection::FrequencyBall(mu_max) => ball(profile, mu_max, grid, bc, dim, l_limit)?,
        ModeSelection::Count(n) => {
            if n == 0 {
                return Ok(Vec::new());
            }
            let mut hi = 1.0;
            while count_modes_below(profile, hi, grid, bc, dim, l_limit)? < n {
                hi *= 2.0;
                if hi > 1e12 {
                    return Err(Error::Config(format!("grid cannot supply {n} modes")));
                }
            }
            let mut lo = 0.0;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if count_modes_below(profile, mid, grid, bc, dim, l_limit)? >= n {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let mut all = ball(profile, hi, grid, bc, dim, l_limit)?;
            sort_modes(&mut all);
            let mut keep = n.min(all.len());
            while keep < all.len() && Arc::ptr_eq(&all[keep].radial, &all[keep - 1].radial) {
                keep += 1;
            }
            all.truncate(keep);
            all
        }
    };
    sort_modes(&mut modes);
    Ok(modes)
}

fn ball(
    profile: &SoundSpeedProfile,
    mu_max: f64,
    grid: &RadialGrid,
    bc: BoundaryCondition,
    dim: Dimension,
    l_limit: u32,
) -> Result<Vec<Mode>> {
    let mut out = Vec::new();
    for l in 0..=l_limit {
        let family = solve_radial_modes_below(profile, l, mu_max, grid, bc, dim)?;
        if family.is_empty() {
            break;
        }
        out.extend(expand(family, dim)?);
    }
    Ok(out)
}

fn sort_modes(modes: &mut [Mode]) {
    modes.sort_by(|a, b| a.mu.total_cmp(&b.mu).then(a.index.cmp(&b.index)));
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> SoundSpeedProfile {
        SoundSpeedProfile::constant(1.0).unwrap()
    }

    #[test]
    fn constant_mode_value() {
        let grid = RadialGrid::new(64).unwrap();
        let modes = select_modes(
            &unit(),
            ModeSelection::Count(1),
            &grid,
            BoundaryCondition::Neumann,
            Dimension::Two,
        )
        .unwrap();
        let v = evaluate_mode(&modes[0], 0.4, [1.3, 0.0]).unwrap();
        assert!((v.re - 1.0 / PI.sqrt()).abs() < 1e-10);
        assert!(evaluate_mode(&modes[0], 0.0, [0.0, 0.0]).is_err());
    }

    #[test]
    fn l1_mode_changes_sign_across_the_origin() {
        let grid = RadialGrid::new(64).unwrap();
        let modes = select_modes(
            &unit(),
            ModeSelection::Rectangle { l_max: 1, k_max: 1 },
            &grid,
            BoundaryCondition::Neumann,
            Dimension::Two,
        )
        .unwrap();
        let m = modes.iter().find(|m| m.index == ModeIndex::disk(1, 1)).unwrap();
        let a = evaluate_mode(m, 0.5, [0.0, 0.0]).unwrap();
        let b = evaluate_mode(m, 0.5, [PI, 0.0]).unwrap();
        assert!((a + b).norm() < 1e-12 * a.norm());
    }

    #[test]
    fn count_selection_keeps_pairs_together() {
        let grid = RadialGrid::new(64).unwrap();
        let modes =
            select_modes(&unit(), ModeSelection::Count(4), &grid, BoundaryCondition::Neumann, Dimension::Two)
                .unwrap();
        // μ = 0, then the l = ±1 pair, then the l = ±2 pair
        assert_eq!(modes.len(), 5, "{:?}", modes.iter().map(|m| (m.index, m.mu)).collect::<Vec<_>>());
        assert_eq!(modes[0].mu, 0.0);
        assert_eq!(modes[1].mu, modes[2].mu);
        let ball = select_modes(
            &unit(),
            ModeSelection::FrequencyBall(modes[4].mu),
            &grid,
            BoundaryCondition::Neumann,
            Dimension::Two,
        )
        .unwrap();
        assert_eq!(ball.len(), 5, "{:?}", ball.iter().map(|m| (m.index, m.mu)).collect::<Vec<_>>());
    }

    #[test]
    fn ball_multiplets_in_3d() {
        let grid = RadialGrid::new(64).unwrap();
        let modes = select_modes(
            &unit(),
            ModeSelection::Rectangle { l_max: 2, k_max: 2 },
            &grid,
            BoundaryCondition::Dirichlet,
            Dimension::Three,
        )
        .unwrap();
        assert_eq!(modes.len(), 2 * (1 + 3 + 5));
        let angular = AngularGrid::for_degree(Dimension::Three, 2);
        let g = gram_matrix(&modes, &unit(), &angular).unwrap();
        assert!(g.max_deviation_from_identity() < 1e-10);
    }
}
