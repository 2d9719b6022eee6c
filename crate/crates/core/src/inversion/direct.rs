use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::triple::SvdTriple;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Cholesky};
use crate::modal::{synthesize, AngularGrid, AngularKey, GridFunction, ModalCoefficients, Mode, ModeIndex};
use crate::radial::{BoundaryCondition, RadialGrid};
use crate::wave::{forward_with_gain, h_norm, BoundaryTrace, HorizonAverage, TimeGrid};

/// Frequencies closer than this are treated as one eigenvalue.
pub const DEGENERACY_GAP: f64 = 1e-8;

fn check_trace(trace: &BoundaryTrace, triples: &[SvdTriple]) -> Result<()> {
    for t in triples {
        if t.index().dimension() != trace.angular.dimension() {
            return Err(Error::Shape(format!("mode {} does not match the trace dimension", t.index())));
        }
    }
    let l_max = triples.iter().map(|t| t.index().radial_l()).max().unwrap_or(0);
    if l_max > trace.angular.max_degree() {
        return Err(Error::Config(format!(
            "trace angular grid resolves degree {} but modes reach {l_max}",
            trace.angular.max_degree()
        )));
    }
    let mu_max = triples.iter().map(|t| t.mu()).fold(0.0, f64::max);
    trace.time.check_sampling(mu_max)
}

/// `<trace, Y cos(μ t)>_H` from a precomputed angular component.
fn time_projection(component: &[Complex64], weights: &[f64], time: &TimeGrid, mu: f64) -> Complex64 {
    component
        .iter()
        .zip(weights)
        .enumerate()
        .map(|(s, (c, w))| c * (w * (mu * time.time(s)).cos()))
        .sum()
}

/// Coefficient of one mode from boundary data:
/// `<trace, Y cos(μ·)>_H / (ν σ)`.
pub fn recover_coefficient(trace: &BoundaryTrace, triple: &SvdTriple) -> Result<Complex64> {
    recover_coefficient_with(trace, triple, HorizonAverage::Uniform)
}

pub fn recover_coefficient_with(
    trace: &BoundaryTrace,
    triple: &SvdTriple,
    average: HorizonAverage,
) -> Result<Complex64> {
    check_trace(trace, std::slice::from_ref(triple))?;
    let component = trace.angular_component(triple.index().angular_key())?;
    let weights = trace.time.average_weights(average);
    let inner = time_projection(&component, &weights, &trace.time, triple.mu());
    Ok(inner / (triple.nu * triple.singular_value))
}

/// Coefficients for every triple. Accidental degeneracies (different radial
/// problems with `|Δμ| < DEGENERACY_GAP`) are solved jointly from their local
/// Gram matrix; they are returned as the second element.
pub fn recover_all(
    trace: &BoundaryTrace,
    triples: &[SvdTriple],
    average: HorizonAverage,
) -> Result<(ModalCoefficients, Vec<Vec<ModeIndex>>)> {
    check_trace(trace, triples)?;
    let weights = trace.time.average_weights(average);
    let mut keys: Vec<AngularKey> = triples.iter().map(|t| t.index().angular_key()).collect();
    keys.sort();
    keys.dedup();
    let components: HashMap<AngularKey, Vec<Complex64>> = keys
        .par_iter()
        .map(|k| Ok((*k, trace.angular_component(*k)?)))
        .collect::<Result<_>>()?;

    let projections: Vec<Complex64> = triples
        .par_iter()
        .map(|t| time_projection(&components[&t.index().angular_key()], &weights, &trace.time, t.mu()))
        .collect();
    let mut coeffs: ModalCoefficients = triples
        .iter()
        .zip(&projections)
        .map(|(t, p)| (t.index(), p / (t.nu * t.singular_value)))
        .collect();

    let clusters = degenerate_clusters(triples);
    let position: HashMap<ModeIndex, usize> = triples.iter().enumerate().map(|(i, t)| (t.index(), i)).collect();
    for cluster in &clusters {
        let members: Vec<usize> = cluster.iter().map(|i| position[i]).collect();
        let n = members.len();
        let mut g = CMatrix::zeros(n, n);
        for (a, &i) in members.iter().enumerate() {
            for (b, &j) in members.iter().enumerate() {
                g[(a, b)] = if a == b {
                    Complex64::new(triples[i].nu, 0.0)
                } else {
                    psi_overlap(&triples[j], &triples[i], &trace.angular, &trace.time, &weights)?
                };
            }
        }
        let rhs: Vec<Complex64> = members.iter().map(|&i| projections[i]).collect();
        let y = Cholesky::factor(&g, 1e-12)?.solve(&rhs);
        for (a, &i) in members.iter().enumerate() {
            coeffs.insert(triples[i].index(), y[a] / triples[i].singular_value);
        }
    }
    Ok((coeffs, clusters))
}

/// `<Ψ_a, Ψ_b>_H` on the trace grids.
fn psi_overlap(
    a: &SvdTriple,
    b: &SvdTriple,
    angular: &AngularGrid,
    time: &TimeGrid,
    weights: &[f64],
) -> Result<Complex64> {
    let ya = angular.factor_values(a.index().angular_key())?;
    let yb = angular.factor_values(b.index().angular_key())?;
    let w = angular.weights();
    let ang: Complex64 = ya.iter().zip(&yb).zip(&w).map(|((x, y), w)| x * y.conj() * w).sum();
    let tim: f64 = weights
        .iter()
        .enumerate()
        .map(|(s, w)| w * (a.mu() * time.time(s)).cos() * (b.mu() * time.time(s)).cos())
        .sum();
    Ok(ang * tim)
}

/// Groups of modes from different radial problems whose frequencies agree
/// to within [`DEGENERACY_GAP`].
pub fn degenerate_clusters(triples: &[SvdTriple]) -> Vec<Vec<ModeIndex>> {
    let mut order: Vec<usize> = (0..triples.len()).collect();
    order.sort_by(|&a, &b| triples[a].mu().total_cmp(&triples[b].mu()));
    let mut clusters = Vec::new();
    let mut start = 0;
    for i in 1..=order.len() {
        let split = i == order.len() || triples[order[i]].mu() - triples[order[i - 1]].mu() >= DEGENERACY_GAP;
        if split {
            let group = &order[start..i];
            let radial: std::collections::BTreeSet<(u32, u32)> = group
                .iter()
                .map(|&g| (triples[g].index().radial_l(), triples[g].index().k()))
                .collect();
            if radial.len() > 1 {
                let mut members: Vec<ModeIndex> = group.iter().map(|&g| triples[g].index()).collect();
                members.sort();
                clusters.push(members);
            }
            start = i;
        }
    }
    clusters
}

/// Smallest distance between distinct frequencies that share an angular
/// factor (infinite if no such pair exists).
pub fn crosstalk_gap(triples: &[SvdTriple]) -> f64 {
    let mut by_key: BTreeMap<AngularKey, Vec<f64>> = BTreeMap::new();
    for t in triples {
        by_key.entry(t.index().angular_key()).or_default().push(t.mu());
    }
    let mut gap = f64::INFINITY;
    for mus in by_key.values_mut() {
        mus.sort_by(f64::total_cmp);
        for w in mus.windows(2) {
            let d = w[1] - w[0];
            if d > 0.0 {
                gap = gap.min(d);
            }
        }
    }
    gap
}

/// Scalar cross-talk bound `2 / (gap A)` of the uniform average.
pub fn crosstalk_bound(triples: &[SvdTriple], horizon: f64) -> f64 {
    let gap = crosstalk_gap(triples);
    if gap.is_finite() {
        2.0 / (gap * horizon)
    } else {
        0.0
    }
}

/// Rigorous per-coefficient error bound of the uniform-average recovery,
/// given the true coefficients `truth`.
pub fn coefficient_error_bounds(triples: &[SvdTriple], truth: &ModalCoefficients, horizon: f64) -> Vec<f64> {
    use crate::wave::cosine_pair_bound;
    triples
        .iter()
        .map(|ti| {
            let key = ti.index().angular_key();
            let mut acc = 0.0;
            for tj in triples {
                if tj.index().angular_key() != key {
                    continue;
                }
                let c = truth.get(&tj.index()).unwrap_or_default().norm();
                acc += c * tj.singular_value * cosine_pair_bound(ti.mu(), tj.mu(), horizon);
            }
            acc / (ti.nu * ti.singular_value)
        })
        .collect()
}

/// Summary of a reconstruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub coefficients: ModalCoefficients,
    /// `‖forward(recovered) - trace‖_H / ‖trace‖_H`.
    pub residual: f64,
    pub mode_count: usize,
    pub horizon: f64,
    pub crosstalk_bound: f64,
    pub average: HorizonAverage,
    pub degenerate_clusters: Vec<Vec<ModeIndex>>,
}

/// Recovers every coefficient and synthesizes the field on the given grid.
pub fn reconstruct(
    trace: &BoundaryTrace,
    triples: &[SvdTriple],
    radial: &RadialGrid,
    angular: &AngularGrid,
    average: HorizonAverage,
) -> Result<(GridFunction, ReconstructionReport)> {
    if triples.is_empty() {
        return Err(Error::Config("reconstruction needs at least one mode".into()));
    }
    let mut seen = std::collections::HashSet::new();
    for t in triples {
        if !seen.insert(t.index()) {
            return Err(Error::Config(format!("mode {} listed twice", t.index())));
        }
    }
    let (coefficients, clusters) = recover_all(trace, triples, average)?;
    let modes: Vec<Mode> = triples.iter().map(|t| t.mode.clone()).collect();
    let field = synthesize(&coefficients, &modes, radial, angular)?;
    let model = forward_with_gain(&coefficients, &modes, trace.time, &trace.angular, |m| {
        m.radial.singular_value()
    })?;
    let data_norm = h_norm(trace);
    let diff = model.combine(Complex64::new(1.0, 0.0), trace, Complex64::new(-1.0, 0.0))?;
    let residual = if data_norm > 0.0 {
        h_norm(&diff) / data_norm
    } else {
        h_norm(&diff)
    };
    let report = ReconstructionReport {
        coefficients,
        residual,
        mode_count: triples.len(),
        horizon: trace.time.horizon(),
        crosstalk_bound: crosstalk_bound(triples, trace.time.horizon()),
        average,
        degenerate_clusters: clusters,
    };
    Ok((field, report))
}

fn require_dirichlet(triples: &[SvdTriple]) -> Result<()> {
    match triples.iter().find(|t| t.bc() != BoundaryCondition::Dirichlet) {
        Some(t) => Err(Error::Type(format!("mode {} is not a Dirichlet mode", t.index()))),
        None => Ok(()),
    }
}

/// Normal-derivative data of the Dirichlet problem:
/// `Σ X_i h_i'(1) Y_i(θ) cos(μ_i t)`.
pub fn dirichlet_forward_trace(
    coeffs: &ModalCoefficients,
    triples: &[SvdTriple],
    time: TimeGrid,
    angular: &AngularGrid,
) -> Result<BoundaryTrace> {
    require_dirichlet(triples)?;
    let modes: Vec<Mode> = triples.iter().map(|t| t.mode.clone()).collect();
    forward_with_gain(coeffs, &modes, time, angular, |m| m.radial.boundary_derivative)
}

pub fn dirichlet_recover(trace: &BoundaryTrace, triple: &SvdTriple) -> Result<Complex64> {
    require_dirichlet(std::slice::from_ref(triple))?;
    recover_coefficient(trace, triple)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modal::{select_modes, weighted_inner_product, ModeSelection};
    use crate::radial::{Dimension, SoundSpeedProfile};
    use crate::wave::forward_spectral;

    fn family(bc: BoundaryCondition) -> (SoundSpeedProfile, RadialGrid, Vec<SvdTriple>) {
        let c = SoundSpeedProfile::rational_c1(1.0).unwrap();
        let grid = RadialGrid::new(128).unwrap();
        let modes = select_modes(&c, ModeSelection::Rectangle { l_max: 3, k_max: 3 }, &grid, bc, Dimension::Two)
            .unwrap();
        (c, grid, triples_from_modes_for_test(&modes))
    }

    fn triples_from_modes_for_test(modes: &[Mode]) -> Vec<SvdTriple> {
        super::super::triple::triples_from_modes(modes).unwrap()
    }

    fn grids(horizon: f64) -> (AngularGrid, TimeGrid) {
        (AngularGrid::circle(16).unwrap(), TimeGrid::with_horizon(horizon, 0.02).unwrap())
    }

    fn modes_of(triples: &[SvdTriple]) -> Vec<Mode> {
        triples.iter().map(|t| t.mode.clone()).collect()
    }

    #[test]
    fn zero_trace_recovers_zero() {
        let (_, _, triples) = family(BoundaryCondition::Neumann);
        let (ang, time) = grids(20.0);
        let zero = BoundaryTrace::zeros(ang, time);
        for t in &triples {
            assert_eq!(recover_coefficient(&zero, t).unwrap(), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn constant_mode_needs_the_nu_correction() {
        let (_, _, triples) = family(BoundaryCondition::Neumann);
        let (ang, time) = grids(20.0);
        let constant = triples.iter().find(|t| t.mu() == 0.0).unwrap();
        let coeffs: ModalCoefficients = [(constant.index(), Complex64::new(1.0, 0.0))].into_iter().collect();
        let trace = forward_spectral(&coeffs, &modes_of(&triples), time, &ang).unwrap();
        let x = recover_coefficient(&trace, constant).unwrap();
        assert!((x - 1.0).norm() < 1e-12, "{x}");
    }

    #[test]
    fn single_mode_round_trip_within_bound() {
        let (_, _, triples) = family(BoundaryCondition::Neumann);
        let (ang, time) = grids(100.0);
        let target = triples.iter().find(|t| t.index() == ModeIndex::disk(2, 2)).unwrap();
        let coeffs: ModalCoefficients = [(target.index(), Complex64::new(1.0, 0.0))].into_iter().collect();
        let trace = forward_spectral(&coeffs, &modes_of(&triples), time, &ang).unwrap();
        let bound = crosstalk_bound(&triples, time.horizon());
        let x = recover_coefficient(&trace, target).unwrap();
        assert!((x - 1.0).norm() <= bound, "{x} vs bound {bound}");
        for t in triples.iter().filter(|t| t.index() != target.index()) {
            assert!(recover_coefficient(&trace, t).unwrap().norm() <= bound);
        }
    }

    #[test]
    fn per_coefficient_bounds_hold() {
        let (_, _, triples) = family(BoundaryCondition::Neumann);
        let (ang, time) = grids(60.0);
        let truth: ModalCoefficients = triples
            .iter()
            .enumerate()
            .map(|(i, t)| (t.index(), Complex64::new((i as f64 * 0.7).sin(), (i as f64 * 0.3).cos())))
            .collect();
        let trace = forward_spectral(&truth, &modes_of(&triples), time, &ang).unwrap();
        let bounds = coefficient_error_bounds(&triples, &truth, time.horizon());
        let (got, clusters) = recover_all(&trace, &triples, HorizonAverage::Uniform).unwrap();
        assert!(clusters.is_empty());
        for (t, b) in triples.iter().zip(&bounds) {
            let err = (got.get(&t.index()).unwrap() - truth.get(&t.index()).unwrap()).norm();
            assert!(err <= *b, "{}: {err} > {b}", t.index());
        }
    }

    #[test]
    fn reconstruct_in_span_field() {
        let (c, grid, triples) = family(BoundaryCondition::Neumann);
        let ang = AngularGrid::circle(16).unwrap();
        let time = TimeGrid::with_horizon(400.0, 0.02).unwrap();
        let truth: ModalCoefficients = triples
            .iter()
            .map(|t| (t.index(), Complex64::new(1.0 / (1.0 + t.mu()), 0.0)))
            .collect();
        let modes = modes_of(&triples);
        let trace = forward_spectral(&truth, &modes, time, &ang).unwrap();
        let (field, report) = reconstruct(&trace, &triples, &grid, &ang, HorizonAverage::Bump).unwrap();
        let exact = synthesize(&truth, &modes, &grid, &ang).unwrap();
        let diff = field.combine(Complex64::new(1.0, 0.0), &exact, Complex64::new(-1.0, 0.0)).unwrap();
        let err = weighted_inner_product(&diff, &diff, &c).unwrap().re.sqrt()
            / weighted_inner_product(&exact, &exact, &c).unwrap().re.sqrt();
        assert!(err < 1e-6, "field error {err}");
        assert!(report.residual >= 0.0 && report.residual < 1e-6);
        assert_eq!(report.mode_count, triples.len());
        assert_eq!(report.horizon, time.horizon());
    }

    #[test]
    fn disjoint_modes_leave_the_residual_near_one() {
        let (_, grid, triples) = family(BoundaryCondition::Neumann);
        let (ang, time) = grids(200.0);
        let (inside, outside): (Vec<_>, Vec<_>) = triples.iter().cloned().partition(|t| t.index().l() == 1);
        let coeffs: ModalCoefficients = [(inside[1].index(), Complex64::new(1.0, 0.0))].into_iter().collect();
        let trace = forward_spectral(&coeffs, &modes_of(&inside), time, &ang).unwrap();
        let (_, report) = reconstruct(&trace, &outside, &grid, &ang, HorizonAverage::Uniform).unwrap();
        assert!(report.coefficients.iter().all(|(_, v)| v.norm() < 1e-12));
        assert!((report.residual - 1.0).abs() < 1e-9);
    }

    #[test]
    fn reconstruct_rejects_empty_and_duplicates() {
        let (_, grid, triples) = family(BoundaryCondition::Neumann);
        let (ang, time) = grids(10.0);
        let trace = BoundaryTrace::zeros(ang.clone(), time);
        assert!(matches!(
            reconstruct(&trace, &[], &grid, &ang, HorizonAverage::Uniform),
            Err(Error::Config(_))
        ));
        let twice = vec![triples[0].clone(), triples[0].clone()];
        assert!(matches!(
            reconstruct(&trace, &twice, &grid, &ang, HorizonAverage::Uniform),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn dirichlet_pipeline() {
        let (_, _, triples) = family(BoundaryCondition::Dirichlet);
        let (ang, time) = grids(200.0);
        let first = triples.iter().find(|t| t.index() == ModeIndex::disk(0, 1)).unwrap();
        let coeffs: ModalCoefficients = [(first.index(), Complex64::new(1.0, 0.0))].into_iter().collect();
        let trace = dirichlet_forward_trace(&coeffs, &triples, time, &ang).unwrap();
        let s = 40;
        let y0 = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        let expect = first.mode.radial.boundary_derivative * y0 * (first.mu() * time.time(s)).cos();
        assert!((trace.at(s, 3).re - expect).abs() < 1e-12);
        let bound = crosstalk_bound(&triples, time.horizon());
        assert!((dirichlet_recover(&trace, first).unwrap() - 1.0).norm() <= bound);
        let other = triples.iter().find(|t| t.index() == ModeIndex::disk(0, 2)).unwrap();
        assert!(dirichlet_recover(&trace, other).unwrap().norm() <= bound);

        let (_, _, neumann) = family(BoundaryCondition::Neumann);
        assert!(matches!(dirichlet_recover(&trace, &neumann[0]), Err(Error::Type(_))));
        assert!(matches!(
            dirichlet_forward_trace(&coeffs, &neumann, time, &ang),
            Err(Error::Type(_))
        ));
    }

    #[test]
    fn degenerate_pairs_are_solved_jointly() {
        // two radial problems forced onto one frequency
        let (_, _, triples) = family(BoundaryCondition::Neumann);
        let a = triples.iter().find(|t| t.index() == ModeIndex::disk(1, 2)).unwrap().clone();
        let mut b = triples.iter().find(|t| t.index() == ModeIndex::disk(2, 2)).unwrap().clone();
        let mut radial = (*b.mode.radial).clone();
        radial.mu = a.mu() + 1e-10;
        b.mode = Mode::new(b.index(), std::sync::Arc::new(radial)).unwrap();
        let pair = vec![a.clone(), b.clone()];
        assert_eq!(degenerate_clusters(&pair), vec![vec![a.index(), b.index()]]);

        let (ang, time) = grids(30.0);
        let truth: ModalCoefficients =
            [(a.index(), Complex64::new(0.3, 0.0)), (b.index(), Complex64::new(-0.8, 0.1))].into_iter().collect();
        let trace = forward_spectral(&truth, &modes_of(&pair), time, &ang).unwrap();
        let (got, clusters) = recover_all(&trace, &pair, HorizonAverage::Uniform).unwrap();
        assert_eq!(clusters.len(), 1);
        let bound = crosstalk_bound(&pair, time.horizon()).max(1.0 / (2.0 * a.mu() * time.horizon()));
        for (index, want) in truth.iter() {
            assert!((got.get(index).unwrap() - want).norm() <= bound);
        }
    }

    #[test]
    fn mirrored_pairs_are_not_degeneracies() {
        let (_, _, triples) = family(BoundaryCondition::Neumann);
        assert!(degenerate_clusters(&triples).is_empty());
        assert!(crosstalk_gap(&triples) > 0.5);
    }
}
