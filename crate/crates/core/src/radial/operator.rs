//! Conservative finite-difference discretization of the radial
//! Sturm–Liouville operator
//!
//! ```text
//!     -(r^(n-1) h')' + l (l + n - 2) r^(n-3) h = λ r^(n-1) / c(r) h
//! ```
//!
//! on the cell-centred grid. Fluxes live on cell faces; the flux factor
//! `r^(n-1)` vanishes on the face at the origin, so no row is imposed there.

use super::grid::{BoundaryCondition, Dimension, RadialGrid};
use super::profile::SoundSpeedProfile;
use super::tridiag::SymTridiagonal;
use crate::error::{Error, Result};

/// The discrete pencil `(K, W)`: symmetric tridiagonal stiffness and
/// positive diagonal mass.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOperator {
    pub stiffness: SymTridiagonal,
    pub weight: Vec<f64>,
    /// Per-face flux coefficients `r_f^(n-1) / Δr` for the interior faces
    /// `1..n_cells` (face `j + 1` couples cells `j` and `j + 1`).
    pub(crate) face_flux: Vec<f64>,
    /// Potential term `q(r_j) Δr` per cell.
    pub(crate) potential: Vec<f64>,
    /// Extra diagonal term from the boundary closure on the last cell.
    pub(crate) boundary_term: f64,
}

/// Angular eigenvalue `l (l + n - 2)`.
pub fn angular_eigenvalue(l: u32, dim: Dimension) -> f64 {
    let l = l as f64;
    match dim {
        Dimension::Two => l * l,
        Dimension::Three => l * (l + 1.0),
    }
}

pub fn assemble_discrete_operator(
    profile: &SoundSpeedProfile,
    l: u32,
    grid: &RadialGrid,
    bc: BoundaryCondition,
    dim: Dimension,
) -> Result<DiscreteOperator> {
    let n = grid.n_cells();
    if n < 8 {
        return Err(Error::Config(format!("radial grid needs at least 8 cells, got {n}")));
    }
    let h = grid.spacing();
    let ang = angular_eigenvalue(l, dim);

    let face_flux: Vec<f64> = (1..n).map(|f| dim.area_factor(grid.face(f)) / h).collect();
    let potential: Vec<f64> = grid
        .nodes()
        .map(|r| {
            // q(r) = l(l+n-2) r^(n-3)
            let q = match dim {
                Dimension::Two => ang / r,
                Dimension::Three => ang,
            };
            q * h
        })
        .collect();
    let weight: Vec<f64> = grid
        .nodes()
        .map(|r| dim.area_factor(r) / profile.eval_unchecked(r) * h)
        .collect();
    let boundary_term = match bc {
        BoundaryCondition::Neumann => 0.0,
        // Ghost value h_ghost = -h_last puts the zero exactly on r = 1.
        BoundaryCondition::Dirichlet => 2.0 * dim.area_factor(1.0) / h,
    };

    let mut diag = potential.clone();
    for (f, &flux) in face_flux.iter().enumerate() {
        diag[f] += flux;
        diag[f + 1] += flux;
    }
    diag[n - 1] += boundary_term;
    let off: Vec<f64> = face_flux.iter().map(|v| -v).collect();

    Ok(DiscreteOperator {
        stiffness: SymTridiagonal::new(diag, off),
        weight,
        face_flux,
        potential,
        boundary_term,
    })
}

impl DiscreteOperator {
    /// `W^(-1/2) K W^(-1/2)`, a standard symmetric tridiagonal matrix with
    /// the same eigenvalues as the pencil.
    pub fn scaled(&self) -> SymTridiagonal {
        let s: Vec<f64> = self.weight.iter().map(|w| 1.0 / w.sqrt()).collect();
        let diag = self
            .stiffness
            .diag
            .iter()
            .zip(&s)
            .map(|(d, si)| d * si * si)
            .collect();
        let off = self
            .stiffness
            .off
            .iter()
            .enumerate()
            .map(|(i, e)| e * s[i] * s[i + 1])
            .collect();
        SymTridiagonal::new(diag, off)
    }

    /// Energy `h^T K h`, evaluated in flux form so that it is non-negative
    /// and exactly zero on discrete constants when the potential vanishes.
    pub fn energy(&self, h: &[f64]) -> f64 {
        let flux: f64 = self
            .face_flux
            .iter()
            .enumerate()
            .map(|(f, k)| k * (h[f + 1] - h[f]).powi(2))
            .sum();
        let pot: f64 = self.potential.iter().zip(h).map(|(q, v)| q * v * v).sum();
        let last = *h.last().unwrap();
        flux + pot + self.boundary_term * last * last
    }

    pub fn mass(&self, h: &[f64]) -> f64 {
        self.weight.iter().zip(h).map(|(w, v)| w * v * v).sum()
    }

    pub fn n_cells(&self) -> usize {
        self.weight.len()
    }
}
