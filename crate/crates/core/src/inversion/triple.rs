use crate::error::{Error, Result};
use crate::modal::{Mode, ModeIndex};
use crate::radial::BoundaryCondition;

/// `{φ, Ψ, σ}` for one mode, with the `H`-norm `ν` of its time factor.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdTriple {
    pub mode: Mode,
    /// `h(1)` (Neumann) or `h'(1)` (Dirichlet).
    pub singular_value: f64,
    /// `<cos μt, cos μt>_H`: 2 for `μ = 0`, otherwise 1.
    pub nu: f64,
}

impl SvdTriple {
    pub fn new(mode: Mode) -> Result<Self> {
        let singular_value = mode.radial.singular_value();
        if !(singular_value > 0.0 && singular_value.is_finite()) {
            return Err(Error::numerical(
                format!("mode {} has non-positive singular value {singular_value}", mode.index),
                0,
                singular_value,
            ));
        }
        let nu = if mode.mu == 0.0 { 2.0 } else { 1.0 };
        Ok(Self {
            mode,
            singular_value,
            nu,
        })
    }

    pub fn index(&self) -> ModeIndex {
        self.mode.index
    }

    pub fn mu(&self) -> f64 {
        self.mode.mu
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.mode.radial.bc
    }
}

pub fn triples_from_modes(modes: &[Mode]) -> Result<Vec<SvdTriple>> {
    modes.iter().cloned().map(SvdTriple::new).collect()
}

/// Singular values in descending order.
pub fn singular_spectrum(triples: &[SvdTriple]) -> Vec<(ModeIndex, f64)> {
    let mut out: Vec<(ModeIndex, f64)> = triples.iter().map(|t| (t.index(), t.singular_value)).collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modal::{select_modes, ModeSelection};
    use crate::radial::{Dimension, RadialGrid, SoundSpeedProfile};

    #[test]
    fn neumann_spectrum_for_constant_speed() {
        let c = SoundSpeedProfile::constant(1.0).unwrap();
        let grid = RadialGrid::new(256).unwrap();
        let modes = select_modes(
            &c,
            ModeSelection::Rectangle { l_max: 2, k_max: 4 },
            &grid,
            BoundaryCondition::Neumann,
            Dimension::Two,
        )
        .unwrap();
        let triples = triples_from_modes(&modes).unwrap();
        let spectrum = singular_spectrum(&triples);
        assert!(spectrum.windows(2).all(|w| w[0].1 >= w[1].1));
        assert!(spectrum.iter().all(|(_, s)| *s > 0.0));
        // h(1)^2 = 2 / (1 - l^2/α^2): exactly sqrt(2) for l = 0, larger otherwise
        for (index, s) in &spectrum {
            if index.l() == 0 {
                assert!((s - 2f64.sqrt()).abs() < 1e-3, "{index}: {s}");
            } else {
                assert!(*s > 2f64.sqrt(), "{index}: {s}");
            }
        }
        let constant = triples.iter().find(|t| t.mu() == 0.0).unwrap();
        assert!((constant.singular_value - 2f64.sqrt()).abs() < 1e-10);
        assert_eq!(constant.nu, 2.0);
        assert!(triples.iter().filter(|t| t.mu() > 0.0).all(|t| t.nu == 1.0));
    }
}
