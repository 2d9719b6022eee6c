use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cell-centred discretization of `(0, 1]`: nodes `r_j = (j + 1/2) / n`.
///
/// No node sits on the singular endpoint `r = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RadialGrid {
    n_cells: usize,
}

impl RadialGrid {
    pub fn new(n_cells: usize) -> Result<Self> {
        if n_cells == 0 {
            return Err(Error::Config("radial grid needs at least one cell".into()));
        }
        Ok(Self { n_cells })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.n_cells as f64
    }

    /// Centre of cell `j` (0-based).
    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        (j as f64 + 0.5) / self.n_cells as f64
    }

    /// Inner face of cell `j`; the outer face is `face(j + 1)`.
    #[inline]
    pub fn face(&self, j: usize) -> f64 {
        j as f64 / self.n_cells as f64
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n_cells).map(|j| self.node(j))
    }
}

/// Boundary condition at `r = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    /// `h'(1) = 0`
    Neumann,
    /// `h(1) = 0`
    Dirichlet,
}

impl BoundaryCondition {
    pub(crate) fn code(self) -> u8 {
        match self {
            BoundaryCondition::Neumann => 0,
            BoundaryCondition::Dirichlet => 1,
        }
    }

    pub(crate) fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(BoundaryCondition::Neumann),
            1 => Ok(BoundaryCondition::Dirichlet),
            other => Err(Error::Format(format!("unknown boundary condition code {other}"))),
        }
    }
}

impl std::str::FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "neumann" => Ok(BoundaryCondition::Neumann),
            "dirichlet" => Ok(BoundaryCondition::Dirichlet),
            other => Err(Error::Config(format!("unknown boundary condition '{other}'"))),
        }
    }
}

/// Spatial dimension of the ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub enum Dimension {
    Two,
    Three,
}

impl Dimension {
    pub fn value(self) -> u32 {
        match self {
            Dimension::Two => 2,
            Dimension::Three => 3,
        }
    }

    /// `r^(n-1)`
    #[inline]
    pub(crate) fn area_factor(self, r: f64) -> f64 {
        match self {
            Dimension::Two => r,
            Dimension::Three => r * r,
        }
    }
}

impl TryFrom<u32> for Dimension {
    type Error = Error;

    fn try_from(n: u32) -> Result<Self> {
        match n {
            2 => Ok(Dimension::Two),
            3 => Ok(Dimension::Three),
            other => Err(Error::Domain(format!("dimension must be 2 or 3, got {other}"))),
        }
    }
}

impl From<Dimension> for u32 {
    fn from(d: Dimension) -> u32 {
        d.value()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_are_interior_and_uniform() {
        let g = RadialGrid::new(10).unwrap();
        let nodes: Vec<f64> = g.nodes().collect();
        assert!(nodes[0] > 0.0 && *nodes.last().unwrap() < 1.0);
        for w in nodes.windows(2) {
            assert!((w[1] - w[0] - g.spacing()).abs() < 1e-15);
        }
        assert_eq!(g.face(10), 1.0);
        assert!(RadialGrid::new(0).is_err());
    }

    #[test]
    fn dimension_parsing() {
        assert_eq!(Dimension::try_from(3).unwrap(), Dimension::Three);
        assert!(matches!(Dimension::try_from(4), Err(Error::Domain(_))));
        assert_eq!("Dirichlet".parse::<BoundaryCondition>().unwrap(), BoundaryCondition::Dirichlet);
    }
}
