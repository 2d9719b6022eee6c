//! Radial Sturm–Liouville eigenproblems on the unit interval.

pub mod bessel;
mod grid;
pub mod modes;
mod operator;
mod profile;
mod tridiag;

pub use bessel::bessel_reference_modes;
pub use grid::{BoundaryCondition, Dimension, RadialGrid};
pub use modes::{
    boundary_values, classify_origin, convergence_order, fitted_order, richardson_order, solve_radial_modes,
    solve_radial_modes_below, ConvergenceOrder, EndpointClass, RadialMode, LAMBDA_CLAMP,
};
pub use operator::{angular_eigenvalue, assemble_discrete_operator, DiscreteOperator};
pub use profile::{ProfileKind, SoundSpeedProfile};
pub use tridiag::SymTridiagonal;
