//! Full eigenfunctions on the disk and ball, quadrature, projection and
//! synthesis.

mod angular;
mod basis;
mod grid_function;
mod index;

pub use angular::{gauss_legendre, spherical_harmonic, AngularGrid, SphereGrid};
pub use basis::{evaluate_mode, gram_matrix, mode_samples, project, select_modes, synthesize, ModeSelection};
pub use grid_function::{weighted_inner_product, weighted_norm, GridFunction, QuadratureRule};
pub use index::{AngularKey, ModalCoefficients, Mode, ModeIndex};
