//! The wave forward operator: series solution, FDTD simulation and the
//! finite-horizon inner product on boundary traces.

mod fdtd;
mod spectral;
mod time;
mod trace;

pub use fdtd::{forward_fdtd, simulate_fdtd, FdtdConfig, FdtdRun};
pub use spectral::forward_spectral;
pub(crate) use spectral::forward_with_gain;
pub use time::{cosine_pair_average, cosine_pair_bound, HorizonAverage, TimeGrid};
pub use trace::{h_inner_product, h_inner_product_with, h_norm, sample_psi, BoundaryTrace};
