//! Recovery of modal coefficients from boundary data: the direct SVD
//! formula, least squares on mode traces, and the Dirichlet variant.

mod direct;
mod lsq;
mod triple;

pub use direct::{
    coefficient_error_bounds, crosstalk_bound, crosstalk_gap, degenerate_clusters, dirichlet_forward_trace,
    dirichlet_recover, reconstruct, recover_all, recover_coefficient, recover_coefficient_with, ReconstructionReport,
    DEGENERACY_GAP,
};
pub use lsq::{algorithm1_lsq, ridge_sweep, LsqSystem, RidgePoint};
pub use triple::{singular_spectrum, triples_from_modes, SvdTriple};
