//! Singular value decomposition of the boundary-trace wave operator on the
//! unit disk and ball with a radial coefficient.

pub mod error;
pub mod linalg;
pub mod modal;
pub mod radial;
pub mod wave;
pub mod inversion;
pub mod io;

pub use error::{Error, Result};
