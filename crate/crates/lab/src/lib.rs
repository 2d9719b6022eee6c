//! Phantoms, run configurations, pipelines, image export and validation
//! suites on top of `patsvd_core`.

pub mod config;
pub mod error;
pub mod image;
pub mod phantom;
pub mod pipeline;
pub mod profile_spec;
pub mod validate;

pub use config::{DataSource, Horizon, Method, NoiseSpec, RunConfig, RunPlan, TimeSpec};
pub use error::{LabError, Result};
pub use phantom::{Bump, PhantomSpec};
pub use pipeline::{execute, run_pipeline, Manifest, Metrics, Outcome};
pub use profile_spec::make_profile;
pub use validate::{run_suite, SuiteReport, SUITES};
