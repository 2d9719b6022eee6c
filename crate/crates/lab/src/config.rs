//! Run configuration, validated in two stages: [`RunConfig::validate`]
//! checks everything that does not need a spectrum, [`RunConfig::plan`]
//! solves for the modes and checks the sampling, resolution and stability
//! guards before any data is simulated.

use std::f64::consts::FRAC_PI_4;
use std::path::{Path, PathBuf};

use patsvd_core::inversion::{crosstalk_gap, triples_from_modes, SvdTriple};
use patsvd_core::modal::{select_modes, AngularGrid, Mode, ModeSelection};
use patsvd_core::radial::{BoundaryCondition, Dimension, RadialGrid, SoundSpeedProfile};
use patsvd_core::wave::{FdtdConfig, HorizonAverage, TimeGrid};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result, StageExt};
use crate::phantom::{Bump, PhantomSpec};
use crate::profile_spec::make_profile;

/// Worst cross-talk accepted by `"horizon": "auto"`.
pub const AUTO_CROSSTALK: f64 = 1e-3;
/// Largest trace step chosen automatically.
pub const AUTO_MAX_DT: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoKeyword {
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Horizon {
    Fixed(f64),
    /// Smallest `A` with `2 / (gap A) <= AUTO_CROSSTALK`.
    Auto(AutoKeyword),
}

impl std::str::FromStr for Horizon {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Horizon::Auto(AutoKeyword::Auto));
        }
        s.parse()
            .map(Horizon::Fixed)
            .map_err(|_| LabError::Config(format!("horizon must be a number or 'auto', got '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub horizon: Horizon,
    /// Trace sampling step; derived from the highest frequency when absent.
    #[serde(default)]
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DataSource {
    /// Series evaluation of the phantom's projection.
    Spectral,
    /// Finite-difference simulation of the phantom itself (2D, Neumann).
    Fdtd {
        cfl: f64,
        #[serde(default)]
        stride: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Direct,
    Lsq,
}

impl std::str::FromStr for Method {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Method::Direct),
            "lsq" => Ok(Method::Lsq),
            other => Err(LabError::Config(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    /// Standard deviation relative to the largest trace sample.
    pub relative: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub profile: String,
    pub phantom: PhantomSpec,
    pub dimension: Dimension,
    pub bc: BoundaryCondition,
    pub modes: ModeSelection,
    pub radial_cells: usize,
    /// `n_theta` (2D) or the number of colatitudes (3D, with twice as many
    /// azimuths). The smallest exact grid is used when absent.
    #[serde(default)]
    pub angular_points: Option<usize>,
    pub time: TimeSpec,
    pub data: DataSource,
    pub method: Method,
    #[serde(default)]
    pub regularization: f64,
    #[serde(default)]
    pub average: HorizonAverage,
    #[serde(default)]
    pub noise: Option<NoiseSpec>,
    pub output: PathBuf,
}

/// A configuration with every derived quantity resolved.
#[derive(Debug, Clone)]
pub struct RunPlan {
    pub config: RunConfig,
    pub profile: SoundSpeedProfile,
    pub radial: RadialGrid,
    pub angular: AngularGrid,
    pub modes: Vec<Mode>,
    pub triples: Vec<SvdTriple>,
    pub time: TimeGrid,
    pub fdtd: Option<FdtdConfig>,
}

fn bad(msg: impl Into<String>) -> LabError {
    LabError::Config(msg.into())
}

impl RunConfig {
    /// Desk-scale defaults: 512 radial cells, 300 modes, `A = 200`, FDTD data.
    pub fn desk_scale() -> Self {
        RunConfig {
            profile: "c1".into(),
            phantom: PhantomSpec::GaussianBump {
                bumps: vec![
                    Bump {
                        center: vec![0.2, 0.1],
                        width: 0.2,
                        amplitude: 1.0,
                    },
                    Bump {
                        center: vec![-0.25, -0.2],
                        width: 0.15,
                        amplitude: 0.5,
                    },
                ],
            },
            dimension: Dimension::Two,
            bc: BoundaryCondition::Neumann,
            modes: ModeSelection::Count(300),
            radial_cells: 512,
            angular_points: None,
            time: TimeSpec {
                horizon: Horizon::Fixed(200.0),
                dt: None,
            },
            data: DataSource::Fdtd { cfl: 0.45, stride: None },
            method: Method::Direct,
            regularization: 0.0,
            average: HorizonAverage::Uniform,
            noise: None,
            output: PathBuf::from("out"),
        }
    }

    /// The published experiment transported to the unit ball: radius 3
    /// becomes 1, so `c1` takes scale 3 and times divide by 3 (`T = 800`,
    /// `dt = 0.0016`); 1473 basis functions. The mesh size `h_max = 0.15`
    /// has no counterpart on the radial grid.
    pub fn paper_scale() -> Self {
        RunConfig {
            profile: "c1:3".into(),
            modes: ModeSelection::Count(1473),
            time: TimeSpec {
                horizon: Horizon::Fixed(800.0 / 3.0),
                dt: Some(0.0016 / 3.0),
            },
            output: PathBuf::from("out-paper-scale"),
            ..Self::desk_scale()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "desk-scale" => Ok(Self::desk_scale()),
            "paper-scale" => Ok(Self::paper_scale()),
            other => Err(bad(format!("unknown preset '{other}' (desk-scale, paper-scale)"))),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: RunConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Checks that need no eigenvalues.
    pub fn validate(&self) -> Result<()> {
        make_profile(&self.profile)?;
        RadialGrid::new(self.radial_cells).map_err(|e| bad(e.to_string()))?;
        if self.radial_cells < 8 {
            return Err(bad(format!("need at least 8 radial cells, got {}", self.radial_cells)));
        }
        self.phantom.validate(self.dimension)?;
        match self.modes {
            ModeSelection::Count(0) => return Err(bad("mode count must be positive")),
            ModeSelection::FrequencyBall(mu) if !(mu > 0.0 && mu.is_finite()) => {
                return Err(bad(format!("frequency limit must be positive, got {mu}")))
            }
            ModeSelection::Rectangle { k_max: 0, .. } => return Err(bad("k_max must be positive")),
            ModeSelection::Rectangle { k_max, .. } if k_max as usize > self.radial_cells => {
                return Err(bad(format!("k_max {k_max} exceeds the {} radial cells", self.radial_cells)))
            }
            _ => {}
        }
        if let Some(n) = self.angular_points {
            if n < 2 {
                return Err(bad(format!("need at least 2 angular points, got {n}")));
            }
        }
        if let Horizon::Fixed(a) = self.time.horizon {
            if !(a > 0.0 && a.is_finite()) {
                return Err(bad(format!("horizon must be positive, got {a}")));
            }
        }
        if let Some(dt) = self.time.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(bad(format!("time step must be positive, got {dt}")));
            }
        }
        if let DataSource::Fdtd { cfl, stride } = self.data {
            if self.dimension != Dimension::Two {
                return Err(bad("FDTD data is available in 2D only; use spectral data in 3D"));
            }
            if self.bc != BoundaryCondition::Neumann {
                return Err(bad("FDTD data is available for Neumann conditions only"));
            }
            FdtdConfig {
                radial_cells: self.radial_cells,
                angular_points: self.angular_points.unwrap_or(2),
                cfl,
                stride,
            }
            .validate()
            .map_err(|e| bad(e.to_string()))?;
        }
        if !(self.regularization >= 0.0 && self.regularization.is_finite()) {
            return Err(bad(format!("regularization must be non-negative, got {}", self.regularization)));
        }
        if let Some(noise) = self.noise {
            if !(noise.relative >= 0.0 && noise.relative.is_finite()) {
                return Err(bad(format!("noise level must be non-negative, got {}", noise.relative)));
            }
        }
        Ok(())
    }

    /// Solves for the modes and resolves every grid.
    pub fn plan(&self) -> Result<RunPlan> {
        self.validate()?;
        let profile = make_profile(&self.profile)?;
        let radial = RadialGrid::new(self.radial_cells).stage("modes")?;
        let modes = select_modes(&profile, self.modes, &radial, self.bc, self.dimension).stage("modes")?;
        if modes.is_empty() {
            return Err(bad("the mode selection is empty"));
        }
        let triples = triples_from_modes(&modes).stage("modes")?;
        let l_max = modes.iter().map(|m| m.index.radial_l()).max().unwrap_or(0);
        let needed = AngularGrid::for_degree(self.dimension, l_max);
        let angular = match self.angular_points {
            None => needed,
            Some(n) => {
                let grid = match self.dimension {
                    Dimension::Two => AngularGrid::circle(n),
                    Dimension::Three => AngularGrid::sphere(n, 2 * n),
                }
                .stage("grids")?;
                if grid.max_degree() < l_max {
                    return Err(bad(format!(
                        "{n} angular points resolve degree {} but the modes reach {l_max} (need {})",
                        grid.max_degree(),
                        needed.shape().0
                    )));
                }
                grid
            }
        };
        let mu_max = modes.iter().map(|m| m.mu).fold(0.0, f64::max);
        let horizon = match self.time.horizon {
            Horizon::Fixed(a) => a,
            Horizon::Auto(_) => {
                let gap = crosstalk_gap(&triples);
                if gap.is_finite() {
                    2.0 / (gap * AUTO_CROSSTALK)
                } else {
                    200.0
                }
            }
        };
        let max_dt = self
            .time
            .dt
            .unwrap_or_else(|| AUTO_MAX_DT.min(0.9 * FRAC_PI_4 / mu_max.max(f64::MIN_POSITIVE)));
        let time = TimeGrid::with_horizon(horizon, max_dt).stage("grids")?;
        time.check_sampling(mu_max).map_err(|e| bad(e.to_string()))?;
        let fdtd = match self.data {
            DataSource::Spectral => None,
            DataSource::Fdtd { cfl, stride } => {
                let cfg = FdtdConfig {
                    radial_cells: self.radial_cells,
                    angular_points: angular.len(),
                    cfl,
                    stride,
                };
                cfg.resolve_stride(&profile, &time).map_err(|e| bad(e.to_string()))?;
                Some(cfg)
            }
        };
        Ok(RunPlan {
            config: self.clone(),
            profile,
            radial,
            angular,
            modes,
            triples,
            time,
            fdtd,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_round_trip_and_validate() {
        for name in ["desk-scale", "paper-scale"] {
            let c = RunConfig::preset(name).unwrap();
            c.validate().unwrap();
            let back = RunConfig::from_json(&c.to_json().unwrap()).unwrap();
            assert_eq!(back, c);
        }
        assert!(RunConfig::preset("huge").is_err());
    }

    #[test]
    fn horizon_accepts_auto() {
        let mut c = RunConfig::desk_scale();
        c.time.horizon = "auto".parse().unwrap();
        let json = c.to_json().unwrap();
        assert!(json.contains("\"horizon\": \"auto\""));
        assert_eq!(RunConfig::from_json(&json).unwrap(), c);
        assert!("soon".parse::<Horizon>().is_err());
    }

    #[test]
    fn load_time_guards() {
        let mut c = RunConfig::desk_scale();
        c.dimension = Dimension::Three;
        assert!(c.validate().is_err(), "2D phantom in 3D and 3D FDTD");
        let mut c = RunConfig::desk_scale();
        c.bc = BoundaryCondition::Dirichlet;
        assert!(c.validate().is_err());
        let mut c = RunConfig::desk_scale();
        c.data = DataSource::Fdtd { cfl: 1.2, stride: None };
        assert!(c.validate().is_err());
        let mut c = RunConfig::desk_scale();
        c.profile = "c9".into();
        assert!(c.validate().is_err());
        let mut c = RunConfig::desk_scale();
        c.regularization = -1.0;
        assert!(c.validate().is_err());
        assert!(RunConfig::from_json(r#"{"profile": "c1", "extra": 1}"#).is_err());
    }

    #[test]
    fn plan_time_guards() {
        let mut c = RunConfig::desk_scale();
        c.radial_cells = 64;
        c.modes = ModeSelection::Count(40);
        c.angular_points = Some(4);
        assert!(matches!(c.plan(), Err(LabError::Config(_))), "angular under-resolution");
        c.angular_points = None;
        c.time.dt = Some(0.5);
        assert!(matches!(c.plan(), Err(LabError::Config(_))), "time under-sampling");
        c.time.dt = Some(0.05);
        c.data = DataSource::Fdtd { cfl: 0.45, stride: Some(1) };
        assert!(matches!(c.plan(), Err(LabError::Config(_))), "CFL");
        c.data = DataSource::Fdtd { cfl: 0.45, stride: None };
        let plan = c.plan().unwrap();
        assert!(plan.modes.len() >= 40);
        assert_eq!(plan.time.horizon(), 200.0);
    }

    #[test]
    fn auto_horizon_meets_the_crosstalk_target() {
        let mut c = RunConfig::desk_scale();
        c.radial_cells = 64;
        c.modes = ModeSelection::Count(30);
        c.time.horizon = Horizon::Auto(AutoKeyword::Auto);
        let plan = c.plan().unwrap();
        let bound = patsvd_core::inversion::crosstalk_bound(&plan.triples, plan.time.horizon());
        assert!(bound <= AUTO_CROSSTALK * (1.0 + 1e-9));
    }
}
