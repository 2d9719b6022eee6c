//! Radial sound-speed coefficients `c(r)` on the unit ball.
//!
//! `c` multiplies the Laplacian in the wave equation `p_tt = c Δp`, so the
//! physical propagation speed is `sqrt(c)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The shape of a radial coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProfileKind {
    Constant {
        value: f64,
    },
    /// `1 / (1 + (scale * r)^2)`. `scale = 3` transports a radius-3 domain
    /// onto the unit ball.
    RationalC1 {
        scale: f64,
    },
    /// `inside` on the closed annulus `[inner, outer]`, `outside` elsewhere.
    PiecewiseRadial {
        inner: f64,
        outer: f64,
        inside: f64,
        outside: f64,
    },
    /// Piecewise-linear interpolation of `(radius, value)` samples.
    Tabulated {
        radii: Vec<f64>,
        values: Vec<f64>,
    },
}

/// A validated radial coefficient with known positive bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoundSpeedProfile {
    kind: ProfileKind,
    c_min: f64,
    c_max: f64,
}

impl SoundSpeedProfile {
    pub fn constant(value: f64) -> Result<Self> {
        Self::new(ProfileKind::Constant { value })
    }

    pub fn rational_c1(scale: f64) -> Result<Self> {
        Self::new(ProfileKind::RationalC1 { scale })
    }

    pub fn annulus(inner: f64, outer: f64, inside: f64, outside: f64) -> Result<Self> {
        Self::new(ProfileKind::PiecewiseRadial {
            inner,
            outer,
            inside,
            outside,
        })
    }

    pub fn tabulated(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::new(ProfileKind::Tabulated { radii, values })
    }

    pub fn new(kind: ProfileKind) -> Result<Self> {
        let positive = |v: f64, what: &str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{what} must be positive and finite, got {v}")))
            }
        };
        let (c_min, c_max) = match &kind {
            ProfileKind::Constant { value } => {
                positive(*value, "constant speed")?;
                (*value, *value)
            }
            ProfileKind::RationalC1 { scale } => {
                if !scale.is_finite() || *scale < 0.0 {
                    return Err(Error::Config(format!("c1 scale must be non-negative, got {scale}")));
                }
                (1.0 / (1.0 + scale * scale), 1.0)
            }
            ProfileKind::PiecewiseRadial {
                inner,
                outer,
                inside,
                outside,
            } => {
                positive(*inside, "annulus value")?;
                positive(*outside, "background value")?;
                if !(0.0..=1.0).contains(inner) || !(0.0..=1.0).contains(outer) || inner > outer {
                    return Err(Error::Config(format!(
                        "annulus radii must satisfy 0 <= inner <= outer <= 1, got [{inner}, {outer}]"
                    )));
                }
                (inside.min(*outside), inside.max(*outside))
            }
            ProfileKind::Tabulated { radii, values } => {
                if radii.len() != values.len() || radii.len() < 2 {
                    return Err(Error::Config(
                        "tabulated profile needs at least two (radius, value) pairs".into(),
                    ));
                }
                if radii.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::Config("tabulated radii must be strictly increasing".into()));
                }
                if radii[0] > 0.0 || *radii.last().unwrap() < 1.0 {
                    return Err(Error::Config(format!(
                        "tabulated radii must cover [0, 1], got [{}, {}]",
                        radii[0],
                        radii.last().unwrap()
                    )));
                }
                for v in values {
                    positive(*v, "tabulated value")?;
                }
                let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = values.iter().copied().fold(0.0, f64::max);
                (lo, hi)
            }
        };
        Ok(Self { kind, c_min, c_max })
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn c_min(&self) -> f64 {
        self.c_min
    }

    pub fn c_max(&self) -> f64 {
        self.c_max
    }

    /// Evaluates `c(r)` for `r` in `[0, 1]`.
    pub fn evaluate(&self, r: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::Domain(format!("radius {r} outside [0, 1]")));
        }
        Ok(self.eval_unchecked(r))
    }

    pub(crate) fn eval_unchecked(&self, r: f64) -> f64 {
        match &self.kind {
            ProfileKind::Constant { value } => *value,
            ProfileKind::RationalC1 { scale } => {
                let s = scale * r;
                1.0 / (1.0 + s * s)
            }
            ProfileKind::PiecewiseRadial {
                inner,
                outer,
                inside,
                outside,
            } => {
                if r >= *inner && r <= *outer {
                    *inside
                } else {
                    *outside
                }
            }
            ProfileKind::Tabulated { radii, values } => {
                let i = radii.partition_point(|&x| x <= r).clamp(1, radii.len() - 1);
                let (r0, r1) = (radii[i - 1], radii[i]);
                let t = (r - r0) / (r1 - r0);
                values[i - 1] + t * (values[i] - values[i - 1])
            }
        }
    }

    /// Returns a copy with every value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let kind = match &self.kind {
            ProfileKind::Constant { value } => ProfileKind::Constant {
                value: value * factor,
            },
            ProfileKind::PiecewiseRadial {
                inner,
                outer,
                inside,
                outside,
            } => ProfileKind::PiecewiseRadial {
                inner: *inner,
                outer: *outer,
                inside: inside * factor,
                outside: outside * factor,
            },
            ProfileKind::Tabulated { radii, values } => ProfileKind::Tabulated {
                radii: radii.clone(),
                values: values.iter().map(|v| v * factor).collect(),
            },
            ProfileKind::RationalC1 { .. } => {
                return Err(Error::Config("the c1 profile has a fixed amplitude".into()))
            }
        };
        Self::new(kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_profile() {
        let c = SoundSpeedProfile::constant(1.0).unwrap();
        assert_eq!(c.evaluate(0.7).unwrap(), 1.0);
        assert_eq!((c.c_min(), c.c_max()), (1.0, 1.0));
    }

    #[test]
    fn rational_c1_endpoints() {
        let c = SoundSpeedProfile::rational_c1(1.0).unwrap();
        assert_eq!(c.evaluate(0.0).unwrap(), 1.0);
        assert_eq!(c.evaluate(1.0).unwrap(), 0.5);
        let c3 = SoundSpeedProfile::rational_c1(3.0).unwrap();
        assert!((c3.evaluate(1.0).unwrap() - 0.1).abs() < 1e-15);
        assert!((c3.c_min() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn annulus_values() {
        let c = SoundSpeedProfile::annulus(0.3, 0.6, 5.0, 1.0).unwrap();
        assert_eq!(c.evaluate(0.45).unwrap(), 5.0);
        assert_eq!(c.evaluate(0.3).unwrap(), 5.0);
        assert_eq!(c.evaluate(0.1).unwrap(), 1.0);
        assert_eq!(c.evaluate(0.9).unwrap(), 1.0);
        assert_eq!((c.c_min(), c.c_max()), (1.0, 5.0));
    }

    #[test]
    fn out_of_domain_radius() {
        let c = SoundSpeedProfile::constant(1.0).unwrap();
        assert!(matches!(c.evaluate(1.01), Err(Error::Domain(_))));
        assert!(matches!(c.evaluate(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn tabulated_validation() {
        let ok = SoundSpeedProfile::tabulated(vec![0.0, 0.5, 1.0], vec![1.0, 2.0, 1.5]).unwrap();
        assert!((ok.evaluate(0.25).unwrap() - 1.5).abs() < 1e-15);
        assert_eq!(ok.evaluate(1.0).unwrap(), 1.5);
        assert_eq!((ok.c_min(), ok.c_max()), (1.0, 2.0));
        // gap at the outer end
        assert!(matches!(
            SoundSpeedProfile::tabulated(vec![0.0, 0.5, 0.9], vec![1.0, 1.0, 1.0]),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            SoundSpeedProfile::tabulated(vec![0.0, 0.5, 0.5, 1.0], vec![1.0; 4]),
            Err(Error::Config(_))
        ));
        assert!(SoundSpeedProfile::tabulated(vec![0.0, 1.0], vec![1.0, -1.0]).is_err());
    }

    #[test]
    fn values_stay_within_bounds() {
        let profiles = [
            SoundSpeedProfile::rational_c1(3.0).unwrap(),
            SoundSpeedProfile::annulus(0.2, 0.7, 0.5, 2.0).unwrap(),
            SoundSpeedProfile::tabulated(vec![0.0, 0.3, 1.0], vec![2.0, 0.5, 1.0]).unwrap(),
        ];
        for p in &profiles {
            for i in 0..=1000 {
                let v = p.evaluate(i as f64 / 1000.0).unwrap();
                assert!(v >= p.c_min() && v <= p.c_max(), "{v} outside bounds for {p:?}");
            }
        }
    }
}
