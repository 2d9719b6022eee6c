use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sample times `t_s = s dt`, `s = 0..=n_steps`, covering `[0, A]` with
/// `A = n_steps dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub dt: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, n_steps: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Config(format!("time step must be positive, got {dt}")));
        }
        if n_steps == 0 {
            return Err(Error::Config("time grid needs at least one step".into()));
        }
        Ok(Self { dt, n_steps })
    }

    /// The grid with horizon exactly `horizon` and step at most `max_dt`.
    pub fn with_horizon(horizon: f64, max_dt: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Config(format!("horizon must be positive, got {horizon}")));
        }
        let n_steps = (horizon / max_dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        Self::new(horizon / n_steps as f64, n_steps)
    }

    pub fn horizon(&self) -> f64 {
        self.dt * self.n_steps as f64
    }

    pub fn n_samples(&self) -> usize {
        self.n_steps + 1
    }

    #[inline]
    pub fn time(&self, s: usize) -> f64 {
        s as f64 * self.dt
    }

    pub fn times(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n_samples()).map(|s| self.time(s))
    }

    /// Sampling guard `dt μ_max <= π/4`.
    pub fn check_sampling(&self, mu_max: f64) -> Result<()> {
        if self.dt * mu_max > FRAC_PI_4 * (1.0 + 1e-12) {
            return Err(Error::Config(format!(
                "time step {} undersamples frequency {mu_max:.4} (dt·μ = {:.4} > π/4)",
                self.dt,
                self.dt * mu_max
            )));
        }
        Ok(())
    }

    /// The first `n_steps` steps of this grid.
    pub fn truncated(&self, n_steps: usize) -> Result<Self> {
        if n_steps > self.n_steps {
            return Err(Error::Config(format!(
                "cannot extend a {}-step grid to {n_steps} steps",
                self.n_steps
            )));
        }
        Self::new(self.dt, n_steps)
    }

    /// Quadrature weights `ω_s` with `Σ ω_s = 2`, so that `Σ ω_s g(t_s)`
    /// approximates `(2/A) ∫_0^A g dt`.
    pub fn average_weights(&self, average: HorizonAverage) -> Vec<f64> {
        let n = self.n_steps;
        match average {
            HorizonAverage::Uniform => {
                let w = 2.0 / n as f64;
                (0..=n).map(|s| if s == 0 || s == n { 0.5 * w } else { w }).collect()
            }
            HorizonAverage::Bump => {
                let raw: Vec<f64> = (0..=n)
                    .map(|s| {
                        let u = s as f64 / n as f64;
                        if u <= 0.0 || u >= 1.0 {
                            0.0
                        } else {
                            (-1.0 / (u * (1.0 - u))).exp()
                        }
                    })
                    .collect();
                let total: f64 = raw.iter().sum();
                raw.into_iter().map(|w| 2.0 * w / total).collect()
            }
        }
    }
}

/// Time average used for the finite-horizon inner product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HorizonAverage {
    /// Trapezoid rule for `(2/A) ∫_0^A`; cross terms decay like `1/A`.
    #[default]
    Uniform,
    /// Smooth window `exp(-1/(u(1-u)))`, `u = t/A`, normalized to the same
    /// total mass; cross terms decay faster than any power of `1/A`.
    Bump,
}

impl std::str::FromStr for HorizonAverage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(HorizonAverage::Uniform),
            "bump" => Ok(HorizonAverage::Bump),
            other => Err(Error::Config(format!("unknown horizon average '{other}'"))),
        }
    }
}

/// `(2/A) ∫_0^A cos(a t) cos(b t) dt` in closed form.
pub fn cosine_pair_average(a: f64, b: f64, horizon: f64) -> f64 {
    let s = |w: f64| {
        if w == 0.0 {
            horizon
        } else {
            (w * horizon).sin() / w
        }
    };
    (s(a - b) + s(a + b)) / horizon
}

/// Bound on `|cosine_pair_average(a, b, A) - δ_ab|` for `a, b > 0`:
/// `1/(2aA)` on the diagonal, `1/(|a-b| A) + 1/((a+b) A)` off it. For `a = b = 0`
/// the average is exactly 2 and the bound is 0.
pub fn cosine_pair_bound(a: f64, b: f64, horizon: f64) -> f64 {
    if a == b {
        if a == 0.0 {
            0.0
        } else {
            1.0 / (2.0 * a * horizon)
        }
    } else {
        1.0 / ((a - b).abs() * horizon) + 1.0 / ((a + b) * horizon)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_weights_integrate_constants_exactly() {
        let t = TimeGrid::new(0.01, 1000).unwrap();
        for avg in [HorizonAverage::Uniform, HorizonAverage::Bump] {
            let w = t.average_weights(avg);
            assert_eq!(w.len(), 1001);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_limits() {
        assert_eq!(cosine_pair_average(0.0, 0.0, 17.0), 2.0);
        for horizon in [10.0, 100.0, 1000.0] {
            let v = cosine_pair_average(3.0, 3.0, horizon);
            assert!((v - 1.0).abs() <= 1.0 / (2.0 * horizon * 3.0));
        }
        let v = cosine_pair_average(3.83171, 7.01559, 200.0);
        assert!(v.abs() <= 2.0 / ((7.01559 - 3.83171) * 200.0));
    }

    #[test]
    fn trapezoid_average_respects_continuous_bounds() {
        // the discrete trapezoid sum of cos(sθ) is sin(Nθ) cot(θ/2) / 2
        let t = TimeGrid::new(0.02, 10_000).unwrap();
        let w = t.average_weights(HorizonAverage::Uniform);
        for (a, b) in [(3.83171, 3.83171), (3.83171, 7.01559), (1.0, 1.3), (0.0, 2.0)] {
            let disc: f64 = t.times().zip(&w).map(|(s, w)| w * (a * s).cos() * (b * s).cos()).sum();
            let target = if a == b { 1.0 } else { 0.0 };
            assert!((disc - target).abs() <= cosine_pair_bound(a, b, t.horizon()) * (1.0 + 1e-9));
        }
    }

    #[test]
    fn sampling_guard() {
        let t = TimeGrid::new(0.1, 10).unwrap();
        assert!(t.check_sampling(7.0).is_ok());
        assert!(t.check_sampling(8.0).is_err());
        let h = TimeGrid::with_horizon(200.0, 0.03).unwrap();
        assert!((h.horizon() - 200.0).abs() < 1e-9 && h.dt <= 0.03);
    }
}
