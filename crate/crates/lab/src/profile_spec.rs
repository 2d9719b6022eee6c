//! Named sound-speed presets: `const:<v>`, `c1`, `c1:<scale>`, `c2`,
//! `c2:<inner>:<outer>`.

use patsvd_core::radial::SoundSpeedProfile;

use crate::error::{LabError, Result};

/// Default annulus of the two-valued preset.
pub const C2_ANNULUS: (f64, f64) = (0.3, 0.6);
pub const C2_VALUES: (f64, f64) = (5.0, 1.0);

fn number(text: &str, spec: &str) -> Result<f64> {
    text.trim()
        .parse()
        .map_err(|_| LabError::Config(format!("'{text}' is not a number in profile '{spec}'")))
}

pub fn make_profile(spec: &str) -> Result<SoundSpeedProfile> {
    let parts: Vec<&str> = spec.trim().split(':').collect();
    let profile = match parts.as_slice() {
        ["const", v] => SoundSpeedProfile::constant(number(v, spec)?),
        ["c1"] => SoundSpeedProfile::rational_c1(1.0),
        ["c1", s] => SoundSpeedProfile::rational_c1(number(s, spec)?),
        ["c2"] => SoundSpeedProfile::annulus(C2_ANNULUS.0, C2_ANNULUS.1, C2_VALUES.0, C2_VALUES.1),
        ["c2", a, b] => SoundSpeedProfile::annulus(number(a, spec)?, number(b, spec)?, C2_VALUES.0, C2_VALUES.1),
        _ => {
            return Err(LabError::Config(format!(
                "unknown profile '{spec}' (expected const:<v>, c1, c1:<scale>, c2 or c2:<inner>:<outer>)"
            )))
        }
    };
    profile.map_err(|e| LabError::Config(format!("profile '{spec}': {e}")))
}
