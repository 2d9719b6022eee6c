use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radial::{Dimension, RadialMode};

/// Index of a full eigenfunction: `(l, k)` on the disk, `(l, m, k)` on the
/// ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModeIndex {
    Ball { l: u32, m: i32, k: u32 },
    Disk { l: i32, k: u32 },
}

impl ModeIndex {
    pub fn disk(l: i32, k: u32) -> Self {
        ModeIndex::Disk { l, k }
    }

    pub fn ball(l: u32, m: i32, k: u32) -> Result<Self> {
        if m.unsigned_abs() > l {
            return Err(Error::Domain(format!("azimuthal index {m} exceeds degree {l}")));
        }
        Ok(ModeIndex::Ball { l, m, k })
    }

    pub fn dimension(&self) -> Dimension {
        match self {
            ModeIndex::Disk { .. } => Dimension::Two,
            ModeIndex::Ball { .. } => Dimension::Three,
        }
    }

    /// Angular index as written (signed in 2D).
    pub fn l(&self) -> i32 {
        match *self {
            ModeIndex::Disk { l, .. } => l,
            ModeIndex::Ball { l, .. } => l as i32,
        }
    }

    /// Index of the radial problem this mode comes from.
    pub fn radial_l(&self) -> u32 {
        match *self {
            ModeIndex::Disk { l, .. } => l.unsigned_abs(),
            ModeIndex::Ball { l, .. } => l,
        }
    }

    pub fn k(&self) -> u32 {
        match *self {
            ModeIndex::Disk { k, .. } | ModeIndex::Ball { k, .. } => k,
        }
    }

    pub fn azimuthal(&self) -> Option<i32> {
        match *self {
            ModeIndex::Disk { .. } => None,
            ModeIndex::Ball { m, .. } => Some(m),
        }
    }

    /// The angular factor shared by every `k`.
    pub fn angular_key(&self) -> AngularKey {
        match *self {
            ModeIndex::Disk { l, .. } => AngularKey { l, m: 0 },
            ModeIndex::Ball { l, m, .. } => AngularKey { l: l as i32, m },
        }
    }

    /// The index with `l -> -l` (2D) or `m -> -m` (3D).
    pub fn mirrored(&self) -> Self {
        match *self {
            ModeIndex::Disk { l, k } => ModeIndex::Disk { l: -l, k },
            ModeIndex::Ball { l, m, k } => ModeIndex::Ball { l, m: -m, k },
        }
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeIndex::Disk { l, k } => write!(f, "(l={l}, k={k})"),
            ModeIndex::Ball { l, m, k } => write!(f, "(l={l}, m={m}, k={k})"),
        }
    }
}

/// Angular factor `e^{ilθ}/sqrt(2π)` (with `m = 0`) or `Y_lm`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AngularKey {
    pub l: i32,
    pub m: i32,
}

/// A full eigenfunction: radial factor times angular factor.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub index: ModeIndex,
    pub radial: Arc<RadialMode>,
    pub mu: f64,
}

impl Mode {
    pub fn new(index: ModeIndex, radial: Arc<RadialMode>) -> Result<Self> {
        if index.dimension() != radial.dimension {
            return Err(Error::Shape(format!(
                "mode {index} is {}D but its radial factor is {}D",
                index.dimension().value(),
                radial.dimension.value()
            )));
        }
        if index.radial_l() != radial.l || index.k() != radial.k {
            return Err(Error::Index(format!(
                "mode {index} paired with radial solution (l={}, k={})",
                radial.l, radial.k
            )));
        }
        let mu = radial.mu;
        Ok(Self { index, radial, mu })
    }
}

/// Coefficients `<f, φ>` keyed by mode index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModalCoefficients {
    pub entries: BTreeMap<ModeIndex, Complex64>,
}

#[derive(Serialize, Deserialize)]
struct CoefficientRecord {
    index: ModeIndex,
    re: f64,
    im: f64,
}

impl ModalCoefficients {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, index: ModeIndex, value: Complex64) {
        self.entries.insert(index, value);
    }

    pub fn get(&self, index: &ModeIndex) -> Option<Complex64> {
        self.entries.get(index).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ModeIndex, &Complex64)> {
        self.entries.iter()
    }

    /// `(L_max, K_max)` over the stored indices.
    pub fn truncation(&self) -> (u32, u32) {
        self.entries
            .keys()
            .fold((0, 0), |(l, k), i| (l.max(i.radial_l()), k.max(i.k())))
    }

    /// `a X + b Y` over the union of indices.
    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Self {
        let mut out = Self::new();
        for (i, v) in &self.entries {
            *out.entries.entry(*i).or_default() += a * v;
        }
        for (i, v) in &other.entries {
            *out.entries.entry(*i).or_default() += b * v;
        }
        out
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self {
            entries: self.entries.iter().map(|(i, v)| (*i, s * v)).collect(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.entries.values().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn l1_norm(&self) -> f64 {
        self.entries.values().map(|v| v.norm()).sum()
    }

    /// `max |X_i - Y_i|` over the union of indices (missing entries are 0).
    pub fn max_difference(&self, other: &Self) -> f64 {
        self.combine(Complex64::new(1.0, 0.0), other, Complex64::new(-1.0, 0.0))
            .entries
            .values()
            .fold(0.0, |m, v| m.max(v.norm()))
    }

    /// `‖X - Y‖ / ‖Y‖`.
    pub fn relative_difference(&self, reference: &Self) -> f64 {
        let diff = self.combine(Complex64::new(1.0, 0.0), reference, Complex64::new(-1.0, 0.0));
        diff.norm() / reference.norm()
    }
}

impl FromIterator<(ModeIndex, Complex64)> for ModalCoefficients {
    fn from_iter<T: IntoIterator<Item = (ModeIndex, Complex64)>>(iter: T) -> Self {
        Self {
            entries: iter.into_iter().collect(),
        }
    }
}

impl Serialize for ModalCoefficients {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.entries.iter().map(|(index, v)| CoefficientRecord {
            index: *index,
            re: v.re,
            im: v.im,
        }))
    }
}

impl<'de> Deserialize<'de> for ModalCoefficients {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let records = Vec::<CoefficientRecord>::deserialize(deserializer)?;
        Ok(records
            .into_iter()
            .map(|r| (r.index, Complex64::new(r.re, r.im)))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn untagged_indices_round_trip() {
        let disk = ModeIndex::disk(-3, 2);
        let ball = ModeIndex::ball(2, -1, 4).unwrap();
        for i in [disk, ball] {
            let s = serde_json::to_string(&i).unwrap();
            assert_eq!(serde_json::from_str::<ModeIndex>(&s).unwrap(), i);
        }
        assert!(ModeIndex::ball(1, 2, 1).is_err());
    }

    #[test]
    fn coefficients_round_trip_through_json() {
        let c: ModalCoefficients = [
            (ModeIndex::disk(0, 1), Complex64::new(1.5, 0.0)),
            (ModeIndex::disk(-2, 3), Complex64::new(0.25, -1.0)),
        ]
        .into_iter()
        .collect();
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<ModalCoefficients>(&s).unwrap(), c);
        assert_eq!(c.truncation(), (2, 3));
    }
}
