//! Unit-volume boxes and the ellipsoid attached to a spectral threshold.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Rejected box geometry.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("side length {0} is not a positive finite number")]
    NonPositiveSide(f64),
    #[error("derived side 1/(a1*a2) = {0} is not finite")]
    DegenerateVolume(f64),
    #[error("side product {0} differs from 1 by more than 1e-12")]
    VolumeMismatch(f64),
    #[error("side length {0} has no finite nonzero inverse square")]
    ExtremeSide(f64),
}

fn checked(mut sides: [f64; 3]) -> Result<Cuboid, GeometryError> {
    sides.sort_by(f64::total_cmp);
    let inv_sq = sides.map(|a| 1.0 / (a * a));
    for (a, w) in sides.iter().zip(inv_sq) {
        if !w.is_normal() {
            return Err(GeometryError::ExtremeSide(*a));
        }
    }
    Ok(Cuboid { sides, inv_sq })
}

/// A box `(0,a1) x (0,a2) x (0,a3)` of unit volume with sorted sides.
///
/// Only two sides are free; the third is always `1/(a1*a2)` so the volume
/// constraint holds by construction. The inverse squared sides are cached
/// because every eigenvalue is the dot product of them with a squared
/// multi-index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cuboid {
    sides: [f64; 3],
    inv_sq: [f64; 3],
}

impl Cuboid {
    /// Builds the box with sides `a1`, `a2`, `1/(a1*a2)`, sorted ascending.
    pub fn new(a1: f64, a2: f64) -> Result<Self, GeometryError> {
        for a in [a1, a2] {
            if !(a.is_finite() && a > 0.0) {
                return Err(GeometryError::NonPositiveSide(a));
            }
        }
        let area = a1 * a2;
        let a3 = 1.0 / area;
        if !(area.is_normal() && a3.is_finite()) {
            return Err(GeometryError::DegenerateVolume(a3));
        }
        checked([a1, a2, a3])
    }

    /// Accepts an explicit triple whose product is 1 to within `1e-12`,
    /// keeping the given values bit-for-bit (sorted).
    pub fn from_sides(a1: f64, a2: f64, a3: f64) -> Result<Self, GeometryError> {
        for a in [a1, a2, a3] {
            if !(a.is_finite() && a > 0.0) {
                return Err(GeometryError::NonPositiveSide(a));
            }
        }
        let product = a1 * a2 * a3;
        if (product - 1.0).abs() > 1e-12 {
            return Err(GeometryError::VolumeMismatch(product));
        }
        checked([a1, a2, a3])
    }

    pub fn unit_cube() -> Self {
        Self {
            sides: [1.0; 3],
            inv_sq: [1.0; 3],
        }
    }

    pub fn sides(&self) -> [f64; 3] {
        self.sides
    }

    pub fn a1(&self) -> f64 {
        self.sides[0]
    }

    pub fn a2(&self) -> f64 {
        self.sides[1]
    }

    pub fn a3(&self) -> f64 {
        self.sides[2]
    }

    /// `[1/a1², 1/a2², 1/a3²]`, descending.
    pub fn inverse_squares(&self) -> [f64; 3] {
        self.inv_sq
    }

    /// True only for the exact unit cube, which takes the integer counting path.
    pub fn is_unit_cube(&self) -> bool {
        self.sides == [1.0; 3]
    }

    pub fn volume(&self) -> f64 {
        self.sides.iter().product()
    }

    /// Semi-axes `a_i * sqrt(lambda) / pi` of the ellipsoid at threshold `lambda`.
    pub fn ellipsoid(&self, lambda: f64) -> EllipsoidSpec {
        EllipsoidSpec::new(*self, lambda)
    }
}

impl Serialize for Cuboid {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        SidesRepr {
            a1: self.sides[0],
            a2: self.sides[1],
            a3: self.sides[2],
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Cuboid {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = SidesRepr::deserialize(deserializer)?;
        let cuboid =
            Cuboid::from_sides(repr.a1, repr.a2, repr.a3).map_err(serde::de::Error::custom)?;
        if cuboid.sides != [repr.a1, repr.a2, repr.a3] {
            return Err(serde::de::Error::custom(format!(
                "sides ({}, {}, {}) are not a sorted unit-volume triple",
                repr.a1, repr.a2, repr.a3
            )));
        }
        Ok(cuboid)
    }
}

#[derive(Serialize, Deserialize)]
struct SidesRepr {
    a1: f64,
    a2: f64,
    a3: f64,
}

/// The closed ellipsoid `x1²/a1² + x2²/a2² + x3²/a3² <= lambda/pi²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipsoidSpec {
    pub lambda: f64,
    pub cuboid: Cuboid,
    pub semi_axes: [f64; 3],
}

impl EllipsoidSpec {
    pub fn new(cuboid: Cuboid, lambda: f64) -> Self {
        let scale = lambda.max(0.0).sqrt() / PI;
        Self {
            lambda,
            cuboid,
            semi_axes: cuboid.sides().map(|a| a * scale),
        }
    }

    pub fn volume(&self) -> f64 {
        4.0 / 3.0 * PI * self.semi_axes.iter().product::<f64>()
    }

    /// Closed form `4/(3 pi²) lambda^{3/2}` (unit-volume box).
    pub fn weyl_volume(&self) -> f64 {
        4.0 / (3.0 * PI * PI) * self.lambda.powf(1.5)
    }
}
