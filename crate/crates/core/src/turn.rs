//! Exact rotation angles as fractions of a full turn.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use nalgebra::Vector2;
use num_rational::Ratio;

use crate::error::{Error, Result};

/// Default angular resolution: orientations are multiples of `1/360` turn.
pub const DEFAULT_RESOLUTION: i64 = 360;

/// An angle in `[0, 1)` turns, stored as a reduced fraction.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Turn(Ratio<i64>);

impl Turn {
    pub const ZERO: Turn = Turn(Ratio::new_raw(0, 1));

    pub fn new(numer: i64, denom: i64) -> Result<Self> {
        if denom <= 0 {
            return Err(Error::InvalidPuzzle(format!(
                "turn denominator must be positive, got {denom}"
            )));
        }
        Ok(Self::wrap(Ratio::new(numer, denom)))
    }

    fn wrap(r: Ratio<i64>) -> Self {
        let f = r - r.floor();
        Turn(f)
    }

    pub fn half() -> Self {
        Turn(Ratio::new(1, 2))
    }

    /// `k / r` turns.
    pub fn fraction(k: i64, r: u32) -> Self {
        Self::wrap(Ratio::new(k, i64::from(r.max(1))))
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn as_f64(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    pub fn radians(&self) -> f64 {
        std::f64::consts::TAU * self.as_f64()
    }

    pub fn opposite(&self) -> Self {
        *self + Self::half()
    }

    /// Whether the angle is a multiple of `1/r` turn.
    pub fn is_multiple_of(&self, r: u32) -> bool {
        (self.numer() * i64::from(r)) % self.denom() == 0
    }

    /// Cosine and sine, exact at multiples of a quarter turn.
    pub fn cos_sin(&self) -> (f64, f64) {
        if self.is_multiple_of(4) {
            match self.numer() * 4 / self.denom() {
                0 => (1.0, 0.0),
                1 => (0.0, 1.0),
                2 => (-1.0, 0.0),
                _ => (0.0, -1.0),
            }
        } else {
            let a = self.radians();
            (a.cos(), a.sin())
        }
    }

    /// Rotates `v` counter-clockwise by this angle.
    pub fn rotate(&self, v: &Vector2<f64>) -> Vector2<f64> {
        let (c, s) = self.cos_sin();
        Vector2::new(c * v.x - s * v.y, s * v.x + c * v.y)
    }

    pub fn unit(&self) -> Vector2<f64> {
        let (c, s) = self.cos_sin();
        Vector2::new(c, s)
    }

    /// The direction of `v` snapped to a multiple of `1/resolution` turn.
    /// Fails when `v` is zero or not within `1e-7` turns of such a multiple.
    pub fn from_direction(v: &Vector2<f64>, resolution: i64) -> Result<Self> {
        if !(v.norm() > 0.0) || !v.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidPuzzle(format!(
                "degenerate direction ({}, {})",
                v.x, v.y
            )));
        }
        let turns = v.y.atan2(v.x) / std::f64::consts::TAU;
        let scaled = turns * resolution as f64;
        let k = scaled.round();
        if (scaled - k).abs() > 1e-7 * resolution as f64 {
            return Err(Error::InvalidPuzzle(format!(
                "direction ({}, {}) is not a multiple of 1/{resolution} turn",
                v.x, v.y
            )));
        }
        Turn::new(k as i64, resolution)
    }
}

impl Add for Turn {
    type Output = Turn;
    fn add(self, rhs: Turn) -> Turn {
        Turn::wrap(self.0 + rhs.0)
    }
}

impl Sub for Turn {
    type Output = Turn;
    fn sub(self, rhs: Turn) -> Turn {
        Turn::wrap(self.0 - rhs.0)
    }
}

impl Neg for Turn {
    type Output = Turn;
    fn neg(self) -> Turn {
        Turn::wrap(-self.0)
    }
}

impl fmt::Debug for Turn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl fmt::Display for Turn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{} turn", self.numer(), self.denom())
    }
}
