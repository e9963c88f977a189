//! Room, waveguide and user coordinate model.
//!
//! The waveguide runs along the ceiling edge `x = 0, z = h`, starting at the
//! access point `[0, 0, h]`. A PA sits at `[0, y, h]` and a user stands on the
//! floor at `[x, y, 0]`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Axis-aligned room `[0, d1] x [0, d2] x [0, h]` in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Room<T> {
    /// Extent along x (away from the waveguide wall).
    pub d1: T,
    /// Extent along y (along the waveguide).
    pub d2: T,
    /// Ceiling height.
    pub h: T,
}

impl<T: Scalar> Room<T> {
    pub fn new(d1: T, d2: T, h: T) -> Result<Self> {
        let room = Self { d1, d2, h };
        room.validate()?;
        Ok(room)
    }

    pub fn validate(&self) -> Result<()> {
        for (key, v) in [
            ("room.d1", self.d1),
            ("room.d2", self.d2),
            ("room.h", self.h),
        ] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::config(
                    key,
                    format!("must be a positive finite length, got {v}"),
                ));
            }
        }
        Ok(())
    }

    pub fn contains(&self, user: &UserPosition<T>) -> bool {
        user.x >= T::zero() && user.x <= self.d1 && user.y >= T::zero() && user.y <= self.d2
    }

    /// Floor-plane center `(d1/2, d2/2)`.
    pub fn center(&self) -> UserPosition<T> {
        let two = T::lit(2.0);
        UserPosition::new(self.d1 / two, self.d2 / two)
    }
}

/// User location on the floor (`z = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UserPosition<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> UserPosition<T> {
    pub const fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    /// Planar Euclidean distance to another floor point.
    pub fn planar_distance(&self, other: &UserPosition<T>) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Rejects ground-truth positions outside the room. `key` names the config entry.
    pub fn validate_in(&self, room: &Room<T>, key: &str) -> Result<()> {
        if !self.x.is_finite() || !self.y.is_finite() || !room.contains(self) {
            return Err(Error::config(
                key,
                format!(
                    "user ({}, {}) lies outside the room [0, {}] x [0, {}]",
                    self.x, self.y, room.d1, room.d2
                ),
            ));
        }
        Ok(())
    }
}

/// How "evenly distributed" PAs are laid out along the waveguide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PlacementRule {
    /// `y_i = (i - 0.5) d2 / I`: each PA at the center of an equal segment.
    #[default]
    Midpoint,
    /// `y_i = (i - 1) d2 / (I - 1)`: first and last PA on the room corners.
    Endpoints,
}

/// Ordered PA coordinates along the waveguide. Always holds at least two
/// strictly increasing positions inside `[0, d2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PaLayout<T> {
    y_positions: Vec<T>,
}

impl<T: Scalar> PaLayout<T> {
    pub fn new(y_positions: Vec<T>, room: &Room<T>) -> Result<Self> {
        const KEY: &str = "pas.positions";
        if y_positions.len() < 2 {
            return Err(Error::config(
                KEY,
                format!("at least 2 PAs are required, got {}", y_positions.len()),
            ));
        }
        for (i, &y) in y_positions.iter().enumerate() {
            if !y.is_finite() || y < T::zero() || y > room.d2 {
                return Err(Error::config(
                    KEY,
                    format!(
                        "PA {i} at y = {y} lies outside the waveguide span [0, {}]",
                        room.d2
                    ),
                ));
            }
        }
        if let Some(i) = y_positions.windows(2).position(|w| !(w[0] < w[1])) {
            return Err(Error::config(
                KEY,
                format!(
                    "positions must be strictly increasing (PA {} vs PA {})",
                    i,
                    i + 1
                ),
            ));
        }
        Ok(Self { y_positions })
    }

    pub fn positions(&self) -> &[T] {
        &self.y_positions
    }

    pub fn len(&self) -> usize {
        self.y_positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y_positions.is_empty()
    }

    pub fn first(&self) -> T {
        self.y_positions[0]
    }

    pub fn last(&self) -> T {
        self.y_positions[self.y_positions.len() - 1]
    }
}

/// PA-to-user distance `sqrt(x^2 + (pa_y - y)^2 + h^2)`.
#[inline]
pub fn distance_3d<T: Scalar>(pa_y: T, user: &UserPosition<T>, h: T) -> T {
    let dy = pa_y - user.y;
    (user.x * user.x + dy * dy + h * h).sqrt()
}

/// Evenly distributes `count` PAs with the midpoint rule.
pub fn even_pa_placement<T: Scalar>(room: &Room<T>, count: usize) -> Result<PaLayout<T>> {
    place_pas(room, count, PlacementRule::Midpoint)
}

pub fn place_pas<T: Scalar>(
    room: &Room<T>,
    count: usize,
    rule: PlacementRule,
) -> Result<PaLayout<T>> {
    if count < 2 {
        return Err(Error::config(
            "pas.count",
            format!("at least 2 PAs are required, got {count}"),
        ));
    }
    let n = T::from_usize(count).expect("PA count fits the scalar type");
    let positions = (0..count)
        .map(|i| {
            let i = T::from_usize(i).expect("PA index fits the scalar type");
            match rule {
                PlacementRule::Midpoint => room.d2 * ((i + T::lit(0.5)) / n),
                PlacementRule::Endpoints => room.d2 * (i / (n - T::one())),
            }
        })
        .collect();
    PaLayout::new(positions, room)
}
