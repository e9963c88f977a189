//! Complete description of one positioning experiment.

use crate::channel::{
    propagation_constants_exact, CarrierConfig, Channel, NoiseModel, PropagationConstants,
    TxConfig, WaveguideMaterial,
};
use crate::error::{Error, Result};
use crate::geometry::{place_pas, PaLayout, PlacementRule, Room, UserPosition};
use crate::ranging::{LowPowerPolicy, DEFAULT_POWER_FLOOR};
use crate::scalar::Scalar;
use crate::solver::WeightMode;

/// Reference parameter set: 6 x 10 x 3 m room, 2.8 GHz, 0.1 W, PTFE-like guide.
pub mod defaults {
    pub const ROOM_D1: f64 = 6.0;
    pub const ROOM_D2: f64 = 10.0;
    pub const ROOM_H: f64 = 3.0;
    pub const CARRIER_HZ: f64 = 2.8e9;
    pub const TX_POWER_W: f64 = 0.1;
    pub const EPS_R: f64 = 2.08;
    pub const TAN_DELTA: f64 = 0.0004;
    pub const NOISE_DBM: f64 = -40.0;
    pub const PA_COUNT: usize = 3;
    pub const MASTER_SEED: u64 = 0;
}

/// Knobs of the ranging + WLS estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorOptions<T> {
    pub weights: WeightMode,
    /// Powers below this floor (watts) are treated as unreliable.
    pub power_floor: T,
    pub low_power: LowPowerPolicy,
}

impl<T: Scalar> Default for EstimatorOptions<T> {
    fn default() -> Self {
        Self {
            weights: WeightMode::Snr,
            power_floor: T::lit(DEFAULT_POWER_FLOOR),
            low_power: LowPowerPolicy::Clamp,
        }
    }
}

impl<T: Scalar> EstimatorOptions<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.power_floor > T::zero()) || !self.power_floor.is_finite() {
            return Err(Error::config(
                "run.power_floor_w",
                format!("power floor must be positive, got {}", self.power_floor),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<T> {
    pub room: Room<T>,
    pub pa_layout: PaLayout<T>,
    /// Rule used whenever an experiment rebuilds the layout for a new PA count.
    pub placement: PlacementRule,
    pub users: Vec<UserPosition<T>>,
    pub carrier: CarrierConfig<T>,
    pub material: WaveguideMaterial<T>,
    pub tx: TxConfig<T>,
    pub noise: NoiseModel<T>,
    pub estimator: EstimatorOptions<T>,
    pub master_seed: u64,
}

impl<T: Scalar> Scenario<T> {
    /// Reference parameter set with `defaults::PA_COUNT` midpoint-placed PAs and
    /// one user at the room center.
    pub fn reference() -> Self {
        use defaults::*;
        let room = Room::new(T::lit(ROOM_D1), T::lit(ROOM_D2), T::lit(ROOM_H)).expect("valid room");
        let pa_layout = place_pas(&room, PA_COUNT, PlacementRule::Midpoint).expect("valid layout");
        Self {
            pa_layout,
            placement: PlacementRule::Midpoint,
            users: vec![room.center()],
            room,
            carrier: CarrierConfig::new(T::lit(CARRIER_HZ)).expect("valid carrier"),
            material: WaveguideMaterial::new(T::lit(EPS_R), T::lit(TAN_DELTA), T::zero())
                .expect("valid material"),
            tx: TxConfig::new(T::lit(TX_POWER_W)).expect("valid tx"),
            noise: NoiseModel::from_dbm(T::lit(NOISE_DBM)).expect("valid noise"),
            estimator: EstimatorOptions::default(),
            master_seed: MASTER_SEED,
        }
    }

    /// Checks every cross-field invariant.
    pub fn validate(&self) -> Result<()> {
        self.room.validate()?;
        // re-run layout checks against this room
        PaLayout::new(self.pa_layout.positions().to_vec(), &self.room)?;
        if self.users.is_empty() {
            return Err(Error::config(
                "users.positions",
                "at least one user is required",
            ));
        }
        for (i, u) in self.users.iter().enumerate() {
            u.validate_in(&self.room, &format!("users.positions[{i}]"))?;
        }
        self.material.validate()?;
        self.estimator.validate()?;
        if let Some(n) = self.noise.per_pa_noise() {
            if n.len() != self.pa_layout.len() {
                return Err(Error::config(
                    "noise.per_pa_w",
                    format!(
                        "expected {} entries (one per PA), got {}",
                        self.pa_layout.len(),
                        n.len()
                    ),
                ));
            }
        }
        self.propagation_constants()?;
        Ok(())
    }

    pub fn propagation_constants(&self) -> Result<PropagationConstants<T>> {
        propagation_constants_exact(&self.material, &self.carrier)
    }

    pub fn channel(&self) -> Result<Channel<T>> {
        Ok(Channel {
            carrier: self.carrier,
            constants: self.propagation_constants()?,
            tx: self.tx,
            height: self.room.h,
        })
    }

    /// Copy with `count` PAs placed by `self.placement`.
    pub fn with_pa_count(&self, count: usize) -> Result<Self> {
        let mut s = self.clone();
        s.pa_layout = place_pas(&self.room, count, self.placement)?;
        s.validate()?;
        Ok(s)
    }

    pub fn with_noise(&self, noise: NoiseModel<T>) -> Self {
        Self {
            noise,
            ..self.clone()
        }
    }

    pub fn user(&self, index: usize) -> Result<&UserPosition<T>> {
        self.users.get(index).ok_or_else(|| {
            Error::config(
                "run.user",
                format!(
                    "user index {index} out of range ({} users)",
                    self.users.len()
                ),
            )
        })
    }
}
