//! Uplink indoor positioning with a pinching-antenna system (PASS).
//!
//! A single dielectric waveguide runs along the ceiling edge of a room, with
//! pinching antennas (PAs) at known positions on it. Each PA is activated in
//! turn; the access point measures the received power, inverts it to a range
//! (RSSI) and a weighted least-squares solver recovers the user's floor
//! position.
//!
//! Numeric code is generic over [`Scalar`] (`f32`, `f64`); the aliases below
//! fix the common `f64` instantiations.
//!
//! ```
//! use pass_positioning::{simulation, NoiseModel, Scenario};
//!
//! let scenario = Scenario::<f64>::reference().with_noise(NoiseModel::noiseless());
//! let trial = simulation::run_trial(&scenario, 0, 0).unwrap();
//! assert!(trial.error < 1e-9);
//! ```

// `!(x > 0)` style checks are used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod geometry;
pub mod ranging;
pub mod scalar;
mod scenario;
pub mod simulation;
pub mod solver;
pub mod streams;

pub use channel::{
    CarrierConfig, Channel, NoiseConvention, NoiseModel, PropagationConstants, TxConfig,
    WaveguideMaterial,
};
pub use error::{Error, Result};
pub use geometry::{PaLayout, PlacementRule, Room, UserPosition};
pub use ranging::{LowPowerPolicy, RangeMeasurement};
pub use scalar::Scalar;
pub use scenario::{defaults, EstimatorOptions, Scenario};
pub use simulation::{HeatmapGrid, MonteCarloResult, SweepResult, TrialResult};
pub use solver::{LinearSystem, PositionEstimate, WeightMode, WeightSpec};
pub use streams::StreamKey;

pub type Room64 = Room<f64>;
pub type UserPosition64 = UserPosition<f64>;
pub type PaLayout64 = PaLayout<f64>;
pub type Scenario64 = Scenario<f64>;
pub type NoiseModel64 = NoiseModel<f64>;
pub type RangeMeasurement64 = RangeMeasurement<f64>;
pub type LinearSystem64 = LinearSystem<f64>;
pub type PositionEstimate64 = PositionEstimate<f64>;
pub type SweepResult64 = SweepResult<f64>;
pub type MonteCarloResult64 = MonteCarloResult<f64>;
pub type HeatmapGrid64 = HeatmapGrid<f64>;

pub type Scenario32 = Scenario<f32>;
pub type PositionEstimate32 = PositionEstimate<f32>;
