//! RSSI ranging: inverts the deterministic power law to a PA-user distance.
//!
//! The AP is assumed to know the user's transmit power `P_k` and the guide
//! attenuation `alpha`.

use crate::channel::CarrierConfig;
use crate::error::{Error, Result};
use crate::geometry::UserPosition;
use crate::scalar::Scalar;
use crate::scenario::Scenario;
use crate::streams::StreamKey;

/// Default power floor in watts.
pub const DEFAULT_POWER_FLOOR: f64 = 1e-15;

/// What to do with measurements whose power falls below the floor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LowPowerPolicy {
    /// Invert `max(P, floor)` and flag the measurement.
    #[default]
    Clamp,
    /// Drop the measurement before solving.
    Discard,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeMeasurement<T> {
    pub pa_index: usize,
    pub pa_y: T,
    /// Raw received power `P_ik` (may be negative after noise).
    pub received_power: T,
    /// `max(P_ik, floor)`, the value that was actually inverted.
    pub effective_power: T,
    pub estimated_distance: T,
    pub clamped: bool,
}

/// RSSI inversion `d = c e^(-alpha y) / (sqrt(P / P_k) 4 pi f_c)`.
pub fn estimate_distance<T: Scalar>(
    pa_index: usize,
    p_received: T,
    p_tx: T,
    pa_y: T,
    alpha: T,
    carrier: &CarrierConfig<T>,
    floor: T,
) -> Result<RangeMeasurement<T>> {
    if !(p_tx > T::zero()) {
        return Err(Error::config(
            "tx.power_w",
            format!("transmit power must be positive, got {p_tx}"),
        ));
    }
    if !(floor > T::zero()) {
        return Err(Error::config(
            "run.power_floor_w",
            format!("power floor must be positive, got {floor}"),
        ));
    }
    let clamped = !(p_received >= floor);
    let effective_power = if clamped { floor } else { p_received };
    let estimated_distance = CarrierConfig::<T>::c() * (-alpha * pa_y).exp()
        / (effective_power.sqrt() / p_tx.sqrt() * T::lit(4.0) * T::PI() * carrier.frequency());
    Ok(RangeMeasurement {
        pa_index,
        pa_y,
        received_power: p_received,
        effective_power,
        estimated_distance,
        clamped,
    })
}

/// Serially activates each PA once for user `user_index` and ranges it.
///
/// PA `i` draws its noise from `key.with_pa(i)`.
pub fn collect_measurements<T: Scalar>(
    scenario: &Scenario<T>,
    user_index: usize,
    key: StreamKey,
) -> Result<Vec<RangeMeasurement<T>>> {
    let user = *scenario.user(user_index)?;
    measure_user(scenario, &user, key)
}

/// Same as [`collect_measurements`] for an arbitrary floor position.
pub fn measure_user<T: Scalar>(
    scenario: &Scenario<T>,
    user: &UserPosition<T>,
    key: StreamKey,
) -> Result<Vec<RangeMeasurement<T>>> {
    let channel = scenario.channel()?;
    let opts = &scenario.estimator;
    let mut out = Vec::with_capacity(scenario.pa_layout.len());
    for (i, &pa_y) in scenario.pa_layout.positions().iter().enumerate() {
        let mut rng = key.with_pa(i as u64).rng();
        let p = channel.received_power(pa_y, user, &scenario.noise, i, &mut rng);
        let m = estimate_distance(
            i,
            p,
            channel.tx.power,
            pa_y,
            channel.constants.alpha,
            &channel.carrier,
            opts.power_floor,
        )?;
        if m.clamped && opts.low_power == LowPowerPolicy::Discard {
            continue;
        }
        out.push(m);
    }
    Ok(out)
}
