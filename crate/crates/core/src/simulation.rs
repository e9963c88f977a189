//! Experiment harness: single trials, noise/PA-count sweeps, Monte-Carlo
//! robustness runs and spatial error heatmaps.
//!
//! Trial `t` for user `u` always draws from stream keys
//! `(master_seed, u, t, pa)`, so different PA counts and noise levels see
//! paired noise and parallel scheduling cannot change any result.

use rayon::prelude::*;

use crate::channel::NoiseModel;
use crate::error::{Error, Result};
use crate::geometry::UserPosition;
use crate::ranging::measure_user;
use crate::scalar::Scalar;
use crate::solver::{locate, PositionEstimate, WeightSpec};
use crate::streams::StreamKey;

pub use crate::scenario::{defaults, EstimatorOptions, Scenario};

/// Stream-key user ids for heatmap cells start here, clear of configured users.
const HEATMAP_USER_BASE: u64 = 1 << 63;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialResult<T> {
    pub trial_index: u64,
    pub truth: UserPosition<T>,
    pub estimate: PositionEstimate<T>,
    /// Planar distance between estimate and truth.
    pub error: T,
    /// Number of measurements whose power hit the floor.
    pub clamped_measurements: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint<T> {
    pub noise_dbm: T,
    pub pa_count: usize,
    pub trials: usize,
    pub mean_error: T,
    pub variance: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult<T> {
    /// Noise-major order: all PA counts for the first level, then the next.
    pub points: Vec<SweepPoint<T>>,
    pub trials: usize,
}

impl<T: Scalar> SweepResult<T> {
    pub fn point(&self, noise_dbm: T, pa_count: usize) -> Option<&SweepPoint<T>> {
        self.points
            .iter()
            .find(|p| p.pa_count == pa_count && (p.noise_dbm == noise_dbm))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloResult<T> {
    pub pa_count: usize,
    pub noise_dbm: T,
    pub trials: Vec<TrialResult<T>>,
    pub mean_error: T,
    /// Unbiased (n - 1) sample variance.
    pub variance: T,
}

impl<T: Scalar> MonteCarloResult<T> {
    pub fn errors(&self) -> Vec<T> {
        self.trials.iter().map(|t| t.error).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatmapCell<T> {
    pub x: T,
    pub y: T,
    pub mean_error: T,
    /// `mean_error / max(mean_error)`; all zeros when the max is zero or the
    /// scenario is noiseless.
    pub normalized_error: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapGrid<T> {
    pub nx: usize,
    pub ny: usize,
    pub trials_per_cell: usize,
    /// Row-major with x varying fastest: index `j * nx + i`.
    pub cells: Vec<HeatmapCell<T>>,
}

impl<T: Scalar> HeatmapGrid<T> {
    pub fn cell(&self, i: usize, j: usize) -> &HeatmapCell<T> {
        &self.cells[j * self.nx + i]
    }

    pub fn max_mean_error(&self) -> T {
        self.cells
            .iter()
            .fold(T::zero(), |m, c| m.max(c.mean_error))
    }
}

/// Sample mean and unbiased variance (Welford). Variance is zero for fewer than two samples.
pub fn mean_and_variance<T: Scalar>(values: &[T]) -> (T, T) {
    let mut mean = T::zero();
    let mut m2 = T::zero();
    for (k, &x) in values.iter().enumerate() {
        let n = T::from_usize(k + 1).expect("count fits scalar");
        let delta = x - mean;
        mean = mean + delta / n;
        m2 = m2 + delta * (x - mean);
    }
    if values.len() < 2 {
        return (mean, T::zero());
    }
    let dof = T::from_usize(values.len() - 1).expect("count fits scalar");
    (mean, (m2 / dof).max(T::zero()))
}

/// One measurement + localization pass for configured user `user_index`.
pub fn run_trial<T: Scalar>(
    scenario: &Scenario<T>,
    user_index: usize,
    trial_index: u64,
) -> Result<TrialResult<T>> {
    let user = *scenario.user(user_index)?;
    trial_at(scenario, &user, user_index as u64, trial_index)
}

fn trial_at<T: Scalar>(
    scenario: &Scenario<T>,
    user: &UserPosition<T>,
    stream_user: u64,
    trial_index: u64,
) -> Result<TrialResult<T>> {
    let key = StreamKey::new(scenario.master_seed, stream_user, trial_index, 0);
    let measurements = measure_user(scenario, user, key)?;
    let weights = WeightSpec::from_noise(
        scenario.estimator.weights,
        &scenario.noise,
        scenario.pa_layout.len(),
    );
    let estimate = locate(&measurements, scenario.room.h, &weights)?;
    let error = UserPosition::new(estimate.x, estimate.y).planar_distance(user);
    Ok(TrialResult {
        trial_index,
        truth: *user,
        estimate,
        error,
        clamped_measurements: measurements.iter().filter(|m| m.clamped).count(),
    })
}

fn run_trials<T: Scalar>(
    scenario: &Scenario<T>,
    user: &UserPosition<T>,
    stream_user: u64,
    trials: usize,
) -> Result<Vec<TrialResult<T>>> {
    (0..trials as u64)
        .into_par_iter()
        .map(|t| trial_at(scenario, user, stream_user, t))
        .collect()
}

/// Mean/variance of the localization error for every `(noise level, PA count)` pair.
pub fn noise_sweep<T: Scalar>(
    scenario: &Scenario<T>,
    user_index: usize,
    noise_levels_dbm: &[T],
    pa_counts: &[usize],
    trials: usize,
) -> Result<SweepResult<T>> {
    if trials < 1 {
        return Err(Error::config(
            "run.trials",
            "a sweep needs at least 1 trial per point",
        ));
    }
    let user = *scenario.user(user_index)?;
    let mut points = Vec::with_capacity(noise_levels_dbm.len() * pa_counts.len());
    for &dbm in noise_levels_dbm {
        let noise = NoiseModel::from_dbm(dbm)?.with_convention(scenario.noise.convention);
        for &count in pa_counts {
            let s = scenario.with_noise(noise.clone()).with_pa_count(count)?;
            let errors: Vec<T> = run_trials(&s, &user, user_index as u64, trials)?
                .into_iter()
                .map(|t| t.error)
                .collect();
            let (mean_error, variance) = mean_and_variance(&errors);
            points.push(SweepPoint {
                noise_dbm: dbm,
                pa_count: count,
                trials,
                mean_error,
                variance,
            });
        }
    }
    Ok(SweepResult { points, trials })
}

/// Repeated independent trials on the scenario's own layout and noise level.
pub fn monte_carlo<T: Scalar>(
    scenario: &Scenario<T>,
    user_index: usize,
    trials: usize,
) -> Result<MonteCarloResult<T>> {
    if trials < 2 {
        return Err(Error::config(
            "run.trials",
            "Monte-Carlo needs at least 2 trials",
        ));
    }
    let user = *scenario.user(user_index)?;
    let results = run_trials(scenario, &user, user_index as u64, trials)?;
    let errors: Vec<T> = results.iter().map(|t| t.error).collect();
    let (mean_error, variance) = mean_and_variance(&errors);
    Ok(MonteCarloResult {
        pa_count: scenario.pa_layout.len(),
        noise_dbm: scenario.noise.sigma2_dbm(),
        trials: results,
        mean_error,
        variance,
    })
}

/// Mean error over `trials_per_cell` trials for a user at each cell center.
pub fn heatmap<T: Scalar>(
    scenario: &Scenario<T>,
    nx: usize,
    ny: usize,
    trials_per_cell: usize,
) -> Result<HeatmapGrid<T>> {
    if nx < 2 || ny < 2 {
        return Err(Error::config(
            "run.grid",
            format!("grid must be at least 2 x 2, got {nx} x {ny}"),
        ));
    }
    if trials_per_cell < 1 {
        return Err(Error::config(
            "run.trials_per_cell",
            "need at least 1 trial per cell",
        ));
    }
    let half = T::lit(0.5);
    let fx = T::from_usize(nx).expect("grid size fits scalar");
    let fy = T::from_usize(ny).expect("grid size fits scalar");
    let means: Vec<(T, T, T)> = (0..nx * ny)
        .into_par_iter()
        .map(|cell| {
            let i = T::from_usize(cell % nx).expect("index fits scalar");
            let j = T::from_usize(cell / nx).expect("index fits scalar");
            let user = UserPosition::new(
                (i + half) * scenario.room.d1 / fx,
                (j + half) * scenario.room.d2 / fy,
            );
            let mut errors = Vec::with_capacity(trials_per_cell);
            for t in 0..trials_per_cell as u64 {
                errors.push(trial_at(scenario, &user, HEATMAP_USER_BASE + cell as u64, t)?.error);
            }
            Ok((user.x, user.y, mean_and_variance(&errors).0))
        })
        .collect::<Result<_>>()?;
    // a noiseless grid only carries roundoff, which must not be amplified to [0, 1]
    let max = if scenario.noise.is_noiseless() {
        T::zero()
    } else {
        means.iter().fold(T::zero(), |m, c| m.max(c.2))
    };
    let cells = means
        .into_iter()
        .map(|(x, y, mean_error)| HeatmapCell {
            x,
            y,
            mean_error,
            normalized_error: if max > T::zero() {
                mean_error / max
            } else {
                T::zero()
            },
        })
        .collect();
    Ok(HeatmapGrid {
        nx,
        ny,
        trials_per_cell,
        cells,
    })
}
