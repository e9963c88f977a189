//! Linearized lateration and SNR-weighted least squares.
//!
//! All PAs lie on the line `x = 0, z = h`, so each range circle gives
//!
//! ```text
//! x^2 + (y_i - y)^2 + h^2 = d_i^2   =>   -2 y_i y + v = d_i^2 - y_i^2 - h^2,   v = x^2 + y^2
//! ```
//!
//! which is linear in `Y = [y, v]`. The WLS solution is recovered with a
//! Givens QR of the row-scaled system `sqrt(w) A Y = sqrt(w) b`; `x` follows
//! from `x = sqrt(v - y^2)`, taking the root on the room side of the wall.

use crate::channel::NoiseModel;
use crate::error::{Error, Result};
use crate::ranging::RangeMeasurement;
use crate::scalar::Scalar;

/// Condition-number limit for the weighted design matrix.
pub const CONDITION_LIMIT: f64 = 1e12;
/// Lower bound on `N_i` in SNR weights, in watts.
pub const NOISE_POWER_FLOOR: f64 = 1e-18;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightMode {
    /// `w_i = P_ik / N_i`.
    #[default]
    Snr,
    /// `w_i = 1` (ordinary least squares).
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightSpec<T> {
    pub mode: WeightMode,
    /// Noise power `N_i` per PA index, in watts.
    pub noise_powers: Vec<T>,
}

impl<T: Scalar> WeightSpec<T> {
    pub fn uniform() -> Self {
        Self {
            mode: WeightMode::Uniform,
            noise_powers: Vec::new(),
        }
    }

    pub fn snr(noise_powers: Vec<T>) -> Self {
        Self {
            mode: WeightMode::Snr,
            noise_powers,
        }
    }

    /// Weights for `pa_count` PAs, taking `N_i` from the noise model.
    pub fn from_noise(mode: WeightMode, noise: &NoiseModel<T>, pa_count: usize) -> Self {
        Self {
            mode,
            noise_powers: (0..pa_count).map(|i| noise.noise_power(i)).collect(),
        }
    }

    fn weight(&self, m: &RangeMeasurement<T>) -> T {
        match self.mode {
            WeightMode::Uniform => T::one(),
            WeightMode::Snr => {
                let n = self
                    .noise_powers
                    .get(m.pa_index)
                    .copied()
                    .unwrap_or_else(T::zero)
                    .max(T::lit(NOISE_POWER_FLOOR));
                m.effective_power / n
            }
        }
    }
}

/// Stacked lateration equations `A Y = b` with per-row weights.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem<T> {
    rows: Vec<[T; 2]>,
    rhs: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> LinearSystem<T> {
    pub fn new(rows: Vec<[T; 2]>, rhs: Vec<T>, weights: Vec<T>) -> Result<Self> {
        if rows.len() != rhs.len() || rows.len() != weights.len() {
            return Err(Error::domain(
                "LinearSystem::new",
                format!(
                    "length mismatch: {} rows, {} rhs, {} weights",
                    rows.len(),
                    rhs.len(),
                    weights.len()
                ),
            ));
        }
        if rows.len() < 2 {
            return Err(Error::RankDeficient {
                measurements: rows.len(),
                distinct: rows.len(),
            });
        }
        if let Some(i) = weights
            .iter()
            .position(|w| !(*w > T::zero()) || !w.is_finite())
        {
            return Err(Error::domain(
                "LinearSystem::new",
                format!("weight {i} must be positive and finite, got {}", weights[i]),
            ));
        }
        Ok(Self { rows, rhs, weights })
    }

    /// Design matrix rows `[-2 y_i, 1]`.
    pub fn a_matrix(&self) -> &[[T; 2]] {
        &self.rows
    }

    pub fn b_vector(&self) -> &[T] {
        &self.rhs
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `sqrt(sum_i w_i (a_i . Y - b_i)^2)`.
    pub fn weighted_residual(&self, y: T, v: T) -> T {
        self.rows
            .iter()
            .zip(&self.rhs)
            .zip(&self.weights)
            .fold(T::zero(), |acc, ((a, &b), &w)| {
                let r = a[0] * y + a[1] * v - b;
                acc + w * r * r
            })
            .sqrt()
    }

    pub fn with_weights(&self, weights: Vec<T>) -> Result<Self> {
        Self::new(self.rows.clone(), self.rhs.clone(), weights)
    }
}

/// Output of [`solve_wls`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WlsSolution<T> {
    pub y_hat: T,
    pub v_hat: T,
    pub residual_norm: T,
    /// 2-norm condition number of `sqrt(w) A`.
    pub condition: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionEstimate<T> {
    pub x: T,
    pub y: T,
    pub v_hat: T,
    pub residual_norm: T,
    /// `v - y^2` was negative and got clamped to zero.
    pub v_clamped: bool,
}

/// Assembles `A`, `b` and the weights from range measurements.
pub fn build_system<T: Scalar>(
    measurements: &[RangeMeasurement<T>],
    h: T,
    weights: &WeightSpec<T>,
) -> Result<LinearSystem<T>> {
    let distinct = count_distinct(measurements.iter().map(|m| m.pa_y));
    if measurements.len() < 2 || distinct < 2 {
        return Err(Error::RankDeficient {
            measurements: measurements.len(),
            distinct,
        });
    }
    let two = T::lit(2.0);
    let mut rows = Vec::with_capacity(measurements.len());
    let mut rhs = Vec::with_capacity(measurements.len());
    let mut w = Vec::with_capacity(measurements.len());
    for m in measurements {
        rows.push([-two * m.pa_y, T::one()]);
        rhs.push(m.estimated_distance * m.estimated_distance - m.pa_y * m.pa_y - h * h);
        w.push(weights.weight(m));
    }
    LinearSystem::new(rows, rhs, w)
}

fn count_distinct<T: Scalar>(values: impl Iterator<Item = T>) -> usize {
    let mut v: Vec<T> = values.collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    v.dedup();
    v.len()
}

/// Weighted least-squares minimizer of `||sqrt(w) (A Y - b)||`.
pub fn solve_wls<T: Scalar>(system: &LinearSystem<T>) -> Result<WlsSolution<T>> {
    // R = [[r11, r12], [0, r22]] and Q^T b = [q1, q2], accumulated row by row
    let (mut r11, mut r12, mut r22) = (T::zero(), T::zero(), T::zero());
    let (mut q1, mut q2) = (T::zero(), T::zero());
    for ((a, &b), &w) in system.rows.iter().zip(&system.rhs).zip(&system.weights) {
        let s = w.sqrt();
        let (a0, mut a1, mut bb) = (a[0] * s, a[1] * s, b * s);
        // eliminate a0 against the first row of R
        let (c, sn, r) = givens(r11, a0);
        r11 = r;
        let t = c * r12 + sn * a1;
        a1 = -sn * r12 + c * a1;
        r12 = t;
        let t = c * q1 + sn * bb;
        bb = -sn * q1 + c * bb;
        q1 = t;
        // eliminate the remaining entry against r22
        let (c, sn, r) = givens(r22, a1);
        r22 = r;
        q2 = c * q2 + sn * bb;
    }
    let condition = upper_triangular_condition(r11, r12, r22);
    if !(condition <= T::lit(CONDITION_LIMIT)) {
        return Err(Error::IllConditioned {
            condition: condition.to_f64_lossy(),
            limit: CONDITION_LIMIT,
        });
    }
    let v_hat = q2 / r22;
    let y_hat = (q1 - r12 * v_hat) / r11;
    Ok(WlsSolution {
        y_hat,
        v_hat,
        residual_norm: system.weighted_residual(y_hat, v_hat),
        condition,
    })
}

/// Rotation `(c, s, r)` with `[c s; -s c] [f; g] = [r; 0]`.
fn givens<T: Scalar>(f: T, g: T) -> (T, T, T) {
    if g == T::zero() {
        return (T::one(), T::zero(), f);
    }
    let r = f.hypot(g);
    (f / r, g / r, r)
}

/// Ratio of singular values of `[[a, b], [0, d]]`.
fn upper_triangular_condition<T: Scalar>(a: T, b: T, d: T) -> T {
    let half = T::lit(0.5);
    let e = (a + d) * half;
    let f = (a - d) * half;
    let g = b * half;
    let q = e.hypot(g);
    let r = f.hypot(g);
    let s_max = q + r;
    let s_min = (q - r).abs();
    if s_max == T::zero() {
        return T::infinity();
    }
    // |q - r| loses precision when nearly singular; det / s_max is exact-ish
    let s_min = s_min.max((a * d).abs() / s_max);
    if s_min == T::zero() {
        T::infinity()
    } else {
        s_max / s_min
    }
}

/// `x = sqrt(max(v - y^2, 0))`, positive root.
pub fn recover_position<T: Scalar>(y_hat: T, v_hat: T) -> PositionEstimate<T> {
    let radicand = v_hat - y_hat * y_hat;
    let v_clamped = radicand < T::zero();
    PositionEstimate {
        x: if v_clamped {
            T::zero()
        } else {
            radicand.sqrt()
        },
        y: y_hat,
        v_hat,
        residual_norm: T::zero(),
        v_clamped,
    }
}

/// Full estimator: build the system, solve it and recover `(x, y)`.
pub fn locate<T: Scalar>(
    measurements: &[RangeMeasurement<T>],
    h: T,
    weights: &WeightSpec<T>,
) -> Result<PositionEstimate<T>> {
    let system = build_system(measurements, h, weights)?;
    let sol = solve_wls(&system)?;
    Ok(PositionEstimate {
        residual_norm: sol.residual_norm,
        ..recover_position(sol.y_hat, sol.v_hat)
    })
}
