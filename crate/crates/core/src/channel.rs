//! Line-of-sight free-space channel and lossy dielectric waveguide.
//!
//! The uplink path is user -> (free space) -> PA -> (waveguide) -> AP. The
//! amplitude gain is `lambda / (4 pi d) * exp(-alpha y)`, the phase is
//! `exp(-j 2 pi d / lambda) * exp(-j beta y)`.

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::{distance_3d, UserPosition};
use crate::scalar::Scalar;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Vacuum permeability in H/m.
pub const VACUUM_PERMEABILITY: f64 = 4.0 * std::f64::consts::PI * 1e-7;
/// Vacuum permittivity in F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarrierConfig<T> {
    f_c: T,
    lambda: T,
}

impl<T: Scalar> CarrierConfig<T> {
    pub fn new(f_c: T) -> Result<Self> {
        if !(f_c > T::zero()) || !f_c.is_finite() {
            return Err(Error::config(
                "tx.carrier_hz",
                format!("carrier frequency must be positive, got {f_c}"),
            ));
        }
        Ok(Self {
            f_c,
            lambda: Self::c() / f_c,
        })
    }

    /// Speed of light in m/s.
    #[inline]
    pub fn c() -> T {
        T::lit(SPEED_OF_LIGHT)
    }

    #[inline]
    pub fn frequency(&self) -> T {
        self.f_c
    }

    #[inline]
    pub fn wavelength(&self) -> T {
        self.lambda
    }

    #[inline]
    pub fn angular_frequency(&self) -> T {
        T::TAU() * self.f_c
    }
}

/// Dielectric parameters of the waveguide.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveguideMaterial<T> {
    pub eps_r: T,
    pub tan_delta: T,
    /// Cut-off wavenumber in rad/m. Zero selects the `k_r >> k_c` regime.
    pub k_c: T,
}

impl<T: Scalar> WaveguideMaterial<T> {
    pub fn new(eps_r: T, tan_delta: T, k_c: T) -> Result<Self> {
        let m = Self {
            eps_r,
            tan_delta,
            k_c,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps_r >= T::one()) || !self.eps_r.is_finite() {
            return Err(Error::config(
                "waveguide.eps_r",
                format!("relative permittivity must be >= 1, got {}", self.eps_r),
            ));
        }
        if !(self.tan_delta >= T::zero() && self.tan_delta < T::lit(0.1)) {
            return Err(Error::config(
                "waveguide.tan_delta",
                format!("loss tangent must lie in [0, 0.1), got {}", self.tan_delta),
            ));
        }
        if !(self.k_c >= T::zero()) || !self.k_c.is_finite() {
            return Err(Error::config(
                "waveguide.k_c",
                format!("cut-off wavenumber must be >= 0, got {}", self.k_c),
            ));
        }
        Ok(())
    }

    /// Lossless wavenumber `k_r = 2 pi sqrt(eps_r) / lambda`.
    pub fn real_wavenumber(&self, carrier: &CarrierConfig<T>) -> T {
        T::TAU() * self.eps_r.sqrt() / carrier.wavelength()
    }

    /// Lossless wavenumber from SI vacuum constants, `omega sqrt(mu_0 eps_0 eps_r)`.
    ///
    /// Agrees with [`Self::real_wavenumber`] to about 3e-10 relative: the
    /// rounded `mu_0`/`eps_0` pair does not reproduce `c` exactly.
    pub fn real_wavenumber_si(&self, carrier: &CarrierConfig<T>) -> T {
        let mu_eps = T::lit(VACUUM_PERMEABILITY * VACUUM_PERMITTIVITY);
        carrier.angular_frequency() * (mu_eps * self.eps_r).sqrt()
    }
}

/// Attenuation (Np/m) and phase (rad/m) constants of the guided wave.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationConstants<T> {
    pub alpha: T,
    pub beta: T,
}

impl<T: Scalar> PropagationConstants<T> {
    /// Complex propagation constant `gamma = alpha + j beta`.
    pub fn gamma(&self) -> Complex<T> {
        Complex::new(self.alpha, self.beta)
    }
}

/// Which scalar the configured noise level represents in the power domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseConvention {
    /// The linear noise power is the variance of the power perturbation, so
    /// its standard deviation is `sqrt(sigma2_watts)`.
    #[default]
    PowerVariance,
    /// The linear noise power is used directly as the standard deviation.
    PowerStdDev,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TxConfig<T> {
    /// Transmit power `P_k` in watts.
    pub power: T,
    /// Unit-magnitude transmitted symbol.
    pub symbol: Complex<T>,
}

impl<T: Scalar> TxConfig<T> {
    pub fn new(power: T) -> Result<Self> {
        Self::with_symbol(power, Complex::new(T::one(), T::zero()))
    }

    pub fn with_symbol(power: T, symbol: Complex<T>) -> Result<Self> {
        if !(power > T::zero()) || !power.is_finite() {
            return Err(Error::config(
                "tx.power_w",
                format!("transmit power must be positive, got {power}"),
            ));
        }
        if (symbol.norm() - T::one()).abs() > T::lit(1e-6) {
            return Err(Error::config(
                "tx.symbol",
                format!(
                    "transmitted symbol must have unit magnitude, got |s| = {}",
                    symbol.norm()
                ),
            ));
        }
        Ok(Self { power, symbol })
    }
}

/// Receiver noise configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel<T> {
    sigma2_dbm: T,
    sigma2_watts: T,
    per_pa_noise: Option<Vec<T>>,
    pub convention: NoiseConvention,
}

/// Converts dBm to watts: `10^(x/10) / 1000`. `-inf` maps to zero.
pub fn dbm_to_watts<T: Scalar>(dbm: T) -> T {
    T::lit(10.0).powf(dbm / T::lit(10.0)) / T::lit(1000.0)
}

pub fn watts_to_dbm<T: Scalar>(watts: T) -> T {
    T::lit(10.0) * (watts * T::lit(1000.0)).log10()
}

impl<T: Scalar> NoiseModel<T> {
    /// Noise level given in dBm. `f64::NEG_INFINITY` yields a noiseless model.
    pub fn from_dbm(sigma2_dbm: T) -> Result<Self> {
        if sigma2_dbm.is_nan() || sigma2_dbm == T::infinity() {
            return Err(Error::config(
                "noise.sigma2_dbm",
                format!("noise level must be finite or -inf, got {sigma2_dbm}"),
            ));
        }
        Ok(Self {
            sigma2_dbm,
            sigma2_watts: dbm_to_watts(sigma2_dbm),
            per_pa_noise: None,
            convention: NoiseConvention::default(),
        })
    }

    pub fn from_watts(sigma2_watts: T) -> Result<Self> {
        if !(sigma2_watts >= T::zero()) || !sigma2_watts.is_finite() {
            return Err(Error::config(
                "noise.sigma2_w",
                format!("noise power must be >= 0, got {sigma2_watts}"),
            ));
        }
        Ok(Self {
            sigma2_dbm: watts_to_dbm(sigma2_watts),
            sigma2_watts,
            per_pa_noise: None,
            convention: NoiseConvention::default(),
        })
    }

    pub fn noiseless() -> Self {
        Self {
            sigma2_dbm: T::neg_infinity(),
            sigma2_watts: T::zero(),
            per_pa_noise: None,
            convention: NoiseConvention::default(),
        }
    }

    pub fn with_convention(mut self, convention: NoiseConvention) -> Self {
        self.convention = convention;
        self
    }

    /// Overrides the noise power `N_i` of each PA (watts).
    pub fn with_per_pa_noise(mut self, per_pa: Vec<T>) -> Result<Self> {
        if let Some(i) = per_pa
            .iter()
            .position(|n| !(*n >= T::zero()) || !n.is_finite())
        {
            return Err(Error::config(
                format!("noise.per_pa_w[{i}]"),
                "per-PA noise power must be >= 0",
            ));
        }
        self.per_pa_noise = Some(per_pa);
        Ok(self)
    }

    pub fn sigma2_dbm(&self) -> T {
        self.sigma2_dbm
    }

    pub fn sigma2_watts(&self) -> T {
        self.sigma2_watts
    }

    pub fn per_pa_noise(&self) -> Option<&[T]> {
        self.per_pa_noise.as_deref()
    }

    /// Noise power `N_i` seen through PA `pa_index`.
    pub fn noise_power(&self, pa_index: usize) -> T {
        self.per_pa_noise
            .as_ref()
            .and_then(|n| n.get(pa_index).copied())
            .unwrap_or(self.sigma2_watts)
    }

    /// Standard deviation of the power-domain perturbation at PA `pa_index`.
    pub fn power_std_dev(&self, pa_index: usize) -> T {
        let n = self.noise_power(pa_index);
        match self.convention {
            NoiseConvention::PowerVariance => n.sqrt(),
            NoiseConvention::PowerStdDev => n,
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.sigma2_watts == T::zero()
            && self
                .per_pa_noise
                .as_ref()
                .is_none_or(|n| n.iter().all(|v| *v == T::zero()))
    }
}

/// Free-space amplitude gain `c / (4 pi f_c d)`.
pub fn large_scale_gain<T: Scalar>(d: T, carrier: &CarrierConfig<T>) -> Result<T> {
    if !(d > T::zero()) {
        return Err(Error::domain(
            "large_scale_gain",
            format!("distance must be positive, got {d}"),
        ));
    }
    Ok(carrier.wavelength() / (T::lit(4.0) * T::PI() * d))
}

/// Free-space phase rotation `exp(-j 2 pi d / lambda)`.
pub fn small_scale_phase<T: Scalar>(d: T, carrier: &CarrierConfig<T>) -> Complex<T> {
    // reduce to one turn before scaling so whole wavelengths map to exactly 1
    let turns = (d / carrier.wavelength()).fract();
    Complex::from_polar(T::one(), -T::TAU() * turns)
}

/// Low-loss constants in the `k_r >> k_c` regime:
/// `alpha = pi sqrt(eps_r) tan_delta / lambda`, `beta = 2 pi sqrt(eps_r) / lambda`.
pub fn propagation_constants_approx<T: Scalar>(
    material: &WaveguideMaterial<T>,
    carrier: &CarrierConfig<T>,
) -> PropagationConstants<T> {
    let root = material.eps_r.sqrt();
    PropagationConstants {
        alpha: T::PI() * root * material.tan_delta / carrier.wavelength(),
        beta: T::TAU() * root / carrier.wavelength(),
    }
}

/// Low-loss constants with a finite cut-off:
/// `beta = sqrt(k_r^2 - k_c^2)`, `alpha = k_r^2 tan_delta / (2 beta)`.
pub fn propagation_constants_exact<T: Scalar>(
    material: &WaveguideMaterial<T>,
    carrier: &CarrierConfig<T>,
) -> Result<PropagationConstants<T>> {
    let k_r = material.real_wavenumber(carrier);
    let k_c = material.k_c;
    if !(k_r > k_c) {
        return Err(Error::Evanescent {
            k_r: k_r.to_f64_lossy(),
            k_c: k_c.to_f64_lossy(),
        });
    }
    let k_r2 = k_r * k_r;
    let beta = if k_c == T::zero() {
        k_r
    } else {
        (k_r2 - k_c * k_c).sqrt()
    };
    Ok(PropagationConstants {
        alpha: k_r2 * material.tan_delta / (T::lit(2.0) * beta),
        beta,
    })
}

/// Guide transfer factor `exp(-(alpha + j beta) y)` from PA at `y` to the AP.
pub fn waveguide_transfer<T: Scalar>(
    y: T,
    constants: &PropagationConstants<T>,
) -> Result<Complex<T>> {
    if !(y >= T::zero()) {
        return Err(Error::domain(
            "waveguide_transfer",
            format!("guide length must be >= 0, got {y}"),
        ));
    }
    Ok(Complex::from_polar(
        (-constants.alpha * y).exp(),
        -constants.beta * y,
    ))
}

/// One user-to-AP uplink through a single active PA.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel<T> {
    pub carrier: CarrierConfig<T>,
    pub constants: PropagationConstants<T>,
    pub tx: TxConfig<T>,
    /// Ceiling height (PA z-coordinate).
    pub height: T,
}

impl<T: Scalar> Channel<T> {
    /// `|c e^(-alpha y) / (4 pi f_c d)|^2 P_k`.
    pub fn noiseless_power(&self, pa_y: T, user: &UserPosition<T>) -> T {
        let d = distance_3d(pa_y, user, self.height);
        let amp = CarrierConfig::<T>::c() * (-self.constants.alpha * pa_y).exp()
            / (T::lit(4.0) * T::PI() * self.carrier.frequency() * d);
        amp * amp * self.tx.power
    }

    /// Received power with an additive real Gaussian perturbation drawn from `rng`.
    /// May be negative under heavy noise; ranging deals with that.
    pub fn received_power<R: Rng + ?Sized>(
        &self,
        pa_y: T,
        user: &UserPosition<T>,
        noise: &NoiseModel<T>,
        pa_index: usize,
        rng: &mut R,
    ) -> T {
        let clean = self.noiseless_power(pa_y, user);
        let std = noise.power_std_dev(pa_index);
        if std == T::zero() {
            return clean;
        }
        let z: f64 = rng.sample(StandardNormal);
        clean + std * T::lit(z)
    }

    /// Complex baseband sample `h_ls h_ss l(y) sqrt(P_k) s_k + n` with circular
    /// complex Gaussian noise of variance `N_i`.
    pub fn received_signal<R: Rng + ?Sized>(
        &self,
        pa_y: T,
        user: &UserPosition<T>,
        noise: &NoiseModel<T>,
        pa_index: usize,
        rng: &mut R,
    ) -> Result<Complex<T>> {
        let d = distance_3d(pa_y, user, self.height);
        let h_ls = large_scale_gain(d, &self.carrier)?;
        let h_ss = small_scale_phase(d, &self.carrier);
        let guide = waveguide_transfer(pa_y, &self.constants)?;
        let clean = h_ss * guide * self.tx.symbol * (h_ls * self.tx.power.sqrt());
        let var = noise.noise_power(pa_index);
        if var == T::zero() {
            return Ok(clean);
        }
        let scale = (var / T::lit(2.0)).sqrt();
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Ok(clean + Complex::new(T::lit(re), T::lit(im)) * scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::streams::StreamKey;

    fn carrier() -> CarrierConfig<f64> {
        CarrierConfig::new(2.8e9).unwrap()
    }

    fn teflon() -> WaveguideMaterial<f64> {
        WaveguideMaterial::new(2.08, 0.0004, 0.0).unwrap()
    }

    fn channel(alpha: f64, power: f64, h: f64) -> Channel<f64> {
        Channel {
            carrier: carrier(),
            constants: PropagationConstants {
                alpha,
                beta: 84.637,
            },
            tx: TxConfig {
                power,
                symbol: Complex::new(1.0, 0.0),
            },
            height: h,
        }
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn wavelength_is_c_over_f() {
        let c = carrier();
        assert_eq!(c.wavelength(), 299_792_458.0 / 2.8e9);
        assert!((c.wavelength() - 0.1070687).abs() < 1e-7);
        assert!(CarrierConfig::new(0.0f64).is_err());
    }

    #[test]
    fn large_scale_examples() {
        let c = carrier();
        let g1 = large_scale_gain(1.0, &c).unwrap();
        assert!((g1 - 0.0085202).abs() < 1e-7);
        assert_eq!(large_scale_gain(2.0, &c).unwrap(), g1 / 2.0);
        assert!((large_scale_gain(5.196152, &c).unwrap() - 0.0016397).abs() < 5e-8);
        assert!(large_scale_gain(0.0, &c).is_err());
        assert!(large_scale_gain(-1.0, &c).is_err());
    }

    #[test]
    fn small_scale_examples() {
        let c = carrier();
        let lam = c.wavelength();
        assert_eq!(small_scale_phase(0.0, &c), Complex::new(1.0, 0.0));
        let full = small_scale_phase(lam, &c);
        assert!((full - Complex::new(1.0, 0.0)).norm() < 1e-12);
        let half = small_scale_phase(lam / 2.0, &c);
        assert!((half - Complex::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn approx_constants_match_hand_values() {
        let k = propagation_constants_approx(&teflon(), &carrier());
        assert!(close(k.alpha, 0.016927, 1e-4));
        assert!(close(k.beta, 84.637, 1e-4));
        let lossless = WaveguideMaterial::new(2.08, 0.0, 0.0).unwrap();
        assert_eq!(
            propagation_constants_approx(&lossless, &carrier()).alpha,
            0.0
        );
    }

    #[test]
    fn exact_constants() {
        let c = carrier();
        let approx = propagation_constants_approx(&teflon(), &c);
        let exact = propagation_constants_exact(&teflon(), &c).unwrap();
        assert!(close(exact.alpha, approx.alpha, 1e-12));
        assert!(close(exact.beta, approx.beta, 1e-12));

        let k_r = teflon().real_wavenumber(&c);
        let m = WaveguideMaterial::new(2.08, 0.0004, 0.1 * k_r).unwrap();
        let k = propagation_constants_exact(&m, &c).unwrap();
        assert!(close(k.beta, k_r * 0.99f64.sqrt(), 1e-12));
        assert!(close(k.alpha, k_r * k_r * 0.0004 / (2.0 * k.beta), 1e-12));

        let cut = WaveguideMaterial::new(2.08, 0.0004, k_r).unwrap();
        assert!(matches!(
            propagation_constants_exact(&cut, &c),
            Err(Error::Evanescent { .. })
        ));
        let cut = WaveguideMaterial::new(2.08, 0.0004, 2.0 * k_r).unwrap();
        assert!(propagation_constants_exact(&cut, &c).is_err());
    }

    #[test]
    fn si_wavenumber_close_to_wavelength_form() {
        let c = carrier();
        let m = teflon();
        assert!(close(m.real_wavenumber_si(&c), m.real_wavenumber(&c), 1e-9));
    }

    #[test]
    fn low_loss_form_tracks_complex_root() {
        // gamma^2 = k_c^2 - k_r^2 (1 - j tan_delta); principal root has alpha, beta > 0
        let c = carrier();
        for k_c_frac in [0.0, 0.3, 0.7] {
            let k_r = teflon().real_wavenumber(&c);
            let m = WaveguideMaterial::new(2.08, 0.0004, k_c_frac * k_r).unwrap();
            let g2 = Complex::new(m.k_c * m.k_c - k_r * k_r, k_r * k_r * m.tan_delta);
            let g = g2.sqrt();
            let k = propagation_constants_exact(&m, &c).unwrap();
            assert!(close(k.alpha, g.re, 1e-6), "{} vs {}", k.alpha, g.re);
            assert!(close(k.beta, g.im, 1e-6));
        }
    }

    #[test]
    fn material_validation() {
        assert!(WaveguideMaterial::new(0.5, 0.0, 0.0f64).is_err());
        assert!(WaveguideMaterial::new(2.0, 0.2, 0.0f64).is_err());
        assert!(WaveguideMaterial::new(2.0, -0.01, 0.0f64).is_err());
        assert!(WaveguideMaterial::new(2.0, 0.0, -1.0f64).is_err());
    }

    #[test]
    fn waveguide_transfer_examples() {
        let k = PropagationConstants {
            alpha: 0.016927f64,
            beta: 84.637,
        };
        assert_eq!(waveguide_transfer(0.0, &k).unwrap(), Complex::new(1.0, 0.0));
        let mag = waveguide_transfer(5.0, &k).unwrap().norm();
        assert!((mag - (-0.084635f64).exp()).abs() < 1e-15);
        assert!((mag - 0.91886).abs() < 2e-5);
        let lossless = PropagationConstants {
            alpha: 0.0f64,
            beta: 84.637,
        };
        for y in [0.3, 2.0, 9.9] {
            assert!((waveguide_transfer(y, &lossless).unwrap().norm() - 1.0).abs() < 1e-15);
        }
        assert!(waveguide_transfer(-1.0, &k).is_err());
    }

    #[test]
    fn received_power_examples() {
        let alpha = propagation_constants_approx(&teflon(), &carrier()).alpha;
        let ch = channel(alpha, 0.1, 3.0);
        let lam = 299_792_458.0 / 2.8e9;
        let scalar = |y: f64, d: f64| {
            let amp = lam * (-alpha * y).exp() / (4.0 * std::f64::consts::PI * d);
            amp * amp * 0.1
        };
        // PA directly above the user's y: d = sqrt(3^2 + 3^2)
        let p = ch.noiseless_power(5.0, &UserPosition::new(3.0, 5.0));
        assert!(close(p, scalar(5.0, 18f64.sqrt()), 1e-13));
        // guide length 5 m with d = sqrt(27), the pairing the ranging oracle inverts
        let p = ch.noiseless_power(5.0, &UserPosition::new(3.0, 8.0));
        assert!(close(p, scalar(5.0, 27f64.sqrt()), 1e-13));
        assert!((p - 2.2701e-7).abs() < 1e-11);

        let ch = channel(0.0, 1.0, 1.0);
        let p = ch.noiseless_power(0.0, &UserPosition::new(0.0, 0.0));
        assert!((p - 7.2594e-5).abs() < 1e-9);

        let ch = channel(alpha, 0.0, 3.0);
        assert_eq!(ch.noiseless_power(2.0, &UserPosition::new(1.0, 1.0)), 0.0);
    }

    #[test]
    fn noiseless_power_matches_signal_path() {
        let c = carrier();
        let consts = propagation_constants_approx(&teflon(), &c);
        let ch = Channel {
            carrier: c,
            constants: consts,
            tx: TxConfig::new(0.1).unwrap(),
            height: 3.0,
        };
        let noise = NoiseModel::noiseless();
        let mut rng = StreamKey::default().rng();
        for (pa_y, user) in [(0.0, (0.0, 0.0)), (2.0, (3.0, 5.0)), (9.5, (6.0, 0.2))] {
            let user = UserPosition::new(user.0, user.1);
            let r = ch
                .received_signal(pa_y, &user, &noise, 0, &mut rng)
                .unwrap();
            let d = distance_3d(pa_y, &user, 3.0);
            let via_parts = large_scale_gain(d, &c).unwrap()
                * waveguide_transfer(pa_y, &consts).unwrap().norm();
            let p = ch.noiseless_power(pa_y, &user);
            assert!(close(r.norm_sqr(), p, 1e-12));
            assert!(close(via_parts * via_parts * 0.1, p, 1e-12));
        }
        // user beneath the AP-end PA: unit guide factor
        let r = ch
            .received_signal(0.0, &UserPosition::new(0.0, 0.0), &noise, 0, &mut rng)
            .unwrap();
        let expect = c.wavelength() / (4.0 * std::f64::consts::PI * 3.0) * 0.1f64.sqrt();
        assert!(close(r.norm(), expect, 1e-12));
    }

    #[test]
    fn noisy_draws_are_reproducible() {
        let c = carrier();
        let ch = Channel {
            carrier: c,
            constants: propagation_constants_approx(&teflon(), &c),
            tx: TxConfig::new(0.1).unwrap(),
            height: 3.0,
        };
        let noise = NoiseModel::from_dbm(-90.0).unwrap();
        let u = UserPosition::new(3.0, 5.0);
        let key = StreamKey::new(9, 0, 1, 2);
        let a = ch.received_power(2.0, &u, &noise, 0, &mut key.rng());
        let b = ch.received_power(2.0, &u, &noise, 0, &mut key.rng());
        assert_eq!(a.to_bits(), b.to_bits());
        let sa = ch
            .received_signal(2.0, &u, &noise, 0, &mut key.rng())
            .unwrap();
        let sb = ch
            .received_signal(2.0, &u, &noise, 0, &mut key.rng())
            .unwrap();
        assert_eq!(sa, sb);
    }

    #[test]
    fn noisy_power_mean_converges() {
        let c = carrier();
        let ch = Channel {
            carrier: c,
            constants: propagation_constants_approx(&teflon(), &c),
            tx: TxConfig::new(0.1).unwrap(),
            height: 3.0,
        };
        let noise = NoiseModel::from_dbm(-100.0).unwrap();
        let u = UserPosition::new(3.0, 5.0);
        let n = 20_000u64;
        let sum: f64 = (0..n)
            .map(|t| ch.received_power(5.0, &u, &noise, 0, &mut StreamKey::new(1, 0, t, 0).rng()))
            .sum();
        let mean = sum / n as f64;
        let sigma = noise.power_std_dev(0);
        let clean = ch.noiseless_power(5.0, &u);
        assert!((mean - clean).abs() < 3.0 * sigma / (n as f64).sqrt());
    }

    #[test]
    fn dbm_conversion() {
        assert!(close(dbm_to_watts(-40.0), 1e-7, 1e-12));
        assert!(close(dbm_to_watts(30.0), 1.0, 1e-12));
        assert_eq!(dbm_to_watts(f64::NEG_INFINITY), 0.0);
        let n = NoiseModel::from_dbm(-40.0f64).unwrap();
        assert!(close(n.power_std_dev(0), 1e-7f64.sqrt(), 1e-12));
        let n = n.with_convention(NoiseConvention::PowerStdDev);
        assert!(close(n.power_std_dev(0), 1e-7, 1e-12));
        assert!(NoiseModel::from_dbm(f64::NEG_INFINITY)
            .unwrap()
            .is_noiseless());
        assert!(NoiseModel::from_dbm(f64::NAN).is_err());
    }

    #[test]
    fn per_pa_noise_overrides_default() {
        let n = NoiseModel::from_dbm(-40.0f64)
            .unwrap()
            .with_per_pa_noise(vec![1e-9, 4e-9])
            .unwrap();
        assert_eq!(n.noise_power(0), 1e-9);
        assert_eq!(n.noise_power(1), 4e-9);
        assert!(close(n.noise_power(2), 1e-7, 1e-12));
        assert!(NoiseModel::<f64>::noiseless()
            .with_per_pa_noise(vec![-1.0])
            .is_err());
    }

    #[test]
    fn tx_validation() {
        assert!(TxConfig::new(0.0f64).is_err());
        assert!(TxConfig::with_symbol(1.0f64, Complex::new(0.5, 0.0)).is_err());
        let s = Complex::from_polar(1.0, 0.7);
        assert!(TxConfig::with_symbol(1.0f64, s).is_ok());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn phase_has_unit_magnitude(d in 0.0..1e3f64) {
                prop_assert!((small_scale_phase(d, &carrier()).norm() - 1.0).abs() < 1e-12);
            }

            #[test]
            fn gain_ratio_is_inverse_distance_ratio(a in 0.01..100.0f64, b in 0.01..100.0f64) {
                let c = carrier();
                let r = large_scale_gain(a, &c).unwrap() / large_scale_gain(b, &c).unwrap();
                prop_assert!((r - b / a).abs() <= 1e-13 * (b / a));
            }

            #[test]
            fn guide_magnitude_strictly_decreasing(y in 0.0..50.0f64, dy in 0.01..5.0f64) {
                let k = PropagationConstants { alpha: 0.016927, beta: 84.637 };
                let m0 = waveguide_transfer(y, &k).unwrap().norm();
                let m1 = waveguide_transfer(y + dy, &k).unwrap().norm();
                prop_assert!(m1 < m0 && m0 <= 1.0 && m1 > 0.0);
            }
        }
    }
}
