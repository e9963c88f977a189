//! TOML run configuration.
//!
//! Every key is optional; missing keys fall back to the reference parameter
//! set. Unknown keys are rejected so typos do not silently use defaults.

use std::path::PathBuf;

use pass_positioning::{
    defaults, geometry::place_pas, CarrierConfig, EstimatorOptions, LowPowerPolicy,
    NoiseConvention, NoiseModel, PaLayout, PlacementRule, Room, Scenario, TxConfig, UserPosition,
    WaveguideMaterial, WeightMode,
};
use serde::{Deserialize, Serialize};

use crate::ConfigError;

pub const DEFAULT_MC_TRIALS: usize = 1000;
pub const DEFAULT_SWEEP_TRIALS: usize = 200;
pub const DEFAULT_TRIALS_PER_CELL: usize = 50;
pub const DEFAULT_GRID: [usize; 2] = [60, 100];
pub const DEFAULT_NOISE_LEVELS_DBM: [f64; 7] = [-60.0, -55.0, -50.0, -45.0, -40.0, -35.0, -30.0];
pub const DEFAULT_PA_COUNTS: [usize; 5] = [2, 3, 5, 7, 10];
pub const DEFAULT_OUTPUT_DIR: &str = "out";
/// Environment variable that replaces [`DEFAULT_OUTPUT_DIR`].
pub const OUTPUT_DIR_ENV: &str = "PASSLOC_OUTPUT_DIR";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub room: RoomSection,
    #[serde(default)]
    pub waveguide: WaveguideSection,
    #[serde(default)]
    pub pas: PaSection,
    #[serde(default)]
    pub users: UserSection,
    #[serde(default)]
    pub tx: TxSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoomSection {
    pub d1: Option<f64>,
    pub d2: Option<f64>,
    pub h: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveguideSection {
    pub eps_r: Option<f64>,
    pub tan_delta: Option<f64>,
    pub k_c: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PaSection {
    pub count: Option<usize>,
    pub placement: Option<Placement>,
    /// Explicit PA coordinates; overrides `count`/`placement`.
    pub positions: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    Midpoint,
    Endpoints,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserSection {
    pub positions: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TxSection {
    pub power_w: Option<f64>,
    pub carrier_hz: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    /// Noise power in dBm; `-inf` means noiseless.
    pub sigma2_dbm: Option<f64>,
    /// Noise power in watts, alternative to `sigma2_dbm`.
    pub sigma2_w: Option<f64>,
    pub convention: Option<Convention>,
    pub per_pa_w: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    PowerVariance,
    PowerStdDev,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub seed: Option<u64>,
    /// Monte-Carlo trial count.
    pub trials: Option<usize>,
    /// Trials per sweep point.
    pub sweep_trials: Option<usize>,
    pub noise_levels_dbm: Option<Vec<f64>>,
    pub pa_counts: Option<Vec<usize>>,
    /// Heatmap grid `[nx, ny]`.
    pub grid: Option<[usize; 2]>,
    pub trials_per_cell: Option<usize>,
    /// User index for `locate`, `montecarlo` and `sweep`.
    pub user: Option<usize>,
    /// Trial index used by `locate`.
    pub trial: Option<u64>,
    pub weights: Option<Weights>,
    pub low_power: Option<LowPower>,
    pub power_floor_w: Option<f64>,
    pub output_dir: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weights {
    Snr,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LowPower {
    Clamp,
    Discard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Experiment parameters that are not part of the physical scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub trials: usize,
    pub sweep_trials: usize,
    pub noise_levels_dbm: Vec<f64>,
    pub pa_counts: Vec<usize>,
    pub grid: [usize; 2],
    pub trials_per_cell: usize,
    pub user: usize,
    pub trial: u64,
    pub output_dir: PathBuf,
    pub format: OutputFormat,
}

impl ConfigFile {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    /// Copy with every default made explicit. Feeding the result back through
    /// [`ConfigFile::resolve`] reproduces the same run.
    pub fn resolved(&self) -> Result<ConfigFile, ConfigError> {
        let (scenario, run) = self.resolve()?;
        let noise = &scenario.noise;
        let noise_section = if self.noise.sigma2_w.is_some() {
            NoiseSection {
                sigma2_dbm: None,
                sigma2_w: Some(noise.sigma2_watts()),
                ..NoiseSection::default()
            }
        } else {
            NoiseSection {
                sigma2_dbm: Some(noise.sigma2_dbm()),
                sigma2_w: None,
                ..NoiseSection::default()
            }
        };
        Ok(ConfigFile {
            room: RoomSection {
                d1: Some(scenario.room.d1),
                d2: Some(scenario.room.d2),
                h: Some(scenario.room.h),
            },
            waveguide: WaveguideSection {
                eps_r: Some(scenario.material.eps_r),
                tan_delta: Some(scenario.material.tan_delta),
                k_c: Some(scenario.material.k_c),
            },
            pas: PaSection {
                count: Some(scenario.pa_layout.len()),
                placement: Some(match scenario.placement {
                    PlacementRule::Midpoint => Placement::Midpoint,
                    PlacementRule::Endpoints => Placement::Endpoints,
                }),
                positions: Some(scenario.pa_layout.positions().to_vec()),
            },
            users: UserSection {
                positions: Some(scenario.users.iter().map(|u| [u.x, u.y]).collect()),
            },
            tx: TxSection {
                power_w: Some(scenario.tx.power),
                carrier_hz: Some(scenario.carrier.frequency()),
            },
            noise: NoiseSection {
                convention: Some(match noise.convention {
                    NoiseConvention::PowerVariance => Convention::PowerVariance,
                    NoiseConvention::PowerStdDev => Convention::PowerStdDev,
                }),
                per_pa_w: noise.per_pa_noise().map(<[f64]>::to_vec),
                ..noise_section
            },
            run: RunSection {
                seed: Some(run.seed),
                trials: Some(run.trials),
                sweep_trials: Some(run.sweep_trials),
                noise_levels_dbm: Some(run.noise_levels_dbm.clone()),
                pa_counts: Some(run.pa_counts.clone()),
                grid: Some(run.grid),
                trials_per_cell: Some(run.trials_per_cell),
                user: Some(run.user),
                trial: Some(run.trial),
                weights: Some(match scenario.estimator.weights {
                    WeightMode::Snr => Weights::Snr,
                    WeightMode::Uniform => Weights::Uniform,
                }),
                low_power: Some(match scenario.estimator.low_power {
                    LowPowerPolicy::Clamp => LowPower::Clamp,
                    LowPowerPolicy::Discard => LowPower::Discard,
                }),
                power_floor_w: Some(scenario.estimator.power_floor),
                output_dir: Some(run.output_dir.clone()),
                format: Some(run.format),
            },
        })
    }

    /// Validates the document and builds the scenario plus run parameters.
    pub fn resolve(&self) -> Result<(Scenario<f64>, RunConfig), ConfigError> {
        let room = Room::new(
            self.room.d1.unwrap_or(defaults::ROOM_D1),
            self.room.d2.unwrap_or(defaults::ROOM_D2),
            self.room.h.unwrap_or(defaults::ROOM_H),
        )?;

        let placement = match self.pas.placement.unwrap_or(Placement::Midpoint) {
            Placement::Midpoint => PlacementRule::Midpoint,
            Placement::Endpoints => PlacementRule::Endpoints,
        };
        let pa_layout = match &self.pas.positions {
            Some(p) => {
                if let Some(count) = self.pas.count {
                    if count != p.len() {
                        return Err(ConfigError::invalid(
                            "pas.count",
                            format!("{count} disagrees with the {} explicit positions", p.len()),
                        ));
                    }
                }
                PaLayout::new(p.clone(), &room)?
            }
            None => place_pas(
                &room,
                self.pas.count.unwrap_or(defaults::PA_COUNT),
                placement,
            )?,
        };

        let users = match &self.users.positions {
            Some(p) => p.iter().map(|[x, y]| UserPosition::new(*x, *y)).collect(),
            None => vec![room.center()],
        };

        let carrier = CarrierConfig::new(self.tx.carrier_hz.unwrap_or(defaults::CARRIER_HZ))?;
        let material = WaveguideMaterial::new(
            self.waveguide.eps_r.unwrap_or(defaults::EPS_R),
            self.waveguide.tan_delta.unwrap_or(defaults::TAN_DELTA),
            self.waveguide.k_c.unwrap_or(0.0),
        )?;
        let tx = TxConfig::new(self.tx.power_w.unwrap_or(defaults::TX_POWER_W))?;

        let mut noise = match (self.noise.sigma2_dbm, self.noise.sigma2_w) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::invalid(
                    "noise.sigma2_w",
                    "give either noise.sigma2_dbm or noise.sigma2_w, not both",
                ))
            }
            (Some(dbm), None) => NoiseModel::from_dbm(dbm)?,
            (None, Some(w)) => NoiseModel::from_watts(w)?,
            (None, None) => NoiseModel::from_dbm(defaults::NOISE_DBM)?,
        };
        noise.convention = match self.noise.convention.unwrap_or(Convention::PowerVariance) {
            Convention::PowerVariance => NoiseConvention::PowerVariance,
            Convention::PowerStdDev => NoiseConvention::PowerStdDev,
        };
        if let Some(per_pa) = &self.noise.per_pa_w {
            noise = noise.with_per_pa_noise(per_pa.clone())?;
        }

        let mut estimator = EstimatorOptions::default();
        if let Some(w) = self.run.weights {
            estimator.weights = match w {
                Weights::Snr => WeightMode::Snr,
                Weights::Uniform => WeightMode::Uniform,
            };
        }
        if let Some(p) = self.run.low_power {
            estimator.low_power = match p {
                LowPower::Clamp => LowPowerPolicy::Clamp,
                LowPower::Discard => LowPowerPolicy::Discard,
            };
        }
        if let Some(f) = self.run.power_floor_w {
            estimator.power_floor = f;
        }

        let seed = self.run.seed.unwrap_or(defaults::MASTER_SEED);
        let scenario = Scenario {
            room,
            pa_layout,
            placement,
            users,
            carrier,
            material,
            tx,
            noise,
            estimator,
            master_seed: seed,
        };
        scenario.validate()?;

        let run = RunConfig {
            seed,
            trials: self.run.trials.unwrap_or(DEFAULT_MC_TRIALS),
            sweep_trials: self.run.sweep_trials.unwrap_or(DEFAULT_SWEEP_TRIALS),
            noise_levels_dbm: self
                .run
                .noise_levels_dbm
                .clone()
                .unwrap_or_else(|| DEFAULT_NOISE_LEVELS_DBM.to_vec()),
            pa_counts: self
                .run
                .pa_counts
                .clone()
                .unwrap_or_else(|| DEFAULT_PA_COUNTS.to_vec()),
            grid: self.run.grid.unwrap_or(DEFAULT_GRID),
            trials_per_cell: self.run.trials_per_cell.unwrap_or(DEFAULT_TRIALS_PER_CELL),
            user: self.run.user.unwrap_or(0),
            trial: self.run.trial.unwrap_or(0),
            output_dir: self
                .run
                .output_dir
                .clone()
                .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
            format: self.run.format.unwrap_or_default(),
        };
        run.validate(&scenario)?;
        Ok((scenario, run))
    }
}

impl RunConfig {
    fn validate(&self, scenario: &Scenario<f64>) -> Result<(), ConfigError> {
        if self.trials < 2 {
            return Err(ConfigError::invalid(
                "run.trials",
                "Monte-Carlo needs at least 2 trials",
            ));
        }
        if self.sweep_trials < 1 {
            return Err(ConfigError::invalid(
                "run.sweep_trials",
                "must be at least 1",
            ));
        }
        if self.trials_per_cell < 1 {
            return Err(ConfigError::invalid(
                "run.trials_per_cell",
                "must be at least 1",
            ));
        }
        if self.grid[0] < 2 || self.grid[1] < 2 {
            return Err(ConfigError::invalid(
                "run.grid",
                format!(
                    "grid must be at least 2 x 2, got {} x {}",
                    self.grid[0], self.grid[1]
                ),
            ));
        }
        if let Some(c) = self.pa_counts.iter().find(|&&c| c < 2) {
            return Err(ConfigError::invalid(
                "run.pa_counts",
                format!("PA count {c} is below the minimum of 2"),
            ));
        }
        if let Some(n) = self
            .noise_levels_dbm
            .iter()
            .find(|n| n.is_nan() || **n == f64::INFINITY)
        {
            return Err(ConfigError::invalid(
                "run.noise_levels_dbm",
                format!("noise level {n} must be finite or -inf"),
            ));
        }
        if self.user >= scenario.users.len() {
            return Err(ConfigError::invalid(
                "run.user",
                format!(
                    "user index {} out of range ({} users)",
                    self.user,
                    scenario.users.len()
                ),
            ));
        }
        Ok(())
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<(Scenario<f64>, RunConfig), ConfigError> {
    ConfigFile::from_toml(text)?.resolve()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key_of(err: ConfigError) -> String {
        match err {
            ConfigError::Invalid { key, .. } => key,
            other => panic!("expected an invalid-key error, got {other:?}"),
        }
    }

    #[test]
    fn empty_document_gives_reference_scenario() {
        let (s, run) = parse_config("").unwrap();
        assert_eq!(s, Scenario::reference());
        assert_eq!(run.trials, 1000);
        let (s2, _) = parse_config("[room]\n[waveguide]\n[noise]\n").unwrap();
        assert_eq!(s2, s);
    }

    #[test]
    fn negative_room_dimension_names_key() {
        let err = parse_config("[room]\nd2 = -1.0\n").unwrap_err();
        assert_eq!(key_of(err), "room.d2");
    }

    #[test]
    fn single_pa_rejected() {
        let err = parse_config("[pas]\ncount = 1\n").unwrap_err();
        let msg = err.to_string();
        assert_eq!(key_of(err), "pas.count");
        assert!(msg.contains("at least 2"), "{msg}");
    }

    #[test]
    fn explicit_positions_and_users() {
        let (s, _) = parse_config(
            "[pas]\npositions = [2.0, 8.0]\n[users]\npositions = [[3.0, 5.0], [1.0, 1.0]]\n[noise]\nsigma2_dbm = -inf\n",
        )
        .unwrap();
        assert_eq!(s.pa_layout.positions(), &[2.0, 8.0]);
        assert_eq!(s.users.len(), 2);
        assert!(s.noise.is_noiseless());
    }

    #[test]
    fn malformed_and_unknown_keys() {
        assert!(matches!(
            parse_config("[room\n"),
            Err(ConfigError::Parse(_))
        ));
        let err = parse_config("[room]\nwidth = 3.0\n").unwrap_err();
        assert!(err.to_string().contains("width"), "{err}");
        let err = parse_config("[pas]\ncount = \"three\"\n").unwrap_err();
        assert!(err.to_string().contains("count"), "{err}");
    }

    #[test]
    fn user_outside_room_rejected() {
        let err = parse_config("[users]\npositions = [[7.0, 1.0]]\n").unwrap_err();
        assert_eq!(key_of(err), "users.positions[0]");
    }

    #[test]
    fn conflicting_noise_keys() {
        let err = parse_config("[noise]\nsigma2_dbm = -40.0\nsigma2_w = 1e-7\n").unwrap_err();
        assert_eq!(key_of(err), "noise.sigma2_w");
    }

    #[test]
    fn resolved_config_reproduces_scenario() {
        let text = "[pas]\ncount = 4\nplacement = \"endpoints\"\n[noise]\nsigma2_dbm = -90.0\nconvention = \"power_std_dev\"\n[run]\nseed = 7\nweights = \"uniform\"\n";
        let cfg = ConfigFile::from_toml(text).unwrap();
        let resolved = cfg.resolved().unwrap();
        let again = toml::to_string(&resolved).unwrap();
        let (a, ra) = cfg.resolve().unwrap();
        let (b, rb) = parse_config(&again).unwrap();
        assert_eq!(a, b);
        assert_eq!(ra, rb);
    }

    #[test]
    fn run_section_validation() {
        assert_eq!(
            key_of(parse_config("[run]\ntrials = 1\n").unwrap_err()),
            "run.trials"
        );
        assert_eq!(
            key_of(parse_config("[run]\ngrid = [1, 5]\n").unwrap_err()),
            "run.grid"
        );
        assert_eq!(
            key_of(parse_config("[run]\npa_counts = [2, 1]\n").unwrap_err()),
            "run.pa_counts"
        );
        assert_eq!(
            key_of(parse_config("[run]\nuser = 3\n").unwrap_err()),
            "run.user"
        );
    }
}
