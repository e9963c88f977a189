use std::fs;
use std::path::PathBuf;

use pass_positioning::ranging::collect_measurements;
use pass_positioning::simulation::{heatmap, monte_carlo, noise_sweep};
use pass_positioning::solver::{locate, WeightSpec};
use pass_positioning::{StreamKey, UserPosition};
use serde::Serialize;

use crate::config::ConfigFile;
use crate::output::{
    heatmap_table, montecarlo_table, sweep_table, write_json, HeatmapRow, MonteCarloRow, SweepRow,
};
use crate::CliError;

pub const MANIFEST_FILE: &str = "run_manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Localize one user from one set of measurements.
    Locate,
    /// Error statistics over a grid of noise levels and PA counts.
    Sweep,
    /// Per-trial errors and summary statistics for the configured layout.
    Montecarlo,
    /// Spatial error map over a grid of user positions.
    Heatmap,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    /// Written files, manifest last.
    pub files: Vec<PathBuf>,
    /// Human-readable result for stdout.
    pub summary: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: Command,
    master_seed: u64,
    files: Vec<String>,
    summary: serde_json::Value,
    /// Fully resolved configuration; `config_toml` is the lossless form
    /// (JSON cannot hold `-inf`).
    config: &'a ConfigFile,
    config_toml: String,
}

#[derive(Serialize)]
struct Point {
    x: f64,
    y: f64,
}

#[derive(Serialize)]
struct EstimateRecord {
    x: f64,
    y: f64,
    v_hat: f64,
    residual_norm: f64,
    v_clamped: bool,
}

#[derive(Serialize)]
struct MeasurementRecord {
    pa_index: usize,
    pa_y: f64,
    received_power_w: f64,
    effective_power_w: f64,
    estimated_distance_m: f64,
    clamped: bool,
}

#[derive(Serialize)]
struct LocateRecord {
    user_index: usize,
    trial: u64,
    truth: Point,
    estimate: EstimateRecord,
    error_m: f64,
    measurements: Vec<MeasurementRecord>,
}

/// Runs `command` for an already merged configuration and writes its outputs.
pub fn run_command(command: Command, config: &ConfigFile) -> Result<RunOutcome, CliError> {
    let resolved = config.resolved()?;
    let (scenario, run) = resolved.resolve()?;
    let dir = run.output_dir.clone();
    fs::create_dir_all(&dir).map_err(|source| CliError::Io {
        path: dir.clone(),
        source,
    })?;

    let mut files = Vec::new();
    let (summary, summary_json) = match command {
        Command::Locate => {
            let key = StreamKey::new(scenario.master_seed, run.user as u64, run.trial, 0);
            let measurements = collect_measurements(&scenario, run.user, key)?;
            let weights = WeightSpec::from_noise(
                scenario.estimator.weights,
                &scenario.noise,
                scenario.pa_layout.len(),
            );
            let est = locate(&measurements, scenario.room.h, &weights)?;
            let truth = scenario.users[run.user];
            let error = UserPosition::new(est.x, est.y).planar_distance(&truth);
            let record = LocateRecord {
                user_index: run.user,
                trial: run.trial,
                truth: Point {
                    x: truth.x,
                    y: truth.y,
                },
                estimate: EstimateRecord {
                    x: est.x,
                    y: est.y,
                    v_hat: est.v_hat,
                    residual_norm: est.residual_norm,
                    v_clamped: est.v_clamped,
                },
                error_m: error,
                measurements: measurements
                    .iter()
                    .map(|m| MeasurementRecord {
                        pa_index: m.pa_index,
                        pa_y: m.pa_y,
                        received_power_w: m.received_power,
                        effective_power_w: m.effective_power,
                        estimated_distance_m: m.estimated_distance,
                        clamped: m.clamped,
                    })
                    .collect(),
            };
            let path = dir.join("locate.json");
            write_json(&path, &record)?;
            files.push(path);
            (
                format!(
                    "estimate x = {:.12} m, y = {:.12} m; truth ({}, {}); error = {:e} m",
                    est.x, est.y, truth.x, truth.y, error
                ),
                serde_json::json!({ "x": est.x, "y": est.y, "error_m": error }),
            )
        }
        Command::Sweep => {
            let sweep = noise_sweep(
                &scenario,
                run.user,
                &run.noise_levels_dbm,
                &run.pa_counts,
                run.sweep_trials,
            )?;
            let rows: Vec<SweepRow> = sweep
                .points
                .iter()
                .map(|p| SweepRow {
                    noise_dbm: p.noise_dbm,
                    pa_count: p.pa_count,
                    trials: p.trials,
                    mean_error_m: p.mean_error,
                    variance_m2: p.variance,
                })
                .collect();
            let n = rows.len();
            files.push(sweep_table(rows).write(&dir, run.format)?);
            (
                format!("sweep: {n} points x {} trials", sweep.trials),
                serde_json::json!({ "points": n, "trials": sweep.trials }),
            )
        }
        Command::Montecarlo => {
            let mc = monte_carlo(&scenario, run.user, run.trials)?;
            let rows: Vec<MonteCarloRow> = mc
                .trials
                .iter()
                .map(|t| MonteCarloRow {
                    trial: t.trial_index,
                    error_m: t.error,
                    x_hat: t.estimate.x,
                    y_hat: t.estimate.y,
                    clamped: t.clamped_measurements > 0 || t.estimate.v_clamped,
                })
                .collect();
            files.push(montecarlo_table(rows).write(&dir, run.format)?);
            (
                format!(
                    "montecarlo: I = {}, {} trials, mean error = {:.6} m, variance = {:.6} m^2",
                    mc.pa_count,
                    mc.trials.len(),
                    mc.mean_error,
                    mc.variance
                ),
                serde_json::json!({
                    "pa_count": mc.pa_count,
                    "trials": mc.trials.len(),
                    "mean_error_m": mc.mean_error,
                    "variance_m2": mc.variance,
                }),
            )
        }
        Command::Heatmap => {
            let [nx, ny] = run.grid;
            let grid = heatmap(&scenario, nx, ny, run.trials_per_cell)?;
            let rows: Vec<HeatmapRow> = grid
                .cells
                .iter()
                .map(|c| HeatmapRow {
                    x_m: c.x,
                    y_m: c.y,
                    mean_error_m: c.mean_error,
                    normalized_error: c.normalized_error,
                })
                .collect();
            files.push(heatmap_table(rows).write(&dir, run.format)?);
            (
                format!(
                    "heatmap: {nx} x {ny} cells, {} trials per cell, max mean error = {:.6} m",
                    run.trials_per_cell,
                    grid.max_mean_error()
                ),
                serde_json::json!({ "nx": nx, "ny": ny, "trials_per_cell": run.trials_per_cell, "max_mean_error_m": grid.max_mean_error() }),
            )
        }
    };

    let manifest_path = dir.join(MANIFEST_FILE);
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        master_seed: scenario.master_seed,
        files: files
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect(),
        summary: summary_json,
        config: &resolved,
        config_toml: toml::to_string(&resolved).map_err(|e| CliError::Serialize(e.to_string()))?,
    };
    write_json(&manifest_path, &manifest)?;
    files.push(manifest_path);
    Ok(RunOutcome { files, summary })
}
