use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use pass_cli::config::ConfigFile;
use pass_cli::{run_command, Command, OutputFormat};

/// PASS uplink positioning experiments.
#[derive(Debug, Parser)]
#[command(name = "passloc", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,

    /// TOML scenario file; omitted keys take reference defaults.
    #[arg(short, long)]
    config: Option<PathBuf>,

    #[arg(long)]
    seed: Option<u64>,

    /// Output directory (falls back to the config file, then $PASSLOC_OUTPUT_DIR, then ./out).
    #[arg(short, long)]
    output_dir: Option<PathBuf>,

    #[arg(long, value_enum)]
    format: Option<OutputFormat>,

    /// Noise power in dBm (overrides noise.sigma2_dbm).
    #[arg(long, allow_hyphen_values = true)]
    noise_dbm: Option<f64>,

    /// Disable measurement noise.
    #[arg(long, conflicts_with = "noise_dbm")]
    noiseless: bool,

    /// Number of evenly placed PAs (replaces any explicit positions).
    #[arg(long)]
    pa_count: Option<usize>,

    /// Monte-Carlo trial count.
    #[arg(long)]
    trials: Option<usize>,

    /// Trials per sweep point.
    #[arg(long)]
    sweep_trials: Option<usize>,

    /// Sweep noise levels in dBm, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    noise_levels: Option<Vec<f64>>,

    /// Sweep PA counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    pa_counts: Option<Vec<usize>>,

    /// Heatmap grid as NX,NY.
    #[arg(long, value_delimiter = ',', value_name = "NX,NY")]
    grid: Option<Vec<usize>>,

    #[arg(long)]
    trials_per_cell: Option<usize>,

    /// User index.
    #[arg(long)]
    user: Option<usize>,

    /// Trial index for `locate`.
    #[arg(long)]
    trial: Option<u64>,

    /// Worker threads for trial execution (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

impl Cli {
    fn merged_config(&self) -> anyhow::Result<ConfigFile> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                ConfigFile::from_toml(&text)?
            }
            None => ConfigFile::default(),
        };
        let run = &mut cfg.run;
        if self.seed.is_some() {
            run.seed = self.seed;
        }
        if self.output_dir.is_some() {
            run.output_dir = self.output_dir.clone();
        }
        if self.format.is_some() {
            run.format = self.format;
        }
        if self.trials.is_some() {
            run.trials = self.trials;
        }
        if self.sweep_trials.is_some() {
            run.sweep_trials = self.sweep_trials;
        }
        if self.noise_levels.is_some() {
            run.noise_levels_dbm = self.noise_levels.clone();
        }
        if self.pa_counts.is_some() {
            run.pa_counts = self.pa_counts.clone();
        }
        if let Some(g) = &self.grid {
            let [nx, ny] = g[..] else {
                anyhow::bail!("--grid expects two values NX,NY, got {}", g.len());
            };
            run.grid = Some([nx, ny]);
        }
        if self.trials_per_cell.is_some() {
            run.trials_per_cell = self.trials_per_cell;
        }
        if self.user.is_some() {
            run.user = self.user;
        }
        if self.trial.is_some() {
            run.trial = self.trial;
        }
        if self.noiseless {
            cfg.noise.sigma2_dbm = Some(f64::NEG_INFINITY);
            cfg.noise.sigma2_w = None;
        } else if self.noise_dbm.is_some() {
            cfg.noise.sigma2_dbm = self.noise_dbm;
            cfg.noise.sigma2_w = None;
        }
        if self.pa_count.is_some() {
            cfg.pas.count = self.pa_count;
            cfg.pas.positions = None;
            cfg.noise.per_pa_w = None;
        }
        Ok(cfg)
    }
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let cfg = cli.merged_config()?;
    let exec = || run_command(cli.command, &cfg);
    let outcome = match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building thread pool")?
            .install(exec)?,
        None => exec()?,
    };
    println!("{}", outcome.summary);
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
