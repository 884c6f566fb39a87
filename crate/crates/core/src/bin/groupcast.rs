use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use groupcast::harness::{self, emit, format_sig, ExperimentConfig, PipelineOptions, SchedulerKind};
use groupcast::model::{self, StreamPurpose, SystemConfig};
use groupcast::{Error, Result};

#[derive(Parser)]
#[command(name = "groupcast", version, about = "Multicast group scheduling and beamforming")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Schedule one channel instance and print the schedule and throughput as JSON.
    Schedule {
        /// System configuration, or an experiment configuration whose `system` is used.
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "gss")]
        scheduler: SchedulerKind,
        /// Semi-orthogonality threshold for `gss`.
        #[arg(long, default_value_t = 0.2)]
        alpha: f64,
        /// Clustering threshold for `gsc`.
        #[arg(long, default_value_t = 0.7)]
        tau: f64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 0)]
        drop: u64,
        #[arg(long, default_value_t = 0)]
        realization: u64,
    },
    /// Run a Monte-Carlo sweep described by an experiment configuration.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        scheduler: Option<SchedulerKind>,
        /// Replace the threshold grid with a single α (gss).
        #[arg(long)]
        alpha: Option<f64>,
        /// Replace the threshold grid with a single τ (gsc).
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (defaults to all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Print the pathloss constant for a configuration.
    Calibrate {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Failing to read the configuration is a configuration error.
fn config_error(e: Error) -> Error {
    match e {
        Error::Io { .. } => Error::Config(e.to_string()),
        e => e,
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
        .map_err(config_error)
}

/// Accepts either a bare system configuration or an experiment configuration.
fn load_system(path: &Path) -> Result<(SystemConfig, PipelineOptions)> {
    let text = read(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
    if value.get("system").is_some() {
        let cfg = ExperimentConfig::from_json(&text)?;
        Ok((cfg.system, PipelineOptions { psa: cfg.psa, gsc: cfg.gsc }))
    } else {
        let cfg: SystemConfig =
            serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok((cfg, PipelineOptions::default()))
    }
}

#[derive(Serialize)]
struct ScheduleReport {
    scheduler: SchedulerKind,
    threshold: f64,
    num_slots: usize,
    slots: Vec<Vec<usize>>,
    slot_min_rates: Vec<f64>,
    min_throughput: f64,
    sched_time_s: f64,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Schedule {
            config,
            scheduler,
            alpha,
            tau,
            seed,
            drop,
            realization,
        } => {
            let (mut system, options) = load_system(&config)?;
            if let Some(s) = seed {
                system.rng_seed = s;
            }
            let user_drop = model::drop_for(&system, drop)?;
            let channels = model::channels_for(&system, &user_drop, drop, realization)?;
            let threshold = if scheduler == SchedulerKind::Gsc { tau } else { alpha };
            scheduler.check_threshold(threshold)?;
            let mut rng = model::substream(
                system.rng_seed,
                StreamPurpose::Scheduler,
                &[system.num_antennas as u64, 0, drop, realization],
            );
            let out =
                harness::run_pipeline(&channels, &system, scheduler, threshold, &options, &mut rng)?;
            let report = ScheduleReport {
                scheduler,
                threshold,
                num_slots: out.schedule.num_slots(),
                slots: out.schedule.slots.clone(),
                slot_min_rates: out.slots.iter().map(|s| s.min_rate).collect(),
                min_throughput: out.min_throughput,
                sched_time_s: out.sched_time_s,
            };
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Sweep {
            config,
            scheduler,
            alpha,
            tau,
            seed,
            out,
            jobs,
        } => {
            let mut cfg = ExperimentConfig::load(&config).map_err(config_error)?;
            if let Some(s) = scheduler {
                cfg.scheduler = s;
            }
            if let Some(t) = alpha.or(tau) {
                cfg.thresholds = vec![t];
            }
            if let Some(s) = seed {
                cfg.system.rng_seed = s;
            }
            if out.is_some() {
                cfg.output_dir = out;
            }
            cfg.validate()?;
            if let Some(j) = jobs {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(j.max(1))
                    .build_global()
                    .map_err(|e| Error::Config(format!("--jobs: {e}")))?;
            }
            println!("scheduler,N,threshold,mean_T,mean_min_throughput,runs_ok,runs_failed");
            let result = harness::sweep_with(&cfg, |c| {
                let opt = |x: Option<f64>| x.map(|v| format_sig(v, 9)).unwrap_or_default();
                println!(
                    "{},{},{},{},{},{},{}",
                    c.scheduler,
                    c.num_antennas,
                    format_sig(c.threshold, 9),
                    opt(c.mean_t),
                    opt(c.mean_min_throughput),
                    c.runs_ok,
                    c.runs_failed
                );
            })?;
            if let Some(dir) = &cfg.output_dir {
                for path in emit(&result, dir)? {
                    log::info!("wrote {}", path.display());
                }
            }
        }
        Command::Calibrate { config } => {
            let (system, _) = load_system(&config)?;
            let xi = model::calibrate_pathloss_constant(&system)?;
            println!(
                "{}",
                serde_json::json!({
                    "pathloss_constant": xi,
                    "pathloss_constant_db": model::linear_to_db(xi),
                })
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
