//! `qmcmc`: spectral gaps, bottleneck bounds and scaling fits for
//! quantum-enhanced Markov chain Monte Carlo with ramped proposals.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qmcmc_core::analysis::FitKind;

use crate::commands::fit::{parse_filter, FitRequest};
use crate::config::{RawConfig, RunConfig};
use crate::error::{CliError, Result};

#[derive(Parser)]
#[command(name = "qmcmc", version, about = "Quantum-enhanced MCMC: gaps, bounds, disorder averages and fits")]
struct Cli {
    /// Log level (error, warn, info, debug, trace); RUST_LOG also works.
    #[arg(long, global = true, default_value = "info")]
    log: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact spectral gaps over the ramp-time grid (gap_scan.csv, gap_summary.json).
    Gap(RunArgs),
    /// Free-fermion gap bound of the Ising chain (ising_bound.csv, optional ising_peak.csv).
    IsingBound {
        #[command(flatten)]
        run: RunArgs,
        /// Also locate the ramp time maximizing the bound for every N.
        #[arg(long)]
        peaks: bool,
    },
    /// Disorder-averaged gap curves, peak and quench series per size.
    Disorder(RunArgs),
    /// Gap against plateau length with the interval mean and the large-plateau limit.
    Kappa(RunArgs),
    /// Exponential or power-law fit of gap against N from earlier CSVs (fit.json).
    Fit(FitArgs),
    /// Validate output files and write the figure manifest for the plotting front end.
    PlotData {
        /// Directory holding the CSV/JSON outputs.
        #[arg(long, default_value = ".")]
        dir: PathBuf,
    },
}

/// Configuration shared by the computing subcommands. Values come from the
/// built-in defaults, then `--config`, then `--set`, then the dedicated flags.
#[derive(Args, Clone, Default)]
struct RunArgs {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override any configuration key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// ising, sk or 3spin.
    #[arg(long)]
    model: Option<String>,
    /// Sizes: `8`, `6,8,10`, `5..10` or `8..40:4`.
    #[arg(short = 'n', long = "n", value_name = "SIZES")]
    n: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    /// Transverse field on the plateau.
    #[arg(long)]
    h: Option<String>,
    /// Ramp shape: sin2 or linear.
    #[arg(long)]
    ramp: Option<String>,
    /// Comma-separated ramp times, increasing.
    #[arg(long)]
    alphas: Option<String>,
    /// Plateau length: inf, scan or a number.
    #[arg(long)]
    kappa: Option<String>,
    #[arg(long)]
    instances: Option<String>,
    /// Master seed for disorder draws.
    #[arg(long)]
    seed: Option<String>,
    /// Split-step propagator steps per unit time.
    #[arg(long)]
    steps: Option<String>,
    /// JSON instance record (or array of records) to use instead of sampling.
    #[arg(long)]
    instance_file: Option<PathBuf>,
    /// Output directory.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Worker threads (0 = one per core); defaults to $QMCMC_THREADS.
    #[arg(long)]
    threads: Option<String>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut raw = RawConfig::new();
        for item in &self.set {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("--set expects KEY=VALUE, got '{item}'")))?;
            raw.insert(k.trim().to_ascii_lowercase(), v.trim().to_string());
        }
        let flags = [
            ("model", self.model.clone()),
            ("n", self.n.clone()),
            ("beta", self.beta.clone()),
            ("h", self.h.clone()),
            ("ramp", self.ramp.clone()),
            ("alphas", self.alphas.clone()),
            ("kappa", self.kappa.clone()),
            ("instances", self.instances.clone()),
            ("seed", self.seed.clone()),
            ("steps_per_unit_time", self.steps.clone()),
            ("instance_file", self.instance_file.as_ref().map(|p| p.display().to_string())),
            ("output", self.output.as_ref().map(|p| p.display().to_string())),
            ("threads", self.threads.clone()),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                raw.insert(k.to_string(), v);
            }
        }
        config::resolve(self.config.as_deref(), &raw)
    }
}

#[derive(Args)]
struct FitArgs {
    /// Input CSV files (e.g. scaling.csv, ising_peak.csv, gap_scan.csv).
    #[arg(long = "input", short, required = true)]
    inputs: Vec<PathBuf>,
    /// exponential (δ ∝ 2^{-kN}) or powerlaw (δ ∝ N^{-γ}).
    #[arg(long, default_value = "exponential")]
    kind: String,
    #[arg(long, default_value = "N")]
    x_column: String,
    /// Gap column; defaults to the first of delta, bound_peak, mean, bound.
    #[arg(long)]
    y_column: Option<String>,
    /// Standard-error column; defaults to stderr when present.
    #[arg(long)]
    err_column: Option<String>,
    /// Keep only rows with COLUMN=VALUE (repeatable).
    #[arg(long = "filter", value_name = "COLUMN=VALUE")]
    filters: Vec<String>,
    /// Output JSON path.
    #[arg(short, long, default_value = "fit.json")]
    output: PathBuf,
}

fn init_threads(threads: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::usage(format!("cannot start {threads} worker threads: {e}")))
}

/// Resolves the configuration, starts the worker pool and saves the resolved
/// configuration as `<command>.cfg` in the output directory.
fn prepare(args: &RunArgs, command: &str) -> Result<RunConfig> {
    let config = args.resolve()?;
    init_threads(config.threads)?;
    std::fs::create_dir_all(&config.output).map_err(|e| CliError::io(&config.output, e))?;
    let path = config.output.join(format!("{command}.cfg"));
    std::fs::write(&path, config.to_flat()).map_err(|e| CliError::io(&path, e))?;
    Ok(config)
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Gap(args) => {
            let config = prepare(&args, "gap")?;
            commands::gap::run(config)
        }
        Command::IsingBound { run, peaks } => {
            let config = prepare(&run, "ising_bound")?;
            commands::ising_bound::run(config, peaks)
        }
        Command::Disorder(args) => {
            let config = prepare(&args, "disorder")?;
            commands::disorder::run(config)
        }
        Command::Kappa(args) => {
            let config = prepare(&args, "kappa")?;
            commands::kappa::run(config)
        }
        Command::Fit(args) => {
            let kind: FitKind = args.kind.parse().map_err(|e: qmcmc_core::Error| CliError::usage(e.to_string()))?;
            let filters =
                args.filters.iter().map(|f| parse_filter(f).map_err(CliError::usage)).collect::<Result<_>>()?;
            commands::fit::run(FitRequest {
                inputs: args.inputs,
                kind,
                x_column: args.x_column,
                y_column: args.y_column,
                err_column: args.err_column,
                filters,
                output: args.output,
            })
        }
        Command::PlotData { dir } => commands::plot_data::run(&dir).map(|path| log::info!("wrote {}", path.display())),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new().parse_filters(&cli.log).parse_default_env().format_timestamp(None).init();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
