mod commands;
mod error;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use frp_core::config::RunConfig;
use frp_core::market::FrpMode;
use frp_core::solver::default_backend;

use crate::commands::Inputs;
use crate::error::CliError;

/// Day-ahead clearing with flexible ramping products and rolling
/// fifteen-minute validation.
///
/// The solver backend is chosen with the FRP_SOLVER environment variable
/// (default: highs).
#[derive(Parser)]
#[command(name = "frp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Clear, price and settle the day-ahead market for each mode.
    RunDa(Overrides),
    /// Clear the day-ahead market and validate it on real-time scenarios.
    Validate(Overrides),
    /// Summarise a validation output directory.
    Report {
        /// Directory written by `validate`.
        dir: PathBuf,
    },
}

#[derive(Args)]
struct Overrides {
    /// JSON run configuration; unset fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    system: Option<PathBuf>,
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Repeat or comma-separate: none, general, enhanced.
    #[arg(long = "mode", value_delimiter = ',')]
    modes: Vec<FrpMode>,
    #[arg(long)]
    z: Option<f64>,
    #[arg(long)]
    sigma_fraction: Option<f64>,
    #[arg(long)]
    voll: Option<f64>,
    #[arg(long)]
    scenarios: Option<usize>,
    #[arg(long)]
    scenario_file: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    mip_gap: Option<f64>,
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    fs_bid_multiplier: Option<f64>,
    #[arg(long)]
    spike_threshold: Option<f64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    sweep_voll: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    sweep_sigma_fraction: Vec<f64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

impl Overrides {
    fn into_config(self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { c.$field = v; })*
            };
        }
        set!(system, profile, z, sigma_fraction, voll, scenarios, seed, mip_gap, time_limit, fs_bid_multiplier, threads, output_dir);
        if self.scenario_file.is_some() {
            c.scenario_file = self.scenario_file;
        }
        if self.spike_threshold.is_some() {
            c.spike_threshold = self.spike_threshold;
        }
        if !self.modes.is_empty() {
            c.modes = self.modes;
        }
        if !self.sweep_voll.is_empty() {
            c.sweeps.voll = self.sweep_voll;
        }
        if !self.sweep_sigma_fraction.is_empty() {
            c.sweeps.sigma_fraction = self.sweep_sigma_fraction;
        }
        Ok(c)
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::RunDa(o) => {
            let inputs = Inputs::load(o.into_config()?)?;
            let backend = default_backend().map_err(|e| CliError::Usage(e.to_string()))?;
            for da in commands::run_da(&inputs, backend.as_ref())? {
                println!("{}: objective {:.2}", da.mode, da.objective);
            }
        }
        Command::Validate(o) => {
            let inputs = Inputs::load(o.into_config()?)?;
            let backend = default_backend().map_err(|e| CliError::Usage(e.to_string()))?;
            let eval = commands::validate(&inputs, backend.as_ref())?;
            for s in &eval.summaries {
                println!(
                    "{}: violation {:.4} MWh total over {} scenarios, {} with violation",
                    s.mode, s.violation_mwh.sum, s.scenarios, s.violation_mwh.count
                );
            }
        }
        Command::Report { dir } => print!("{}", report::report(&dir)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
