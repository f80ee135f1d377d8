use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use frp_core::config::RunConfig;
use frp_core::io::{load_profile, load_scenarios, write_scenarios};
use frp_core::market::{clear_day_ahead, DaSolution, FrpMode};
use frp_core::pricing::{compute_settlements, fix_and_price, verify_pricing_identities};
use frp_core::requirements::{NetLoadProfile, RampRequirements};
use frp_core::rtuc::{evaluate_designs, generate_scenarios, DesignEvaluation, RtucConfig, Scenario};
use frp_core::solver::{SolveOptions, SolverBackend};
use frp_core::system::{load_system, nodal_loads, SystemModel};
use log::{info, warn};
use serde::Serialize;

use crate::error::CliError;

/// Version of every file layout below; bump on any header change.
pub const SCHEMA_VERSION: u32 = 1;

pub const SCENARIO_RESULTS: &str = "scenario_results.csv";
pub const SCENARIO_RESULTS_HEADER: &str =
    "mode,scenario,violation_mwh,cost_without_penalty,cost_with_penalty,increased_fs_commitments,price_spikes";
pub const INTERVAL_MAX_LMP: &str = "interval_max_lmp.csv";
pub const AGGREGATE: &str = "aggregate.json";
pub const SWEEP_HEADER: &str =
    "value,mode,violation_avg,violation_sum,violation_count,cost_without_penalty_avg,cost_with_penalty_avg,fs_avg,price_spike_cases";

pub(crate) fn write_file(
    dir: &Path,
    name: &str,
    f: impl FnOnce(&mut BufWriter<File>) -> Result<(), Box<dyn std::error::Error>>,
) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| CliError::write(&path, e))?;
    let mut out = BufWriter::new(file);
    f(&mut out).map_err(|e| CliError::write(&path, e))?;
    out.flush().map_err(|e| CliError::write(&path, e))?;
    Ok(path)
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<PathBuf, CliError> {
    write_file(dir, name, |out| {
        serde_json::to_writer_pretty(&mut *out, value)?;
        writeln!(out)?;
        Ok(())
    })
}

/// Records the files a command wrote, keeping entries from other commands.
fn update_manifest(dir: &Path, command: &str, files: &[PathBuf]) -> Result<(), CliError> {
    let path = dir.join("manifest.json");
    let mut commands: BTreeMap<String, Vec<String>> = fs::read_to_string(&path)
        .ok()
        .and_then(|text| serde_json::from_str::<serde_json::Value>(&text).ok())
        .and_then(|v| serde_json::from_value(v.get("commands")?.clone()).ok())
        .unwrap_or_default();
    let mut names: Vec<String> = files
        .iter()
        .filter_map(|p| p.file_name())
        .map(|n| n.to_string_lossy().into_owned())
        .collect();
    names.sort();
    commands.insert(command.to_string(), names);
    let manifest = serde_json::json!({ "schema_version": SCHEMA_VERSION, "commands": commands });
    write_json(dir, "manifest.json", &manifest).map(|_| ())
}

/// Inputs shared by both pipeline commands.
pub struct Inputs {
    pub config: RunConfig,
    pub system: SystemModel,
    pub profile: NetLoadProfile,
}

impl Inputs {
    pub fn load(config: RunConfig) -> Result<Self, CliError> {
        config.validate()?;
        let system = load_system(&config.system)?;
        let profile = load_profile(&config.profile, config.z, config.sigma_fraction)?;
        if profile.hours() != 24 {
            return Err(CliError::Usage(format!(
                "{} covers {} hours; the pipeline simulates one 24-hour day",
                config.profile.display(),
                profile.hours()
            )));
        }
        fs::create_dir_all(&config.output_dir).map_err(|e| CliError::write(&config.output_dir, e))?;
        Ok(Self { config, system, profile })
    }

    fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            mip_gap: self.config.mip_gap,
            time_limit: self.config.time_limit,
            ..SolveOptions::default()
        }
    }

    fn rtuc_config(&self) -> RtucConfig {
        RtucConfig {
            voll: self.config.voll,
            fs_bid_multiplier: self.config.fs_bid_multiplier,
            spike_threshold: self.config.spike_threshold,
            mip_gap: self.config.mip_gap,
            time_limit: self.config.time_limit,
            price_intervals: true,
        }
    }
}

#[derive(Serialize)]
struct DaSummary {
    mode: FrpMode,
    objective: f64,
    mip_gap: f64,
    gap_certified: bool,
    pricing_lp_objective: f64,
    pricing_degenerate: bool,
    pricing_issues: Vec<String>,
    load_payment: f64,
    energy_revenue: f64,
    frp_up_revenue: f64,
    frp_down_revenue: f64,
    congestion_rent: f64,
}

/// Clears, prices and settles the day-ahead market for every configured
/// mode and writes the per-mode artifacts.
pub fn run_da(inputs: &Inputs, backend: &dyn SolverBackend) -> Result<Vec<DaSolution>, CliError> {
    let (solutions, files) = run_da_for(inputs, &inputs.profile, backend, true)?;
    update_manifest(&inputs.config.output_dir, "run-da", &files)?;
    Ok(solutions)
}

fn run_da_for(
    inputs: &Inputs,
    profile: &NetLoadProfile,
    backend: &dyn SolverBackend,
    write: bool,
) -> Result<(Vec<DaSolution>, Vec<PathBuf>), CliError> {
    let dir = &inputs.config.output_dir;
    let options = inputs.solve_options();
    let loads = nodal_loads(&inputs.system, profile.hourly());
    let mut solutions = Vec::new();
    let mut summaries = Vec::new();
    let mut files = Vec::new();
    for &mode in &inputs.config.modes {
        let (model, da) = clear_day_ahead(&inputs.system, profile, mode, inputs.config.terminal_rule, backend, &options)?;
        if !write {
            solutions.push(da);
            continue;
        }
        let prices = fix_and_price(&model, &da, backend)?;
        let issues = verify_pricing_identities(&prices, &da);
        if !issues.is_empty() {
            warn!("{mode}: pricing identities fail for {}", issues.names().join(", "));
        }
        let settlement = compute_settlements(&inputs.system, &prices, &da, &loads);
        files.push(write_file(dir, &format!("da_{mode}.csv"), |o| Ok(da.write_csv(o)?))?);
        files.push(write_json(dir, &format!("da_{mode}.json"), &da)?);
        files.push(write_file(dir, &format!("settlement_{mode}.csv"), |o| Ok(settlement.write_csv(o)?))?);
        files.push(write_file(dir, &format!("prices_{mode}.csv"), |o| Ok(prices.write_csv(o)?))?);
        files.push(write_file(dir, &format!("lmp_{mode}.csv"), |o| Ok(settlement.write_lmp_csv(o)?))?);
        info!("{mode}: objective {:.2}", da.objective);
        summaries.push(DaSummary {
            mode,
            objective: da.objective,
            mip_gap: da.mip_gap,
            gap_certified: da.gap_certified,
            pricing_lp_objective: prices.lp_objective,
            pricing_degenerate: prices.degenerate,
            pricing_issues: issues.names().into_iter().map(String::from).collect(),
            load_payment: settlement.load_payment,
            energy_revenue: settlement.energy_revenue,
            frp_up_revenue: settlement.frp_up_revenue,
            frp_down_revenue: settlement.frp_down_revenue,
            congestion_rent: settlement.congestion_rent,
        });
        solutions.push(da);
    }
    if write {
        let reqs = RampRequirements::compute(profile, inputs.config.terminal_rule);
        files.push(write_file(dir, "requirements.csv", |o| write_requirements(&reqs, o))?);
        files.push(write_json(
            dir,
            "da_summary.json",
            &serde_json::json!({ "schema_version": SCHEMA_VERSION, "modes": summaries }),
        )?);
    }
    Ok((solutions, files))
}

fn write_requirements(reqs: &RampRequirements, out: impl Write) -> Result<(), Box<dyn std::error::Error>> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "up", "down", "up_intra_rhs", "down_intra_rhs"])?;
    for t in 0..reqs.hours() {
        w.write_record([
            (t + 1).to_string(),
            reqs.up[t].to_string(),
            reqs.down[t].to_string(),
            reqs.up_intra_rhs[t].to_string(),
            reqs.down_intra_rhs[t].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct SweepBlock<'a> {
    value: f64,
    evaluation: &'a DesignEvaluation,
}

fn blocks(runs: &[(f64, DesignEvaluation)]) -> Vec<SweepBlock<'_>> {
    runs.iter().map(|(value, evaluation)| SweepBlock { value: *value, evaluation }).collect()
}

#[derive(Serialize)]
struct Aggregate<'a> {
    schema_version: u32,
    scenarios: usize,
    seed: u64,
    sigma_fraction: f64,
    base: &'a DesignEvaluation,
    voll_sweep: Vec<SweepBlock<'a>>,
    sigma_fraction_sweep: Vec<SweepBlock<'a>>,
}

fn scenarios_for(inputs: &Inputs, profile: &NetLoadProfile) -> Result<Vec<Scenario>, CliError> {
    match &inputs.config.scenario_file {
        Some(path) => Ok(load_scenarios(path)?),
        None => Ok(generate_scenarios(profile, inputs.config.scenarios, inputs.config.seed)),
    }
}

/// Clears the day-ahead market, rolls every scenario through each design
/// and writes per-scenario results, aggregates and sweeps.
pub fn validate(inputs: &Inputs, backend: &dyn SolverBackend) -> Result<DesignEvaluation, CliError> {
    let dir = &inputs.config.output_dir;
    let designs = run_da(inputs, backend)?;
    let scenarios = scenarios_for(inputs, &inputs.profile)?;
    let mut files = vec![write_file(dir, "scenarios.csv", |o| Ok(write_scenarios(&scenarios, o)?))?];
    let rtuc = inputs.rtuc_config();
    let threads = inputs.config.threads;
    let base = evaluate_designs(&inputs.system, &designs, &scenarios, backend, &rtuc, threads)?;
    files.push(write_file(dir, SCENARIO_RESULTS, |o| write_scenario_results(&base, o))?);
    files.push(write_file(dir, INTERVAL_MAX_LMP, |o| write_max_lmp(&base, o))?);

    let mut voll_runs = Vec::new();
    for &voll in &inputs.config.sweeps.voll {
        let config = RtucConfig { voll, ..rtuc.clone() };
        info!("VOLL sweep: {voll}");
        voll_runs.push((voll, evaluate_designs(&inputs.system, &designs, &scenarios, backend, &config, threads)?));
    }
    let mut sigma_runs = Vec::new();
    for &fraction in &inputs.config.sweeps.sigma_fraction {
        info!("sigma sweep: {fraction}");
        let profile = inputs.profile.rescaled_sigma(fraction)?;
        let (designs, _) = run_da_for(inputs, &profile, backend, false)?;
        let scenarios = generate_scenarios(&profile, inputs.config.scenarios, inputs.config.seed);
        sigma_runs.push((fraction, evaluate_designs(&inputs.system, &designs, &scenarios, backend, &rtuc, threads)?));
    }
    if !voll_runs.is_empty() {
        files.push(write_file(dir, "sweep_voll.csv", |o| write_sweep(&voll_runs, o))?);
    }
    if !sigma_runs.is_empty() {
        files.push(write_file(dir, "sweep_sigma.csv", |o| write_sweep(&sigma_runs, o))?);
    }
    let aggregate = Aggregate {
        schema_version: SCHEMA_VERSION,
        scenarios: scenarios.len(),
        seed: inputs.config.seed,
        sigma_fraction: inputs.config.sigma_fraction,
        base: &base,
        voll_sweep: blocks(&voll_runs),
        sigma_fraction_sweep: blocks(&sigma_runs),
    };
    files.push(write_json(dir, AGGREGATE, &aggregate)?);
    update_manifest(dir, "validate", &files)?;
    Ok(base)
}

fn write_scenario_results(eval: &DesignEvaluation, out: impl Write) -> Result<(), Box<dyn std::error::Error>> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SCENARIO_RESULTS_HEADER.split(','))?;
    for (summary, rows) in eval.summaries.iter().zip(&eval.rows) {
        for r in rows {
            w.write_record([
                summary.mode.to_string(),
                r.scenario.to_string(),
                r.violation_mwh.to_string(),
                r.cost_without_penalty.to_string(),
                r.cost_with_penalty.to_string(),
                r.increased_fs_commitments.to_string(),
                r.price_spikes.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_max_lmp(eval: &DesignEvaluation, out: impl Write) -> Result<(), Box<dyn std::error::Error>> {
    let mut w = csv::Writer::from_writer(out);
    let quarters = eval.rows.iter().flatten().map(|r| r.max_lmp.len()).max().unwrap_or(0);
    let mut header = vec!["mode".to_string(), "scenario".to_string()];
    header.extend((1..=quarters).map(|q| format!("q{q}")));
    w.write_record(&header)?;
    for (summary, rows) in eval.summaries.iter().zip(&eval.rows) {
        for r in rows {
            let mut record = vec![summary.mode.to_string(), r.scenario.to_string()];
            record.extend(r.max_lmp.iter().map(f64::to_string));
            w.write_record(&record)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_sweep(runs: &[(f64, DesignEvaluation)], out: impl Write) -> Result<(), Box<dyn std::error::Error>> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER.split(','))?;
    for (value, eval) in runs {
        for s in &eval.summaries {
            w.write_record([
                value.to_string(),
                s.mode.to_string(),
                s.violation_mwh.average.to_string(),
                s.violation_mwh.sum.to_string(),
                s.violation_mwh.count.to_string(),
                s.cost_without_penalty.average.to_string(),
                s.cost_with_penalty.average.to_string(),
                s.increased_fs_commitments.average.to_string(),
                s.price_spike_cases.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
