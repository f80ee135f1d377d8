//! Rolling fifteen-minute validation of a day-ahead schedule.
//!
//! Each trading hour is cleared by one run over seven quarters: the last
//! three binding quarters of the previous hour, held fixed, followed by the
//! four binding quarters of the hour itself. Long-start units follow the
//! day-ahead commitment; fast-start units are committed freely. Balance
//! violations are allowed at the value of lost load.

mod metrics;
mod model;
mod scenario;

use log::info;
use serde::{Deserialize, Serialize};

use crate::error::MarketError;
use crate::market::DaSolution;
use crate::solver::SolverBackend;
use crate::system::{nodal_loads, SystemModel};

pub use metrics::{
    count_spikes, evaluate_designs, spike_distribution, summarise, DesignEvaluation, ModeSummary, Pairwise, ScenarioRow,
    SpikeDistribution, Stats,
};
pub use model::{build_rtuc_model, run_one_process_rtuc, History, RtucModel, RtucRunResult, BINDING, OVERLAP};
pub use scenario::{forecast_scenario, generate_scenarios, scenario, Scenario};

/// Length of one interval in hours.
pub const QUARTER_HOURS: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RtucConfig {
    /// $/MWh
    pub voll: f64,
    /// Multiplier on fast-start energy offers in real time only.
    pub fs_bid_multiplier: f64,
    /// $/MWh; `None` means half of `voll`.
    pub spike_threshold: Option<f64>,
    pub mip_gap: f64,
    /// Seconds per run.
    pub time_limit: f64,
    /// Solve a fixed-commitment LP per run for interval prices.
    pub price_intervals: bool,
}

impl Default for RtucConfig {
    fn default() -> Self {
        Self {
            voll: 10_000.0,
            fs_bid_multiplier: 1.0,
            spike_threshold: None,
            mip_gap: 1e-3,
            time_limit: 120.0,
            price_intervals: true,
        }
    }
}

impl RtucConfig {
    pub fn spike_threshold(&self) -> f64 {
        self.spike_threshold.unwrap_or(0.5 * self.voll)
    }
}

/// Results of rolling one scenario through the day.
#[derive(Debug, Clone, PartialEq)]
pub struct DayValidationResult {
    pub scenario_id: u32,
    pub runs: Vec<RtucRunResult>,
    /// Stitched binding schedule over all quarters of the day.
    pub schedule: History,
    /// MW per quarter.
    pub shortage: Vec<f64>,
    pub surplus: Vec<f64>,
    /// Highest nodal price per quarter, $/MWh (NaN when not priced).
    pub max_lmp: Vec<f64>,
    pub total_violation_mwh: f64,
    pub cost_without_penalty: f64,
    pub cost_with_penalty: f64,
    /// Σ over quarters of the fast-start units committed beyond the
    /// day-ahead commitment of that hour.
    pub increased_fs_commitments: u32,
    pub price_spikes: u32,
}

impl DayValidationResult {
    pub fn num_intervals(&self) -> usize {
        self.schedule.len()
    }

    pub fn violation(&self, q: usize) -> f64 {
        self.shortage[q] + self.surplus[q]
    }
}

/// Runs every trading hour in sequence for one scenario.
pub fn roll_day(
    system: &SystemModel,
    da: &DaSolution,
    scenario: &Scenario,
    backend: &dyn SolverBackend,
    config: &RtucConfig,
) -> Result<DayValidationResult, MarketError> {
    let quarters = scenario.values.len();
    if quarters != BINDING * da.hours() {
        return Err(MarketError::Rolling(format!(
            "scenario {} has {quarters} quarters, day-ahead schedule {} hours",
            scenario.id,
            da.hours()
        )));
    }
    let loads = nodal_loads(system, &scenario.values);
    let mut history = History::new(system.generators().len());
    let mut runs = Vec::with_capacity(da.hours());
    let mut shortage = Vec::with_capacity(quarters);
    let mut surplus = Vec::with_capacity(quarters);
    let mut max_lmp = Vec::with_capacity(quarters);
    let mut cost_without_penalty = 0.0;
    for hour in 1..=da.hours() {
        let model = build_rtuc_model(hour, system, da, &history, &loads, config)?;
        let run = run_one_process_rtuc(&model, system, backend, config)?;
        for i in run.binding_range() {
            shortage.push(run.shortage[i]);
            surplus.push(run.surplus[i]);
            cost_without_penalty += run.cost[i];
            max_lmp.push(run.lmp[i].iter().copied().fold(f64::NAN, f64::max));
        }
        history.append(&run);
        info!(
            "scenario {} hour {hour}: violation {:.3} MW",
            scenario.id,
            run.binding_range().map(|i| run.violation(i)).sum::<f64>()
        );
        runs.push(run);
    }

    let total_violation_mwh: f64 = shortage.iter().zip(&surplus).map(|(a, b)| (a + b) * QUARTER_HOURS).sum();
    let increased_fs_commitments = (0..quarters)
        .map(|q| {
            let (rt, da_on) = system
                .generators()
                .iter()
                .enumerate()
                .filter(|(_, gen)| gen.fast_start)
                .fold((0i64, 0i64), |(rt, d), (g, _)| {
                    (
                        rt + i64::from(history.u[g][q] > 0.5),
                        d + i64::from(da.is_committed(g, q / BINDING)),
                    )
                });
            (rt - da_on).max(0) as u32
        })
        .sum();
    let threshold = config.spike_threshold();
    let price_spikes = count_spikes(&max_lmp, threshold) as u32;
    Ok(DayValidationResult {
        scenario_id: scenario.id,
        runs,
        schedule: history,
        shortage,
        surplus,
        max_lmp,
        total_violation_mwh,
        cost_without_penalty,
        cost_with_penalty: cost_without_penalty + config.voll * total_violation_mwh,
        increased_fs_commitments,
        price_spikes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{build_da_model, solve_da, FrpMode};
    use crate::solver::{HighsBackend, SolveOptions};
    use crate::system::{Generator, InitialState, NetworkModel};

    fn unit(id: &str, cost: f64, p_max: f64, ramp_15min: f64, fast_start: bool, on: bool) -> Generator {
        Generator {
            id: id.into(),
            bus: 1,
            cost,
            no_load_cost: 0.0,
            startup_cost: 0.0,
            shutdown_cost: 0.0,
            p_max,
            p_min: 0.0,
            ramp_hourly: 4.0 * ramp_15min,
            ramp_15min,
            ramp_startup: p_max,
            ramp_shutdown: p_max,
            min_up: 1,
            min_down: 1,
            fast_start,
            initial: Some(InitialState {
                on,
                output: if on { 100.0 } else { 0.0 },
                hours_in_state: 10,
            }),
        }
    }

    fn system(gens: Vec<Generator>) -> SystemModel {
        let net = NetworkModel::new(vec![1], vec![], None).unwrap();
        SystemModel::new("rt", gens, net, &[(1, 1.0)]).unwrap()
    }

    fn flat_da(sys: &SystemModel) -> DaSolution {
        let loads = nodal_loads(sys, &[100.0; 24]);
        let model = build_da_model(sys, &loads, None, FrpMode::None).unwrap();
        solve_da(&model, &HighsBackend, &SolveOptions::default().with_gap(0.0)).unwrap()
    }

    fn stepped(q: usize, value: f64) -> Scenario {
        let mut values = vec![100.0; 96];
        values[q] = value;
        Scenario { id: 1, seed: 0, values }
    }

    #[test]
    fn ramp_shortfall_becomes_violation() {
        // 10 MW per quarter of ramp against a 25 MW step.
        let sys = system(vec![unit("A", 10.0, 1000.0, 10.0, false, true)]);
        let da = flat_da(&sys);
        let day = roll_day(&sys, &da, &stepped(4, 125.0), &HighsBackend, &RtucConfig::default()).unwrap();
        assert!((day.shortage[4] - 15.0).abs() < 1e-6);
        assert!((day.total_violation_mwh - 15.0 * QUARTER_HOURS).abs() < 1e-6);
        assert!(day.max_lmp[4] >= 10_000.0 - 1e-6);
        assert_eq!(day.price_spikes, 1);
    }

    #[test]
    fn forecast_scenario_has_no_violation() {
        let sys = system(vec![unit("A", 10.0, 1000.0, 10.0, false, true)]);
        let da = flat_da(&sys);
        let forecast = Scenario {
            id: 0,
            seed: 0,
            values: vec![100.0; 96],
        };
        let day = roll_day(&sys, &da, &forecast, &HighsBackend, &RtucConfig::default()).unwrap();
        assert_eq!(day.total_violation_mwh, 0.0);
        assert_eq!(day.price_spikes, 0);
        assert!((day.cost_without_penalty - 24.0 * 100.0 * 10.0).abs() < 1e-6);
    }

    #[test]
    fn fast_start_unit_covers_the_step() {
        let sys = system(vec![
            unit("A", 10.0, 1000.0, 10.0, false, true),
            unit("F", 50.0, 30.0, 30.0, true, false),
        ]);
        let da = flat_da(&sys);
        assert!(!da.is_committed(1, 1));
        let day = roll_day(&sys, &da, &stepped(4, 125.0), &HighsBackend, &RtucConfig::default()).unwrap();
        assert!(day.total_violation_mwh.abs() < 1e-9);
        assert_eq!(day.schedule.u[1][4], 1.0);
        assert!(day.increased_fs_commitments >= 1);
    }

    #[test]
    fn stitching_and_penalty_accounting() {
        let sys = system(vec![unit("A", 10.0, 1000.0, 10.0, false, true)]);
        let da = flat_da(&sys);
        let config = RtucConfig::default();
        let day = roll_day(&sys, &da, &stepped(30, 160.0), &HighsBackend, &config).unwrap();
        assert_eq!(day.runs.len(), 24);
        assert_eq!(day.num_intervals(), 96);
        for pair in day.runs.windows(2) {
            let (prev, next) = (&pair[0], &pair[1]);
            assert_eq!(next.binding.iter().filter(|&&b| b).count(), BINDING);
            for (i, q) in next.quarters.iter().enumerate().take(next.fixed_intervals()) {
                let j = prev.quarters.iter().position(|x| x == q).unwrap();
                assert_eq!(next.dispatch[0][i].to_bits(), prev.dispatch[0][j].to_bits());
                assert_eq!(next.commitment[0][i], prev.commitment[0][j]);
            }
        }
        assert!(day.total_violation_mwh > 0.0);
        assert_eq!(
            day.cost_with_penalty,
            day.cost_without_penalty + config.voll * day.total_violation_mwh
        );
    }

    #[test]
    fn wrong_scenario_length_is_rejected() {
        let sys = system(vec![unit("A", 10.0, 1000.0, 10.0, false, true)]);
        let da = flat_da(&sys);
        let short = Scenario {
            id: 3,
            seed: 0,
            values: vec![100.0; 95],
        };
        assert!(matches!(
            roll_day(&sys, &da, &short, &HighsBackend, &RtucConfig::default()),
            Err(MarketError::Rolling(_))
        ));
    }
}
