//! Reliability and efficiency metrics over many validated scenarios.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::MarketError;
use crate::market::{DaSolution, FrpMode};
use crate::solver::SolverBackend;
use crate::system::SystemModel;

use super::{roll_day, DayValidationResult, RtucConfig, Scenario};

/// Values at or below this count as zero when counting scenarios with a
/// violation or an increase.
const COUNT_TOL: f64 = 1e-6;

/// Per-scenario outcome of one design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRow {
    pub scenario: u32,
    pub violation_mwh: f64,
    pub cost_without_penalty: f64,
    pub cost_with_penalty: f64,
    pub increased_fs_commitments: u32,
    pub price_spikes: u32,
    /// Highest nodal price per binding quarter, $/MWh.
    #[serde(skip)]
    pub max_lmp: Vec<f64>,
}

impl From<&DayValidationResult> for ScenarioRow {
    fn from(day: &DayValidationResult) -> Self {
        Self {
            scenario: day.scenario_id,
            violation_mwh: day.total_violation_mwh,
            cost_without_penalty: day.cost_without_penalty,
            cost_with_penalty: day.cost_with_penalty,
            increased_fs_commitments: day.increased_fs_commitments,
            price_spikes: day.price_spikes,
            max_lmp: day.max_lmp.clone(),
        }
    }
}

/// Summary statistics of one metric across scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Stats {
    pub average: f64,
    /// Sample standard deviation (zero for a single scenario).
    pub std: f64,
    pub sum: f64,
    /// Scenarios with a positive value.
    pub count: usize,
    pub max: f64,
}

impl Stats {
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self::default();
        }
        let sum: f64 = values.iter().sum();
        let average = sum / n as f64;
        let std = if n > 1 {
            (values.iter().map(|v| (v - average).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self {
            average,
            std,
            sum,
            count: values.iter().filter(|&&v| v > COUNT_TOL).count(),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub mode: FrpMode,
    pub da_objective: f64,
    pub scenarios: usize,
    pub violation_mwh: Stats,
    pub cost_without_penalty: Stats,
    pub cost_with_penalty: Stats,
    pub increased_fs_commitments: Stats,
    /// (scenario, quarter) cases with a price spike.
    pub price_spike_cases: usize,
}

impl ModeSummary {
    pub fn new(mode: FrpMode, da_objective: f64, rows: &[ScenarioRow]) -> Self {
        let stats = |f: fn(&ScenarioRow) -> f64| Stats::from_values(&rows.iter().map(f).collect::<Vec<_>>());
        Self {
            mode,
            da_objective,
            scenarios: rows.len(),
            violation_mwh: stats(|r| r.violation_mwh),
            cost_without_penalty: stats(|r| r.cost_without_penalty),
            cost_with_penalty: stats(|r| r.cost_with_penalty),
            increased_fs_commitments: stats(|r| f64::from(r.increased_fs_commitments)),
            price_spike_cases: rows.iter().map(|r| r.price_spikes as usize).sum(),
        }
    }
}

/// Cases where only one of two designs, or both, show a price spike.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SpikeDistribution {
    pub only_a: usize,
    pub only_b: usize,
    pub both: usize,
}

/// Scenario-level comparison of design `b` against design `a`: each count is
/// the number of scenarios where `b` has the same or a smaller value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pairwise {
    pub a: FrpMode,
    pub b: FrpMode,
    pub scenarios: usize,
    pub violation_same_or_less: usize,
    pub cost_without_penalty_same_or_less: usize,
    pub cost_with_penalty_same_or_less: usize,
    pub fs_commitments_same_or_less: usize,
    pub spikes: SpikeDistribution,
}

impl Pairwise {
    /// Rows of both designs must list the same scenarios in the same order.
    pub fn new(a: FrpMode, rows_a: &[ScenarioRow], b: FrpMode, rows_b: &[ScenarioRow], threshold: f64) -> Self {
        assert_eq!(rows_a.len(), rows_b.len(), "designs evaluated on different scenario sets");
        let count = |f: fn(&ScenarioRow) -> f64| {
            rows_a.iter().zip(rows_b).filter(|(ra, rb)| f(rb) <= f(ra)).count()
        };
        let mut spikes = SpikeDistribution::default();
        for (ra, rb) in rows_a.iter().zip(rows_b) {
            let d = spike_distribution(&ra.max_lmp, &rb.max_lmp, threshold);
            spikes.only_a += d.only_a;
            spikes.only_b += d.only_b;
            spikes.both += d.both;
        }
        Self {
            a,
            b,
            scenarios: rows_a.len(),
            violation_same_or_less: count(|r| r.violation_mwh),
            cost_without_penalty_same_or_less: count(|r| r.cost_without_penalty),
            cost_with_penalty_same_or_less: count(|r| r.cost_with_penalty),
            fs_commitments_same_or_less: count(|r| f64::from(r.increased_fs_commitments)),
            spikes,
        }
    }
}

/// Number of intervals whose highest nodal price reaches `threshold`.
/// Unpriced intervals (NaN) never count.
pub fn count_spikes(max_lmp: &[f64], threshold: f64) -> usize {
    max_lmp.iter().filter(|&&p| p >= threshold).count()
}

/// Interval-by-interval spike comparison of two designs on one scenario.
pub fn spike_distribution(max_lmp_a: &[f64], max_lmp_b: &[f64], threshold: f64) -> SpikeDistribution {
    let mut d = SpikeDistribution::default();
    for (&a, &b) in max_lmp_a.iter().zip(max_lmp_b) {
        match (a >= threshold, b >= threshold) {
            (true, true) => d.both += 1,
            (true, false) => d.only_a += 1,
            (false, true) => d.only_b += 1,
            (false, false) => {}
        }
    }
    d
}

/// All designs validated against one scenario set under one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignEvaluation {
    pub voll: f64,
    pub fs_bid_multiplier: f64,
    pub spike_threshold: f64,
    pub summaries: Vec<ModeSummary>,
    /// Every ordered pair of distinct designs.
    pub pairwise: Vec<Pairwise>,
    /// `[design][scenario]`
    #[serde(skip)]
    pub rows: Vec<Vec<ScenarioRow>>,
}

/// Rolls every scenario through every day-ahead schedule.
///
/// Scenarios run in parallel on `threads` workers (0 lets rayon decide);
/// results are collected in scenario order, so they do not depend on the
/// thread count.
pub fn evaluate_designs(
    system: &SystemModel,
    designs: &[DaSolution],
    scenarios: &[Scenario],
    backend: &dyn SolverBackend,
    config: &RtucConfig,
    threads: usize,
) -> Result<DesignEvaluation, MarketError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| MarketError::Rolling(format!("cannot start worker pool: {e}")))?;
    let rows = designs
        .iter()
        .map(|da| {
            pool.install(|| {
                scenarios
                    .par_iter()
                    .map(|s| {
                        roll_day(system, da, s, backend, config)
                            .map(|day| ScenarioRow::from(&day))
                            .map_err(|e| MarketError::Scenario {
                                scenario: s.id,
                                source: Box::new(e),
                            })
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(summarise(designs, rows, config))
}

/// Builds summaries and pairwise comparisons from per-scenario rows.
pub fn summarise(designs: &[DaSolution], rows: Vec<Vec<ScenarioRow>>, config: &RtucConfig) -> DesignEvaluation {
    let threshold = config.spike_threshold();
    let summaries = designs
        .iter()
        .zip(&rows)
        .map(|(da, r)| ModeSummary::new(da.mode, da.objective, r))
        .collect();
    let mut pairwise = Vec::new();
    for (i, da_a) in designs.iter().enumerate() {
        for (j, da_b) in designs.iter().enumerate() {
            if i != j {
                pairwise.push(Pairwise::new(da_a.mode, &rows[i], da_b.mode, &rows[j], threshold));
            }
        }
    }
    DesignEvaluation {
        voll: config.voll,
        fs_bid_multiplier: config.fs_bid_multiplier,
        spike_threshold: threshold,
        summaries,
        pairwise,
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(scenario: u32, violation: f64, max_lmp: Vec<f64>) -> ScenarioRow {
        ScenarioRow {
            scenario,
            violation_mwh: violation,
            cost_without_penalty: 100.0,
            cost_with_penalty: 100.0 + 10_000.0 * violation,
            increased_fs_commitments: 0,
            price_spikes: 0,
            max_lmp,
        }
    }

    #[test]
    fn stats_by_hand() {
        let s = Stats::from_values(&[0.0, 2.0, 4.0]);
        assert_eq!(s.sum, 6.0);
        assert_eq!(s.average, 2.0);
        assert_eq!(s.std, 2.0);
        assert_eq!(s.count, 2);
        assert_eq!(s.max, 4.0);
        assert_eq!(Stats::from_values(&[3.0]).std, 0.0);
    }

    #[test]
    fn self_comparison_counts_every_scenario() {
        let rows = vec![row(0, 5.0, vec![20.0]), row(1, 0.0, vec![9000.0])];
        let p = Pairwise::new(FrpMode::General, &rows, FrpMode::General, &rows, 5000.0);
        assert_eq!(p.violation_same_or_less, 2);
        assert_eq!(p.cost_with_penalty_same_or_less, 2);
        assert_eq!(p.spikes, SpikeDistribution { only_a: 0, only_b: 0, both: 1 });
    }

    #[test]
    fn improvement_counted_for_lower_violation() {
        let a = vec![row(0, 5.0, vec![])];
        let b = vec![row(0, 0.0, vec![])];
        assert_eq!(Pairwise::new(FrpMode::General, &a, FrpMode::Enhanced, &b, 1.0).violation_same_or_less, 1);
        assert_eq!(Pairwise::new(FrpMode::Enhanced, &b, FrpMode::General, &a, 1.0).violation_same_or_less, 0);
    }

    #[test]
    fn spikes_against_threshold() {
        let lmp = [10.0, 5000.0, f64::NAN, 10_000.0];
        assert_eq!(count_spikes(&lmp, 5000.0), 2);
        assert_eq!(count_spikes(&lmp, 1e9), 0);
        let d = spike_distribution(&lmp, &[6000.0, 10.0, 10.0, 10_000.0], 5000.0);
        assert_eq!(d, SpikeDistribution { only_a: 1, only_b: 1, both: 1 });
    }
}
