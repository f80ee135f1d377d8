//! One fifteen-minute unit-commitment run of the rolling validation.

use log::warn;

use crate::error::MarketError;
use crate::market::DaSolution;
use crate::milp::{MilpModel, Sense, VarId, VarKind};
use crate::solver::{SolveOptions, SolveStatus, SolverBackend};
use crate::system::{NodalLoads, SystemModel};

use super::{RtucConfig, QUARTER_HOURS};

/// Intervals per run that are carried over from the previous run.
pub const OVERLAP: usize = 3;
/// Binding intervals per run.
pub const BINDING: usize = 4;

/// Binding-interval schedule assembled so far, `[g][q]` for quarters
/// `0..len()`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct History {
    pub p: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub w: Vec<Vec<f64>>,
}

impl History {
    pub fn new(generators: usize) -> Self {
        Self {
            p: vec![Vec::new(); generators],
            u: vec![Vec::new(); generators],
            v: vec![Vec::new(); generators],
            w: vec![Vec::new(); generators],
        }
    }

    pub fn len(&self) -> usize {
        self.p.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub(crate) fn append(&mut self, run: &RtucRunResult) {
        for g in 0..self.p.len() {
            for i in run.binding_range() {
                self.p[g].push(run.dispatch[g][i]);
                self.u[g].push(run.commitment[g][i]);
                self.v[g].push(run.startup[g][i]);
                self.w[g].push(run.shutdown[g][i]);
            }
        }
    }
}

/// A built run with the handles needed to read it back.
#[derive(Debug, Clone)]
pub struct RtucModel {
    pub model: MilpModel,
    /// 1-based trading hour.
    pub hour: usize,
    /// Global quarter index of each interval in the run.
    pub quarters: Vec<usize>,
    /// Number of leading intervals fixed to the previous run's bindings.
    pub fixed: usize,
    p: Vec<Vec<VarId>>,
    u: Vec<Vec<VarId>>,
    v: Vec<Vec<VarId>>,
    w: Vec<Vec<VarId>>,
    shed: Vec<Vec<VarId>>,
    over: Vec<Vec<VarId>>,
    balance_rows: Vec<Vec<String>>,
}

/// Outcome of one run. Interval quantities are indexed by position in
/// `quarters`; unit quantities `[g][i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RtucRunResult {
    pub hour: usize,
    pub quarters: Vec<usize>,
    pub binding: Vec<bool>,
    pub dispatch: Vec<Vec<f64>>,
    pub commitment: Vec<Vec<f64>>,
    pub startup: Vec<Vec<f64>>,
    pub shutdown: Vec<Vec<f64>>,
    /// Unserved net load, MW.
    pub shortage: Vec<f64>,
    /// Excess generation that could not be backed down, MW.
    pub surplus: Vec<f64>,
    /// Operating cost of each interval without the balance penalty, $.
    pub cost: Vec<f64>,
    /// Nodal prices $/MWh `[i][n]`, empty for carried-over intervals or when
    /// pricing is disabled.
    pub lmp: Vec<Vec<f64>>,
}

impl RtucRunResult {
    pub fn binding_range(&self) -> std::ops::Range<usize> {
        let start = self.binding.iter().position(|&b| b).unwrap_or(self.binding.len());
        start..self.binding.len()
    }

    /// Number of leading intervals carried over from the previous run.
    pub fn fixed_intervals(&self) -> usize {
        self.binding_range().start
    }

    /// Balance violation per interval, MW.
    pub fn violation(&self, i: usize) -> f64 {
        self.shortage[i] + self.surplus[i]
    }
}

/// Effective startup/shutdown limits for unit `g` in real time.
///
/// Long-start transitions are imposed by the day-ahead schedule; they are
/// given enough room to complete within one quarter.
fn transition_limits(system: &SystemModel, g: usize) -> (f64, f64) {
    let gen = &system.generators()[g];
    if gen.fast_start {
        (gen.ramp_startup, gen.ramp_shutdown)
    } else {
        (gen.ramp_startup.max(gen.p_min), gen.ramp_shutdown.max(gen.p_max))
    }
}

/// Builds the run for 1-based trading `hour`.
///
/// `loads` holds nodal net load per quarter of the day; `history` the
/// stitched binding schedule of all earlier hours.
pub fn build_rtuc_model(
    hour: usize,
    system: &SystemModel,
    da: &DaSolution,
    history: &History,
    loads: &NodalLoads,
    config: &RtucConfig,
) -> Result<RtucModel, MarketError> {
    let day_quarters = loads.num_periods();
    let h = hour
        .checked_sub(1)
        .filter(|&h| BINDING * (h + 1) <= day_quarters)
        .ok_or_else(|| MarketError::Rolling(format!("hour {hour} outside the {day_quarters}-quarter day")))?;
    if da.hours() * BINDING != day_quarters {
        return Err(MarketError::Rolling(format!(
            "day-ahead schedule covers {} hours, real-time loads {day_quarters} quarters",
            da.hours()
        )));
    }
    if da.num_generators() != system.generators().len() {
        return Err(MarketError::Rolling("day-ahead schedule does not match the system".into()));
    }
    let start = BINDING * h;
    if history.len() != start {
        return Err(MarketError::Rolling(format!(
            "hour {hour} needs {start} prior binding intervals, have {}",
            history.len()
        )));
    }
    let first = start.saturating_sub(OVERLAP);
    let quarters: Vec<usize> = (first..start + BINDING).collect();
    let fixed = start - first;
    let gens = system.generators();
    let network = system.network();
    let nb = network.buses().len();

    let mut m = MilpModel::new(format!("rtuc-h{hour}"));
    let mut p = vec![Vec::new(); gens.len()];
    let mut u = vec![Vec::new(); gens.len()];
    let mut v = vec![Vec::new(); gens.len()];
    let mut w = vec![Vec::new(); gens.len()];
    for (g, gen) in gens.iter().enumerate() {
        let energy = gen.cost * if gen.fast_start { config.fs_bid_multiplier } else { 1.0 };
        for (i, &q) in quarters.iter().enumerate() {
            let key = format!("{},{}", gen.id, q + 1);
            let da_on = da.u[g][q / BINDING];
            let kind = if gen.fast_start { VarKind::Binary } else { VarKind::Continuous };
            let pv = m.add_var(format!("P[{key}]"), 0.0, gen.p_max, VarKind::Continuous, QUARTER_HOURS * energy);
            let uv = m.add_var(format!("u[{key}]"), 0.0, 1.0, kind, QUARTER_HOURS * gen.no_load_cost);
            let vv = m.add_var(format!("v[{key}]"), 0.0, 1.0, kind, gen.startup_cost);
            let wv = m.add_var(format!("w[{key}]"), 0.0, 1.0, kind, gen.shutdown_cost);
            if i < fixed {
                for (var, value) in [
                    (pv, history.p[g][q]),
                    (uv, history.u[g][q]),
                    (vv, history.v[g][q]),
                    (wv, history.w[g][q]),
                ] {
                    m.set_bounds(var, value, value);
                }
                // Carried-over intervals are sunk cost.
                for var in [pv, uv, vv, wv] {
                    m.set_cost(var, 0.0);
                }
            } else if !gen.fast_start {
                // Transitions are implied by the day-ahead commitment.
                let prev = match q.checked_sub(1) {
                    None => f64::from(u8::from(gen.initial_state().on)),
                    Some(r) if i > 0 && i - 1 < fixed => history.u[g][r],
                    Some(r) => da.u[g][r / BINDING],
                };
                m.set_bounds(uv, da_on, da_on);
                m.set_bounds(vv, (da_on - prev).max(0.0), (da_on - prev).max(0.0));
                m.set_bounds(wv, (prev - da_on).max(0.0), (prev - da_on).max(0.0));
            }
            p[g].push(pv);
            u[g].push(uv);
            v[g].push(vv);
            w[g].push(wv);
        }
    }

    // Fast-start units still owing initial up/down time at the start of the day.
    for (g, gen) in gens.iter().enumerate().filter(|(_, gen)| gen.fast_start) {
        let init = gen.initial_state();
        let (hours_left, value) = if init.on {
            (gen.min_up.saturating_sub(init.hours_in_state), 1.0)
        } else {
            (gen.min_down.saturating_sub(init.hours_in_state), 0.0)
        };
        for (i, &q) in quarters.iter().enumerate().skip(fixed) {
            if q < BINDING * hours_left as usize {
                m.set_bounds(u[g][i], value, value);
            }
        }
    }

    for (g, gen) in gens.iter().enumerate() {
        let init = gen.initial_state();
        let (r_su, r_sd) = transition_limits(system, g);
        for (i, &q) in quarters.iter().enumerate().skip(fixed) {
            let key = format!("{},{}", gen.id, q + 1);
            m.add_constraint("pmax", &key, [(p[g][i], 1.0), (u[g][i], -gen.p_max)], Sense::Le, 0.0);
            m.add_constraint("pmin", &key, [(p[g][i], 1.0), (u[g][i], -gen.p_min)], Sense::Ge, 0.0);
            m.add_constraint("excl", &key, [(v[g][i], 1.0), (w[g][i], 1.0)], Sense::Le, 1.0);
            if i == 0 {
                // First quarter of the day.
                let u0 = if init.on { 1.0 } else { 0.0 };
                m.add_constraint(
                    "logic",
                    &key,
                    [(v[g][0], 1.0), (w[g][0], -1.0), (u[g][0], -1.0)],
                    Sense::Eq,
                    -u0,
                );
                if !gen.fast_start {
                    if init.on && da.is_committed(g, 0) {
                        let anchor = da.p[g][0];
                        m.add_constraint("anchor_up", &key, [(p[g][0], 1.0)], Sense::Le, anchor + gen.ramp_15min);
                        m.add_constraint("anchor_dn", &key, [(p[g][0], 1.0)], Sense::Ge, anchor - gen.ramp_15min);
                    }
                } else {
                    m.add_constraint(
                        "ramp_up",
                        &key,
                        [(p[g][0], 1.0), (v[g][0], -r_su)],
                        Sense::Le,
                        init.output + gen.ramp_15min * u0,
                    );
                    m.add_constraint(
                        "ramp_dn",
                        &key,
                        [(p[g][0], -1.0), (u[g][0], -gen.ramp_15min), (w[g][0], -r_sd)],
                        Sense::Le,
                        -init.output,
                    );
                }
            } else {
                m.add_constraint(
                    "logic",
                    &key,
                    [(v[g][i], 1.0), (w[g][i], -1.0), (u[g][i], -1.0), (u[g][i - 1], 1.0)],
                    Sense::Eq,
                    0.0,
                );
                m.add_constraint(
                    "ramp_up",
                    &key,
                    [
                        (p[g][i], 1.0),
                        (p[g][i - 1], -1.0),
                        (u[g][i - 1], -gen.ramp_15min),
                        (v[g][i], -r_su),
                    ],
                    Sense::Le,
                    0.0,
                );
                m.add_constraint(
                    "ramp_dn",
                    &key,
                    [
                        (p[g][i - 1], 1.0),
                        (p[g][i], -1.0),
                        (u[g][i], -gen.ramp_15min),
                        (w[g][i], -r_sd),
                    ],
                    Sense::Le,
                    0.0,
                );
            }

            if gen.fast_start {
                // Minimum up/down in quarters over windows inside the day.
                for (family, window, vars, hist, on_sign) in [
                    ("min_up", BINDING * gen.min_up.max(1) as usize, &v, &history.v, -1.0),
                    ("min_dn", BINDING * gen.min_down.max(1) as usize, &w, &history.w, 1.0),
                ] {
                    if q + 1 < window {
                        continue;
                    }
                    let lo = q + 1 - window;
                    let carried: f64 = (lo..first).map(|s| hist[g][s]).sum();
                    let terms = (lo.max(first)..=q)
                        .map(|s| (vars[g][s - first], 1.0))
                        .chain([(u[g][i], on_sign)]);
                    let rhs = if on_sign > 0.0 { 1.0 } else { 0.0 } - carried;
                    m.add_constraint(family, &key, terms, Sense::Le, rhs);
                }
            }
        }
    }

    let ptdf = network.ptdf();
    let penalty = QUARTER_HOURS * config.voll;
    let mut shed = Vec::new();
    let mut over = Vec::new();
    let mut balance_rows = Vec::new();
    for (i, &q) in quarters.iter().enumerate().skip(fixed) {
        let mut shed_i = Vec::with_capacity(nb);
        let mut over_i = Vec::with_capacity(nb);
        let mut rows_i = Vec::with_capacity(nb);
        let mut pinj = Vec::with_capacity(nb);
        for (n, bus) in network.buses().iter().enumerate() {
            let key = format!("{bus},{}", q + 1);
            let s = m.add_var(format!("shed[{key}]"), 0.0, f64::INFINITY, VarKind::Continuous, penalty);
            let o = m.add_var(format!("over[{key}]"), 0.0, f64::INFINITY, VarKind::Continuous, penalty);
            let x = m.add_var(
                format!("pinj[{key}]"),
                f64::NEG_INFINITY,
                f64::INFINITY,
                VarKind::Continuous,
                0.0,
            );
            let terms = system
                .generators_at_bus(n)
                .iter()
                .map(|&g| (p[g][i], 1.0))
                .chain([(s, 1.0), (o, -1.0), (x, -1.0)]);
            let id = m.add_constraint("balance", &key, terms, Sense::Eq, loads.get(n, q));
            rows_i.push(m.constraint(id).name.clone());
            shed_i.push(s);
            over_i.push(o);
            pinj.push(x);
        }
        m.add_constraint(
            "system",
            (q + 1).to_string(),
            pinj.iter().map(|&x| (x, 1.0)),
            Sense::Eq,
            0.0,
        );
        for (k, line) in network.lines().iter().enumerate() {
            let terms: Vec<(VarId, f64)> = pinj.iter().enumerate().map(|(n, &x)| (x, ptdf.get(n, k))).collect();
            let key = format!("{},{}", line.id, q + 1);
            m.add_constraint("line_max", &key, terms.clone(), Sense::Le, line.rating);
            m.add_constraint("line_min", &key, terms, Sense::Ge, -line.rating);
        }
        shed.push(shed_i);
        over.push(over_i);
        balance_rows.push(rows_i);
    }

    Ok(RtucModel {
        model: m,
        hour,
        quarters,
        fixed,
        p,
        u,
        v,
        w,
        shed,
        over,
        balance_rows,
    })
}

/// Solves a run and reads back its schedule, violations, costs and prices.
pub fn run_one_process_rtuc(
    run: &RtucModel,
    system: &SystemModel,
    backend: &dyn SolverBackend,
    config: &RtucConfig,
) -> Result<RtucRunResult, MarketError> {
    let options = SolveOptions {
        mip_gap: config.mip_gap,
        time_limit: config.time_limit,
        ..SolveOptions::default()
    };
    let solution = backend.solve_milp(&run.model, &options)?;
    match solution.status {
        SolveStatus::Optimal => {}
        SolveStatus::FeasibleIncumbent => warn!("{}: time limit reached, using incumbent", run.model.name),
        SolveStatus::Infeasible => {
            return Err(crate::error::SolverError::Infeasible(solution.iis).into());
        }
        SolveStatus::TimeLimit => return Err(crate::error::SolverError::NoSolution.into()),
    }
    let x = &solution.values;
    let gens = system.generators();
    let n_int = run.quarters.len();
    let dispatch: Vec<Vec<f64>> = run.p.iter().map(|row| row.iter().map(|id| x[id.0]).collect()).collect();
    let commitment: Vec<Vec<f64>> = run
        .u
        .iter()
        .map(|row| row.iter().map(|id| x[id.0].round()).collect())
        .collect();

    // Transitions follow from the commitment; carried-over intervals keep
    // the values already recorded.
    let mut startup = vec![vec![0.0; n_int]; gens.len()];
    let mut shutdown = vec![vec![0.0; n_int]; gens.len()];
    for (g, gen) in gens.iter().enumerate() {
        for i in 0..n_int {
            if i < run.fixed {
                startup[g][i] = run.model.var(run.v[g][i]).lower;
                shutdown[g][i] = run.model.var(run.w[g][i]).lower;
                continue;
            }
            let prev = if i == 0 {
                if gen.initial_state().on { 1.0 } else { 0.0 }
            } else {
                commitment[g][i - 1]
            };
            startup[g][i] = (commitment[g][i] - prev).max(0.0);
            shutdown[g][i] = (prev - commitment[g][i]).max(0.0);
        }
    }

    let mut shortage = vec![0.0; n_int];
    let mut surplus = vec![0.0; n_int];
    let mut cost = vec![0.0; n_int];
    for (j, i) in (run.fixed..n_int).enumerate() {
        shortage[i] = run.shed[j].iter().map(|id| x[id.0]).sum();
        surplus[i] = run.over[j].iter().map(|id| x[id.0]).sum();
        cost[i] = interval_cost(system, config, |g| {
            (dispatch[g][i], commitment[g][i], startup[g][i], shutdown[g][i])
        });
    }

    let mut lmp = vec![Vec::new(); n_int];
    if config.price_intervals {
        let fixed = run.model.with_integers_fixed(x);
        let lp_options = SolveOptions {
            require_basic_duals: false,
            ..options
        };
        match backend.solve_lp_duals(&fixed, &lp_options) {
            Ok(lp) => {
                for (j, i) in (run.fixed..n_int).enumerate() {
                    lmp[i] = run.balance_rows[j]
                        .iter()
                        .map(|name| lp.row_duals[run.model.con_id(name).unwrap().0] / QUARTER_HOURS)
                        .collect();
                }
            }
            Err(e) => warn!("{}: interval pricing failed: {e}", run.model.name),
        }
    }

    Ok(RtucRunResult {
        hour: run.hour,
        quarters: run.quarters.clone(),
        binding: (0..n_int).map(|i| i >= run.fixed).collect(),
        dispatch,
        commitment,
        startup,
        shutdown,
        shortage,
        surplus,
        cost,
        lmp,
    })
}

/// Cost of one quarter given `(P, u, v, w)` per unit, without the balance penalty.
pub(crate) fn interval_cost(
    system: &SystemModel,
    config: &RtucConfig,
    state: impl Fn(usize) -> (f64, f64, f64, f64),
) -> f64 {
    system
        .generators()
        .iter()
        .enumerate()
        .map(|(g, gen)| {
            let (p, u, v, w) = state(g);
            let energy = gen.cost * if gen.fast_start { config.fs_bid_multiplier } else { 1.0 };
            QUARTER_HOURS * (energy * p + gen.no_load_cost * u) + gen.startup_cost * v + gen.shutdown_cost * w
        })
        .sum()
}
