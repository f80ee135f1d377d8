//! Day-ahead unit commitment with optional flexible ramping products.

mod check;

use std::io::Write;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::error::{MarketError, SolverError};
use crate::milp::{MilpModel, Sense, VarId, VarKind};
use crate::requirements::{NetLoadProfile, RampRequirements, TerminalRule};
use crate::solver::{SolveOptions, SolveStatus, SolverBackend};
use crate::system::{nodal_loads, BusId, NodalLoads, SystemModel};

pub use check::{check_solution, da_operating_cost, Violation, ViolationReport, FEASIBILITY_TOL};

/// PTDF entries below this magnitude are left out of the line rows.
const PTDF_EPS: f64 = 1e-10;

/// Constraint family tags. Every constraint is named `tag[index]` with
/// 1-based periods, e.g. `1d[G3,7]` or `1t[7]`.
pub mod tags {
    pub const MIN_UP: &str = "1b";
    pub const MIN_DOWN: &str = "1c";
    pub const RAMP_UP: &str = "1d";
    pub const RAMP_DOWN: &str = "1e";
    pub const NODAL_BALANCE: &str = "1f";
    pub const SYSTEM_BALANCE: &str = "1g";
    pub const LINE_MAX: &str = "1h";
    pub const LINE_MIN: &str = "1i";
    pub const LOGIC: &str = "1j";
    pub const EXCLUSIVE: &str = "1k";
    pub const CAP_UP: &str = "1p";
    pub const CAP_DOWN: &str = "1q";
    pub const FRP_UP_CAP: &str = "1r";
    pub const FRP_DOWN_CAP: &str = "1s";
    pub const FRP_UP_REQ: &str = "1t";
    pub const FRP_DOWN_REQ: &str = "1u";
    pub const IH_UP_REQ: &str = "2e";
    pub const IH_UP_CAP: &str = "2f";
    pub const IH_UP_LINK: &str = "2g";
    pub const IH_DOWN_REQ: &str = "2l";
    pub const IH_DOWN_CAP: &str = "2m";
    pub const IH_DOWN_LINK: &str = "2n";
    /// Output limits used when no FRP families are present.
    pub const PMAX: &str = "pmax";
    pub const PMIN: &str = "pmin";

    /// Bound families: they are variable bounds rather than rows, but the
    /// checker reports them under these names.
    pub const V_BOUNDS: &str = "1l";
    pub const W_BOUNDS: &str = "1m";
    pub const INTEGRALITY: &str = "1o";
    /// Commitment forced by the initial up/down time still to serve.
    pub const INITIAL: &str = "init";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrpMode {
    None,
    General,
    Enhanced,
}

impl FrpMode {
    pub const ALL: [FrpMode; 3] = [FrpMode::None, FrpMode::General, FrpMode::Enhanced];

    pub fn as_str(self) -> &'static str {
        match self {
            FrpMode::None => "none",
            FrpMode::General => "general",
            FrpMode::Enhanced => "enhanced",
        }
    }

    pub fn has_frp(self) -> bool {
        self != FrpMode::None
    }
}

impl std::fmt::Display for FrpMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for FrpMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Ok(FrpMode::None),
            "general" => Ok(FrpMode::General),
            "enhanced" => Ok(FrpMode::Enhanced),
            other => Err(format!("unknown FRP mode '{other}' (expected none, general or enhanced)")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DaOptions {
    /// When set, requirement rows get a shortfall variable priced at this
    /// $/MW instead of being hard. Diagnostic use only.
    pub soft_frp_penalty: Option<f64>,
}

/// Variable handles, `[g][t]` for unit quantities and `[n][t]` for buses.
#[derive(Debug, Clone)]
pub(crate) struct DaIndex {
    pub p: Vec<Vec<VarId>>,
    pub u: Vec<Vec<VarId>>,
    pub v: Vec<Vec<VarId>>,
    pub w: Vec<Vec<VarId>>,
    pub ur: Option<Vec<Vec<VarId>>>,
    pub dr: Option<Vec<Vec<VarId>>>,
    pub ur_ih: Option<Vec<Vec<VarId>>>,
    pub dr_ih: Option<Vec<Vec<VarId>>>,
    pub pinj: Vec<Vec<VarId>>,
    pub shortfall: Vec<VarId>,
}

/// A built day-ahead model together with the handles needed to read it back.
#[derive(Debug, Clone)]
pub struct DaModel {
    pub model: MilpModel,
    pub mode: FrpMode,
    pub(crate) index: DaIndex,
    generator_ids: Vec<String>,
    bus_ids: Vec<BusId>,
    line_ids: Vec<String>,
    hours: usize,
}

impl DaModel {
    pub fn hours(&self) -> usize {
        self.hours
    }

    pub fn generator_ids(&self) -> &[String] {
        &self.generator_ids
    }

    pub fn bus_ids(&self) -> &[BusId] {
        &self.bus_ids
    }

    pub fn line_ids(&self) -> &[String] {
        &self.line_ids
    }

    /// LP-format text of the model.
    pub fn to_lp_string(&self) -> String {
        self.model.to_lp_string()
    }

    /// Copy of the model with every commitment fixed to `commitment[g][t]`
    /// and no integer variables left.
    pub fn fix_commitment(&self, commitment: &[Vec<f64>]) -> MilpModel {
        let mut values = vec![0.0; self.model.variables().len()];
        for (ids, row) in self.index.u.iter().zip(commitment) {
            for (id, &x) in ids.iter().zip(row) {
                values[id.0] = x;
            }
        }
        self.model.with_integers_fixed(&values)
    }

    /// Name of the unit variable `var` (e.g. `"ur"`) for generator `g`, 0-based period `t`.
    pub fn var_name(&self, var: &str, g: usize, t: usize) -> String {
        unit_index(var, &self.generator_ids[g], t)
    }
}

fn unit_index(prefix: &str, id: &str, t: usize) -> String {
    format!("{prefix}[{id},{}]", t + 1)
}

pub(crate) fn gt(id: &str, t: usize) -> String {
    format!("{id},{}", t + 1)
}

/// Builds the day-ahead MILP for `mode`.
pub fn build_da_model(
    system: &SystemModel,
    loads: &NodalLoads,
    reqs: Option<&RampRequirements>,
    mode: FrpMode,
) -> Result<DaModel, MarketError> {
    build_da_model_with(system, loads, reqs, mode, &DaOptions::default())
}

pub fn build_da_model_with(
    system: &SystemModel,
    loads: &NodalLoads,
    reqs: Option<&RampRequirements>,
    mode: FrpMode,
    options: &DaOptions,
) -> Result<DaModel, MarketError> {
    let hours = loads.num_periods();
    let network = system.network();
    let nb = network.buses().len();
    if hours == 0 {
        return Err(MarketError::Dimension("load series has no periods".into()));
    }
    if loads.period(0).len() != nb {
        return Err(MarketError::Dimension(format!(
            "loads cover {} buses, network has {nb}",
            loads.period(0).len()
        )));
    }
    let reqs = match (mode, reqs) {
        (FrpMode::None, _) => None,
        (_, None) => return Err(MarketError::MissingRequirements(mode.as_str())),
        (_, Some(r)) => {
            if r.hours() != hours
                || r.up_intra_rhs.len() != hours
                || r.down.len() != hours
                || r.down_intra_rhs.len() != hours
            {
                return Err(MarketError::Dimension(format!(
                    "requirements cover {} hours, loads cover {hours}",
                    r.hours()
                )));
            }
            Some(r)
        }
    };

    let gens = system.generators();
    let mut m = MilpModel::new(format!("da-{}-{}", system.name, mode));
    let grid = |m: &mut MilpModel, prefix: &str, lo: f64, hi: f64, kind: VarKind, cost: &dyn Fn(usize) -> f64| {
        gens.iter()
            .enumerate()
            .map(|(g, gen)| {
                (0..hours)
                    .map(|t| m.add_var(unit_index(prefix, &gen.id, t), lo, hi, kind, cost(g)))
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>()
    };

    let p = grid(&mut m, "P", 0.0, f64::INFINITY, VarKind::Continuous, &|g| gens[g].cost);
    let u = grid(&mut m, "u", 0.0, 1.0, VarKind::Binary, &|g| gens[g].no_load_cost);
    let v = grid(&mut m, "v", 0.0, 1.0, VarKind::Continuous, &|g| gens[g].startup_cost);
    let w = grid(&mut m, "w", 0.0, 1.0, VarKind::Continuous, &|g| gens[g].shutdown_cost);
    let zero = |_: usize| 0.0;
    let (ur, dr) = if mode.has_frp() {
        (
            Some(grid(&mut m, "ur", 0.0, f64::INFINITY, VarKind::Continuous, &zero)),
            Some(grid(&mut m, "dr", 0.0, f64::INFINITY, VarKind::Continuous, &zero)),
        )
    } else {
        (None, None)
    };
    let (ur_ih, dr_ih) = if mode == FrpMode::Enhanced {
        (
            Some(grid(&mut m, "ur_ih", 0.0, f64::INFINITY, VarKind::Continuous, &zero)),
            Some(grid(&mut m, "dr_ih", 0.0, f64::INFINITY, VarKind::Continuous, &zero)),
        )
    } else {
        (None, None)
    };
    let pinj: Vec<Vec<VarId>> = network
        .buses()
        .iter()
        .map(|bus| {
            (0..hours)
                .map(|t| {
                    m.add_var(
                        format!("pinj[{bus},{}]", t + 1),
                        f64::NEG_INFINITY,
                        f64::INFINITY,
                        VarKind::Continuous,
                        0.0,
                    )
                })
                .collect()
        })
        .collect();

    for (g, gen) in gens.iter().enumerate() {
        let init = gen.initial_state();
        let u0 = if init.on { 1.0 } else { 0.0 };

        // Remaining initial up/down time is served by fixing the commitment.
        let (carry, value) = if init.on {
            (gen.min_up.saturating_sub(init.hours_in_state), 1.0)
        } else {
            (gen.min_down.saturating_sub(init.hours_in_state), 0.0)
        };
        for t in 0..(carry as usize).min(hours) {
            m.set_bounds(u[g][t], value, value);
        }

        let ut = gen.min_up.max(1) as usize;
        for t in (ut - 1)..hours {
            let terms = (t + 1 - ut..=t).map(|s| (v[g][s], 1.0)).chain([(u[g][t], -1.0)]);
            m.add_constraint(tags::MIN_UP, gt(&gen.id, t), terms, Sense::Le, 0.0);
        }
        let dt = gen.min_down.max(1) as usize;
        for t in (dt - 1)..hours {
            let terms = (t + 1 - dt..=t).map(|s| (w[g][s], 1.0)).chain([(u[g][t], 1.0)]);
            m.add_constraint(tags::MIN_DOWN, gt(&gen.id, t), terms, Sense::Le, 1.0);
        }

        for t in 0..hours {
            let idx = gt(&gen.id, t);
            if t == 0 {
                m.add_constraint(
                    tags::RAMP_UP,
                    &idx,
                    [(p[g][0], 1.0), (v[g][0], -gen.ramp_startup)],
                    Sense::Le,
                    init.output + gen.ramp_hourly * u0,
                );
                m.add_constraint(
                    tags::RAMP_DOWN,
                    &idx,
                    [(p[g][0], -1.0), (u[g][0], -gen.ramp_hourly), (w[g][0], -gen.ramp_shutdown)],
                    Sense::Le,
                    -init.output,
                );
                m.add_constraint(
                    tags::LOGIC,
                    &idx,
                    [(v[g][0], 1.0), (w[g][0], -1.0), (u[g][0], -1.0)],
                    Sense::Eq,
                    -u0,
                );
            } else {
                m.add_constraint(
                    tags::RAMP_UP,
                    &idx,
                    [
                        (p[g][t], 1.0),
                        (p[g][t - 1], -1.0),
                        (u[g][t - 1], -gen.ramp_hourly),
                        (v[g][t], -gen.ramp_startup),
                    ],
                    Sense::Le,
                    0.0,
                );
                m.add_constraint(
                    tags::RAMP_DOWN,
                    &idx,
                    [
                        (p[g][t - 1], 1.0),
                        (p[g][t], -1.0),
                        (u[g][t], -gen.ramp_hourly),
                        (w[g][t], -gen.ramp_shutdown),
                    ],
                    Sense::Le,
                    0.0,
                );
                m.add_constraint(
                    tags::LOGIC,
                    &idx,
                    [(v[g][t], 1.0), (w[g][t], -1.0), (u[g][t], -1.0), (u[g][t - 1], 1.0)],
                    Sense::Eq,
                    0.0,
                );
            }
            m.add_constraint(tags::EXCLUSIVE, &idx, [(v[g][t], 1.0), (w[g][t], 1.0)], Sense::Le, 1.0);

            match (&ur, &dr) {
                (Some(ur), Some(dr)) => {
                    m.add_constraint(
                        tags::CAP_UP,
                        &idx,
                        [(p[g][t], 1.0), (ur[g][t], 1.0), (u[g][t], -gen.p_max)],
                        Sense::Le,
                        0.0,
                    );
                    m.add_constraint(
                        tags::CAP_DOWN,
                        &idx,
                        [(p[g][t], 1.0), (dr[g][t], -1.0), (u[g][t], -gen.p_min)],
                        Sense::Ge,
                        0.0,
                    );
                    m.add_constraint(
                        tags::FRP_UP_CAP,
                        &idx,
                        [(ur[g][t], 1.0), (u[g][t], -gen.ramp_hourly)],
                        Sense::Le,
                        0.0,
                    );
                    m.add_constraint(
                        tags::FRP_DOWN_CAP,
                        &idx,
                        [(dr[g][t], 1.0), (u[g][t], -gen.ramp_hourly)],
                        Sense::Le,
                        0.0,
                    );
                }
                _ => {
                    m.add_constraint(
                        tags::PMAX,
                        &idx,
                        [(p[g][t], 1.0), (u[g][t], -gen.p_max)],
                        Sense::Le,
                        0.0,
                    );
                    m.add_constraint(
                        tags::PMIN,
                        &idx,
                        [(p[g][t], 1.0), (u[g][t], -gen.p_min)],
                        Sense::Ge,
                        0.0,
                    );
                }
            }
            if let (Some(ur), Some(dr), Some(ur_ih), Some(dr_ih)) = (&ur, &dr, &ur_ih, &dr_ih) {
                m.add_constraint(
                    tags::IH_UP_CAP,
                    &idx,
                    [(ur_ih[g][t], 1.0), (u[g][t], -gen.ramp_15min)],
                    Sense::Le,
                    0.0,
                );
                m.add_constraint(tags::IH_UP_LINK, &idx, [(ur_ih[g][t], 1.0), (ur[g][t], -1.0)], Sense::Le, 0.0);
                m.add_constraint(
                    tags::IH_DOWN_CAP,
                    &idx,
                    [(dr_ih[g][t], 1.0), (u[g][t], -gen.ramp_15min)],
                    Sense::Le,
                    0.0,
                );
                m.add_constraint(
                    tags::IH_DOWN_LINK,
                    &idx,
                    [(dr_ih[g][t], 1.0), (dr[g][t], -1.0)],
                    Sense::Le,
                    0.0,
                );
            }
        }
    }

    let ptdf = network.ptdf();
    for t in 0..hours {
        for (n, bus) in network.buses().iter().enumerate() {
            let terms = system
                .generators_at_bus(n)
                .iter()
                .map(|&g| (p[g][t], 1.0))
                .chain([(pinj[n][t], -1.0)]);
            m.add_constraint(
                tags::NODAL_BALANCE,
                format!("{bus},{}", t + 1),
                terms,
                Sense::Eq,
                loads.get(n, t),
            );
        }
        m.add_constraint(
            tags::SYSTEM_BALANCE,
            (t + 1).to_string(),
            (0..nb).map(|n| (pinj[n][t], 1.0)),
            Sense::Eq,
            0.0,
        );
        for (k, line) in network.lines().iter().enumerate() {
            let terms: Vec<(VarId, f64)> = (0..nb)
                .map(|n| (pinj[n][t], ptdf.get(n, k)))
                .filter(|(_, h)| h.abs() > PTDF_EPS)
                .collect();
            let idx = format!("{},{}", line.id, t + 1);
            m.add_constraint(tags::LINE_MAX, &idx, terms.clone(), Sense::Le, line.rating);
            m.add_constraint(tags::LINE_MIN, &idx, terms, Sense::Ge, -line.rating);
        }
    }

    let mut shortfall = Vec::new();
    let mut requirement_row =
        |m: &mut MilpModel, family: &'static str, t: usize, vars: &[Vec<VarId>], rhs: f64| {
            let mut terms: Vec<(VarId, f64)> = vars.iter().map(|row| (row[t], 1.0)).collect();
            if let Some(penalty) = options.soft_frp_penalty {
                let s = m.add_var(
                    format!("short_{family}[{}]", t + 1),
                    0.0,
                    f64::INFINITY,
                    VarKind::Continuous,
                    penalty,
                );
                shortfall.push(s);
                terms.push((s, 1.0));
            }
            m.add_constraint(family, (t + 1).to_string(), terms, Sense::Ge, rhs);
        };
    if let (Some(reqs), Some(ur), Some(dr)) = (reqs, &ur, &dr) {
        for t in 0..hours {
            requirement_row(&mut m, tags::FRP_UP_REQ, t, ur, reqs.up[t]);
            requirement_row(&mut m, tags::FRP_DOWN_REQ, t, dr, reqs.down[t]);
            if let (Some(ur_ih), Some(dr_ih)) = (&ur_ih, &dr_ih) {
                requirement_row(&mut m, tags::IH_UP_REQ, t, ur_ih, reqs.up_intra_rhs[t]);
                requirement_row(&mut m, tags::IH_DOWN_REQ, t, dr_ih, reqs.down_intra_rhs[t]);
            }
        }
    }

    info!(
        "built {} model: {} variables, {} constraints",
        m.name,
        m.variables().len(),
        m.constraints().len()
    );
    Ok(DaModel {
        model: m,
        mode,
        index: DaIndex {
            p,
            u,
            v,
            w,
            ur,
            dr,
            ur_ih,
            dr_ih,
            pinj,
            shortfall,
        },
        generator_ids: gens.iter().map(|g| g.id.clone()).collect(),
        bus_ids: network.buses().to_vec(),
        line_ids: network.lines().iter().map(|l| l.id.clone()).collect(),
        hours,
    })
}

/// Day-ahead schedule. Unit quantities are `[g][t]`, bus quantities `[n][t]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DaSolution {
    pub mode: FrpMode,
    pub generator_ids: Vec<String>,
    pub bus_ids: Vec<BusId>,
    pub p: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub w: Vec<Vec<f64>>,
    pub ur: Vec<Vec<f64>>,
    pub dr: Vec<Vec<f64>>,
    pub ur_ih: Vec<Vec<f64>>,
    pub dr_ih: Vec<Vec<f64>>,
    pub pinj: Vec<Vec<f64>>,
    /// $, including any shortfall penalty.
    pub objective: f64,
    pub mip_gap: f64,
    /// False when the time limit stopped the search before the gap was reached.
    pub gap_certified: bool,
    /// Requirement shortfall (MW) per soft requirement row, when softened.
    pub shortfall: Vec<(String, f64)>,
}

impl DaSolution {
    pub fn hours(&self) -> usize {
        self.p.first().map_or(0, Vec::len)
    }

    pub fn num_generators(&self) -> usize {
        self.p.len()
    }

    pub fn is_committed(&self, g: usize, t: usize) -> bool {
        self.u[g][t] > 0.5
    }

    /// Solution with every quantity set directly, as if from a solver.
    pub(crate) fn read(model: &DaModel, values: &[f64], objective: f64, mip_gap: f64, certified: bool) -> Self {
        let read = |ids: &Vec<Vec<VarId>>| -> Vec<Vec<f64>> {
            ids.iter()
                .map(|row| row.iter().map(|id| values[id.0]).collect())
                .collect()
        };
        let binary = |ids: &Vec<Vec<VarId>>| -> Vec<Vec<f64>> {
            ids.iter()
                .map(|row| row.iter().map(|id| snap(values[id.0])).collect())
                .collect()
        };
        let zeros = vec![vec![0.0; model.hours]; model.generator_ids.len()];
        let optional = |ids: &Option<Vec<Vec<VarId>>>| match ids {
            Some(ids) => read(ids).into_iter().map(|r| r.into_iter().map(|x| x.max(0.0)).collect()).collect(),
            None => zeros.clone(),
        };
        let shortfall = model
            .index
            .shortfall
            .iter()
            .map(|id| (model.model.var(*id).name.clone(), values[id.0]))
            .collect();
        DaSolution {
            mode: model.mode,
            generator_ids: model.generator_ids.clone(),
            bus_ids: model.bus_ids.clone(),
            p: read(&model.index.p),
            u: binary(&model.index.u),
            v: binary(&model.index.v),
            w: binary(&model.index.w),
            ur: optional(&model.index.ur),
            dr: optional(&model.index.dr),
            ur_ih: optional(&model.index.ur_ih),
            dr_ih: optional(&model.index.dr_ih),
            pinj: read(&model.index.pinj),
            objective,
            mip_gap,
            gap_certified: certified,
            shortfall,
        }
    }

    /// Writes `g,t,P,u,v,w,ur,dr,ur_ih,dr_ih` rows, `t` 1-based.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["g", "t", "P", "u", "v", "w", "ur", "dr", "ur_ih", "dr_ih"])?;
        for (g, id) in self.generator_ids.iter().enumerate() {
            for t in 0..self.hours() {
                let mut record = vec![id.clone(), (t + 1).to_string()];
                for series in [
                    &self.p, &self.u, &self.v, &self.w, &self.ur, &self.dr, &self.ur_ih, &self.dr_ih,
                ] {
                    record.push(series[g][t].to_string());
                }
                wtr.write_record(&record)?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Rounds values within integrality tolerance of 0 or 1; others are kept.
fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-6 {
        r
    } else {
        x
    }
}

/// Solves a built day-ahead model.
pub fn solve_da(
    model: &DaModel,
    backend: &dyn SolverBackend,
    options: &SolveOptions,
) -> Result<DaSolution, MarketError> {
    let solution = backend.solve_milp(&model.model, options)?;
    match solution.status {
        SolveStatus::Infeasible => return Err(SolverError::Infeasible(solution.iis).into()),
        SolveStatus::TimeLimit => return Err(SolverError::NoSolution.into()),
        SolveStatus::FeasibleIncumbent => warn!(
            "{}: time limit reached, returning incumbent at gap {:.4}",
            model.model.name, solution.mip_gap
        ),
        SolveStatus::Optimal => {}
    }
    let certified = solution.status == SolveStatus::Optimal;
    let mut da = DaSolution::read(model, &solution.values, solution.objective, solution.mip_gap, certified);
    let mut values = solution.values;
    for ids in [&model.index.u, &model.index.v, &model.index.w] {
        for row in ids {
            for id in row {
                values[id.0] = snap(values[id.0]);
            }
        }
    }
    da.objective = model.model.objective_value(&values);
    info!(
        "{}: objective {:.4}, gap {:.2e}",
        model.model.name, da.objective, da.mip_gap
    );
    Ok(da)
}

/// Builds and solves the day-ahead market on the hourly forecast of
/// `profile`, with requirements derived from the same profile.
pub fn clear_day_ahead(
    system: &SystemModel,
    profile: &NetLoadProfile,
    mode: FrpMode,
    rule: TerminalRule,
    backend: &dyn SolverBackend,
    options: &SolveOptions,
) -> Result<(DaModel, DaSolution), MarketError> {
    let loads = nodal_loads(system, profile.hourly());
    let reqs = RampRequirements::compute(profile, rule);
    let model = build_da_model(system, &loads, mode.has_frp().then_some(&reqs), mode)?;
    let da = solve_da(&model, backend, options)?;
    Ok((model, da))
}
