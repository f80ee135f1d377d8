//! Constraint-by-constraint re-evaluation of a day-ahead schedule.
//!
//! Works from the raw system data only and never looks at the built model, so
//! it can catch builder mistakes as well as bad solutions.

use crate::requirements::RampRequirements;
use crate::system::{dc_flows, NodalLoads, SystemModel};

use super::{gt, tags, DaSolution, FrpMode};

/// Absolute MW tolerance for every check.
pub const FEASIBILITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Constraint name, same format as the model builder's.
    pub name: String,
    /// Amount by which the constraint is violated (MW or unitless for logic rows).
    pub amount: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn find(&self, name: &str) -> Option<&Violation> {
        self.violations.iter().find(|v| v.name == name)
    }

    pub fn names(&self) -> Vec<&str> {
        self.violations.iter().map(|v| v.name.as_str()).collect()
    }

    fn at_most(&mut self, family: &str, index: &str, lhs: f64, rhs: f64) {
        if lhs - rhs > FEASIBILITY_TOL {
            self.violations.push(Violation {
                name: format!("{family}[{index}]"),
                amount: lhs - rhs,
            });
        }
    }

    fn at_least(&mut self, family: &str, index: &str, lhs: f64, rhs: f64) {
        self.at_most(family, index, rhs, lhs);
    }

    fn equal(&mut self, family: &str, index: &str, lhs: f64, rhs: f64) {
        if (lhs - rhs).abs() > FEASIBILITY_TOL {
            self.violations.push(Violation {
                name: format!("{family}[{index}]"),
                amount: (lhs - rhs).abs(),
            });
        }
    }
}

/// Total as-bid operating cost of a schedule: energy, no-load, startup and
/// shutdown terms.
pub fn da_operating_cost(system: &SystemModel, da: &DaSolution) -> f64 {
    let mut total = 0.0;
    for (g, gen) in system.generators().iter().enumerate() {
        for t in 0..da.hours() {
            total += gen.cost * da.p[g][t]
                + gen.no_load_cost * da.u[g][t]
                + gen.startup_cost * da.v[g][t]
                + gen.shutdown_cost * da.w[g][t];
        }
    }
    total
}

/// Lists every constraint of `mode` that `da` violates by more than
/// [`FEASIBILITY_TOL`]. `reqs` may be omitted for mode none.
pub fn check_solution(
    da: &DaSolution,
    system: &SystemModel,
    loads: &NodalLoads,
    reqs: Option<&RampRequirements>,
    mode: FrpMode,
) -> ViolationReport {
    let mut r = ViolationReport::default();
    let hours = da.hours();
    let gens = system.generators();

    for (g, gen) in gens.iter().enumerate() {
        let init = gen.initial_state();
        let u0 = if init.on { 1.0 } else { 0.0 };
        let u = &da.u[g];
        let (p, v, w) = (&da.p[g], &da.v[g], &da.w[g]);
        let (ur, dr, ur_ih, dr_ih) = (&da.ur[g], &da.dr[g], &da.ur_ih[g], &da.dr_ih[g]);

        let remaining = if init.on {
            gen.min_up.saturating_sub(init.hours_in_state)
        } else {
            gen.min_down.saturating_sub(init.hours_in_state)
        } as usize;
        for t in 0..remaining.min(hours) {
            r.equal(tags::INITIAL, &gt(&gen.id, t), u[t], u0);
        }

        for t in 0..hours {
            let idx = gt(&gen.id, t);
            let frac = (u[t] - u[t].round()).abs();
            if frac > FEASIBILITY_TOL || !(-FEASIBILITY_TOL..=1.0 + FEASIBILITY_TOL).contains(&u[t]) {
                r.violations.push(Violation {
                    name: format!("{}[{idx}]", tags::INTEGRALITY),
                    amount: frac.max(-u[t]).max(u[t] - 1.0),
                });
            }
            r.at_least(tags::V_BOUNDS, &idx, v[t], 0.0);
            r.at_most(tags::V_BOUNDS, &idx, v[t], 1.0);
            r.at_least(tags::W_BOUNDS, &idx, w[t], 0.0);
            r.at_most(tags::W_BOUNDS, &idx, w[t], 1.0);
            r.at_least("nonneg", &format!("P[{idx}]"), p[t], 0.0);

            // Minimum up/down over the trailing window.
            let ut = gen.min_up.max(1) as usize;
            if t + 1 >= ut {
                let started: f64 = v[t + 1 - ut..=t].iter().sum();
                r.at_most(tags::MIN_UP, &idx, started, u[t]);
            }
            let dt = gen.min_down.max(1) as usize;
            if t + 1 >= dt {
                let stopped: f64 = w[t + 1 - dt..=t].iter().sum();
                r.at_most(tags::MIN_DOWN, &idx, stopped, 1.0 - u[t]);
            }

            let (p_prev, u_prev) = if t == 0 { (init.output, u0) } else { (p[t - 1], u[t - 1]) };
            r.at_most(
                tags::RAMP_UP,
                &idx,
                p[t] - p_prev,
                gen.ramp_hourly * u_prev + gen.ramp_startup * v[t],
            );
            r.at_most(
                tags::RAMP_DOWN,
                &idx,
                p_prev - p[t],
                gen.ramp_hourly * u[t] + gen.ramp_shutdown * w[t],
            );
            r.equal(tags::LOGIC, &idx, v[t] - w[t], u[t] - u_prev);
            r.at_most(tags::EXCLUSIVE, &idx, v[t] + w[t], 1.0);

            if mode.has_frp() {
                r.at_least("nonneg", &format!("ur[{idx}]"), ur[t], 0.0);
                r.at_least("nonneg", &format!("dr[{idx}]"), dr[t], 0.0);
                r.at_most(tags::CAP_UP, &idx, p[t] + ur[t], gen.p_max * u[t]);
                r.at_least(tags::CAP_DOWN, &idx, p[t] - dr[t], gen.p_min * u[t]);
                r.at_most(tags::FRP_UP_CAP, &idx, ur[t], gen.ramp_hourly * u[t]);
                r.at_most(tags::FRP_DOWN_CAP, &idx, dr[t], gen.ramp_hourly * u[t]);
            } else {
                r.at_most(tags::PMAX, &idx, p[t], gen.p_max * u[t]);
                r.at_least(tags::PMIN, &idx, p[t], gen.p_min * u[t]);
            }
            if mode == FrpMode::Enhanced {
                r.at_least("nonneg", &format!("ur_ih[{idx}]"), ur_ih[t], 0.0);
                r.at_least("nonneg", &format!("dr_ih[{idx}]"), dr_ih[t], 0.0);
                r.at_most(tags::IH_UP_CAP, &idx, ur_ih[t], gen.ramp_15min * u[t]);
                r.at_most(tags::IH_UP_LINK, &idx, ur_ih[t], ur[t]);
                r.at_most(tags::IH_DOWN_CAP, &idx, dr_ih[t], gen.ramp_15min * u[t]);
                r.at_most(tags::IH_DOWN_LINK, &idx, dr_ih[t], dr[t]);
            }
        }
    }

    let network = system.network();
    for t in 0..hours {
        for (n, bus) in network.buses().iter().enumerate() {
            let generation: f64 = system.generators_at_bus(n).iter().map(|&g| da.p[g][t]).sum();
            r.equal(
                tags::NODAL_BALANCE,
                &format!("{bus},{}", t + 1),
                generation - loads.get(n, t),
                da.pinj[n][t],
            );
        }
        let pinj: Vec<f64> = da.pinj.iter().map(|row| row[t]).collect();
        r.equal(tags::SYSTEM_BALANCE, &(t + 1).to_string(), pinj.iter().sum(), 0.0);
        // Flows from the reported injections via a direct DC solve.
        match dc_flows(network, &pinj) {
            Ok(flows) => {
                for (line, flow) in network.lines().iter().zip(flows) {
                    let idx = format!("{},{}", line.id, t + 1);
                    r.at_most(tags::LINE_MAX, &idx, flow, line.rating);
                    r.at_least(tags::LINE_MIN, &idx, flow, -line.rating);
                }
            }
            Err(e) => {
                log::error!("flow evaluation failed: {e}");
                r.violations.push(Violation {
                    name: format!("{}[{}]", tags::LINE_MAX, t + 1),
                    amount: f64::INFINITY,
                });
            }
        }

        if let (true, Some(reqs)) = (mode.has_frp(), reqs) {
            let sum = |x: &Vec<Vec<f64>>| x.iter().map(|row| row[t]).sum::<f64>();
            let idx = (t + 1).to_string();
            r.at_least(tags::FRP_UP_REQ, &idx, sum(&da.ur), reqs.up[t]);
            r.at_least(tags::FRP_DOWN_REQ, &idx, sum(&da.dr), reqs.down[t]);
            if mode == FrpMode::Enhanced {
                let up = reqs.up_quarters[t].iter().copied().fold(0.0, f64::max);
                let down = reqs.down_quarters[t].iter().copied().fold(0.0, f64::max);
                r.at_least(tags::IH_UP_REQ, &idx, sum(&da.ur_ih), up);
                r.at_least(tags::IH_DOWN_REQ, &idx, sum(&da.dr_ih), down);
            }
        }
    }
    r
}
