//! Fixed-commitment pricing, FRP payments, LMPs and settlements.
//!
//! All duals are reported as non-negative multipliers of their row in the
//! row's natural direction (`≤` rows for caps and limits, `≥` rows for
//! requirements), so a binding constraint yields a non-negative price.
//! Equality rows (nodal and system balance) keep the sign of
//! ∂cost/∂right-hand side.

use std::io::Write;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{MarketError, SolverError};
use crate::market::{da_operating_cost, gt, tags, DaModel, DaSolution, FrpMode};
use crate::solver::{LpSolution, SolveOptions, SolverBackend};
use crate::system::{BusId, NodalLoads, SystemModel};

/// Duals of the fixed-commitment LP. Unit quantities `[g][t]`, bus `[n][t]`,
/// line `[k][t]`, system `[t]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSolution {
    pub mode: FrpMode,
    pub generator_ids: Vec<String>,
    pub bus_ids: Vec<BusId>,
    pub line_ids: Vec<String>,
    /// $/MW
    pub pi_up: Vec<f64>,
    pub pi_down: Vec<f64>,
    pub pi_ih_up: Vec<f64>,
    pub pi_ih_down: Vec<f64>,
    pub alpha_up: Vec<Vec<f64>>,
    pub alpha_down: Vec<Vec<f64>>,
    pub beta_up: Vec<Vec<f64>>,
    pub beta_down: Vec<Vec<f64>>,
    pub beta_ih_up: Vec<Vec<f64>>,
    pub beta_ih_down: Vec<Vec<f64>>,
    pub omega_up: Vec<Vec<f64>>,
    pub omega_down: Vec<Vec<f64>>,
    /// Ramp-up row duals.
    pub gamma_down: Vec<Vec<f64>>,
    /// Ramp-down row duals.
    pub gamma_up: Vec<Vec<f64>>,
    /// $/MWh
    pub delta: Vec<Vec<f64>>,
    pub lambda: Vec<f64>,
    pub f_up: Vec<Vec<f64>>,
    pub f_down: Vec<Vec<f64>>,
    /// Reduced costs of the award columns, as returned by the LP.
    pub rc_ur: Vec<Vec<f64>>,
    pub rc_dr: Vec<Vec<f64>>,
    pub rc_ur_ih: Vec<Vec<f64>>,
    pub rc_dr_ih: Vec<Vec<f64>>,
    pub lp_objective: f64,
    pub milp_objective: f64,
    /// The LP has several optimal bases; payments depend on which one was found.
    pub degenerate: bool,
    /// LP primal at the priced vertex, the schedule the duals are complementary to.
    pub schedule: DaSolution,
}

/// Fixes the commitment of `da` and prices the resulting LP.
pub fn fix_and_price(
    model: &DaModel,
    da: &DaSolution,
    backend: &dyn SolverBackend,
) -> Result<PriceSolution, MarketError> {
    let fixed = model.fix_commitment(&da.u);
    let options = SolveOptions {
        require_basic_duals: true,
        ..SolveOptions::default()
    };
    let lp = match backend.solve_lp_duals(&fixed, &options) {
        Ok(lp) => lp,
        Err(SolverError::Infeasible(_)) => return Err(MarketError::PricingInfeasible),
        Err(e) => return Err(e.into()),
    };
    let rel = (lp.objective - da.objective).abs() / da.objective.abs().max(1.0);
    if rel > 1e-6 {
        warn!(
            "{}: fixed-commitment LP objective {} differs from MILP objective {}",
            model.model.name, lp.objective, da.objective
        );
    }
    if lp.degenerate() {
        warn!("{}: pricing LP is degenerate; FRP prices may not be unique", model.model.name);
    }
    Ok(extract(model, da, &lp))
}

fn extract(model: &DaModel, da: &DaSolution, lp: &LpSolution) -> PriceSolution {
    let m = &model.model;
    let hours = model.hours();
    // Non-negative multiplier of a row: `sign` = -1 for ≤ rows, +1 otherwise.
    let dual = |family: &str, index: &str, sign: f64| -> f64 {
        m.con_id(&format!("{family}[{index}]"))
            .map_or(0.0, |id| sign * lp.row_duals[id.0] + 0.0)
    };
    let per_unit = |family: &str, sign: f64| -> Vec<Vec<f64>> {
        model
            .generator_ids()
            .iter()
            .map(|id| (0..hours).map(|t| dual(family, &gt(id, t), sign)).collect())
            .collect()
    };
    let per_period =
        |family: &str, sign: f64| -> Vec<f64> { (0..hours).map(|t| dual(family, &(t + 1).to_string(), sign)).collect() };
    let reduced = |var: &str| -> Vec<Vec<f64>> {
        (0..model.generator_ids().len())
            .map(|g| {
                (0..hours)
                    .map(|t| m.var_id(&model.var_name(var, g, t)).map_or(0.0, |id| lp.reduced_costs[id.0]))
                    .collect()
            })
            .collect()
    };
    let by_key = |family: &str, keys: &[String], sign: f64| -> Vec<Vec<f64>> {
        keys.iter()
            .map(|key| (0..hours).map(|t| dual(family, &format!("{key},{}", t + 1), sign)).collect())
            .collect()
    };
    let bus_keys: Vec<String> = model.bus_ids().iter().map(|b| b.to_string()).collect();

    let schedule = DaSolution::read(model, &lp.values, lp.objective, 0.0, true);
    PriceSolution {
        mode: model.mode,
        generator_ids: model.generator_ids().to_vec(),
        bus_ids: model.bus_ids().to_vec(),
        line_ids: model.line_ids().to_vec(),
        pi_up: per_period(tags::FRP_UP_REQ, 1.0),
        pi_down: per_period(tags::FRP_DOWN_REQ, 1.0),
        pi_ih_up: per_period(tags::IH_UP_REQ, 1.0),
        pi_ih_down: per_period(tags::IH_DOWN_REQ, 1.0),
        alpha_up: per_unit(tags::CAP_UP, -1.0),
        alpha_down: per_unit(tags::CAP_DOWN, 1.0),
        beta_up: per_unit(tags::FRP_UP_CAP, -1.0),
        beta_down: per_unit(tags::FRP_DOWN_CAP, -1.0),
        beta_ih_up: per_unit(tags::IH_UP_CAP, -1.0),
        beta_ih_down: per_unit(tags::IH_DOWN_CAP, -1.0),
        omega_up: per_unit(tags::IH_UP_LINK, -1.0),
        omega_down: per_unit(tags::IH_DOWN_LINK, -1.0),
        gamma_down: per_unit(tags::RAMP_UP, -1.0),
        gamma_up: per_unit(tags::RAMP_DOWN, -1.0),
        delta: by_key(tags::NODAL_BALANCE, &bus_keys, 1.0),
        lambda: per_period(tags::SYSTEM_BALANCE, 1.0),
        f_up: by_key(tags::LINE_MAX, model.line_ids(), -1.0),
        f_down: by_key(tags::LINE_MIN, model.line_ids(), 1.0),
        rc_ur: reduced("ur"),
        rc_dr: reduced("dr"),
        rc_ur_ih: reduced("ur_ih"),
        rc_dr_ih: reduced("dr_ih"),
        lp_objective: lp.objective,
        milp_objective: da.objective,
        degenerate: lp.degenerate(),
        schedule,
    }
}

/// Upward FRP payment of generator `g`: Σ_t π⁺_t·ur_gt + π^ih,+_t·ur^ih_gt.
pub fn frp_up_payment(prices: &PriceSolution, da: &DaSolution, g: usize) -> f64 {
    (0..da.hours())
        .map(|t| prices.pi_up[t] * da.ur[g][t] + prices.pi_ih_up[t] * da.ur_ih[g][t])
        .sum()
}

/// Downward mirror of [`frp_up_payment`].
pub fn frp_down_payment(prices: &PriceSolution, da: &DaSolution, g: usize) -> f64 {
    (0..da.hours())
        .map(|t| prices.pi_down[t] * da.dr[g][t] + prices.pi_ih_down[t] * da.dr_ih[g][t])
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PricingIssue {
    /// Which check failed, e.g. `identity_up[G1,3]`.
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PricingReport {
    pub issues: Vec<PricingIssue>,
}

impl PricingReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn names(&self) -> Vec<&str> {
        self.issues.iter().map(|i| i.name.as_str()).collect()
    }

    fn le(&mut self, name: String, lhs: f64, rhs: f64, scale: f64) {
        if lhs - rhs > PRICE_TOL * scale.max(1.0) {
            self.issues.push(PricingIssue { name, lhs, rhs });
        }
    }

    fn same(&mut self, name: String, lhs: f64, rhs: f64, scale: f64) {
        if (lhs - rhs).abs() > PRICE_TOL * scale.max(1.0) {
            self.issues.push(PricingIssue { name, lhs, rhs });
        }
    }
}

pub const PRICE_TOL: f64 = 1e-6;

/// Checks the award-column dual constraints, the payment identity and their
/// downward mirrors for every unit and period, plus agreement of the LP
/// and MILP objectives.
pub fn verify_pricing_identities(prices: &PriceSolution, da: &DaSolution) -> PricingReport {
    let mut r = PricingReport::default();
    r.same(
        "objective".into(),
        prices.lp_objective,
        prices.milp_objective,
        prices.milp_objective.abs(),
    );
    if !prices.mode.has_frp() {
        return r;
    }
    let enhanced = prices.mode == FrpMode::Enhanced;
    for (g, id) in prices.generator_ids.iter().enumerate() {
        for t in 0..da.hours() {
            let idx = gt(id, t);
            for up in [true, false] {
                let side = if up { "up" } else { "down" };
                let (pi, pi_ih, alpha, beta, beta_ih, omega, x, x_ih, rc, rc_ih) = if up {
                    (
                        prices.pi_up[t],
                        prices.pi_ih_up[t],
                        prices.alpha_up[g][t],
                        prices.beta_up[g][t],
                        prices.beta_ih_up[g][t],
                        prices.omega_up[g][t],
                        da.ur[g][t],
                        da.ur_ih[g][t],
                        prices.rc_ur[g][t],
                        prices.rc_ur_ih[g][t],
                    )
                } else {
                    (
                        prices.pi_down[t],
                        prices.pi_ih_down[t],
                        prices.alpha_down[g][t],
                        prices.beta_down[g][t],
                        prices.beta_ih_down[g][t],
                        prices.omega_down[g][t],
                        da.dr[g][t],
                        da.dr_ih[g][t],
                        prices.rc_dr[g][t],
                        prices.rc_dr_ih[g][t],
                    )
                };
                let scale = [pi, alpha, beta, omega].iter().fold(0.0f64, |a, b| a.max(b.abs()));
                r.le(format!("dual_award_{side}[{idx}]"), -alpha - beta + pi + omega, 0.0, scale);
                // The reduced cost from the full constraint matrix must agree
                // with the closed form above.
                r.same(
                    format!("award_column_{side}[{idx}]"),
                    rc,
                    alpha + beta - pi - omega,
                    scale,
                );
                if enhanced {
                    let scale_ih = [pi_ih, beta_ih, omega].iter().fold(0.0f64, |a, b| a.max(b.abs()));
                    r.le(format!("dual_intra_{side}[{idx}]"), pi_ih - beta_ih - omega, 0.0, scale_ih);
                    r.same(
                        format!("intra_column_{side}[{idx}]"),
                        rc_ih,
                        beta_ih + omega - pi_ih,
                        scale_ih,
                    );
                }
                let lhs = pi * x + pi_ih * x_ih;
                let rhs = alpha * x + beta * x + beta_ih * x_ih;
                let scale = [pi * x, pi_ih * x_ih, alpha * x, beta * x, beta_ih * x_ih]
                    .iter()
                    .fold(0.0f64, |a, b| a.max(b.abs()));
                r.same(format!("identity_{side}[{idx}]"), lhs, rhs, scale);
            }
        }
    }
    r
}

/// Nodal prices `[n][t]` in $/MWh.
pub fn compute_lmps(prices: &PriceSolution) -> Vec<Vec<f64>> {
    prices.delta.clone()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSettlement {
    pub id: String,
    pub energy_revenue: f64,
    pub frp_up_revenue: f64,
    pub frp_down_revenue: f64,
    pub generation_revenue: f64,
}

/// Day-ahead money flows, all in $.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settlement {
    pub generators: Vec<GeneratorSettlement>,
    pub energy_revenue: f64,
    pub frp_up_revenue: f64,
    pub frp_down_revenue: f64,
    pub generation_revenue: f64,
    pub load_payment: f64,
    pub generation_rent: f64,
    pub congestion_rent: f64,
    pub bus_ids: Vec<BusId>,
    /// $/MWh, `[n][t]`.
    pub lmp: Vec<Vec<f64>>,
}

pub fn compute_settlements(
    system: &SystemModel,
    prices: &PriceSolution,
    da: &DaSolution,
    loads: &NodalLoads,
) -> Settlement {
    let lmp = compute_lmps(prices);
    let hours = da.hours();
    let generators: Vec<GeneratorSettlement> = system
        .generators()
        .iter()
        .enumerate()
        .map(|(g, gen)| {
            let n = system.generator_bus(g);
            let energy_revenue: f64 = (0..hours).map(|t| lmp[n][t] * da.p[g][t]).sum();
            let frp_up_revenue = frp_up_payment(prices, da, g);
            let frp_down_revenue = frp_down_payment(prices, da, g);
            GeneratorSettlement {
                id: gen.id.clone(),
                energy_revenue,
                frp_up_revenue,
                frp_down_revenue,
                generation_revenue: energy_revenue + frp_up_revenue + frp_down_revenue,
            }
        })
        .collect();
    let energy_revenue: f64 = generators.iter().map(|g| g.energy_revenue).sum();
    let frp_up_revenue: f64 = generators.iter().map(|g| g.frp_up_revenue).sum();
    let frp_down_revenue: f64 = generators.iter().map(|g| g.frp_down_revenue).sum();
    let generation_revenue = energy_revenue + frp_up_revenue + frp_down_revenue;
    let load_payment: f64 = (0..hours)
        .map(|t| (0..lmp.len()).map(|n| lmp[n][t] * loads.get(n, t)).sum::<f64>())
        .sum();
    Settlement {
        generators,
        energy_revenue,
        frp_up_revenue,
        frp_down_revenue,
        generation_revenue,
        load_payment,
        generation_rent: generation_revenue - da_operating_cost(system, da),
        congestion_rent: load_payment - energy_revenue,
        bus_ids: prices.bus_ids.clone(),
        lmp,
    }
}

impl Settlement {
    /// One row per generator followed by a `system` row with the totals.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record([
            "scope",
            "energy_revenue",
            "frp_up_revenue",
            "frp_down_revenue",
            "generation_revenue",
            "load_payment",
            "generation_rent",
            "congestion_rent",
        ])?;
        for g in &self.generators {
            wtr.write_record([
                g.id.clone(),
                g.energy_revenue.to_string(),
                g.frp_up_revenue.to_string(),
                g.frp_down_revenue.to_string(),
                g.generation_revenue.to_string(),
                String::new(),
                String::new(),
                String::new(),
            ])?;
        }
        wtr.write_record([
            "system".to_string(),
            self.energy_revenue.to_string(),
            self.frp_up_revenue.to_string(),
            self.frp_down_revenue.to_string(),
            self.generation_revenue.to_string(),
            self.load_payment.to_string(),
            self.generation_rent.to_string(),
            self.congestion_rent.to_string(),
        ])?;
        wtr.flush()?;
        Ok(())
    }

    /// `bus,t,lmp` rows.
    pub fn write_lmp_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["bus", "t", "lmp"])?;
        for (bus, row) in self.bus_ids.iter().zip(&self.lmp) {
            for (t, price) in row.iter().enumerate() {
                wtr.write_record([bus.to_string(), (t + 1).to_string(), price.to_string()])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

impl PriceSolution {
    /// `t,lambda,pi_up,pi_down,pi_ih_up,pi_ih_down` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["t", "lambda", "pi_up", "pi_down", "pi_ih_up", "pi_ih_down"])?;
        for t in 0..self.lambda.len() {
            wtr.write_record([
                (t + 1).to_string(),
                self.lambda[t].to_string(),
                self.pi_up[t].to_string(),
                self.pi_down[t].to_string(),
                self.pi_ih_up[t].to_string(),
                self.pi_ih_down[t].to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{build_da_model, solve_da};
    use crate::requirements::RampRequirements;
    use crate::solver::HighsBackend;
    use crate::system::{dc_flows, nodal_loads, Generator, InitialState, Line, NetworkModel};

    fn unit(id: &str, bus: BusId, cost: f64, p_max: f64, ramp: f64) -> Generator {
        Generator {
            id: id.into(),
            bus,
            cost,
            no_load_cost: 0.0,
            startup_cost: 0.0,
            shutdown_cost: 0.0,
            p_max,
            p_min: 0.0,
            ramp_hourly: ramp,
            ramp_15min: ramp / 4.0,
            ramp_startup: p_max,
            ramp_shutdown: p_max,
            min_up: 1,
            min_down: 1,
            fast_start: false,
            initial: Some(InitialState {
                on: true,
                output: 0.0,
                hours_in_state: 5,
            }),
        }
    }

    fn started(mut g: Generator, output: f64) -> Generator {
        g.initial = Some(InitialState {
            on: true,
            output,
            hours_in_state: 5,
        });
        g
    }

    fn single_bus(gens: Vec<Generator>) -> SystemModel {
        let net = NetworkModel::new(vec![1], vec![], None).unwrap();
        SystemModel::new("one", gens, net, &[(1, 1.0)]).unwrap()
    }

    fn priced(
        sys: &SystemModel,
        load: &[f64],
        reqs: Option<&RampRequirements>,
        mode: FrpMode,
    ) -> (DaSolution, PriceSolution) {
        let loads = nodal_loads(sys, load);
        let model = build_da_model(sys, &loads, reqs, mode).unwrap();
        let da = solve_da(&model, &HighsBackend, &SolveOptions::default().with_gap(0.0)).unwrap();
        let prices = fix_and_price(&model, &da, &HighsBackend).unwrap();
        (da, prices)
    }

    #[test]
    fn single_unit_energy_price() {
        let sys = single_bus(vec![unit("G1", 1, 10.0, 100.0, 100.0)]);
        let reqs = RampRequirements::zeros(24);
        let (da, prices) = priced(&sys, &[50.0; 24], Some(&reqs), FrpMode::General);
        for t in 0..24 {
            assert!((prices.lambda[t] - 10.0).abs() < 1e-9);
            assert!((prices.delta[0][t] - 10.0).abs() < 1e-9);
            assert!(prices.pi_up[t].abs() < 1e-9 && prices.pi_down[t].abs() < 1e-9);
        }
        assert!((prices.lp_objective - da.objective).abs() < 1e-6);
        assert!(verify_pricing_identities(&prices, &prices.schedule).is_empty());
    }

    /// Two units, 100 MW load, 30 MW up requirement. B's hourly ramp caps its
    /// award at 10 MW, so A must hold 20 MW of headroom and 20 MW of energy
    /// moves from A (10 $/MWh) to B (25 $/MWh).
    ///
    /// Hand solution: P_A = 80, ur_A = 20, P_B = 20, ur_B = 10. One more MW of
    /// requirement shifts one more MW from A to B, so π⁺ = 15. A's capacity
    /// row binds (α⁺_A = 15); B's ramp cap binds (β⁺_B = 15).
    #[test]
    fn binding_requirement_has_positive_price() {
        let a = started(unit("A", 1, 10.0, 100.0, 100.0), 80.0);
        let b = started(unit("B", 1, 25.0, 100.0, 10.0), 20.0);
        let sys = single_bus(vec![a, b]);
        let mut reqs = RampRequirements::zeros(1);
        reqs.up = vec![30.0];
        let (da, prices) = priced(&sys, &[100.0], Some(&reqs), FrpMode::General);
        let s = &prices.schedule;
        assert!((da.objective - (80.0 * 10.0 + 20.0 * 25.0)).abs() < 1e-6);
        assert!((prices.pi_up[0] - 15.0).abs() < 1e-9);
        assert!((s.ur[0][0] + s.ur[1][0] - 30.0).abs() < 1e-9);
        assert!(verify_pricing_identities(&prices, s).is_empty());
        // Identity sides for B: π⁺·ur_B on the left, α⁺_B·ur_B on the right.
        let lhs = prices.pi_up[0] * s.ur[1][0];
        let rhs = (prices.alpha_up[1][0] + prices.beta_up[1][0]) * s.ur[1][0];
        assert!((prices.alpha_up[0][0] - 15.0).abs() < 1e-9);
        assert!((prices.beta_up[1][0] - 15.0).abs() < 1e-9);
        assert!(lhs > 0.0 && (lhs - rhs).abs() < 1e-9);
        assert!((frp_up_payment(&prices, s, 0) + frp_up_payment(&prices, s, 1) - 15.0 * 30.0).abs() < 1e-6);
    }

    #[test]
    fn perturbed_price_breaks_identity() {
        let a = started(unit("A", 1, 10.0, 100.0, 100.0), 80.0);
        let b = started(unit("B", 1, 25.0, 100.0, 10.0), 20.0);
        let sys = single_bus(vec![a, b]);
        let mut reqs = RampRequirements::zeros(1);
        reqs.up = vec![30.0];
        let (_, mut prices) = priced(&sys, &[100.0], Some(&reqs), FrpMode::General);
        prices.pi_up[0] += 0.1;
        let schedule = prices.schedule.clone();
        let report = verify_pricing_identities(&prices, &schedule);
        assert!(report.names().iter().any(|n| n.starts_with("identity_up[")));
    }

    #[test]
    fn payment_formulas_by_hand() {
        let sys = single_bus(vec![unit("G1", 1, 10.0, 100.0, 100.0)]);
        let reqs = RampRequirements::zeros(1);
        let (mut da, mut prices) = priced(&sys, &[50.0], Some(&reqs), FrpMode::Enhanced);
        prices.pi_up[0] = 2.0;
        prices.pi_ih_up[0] = 1.0;
        prices.pi_down[0] = 3.0;
        prices.pi_ih_down[0] = 0.5;
        da.ur[0][0] = 10.0;
        da.ur_ih[0][0] = 4.0;
        da.dr[0][0] = 5.0;
        da.dr_ih[0][0] = 2.0;
        assert_eq!(frp_up_payment(&prices, &da, 0), 24.0);
        assert_eq!(frp_down_payment(&prices, &da, 0), 16.0);
        da.ur[0][0] = 0.0;
        da.ur_ih[0][0] = 0.0;
        assert_eq!(frp_up_payment(&prices, &da, 0), 0.0);
    }

    #[test]
    fn abundant_down_headroom_is_free() {
        let sys = single_bus(vec![unit("A", 1, 10.0, 100.0, 100.0), unit("B", 1, 20.0, 100.0, 100.0)]);
        let mut reqs = RampRequirements::zeros(3);
        reqs.down = vec![10.0; 3];
        let (_, prices) = priced(&sys, &[80.0, 90.0, 70.0], Some(&reqs), FrpMode::General);
        assert!(prices.pi_down.iter().all(|p| p.abs() < 1e-9));
        for g in 0..2 {
            assert_eq!(frp_down_payment(&prices, &prices.schedule, g), 0.0);
        }
    }

    fn two_bus(rating: f64) -> SystemModel {
        let line = Line {
            id: "L1".into(),
            from: 1,
            to: 2,
            reactance: 0.1,
            rating,
        };
        let net = NetworkModel::new(vec![1, 2], vec![line], None).unwrap();
        let gens = vec![unit("cheap", 1, 10.0, 200.0, 200.0), unit("dear", 2, 30.0, 200.0, 200.0)];
        SystemModel::new("two", gens, net, &[(2, 1.0)]).unwrap()
    }

    #[test]
    fn congested_line_splits_prices() {
        let sys = two_bus(60.0);
        let load = [100.0, 50.0];
        let loads = nodal_loads(&sys, &load);
        let (da, prices) = priced(&sys, &load, None, FrpMode::None);
        let lmp = compute_lmps(&prices);
        // Hour 1 congested: cheap side 10, load side 30.
        assert!((lmp[0][0] - 10.0).abs() < 1e-9);
        assert!((lmp[1][0] - 30.0).abs() < 1e-9);
        // Hour 2 uncongested: uniform 10.
        assert!((lmp[0][1] - lmp[1][1]).abs() < 1e-9);
        assert!((lmp[0][1] - prices.lambda[1]).abs() < 1e-9);

        let s = compute_settlements(&sys, &prices, &da, &loads);
        assert!((s.load_payment - (s.energy_revenue + s.congestion_rent)).abs() < 1e-6);
        // Independent route: flow times line shadow price.
        let mut rent = 0.0;
        for t in 0..2 {
            let pinj: Vec<f64> = (0..2).map(|n| prices.schedule.pinj[n][t]).collect();
            let flows = dc_flows(sys.network(), &pinj).unwrap();
            rent += flows[0] * (prices.f_up[0][t] - prices.f_down[0][t]);
        }
        assert!((s.congestion_rent - rent).abs() < 1e-6);
        assert!((s.congestion_rent - 60.0 * 20.0).abs() < 1e-6);
        assert_eq!(s.frp_up_revenue, 0.0);
        assert_eq!(s.generation_revenue, s.energy_revenue);
    }

    #[test]
    fn csv_outputs_have_headers() {
        let sys = two_bus(500.0);
        let load = [100.0];
        let loads = nodal_loads(&sys, &load);
        let (da, prices) = priced(&sys, &load, None, FrpMode::None);
        let s = compute_settlements(&sys, &prices, &da, &loads);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("scope,energy_revenue,frp_up_revenue"));
        assert!(text.lines().last().unwrap().starts_with("system,"));
        let mut buf = Vec::new();
        s.write_lmp_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 3);
        let mut buf = Vec::new();
        prices.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("t,lambda,pi_up"));
    }
}
