//! Shared builders and oracles for the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use frp_core::market::{check_solution, DaModel, DaSolution, FrpMode};
use frp_core::milp::{MilpModel, Sense, VarKind};
use frp_core::pricing::PriceSolution;
use frp_core::solver::{HighsBackend, SolveOptions, SolverBackend};
use frp_core::requirements::{NetLoadProfile, RampRequirements};
use frp_core::system::{BusId, Generator, InitialState, Line, NetworkModel, NodalLoads, SystemModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn unit(id: &str, bus: BusId, cost: f64, p_max: f64) -> Generator {
    Generator {
        id: id.into(),
        bus,
        cost,
        no_load_cost: 0.0,
        startup_cost: 0.0,
        shutdown_cost: 0.0,
        p_max,
        p_min: 0.0,
        ramp_hourly: p_max,
        ramp_15min: p_max / 4.0,
        ramp_startup: p_max,
        ramp_shutdown: p_max,
        min_up: 1,
        min_down: 1,
        fast_start: false,
        initial: None,
    }
}

/// Small meshed system that is feasible for any load up to `peak`:
/// every bus has a local peaker initially on at zero output.
pub fn random_system(seed: u64, peak: f64, congested: bool) -> SystemModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nb: u32 = rng.random_range(2..=4);
    let buses: Vec<BusId> = (1..=nb).collect();
    let mut lines = Vec::new();
    for b in 2..=nb {
        let from = rng.random_range(1..b);
        lines.push((from, b));
    }
    if nb >= 3 && rng.random_bool(0.5) {
        lines.push((1, nb));
    }
    let lines: Vec<Line> = lines
        .into_iter()
        .enumerate()
        .map(|(k, (from, to))| Line {
            id: format!("L{}", k + 1),
            from,
            to,
            reactance: rng.random_range(0.05..0.3),
            rating: if congested {
                rng.random_range(0.1..0.4) * peak
            } else {
                10.0 * peak
            },
        })
        .collect();

    let mut gens = Vec::new();
    let n_main = rng.random_range(2..=3);
    for i in 0..n_main {
        let p_max = (rng.random_range(0.5..1.0) * peak).round();
        let ramp = (rng.random_range(0.2..0.6) * p_max).round();
        let mut g = unit(&format!("G{}", i + 1), rng.random_range(1..=nb), rng.random_range(5.0..30.0), p_max);
        g.p_min = (rng.random_range(0.0..0.3) * p_max).round();
        g.no_load_cost = rng.random_range(0.0..200.0f64).round();
        g.startup_cost = rng.random_range(0.0..2000.0f64).round();
        g.ramp_hourly = ramp;
        g.ramp_15min = (ramp / 4.0).round();
        g.ramp_startup = p_max.max(g.p_min);
        g.ramp_shutdown = p_max;
        g.min_up = rng.random_range(1..=4);
        g.min_down = rng.random_range(1..=4);
        g.initial = Some(if i == 0 {
            InitialState { on: true, output: g.p_min, hours_in_state: 24 }
        } else {
            InitialState { on: false, output: 0.0, hours_in_state: 24 }
        });
        gens.push(g);
    }
    for b in 1..=nb {
        let mut g = unit(&format!("P{b}"), b, rng.random_range(60.0..100.0), peak);
        g.fast_start = rng.random_bool(0.5);
        g.initial = Some(InitialState { on: true, output: 0.0, hours_in_state: 24 });
        gens.push(g);
    }

    let mut shares: Vec<f64> = (0..nb).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = shares.iter().sum();
    shares.iter_mut().for_each(|s| *s /= total);
    let pairs: Vec<(BusId, f64)> = buses.iter().copied().zip(shares).collect();
    let network = NetworkModel::new(buses, lines, None).unwrap();
    SystemModel::new(format!("random-{seed}"), gens, network, &pairs).unwrap()
}

/// 24-hour profile between 40% and 90% of `peak`, quarters wobbling around
/// each hour, hourly std a random fraction of the forecast.
pub fn random_profile(seed: u64, peak: f64) -> NetLoadProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let hourly: Vec<f64> = (0..24).map(|_| (rng.random_range(0.4..0.9) * peak * 100.0).round() / 100.0).collect();
    let quarterly: Vec<f64> = hourly
        .iter()
        .flat_map(|&h| {
            let wobble: Vec<f64> = (0..4).map(|_| rng.random_range(-0.05..0.05) * h).collect();
            let mean = wobble.iter().sum::<f64>() / 4.0;
            wobble.into_iter().map(move |w| h + w - mean).collect::<Vec<_>>()
        })
        .collect();
    let fraction = rng.random_range(0.0..0.08);
    NetLoadProfile::with_sigma_fraction(hourly, quarterly, fraction, 1.96).unwrap()
}

/// Requirements computed straight from their definitions, terminal values zero.
pub struct OracleRequirements {
    pub up: Vec<f64>,
    pub down: Vec<f64>,
    pub up_quarters: Vec<[f64; 4]>,
    pub down_quarters: Vec<[f64; 4]>,
    pub up_rhs: Vec<f64>,
    pub down_rhs: Vec<f64>,
}

pub fn oracle_requirements(p: &NetLoadProfile) -> OracleRequirements {
    let z = p.z();
    let (nl, sh) = (p.hourly(), p.sigma_hourly());
    let (nq, sq) = (p.quarterly(), p.sigma_quarterly());
    let hours = nl.len();
    let mut up = vec![0.0; hours];
    let mut down = vec![0.0; hours];
    for t in 0..hours - 1 {
        let max_next = nl[t + 1] + z * sh[t + 1];
        let min_next = nl[t + 1] - z * sh[t + 1];
        up[t] = f64::max(max_next - nl[t], 0.0);
        down[t] = f64::max(nl[t] - min_next, 0.0);
    }
    let mut up_quarters = vec![[0.0; 4]; hours];
    let mut down_quarters = vec![[0.0; 4]; hours];
    for t in 0..hours {
        for q in 0..4 {
            let i = 4 * t + q;
            if i + 1 == nq.len() {
                continue;
            }
            up_quarters[t][q] = f64::max(nq[i + 1] + z * sq[i + 1] - nq[i], 0.0);
            down_quarters[t][q] = f64::max(nq[i] - (nq[i + 1] - z * sq[i + 1]), 0.0);
        }
    }
    let rhs = |rows: &[[f64; 4]]| -> Vec<f64> {
        rows.iter().map(|r| f64::max(f64::max(r[0], r[1]), f64::max(r[2], r[3]))).collect()
    };
    OracleRequirements {
        up_rhs: rhs(&up_quarters),
        down_rhs: rhs(&down_quarters),
        up,
        down,
        up_quarters,
        down_quarters,
    }
}

/// Schedule entry holding the model variable `name`, e.g. `P[G1,3]`.
fn locate<'a>(da: &'a mut DaSolution, name: &str) -> &'a mut f64 {
    let (prefix, rest) = name.split_once('[').unwrap();
    let (key, t) = rest.trim_end_matches(']').rsplit_once(',').unwrap();
    let t: usize = t.parse::<usize>().unwrap() - 1;
    let row = if prefix == "pinj" {
        da.bus_ids.iter().position(|b| b.to_string() == key).unwrap()
    } else {
        da.generator_ids.iter().position(|g| g == key).unwrap()
    };
    let series = match prefix {
        "P" => &mut da.p,
        "u" => &mut da.u,
        "v" => &mut da.v,
        "w" => &mut da.w,
        "ur" => &mut da.ur,
        "dr" => &mut da.dr,
        "ur_ih" => &mut da.ur_ih,
        "dr_ih" => &mut da.dr_ih,
        "pinj" => &mut da.pinj,
        other => panic!("unknown variable family {other}"),
    };
    &mut series[row][t]
}

/// Model variable values read back out of a schedule.
pub fn values_of(model: &DaModel, da: &DaSolution) -> Vec<f64> {
    let mut da = da.clone();
    model.model.variables().iter().map(|v| *locate(&mut da, &v.name)).collect()
}

/// For every row of the built model, moves one continuous variable so that the
/// row is violated by one unit of its activity, then asks the checker whether
/// it reports that row by name. Returns `(rows tried, rows missed)`.
pub fn corruption_sweep(
    model: &DaModel,
    da: &DaSolution,
    system: &SystemModel,
    loads: &NodalLoads,
    reqs: Option<&RampRequirements>,
) -> (usize, Vec<String>) {
    let values = values_of(model, da);
    let mut tried = 0;
    let mut missed = Vec::new();
    for row in model.model.constraints() {
        let Some(&(var, a)) = row
            .terms
            .iter()
            .filter(|(v, _)| model.model.var(*v).kind == VarKind::Continuous)
            .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
        else {
            continue;
        };
        let activity = row.activity(&values);
        let target = match row.sense {
            Sense::Le | Sense::Eq => row.rhs + 1.0,
            Sense::Ge => row.rhs - 1.0,
        };
        let mut bad = da.clone();
        *locate(&mut bad, &model.model.var(var).name) += (target - activity) / a;
        tried += 1;
        let report = check_solution(&bad, system, loads, reqs, model.mode);
        if report.find(&row.name).is_none() {
            missed.push(row.name.clone());
        }
    }
    (tried, missed)
}

pub fn mode_reqs(mode: FrpMode, reqs: &RampRequirements) -> Option<&RampRequirements> {
    mode.has_frp().then_some(reqs)
}

/// Two generators, three periods, one bus.
pub fn brute_system(a: &[f64; 7], b: &[f64; 7]) -> SystemModel {
    let make = |id: &str, x: &[f64; 7], on: bool| Generator {
        id: id.into(),
        bus: 1,
        cost: x[0],
        no_load_cost: x[1],
        startup_cost: x[2],
        shutdown_cost: x[3],
        p_max: x[4],
        p_min: x[5],
        ramp_hourly: x[6],
        ramp_15min: x[6] / 4.0,
        ramp_startup: x[4],
        ramp_shutdown: x[4],
        min_up: 1,
        min_down: 1,
        fast_start: false,
        initial: Some(if on {
            InitialState { on: true, output: x[5], hours_in_state: 5 }
        } else {
            InitialState { on: false, output: 0.0, hours_in_state: 5 }
        }),
    };
    let net = NetworkModel::new(vec![1], vec![], None).unwrap();
    SystemModel::new("brute", vec![make("A", a, true), make("B", b, false)], net, &[(1, 1.0)]).unwrap()
}

/// Cheapest schedule found by trying all 64 commitment patterns, each with its
/// own dispatch LP written from scratch here.
pub fn enumerate_commitments(sys: &SystemModel, load: &[f64; 3], up_req: &[f64; 3]) -> Option<f64> {
    let gens = sys.generators();
    let mut best: Option<f64> = None;
    for mask in 0u32..64 {
        let u = |g: usize, t: usize| f64::from((mask >> (3 * g + t)) & 1);
        let mut m = MilpModel::new("dispatch");
        let mut fixed_cost = 0.0;
        let mut p = vec![vec![]; 2];
        let mut ur = vec![vec![]; 2];
        for (g, gen) in gens.iter().enumerate() {
            let init = gen.initial_state();
            let u0 = f64::from(u8::from(init.on));
            for t in 0..3 {
                let prev = if t == 0 { u0 } else { u(g, t - 1) };
                let (v, w) = ((u(g, t) - prev).max(0.0), (prev - u(g, t)).max(0.0));
                fixed_cost += gen.no_load_cost * u(g, t) + gen.startup_cost * v + gen.shutdown_cost * w;
                p[g].push(m.add_var(format!("p{g}{t}"), gen.p_min * u(g, t), gen.p_max * u(g, t), VarKind::Continuous, gen.cost));
                ur[g].push(m.add_var(format!("r{g}{t}"), 0.0, gen.ramp_hourly * u(g, t), VarKind::Continuous, 0.0));
                m.add_constraint("cap", format!("{g}{t}"), [(p[g][t], 1.0), (ur[g][t], 1.0)], Sense::Le, gen.p_max * u(g, t));
                let ramp_up = gen.ramp_hourly * prev + gen.ramp_startup * v;
                let ramp_down = gen.ramp_hourly * u(g, t) + gen.ramp_shutdown * w;
                if t == 0 {
                    m.add_constraint("ru", format!("{g}{t}"), [(p[g][0], 1.0)], Sense::Le, init.output + ramp_up);
                    m.add_constraint("rd", format!("{g}{t}"), [(p[g][0], -1.0)], Sense::Le, ramp_down - init.output);
                } else {
                    m.add_constraint("ru", format!("{g}{t}"), [(p[g][t], 1.0), (p[g][t - 1], -1.0)], Sense::Le, ramp_up);
                    m.add_constraint("rd", format!("{g}{t}"), [(p[g][t - 1], 1.0), (p[g][t], -1.0)], Sense::Le, ramp_down);
                }
            }
        }
        for t in 0..3 {
            m.add_constraint("bal", t.to_string(), [(p[0][t], 1.0), (p[1][t], 1.0)], Sense::Eq, load[t]);
            m.add_constraint("req", t.to_string(), [(ur[0][t], 1.0), (ur[1][t], 1.0)], Sense::Ge, up_req[t]);
        }
        if let Ok(lp) = HighsBackend.solve_lp_duals(&m, &SolveOptions::default().with_gap(0.0)) {
            let total = lp.objective + fixed_cost;
            best = Some(best.map_or(total, |b: f64| b.min(total)));
        }
    }
    best
}


/// Straight-line recomputation of every generator's energy, FRP-up and
/// FRP-down payment from the prices and the priced schedule.
pub fn payments_by_hand(sys: &SystemModel, prices: &PriceSolution) -> Vec<[f64; 3]> {
    let d = &prices.schedule;
    let mut out = Vec::new();
    for g in 0..sys.generators().len() {
        let bus = sys.generator_bus(g);
        let mut energy = 0.0;
        let mut up = 0.0;
        let mut down = 0.0;
        for t in 0..d.hours() {
            energy += prices.delta[bus][t] * d.p[g][t];
            up += prices.pi_up[t] * d.ur[g][t] + prices.pi_ih_up[t] * d.ur_ih[g][t];
            down += prices.pi_down[t] * d.dr[g][t] + prices.pi_ih_down[t] * d.dr_ih[g][t];
        }
        out.push([energy, up, down]);
    }
    out
}
