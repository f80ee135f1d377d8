//! Physical market footprint: generators, DC network and load allocation.

use std::collections::{HashMap, VecDeque};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{InputError, NetworkError};

pub type BusId = u32;

/// Commitment state of a unit before the first scheduled period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialState {
    pub on: bool,
    /// MW output at the end of the previous day.
    pub output: f64,
    /// Whole hours the unit has already spent in `on`.
    pub hours_in_state: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub id: String,
    pub bus: BusId,
    /// $/MWh
    pub cost: f64,
    /// $/h while committed
    pub no_load_cost: f64,
    /// $ per start
    pub startup_cost: f64,
    /// $ per stop
    pub shutdown_cost: f64,
    pub p_max: f64,
    pub p_min: f64,
    /// MW per hour
    pub ramp_hourly: f64,
    /// MW per 15 minutes
    pub ramp_15min: f64,
    pub ramp_startup: f64,
    pub ramp_shutdown: f64,
    /// hours
    pub min_up: u32,
    /// hours
    pub min_down: u32,
    #[serde(default)]
    pub fast_start: bool,
    /// Defaults to off at 0 MW, already off for `min_down` hours.
    #[serde(default)]
    pub initial: Option<InitialState>,
}

impl Generator {
    pub fn initial_state(&self) -> InitialState {
        self.initial.unwrap_or(InitialState {
            on: false,
            output: 0.0,
            hours_in_state: self.min_down,
        })
    }

    fn validate(&self) -> Result<(), InputError> {
        let record = format!("generator {}", self.id);
        let nonneg = [
            ("cost", self.cost),
            ("no_load_cost", self.no_load_cost),
            ("startup_cost", self.startup_cost),
            ("shutdown_cost", self.shutdown_cost),
            ("p_min", self.p_min),
            ("ramp_hourly", self.ramp_hourly),
            ("ramp_15min", self.ramp_15min),
            ("ramp_startup", self.ramp_startup),
            ("ramp_shutdown", self.ramp_shutdown),
        ];
        for (field, value) in nonneg {
            if !(value.is_finite() && value >= 0.0) {
                return Err(InputError::invalid(
                    &record,
                    format!("{field} must be a finite non-negative number, got {value}"),
                ));
            }
        }
        if !(self.p_max.is_finite() && self.p_min <= self.p_max) {
            return Err(InputError::invalid(
                &record,
                format!("p_min {} exceeds p_max {}", self.p_min, self.p_max),
            ));
        }
        if self.ramp_15min > self.ramp_hourly {
            return Err(InputError::invalid(
                &record,
                format!(
                    "15-minute ramp {} exceeds hourly ramp {}",
                    self.ramp_15min, self.ramp_hourly
                ),
            ));
        }
        let init = self.initial_state();
        let ok = if init.on {
            init.output >= self.p_min && init.output <= self.p_max
        } else {
            init.output == 0.0
        };
        if !ok {
            return Err(InputError::invalid(
                &record,
                format!(
                    "initial output {} inconsistent with initial state on={}",
                    init.output, init.on
                ),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub id: String,
    pub from: BusId,
    pub to: BusId,
    /// p.u.
    pub reactance: f64,
    /// MW
    pub rating: f64,
}

/// Dense bus-by-line sensitivity of line flows to nodal injections.
///
/// Entry `(n, k)` is the flow on line `k` (positive in its from→to
/// direction) for 1 MW injected at bus `n` and withdrawn at the slack bus.
#[derive(Debug, Clone, PartialEq)]
pub struct Ptdf {
    matrix: DMatrix<f64>,
}

impl Ptdf {
    pub fn get(&self, bus: usize, line: usize) -> f64 {
        self.matrix[(bus, line)]
    }

    pub fn num_buses(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn num_lines(&self) -> usize {
        self.matrix.ncols()
    }

    /// Line flows produced by a vector of bus injections (same order as buses).
    pub fn flows(&self, injections: &[f64]) -> Vec<f64> {
        (0..self.num_lines())
            .map(|k| {
                injections
                    .iter()
                    .enumerate()
                    .map(|(n, p)| p * self.matrix[(n, k)])
                    .sum()
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkModel {
    buses: Vec<BusId>,
    lines: Vec<Line>,
    slack: BusId,
    bus_index: HashMap<BusId, usize>,
    ptdf: Ptdf,
}

impl NetworkModel {
    /// Validates the topology and computes its PTDF matrix.
    pub fn new(buses: Vec<BusId>, lines: Vec<Line>, slack: Option<BusId>) -> Result<Self, InputError> {
        if buses.is_empty() {
            return Err(InputError::invalid("buses", "at least one bus is required"));
        }
        let mut bus_index = HashMap::with_capacity(buses.len());
        for (i, &b) in buses.iter().enumerate() {
            if bus_index.insert(b, i).is_some() {
                return Err(InputError::invalid(format!("bus {b}"), "duplicate bus id"));
            }
        }
        for line in &lines {
            let record = format!("line {}", line.id);
            if !(line.reactance.is_finite() && line.reactance > 0.0) {
                return Err(InputError::invalid(record, "reactance must be positive"));
            }
            if !(line.rating.is_finite() && line.rating >= 0.0) {
                return Err(InputError::invalid(record, "rating must be non-negative"));
            }
            for end in [line.from, line.to] {
                if !bus_index.contains_key(&end) {
                    return Err(InputError::invalid(record, format!("unknown bus {end}")));
                }
            }
            if line.from == line.to {
                return Err(InputError::invalid(record, "line connects a bus to itself"));
            }
        }
        let slack = slack.unwrap_or_else(|| *buses.iter().min().expect("non-empty"));
        if !bus_index.contains_key(&slack) {
            return Err(InputError::invalid("slack_bus", format!("unknown bus {slack}")));
        }
        let ptdf = compute_ptdf(&buses, &lines, slack)
            .map_err(|e| InputError::invalid("network", e.to_string()))?;
        Ok(Self {
            buses,
            lines,
            slack,
            bus_index,
            ptdf,
        })
    }

    pub fn buses(&self) -> &[BusId] {
        &self.buses
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn slack(&self) -> BusId {
        self.slack
    }

    pub fn ptdf(&self) -> &Ptdf {
        &self.ptdf
    }

    pub fn bus_index(&self, bus: BusId) -> Option<usize> {
        self.bus_index.get(&bus).copied()
    }
}

/// Computes the DC power-flow PTDF matrix with the given slack bus as reference.
pub fn compute_ptdf(buses: &[BusId], lines: &[Line], slack: BusId) -> Result<Ptdf, NetworkError> {
    let index: HashMap<BusId, usize> = buses.iter().enumerate().map(|(i, &b)| (b, i)).collect();
    let slack_idx = *index.get(&slack).ok_or(NetworkError::UnknownBus(slack))?;
    let ends = lines
        .iter()
        .map(|l| {
            let f = *index.get(&l.from).ok_or(NetworkError::UnknownBus(l.from))?;
            let t = *index.get(&l.to).ok_or(NetworkError::UnknownBus(l.to))?;
            Ok((f, t))
        })
        .collect::<Result<Vec<_>, NetworkError>>()?;

    // Connectivity first so a disconnected island gets a clearer error than "singular".
    let n = buses.len();
    let mut adjacency = vec![Vec::new(); n];
    for &(f, t) in &ends {
        adjacency[f].push(t);
        adjacency[t].push(f);
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([slack_idx]);
    seen[slack_idx] = true;
    while let Some(b) = queue.pop_front() {
        for &nb in &adjacency[b] {
            if !seen[nb] {
                seen[nb] = true;
                queue.push_back(nb);
            }
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(NetworkError::Disconnected(buses[i]));
    }

    // Reduced susceptance matrix with the slack row/column removed.
    let reduced: Vec<usize> = (0..n).filter(|&i| i != slack_idx).collect();
    let mut pos = vec![usize::MAX; n];
    for (r, &i) in reduced.iter().enumerate() {
        pos[i] = r;
    }
    let m = reduced.len();
    let mut ptdf = DMatrix::<f64>::zeros(n, lines.len());
    if m == 0 {
        return Ok(Ptdf { matrix: ptdf });
    }
    let mut b = DMatrix::<f64>::zeros(m, m);
    for (&(f, t), line) in ends.iter().zip(lines) {
        let y = 1.0 / line.reactance;
        for (i, j) in [(f, t), (t, f)] {
            if i != slack_idx {
                b[(pos[i], pos[i])] += y;
                if j != slack_idx {
                    b[(pos[i], pos[j])] -= y;
                }
            }
        }
    }
    let lu = b.lu();
    let identity = DMatrix::<f64>::identity(m, m);
    let x = lu.solve(&identity).ok_or(NetworkError::Singular)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(NetworkError::Singular);
    }
    // Column r of x holds bus angles for a unit injection at reduced bus r.
    for (r, &bus) in reduced.iter().enumerate() {
        let theta = |i: usize| -> f64 {
            if i == slack_idx {
                0.0
            } else {
                x[(pos[i], r)]
            }
        };
        for (k, (&(f, t), line)) in ends.iter().zip(lines).enumerate() {
            ptdf[(bus, k)] = (theta(f) - theta(t)) / line.reactance;
        }
    }
    Ok(Ptdf { matrix: ptdf })
}

/// Solves the DC power-flow equations directly for a given injection vector.
///
/// The slack bus absorbs the imbalance. Used to cross-check PTDF-based flows.
pub fn dc_flows(network: &NetworkModel, injections: &[f64]) -> Result<Vec<f64>, NetworkError> {
    let n = network.buses.len();
    let slack_idx = network.bus_index[&network.slack];
    let mut b = DMatrix::<f64>::zeros(n, n);
    for line in &network.lines {
        let f = network.bus_index[&line.from];
        let t = network.bus_index[&line.to];
        let y = 1.0 / line.reactance;
        b[(f, f)] += y;
        b[(t, t)] += y;
        b[(f, t)] -= y;
        b[(t, f)] -= y;
    }
    // Replace the slack equation by θ_slack = 0.
    for j in 0..n {
        b[(slack_idx, j)] = 0.0;
    }
    b[(slack_idx, slack_idx)] = 1.0;
    let mut rhs = DVector::from_column_slice(injections);
    rhs[slack_idx] = 0.0;
    let theta = b.lu().solve(&rhs).ok_or(NetworkError::Singular)?;
    Ok(network
        .lines
        .iter()
        .map(|l| {
            (theta[network.bus_index[&l.from]] - theta[network.bus_index[&l.to]]) / l.reactance
        })
        .collect())
}

/// Generators, network and per-bus load shares.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    pub name: String,
    generators: Vec<Generator>,
    network: NetworkModel,
    load_shares: Vec<f64>,
    generator_bus: Vec<usize>,
    generators_at_bus: Vec<Vec<usize>>,
}

impl SystemModel {
    /// `load_shares` pairs a bus with its fraction of system net load; buses
    /// not listed get zero.
    pub fn new(
        name: impl Into<String>,
        generators: Vec<Generator>,
        network: NetworkModel,
        load_shares: &[(BusId, f64)],
    ) -> Result<Self, InputError> {
        let nb = network.buses().len();
        let mut seen_ids = HashMap::new();
        let mut generator_bus = Vec::with_capacity(generators.len());
        let mut generators_at_bus = vec![Vec::new(); nb];
        for (g, gen) in generators.iter().enumerate() {
            gen.validate()?;
            if seen_ids.insert(gen.id.clone(), g).is_some() {
                return Err(InputError::invalid(format!("generator {}", gen.id), "duplicate id"));
            }
            let idx = network.bus_index(gen.bus).ok_or_else(|| {
                InputError::invalid(format!("generator {}", gen.id), format!("unknown bus {}", gen.bus))
            })?;
            generator_bus.push(idx);
            generators_at_bus[idx].push(g);
        }
        let mut shares = vec![0.0; nb];
        for &(bus, share) in load_shares {
            let idx = network
                .bus_index(bus)
                .ok_or_else(|| InputError::invalid(format!("load share for bus {bus}"), "unknown bus"))?;
            if !(share.is_finite() && share >= 0.0) {
                return Err(InputError::invalid(
                    format!("load share for bus {bus}"),
                    "share must be non-negative",
                ));
            }
            shares[idx] += share;
        }
        let total: f64 = shares.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(InputError::invalid(
                "load_shares",
                format!("shares sum to {total}, expected 1"),
            ));
        }
        Ok(Self {
            name: name.into(),
            generators,
            network,
            load_shares: shares,
            generator_bus,
            generators_at_bus,
        })
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn network(&self) -> &NetworkModel {
        &self.network
    }

    /// Shares aligned with `network().buses()`.
    pub fn load_shares(&self) -> &[f64] {
        &self.load_shares
    }

    /// Bus position (in `network().buses()`) of generator `g`.
    pub fn generator_bus(&self, g: usize) -> usize {
        self.generator_bus[g]
    }

    pub fn generators_at_bus(&self, bus: usize) -> &[usize] {
        &self.generators_at_bus[bus]
    }

    /// Number of buses carrying a positive share of load.
    pub fn num_loads(&self) -> usize {
        self.load_shares.iter().filter(|&&s| s > 0.0).count()
    }

    /// Builds a copy of this system with some generators replaced.
    pub fn with_generators(&self, generators: Vec<Generator>) -> Result<Self, InputError> {
        let shares: Vec<(BusId, f64)> = self
            .network
            .buses()
            .iter()
            .copied()
            .zip(self.load_shares.iter().copied())
            .collect();
        Self::new(self.name.clone(), generators, self.network.clone(), &shares)
    }
}

/// Per-bus net load for every period, indexed `[t][bus]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalLoads {
    by_period: Vec<Vec<f64>>,
}

impl NodalLoads {
    pub fn num_periods(&self) -> usize {
        self.by_period.len()
    }

    pub fn period(&self, t: usize) -> &[f64] {
        &self.by_period[t]
    }

    pub fn get(&self, bus: usize, t: usize) -> f64 {
        self.by_period[t][bus]
    }

    pub fn system_total(&self, t: usize) -> f64 {
        self.by_period[t].iter().sum()
    }
}

/// Distributes a system-level net-load series to buses by the fixed shares.
///
/// The last loaded bus takes the rounding residual so each period sums back to
/// the system value.
pub fn nodal_loads(system: &SystemModel, system_load: &[f64]) -> NodalLoads {
    let shares = system.load_shares();
    let last = shares.iter().rposition(|&s| s > 0.0).unwrap_or(0);
    let by_period = system_load
        .iter()
        .map(|&total| {
            let mut row: Vec<f64> = shares.iter().map(|s| s * total).collect();
            let others: f64 = row
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != last)
                .map(|(_, v)| v)
                .sum();
            row[last] = total - others;
            row
        })
        .collect();
    NodalLoads { by_period }
}

#[derive(Debug, Deserialize, Serialize)]
struct SystemFile {
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    slack_bus: Option<BusId>,
    generators: Vec<Generator>,
    buses: Vec<BusId>,
    lines: Vec<Line>,
    load_shares: Vec<LoadShare>,
}

#[derive(Debug, Deserialize, Serialize)]
struct LoadShare {
    bus: BusId,
    share: f64,
}

/// Reads and validates a JSON system file.
pub fn load_system(path: impl AsRef<Path>) -> Result<SystemModel, InputError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| InputError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_system(&text).map_err(|e| match e {
        InputError::Parse { message, .. } => InputError::Parse {
            path: path.to_path_buf(),
            message,
        },
        other => other,
    })
}

pub fn parse_system(text: &str) -> Result<SystemModel, InputError> {
    let file: SystemFile = serde_json::from_str(text).map_err(|e| InputError::Parse {
        path: "<system>".into(),
        message: e.to_string(),
    })?;
    let network = NetworkModel::new(file.buses, file.lines, file.slack_bus)?;
    let shares: Vec<(BusId, f64)> = file.load_shares.iter().map(|s| (s.bus, s.share)).collect();
    SystemModel::new(
        file.name.unwrap_or_else(|| "system".into()),
        file.generators,
        network,
        &shares,
    )
}

/// Serialises a system back into the file schema read by [`load_system`].
pub fn system_to_json(system: &SystemModel) -> String {
    let file = SystemFile {
        name: Some(system.name.clone()),
        slack_bus: Some(system.network.slack),
        generators: system.generators.clone(),
        buses: system.network.buses.clone(),
        lines: system.network.lines.clone(),
        load_shares: system
            .network
            .buses
            .iter()
            .zip(&system.load_shares)
            .filter(|(_, &s)| s > 0.0)
            .map(|(&bus, &share)| LoadShare { bus, share })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("system serialises")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(id: &str, from: BusId, to: BusId) -> Line {
        Line {
            id: id.into(),
            from,
            to,
            reactance: 0.1,
            rating: 100.0,
        }
    }

    pub(crate) fn unit(id: &str, bus: BusId) -> Generator {
        Generator {
            id: id.into(),
            bus,
            cost: 10.0,
            no_load_cost: 0.0,
            startup_cost: 0.0,
            shutdown_cost: 0.0,
            p_max: 100.0,
            p_min: 0.0,
            ramp_hourly: 100.0,
            ramp_15min: 25.0,
            ramp_startup: 100.0,
            ramp_shutdown: 100.0,
            min_up: 1,
            min_down: 1,
            fast_start: false,
            initial: None,
        }
    }

    #[test]
    fn two_bus_ptdf_is_minus_one() {
        let p = compute_ptdf(&[1, 2], &[line("L", 1, 2)], 1).unwrap();
        assert_eq!(p.get(0, 0), 0.0);
        assert!((p.get(1, 0) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn three_bus_ring_ptdf() {
        // Hand solution of the reduced 2x2 susceptance system.
        let lines = [line("12", 1, 2), line("13", 1, 3), line("23", 2, 3)];
        let p = compute_ptdf(&[1, 2, 3], &lines, 1).unwrap();
        assert!((p.get(1, 0) + 2.0 / 3.0).abs() < 1e-12);
        assert!((p.get(1, 1) + 1.0 / 3.0).abs() < 1e-12);
        assert!((p.get(1, 2) - 1.0 / 3.0).abs() < 1e-12);
        for k in 0..3 {
            assert_eq!(p.get(0, k), 0.0);
        }
    }

    #[test]
    fn disconnected_network_is_rejected() {
        let err = compute_ptdf(&[1, 2, 3], &[line("12", 1, 2)], 1).unwrap_err();
        assert!(matches!(err, NetworkError::Disconnected(3)));
    }

    #[test]
    fn nodal_loads_split_by_share() {
        let net = NetworkModel::new(vec![1, 2, 3], vec![line("12", 1, 2), line("23", 2, 3)], None).unwrap();
        let sys = SystemModel::new("t", vec![unit("G", 1)], net, &[(1, 0.2), (2, 0.3), (3, 0.5)]).unwrap();
        let loads = nodal_loads(&sys, &[90.0]);
        let expected = [18.0, 27.0, 45.0];
        for (n, e) in expected.iter().enumerate() {
            assert!((loads.get(n, 0) - e).abs() < 1e-12);
        }
        assert_eq!(loads.system_total(0), 90.0);
    }

    #[test]
    fn even_and_single_bus_splits() {
        let net = NetworkModel::new(vec![1, 2], vec![line("12", 1, 2)], None).unwrap();
        let sys = SystemModel::new("t", vec![unit("G", 1)], net, &[(1, 0.5), (2, 0.5)]).unwrap();
        let loads = nodal_loads(&sys, &[100.0]);
        assert_eq!(loads.period(0), &[50.0, 50.0]);

        let net = NetworkModel::new(vec![7], vec![], None).unwrap();
        let sys = SystemModel::new("t", vec![unit("G", 7)], net, &[(7, 1.0)]).unwrap();
        assert_eq!(nodal_loads(&sys, &[42.5]).period(0), &[42.5]);
    }

    #[test]
    fn pmin_above_pmax_names_generator() {
        let net = NetworkModel::new(vec![1], vec![], None).unwrap();
        let mut g = unit("BAD", 1);
        g.p_min = 150.0;
        let err = SystemModel::new("t", vec![g], net, &[(1, 1.0)]).unwrap_err();
        assert!(err.to_string().contains("generator BAD"), "{err}");
    }

    #[test]
    fn shares_must_sum_to_one() {
        let net = NetworkModel::new(vec![1, 2], vec![line("12", 1, 2)], None).unwrap();
        let err = SystemModel::new("t", vec![unit("G", 1)], net, &[(1, 0.5), (2, 0.4)]).unwrap_err();
        assert!(err.to_string().contains("load_shares"));
    }

    #[test]
    fn slack_defaults_to_lowest_bus() {
        let net = NetworkModel::new(vec![5, 3, 9], vec![line("a", 5, 3), line("b", 3, 9)], None).unwrap();
        assert_eq!(net.slack(), 3);
    }

    #[test]
    fn default_initial_state_is_off_for_min_down() {
        let mut g = unit("G", 1);
        g.min_down = 4;
        let s = g.initial_state();
        assert!(!s.on);
        assert_eq!(s.output, 0.0);
        assert_eq!(s.hours_in_state, 4);
    }
}
