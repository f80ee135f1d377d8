//! Engine-neutral container for linear and mixed-integer models.
//!
//! Builders register named variables and constraints here; a
//! [`SolverBackend`](crate::solver::SolverBackend) turns the registry into
//! whatever its engine needs and reports values back by position.

use std::collections::HashMap;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Binary,
    Integer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub kind: VarKind,
    pub cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    /// Full name, `family[index]`.
    pub name: String,
    pub family: &'static str,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|(v, a)| a * values[v.0]).sum()
    }

    /// Amount by which `values` violate this row (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MilpModel {
    pub name: String,
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective_offset: f64,
    var_index: HashMap<String, VarId>,
    con_index: HashMap<String, ConId>,
}

impl MilpModel {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Self::default()
        }
    }

    /// Registers a variable. Names must be unique.
    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        kind: VarKind,
        cost: f64,
    ) -> VarId {
        let name = name.into();
        let id = VarId(self.variables.len());
        let (lower, upper) = match kind {
            VarKind::Binary => (lower.max(0.0), upper.min(1.0)),
            _ => (lower, upper),
        };
        let previous = self.var_index.insert(name.clone(), id);
        assert!(previous.is_none(), "duplicate variable {name}");
        self.variables.push(Variable {
            name,
            lower,
            upper,
            kind,
            cost,
        });
        id
    }

    /// Registers `Σ terms (sense) rhs` named `family[index]`.
    ///
    /// Repeated variables in `terms` are merged and zero coefficients dropped.
    pub fn add_constraint(
        &mut self,
        family: &'static str,
        index: impl AsRef<str>,
        terms: impl IntoIterator<Item = (VarId, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> ConId {
        let name = format!("{family}[{}]", index.as_ref());
        let mut merged: Vec<(VarId, f64)> = Vec::new();
        let mut position: HashMap<VarId, usize> = HashMap::new();
        for (v, a) in terms {
            assert!(v.0 < self.variables.len(), "constraint {name} references unknown variable");
            match position.get(&v) {
                Some(&i) => merged[i].1 += a,
                None => {
                    position.insert(v, merged.len());
                    merged.push((v, a));
                }
            }
        }
        merged.retain(|(_, a)| *a != 0.0);
        let id = ConId(self.constraints.len());
        let previous = self.con_index.insert(name.clone(), id);
        assert!(previous.is_none(), "duplicate constraint {name}");
        self.constraints.push(Constraint {
            name,
            family,
            terms: merged,
            sense,
            rhs,
        });
        id
    }

    pub fn add_objective_constant(&mut self, value: f64) {
        self.objective_offset += value;
    }

    pub fn objective_offset(&self) -> f64 {
        self.objective_offset
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.variables[id.0]
    }

    pub fn constraint(&self, id: ConId) -> &Constraint {
        &self.constraints[id.0]
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.var_index.get(name).copied()
    }

    pub fn con_id(&self, name: &str) -> Option<ConId> {
        self.con_index.get(name).copied()
    }

    pub fn set_bounds(&mut self, id: VarId, lower: f64, upper: f64) {
        let v = &mut self.variables[id.0];
        v.lower = lower;
        v.upper = upper;
    }

    pub fn set_cost(&mut self, id: VarId, cost: f64) {
        self.variables[id.0].cost = cost;
    }

    pub fn count_family(&self, family: &str) -> usize {
        self.constraints.iter().filter(|c| c.family == family).count()
    }

    pub fn has_integers(&self) -> bool {
        self.variables.iter().any(|v| v.kind != VarKind::Continuous)
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective_offset
            + self
                .variables
                .iter()
                .zip(values)
                .map(|(v, x)| v.cost * x)
                .sum::<f64>()
    }

    /// Copy of the model with every integer variable fixed to the rounded
    /// value in `values` and relaxed to continuous.
    pub fn with_integers_fixed(&self, values: &[f64]) -> MilpModel {
        let mut fixed = self.clone();
        for (v, &x) in fixed.variables.iter_mut().zip(values) {
            if v.kind != VarKind::Continuous {
                let r = x.round();
                v.lower = r;
                v.upper = r;
                v.kind = VarKind::Continuous;
            }
        }
        fixed
    }

    /// Largest bound or row violation of `values`, with the offending name.
    pub fn max_violation(&self, values: &[f64]) -> (f64, Option<String>) {
        let mut worst = (0.0, None);
        for (v, &x) in self.variables.iter().zip(values) {
            let amount = (v.lower - x).max(x - v.upper).max(0.0);
            if amount > worst.0 {
                worst = (amount, Some(v.name.clone()));
            }
        }
        for c in &self.constraints {
            let amount = c.violation(values);
            if amount > worst.0 {
                worst = (amount, Some(c.name.clone()));
            }
        }
        worst
    }

    /// Human-readable LP-format dump.
    pub fn to_lp_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "\\ {}", self.name);
        out.push_str("Minimize\n obj:");
        let mut any = false;
        for v in &self.variables {
            if v.cost != 0.0 {
                let _ = write!(out, " {} {}", signed(v.cost), v.name);
                any = true;
            }
        }
        if self.objective_offset != 0.0 || !any {
            let _ = write!(out, " {}", signed(self.objective_offset));
        }
        out.push_str("\nSubject To\n");
        for c in &self.constraints {
            let _ = write!(out, " {}:", c.name);
            for (v, a) in &c.terms {
                let _ = write!(out, " {} {}", signed(*a), self.variables[v.0].name);
            }
            if c.terms.is_empty() {
                out.push_str(" 0 x_empty");
            }
            let op = match c.sense {
                Sense::Le => "<=",
                Sense::Ge => ">=",
                Sense::Eq => "=",
            };
            let _ = writeln!(out, " {op} {}", c.rhs);
        }
        out.push_str("Bounds\n");
        for v in &self.variables {
            let lo = if v.lower == f64::NEG_INFINITY {
                "-inf".to_string()
            } else {
                v.lower.to_string()
            };
            let hi = if v.upper == f64::INFINITY {
                "+inf".to_string()
            } else {
                v.upper.to_string()
            };
            let _ = writeln!(out, " {lo} <= {} <= {hi}", v.name);
        }
        let ints: Vec<&str> = self
            .variables
            .iter()
            .filter(|v| v.kind != VarKind::Continuous)
            .map(|v| v.name.as_str())
            .collect();
        if !ints.is_empty() {
            out.push_str("Generals\n");
            for name in ints {
                let _ = writeln!(out, " {name}");
            }
        }
        out.push_str("End\n");
        out
    }
}

fn signed(x: f64) -> String {
    if x < 0.0 {
        format!("- {}", -x)
    } else {
        format!("+ {x}")
    }
}
