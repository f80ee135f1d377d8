//! Value-based interface to an external MILP/LP engine.
//!
//! Models go in as a [`MilpModel`]; values, duals and statuses come back
//! indexed by variable/constraint position. No engine object crosses the
//! boundary, so any engine can sit behind [`SolverBackend`].

use std::collections::BTreeMap;

use highs::{HighsModelStatus, HighsSolutionStatus, RowProblem};
use serde::{Deserialize, Serialize};

use crate::error::SolverError;
use crate::milp::{MilpModel, Sense, VarKind};

/// Environment variable naming the backend to use.
pub const BACKEND_ENV: &str = "FRP_SOLVER";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    /// Relative MIP gap.
    pub mip_gap: f64,
    /// Seconds.
    pub time_limit: f64,
    pub require_basic_duals: bool,
    pub threads: u32,
    pub seed: u32,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            mip_gap: 1e-3,
            time_limit: 600.0,
            require_basic_duals: true,
            threads: 1,
            seed: 0,
        }
    }
}

impl SolveOptions {
    pub fn with_gap(mut self, gap: f64) -> Self {
        self.mip_gap = gap;
        self
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.mip_gap >= 0.0 && self.mip_gap.is_finite()) {
            return Err(SolverError::Numerical(format!("invalid MIP gap {}", self.mip_gap)));
        }
        if !(self.time_limit > 0.0) {
            return Err(SolverError::Numerical(format!(
                "invalid time limit {}",
                self.time_limit
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    /// Optimal within the requested gap.
    Optimal,
    /// Stopped at the time limit with an incumbent.
    FeasibleIncumbent,
    Infeasible,
    /// Stopped at the time limit with no incumbent.
    TimeLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpSolution {
    pub status: SolveStatus,
    /// One value per model variable; empty when no solution exists.
    pub values: Vec<f64>,
    pub objective: f64,
    pub mip_gap: f64,
    /// Constraint/variable names of an irreducible infeasible subset, when known.
    pub iis: Vec<String>,
}

impl MilpSolution {
    pub fn has_solution(&self) -> bool {
        !self.values.is_empty()
    }
}

/// Primal-dual pair of an LP.
///
/// Dual signs follow the Lagrangian `c − Aᵀy = d`: for a minimisation a
/// binding `≥` row has `y ≥ 0`, a binding `≤` row has `y ≤ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub values: Vec<f64>,
    pub row_activity: Vec<f64>,
    pub row_duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub objective: f64,
    pub dual_objective: f64,
    pub basic: bool,
    /// Some basic variable or row sits at a bound: dual values may not be unique.
    pub primal_degenerate: bool,
    /// Some nonbasic variable or row has zero reduced cost: alternative primal optima.
    pub dual_degenerate: bool,
}

impl LpSolution {
    pub fn degenerate(&self) -> bool {
        self.primal_degenerate || self.dual_degenerate
    }

    /// Row duals keyed by constraint name.
    pub fn duals_by_name(&self, model: &MilpModel) -> BTreeMap<String, f64> {
        model
            .constraints()
            .iter()
            .zip(&self.row_duals)
            .map(|(c, &y)| (c.name.clone(), y))
            .collect()
    }
}

pub trait SolverBackend: Send + Sync {
    fn name(&self) -> &'static str;

    fn solve_milp(&self, model: &MilpModel, options: &SolveOptions) -> Result<MilpSolution, SolverError>;

    /// Solves a model with no integer variables and returns a basic primal-dual pair.
    fn solve_lp_duals(&self, model: &MilpModel, options: &SolveOptions) -> Result<LpSolution, SolverError>;
}

pub fn backend_from_name(name: &str) -> Result<Box<dyn SolverBackend>, SolverError> {
    match name.to_ascii_lowercase().as_str() {
        "highs" => Ok(Box::new(HighsBackend)),
        other => Err(SolverError::Unavailable(other.to_string())),
    }
}

/// Backend named by `FRP_SOLVER`, or HiGHS when unset.
pub fn default_backend() -> Result<Box<dyn SolverBackend>, SolverError> {
    match std::env::var(BACKEND_ENV) {
        Ok(name) if !name.trim().is_empty() => backend_from_name(name.trim()),
        _ => Ok(Box::new(HighsBackend)),
    }
}

/// HiGHS through its C API. Each solve creates a fresh engine instance, so
/// one backend value may serve concurrent callers.
#[derive(Debug, Clone, Copy, Default)]
pub struct HighsBackend;

const BASIS_BASIC: highs_sys::HighsInt = 1;
const DEGENERACY_TOL: f64 = 1e-9;

impl HighsBackend {
    fn build(model: &MilpModel, options: &SolveOptions, lp: bool) -> highs::Model {
        let mut problem = RowProblem::default();
        let cols: Vec<highs::Col> = model
            .variables()
            .iter()
            .map(|v| {
                let integer = v.kind != VarKind::Continuous;
                problem.add_column_with_integrality(v.cost, v.lower..=v.upper, integer)
            })
            .collect();
        for c in model.constraints() {
            let terms = c.terms.iter().map(|(v, a)| (cols[v.0], *a));
            match c.sense {
                Sense::Le => problem.add_row(..=c.rhs, terms),
                Sense::Ge => problem.add_row(c.rhs.., terms),
                Sense::Eq => problem.add_row(c.rhs..=c.rhs, terms),
            }
        }
        let mut engine = problem.optimise(highs::Sense::Minimise);
        // Solver progress goes to stdout only when tracing.
        if log::log_enabled!(log::Level::Trace) {
            engine.set_option("output_flag", true);
            engine.set_option("log_to_console", true);
        } else {
            engine.make_quiet();
        }
        engine.set_option("threads", options.threads.max(1) as i32);
        engine.set_option("random_seed", options.seed as i32);
        engine.set_option("time_limit", options.time_limit);
        if lp {
            engine.set_option("solver", "simplex");
        } else {
            engine.set_option("mip_rel_gap", options.mip_gap);
        }
        engine
    }

    fn iis_names(model: &MilpModel, solved: &mut highs::SolvedModel) -> Vec<String> {
        let num_col = model.variables().len();
        let num_row = model.constraints().len();
        let mut n_col: highs_sys::HighsInt = 0;
        let mut n_row: highs_sys::HighsInt = 0;
        let mut col_index = vec![0; num_col.max(1)];
        let mut row_index = vec![0; num_row.max(1)];
        let mut col_bound = vec![0; num_col.max(1)];
        let mut row_bound = vec![0; num_row.max(1)];
        let mut col_status = vec![0; num_col.max(1)];
        let mut row_status = vec![0; num_row.max(1)];
        // SAFETY: every buffer is sized for the full model, the upper bound on the IIS size.
        let status = unsafe {
            highs_sys::Highs_getIis(
                solved.as_mut_ptr(),
                &mut n_col,
                &mut n_row,
                col_index.as_mut_ptr(),
                row_index.as_mut_ptr(),
                col_bound.as_mut_ptr(),
                row_bound.as_mut_ptr(),
                col_status.as_mut_ptr(),
                row_status.as_mut_ptr(),
            )
        };
        if status == highs_sys::STATUS_ERROR {
            return Vec::new();
        }
        let rows = row_index[..(n_row.max(0) as usize).min(num_row)]
            .iter()
            .filter_map(|&r| model.constraints().get(r as usize).map(|c| c.name.clone()));
        let cols = col_index[..(n_col.max(0) as usize).min(num_col)]
            .iter()
            .filter_map(|&c| model.variables().get(c as usize).map(|v| v.name.clone()));
        rows.chain(cols).collect()
    }
}

impl SolverBackend for HighsBackend {
    fn name(&self) -> &'static str {
        "highs"
    }

    fn solve_milp(&self, model: &MilpModel, options: &SolveOptions) -> Result<MilpSolution, SolverError> {
        options.validate()?;
        let engine = Self::build(model, options, false);
        let mut solved = engine
            .try_solve()
            .map_err(|s| SolverError::Numerical(format!("HiGHS run failed: {s:?}")))?;
        let status = solved.status();
        let has_primal = solved.primal_solution_status() == HighsSolutionStatus::Feasible;
        let solve_status = match status {
            HighsModelStatus::Optimal => SolveStatus::Optimal,
            HighsModelStatus::Infeasible => SolveStatus::Infeasible,
            HighsModelStatus::ReachedTimeLimit
            | HighsModelStatus::ReachedIterationLimit
            | HighsModelStatus::ReachedSolutionLimit
            | HighsModelStatus::ReachedInterrupt
            | HighsModelStatus::ReachedMemoryLimit => {
                if has_primal {
                    SolveStatus::FeasibleIncumbent
                } else {
                    SolveStatus::TimeLimit
                }
            }
            HighsModelStatus::ModelEmpty => SolveStatus::Optimal,
            HighsModelStatus::Unbounded | HighsModelStatus::UnboundedOrInfeasible => {
                return Err(SolverError::Unbounded)
            }
            other => return Err(SolverError::Numerical(format!("HiGHS status {other:?}"))),
        };
        if solve_status == SolveStatus::Infeasible {
            let iis = Self::iis_names(model, &mut solved);
            return Ok(MilpSolution {
                status: solve_status,
                values: Vec::new(),
                objective: f64::NAN,
                mip_gap: f64::INFINITY,
                iis,
            });
        }
        let values = if has_primal || status == HighsModelStatus::ModelEmpty {
            solved.get_solution().columns().to_vec()
        } else {
            Vec::new()
        };
        let objective = if values.is_empty() {
            f64::NAN
        } else {
            model.objective_value(&values)
        };
        let mip_gap = if model.has_integers() {
            solved.mip_gap()
        } else {
            0.0
        };
        Ok(MilpSolution {
            status: solve_status,
            values,
            objective,
            mip_gap,
            iis: Vec::new(),
        })
    }

    fn solve_lp_duals(&self, model: &MilpModel, options: &SolveOptions) -> Result<LpSolution, SolverError> {
        options.validate()?;
        if model.has_integers() {
            return Err(SolverError::IntegerVariables);
        }
        let engine = Self::build(model, options, true);
        let mut solved = engine
            .try_solve()
            .map_err(|s| SolverError::Numerical(format!("HiGHS run failed: {s:?}")))?;
        match solved.status() {
            HighsModelStatus::Optimal | HighsModelStatus::ModelEmpty => {}
            HighsModelStatus::Infeasible => {
                return Err(SolverError::Infeasible(Self::iis_names(model, &mut solved)))
            }
            HighsModelStatus::Unbounded | HighsModelStatus::UnboundedOrInfeasible => {
                return Err(SolverError::Unbounded)
            }
            HighsModelStatus::ReachedTimeLimit => return Err(SolverError::NoSolution),
            other => return Err(SolverError::Numerical(format!("HiGHS status {other:?}"))),
        }
        let solution = solved.get_solution();
        let num_col = model.variables().len();
        let num_row = model.constraints().len();
        let basis_valid = solved
            .int_info_value(c"basis_validity")
            .map(|v| v == 1)
            .unwrap_or(false);
        let mut col_status = vec![0 as highs_sys::HighsInt; num_col.max(1)];
        let mut row_status = vec![0 as highs_sys::HighsInt; num_row.max(1)];
        let basic = basis_valid && {
            // SAFETY: buffers have one entry per column and per row of the loaded model.
            let rc = unsafe {
                highs_sys::Highs_getBasis(solved.as_ptr(), col_status.as_mut_ptr(), row_status.as_mut_ptr())
            };
            rc != highs_sys::STATUS_ERROR
        };
        if options.require_basic_duals && !basic && num_col > 0 {
            return Err(SolverError::NoBasicDuals);
        }

        let values = solution.columns().to_vec();
        let reduced_costs = solution.dual_columns().to_vec();
        let row_activity = solution.rows().to_vec();
        let row_duals = solution.dual_rows().to_vec();

        let mut dual_objective = model.objective_offset();
        for (v, &d) in model.variables().iter().zip(&reduced_costs) {
            let bound = if d > 0.0 { v.lower } else { v.upper };
            if d != 0.0 && bound.is_finite() {
                dual_objective += d * bound;
            }
        }
        for (c, &y) in model.constraints().iter().zip(&row_duals) {
            dual_objective += y * c.rhs;
        }

        let (mut primal_degenerate, mut dual_degenerate) = (false, false);
        if basic {
            for (j, v) in model.variables().iter().enumerate() {
                let at_bound = (values[j] - v.lower).abs() <= DEGENERACY_TOL
                    || (values[j] - v.upper).abs() <= DEGENERACY_TOL;
                if col_status[j] == BASIS_BASIC {
                    primal_degenerate |= at_bound && v.lower != v.upper;
                } else if v.lower != v.upper {
                    dual_degenerate |= reduced_costs[j].abs() <= DEGENERACY_TOL;
                }
            }
            for (i, c) in model.constraints().iter().enumerate() {
                let at_rhs = (row_activity[i] - c.rhs).abs() <= DEGENERACY_TOL;
                if row_status[i] == BASIS_BASIC {
                    primal_degenerate |= at_rhs;
                } else if c.sense != Sense::Eq {
                    dual_degenerate |= row_duals[i].abs() <= DEGENERACY_TOL;
                }
            }
        }

        Ok(LpSolution {
            objective: model.objective_value(&values),
            values,
            row_activity,
            row_duals,
            reduced_costs,
            dual_objective,
            basic,
            primal_degenerate,
            dual_degenerate,
        })
    }
}
