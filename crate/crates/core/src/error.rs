use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while reading or validating input data.
#[derive(Debug, Error)]
pub enum InputError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("invalid {record}: {message}")]
    Validation { record: String, message: String },
}

impl InputError {
    pub(crate) fn invalid(record: impl Into<String>, message: impl Into<String>) -> Self {
        InputError::Validation {
            record: record.into(),
            message: message.into(),
        }
    }
}

/// Errors raised by network sensitivity computations.
#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("network is not connected: bus {0} cannot reach the slack bus")]
    Disconnected(u32),

    #[error("susceptance matrix is singular")]
    Singular,

    #[error("unknown bus {0}")]
    UnknownBus(u32),
}

/// Errors surfaced by an optimisation backend.
#[derive(Debug, Error)]
pub enum SolverError {
    #[error("solver backend '{0}' is not available")]
    Unavailable(String),

    #[error("model is infeasible{}", format_iis(.0))]
    Infeasible(Vec<String>),

    #[error("model is unbounded")]
    Unbounded,

    #[error("time limit reached before any feasible solution was found")]
    NoSolution,

    #[error("backend failure: {0}")]
    Numerical(String),

    #[error("backend could not certify a basic dual solution")]
    NoBasicDuals,

    #[error("model still has integer variables; fix them before asking for duals")]
    IntegerVariables,
}

fn format_iis(names: &[String]) -> String {
    if names.is_empty() {
        String::new()
    } else {
        format!(" (irreducible subset: {})", names.join(", "))
    }
}

/// Errors from building or solving a market model.
#[derive(Debug, Error)]
pub enum MarketError {
    #[error("{0} mode requires ramp requirements")]
    MissingRequirements(&'static str),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error(transparent)]
    Solver(#[from] SolverError),

    #[error("fixed-binary pricing LP is infeasible; the commitment fixing is inconsistent")]
    PricingInfeasible,

    #[error("rolling simulation: {0}")]
    Rolling(String),

    #[error("scenario {scenario}: {source}")]
    Scenario {
        scenario: u32,
        #[source]
        source: Box<MarketError>,
    },
}
