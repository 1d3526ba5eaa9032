use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("{field} = {value}: {bound}")]
    OutOfRange {
        field: &'static str,
        bound: &'static str,
        value: f64,
    },
    #[error("negative density {0}")]
    NegativeDensity(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid needs at least 16 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("half width must be positive and finite, got {0}")]
    BadHalfWidth(f64),
    #[error("field has {found} samples but the grid has {expected} nodes")]
    LengthMismatch { expected: usize, found: usize },
    #[error("non-finite sample at node {0}")]
    NonFinite(usize),
    #[error("norm exponent must be >= 1 or infinity, got {0}")]
    BadExponent(f64),
}

/// A field that must be strictly positive is not.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("non-positive density {value} at node {node}")]
    NonPositiveDensity { node: usize, value: f64 },
    #[error("non-positive phi {value} at node {node}")]
    NonPositivePhi { node: usize, value: f64 },
    #[error("vacuum node {0} (density exactly zero)")]
    Vacuum(usize),
    #[error("sigma must be positive, got {0}")]
    BadSigma(f64),
    #[error("velocity profile width must be positive, got {0}")]
    BadWidth(f64),
    #[error("state formulation does not match the model regime")]
    RegimeMismatch,
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("non-finite value in {field} at node {node} during step {step}")]
    NonFinite {
        step: usize,
        field: &'static str,
        node: usize,
    },
    #[error("phi dropped to {value} at node {node} during step {step}")]
    NonPositivePhi {
        step: usize,
        node: usize,
        value: f64,
    },
    #[error("invalid solver setting: {0}")]
    Config(String),
    #[error(transparent)]
    State(#[from] StateError),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Parse(String),
    #[error("invalid {field}: {message}")]
    Invalid { field: String, message: String },
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Error)]
pub enum VerificationError {
    #[error("errors not monotone across refinement levels:\n{table}")]
    NonMonotone { table: String },
    #[error("formulations diverge at level {}:\n{}", .0.level, .0.table)]
    Diverged(Box<crate::verification::Divergence>),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("run failed: {0}")]
    Run(#[from] crate::solver::RunFailure),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
}
