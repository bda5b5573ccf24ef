use thiserror::Error;

/// Errors surfaced by the solver and verification layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("parity mismatch: {op} expects {expected:?} parity")]
    ParityMismatch {
        op: &'static str,
        expected: crate::grid::Parity,
    },

    #[error("grids do not match: {0}")]
    GridMismatch(String),

    #[error("linear solve did not meet tolerance: residual {residual:e} > tol {tol:e}")]
    SolverNonConvergence { residual: f64, tol: f64 },

    #[error("grid too coarse for dyadic decomposition (qmax = {qmax})")]
    GridTooCoarse { qmax: i32 },

    #[error("kappa = {kappa} is inside the near-one band; use the Gamma_1 branch")]
    NearOneBranch { kappa: f64 },

    #[error("kappa = {kappa} is outside the near-one band; use the general branch")]
    WrongBranch { kappa: f64 },

    #[error("monitored series is missing column '{0}'")]
    MissingSeries(String),

    #[error("run configurations do not match: {0}")]
    ConfigMismatch(String),

    #[error("blow-up detected at t = {t}: {name} = {value:e} exceeds guard {guard:e}")]
    BlowUp {
        t: f64,
        name: String,
        value: f64,
        guard: f64,
    },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("missing run data: {0}")]
    MissingRun(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("checkpoint format error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
