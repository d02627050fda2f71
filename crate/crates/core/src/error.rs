use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("Hamiltonian is not differentiable at p = 0 (|p| = {norm:e})")]
    ZeroMomentum { norm: f64 },

    #[error("step rejected at t = {t}: |p| = {norm:e} fell below the guard")]
    StepRejected { t: f64, norm: f64 },

    #[error("Im M lost positive definiteness at t = {t} (min eigenvalue {min_eig:e})")]
    HessianNotPositive { t: f64, min_eig: f64 },

    #[error("beam Hessian is singular at s = {s} (tangency point)")]
    SingularHessian { s: f64 },

    #[error("square-root branch crossing detected at t = {t}, s = {s}")]
    BranchCrossing { t: f64, s: f64 },

    #[error("amplitude pole: |1 - t(1/s + i)| = {value:e} at s = {s}")]
    PoleTooClose { s: f64, value: f64 },

    #[error("quadrature did not converge: estimate {estimate:e} > tolerance {tolerance:e}")]
    NonConverged { estimate: f64, tolerance: f64 },

    #[error("chart evaluation failed at z = {z:?}: {reason}")]
    ChartFailure { z: Vec<f64>, reason: String },

    #[error("unsupported Gauss-Legendre order {0} (expected 2..=64)")]
    UnsupportedOrder(usize),

    #[error("grid too coarse: K = {grid} but frequency {k} needs K >= {required:.1}")]
    ResolutionTooLow { k: f64, grid: usize, required: f64 },

    #[error("errors must be positive (got {0:e} and {1:e})")]
    NonPositiveError(f64, f64),

    #[error("denominator norm is zero")]
    ZeroDenominator,

    #[error("rate fit is degenerate: {0}")]
    DegenerateFit(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("cannot mix denominator conventions in one table ({0} vs {1})")]
    MixedDenominator(String, String),

    #[error("unknown example '{0}'")]
    UnknownExample(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
