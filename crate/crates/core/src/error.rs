use thiserror::Error;

/// Errors raised by the billiard simulation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BilliardError {
    #[error("parameters out of domain: a and b must lie in the open interval (0, 1), got a={a}, b={b}")]
    OutOfDomain { a: f64, b: f64 },
    #[error("singular trajectory: obstacle corner hit at t={t}")]
    SingularTrajectory { t: f64 },
    #[error("numerical degeneracy: event time {dt} below minimum at t={t}")]
    NumericalDegeneracy { dt: f64, t: f64 },
    #[error("event budget of {budget} exceeded before t_max")]
    Timeout { budget: u64 },
    #[error("insufficient data: only {completed} of {requested} directions completed")]
    InsufficientData { completed: usize, requested: usize },
}

/// Errors raised by interval exchange construction and iteration.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum IetError {
    #[error("reducible permutation pair: prefix of length {prefix} is invariant")]
    Reducible { prefix: usize },
    #[error("non-positive length for letter {letter}")]
    NonPositiveLength { letter: String },
    #[error("point out of range [0, total)")]
    OutOfRange,
    #[error("orbit hit a singularity at step {step}")]
    SingularAt { step: u64 },
    #[error("alphabet/permutation/length data are inconsistent: {0}")]
    BadData(String),
}

/// Errors raised by Rauzy-Veech induction and the Lyapunov estimator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RenormError {
    #[error("saddle connection encountered at induction step {step}: last top and bottom lengths are equal")]
    ConnectionEncountered { step: u64 },
    #[error("cocycle is degenerate: all components killed by the renormalization products")]
    Degenerate,
    #[error("integer overflow in an accumulated transition-matrix product")]
    Overflow,
    #[error("{0}")]
    Iet(#[from] IetError),
}

/// Errors raised by series analysis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("insufficient data: {got} positive samples in window, need at least {need}")]
    InsufficientData { got: usize, need: usize },
    #[error("grid mismatch between the two series: {0}")]
    GridMismatch(String),
}
