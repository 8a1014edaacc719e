use num_complex::Complex64;
use thiserror::Error;

/// Everything that can go wrong while evaluating a source, a tree or an
/// expectation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("Dirichlet series diverges at s = {0}")]
    DivergentSeries(Complex64),

    #[error("enumeration at depth {depth} exceeded the branch budget of {budget}")]
    UnsupportedDepth { depth: usize, budget: usize },

    #[error("source is not entropic: finite-difference entropy {finite_difference} vs Cesaro estimate {cesaro}")]
    NotEntropic { finite_difference: f64, cesaro: f64 },

    #[error("pole of the Dirichlet series at s = {0}")]
    PoleAt(Complex64),

    #[error("I - P(s) is numerically singular at s = {0}")]
    SingularMatrix(Complex64),

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("working precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("branch has no fixed point in [0, 1]")]
    NoFixedPoint,

    #[error("no spectral gap: |lambda_1| = {first}, |lambda_2| = {second}")]
    NoSpectralGap { first: f64, second: f64 },

    #[error("quasi-inverse (I - H_s)^-1 is singular at s = {0}")]
    QuasiInversePole(Complex64),

    #[error("words {first} and {second} cannot be distinguished")]
    IndistinguishableWords { first: usize, second: usize },

    #[error("truncation budget exceeded: {0}")]
    TruncationBudget(String),

    #[error("Rice kernel does not decay enough for n = {n} within t_max = {t_max}")]
    KernelUnderflow { n: u64, t_max: f64 },

    #[error("unsupported source: {0}")]
    UnsupportedSource(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("trial {trial} with seed {seed} failed: {cause}")]
    TrialFailed { seed: u64, trial: u64, cause: Box<Error> },
}

impl Error {
    /// Configuration problems map to exit code 2, everything else is a numeric
    /// failure (exit code 3).
    pub fn is_config(&self) -> bool {
        matches!(self, Error::InvalidConfig(_) | Error::UnsupportedSource(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
