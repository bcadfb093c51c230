use thiserror::Error;

/// Errors raised by grid construction, model evaluation, projections and solves.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension N = {0}: radial grids support N = 2 or N = 3")]
    InvalidDimension(usize),

    #[error("node_count = {got} is too small (need at least {min})")]
    TooFewNodes { got: usize, min: usize },

    #[error("r_max must be positive and finite, got {0}")]
    InvalidRadius(f64),

    #[error("grid function does not live on the expected grid")]
    GridMismatch,

    #[error("potential must be positive at every node, found V({r}) = {value}")]
    NonPositivePotential { r: f64, value: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("state does not change sign (positive part {plus:e}, negative part {minus:e})")]
    DegenerateSign { plus: f64, minus: f64 },

    #[error("state is identically zero")]
    ZeroFunction,

    #[error("no sign change found while bracketing `{what}` (expanded up to {limit:e})")]
    BracketNotFound { what: &'static str, limit: f64 },

    #[error("`{what}` did not converge within {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("singular linear system: {0}")]
    SingularSystem(String),

    #[error("pair projection yields a nonpositive square (t^2 = {t_sq:e}, s^2 = {s_sq:e})")]
    NonPositiveSquare { t_sq: f64, s_sq: f64 },

    #[error("Riesz kernel is implemented for N = 3 only, got N = {0}")]
    UnsupportedDimension(usize),

    #[error("nonlocal interaction vanishes for a nonzero state")]
    ZeroInteraction,

    #[error("unknown seed kind `{0}` (expected gaussian, one-node or two-bump)")]
    UnknownSeed(String),

    #[error("reports come from different models or level kinds")]
    ModelMismatch,

    #[error("solve did not converge: {0}")]
    Unconverged(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("kernel cache: {0}")]
    KernelCache(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
