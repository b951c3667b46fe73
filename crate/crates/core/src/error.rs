use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("potential is not finite at node {index} (tau = {tau})")]
    NonFinitePotential { index: usize, tau: f64 },

    #[error("unsupported boundary condition: {0}")]
    UnsupportedBoundary(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("too few nodes on the {side} side of the origin")]
    TooFewNodes { side: &'static str },

    #[error("bisection did not converge, last bracket [{lo}, {hi}]")]
    Bisection { lo: f64, hi: f64 },

    #[error("right-hand side is not orthogonal to the ground state: <rhs, phi> = {inner:e}")]
    NotOrthogonal { inner: f64 },

    #[error("no interior minimum found: {reason} (scan: {trace:?})")]
    Bracket {
        reason: String,
        trace: Vec<(f64, f64)>,
    },

    #[error("root search did not converge: {0}")]
    NoConvergence(String),

    #[error("mu_a does not attain its infimum for a = {a} in (0, 1); beta_a = a")]
    NotAttained { a: f64 },

    #[error(
        "{count} local minima found on the scan at {positions:?}; a unique minimizer was expected"
    )]
    MultipleMinima { count: usize, positions: Vec<f64> },

    #[error("inadmissible weighted-model parameters: {0}")]
    Inadmissible(String),

    #[error("critical fields out of order: bc1 = {bc1}, bc2 = {bc2}, bc3 = {bc3}")]
    FieldOrdering { bc1: f64, bc2: f64, bc3: f64 },

    #[error("at xi = {xi}: {source}")]
    AtXi {
        xi: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for errors caused by the caller's parameters rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::InvalidGrid(_)
            | Error::UnsupportedBoundary(_)
            | Error::InvalidArgument(_)
            | Error::LengthMismatch { .. }
            | Error::TooFewNodes { .. }
            | Error::NotAttained { .. }
            | Error::Inadmissible(_) => true,
            Error::AtXi { source, .. } => source.is_validation(),
            _ => false,
        }
    }

    pub(crate) fn at_xi(xi: f64, source: Error) -> Self {
        Error::AtXi {
            xi,
            source: Box::new(source),
        }
    }
}
