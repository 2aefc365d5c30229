use thiserror::Error;

/// Errors raised by the numerical kernels.
///
/// The variants split into two families: bad inputs (validation) and
/// numerical failures where the inputs were valid but a requested accuracy or
/// search bound could not be met. [`Error::is_numeric`] tells them apart.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("log_{order} is undefined at {x}: an intermediate argument is not positive")]
    Domain { order: u32, x: f64 },

    #[error("iterated-log order {0} is not supported (orders 1..=3 only)")]
    UnsupportedOrder(u32),

    #[error("index {j} is below the first valid index {j_min}")]
    IndexBelowMin { j: u64, j_min: u64 },

    #[error("index {j} is past the end of the weight table (last index {last})")]
    IndexBeyondTable { j: u64, last: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("minimizer of M_j/r^j reached the search bound {j_max} (ln r = {ln_r})")]
    NotInterior { ln_r: f64, j_max: u64 },

    #[error("derivative order {j} exceeds the cap {cap}")]
    DerivativeCap { j: u32, cap: u32 },

    #[error("tolerance {eps:e} is unachievable: {reason}")]
    EpsUnachievable { eps: f64, reason: String },

    #[error("{what}: expected {expected}, got {got}")]
    Arity {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid torus radii: {0}")]
    InvalidTorus(String),

    #[error("coordinate singularity: {0}")]
    Singular(String),

    #[error("quadrature needs at least {need} nodes, got {got}")]
    InsufficientNodes { need: u64, got: u64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures of the numerics on valid input (as opposed to bad input).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NotInterior { .. } | Error::EpsUnachievable { .. } | Error::Singular(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
