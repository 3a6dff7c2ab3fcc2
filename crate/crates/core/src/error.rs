use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("time {time} lies outside the path window [{lo}, {hi}]")]
    WindowExhausted { time: f64, lo: f64, hi: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("F(x) = x exp(1/(2x^2)) has no real solution for target {target} (minimum is e^(1/2))")]
    NoRealSolution { target: f64 },

    /// The closed-form solution ceases to exist (finite-time blow-up or a
    /// level below the minimum of the radial potential).
    #[error("flow not defined at time {time} from radius {rho}")]
    OutsideDomain { time: f64, rho: f64 },

    #[error("path carries no period tag")]
    MissingPeriod,

    #[error("empty {0}")]
    Empty(&'static str),

    #[error("root finder failed to converge: {0}")]
    NoConvergence(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
