use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A derivative was queried outside the open interval where it is defined.
    #[error("{what} is only defined on the open interval (0, {end}); got {at}")]
    Domain {
        what: &'static str,
        at: f64,
        end: f64,
    },

    #[error("quadrature did not converge: estimate {estimate}, error estimate {error}")]
    Quadrature { estimate: f64, error: f64 },

    /// A sampled hypothesis check failed; `witness` is the offending point.
    #[error("precondition violated: {reason} (witness {witness})")]
    Precondition { reason: String, witness: f64 },

    #[error("bisection did not converge after {iterations} iterations, bracket [{lo}, {hi}]")]
    Bisection { iterations: usize, lo: f64, hi: f64 },

    #[error("curve specification: {0}")]
    Spec(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn ensure_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be a positive finite number, got {value}"
        )))
    }
}
