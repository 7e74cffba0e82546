use thiserror::Error;

/// Errors raised by the numerical engines and the file formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("quadrature did not converge at order {order}: relative residual {residual:.3e}")]
    NonConvergence { order: usize, residual: f64 },

    #[error("detuning grid too narrow: minimum of Im chi lies at a grid endpoint")]
    GridTooNarrow,

    #[error("half-maximum level is not crossed on the {0} side of the peak")]
    NoCrossing(&'static str),

    #[error("finite-difference resolution insufficient: Richardson estimate {estimate:.3e} exceeds {limit:.1e}")]
    Resolution { estimate: f64, limit: f64 },

    #[error("Monte-Carlo ensemble not stationary: windows differ by {sigmas:.2} sigma")]
    NonStationary { sigmas: f64 },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { field, reason: reason.into() }
    }
}
