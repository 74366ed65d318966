use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad classes of failure, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed input: wrong shapes, bad arguments.
    Usage,
    /// The model violates an assumption of the theory (unstable drift,
    /// non-faithful invariant state, inconsistent parameters).
    ModelAssumption,
    /// A numerical routine did not reach its accuracy target.
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix identification must have even dimension, got {0}")]
    OddDimension(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} is not {property} (residual {residual:.3e})")]
    NotSymmetric {
        what: &'static str,
        property: &'static str,
        residual: f64,
    },

    #[error("transformation is not symplectic (residual {residual:.3e})")]
    NotSymplectic { residual: f64 },

    #[error("drift is not stable (spectral abscissa {abscissa:.6e}, required < {bound:.3e})")]
    Unstable { abscissa: f64, bound: f64 },

    #[error("invariant state is not faithful: symplectic eigenvalue {nu:.12} <= 1 + {tol:.1e}")]
    NonFaithful { nu: f64, tol: f64 },

    #[error("not a valid covariance: {reason} (residual {residual:.3e})")]
    InvalidCovariance { reason: &'static str, residual: f64 },

    #[error("standardized linear term does not vanish (residual {residual:.3e})")]
    InconsistentMean { residual: f64 },

    #[error("time must be nonnegative, got {0}")]
    NegativeTime(f64),

    #[error("inverse temperatures must be positive and finite, got {0}")]
    BadTemperature(f64),

    #[error("no {embedding} spectral gap: first-order value is undefined")]
    NoGap { embedding: &'static str },

    #[error("numerical failure: {what} (residual {residual:.3e})")]
    Numerical { what: String, residual: f64 },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::DimensionMismatch(_)
            | Error::OddDimension(_)
            | Error::InvalidParameter(_)
            | Error::NotSymmetric { .. }
            | Error::NegativeTime(_)
            | Error::BadTemperature(_) => ErrorKind::Usage,
            Error::NotSymplectic { .. }
            | Error::Unstable { .. }
            | Error::NonFaithful { .. }
            | Error::InvalidCovariance { .. }
            | Error::InconsistentMean { .. }
            | Error::NoGap { .. } => ErrorKind::ModelAssumption,
            Error::Numerical { .. } => ErrorKind::Numerical,
        }
    }

    pub(crate) fn numerical(what: impl Into<String>, residual: f64) -> Self {
        Error::Numerical {
            what: what.into(),
            residual,
        }
    }
}
