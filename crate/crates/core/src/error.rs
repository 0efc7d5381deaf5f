use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Hilbert space would exceed the configured dense-matrix budget.
    #[error("chain of {n_sites} sites exceeds the configured maximum of {max_sites} (dense dimension 2^{n_sites})")]
    TooManySites { n_sites: usize, max_sites: usize },

    #[error("invalid {field}: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("operator is not Hermitian (max |M - M^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("operator dimension {found} does not match expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("site {site} out of range for a chain of {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("spectrum is degenerate: E_max - E_min = {width:e} below tolerance")]
    DegenerateSpectrum { width: f64 },

    #[error("not a valid density matrix: {reason}")]
    InvalidState { reason: String },

    #[error("eigendecomposition failed to converge")]
    EigenSolver,

    #[error("{failed} of {total} disorder realizations failed (more than 1%)")]
    TooManyFailedRealizations { failed: usize, total: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}
