//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong across the operator algebra, mean-field
/// solvers, fluctuation analysis, and the truncated-Fock solver.
#[derive(Debug, Error)]
pub enum Error {
    /// Two polynomials (or a polynomial and a Fock space) refer to different
    /// mode bases.
    #[error("mode basis mismatch: [{left}] vs [{right}]")]
    BasisMismatch { left: String, right: String },

    /// A mode basis was constructed with duplicate labels or with linear
    /// (x/y) and circular (+/−) signal labels mixed together.
    #[error("invalid mode basis: {0}")]
    InvalidBasis(String),

    /// A mode label is not present in the basis of the polynomial at hand.
    #[error("mode {0} not in basis")]
    ModeNotInBasis(&'static str),

    /// Vector/matrix dimensions do not line up with the mode basis.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A monomial uses a higher power of some mode than the Fock cutoff for
    /// that mode can represent.
    #[error("monomial power {power} exceeds Fock cutoff {cutoff} for mode {mode}")]
    CutoffExceeded {
        mode: &'static str,
        power: u32,
        cutoff: usize,
    },

    /// A truncated Fock space would exceed the configured dimension cap.
    #[error("Fock space dimension {dim} exceeds cap {cap}")]
    SpaceTooLarge { dim: usize, cap: usize },

    /// A model or solver parameter violates its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An operation that linearizes around a steady state received a state
    /// that is not stationary.
    #[error("state is not stationary: |F| = {residual:.3e}")]
    NotStationary { residual: f64 },

    /// A below-threshold configuration was given to an operation that needs
    /// a macroscopically occupied (bright) branch.
    #[error("below threshold: {0}")]
    BelowThreshold(String),

    /// The linearized drift is not Hurwitz on the reduced (non-Goldstone)
    /// subspace, so stationary covariances do not exist.
    #[error("drift matrix is not Hurwitz on the reduced subspace: max Re λ = {max_re:.3e}")]
    NotHurwitz { max_re: f64 },

    /// The steady-state solve of the master equation failed or was ambiguous.
    #[error("steady-state solve failed: {0}")]
    SteadyState(String),

    /// An empty grid or empty input where at least one element is required.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// Propagated LAPACK/BLAS failure.
    #[error("linear algebra backend error: {0}")]
    Linalg(String),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}
