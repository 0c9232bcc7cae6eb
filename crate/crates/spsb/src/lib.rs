//! Quantum-noise analysis of spontaneous polarization symmetry breaking in
//! two nonlinear optical cavities: a type-II frequency-degenerate optical
//! parametric oscillator (OPO) and a Kerr (χ³) four-wave-mixing cavity pumped
//! by two orthogonal circularly polarized beams.
//!
//! Both systems share a continuous polarization symmetry. Above threshold the
//! emitted signal field breaks it spontaneously: the macroscopically occupied
//! *bright* mode picks an arbitrary polarization angle θ, a Goldstone mode
//! (zero eigenvalue of the stability matrix) lets θ diffuse, and the
//! canonically conjugate quadrature of the orthogonally polarized *dark* mode
//! is perfectly squeezed at zero analysis frequency, independently of the
//! parameter values.
//!
//! The crate is organized bottom-up:
//!
//! - [`operators`]: exact normal-ordered polynomial algebra of bosonic mode
//!   operators, plus dense matrix realization in a truncated Fock space.
//! - [`polarization`]: Jones/Stokes geometry, bright/dark mode constructors,
//!   wave-plate transforms.
//! - [`models`]: Hamiltonian builders and parameter sets for the two cavities,
//!   with a basis-equivalence check between the linear and circular forms of
//!   the Kerr model.
//! - [`meanfield`]: classical steady states, thresholds, stability and
//!   Goldstone-mode detection, bifurcation sweeps.
//! - [`fluctuations`]: linearized quantum fluctuations — drift/diffusion,
//!   Lyapunov covariances, and shot-noise-normalized output spectra of
//!   arbitrary polarization modes and quadratures.
//! - [`fock`]: an independent Lindblad master-equation solver in a truncated
//!   Fock space used as a cross-check (an "oracle") for the linearized
//!   results at weak coupling.
//! - [`verify`]: the deterministic end-to-end verification suite used by the
//!   command-line `verify` subcommand.
//!
//! Conventions, fixed once and used everywhere: ħ = 1 (Hamiltonian
//! coefficients are rates); quadratures X = a + a†, Y = −i(a − a†) with
//! vacuum variance 1; output spectra normalized so shot noise = 1; mean-field
//! equations dα/dt = −γα − i∂⟨H⟩/∂α*.

pub mod error;
pub mod fluctuations;
pub mod fock;
pub mod meanfield;
pub mod models;
pub mod operators;
pub mod polarization;
pub mod report;
pub mod rng;
pub mod tol;
pub mod verify;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Which of the two cavity models an operation refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    /// Type-II frequency-degenerate optical parametric oscillator: linear
    /// x/y signal modes plus a driven pump mode.
    Opo,
    /// Kerr four-wave-mixing cavity with two classical circularly polarized
    /// pumps: circular ± signal modes.
    Chi3,
}

impl ModelKind {
    /// Lower-case name used in CLI arguments and file names.
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Opo => "opo",
            ModelKind::Chi3 => "chi3",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "opo" => Ok(ModelKind::Opo),
            "chi3" => Ok(ModelKind::Chi3),
            other => Err(Error::InvalidParameter(format!(
                "unknown model '{other}' (expected 'opo' or 'chi3')"
            ))),
        }
    }
}
