//! Central numeric tolerances, each with the rationale that sets its scale.
//!
//! All Hamiltonian coefficients in this crate arise from closed-form
//! expressions evaluated in f64, so coefficient-level identities hold to a
//! few ulps; solver-level quantities inherit the conditioning of small
//! (4×4–6×6) dense Jacobians and of Lyapunov solves, which leaves several
//! orders of magnitude of headroom above machine epsilon.

/// Coefficient-level equality of operator polynomials. Closed-form
/// coefficients agree to a few ulps; 1e-14 absorbs benign reassociation.
pub const COEFF_EQ: f64 = 1e-14;

/// Residual below which two polynomials are "the same operator" after a
/// basis substitution (slightly looser than COEFF_EQ because substitution
/// multiplies several √2 factors).
pub const BASIS_EQUIVALENCE: f64 = 1e-12;

/// Newton iterations on the gauge-fixed steady-state system stop when the
/// vector-field norm drops below this.
pub const NEWTON_RESIDUAL: f64 = 1e-10;

/// A state handed to stability/linearization routines must satisfy
/// ‖F(α)‖ below this, or it is rejected as non-stationary.
pub const STATIONARY: f64 = 1e-8;

/// |λ| below which a stability eigenvalue is identified as the Goldstone
/// zero. Well separated from physical decay rates (order γs) and well above
/// eigensolver noise (order 1e-14 for these matrix sizes).
pub const GOLDSTONE_EIG: f64 = 1e-8;

/// Margin used when classifying "stable": eigenvalues with real part below
/// this (Goldstone excluded) count as decaying.
pub const STABILITY_MARGIN: f64 = 1e-9;

/// Acceptable residual ‖AΣ + ΣAᵀ + D_total‖ of the stationary covariance.
pub const LYAPUNOV_RESIDUAL: f64 = 1e-10;

/// Relative magnitude of the Goldstone component of a spectrum's source
/// vector below which the zero mode is treated as exactly decoupled at
/// ω = 0 (the quadrature was constructed to not see the diffusing phase).
pub const GOLDSTONE_COUPLING: f64 = 1e-8;

/// Bright-branch classification: a Newton solution with squared amplitude
/// above this (in units of the natural scale γs/|g| or its OPO analogue)
/// is a genuine symmetry-breaking state rather than the trivial one.
pub const BRIGHT_AMPLITUDE_SQ: f64 = 1e-8;

/// Residual of the master-equation steady state, ‖L(ρ)‖_F, in the full
/// (unreduced) space.
pub const LIOUVILLIAN_RESIDUAL: f64 = 1e-9;

/// Deviation of a density matrix's trace from 1.
pub const DENSITY_TRACE: f64 = 1e-8;

/// Largest tolerated entrywise Hermiticity defect of a density matrix.
pub const DENSITY_HERMITIAN: f64 = 1e-10;

/// Most negative eigenvalue a density matrix may carry before it is
/// rejected (steady-state solves produce tiny negative tails at this scale).
pub const DENSITY_POSITIVITY: f64 = 1e-8;

/// Absolute floor used when forming relative deviations of moments that can
/// legitimately be zero (e.g. ⟨n̂₊ − n̂₋⟩).
pub const MOMENT_FLOOR: f64 = 1e-6;
