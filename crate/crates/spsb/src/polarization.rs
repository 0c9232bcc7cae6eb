//! Jones-vector geometry of polarization states: linear/circular basis
//! changes, Stokes parameters, polarization-ellipse descriptors, bright/dark
//! mode constructors for both cavity models, and the quarter-wave-plate
//! transform.
//!
//! Sign conventions, fixed once:
//!
//! - Amplitudes transform as c± = (cx ∓ i·cy)/√2, so that the unit vectors
//!   satisfy e± = (e_x ± i·e_y)/√2 and c_x e_x + c_y e_y = c₊e₊ + c₋e₋.
//! - With the e^{−iωt} time convention, e₊ is the *right* circular mode and
//!   e₋ the *left* one; correspondingly s3 = 2·Im(cx*·cy) > 0 labels right
//!   handedness. Only the labels (not any physics) depend on this choice.
//! - Jones vectors represent rays: states are compared through the overlap
//!   modulus |⟨u|v⟩|, which ignores the global phase.

use crate::error::{Error, Result};
use crate::{C64, ModelKind};

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Stokes components near zero below this (relative to s0) are treated as
/// exactly zero when classifying handedness and orientation degeneracy.
const DEGENERACY_EPS: f64 = 1e-12;

/// Complex field amplitudes on the linear polarization basis (e_x, e_y).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JonesVector {
    /// Amplitude on e_x.
    pub cx: C64,
    /// Amplitude on e_y.
    pub cy: C64,
}

/// Stokes parameters of a pure polarization state, in units of |amplitude|².
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StokesVector {
    /// Total intensity |cx|² + |cy|².
    pub s0: f64,
    /// Linear x/y imbalance |cx|² − |cy|².
    pub s1: f64,
    /// Linear ±45° component 2·Re(cx*·cy).
    pub s2: f64,
    /// Circular component 2·Im(cx*·cy).
    pub s3: f64,
}

/// Sense of rotation of the polarization ellipse.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Handedness {
    /// s3 > 0 (dominant e₊ component under this crate's convention).
    Right,
    /// s3 < 0.
    Left,
    /// s3 = 0: degenerate ellipse (a line).
    Linear,
}

/// Orientation/ellipticity description of a pure polarization state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolarizationEllipse {
    /// Major-axis orientation ψ ∈ [0, π). Reported as 0 (and flagged) for
    /// circular light, where the orientation is undefined.
    pub orientation: f64,
    /// Ellipticity angle χe ∈ [−π/4, π/4]; 0 for linear, ±π/4 for circular.
    pub ellipticity: f64,
    /// Sense of rotation; `Linear` exactly when χe = 0.
    pub handedness: Handedness,
    /// True when |χe| is so close to π/4 that ψ is meaningless.
    pub orientation_degenerate: bool,
}

impl JonesVector {
    /// Builds a vector from its linear-basis amplitudes.
    pub fn new(cx: C64, cy: C64) -> Self {
        Self { cx, cy }
    }

    /// Builds a vector from circular-basis amplitudes (c₊, c₋):
    /// cx = (c₊ + c₋)/√2, cy = i(c₊ − c₋)/√2.
    pub fn from_circular(cp: C64, cm: C64) -> Self {
        Self {
            cx: (cp + cm) * SQRT_HALF,
            cy: C64::new(0.0, 1.0) * (cp - cm) * SQRT_HALF,
        }
    }

    /// Circular-basis amplitudes (c₊, c₋) = ((cx − i·cy)/√2, (cx + i·cy)/√2).
    pub fn to_circular(&self) -> (C64, C64) {
        let i = C64::new(0.0, 1.0);
        (
            (self.cx - i * self.cy) * SQRT_HALF,
            (self.cx + i * self.cy) * SQRT_HALF,
        )
    }

    /// Total intensity |cx|² + |cy|².
    pub fn intensity(&self) -> f64 {
        self.cx.norm_sqr() + self.cy.norm_sqr()
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.intensity().sqrt()
    }

    /// Hermitian inner product ⟨self|other⟩ = cx*·cx' + cy*·cy'.
    pub fn inner(&self, other: &Self) -> C64 {
        self.cx.conj() * other.cx + self.cy.conj() * other.cy
    }

    /// Overlap modulus |⟨self|other⟩| — the phase-blind comparison used for
    /// ray equality.
    pub fn overlap(&self, other: &Self) -> f64 {
        self.inner(other).norm()
    }

    /// The vector scaled to unit norm.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidParameter(
                "cannot normalize a zero or non-finite Jones vector".into(),
            ));
        }
        Ok(Self {
            cx: self.cx / n,
            cy: self.cy / n,
        })
    }

    /// True when |norm² − 1| < 1e−12.
    pub fn is_normalized(&self) -> bool {
        (self.intensity() - 1.0).abs() < 1e-12
    }

    /// Stokes parameters. Rejects the zero vector, which has no polarization
    /// state.
    pub fn stokes(&self) -> Result<StokesVector> {
        if self.intensity() == 0.0 {
            return Err(Error::InvalidParameter(
                "zero Jones vector has no Stokes parameters".into(),
            ));
        }
        let cross = self.cx.conj() * self.cy;
        Ok(StokesVector {
            s0: self.intensity(),
            s1: self.cx.norm_sqr() - self.cy.norm_sqr(),
            s2: 2.0 * cross.re,
            s3: 2.0 * cross.im,
        })
    }

    /// Orientation, ellipticity, and handedness of the polarization ellipse.
    pub fn ellipse(&self) -> Result<PolarizationEllipse> {
        let s = self.stokes()?;
        let linear_part = s.s1.hypot(s.s2);
        let degenerate = linear_part < DEGENERACY_EPS * s.s0;
        let orientation = if degenerate {
            0.0
        } else {
            let mut psi = 0.5 * s.s2.atan2(s.s1);
            if psi < 0.0 {
                psi += std::f64::consts::PI;
            }
            // Guard the half-open interval against -0.0 and rounding at π.
            if psi >= std::f64::consts::PI {
                psi = 0.0;
            }
            psi
        };
        let ellipticity = 0.5 * (s.s3 / s.s0).clamp(-1.0, 1.0).asin();
        let handedness = if s.s3.abs() < DEGENERACY_EPS * s.s0 {
            Handedness::Linear
        } else if s.s3 > 0.0 {
            Handedness::Right
        } else {
            Handedness::Left
        };
        Ok(PolarizationEllipse {
            orientation,
            ellipticity,
            handedness,
            orientation_degenerate: degenerate,
        })
    }

    /// Unit Jones vector with a given ellipse: major axis at ψ, ellipticity
    /// angle χe (sign = handedness, positive → right).
    pub fn from_ellipse(orientation: f64, ellipticity: f64) -> Self {
        let (sp, cp) = orientation.sin_cos();
        let (se, ce) = ellipticity.sin_cos();
        // R(ψ) · (cos χe, i sin χe)
        Self {
            cx: C64::new(cp * ce, -sp * se),
            cy: C64::new(sp * ce, cp * se),
        }
    }
}

impl StokesVector {
    /// |s0² − (s1² + s2² + s3²)|/s0² — zero for pure states.
    pub fn purity_defect(&self) -> f64 {
        let q = self.s1 * self.s1 + self.s2 * self.s2 + self.s3 * self.s3;
        (self.s0 * self.s0 - q).abs() / (self.s0 * self.s0)
    }
}

/// The macroscopically occupied signal mode when the polarization symmetry
/// breaks at angle θ.
///
/// - OPO: e_B = (e_x e^{−iθ} + e_y e^{iθ})/√2 — elliptical, oriented along
///   ±45° with ellipticity that grows with θ.
/// - χ³ cavity: e_B = (e₊ e^{−iθ} + e₋ e^{iθ})/√2 = e_θ — linear at angle θ.
pub fn bright_mode(model: ModelKind, theta: f64) -> JonesVector {
    match model {
        ModelKind::Opo => JonesVector::new(
            C64::from_polar(SQRT_HALF, -theta),
            C64::from_polar(SQRT_HALF, theta),
        ),
        ModelKind::Chi3 => JonesVector::new(C64::new(theta.cos(), 0.0), C64::new(theta.sin(), 0.0)),
    }
}

/// The classically empty mode orthogonal to [`bright_mode`]; its quadratures
/// carry the Goldstone mode and the perfectly squeezed observable.
///
/// - OPO: e_D = i(e_x e^{−iθ} − e_y e^{iθ})/√2.
/// - χ³ cavity: e_D = −i(e₊ e^{−iθ} − e₋ e^{iθ})/√2 = e_{θ+π/2}.
pub fn dark_mode(model: ModelKind, theta: f64) -> JonesVector {
    match model {
        ModelKind::Opo => {
            let i = C64::new(0.0, 1.0);
            JonesVector::new(
                i * C64::from_polar(SQRT_HALF, -theta),
                -i * C64::from_polar(SQRT_HALF, theta),
            )
        }
        ModelKind::Chi3 => {
            JonesVector::new(C64::new(-theta.sin(), 0.0), C64::new(theta.cos(), 0.0))
        }
    }
}

/// Quarter-wave plate with its fast axis at `fast_axis` from e_x: the Jones
/// map R(φ)·diag(e^{−iπ/4}, e^{+iπ/4})·R(−φ) (fast axis retarded by −π/4,
/// slow axis by +π/4; the opposite choice differs only by a global phase and
/// relabels right↔left on the images).
pub fn qwp(v: &JonesVector, fast_axis: f64) -> JonesVector {
    let (s, c) = fast_axis.sin_cos();
    let f = C64::from_polar(1.0, -std::f64::consts::FRAC_PI_4);
    let g = C64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
    // Components in the plate frame.
    let vf = c * v.cx + s * v.cy;
    let vs = -s * v.cx + c * v.cy;
    let (wf, ws) = (f * vf, g * vs);
    // Back to the lab frame.
    JonesVector::new(c * wf - s * ws, s * wf + c * ws)
}
