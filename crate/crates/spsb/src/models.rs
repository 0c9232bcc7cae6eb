//! Parameter sets and Hamiltonian builders for the two cavity models, plus
//! the consistency check that the linear- and circular-basis forms of the
//! Kerr Hamiltonian are the same operator.
//!
//! Everything is expressed with ħ = 1, so Hamiltonian coefficients are rates
//! and all observable predictions depend only on rate ratios.
//!
//! Sign convention for the Kerr coupling g: the physical formula
//! g = −8ε₀·l·χxxxx·ℱ⁴/(ħπw²) is negative for a positive (self-focusing)
//! susceptibility. Builders use the signed value literally. The closed-form
//! threshold expressions in [`crate::meanfield`] are stated for magnitudes;
//! a symmetry-breaking branch exists only where δ and g have opposite signs
//! (δ·g < 0), e.g. positive detuning with the physically negative g.

use crate::error::{Error, Result};
use crate::operators::{Mode, ModeBasis, OpPoly};
use crate::polarization::JonesVector;
use crate::C64;

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Parameters of the type-II frequency-degenerate OPO.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OpoParams {
    /// Pump drive amplitude ℰp (rate units).
    pub pump: f64,
    /// Down-conversion coupling χ (rate units).
    pub chi: f64,
    /// Pump-mode cavity damping rate γp.
    pub gamma_p: f64,
    /// Signal-mode cavity damping rate γs.
    pub gamma_s: f64,
}

impl OpoParams {
    /// Checks the parameter domain: every rate strictly positive.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("pump", self.pump),
            ("chi", self.chi),
            ("gamma_p", self.gamma_p),
            ("gamma_s", self.gamma_s),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "OPO parameter {name} must be strictly positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Threshold drive ℰp,th = γp·γs/χ above which the signal field turns on.
    pub fn threshold_pump(&self) -> f64 {
        self.gamma_p * self.gamma_s / self.chi
    }

    /// Dimensionless pump σ = ℰp/ℰp,th (σ > 1 means above threshold).
    pub fn sigma(&self) -> f64 {
        self.pump / self.threshold_pump()
    }

    /// Pump-mode amplitude β = ℰp/γp that the pump relaxes to while the
    /// signal is empty, and the resulting parametric gain λ = χβ seen by the
    /// signal pair. Valid below threshold (λ < γs).
    pub fn below_threshold_gain(&self) -> f64 {
        self.chi * self.pump / self.gamma_p
    }
}

/// Parameters of the Kerr (χ³) four-wave-mixing cavity with two classical,
/// orthogonally circularly polarized pumps of common intensity ρ².
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Chi3Params {
    /// Cavity–signal detuning δ = ωc − ωs (rate units).
    pub delta: f64,
    /// Kerr coupling g (rate units, signed; physically negative for positive
    /// χxxxx).
    pub g: f64,
    /// Pump intensity ρ² (dimensionless, in units where g·ρ² is a rate).
    pub rho_sq: f64,
    /// Susceptibility ratio 𝒜 = χxxyy/χxxxx.
    pub ratio_a: f64,
    /// Susceptibility ratio ℬ = χxyyx/χxxxx.
    pub ratio_b: f64,
    /// Signal-mode cavity damping rate γs.
    pub gamma_s: f64,
}

impl Chi3Params {
    /// Parameters under Kleinman symmetry, 𝒜 = ℬ = 1/3 (nonresonant
    /// electronic response).
    pub fn kleinman(delta: f64, g: f64, rho_sq: f64, gamma_s: f64) -> Self {
        Self {
            delta,
            g,
            rho_sq,
            ratio_a: 1.0 / 3.0,
            ratio_b: 1.0 / 3.0,
            gamma_s,
        }
    }

    /// Checks the parameter domain, including the isotropic-susceptibility
    /// constraint 2𝒜 + ℬ = 1.
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_s > 0.0 && self.gamma_s.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gamma_s must be strictly positive and finite, got {}",
                self.gamma_s
            )));
        }
        if !(self.rho_sq >= 0.0 && self.rho_sq.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "rho_sq must be nonnegative and finite, got {}",
                self.rho_sq
            )));
        }
        if !self.delta.is_finite() || !self.g.is_finite() {
            return Err(Error::InvalidParameter(
                "delta and g must be finite".into(),
            ));
        }
        let defect = (2.0 * self.ratio_a + self.ratio_b - 1.0).abs();
        if !(defect < 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "susceptibility ratios must satisfy 2A + B = 1, defect {defect:.3e}"
            )));
        }
        Ok(())
    }
}

/// Geometry and material constants from which the Kerr rate g follows.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalParams {
    /// Refractive index n.
    pub refractive_index: f64,
    /// Effective cavity length L (m).
    pub cavity_length: f64,
    /// Nonlinear medium length l (m).
    pub medium_length: f64,
    /// TEM₀₀ mode radius w at the waist (m).
    pub waist: f64,
    /// Signal angular frequency ωs (rad/s).
    pub omega_s: f64,
    /// Third-order susceptibility χxxxx (SI units, may be negative or zero).
    pub chi_xxxx: f64,
    /// Vacuum permittivity ε₀ (set to 1 for natural units).
    pub eps0: f64,
    /// Reduced Planck constant ħ (set to 1 for natural units).
    pub hbar: f64,
    /// Speed of light in vacuum, used only for the Rayleigh-length sanity
    /// check (set to 1 for natural units).
    pub speed_of_light: f64,
}

impl PhysicalParams {
    /// SI-unit constructor with ε₀, ħ, c filled in.
    pub fn si(
        refractive_index: f64,
        cavity_length: f64,
        medium_length: f64,
        waist: f64,
        omega_s: f64,
        chi_xxxx: f64,
    ) -> Self {
        Self {
            refractive_index,
            cavity_length,
            medium_length,
            waist,
            omega_s,
            chi_xxxx,
            eps0: 8.8541878128e-12,
            hbar: 1.054571817e-34,
            speed_of_light: 2.99792458e8,
        }
    }

    /// Checks positivity of every geometric/physical input (χxxxx may be any
    /// finite value) and returns warnings for soft conditions: currently
    /// only the thin-medium assumption l ≤ z_R, with Rayleigh length
    /// z_R = w²·n·ωs/(2c).
    pub fn validate(&self) -> Result<Vec<String>> {
        for (name, v) in [
            ("refractive_index", self.refractive_index),
            ("cavity_length", self.cavity_length),
            ("medium_length", self.medium_length),
            ("waist", self.waist),
            ("omega_s", self.omega_s),
            ("eps0", self.eps0),
            ("hbar", self.hbar),
            ("speed_of_light", self.speed_of_light),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "physical parameter {name} must be strictly positive and finite, got {v}"
                )));
            }
        }
        if !self.chi_xxxx.is_finite() {
            return Err(Error::InvalidParameter("chi_xxxx must be finite".into()));
        }
        let mut warnings = Vec::new();
        let rayleigh =
            self.waist * self.waist * self.refractive_index * self.omega_s
                / (2.0 * self.speed_of_light);
        if self.medium_length > rayleigh {
            warnings.push(format!(
                "medium length {:.3e} m exceeds the cavity Rayleigh length {:.3e} m; \
                 the single-waist coupling formula is inaccurate",
                self.medium_length, rayleigh
            ));
        }
        Ok(warnings)
    }
}

/// Evaluates the field normalization ℱ² = ħωs/(2ε₀nL) and the Kerr rate
/// g = −8ε₀·l·χxxxx·ℱ⁴/(ħπw²); returns (g, ℱ²).
pub fn g_from_physical(p: &PhysicalParams) -> Result<(f64, f64)> {
    p.validate()?;
    let f_sq =
        p.hbar * p.omega_s / (2.0 * p.eps0 * p.refractive_index * p.cavity_length);
    let g = -8.0 * p.eps0 * p.medium_length * p.chi_xxxx * f_sq * f_sq
        / (p.hbar * std::f64::consts::PI * p.waist * p.waist);
    Ok((g, f_sq))
}

/// Classical pump amplitudes of the two χ³ pump beams.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PumpAmplitudes {
    /// First pump (polarization e₊ under this crate's convention).
    pub pump1: JonesVector,
    /// Second pump (polarization e₋).
    pub pump2: JonesVector,
}

/// The polarization-symmetric pump configuration: two beams of equal
/// intensity ρ² with orthogonal circular polarizations,
/// (α1x, α1y) = (ρ/√2, iρ/√2) and (α2x, α2y) = (ρ/√2, −iρ/√2). Any other
/// choice would single out a transverse direction and break the symmetry
/// explicitly.
pub fn circular_pump_config(rho: f64) -> PumpAmplitudes {
    let a = rho / 2f64.sqrt();
    PumpAmplitudes {
        pump1: JonesVector::new(re(a), I * a),
        pump2: JonesVector::new(re(a), -I * a),
    }
}

/// A cavity model ready for mean-field and fluctuation analysis: a mode
/// basis, the Hamiltonian over that basis, one damping rate per mode, and
/// the integer charges generating the polarization symmetry (empty when the
/// model has none).
#[derive(Clone, Debug)]
pub struct System {
    /// Mode basis of the Hamiltonian, fixing amplitude-vector ordering.
    pub basis: ModeBasis,
    /// Hamiltonian polynomial (rates; ħ = 1).
    pub hamiltonian: OpPoly,
    /// Cavity damping rate per mode, aligned with `basis`.
    pub gammas: Vec<f64>,
    /// Per-mode charges of the phase rotation a_m → a_m·e^{iθ·q_m} that
    /// leaves the Hamiltonian invariant.
    pub charges: Vec<i32>,
}

impl System {
    /// Number of modes.
    pub fn n_modes(&self) -> usize {
        self.basis.len()
    }
}

/// Charges of the polarization phase rotation for any basis over signal
/// modes (+1 for x/+, −1 for y/−, 0 for the pump).
pub fn symmetry_charges(basis: &ModeBasis) -> Vec<i32> {
    basis
        .modes()
        .iter()
        .map(|m| match m {
            Mode::SigX | Mode::SigPlus => 1,
            Mode::SigY | Mode::SigMinus => -1,
            Mode::Pump => 0,
        })
        .collect()
}

/// The OPO Hamiltonian over [x, y, pump]:
/// H = i(ℰp·b† + χ·b·ax†·ay†) + H.c. — a resonant drive on the pump and
/// down-conversion of pump photons into x/y signal pairs.
pub fn build_opo_hamiltonian(p: &OpoParams) -> Result<OpPoly> {
    p.validate()?;
    let basis = ModeBasis::opo_full();
    // i·ℰp·b†  (+ adjoint − i·ℰp·b)
    let drive = OpPoly::monomial(&basis, &[(0, 0), (0, 0), (1, 0)], I * p.pump)?;
    // i·χ·b·ax†·ay†  (+ adjoint − i·χ·b†·ax·ay)
    let conv = OpPoly::monomial(&basis, &[(1, 0), (1, 0), (0, 1)], I * p.chi)?;
    let half = drive.add(&conv)?;
    half.add(&half.adjoint())
}

/// The full OPO system (three modes, pump dynamics included).
pub fn opo_system(p: &OpoParams) -> Result<System> {
    let hamiltonian = build_opo_hamiltonian(p)?;
    let basis = ModeBasis::opo_full();
    let charges = symmetry_charges(&basis);
    Ok(System {
        basis,
        hamiltonian,
        gammas: vec![p.gamma_s, p.gamma_s, p.gamma_p],
        charges,
    })
}

/// The below-threshold OPO reduced to its signal pair: the pump is held at
/// its empty-cavity value β = ℰp/γp, leaving the quadratic two-mode
/// Hamiltonian H = i·λ(ax†ay† − ax·ay) with λ = χβ. Exact while the signal
/// is classically empty; used for the weak-coupling oracle comparison.
pub fn opo_signal_system(p: &OpoParams) -> Result<System> {
    p.validate()?;
    let basis = ModeBasis::linear_signal();
    let lambda = p.below_threshold_gain();
    let up = OpPoly::monomial(&basis, &[(1, 0), (1, 0)], I * lambda)?;
    let hamiltonian = up.add(&up.adjoint())?;
    let charges = symmetry_charges(&basis);
    Ok(System {
        basis,
        hamiltonian,
        gammas: vec![p.gamma_s, p.gamma_s],
        charges,
    })
}

/// The χ³ Hamiltonian over the linear signal basis [x, y], with the two
/// classical pump beams entering as parameters:
///
/// - H₀ = δ(nx + ny),
/// - self-phase modulation ax†²ax² + ay†²ay²,
/// - cross-phase modulation Σⱼ 4(|αjx|² + 𝒜|αjy|²)·nx +
///   Σⱼ 4(|αjy|² + 𝒜|αjx|²)·ny + 4𝒜·nx·ny,
/// - four-wave mixing ℬ·ax†²ay² + 2(α1xα2x + ℬα1yα2y)·ax†² +
///   2(α1yα2y + ℬα1xα2x)·ay†² + Σⱼ 4(ℬαjx*αjy + 𝒜αjxαjy*)·ax†ay +
///   4𝒜(α1xα2y + α1yα2x)·ax†ay† + H.c. (adjoint applied to the whole
///   four-wave-mixing group),
///
/// the interaction carrying an overall factor (3/4)g.
pub fn build_chi3_linear(p: &Chi3Params, pumps: &PumpAmplitudes) -> Result<OpPoly> {
    p.validate()?;
    let basis = ModeBasis::linear_signal();
    let (aa, bb) = (p.ratio_a, p.ratio_b);
    let (a1, a2) = (pumps.pump1, pumps.pump2);

    let h0 = OpPoly::weighted_number(&basis, &[1, 1])?.scale(re(p.delta));

    // Self-phase modulation.
    let spm = OpPoly::monomial(&basis, &[(2, 2), (0, 0)], re(1.0))?
        .add(&OpPoly::monomial(&basis, &[(0, 0), (2, 2)], re(1.0))?)?;

    // Cross-phase modulation (pump-signal and signal-signal parts).
    let cx: f64 = [a1, a2]
        .iter()
        .map(|aj| 4.0 * (aj.cx.norm_sqr() + aa * aj.cy.norm_sqr()))
        .sum();
    let cy: f64 = [a1, a2]
        .iter()
        .map(|aj| 4.0 * (aj.cy.norm_sqr() + aa * aj.cx.norm_sqr()))
        .sum();
    let cpm = OpPoly::monomial(&basis, &[(1, 1), (0, 0)], re(cx))?
        .add(&OpPoly::monomial(&basis, &[(0, 0), (1, 1)], re(cy))?)?
        .add(&OpPoly::monomial(&basis, &[(1, 1), (1, 1)], re(4.0 * aa))?)?;

    // Four-wave mixing; the adjoint of the whole group is added at the end.
    let mut fwm = OpPoly::monomial(&basis, &[(2, 0), (0, 2)], re(bb))?;
    fwm = fwm.add(&OpPoly::monomial(
        &basis,
        &[(2, 0), (0, 0)],
        2.0 * (a1.cx * a2.cx + bb * a1.cy * a2.cy),
    )?)?;
    fwm = fwm.add(&OpPoly::monomial(
        &basis,
        &[(0, 0), (2, 0)],
        2.0 * (a1.cy * a2.cy + bb * a1.cx * a2.cx),
    )?)?;
    let mut exch = C64::new(0.0, 0.0);
    for aj in [a1, a2] {
        exch += 4.0 * (bb * aj.cx.conj() * aj.cy + aa * aj.cx * aj.cy.conj());
    }
    fwm = fwm.add(&OpPoly::monomial(&basis, &[(1, 0), (0, 1)], exch)?)?;
    fwm = fwm.add(&OpPoly::monomial(
        &basis,
        &[(1, 0), (1, 0)],
        4.0 * aa * (a1.cx * a2.cy + a1.cy * a2.cx),
    )?)?;
    let fwm = fwm.add(&fwm.adjoint())?;

    let interaction = spm.add(&cpm)?.add(&fwm)?.scale(re(0.75 * p.g));
    h0.add(&interaction)
}

/// The χ³ Hamiltonian over the circular signal basis [+, −], specialized to
/// the orthogonal-circular pump configuration of intensity ρ²:
///
/// - H₀ = δ(n₊ + n₋),
/// - self-phase modulation (1−ℬ)(a₊†²a₊² + a₋†²a₋²),
/// - cross-phase modulation 2(1+ℬ)·n₊n₋ + 2ρ²(3−ℬ)(n₊ + n₋),
/// - four-wave mixing 2ρ²(1+ℬ)(a₊a₋ + a₊†a₋†),
///
/// again with the overall (3/4)g on the interaction.
pub fn build_chi3_circular(p: &Chi3Params) -> Result<OpPoly> {
    p.validate()?;
    let basis = ModeBasis::circular_signal();
    let bb = p.ratio_b;
    let rho_sq = p.rho_sq;

    let h0 = OpPoly::weighted_number(&basis, &[1, 1])?.scale(re(p.delta));

    let spm = OpPoly::monomial(&basis, &[(2, 2), (0, 0)], re(1.0 - bb))?
        .add(&OpPoly::monomial(&basis, &[(0, 0), (2, 2)], re(1.0 - bb))?)?;

    let cpm = OpPoly::monomial(&basis, &[(1, 1), (1, 1)], re(2.0 * (1.0 + bb)))?.add(
        &OpPoly::weighted_number(&basis, &[1, 1])?.scale(re(2.0 * rho_sq * (3.0 - bb))),
    )?;

    let down = OpPoly::monomial(&basis, &[(0, 1), (0, 1)], re(2.0 * rho_sq * (1.0 + bb)))?;
    let fwm = down.add(&down.adjoint())?;

    let interaction = spm.add(&cpm)?.add(&fwm)?.scale(re(0.75 * p.g));
    h0.add(&interaction)
}

/// The χ³ system over the circular basis (the computational form used by
/// all mean-field and fluctuation analysis).
pub fn chi3_system(p: &Chi3Params) -> Result<System> {
    let hamiltonian = build_chi3_circular(p)?;
    let basis = ModeBasis::circular_signal();
    let charges = symmetry_charges(&basis);
    Ok(System {
        basis,
        hamiltonian,
        gammas: vec![p.gamma_s, p.gamma_s],
        charges,
    })
}

/// Rewrites the linear-basis χ³ Hamiltonian (with the orthogonal-circular
/// pump configuration) in the circular basis via ax = (a₊ + a₋)/√2,
/// ay = i(a₊ − a₋)/√2 and returns the largest coefficient of the difference
/// from [`build_chi3_circular`], constants discarded. Zero (to rounding)
/// certifies that the two builders describe the same operator.
pub fn verify_basis_equivalence(p: &Chi3Params) -> Result<f64> {
    let pumps = circular_pump_config(p.rho_sq.sqrt());
    let linear = build_chi3_linear(p, &pumps)?;
    let circular = build_chi3_circular(p)?;
    let h = 1.0 / 2f64.sqrt();
    let map = vec![
        vec![(0, re(h)), (1, re(h))],
        vec![(0, I * h), (1, -I * h)],
    ];
    let image = linear.substitute(&ModeBasis::circular_signal(), &map)?;
    Ok(image
        .sub(&circular)?
        .without_constant()
        .max_abs_coeff())
}
