//! Linearized quantum fluctuations around a stationary state: drift and
//! diffusion matrices in the interleaved quadrature basis, stationary
//! covariances from the Lyapunov equation with the Goldstone direction
//! projected out, and shot-noise-normalized squeezing spectra of the cavity
//! output field.
//!
//! Conventions: X = a + a†, Y = −i(a − a†), vacuum variance 1; the output
//! spectrum is normalized so shot noise is 1 and perfect squeezing is 0.
//! Each cavity mode couples to its own vacuum input at rate 2γ_m, giving
//! the input–output transfer matrix
//!
//! ```text
//! T(ω) = √(2Γ)·(−iω·I − A)⁻¹·√(2Γ) − I,     V(ω) = ‖Tᵀ(ω)·n̂‖²
//! ```
//!
//! for the quadrature direction n̂. At ω = 0 on a symmetry-broken branch the
//! drift A is singular along the Goldstone mode; quadratures coupled to it
//! diverge (reported as +∞), while the dark-mode quadrature orthogonal to
//! the orbit tangent stays finite — and in fact lands exactly on zero.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, Solve};

use crate::error::{Error, Result};
use crate::meanfield::{orbit_tangent, quadrature_drift, vector_field, ClassicalState};
use crate::models::{chi3_system, opo_system, Chi3Params, OpoParams, System};
use crate::operators::Mode;
use crate::polarization::JonesVector;
use crate::tol;
use crate::C64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Drift and diffusion of the linearized quadrature fluctuations
/// dξ/dt = A·ξ + noise, with ξ = (δx₁, δy₁, δx₂, δy₂, …).
#[derive(Clone, Debug)]
pub struct DriftDiffusion {
    /// Drift matrix A (2M × 2M), the quadrature Jacobian of the mean-field
    /// equations at the state.
    pub drift: Array2<f64>,
    /// Excess diffusion over the vacuum inputs. With purely classical pumps
    /// and vacuum noise this vanishes identically — all squeezing physics
    /// lives in the non-normal structure of A — and it is kept as an
    /// explicit (zero) matrix so the Lyapunov stage reads
    /// A·Σ + Σ·Aᵀ + (D + 2Γ) = 0.
    pub diffusion: Array2<f64>,
    /// Cavity damping rate per mode.
    pub gammas: Vec<f64>,
    /// Unit tangent of the symmetry orbit at the state (interleaved
    /// quadratures) when the state breaks the phase symmetry; the Goldstone
    /// direction to project out of stationary covariances.
    pub goldstone: Option<Vec<f64>>,
}

/// A shot-noise-normalized output noise spectrum of one polarization mode
/// and quadrature.
#[derive(Clone, Debug)]
pub struct NoiseSpectrum {
    /// Quadrature phase φ (X_φ = a·e^{−iφ} + a†·e^{iφ}).
    pub phi: f64,
    /// Detected polarization mode.
    pub mode: JonesVector,
    /// (ω, V(ω)) samples; ω in the same rate units as the drift matrix,
    /// V = 1 is shot noise, V = 0 perfect squeezing, +∞ marks the
    /// Goldstone-fed divergence at ω = 0.
    pub samples: Vec<(f64, f64)>,
}

/// One row of a dark-mode squeezing sweep.
#[derive(Clone, Copy, Debug)]
pub struct SqueezingRow {
    /// Detuning δ.
    pub delta: f64,
    /// Pump intensity ρ².
    pub rho_sq: f64,
    /// Kerr coupling g.
    pub g: f64,
    /// Signal damping γs.
    pub gamma_s: f64,
    /// min over φ of the dark-mode output spectrum at ω = 0 (NaN off
    /// branch).
    pub v_min_at_0: f64,
    /// The minimizing quadrature phase, in [0, π) (NaN off branch).
    pub phi_opt: f64,
    /// False when the parameters admit no symmetry-broken branch, flagging
    /// the row as skipped rather than failing the sweep.
    pub on_branch: bool,
}

/// Linearizes the model around a stationary state. Errors when the state is
/// not stationary within the stationarity tolerance.
pub fn linearize(sys: &System, state: &ClassicalState) -> Result<DriftDiffusion> {
    let f = vector_field(sys, &state.amplitudes)?;
    let residual = f.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if !(residual <= tol::STATIONARY) {
        return Err(Error::NotStationary { residual });
    }
    let drift = quadrature_drift(sys, &state.amplitudes)?;
    let n2 = drift.nrows();
    let tangent = orbit_tangent(state, &sys.charges)?;
    let tnorm = tangent.iter().map(|x| x * x).sum::<f64>().sqrt();
    let goldstone = if tnorm > 1e-12 {
        Some(tangent.iter().map(|x| x / tnorm).collect())
    } else {
        None
    };
    Ok(DriftDiffusion {
        drift,
        diffusion: Array2::zeros((n2, n2)),
        gammas: sys.gammas.clone(),
        goldstone,
    })
}

impl DriftDiffusion {
    /// Total diffusion D + 2Γ entering the Lyapunov equation: stored excess
    /// plus the vacuum input noise 2γ_m on both quadratures of each mode.
    pub fn total_diffusion(&self) -> Array2<f64> {
        let mut d = self.diffusion.clone();
        for (m, &g) in self.gammas.iter().enumerate() {
            d[(2 * m, 2 * m)] += 2.0 * g;
            d[(2 * m + 1, 2 * m + 1)] += 2.0 * g;
        }
        d
    }
}

/// Orthonormal basis of the hyperplane orthogonal to `t` (columns of the
/// returned n×(n−1) matrix), via the Householder reflection mapping t to
/// ±e₁.
fn orthonormal_complement(t: &[f64]) -> Array2<f64> {
    let n = t.len();
    let norm = t.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut v: Vec<f64> = t.iter().map(|x| x / norm).collect();
    // u = v̂ − sign·e₁ with the sign chosen away from cancellation.
    let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
    v[0] -= sign;
    let un2: f64 = v.iter().map(|x| x * x).sum();
    let mut q = Array2::<f64>::zeros((n, n - 1));
    for j in 1..n {
        for i in 0..n {
            let h = if i == j { 1.0 } else { 0.0 };
            q[(i, j - 1)] = if un2 > 1e-24 {
                h - 2.0 * v[i] * v[j] / un2
            } else {
                h
            };
        }
    }
    q
}

/// Dense solve of A·X + X·Aᵀ + Q = 0 by vectorization (the matrices here
/// are at most 6×6).
fn lyapunov_dense(a: &Array2<f64>, q: &Array2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    let mut big = Array2::<f64>::zeros((n * n, n * n));
    for i in 0..n {
        for j in 0..n {
            let row = i * n + j;
            for k in 0..n {
                big[(row, k * n + j)] += a[(i, k)];
                big[(row, i * n + k)] += a[(j, k)];
            }
        }
    }
    let rhs = Array1::from_iter(q.iter().map(|x| -x));
    let x = big.solve(&rhs)?;
    let mut out = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = x[i * n + j];
        }
    }
    // Symmetrize against rounding; the exact solution is symmetric.
    let out_t = out.t().to_owned();
    Ok((&out + &out_t) * 0.5)
}

fn max_re_eig(a: &Array2<f64>) -> Result<f64> {
    let (vals, _) = a.eig()?;
    Ok(vals.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max))
}

/// Stationary covariance of the quadrature fluctuations from
/// A·Σ + Σ·Aᵀ + (D + 2Γ) = 0. On a symmetry-broken branch the equation is
/// solved on the orthogonal complement of the Goldstone direction (whose
/// variance grows without bound — phase diffusion) and Σ is reported with
/// zero variance along it. Errors when the (reduced) drift is not Hurwitz.
pub fn covariance_lyapunov(dd: &DriftDiffusion) -> Result<Array2<f64>> {
    let d_tot = dd.total_diffusion();
    match &dd.goldstone {
        None => {
            let max_re = max_re_eig(&dd.drift)?;
            if max_re > tol::STABILITY_MARGIN {
                return Err(Error::NotHurwitz { max_re });
            }
            let sigma = lyapunov_dense(&dd.drift, &d_tot)?;
            let residual = (&dd.drift.dot(&sigma) + &sigma.dot(&dd.drift.t()) + &d_tot)
                .iter()
                .map(|x| x * x)
                .sum::<f64>()
                .sqrt();
            if residual > tol::LYAPUNOV_RESIDUAL * (1.0 + d_tot.iter().map(|x| x.abs()).fold(0.0, f64::max)) {
                return Err(Error::SteadyState(format!(
                    "Lyapunov residual {residual:.3e} exceeds tolerance"
                )));
            }
            Ok(sigma)
        }
        Some(t) => {
            let q = orthonormal_complement(t);
            let a_r = q.t().dot(&dd.drift).dot(&q);
            let max_re = max_re_eig(&a_r)?;
            if max_re > tol::STABILITY_MARGIN {
                return Err(Error::NotHurwitz { max_re });
            }
            let d_r = q.t().dot(&d_tot).dot(&q);
            let x = lyapunov_dense(&a_r, &d_r)?;
            let residual = (&a_r.dot(&x) + &x.dot(&a_r.t()) + &d_r)
                .iter()
                .map(|v| v * v)
                .sum::<f64>()
                .sqrt();
            if residual > tol::LYAPUNOV_RESIDUAL * (1.0 + d_r.iter().map(|v| v.abs()).fold(0.0, f64::max)) {
                return Err(Error::SteadyState(format!(
                    "projected Lyapunov residual {residual:.3e} exceeds tolerance"
                )));
            }
            Ok(q.dot(&x).dot(&q.t()))
        }
    }
}

/// Per-mode coefficients of a polarization mode in the system's basis: the
/// Jones components for a linear basis, the circular components for a
/// circular basis, zero on the OPO pump mode.
fn mode_coefficients(sys: &System, jones: &JonesVector) -> Vec<C64> {
    let (cp, cm) = jones.to_circular();
    sys.basis
        .modes()
        .iter()
        .map(|m| match m {
            Mode::SigX => jones.cx,
            Mode::SigY => jones.cy,
            Mode::SigPlus => cp,
            Mode::SigMinus => cm,
            Mode::Pump => ZERO,
        })
        .collect()
}

/// Quadrature direction n̂ (interleaved, unit norm for a unit mode) of the
/// φ-quadrature of the mode with coefficients c: with w_m = c_m*·e^{−iφ},
/// X_φ = Σ_m Re(w_m)·x_m − Im(w_m)·y_m.
fn quadrature_direction(coeffs: &[C64], phi: f64) -> Vec<f64> {
    let rot = C64::from_polar(1.0, -phi);
    let mut nhat = Vec::with_capacity(2 * coeffs.len());
    for c in coeffs {
        let w = c.conj() * rot;
        nhat.push(w.re);
        nhat.push(-w.im);
    }
    nhat
}

/// V(ω) = ‖Tᵀ(ω)·n̂‖² for one frequency. `b` is √(2Γ)·n̂.
///
/// At ω = 0 on a symmetry-broken branch (Goldstone tangent t̂ present) the
/// resolvent limit exists only for quadratures decoupled from the
/// Goldstone, t̂ᵀb = 0; every other quadrature is reported as +∞. The limit
/// is computed from the bordered real system
///
/// ```text
/// (−Aᵀ)u + μ·t̂ = b,   t̂ᵀu = 0,
/// ```
///
/// which drops the Goldstone dyad of the resolvent without an
/// eigendecomposition: t̂ spans both the defect of range(−Aᵀ) (so μ absorbs
/// any residual coupling) and, through the gauge row, the limit's missing
/// null-direction coefficient.
fn spectrum_value(
    a: &Array2<f64>,
    gammas: &[f64],
    goldstone: Option<&[f64]>,
    nhat: &[f64],
    b: &[f64],
    omega: f64,
) -> Result<f64> {
    let n2 = a.nrows();
    if omega == 0.0 {
        if let Some(t) = goldstone {
            let kappa: f64 = t.iter().zip(b).map(|(ti, bi)| ti * bi).sum();
            let bnorm = b.iter().map(|x| x * x).sum::<f64>().sqrt();
            if kappa.abs() > tol::GOLDSTONE_COUPLING * (1.0 + bnorm) {
                return Ok(f64::INFINITY);
            }
            let mut m = Array2::<f64>::zeros((n2 + 1, n2 + 1));
            for i in 0..n2 {
                for j in 0..n2 {
                    m[(i, j)] = -a[(j, i)];
                }
                m[(i, n2)] = t[i];
                m[(n2, i)] = t[i];
            }
            let mut rhs = Array1::<f64>::zeros(n2 + 1);
            for i in 0..n2 {
                rhs[i] = b[i];
            }
            let u = m.solve(&rhs)?;
            let mut v = 0.0;
            for i in 0..n2 {
                let w = (2.0 * gammas[i / 2]).sqrt() * u[i] - nhat[i];
                v += w * w;
            }
            return Ok(v);
        }
    }
    let mut m = Array2::<C64>::zeros((n2, n2));
    for i in 0..n2 {
        for j in 0..n2 {
            m[(i, j)] = C64::new(-a[(j, i)], 0.0);
        }
        m[(i, i)] -= C64::new(0.0, omega);
    }
    let bc = Array1::from_iter(b.iter().map(|&x| C64::new(x, 0.0)));
    let u = m.solve(&bc)?;
    let mut v = 0.0;
    for i in 0..n2 {
        let w = u[i] * (2.0 * gammas[i / 2]).sqrt() - nhat[i];
        v += w.norm_sqr();
    }
    Ok(v)
}

/// Shot-noise-normalized output spectrum of the φ-quadrature of the given
/// polarization mode (normalized internally), over the frequency grid.
pub fn output_spectrum(
    sys: &System,
    dd: &DriftDiffusion,
    mode: &JonesVector,
    phi: f64,
    omegas: &[f64],
) -> Result<NoiseSpectrum> {
    if omegas.is_empty() {
        return Err(Error::EmptyInput("frequency grid"));
    }
    let unit = mode.normalized()?;
    let coeffs = mode_coefficients(sys, &unit);
    if 2 * coeffs.len() != dd.drift.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "drift is {}×{} but the system has {} modes",
            dd.drift.nrows(),
            dd.drift.ncols(),
            coeffs.len()
        )));
    }
    let nhat = quadrature_direction(&coeffs, phi);
    let b: Vec<f64> = nhat
        .iter()
        .enumerate()
        .map(|(i, &x)| (2.0 * dd.gammas[i / 2]).sqrt() * x)
        .collect();
    let goldstone = dd.goldstone.as_deref();
    let mut samples = Vec::with_capacity(omegas.len());
    for &omega in omegas {
        let v = spectrum_value(&dd.drift, &dd.gammas, goldstone, &nhat, &b, omega)?;
        samples.push((omega, v));
    }
    Ok(NoiseSpectrum {
        phi,
        mode: unit,
        samples,
    })
}

/// Default analysis-frequency grid: 401 log-spaced magnitudes over
/// |ω| ∈ [10⁻³, 10³]·γs, both signs, plus ω = 0; ascending.
pub fn default_omega_grid(gamma_s: f64) -> Vec<f64> {
    let n = 401;
    let mut pos = Vec::with_capacity(n);
    for k in 0..n {
        let exp = -3.0 + 6.0 * k as f64 / (n - 1) as f64;
        pos.push(gamma_s * 10f64.powf(exp));
    }
    let mut grid = Vec::with_capacity(2 * n + 1);
    grid.extend(pos.iter().rev().map(|w| -w));
    grid.push(0.0);
    grid.extend(pos.iter().copied());
    grid
}

/// The quadrature phase that decouples the mode from the Goldstone
/// direction, and the output spectrum value at ω = 0 in that quadrature —
/// the minimum of V(0) over φ, every other quadrature being divergent.
/// The orbit-tangent coupling κ(φ) = t̂ᵀ√(2Γ)n̂(φ) is linear in
/// (cos φ, sin φ), so its zero is found analytically.
pub fn dark_quadrature_optimum(
    sys: &System,
    dd: &DriftDiffusion,
    mode: &JonesVector,
) -> Result<(f64, f64)> {
    let t = dd.goldstone.as_ref().ok_or_else(|| {
        Error::SteadyState("no Goldstone direction at this state".into())
    })?;
    let unit = mode.normalized()?;
    let coeffs = mode_coefficients(sys, &unit);
    let coupling = |phi: f64| -> f64 {
        quadrature_direction(&coeffs, phi)
            .iter()
            .enumerate()
            .zip(t)
            .map(|((i, &n), &ti)| ti * (2.0 * dd.gammas[i / 2]).sqrt() * n)
            .sum()
    };
    let k_c = coupling(0.0);
    let k_s = coupling(std::f64::consts::FRAC_PI_2);
    let phi = if k_c.abs() < 1e-14 && k_s.abs() < 1e-14 {
        0.0
    } else {
        f64::atan2(-k_c, k_s).rem_euclid(std::f64::consts::PI)
    };
    let spectrum = output_spectrum(sys, dd, &unit, phi, &[0.0])?;
    Ok((phi, spectrum.samples[0].1))
}

/// Dark-mode squeezing sweep of the Kerr model: for each parameter point on
/// the symmetry-broken branch, the minimal dark-mode V(0) and its
/// quadrature phase. Points without a bright branch are flagged, not fatal.
pub fn dark_mode_squeezing(points: &[Chi3Params]) -> Result<Vec<SqueezingRow>> {
    if points.is_empty() {
        return Err(Error::EmptyInput("parameter points"));
    }
    let mut rows = Vec::with_capacity(points.len());
    for p in points {
        p.validate()?;
        let row_base = SqueezingRow {
            delta: p.delta,
            rho_sq: p.rho_sq,
            g: p.g,
            gamma_s: p.gamma_s,
            v_min_at_0: f64::NAN,
            phi_opt: f64::NAN,
            on_branch: false,
        };
        let bright = match crate::meanfield::chi3_bright_state(p) {
            Ok(s) => s,
            Err(Error::BelowThreshold(_)) => {
                rows.push(row_base);
                continue;
            }
            Err(e) => return Err(e),
        };
        let sys = chi3_system(p)?;
        let dd = linearize(&sys, &bright)?;
        let dark = crate::polarization::dark_mode(crate::ModelKind::Chi3, 0.0);
        let (phi_opt, v0) = dark_quadrature_optimum(&sys, &dd, &dark)?;
        rows.push(SqueezingRow {
            v_min_at_0: v0,
            phi_opt,
            on_branch: true,
            ..row_base
        });
    }
    Ok(rows)
}

/// Shot-noise-normalized spectrum of the intensity-difference fluctuation
/// of the two OPO signal beams above threshold. With equal real mean
/// amplitudes this is the amplitude (φ = 0) quadrature of the antisymmetric
/// combination (ex − ey)/√2. Errors below threshold.
pub fn twin_beam_intensity_spectrum(p: &OpoParams, omegas: &[f64]) -> Result<NoiseSpectrum> {
    let state = crate::meanfield::opo_bright_state(p)?;
    let sys = opo_system(p)?;
    let dd = linearize(&sys, &state)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mode = JonesVector::new(C64::new(s, 0.0), C64::new(-s, 0.0));
    output_spectrum(&sys, &dd, &mode, 0.0, omegas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meanfield::{chi3_bright_state, opo_steady_states, rotate_state};
    use crate::models::opo_signal_system;
    use crate::polarization::dark_mode;
    use crate::rng::SplitMix64;
    use crate::ModelKind;

    fn kerr(rho_sq: f64) -> Chi3Params {
        Chi3Params::kleinman(2.5, -1.0, rho_sq, 1.0)
    }

    #[test]
    fn empty_cavity_is_vacuum_fixed_point() {
        let p = Chi3Params::kleinman(1.2, 0.0, 0.0, 1.0);
        let sys = chi3_system(&p).unwrap();
        let dd = linearize(&sys, &ClassicalState::new(vec![ZERO, ZERO])).unwrap();
        assert!(dd.goldstone.is_none());
        assert!(dd.diffusion.iter().all(|&x| x == 0.0));
        let sigma = covariance_lyapunov(&dd).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((sigma[(i, j)] - expect).abs() < 1e-12);
            }
        }
        let spec = output_spectrum(
            &sys,
            &dd,
            &JonesVector::new(C64::new(1.0, 0.0), ZERO),
            0.3,
            &[0.0, 0.4, 2.0, -2.0, 150.0],
        )
        .unwrap();
        for &(_, v) in &spec.samples {
            assert!((v - 1.0).abs() < 1e-12, "vacuum in, vacuum out: {v}");
        }
    }

    #[test]
    fn lyapunov_solver_on_random_stable_systems() {
        let mut rng = SplitMix64::new(0x6c796170);
        for _ in 0..20 {
            let n = 6;
            let mut a = Array2::<f64>::zeros((n, n));
            for i in 0..n {
                for j in 0..n {
                    a[(i, j)] = rng.range(-1.0, 1.0);
                }
            }
            let shift = max_re_eig(&a).unwrap() + 0.5;
            for i in 0..n {
                a[(i, i)] -= shift;
            }
            let mut b = Array2::<f64>::zeros((n, n));
            for i in 0..n {
                for j in 0..n {
                    b[(i, j)] = rng.range(-1.0, 1.0);
                }
            }
            let d = b.dot(&b.t());
            let dd = DriftDiffusion {
                drift: a.clone(),
                diffusion: d.clone(),
                gammas: vec![0.0; n / 2],
                goldstone: None,
            };
            let sigma = covariance_lyapunov(&dd).unwrap();
            let res = (&a.dot(&sigma) + &sigma.dot(&a.t()) + &d)
                .iter()
                .map(|x| x * x)
                .sum::<f64>()
                .sqrt();
            assert!(res < 1e-10, "residual {res}");
            // Symmetry and positive semidefiniteness of the solution.
            for i in 0..n {
                for j in 0..n {
                    assert!((sigma[(i, j)] - sigma[(j, i)]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn below_threshold_opo_covariance_closed_form() {
        // Signal-pair gain λ = χℰp/γp = 0.2γs. The symmetric/antisymmetric
        // quadrature combinations relax at γs ∓ λ, giving
        // ⟨Xx²⟩ = 1/(1−m²), ⟨XxXy⟩ = m/(1−m²), m = λ/γs.
        let p = OpoParams {
            pump: 0.2,
            chi: 1.0,
            gamma_p: 1.0,
            gamma_s: 1.0,
        };
        let sys = opo_signal_system(&p).unwrap();
        let dd = linearize(&sys, &ClassicalState::new(vec![ZERO, ZERO])).unwrap();

        // Down-conversion couples x-quadratures to x-quadratures only.
        assert!((dd.drift[(0, 2)] - 0.2).abs() < 1e-14);
        assert!((dd.drift[(1, 3)] + 0.2).abs() < 1e-14);
        assert_eq!(dd.drift[(0, 3)], 0.0);
        assert_eq!(dd.drift[(1, 2)], 0.0);

        let sigma = covariance_lyapunov(&dd).unwrap();
        let m = 0.2;
        let c = 1.0 / (1.0 - m * m);
        let expect = [
            [c, 0.0, m * c, 0.0],
            [0.0, c, 0.0, -m * c],
            [m * c, 0.0, c, 0.0],
            [0.0, -m * c, 0.0, c],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert!(
                    (sigma[(i, j)] - expect[i][j]).abs() < 1e-10,
                    "sigma[{i}{j}] = {}",
                    sigma[(i, j)]
                );
            }
        }
        // Mean photon number per mode: (⟨X²⟩ + ⟨Y²⟩ − 2)/4.
        let n_mode = (sigma[(0, 0)] + sigma[(1, 1)] - 2.0) / 4.0;
        assert!((n_mode - m * m / (2.0 * (1.0 - m * m))).abs() < 1e-12);

        // Output squeezing of the antisymmetric mode at ω = 0.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let minus = JonesVector::new(C64::new(s, 0.0), C64::new(-s, 0.0));
        let spec = output_spectrum(&sys, &dd, &minus, 0.0, &[0.0]).unwrap();
        let v_expect = ((1.0 - m) / (1.0 + m)).powi(2);
        assert!((spec.samples[0].1 - v_expect).abs() < 1e-12);
        let plus = JonesVector::new(C64::new(s, 0.0), C64::new(s, 0.0));
        let spec = output_spectrum(&sys, &dd, &plus, 0.0, &[0.0]).unwrap();
        let v_anti = ((1.0 + m) / (1.0 - m)).powi(2);
        assert!((spec.samples[0].1 - v_anti).abs() < 1e-12);
    }

    #[test]
    fn dark_mode_squeezes_perfectly_at_zero_frequency() {
        let p = kerr(0.8);
        let bright = chi3_bright_state(&p).unwrap();
        let sys = chi3_system(&p).unwrap();
        let dd = linearize(&sys, &bright).unwrap();
        assert!(dd.goldstone.is_some());

        let dark = dark_mode(ModelKind::Chi3, 0.0);
        let (phi, v0) = dark_quadrature_optimum(&sys, &dd, &dark).unwrap();
        assert!(v0 < 1e-10, "V(0) = {v0:e}");

        // The dark-mode pair decouples and relaxes at 2γs: the squeezed
        // spectrum is the exact Lorentzian ω²/(ω² + 4γs²).
        let grid = [0.0, 0.5, 1.0, -1.0, 3.0, 100.0];
        let spec = output_spectrum(&sys, &dd, &dark, phi, &grid).unwrap();
        for &(w, v) in &spec.samples {
            let expect = w * w / (w * w + 4.0);
            assert!((v - expect).abs() < 1e-10, "V({w}) = {v}, expected {expect}");
        }

        // The conjugate quadrature diverges at ω = 0 (undetermined
        // polarization phase) and saturates the Heisenberg bound elsewhere.
        let anti = output_spectrum(
            &sys,
            &dd,
            &dark,
            phi + std::f64::consts::FRAC_PI_2,
            &grid,
        )
        .unwrap();
        assert!(anti.samples[0].1.is_infinite());
        for (&(w, v), &(_, va)) in spec.samples.iter().zip(&anti.samples) {
            if w != 0.0 {
                // Uncertainty bound; the non-normal drift makes the
                // conjugate quadrature carry excess noise, so the product
                // exceeds 1 away from the asymptotes.
                let product = v * va;
                assert!(product >= 1.0 - 1e-6, "V·V' = {product} at ω = {w}");
            }
        }

        // Evenness.
        let v_plus = spec.samples[2].1;
        let v_minus = spec.samples[3].1;
        assert!((v_plus - v_minus).abs() < 1e-12);

        // The dark-sector decay −2γs is the most damped signal eigenvalue.
        let report = crate::meanfield::stability(&sys, &bright).unwrap();
        let min_re = report
            .eigenvalues
            .iter()
            .map(|l| l.re)
            .fold(f64::INFINITY, f64::min);
        assert!((min_re + 2.0).abs() < 1e-9);
    }

    #[test]
    fn squeezing_is_rotation_equivariant() {
        let p = kerr(0.8);
        let sys = chi3_system(&p).unwrap();
        let bright = chi3_bright_state(&p).unwrap();
        let theta = 0.7;
        let rotated = rotate_state(&bright, &sys.charges, theta).unwrap();
        let dd = linearize(&sys, &rotated).unwrap();
        // The charge rotation α± → e^{±iθ}α± turns the polarization plane
        // by −θ, so the orthogonal dark mode sits at −θ as well.
        let dark = dark_mode(ModelKind::Chi3, -theta);
        let (phi, v0) = dark_quadrature_optimum(&sys, &dd, &dark).unwrap();
        assert!(v0 < 1e-10);
        let spec = output_spectrum(&sys, &dd, &dark, phi, &[1.0]).unwrap();
        assert!((spec.samples[0].1 - 0.2).abs() < 1e-10);
    }

    #[test]
    fn squeezing_sweep_rows_and_flags() {
        let points = [kerr(0.5005), kerr(0.8), kerr(1.12), kerr(0.3)];
        let rows = dark_mode_squeezing(&points).unwrap();
        assert_eq!(rows.len(), 4);
        for row in &rows[..3] {
            assert!(row.on_branch);
            assert!(row.v_min_at_0 < 1e-6, "V(0) = {:e}", row.v_min_at_0);
            assert!((0.0..std::f64::consts::PI).contains(&row.phi_opt));
        }
        assert!(!rows[3].on_branch);
        assert!(rows[3].v_min_at_0.is_nan());
    }

    #[test]
    fn twin_beam_spectrum_matches_lorentzian() {
        let p = OpoParams {
            pump: 1.5,
            chi: 1.0,
            gamma_p: 1.0,
            gamma_s: 1.0,
        };
        let spec =
            twin_beam_intensity_spectrum(&p, &[0.0, 1.0, 100.0]).unwrap();
        let v0 = spec.samples[0].1;
        let v1 = spec.samples[1].1;
        let v100 = spec.samples[2].1;
        assert!(v0 < 1e-10, "V(0) = {v0:e}");
        assert!((v1 - 0.2).abs() < 1e-9);
        assert!(v1 > 0.0 && v1 < 1.0);
        assert!((v100 - 1.0).abs() < 1e-3);

        let below = OpoParams { pump: 0.5, ..p };
        assert!(matches!(
            twin_beam_intensity_spectrum(&below, &[0.0]),
            Err(Error::BelowThreshold(_))
        ));

        // Pump fluctuations feed the symmetric mode, not the twin-beam
        // difference: the full three-mode treatment keeps V(0) at zero.
        let states = opo_steady_states(&p).unwrap();
        assert_eq!(states.len(), 2);
    }

    #[test]
    fn default_grid_shape() {
        let grid = default_omega_grid(2.0);
        assert_eq!(grid.len(), 803);
        assert!(grid.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(grid[401], 0.0);
        assert!((grid[802] - 2000.0).abs() < 1e-9);
        assert!((grid[402] - 2e-3).abs() < 1e-12);
        for k in 0..401 {
            assert_eq!(grid[k], -grid[802 - k]);
        }
    }

    #[test]
    fn spectrum_rejects_empty_grid() {
        let p = kerr(0.8);
        let sys = chi3_system(&p).unwrap();
        let dd = linearize(&sys, &ClassicalState::new(vec![ZERO, ZERO])).unwrap();
        let dark = dark_mode(ModelKind::Chi3, 0.0);
        assert!(matches!(
            output_spectrum(&sys, &dd, &dark, 0.0, &[]),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn linearize_rejects_nonstationary_states() {
        let p = kerr(0.8);
        let sys = chi3_system(&p).unwrap();
        let off = ClassicalState::new(vec![C64::new(0.4, 0.1), ZERO]);
        assert!(matches!(
            linearize(&sys, &off),
            Err(Error::NotStationary { .. })
        ));
    }
}
