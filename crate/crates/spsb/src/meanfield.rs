//! Classical (mean-field) analysis of the cavity models: steady states,
//! linear stability in the quadrature representation, Goldstone-mode
//! detection, existence thresholds of the symmetry-broken branch, and
//! bifurcation sweeps.
//!
//! Equations of motion follow from the Hamiltonian with linear cavity
//! damping,
//!
//! ```text
//! dα_m/dt = −γ_m·α_m − i·∂⟨H⟩/∂α_m*,
//! ```
//!
//! and fluctuations use the interleaved quadrature ordering
//! (x₁, y₁, x₂, y₂, …) with X = a + a†, Y = −i(a − a†).

use ndarray::Array2;
use ndarray_linalg::Eig;

use crate::error::{Error, Result};
use crate::models::{chi3_system, opo_system, Chi3Params, OpoParams, System};
use crate::tol;
use crate::C64;

const I: C64 = C64 { re: 0.0, im: 1.0 };
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// A classical field configuration: one complex amplitude per mode, aligned
/// with the system's mode basis. A symmetry-broken state carries the
/// spontaneously chosen polarization angle implicitly in its phases.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalState {
    /// Mode amplitudes (photon-amplitude units).
    pub amplitudes: Vec<C64>,
}

impl ClassicalState {
    /// Wraps an amplitude vector.
    pub fn new(amplitudes: Vec<C64>) -> Self {
        Self { amplitudes }
    }

    /// True when the first two (signal) amplitudes are both macroscopic and
    /// equal in modulus within 1e−8 — the symmetry-broken branch emits
    /// linearly polarized light, which in the circular basis means
    /// |α₊| = |α₋| (and |αx| = |αy| for the twin-beam OPO branch).
    pub fn is_bright_pair(&self) -> bool {
        if self.amplitudes.len() < 2 {
            return false;
        }
        let a = self.amplitudes[0].norm();
        let b = self.amplitudes[1].norm();
        a * a > tol::BRIGHT_AMPLITUDE_SQ
            && b * b > tol::BRIGHT_AMPLITUDE_SQ
            && (a - b).abs() <= 1e-8 * (1.0 + a.max(b))
    }
}

/// Linear-stability summary of a stationary state.
#[derive(Clone, Debug)]
pub struct StabilityReport {
    /// Drift-matrix eigenvalues (rates), sorted by real part then imaginary
    /// part; 2 per mode (quadrature representation).
    pub eigenvalues: Vec<C64>,
    /// Index into `eigenvalues` of the Goldstone zero mode, when one is
    /// present (|λ| below the null tolerance).
    pub goldstone_index: Option<usize>,
    /// True when every eigenvalue except the Goldstone zero has real part
    /// within the stability margin of zero or below.
    pub stable: bool,
}

impl StabilityReport {
    /// Largest eigenvalue real part with the Goldstone zero excluded — the
    /// decay rate of the slowest genuine fluctuation (negative on a stable
    /// branch).
    pub fn max_re_excluding_goldstone(&self) -> f64 {
        self.eigenvalues
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != self.goldstone_index)
            .map(|(_, l)| l.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Number of eigenvalues with |λ| below the null tolerance.
    pub fn null_count(&self) -> usize {
        self.eigenvalues
            .iter()
            .filter(|l| l.norm() < tol::GOLDSTONE_EIG)
            .count()
    }
}

/// Pump-intensity interval of the symmetry-breaking region at fixed
/// detuning, from the closed-form boundary curves ρ² = γs/(2|g|) and
/// ρ² = (2|δ| + √(δ² − 3γs²))/(6|g|).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdInterval {
    /// Lower boundary ρ²_min.
    pub lower: f64,
    /// Upper boundary ρ²_max (NaN when |δ| < √3·γs leaves the radical
    /// imaginary).
    pub upper: f64,
    /// True when the closed-form region is nonempty: |δ| > √3·γs and
    /// lower < upper. Symmetry breaking additionally requires δ·g < 0 (the
    /// detuning must oppose the sign of the Kerr shift).
    pub exists: bool,
}

/// The mean-field vector field F(α) with F_m = −γ_m·α_m − i·∂⟨H⟩/∂α_m*.
/// F(α) = 0 characterizes stationary states.
pub fn vector_field(sys: &System, amps: &[C64]) -> Result<Vec<C64>> {
    let n = sys.n_modes();
    if amps.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} amplitudes for a {n}-mode system",
            amps.len()
        )));
    }
    let zeros = vec![0u8; n];
    let mut d_cre = vec![0u8; n];
    let mut out = Vec::with_capacity(n);
    for m in 0..n {
        d_cre[m] = 1;
        let grad = sys.hamiltonian.eval_derivative(amps, &zeros, &d_cre)?;
        d_cre[m] = 0;
        out.push(-(amps[m] * sys.gammas[m]) - I * grad);
    }
    Ok(out)
}

/// Wirtinger blocks of the Jacobian of the vector field: δα̇ = M·δα + N·δα*
/// with M_mk = ∂F_m/∂α_k and N_mk = ∂F_m/∂α_k*.
pub fn complex_jacobian(sys: &System, amps: &[C64]) -> Result<(Array2<C64>, Array2<C64>)> {
    let n = sys.n_modes();
    if amps.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} amplitudes for a {n}-mode system",
            amps.len()
        )));
    }
    let mut m_block = Array2::<C64>::zeros((n, n));
    let mut n_block = Array2::<C64>::zeros((n, n));
    let mut d_ann = vec![0u8; n];
    let mut d_cre = vec![0u8; n];
    for m in 0..n {
        for k in 0..n {
            d_cre[m] += 1;
            d_ann[k] += 1;
            let h_mk = sys.hamiltonian.eval_derivative(amps, &d_ann, &d_cre)?;
            d_ann[k] -= 1;
            d_cre[k] += 1;
            let h_mk_conj = sys.hamiltonian.eval_derivative(amps, &d_ann, &d_cre)?;
            d_cre[k] -= 1;
            d_cre[m] -= 1;
            m_block[(m, k)] = -I * h_mk;
            if m == k {
                m_block[(m, k)] -= C64::new(sys.gammas[m], 0.0);
            }
            n_block[(m, k)] = -I * h_mk_conj;
        }
    }
    Ok((m_block, n_block))
}

/// Real drift matrix A of the interleaved quadrature fluctuations
/// (δx₁, δy₁, δx₂, …), assembled from the Wirtinger blocks:
/// d(δx_m)/dt = Σ_k Re(M+N)_mk·δx_k − Im(M−N)_mk·δy_k and
/// d(δy_m)/dt = Σ_k Im(M+N)_mk·δx_k + Re(M−N)_mk·δy_k.
pub fn quadrature_drift(sys: &System, amps: &[C64]) -> Result<Array2<f64>> {
    let n = sys.n_modes();
    let (m_block, n_block) = complex_jacobian(sys, amps)?;
    let mut a = Array2::<f64>::zeros((2 * n, 2 * n));
    for m in 0..n {
        for k in 0..n {
            let s = m_block[(m, k)] + n_block[(m, k)];
            let d = m_block[(m, k)] - n_block[(m, k)];
            a[(2 * m, 2 * k)] = s.re;
            a[(2 * m, 2 * k + 1)] = -d.im;
            a[(2 * m + 1, 2 * k)] = s.im;
            a[(2 * m + 1, 2 * k + 1)] = d.re;
        }
    }
    Ok(a)
}

/// The state rotated along the symmetry orbit: α_m → α_m·exp(i·q_m·θ).
pub fn rotate_state(state: &ClassicalState, charges: &[i32], theta: f64) -> Result<ClassicalState> {
    if charges.len() != state.amplitudes.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} charges for {} amplitudes",
            charges.len(),
            state.amplitudes.len()
        )));
    }
    let amplitudes = state
        .amplitudes
        .iter()
        .zip(charges)
        .map(|(&a, &q)| a * C64::from_polar(1.0, theta * q as f64))
        .collect();
    Ok(ClassicalState::new(amplitudes))
}

/// Tangent of the symmetry orbit at the state, d/dθ of [`rotate_state`] at
/// θ = 0, in interleaved quadrature coordinates: (−2q_m·Im α_m, 2q_m·Re α_m)
/// per mode. Zero for the trivial state.
pub fn orbit_tangent(state: &ClassicalState, charges: &[i32]) -> Result<Vec<f64>> {
    if charges.len() != state.amplitudes.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} charges for {} amplitudes",
            charges.len(),
            state.amplitudes.len()
        )));
    }
    let mut t = Vec::with_capacity(2 * state.amplitudes.len());
    for (&a, &q) in state.amplitudes.iter().zip(charges) {
        t.push(-2.0 * q as f64 * a.im);
        t.push(2.0 * q as f64 * a.re);
    }
    Ok(t)
}

fn l2c(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn l2r(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Linear stability of a stationary state: eigenvalues of the quadrature
/// drift matrix, Goldstone detection, and an overall stability verdict.
/// Errors when the state is not stationary to within the stationarity
/// tolerance.
pub fn stability(sys: &System, state: &ClassicalState) -> Result<StabilityReport> {
    let f = vector_field(sys, &state.amplitudes)?;
    let residual = l2c(&f);
    if !(residual <= tol::STATIONARY) {
        return Err(Error::NotStationary { residual });
    }
    let a = quadrature_drift(sys, &state.amplitudes)?;
    let (vals, _) = a.eig()?;
    let mut eigenvalues: Vec<C64> = vals.to_vec();
    eigenvalues.sort_by(|p, q| {
        p.re.partial_cmp(&q.re)
            .unwrap()
            .then(p.im.partial_cmp(&q.im).unwrap())
    });
    let goldstone_index = eigenvalues
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.norm().partial_cmp(&b.norm()).unwrap())
        .filter(|(_, l)| l.norm() < tol::GOLDSTONE_EIG)
        .map(|(i, _)| i);
    let stable = eigenvalues
        .iter()
        .enumerate()
        .all(|(i, l)| Some(i) == goldstone_index || l.re <= tol::STABILITY_MARGIN);
    Ok(StabilityReport {
        eigenvalues,
        goldstone_index,
        stable,
    })
}

/// Overlap between the null eigenvector of the drift matrix and the
/// symmetry-orbit tangent, |⟨v, t⟩|/(‖v‖‖t‖). Close to 1 identifies the
/// null mode as the Goldstone mode of the broken polarization symmetry.
/// Errors when no null eigenvalue is present or the orbit is degenerate
/// (trivial state).
pub fn goldstone_alignment(sys: &System, state: &ClassicalState) -> Result<f64> {
    let a = quadrature_drift(sys, &state.amplitudes)?;
    let (vals, vecs) = a.eig()?;
    let (idx, lmin) = vals
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.norm().partial_cmp(&b.norm()).unwrap())
        .ok_or(Error::EmptyInput("eigenvalue list"))?;
    if lmin.norm() >= tol::GOLDSTONE_EIG {
        return Err(Error::SteadyState(format!(
            "no null eigenvalue: smallest |λ| = {:.3e}",
            lmin.norm()
        )));
    }
    let t = orbit_tangent(state, &sys.charges)?;
    let tn = l2r(&t);
    if tn < 1e-12 {
        return Err(Error::SteadyState(
            "symmetry orbit is degenerate at this state".into(),
        ));
    }
    let v = vecs.column(idx);
    let vn = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let dot: C64 = v.iter().zip(&t).map(|(c, &x)| c.conj() * x).sum();
    Ok(dot.norm() / (vn * tn))
}

/// The closed-form symmetry-breaking interval in ρ² at the given detuning,
/// evaluated literally with |δ| and |g|. The lower curve is the boundary of
/// the region only for |δ| ≥ 2γs (where the branch terminates in a fold
/// with finite amplitude); see [`existence_interval`] for the exact region.
pub fn threshold_interval(p: &Chi3Params) -> Result<ThresholdInterval> {
    p.validate()?;
    let gm = p.g.abs();
    let gs = p.gamma_s;
    let dm = p.delta.abs();
    if gm == 0.0 {
        return Ok(ThresholdInterval {
            lower: f64::INFINITY,
            upper: f64::INFINITY,
            exists: false,
        });
    }
    let lower = gs / (2.0 * gm);
    let disc = dm * dm - 3.0 * gs * gs;
    let upper = if disc >= 0.0 {
        (2.0 * dm + disc.sqrt()) / (6.0 * gm)
    } else {
        f64::NAN
    };
    let exists = dm > 3f64.sqrt() * gs && lower < upper;
    Ok(ThresholdInterval {
        lower,
        upper,
        exists,
    })
}

/// The exact existence region of the symmetry-broken branch in ρ². It
/// coincides with [`threshold_interval`] for |δ| ≥ 2γs; for
/// √3·γs < |δ| < 2γs the branch instead appears and disappears with zero
/// amplitude on the curve pair ρ² = (2|δ| ∓ √(δ² − 3γs²))/(6|g|), so the
/// lower boundary is the larger value (2|δ| − √(δ² − 3γs²))/(6|g|).
pub fn existence_interval(p: &Chi3Params) -> Result<ThresholdInterval> {
    let literal = threshold_interval(p)?;
    if !literal.exists {
        return Ok(literal);
    }
    let gm = p.g.abs();
    let gs = p.gamma_s;
    let dm = p.delta.abs();
    if dm >= 2.0 * gs {
        return Ok(literal);
    }
    let disc = (dm * dm - 3.0 * gs * gs).sqrt();
    let lower = (2.0 * dm - disc) / (6.0 * gm);
    Ok(ThresholdInterval {
        lower,
        upper: literal.upper,
        exists: lower < literal.upper,
    })
}

/// OPO signal threshold ℰp,th = γp·γs/χ.
pub fn opo_threshold(p: &OpoParams) -> Result<f64> {
    p.validate()?;
    Ok(p.threshold_pump())
}

/// All steady states of the Kerr model at these parameters: the trivial
/// (dark) state first, then every distinct symmetry-broken orbit
/// representative found by multi-seed Newton in the θ = 0 gauge
/// (α₊ = α₋ = z), sorted by descending amplitude. In the bistable regime
/// (|δ| > 2γs near the fold) both the stable high-amplitude branch and the
/// unstable low-amplitude branch appear. Each representative has
/// ‖F‖ < 1e−10; the full solution family is its θ-orbit. The common phase
/// of z is fixed by the dynamics (not free); the representative is chosen
/// with Re z > 0.
pub fn chi3_steady_states(p: &Chi3Params) -> Result<Vec<ClassicalState>> {
    p.validate()?;
    let sys = chi3_system(p)?;
    let mut states = vec![ClassicalState::new(vec![ZERO; 2])];
    if p.g == 0.0 || p.rho_sq == 0.0 {
        return Ok(states);
    }
    let mut brights: Vec<C64> = Vec::new();
    for seed in symmetric_seeds(p) {
        let Some(z) = newton_symmetric(&sys, seed) else {
            continue;
        };
        if z.norm_sqr() <= tol::BRIGHT_AMPLITUDE_SQ {
            continue;
        }
        // The orbit meets the symmetric gauge at ±z; keep Re z > 0.
        let zc = if z.re < 0.0 || (z.re == 0.0 && z.im < 0.0) {
            -z
        } else {
            z
        };
        if !brights
            .iter()
            .any(|w| (w - zc).norm() < 1e-6 * (1.0 + zc.norm()))
        {
            brights.push(zc);
        }
    }
    brights.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).unwrap());
    states.extend(
        brights
            .into_iter()
            .map(|z| ClassicalState::new(vec![z, z])),
    );
    Ok(states)
}

/// The stable symmetry-broken state (largest-amplitude branch) of the Kerr
/// model, or an error when the parameters lie outside the existence region.
pub fn chi3_bright_state(p: &Chi3Params) -> Result<ClassicalState> {
    chi3_steady_states(p)?
        .into_iter()
        .find(|s| s.is_bright_pair())
        .ok_or_else(|| {
            Error::BelowThreshold(format!(
                "no symmetry-broken branch at delta={}, g={}, rho_sq={} (requires |δ|>√3γs, δ·g<0, ρ² in the existence region)",
                p.delta, p.g, p.rho_sq
            ))
        })
}

/// Newton seeds for the symmetric-gauge bright branch: closed-form
/// amplitude/phase candidates from the stationarity condition
/// (γs + iΔ)z = −i·c·z* with Δ = δ + 3g|z|² + (3g/2)(3−ℬ)ρ² and
/// c = (3g/2)(1+ℬ)ρ², plus a coarse amplitude × phase grid.
fn symmetric_seeds(p: &Chi3Params) -> Vec<C64> {
    let mut seeds = Vec::new();
    let g = p.g;
    let gs = p.gamma_s;
    let c = 1.5 * g * (1.0 + p.ratio_b) * p.rho_sq;
    let disc = c * c - gs * gs;
    if disc > 0.0 {
        for sign in [1.0, -1.0] {
            let delta_eff = sign * disc.sqrt();
            let n = (delta_eff - p.delta - 1.5 * g * (3.0 - p.ratio_b) * p.rho_sq) / (3.0 * g);
            if n > 0.0 && n.is_finite() {
                let ratio = (-I * c) / C64::new(gs, delta_eff);
                let phi = 0.5 * ratio.arg();
                seeds.push(C64::from_polar(n.sqrt(), phi));
            }
        }
    }
    let scale = ((gs + p.delta.abs()) / g.abs()).sqrt();
    for &amp in &[0.25, 0.5, 1.0] {
        for k in 0..8 {
            seeds.push(C64::from_polar(
                amp * scale,
                k as f64 * std::f64::consts::FRAC_PI_4,
            ));
        }
    }
    seeds
}

/// Damped-free Newton iteration on the symmetric subspace α₊ = α₋ = z
/// (2 real unknowns); returns z when the stationarity residual converges
/// below the Newton tolerance.
fn newton_symmetric(sys: &System, seed: C64) -> Option<C64> {
    let mut z = seed;
    for _ in 0..60 {
        if !z.re.is_finite() || !z.im.is_finite() {
            return None;
        }
        let amps = [z, z];
        let f = {
            let grad = sys.hamiltonian.eval_derivative(&amps, &[0, 0], &[1, 0]).ok()?;
            -(z * sys.gammas[0]) - I * grad
        };
        let (mj, nj) = complex_jacobian(sys, &amps).ok()?;
        let fz = mj[(0, 0)] + mj[(0, 1)];
        let fzb = nj[(0, 0)] + nj[(0, 1)];
        let j11 = (fz + fzb).re;
        let j12 = -(fz - fzb).im;
        let j21 = (fz + fzb).im;
        let j22 = (fz - fzb).re;
        let det = j11 * j22 - j12 * j21;
        if det.abs() < 1e-300 {
            return None;
        }
        let du = (-j22 * f.re + j12 * f.im) / det;
        let dv = (j21 * f.re - j11 * f.im) / det;
        z += C64::new(du, dv);
        if (du * du + dv * dv).sqrt() < 1e-14 * (1.0 + z.norm()) {
            break;
        }
    }
    let amps = [z, z];
    let grad = sys.hamiltonian.eval_derivative(&amps, &[0, 0], &[1, 0]).ok()?;
    let f = -(z * sys.gammas[0]) - I * grad;
    // ‖F‖ over both (identical) components.
    if 2f64.sqrt() * f.norm() < tol::NEWTON_RESIDUAL {
        Some(z)
    } else {
        None
    }
}

/// All steady states of the OPO: the trivial state (empty signal, pump at
/// β = ℰp/γp) and, above threshold, the twin-beam state with
/// αx = αy = √((ℰp − ℰp,th)/χ) real positive and the pump clamped at γs/χ.
pub fn opo_steady_states(p: &OpoParams) -> Result<Vec<ClassicalState>> {
    p.validate()?;
    let beta0 = p.pump / p.gamma_p;
    let mut states = vec![ClassicalState::new(vec![
        ZERO,
        ZERO,
        C64::new(beta0, 0.0),
    ])];
    let th = p.threshold_pump();
    if p.pump > th {
        let r = ((p.pump - th) / p.chi).sqrt();
        states.push(ClassicalState::new(vec![
            C64::new(r, 0.0),
            C64::new(r, 0.0),
            C64::new(p.gamma_s / p.chi, 0.0),
        ]));
    }
    Ok(states)
}

/// The above-threshold OPO twin-beam state, or an error below threshold.
pub fn opo_bright_state(p: &OpoParams) -> Result<ClassicalState> {
    opo_steady_states(p)?
        .into_iter()
        .find(|s| s.is_bright_pair())
        .ok_or_else(|| {
            Error::BelowThreshold(format!(
                "pump amplitude {} is at or below the threshold {}",
                p.pump,
                p.threshold_pump()
            ))
        })
}

/// Bisection between a point inside the region (predicate true) and a point
/// outside it, to absolute tolerance `atol` on the control parameter.
fn bisect_boundary<F>(mut inside: f64, mut outside: f64, mut pred: F, atol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<bool>,
{
    if !pred(inside)? {
        return Err(Error::SteadyState(format!(
            "bisection bracket: {inside} is not inside the region"
        )));
    }
    if pred(outside)? {
        return Err(Error::SteadyState(format!(
            "bisection bracket: {outside} is not outside the region"
        )));
    }
    while (outside - inside).abs() > atol {
        let mid = 0.5 * (inside + outside);
        if pred(mid)? {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    Ok(0.5 * (inside + outside))
}

fn with_rho_sq(p: &Chi3Params, rho_sq: f64) -> Chi3Params {
    Chi3Params { rho_sq, ..*p }
}

fn chi3_trivial_unstable(p: &Chi3Params) -> Result<bool> {
    let sys = chi3_system(p)?;
    let a = quadrature_drift(&sys, &[ZERO, ZERO])?;
    let (vals, _) = a.eig()?;
    Ok(vals.iter().any(|l| l.re > 0.0))
}

fn chi3_bright_found(p: &Chi3Params) -> Result<bool> {
    Ok(chi3_steady_states(p)?.iter().any(|s| s.is_bright_pair()))
}

/// Numerically detects the (lower, upper) ρ² boundaries of the
/// symmetry-breaking region at fixed detuning, by bisection to an absolute
/// tolerance well below 1e−6. The upper boundary (and the lower one for
/// |δ| < 2γs) is located as the sign change of the trivial state's leading
/// stability eigenvalue; the fold boundary at |δ| ≥ 2γs is located by
/// whether multi-seed Newton finds a symmetry-broken solution. Requires
/// δ·g < 0 so the branch is dynamically reachable.
pub fn detect_chi3_boundaries(p: &Chi3Params) -> Result<(f64, f64)> {
    if p.delta * p.g >= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "boundary detection requires δ·g < 0, got delta={}, g={}",
            p.delta, p.g
        )));
    }
    let region = existence_interval(p)?;
    if !region.exists {
        return Err(Error::BelowThreshold(format!(
            "no symmetry-breaking region at delta={} (requires |δ| > √3·γs)",
            p.delta
        )));
    }
    let (xl, xu) = (region.lower, region.upper);
    let mid = 0.5 * (xl + xu);
    let atol = 1e-9 * (1.0 + xu.abs());
    let upper = bisect_boundary(
        mid,
        1.25 * xu + 0.1 * (xu - xl),
        |x| chi3_trivial_unstable(&with_rho_sq(p, x)),
        atol,
    )?;
    let lower = if p.delta.abs() < 2.0 * p.gamma_s {
        bisect_boundary(
            mid,
            0.75 * xl,
            |x| chi3_trivial_unstable(&with_rho_sq(p, x)),
            atol,
        )?
    } else {
        bisect_boundary(
            mid,
            0.75 * xl,
            |x| chi3_bright_found(&with_rho_sq(p, x)),
            atol,
        )?
    };
    Ok((lower, upper))
}

/// Numerically detects the OPO signal threshold as the pump amplitude where
/// the trivial state loses stability, by bisection.
pub fn detect_opo_threshold(p: &OpoParams) -> Result<f64> {
    p.validate()?;
    let th = p.threshold_pump();
    let unstable = |pump: f64| -> Result<bool> {
        let q = OpoParams { pump, ..*p };
        let sys = opo_system(&q)?;
        let state = [ZERO, ZERO, C64::new(q.pump / q.gamma_p, 0.0)];
        let a = quadrature_drift(&sys, &state)?;
        let (vals, _) = a.eig()?;
        Ok(vals.iter().any(|l| l.re > 0.0))
    };
    bisect_boundary(1.5 * th, 0.5 * th, unstable, 1e-9 * (1.0 + th))
}

/// One row of a bifurcation sweep.
#[derive(Clone, Copy, Debug)]
pub struct SweepRow {
    /// Control parameter (ρ² for the Kerr model, ℰp for the OPO).
    pub control: f64,
    /// Modulus of the first signal amplitude on the reported branch
    /// (|α₊|, or |αx| for the OPO); 0 on the trivial branch.
    pub amp_sig1: f64,
    /// Modulus of the second signal amplitude (|α₋| or |αy|).
    pub amp_sig2: f64,
    /// Largest drift eigenvalue real part of the reported branch, Goldstone
    /// zero excluded.
    pub max_re_lambda: f64,
    /// True when a symmetry-broken branch exists at this control value.
    pub bright_exists: bool,
    /// True when the trivial state is stable here (coexistence with
    /// `bright_exists` marks the hysteresis window of the subcritical
    /// bifurcation).
    pub trivial_stable: bool,
}

fn check_grid(grid: &[f64], name: &'static str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::EmptyInput(name));
    }
    let increasing = grid.windows(2).all(|w| w[1] > w[0]);
    let decreasing = grid.windows(2).all(|w| w[1] < w[0]);
    if grid.len() > 1 && !increasing && !decreasing {
        return Err(Error::InvalidParameter(format!(
            "{name} grid must be strictly monotone"
        )));
    }
    Ok(())
}

/// Bifurcation sweep of the Kerr model over a monotone ρ² grid. Each row
/// reports the stable symmetry-broken branch when one exists, the trivial
/// branch otherwise.
pub fn chi3_sweep(p0: &Chi3Params, rho_sq_grid: &[f64]) -> Result<Vec<SweepRow>> {
    check_grid(rho_sq_grid, "rho_sq grid")?;
    let mut rows = Vec::with_capacity(rho_sq_grid.len());
    for &rho_sq in rho_sq_grid {
        let p = with_rho_sq(p0, rho_sq);
        let sys = chi3_system(&p)?;
        let states = chi3_steady_states(&p)?;
        let trivial = stability(&sys, &states[0])?;
        let bright = states.iter().find(|s| s.is_bright_pair());
        rows.push(match bright {
            Some(b) => {
                let rep = stability(&sys, b)?;
                SweepRow {
                    control: rho_sq,
                    amp_sig1: b.amplitudes[0].norm(),
                    amp_sig2: b.amplitudes[1].norm(),
                    max_re_lambda: rep.max_re_excluding_goldstone(),
                    bright_exists: true,
                    trivial_stable: trivial.stable,
                }
            }
            None => SweepRow {
                control: rho_sq,
                amp_sig1: 0.0,
                amp_sig2: 0.0,
                max_re_lambda: trivial.max_re_excluding_goldstone(),
                bright_exists: false,
                trivial_stable: trivial.stable,
            },
        });
    }
    Ok(rows)
}

/// Bifurcation sweep of the OPO over a monotone pump-amplitude grid.
pub fn opo_sweep(p0: &OpoParams, pump_grid: &[f64]) -> Result<Vec<SweepRow>> {
    check_grid(pump_grid, "pump grid")?;
    let mut rows = Vec::with_capacity(pump_grid.len());
    for &pump in pump_grid {
        let p = OpoParams { pump, ..*p0 };
        let sys = opo_system(&p)?;
        let states = opo_steady_states(&p)?;
        let trivial = stability(&sys, &states[0])?;
        let bright = states.iter().find(|s| s.is_bright_pair());
        rows.push(match bright {
            Some(b) => {
                let rep = stability(&sys, b)?;
                SweepRow {
                    control: pump,
                    amp_sig1: b.amplitudes[0].norm(),
                    amp_sig2: b.amplitudes[1].norm(),
                    max_re_lambda: rep.max_re_excluding_goldstone(),
                    bright_exists: true,
                    trivial_stable: trivial.stable,
                }
            }
            None => SweepRow {
                control: pump,
                amp_sig1: 0.0,
                amp_sig2: 0.0,
                max_re_lambda: trivial.max_re_excluding_goldstone(),
                bright_exists: false,
                trivial_stable: trivial.stable,
            },
        });
    }
    Ok(rows)
}
