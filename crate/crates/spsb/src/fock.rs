//! Independent verification engine: exact Lindblad master-equation steady
//! states and moments in a truncated Fock space.
//!
//! The Liouvillian L(ρ) = −i[H,ρ] + Σ_m γ_m(2a_mρa_m† − a_m†a_mρ − ρa_m†a_m)
//! is assembled as a dense matrix on a vectorized basis of ket–bra pairs
//! |i⟩⟨j|. Two reductions keep the dimension at desk scale without any
//! approximation:
//!
//! * when H conserves a weighted photon number, the steady state lives in
//!   the sector of pairs with equal weight, q(i) = q(j);
//! * when the two modes enter symmetrically (equal damping, exchange-
//!   invariant H), pairs are folded into exchange orbits — the unique
//!   steady state has unit trace and therefore sits in the exchange-even
//!   sector.
//!
//! Everything downstream (residuals, moments, invariance checks) is
//! evaluated back in the full tensor-product space, so the reductions are
//! verified rather than trusted. The solver is exact for the *truncated*
//! equation; physical truncation error is assessed separately by doubling
//! the cutoffs.

use std::collections::HashMap;

use ndarray::{Array1, Array2};
use ndarray_linalg::solve::FactorizeInto;
use ndarray_linalg::{EigValsh, Solve, SVD, UPLO};

use crate::error::{Error, Result};
use crate::fluctuations::{covariance_lyapunov, linearize};
use crate::meanfield::ClassicalState;
use crate::models::{chi3_system, opo_signal_system, Chi3Params, OpoParams, System};
use crate::operators::{FockSpace, ModeBasis, OpPoly};
use crate::tol;
use crate::C64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Default cap on the Hilbert-space dimension.
pub const DEFAULT_DIM_CAP: usize = 4096;
/// Cap on the vectorized (pair-basis) dimension of a dense Liouvillian;
/// bounds the superoperator at VECTOR_CAP² complex entries (≈ 1 GB).
pub const VECTOR_CAP: usize = 8192;

/// A truncated Fock space with an enforced dimension cap.
#[derive(Clone, Debug)]
pub struct TruncatedSpace {
    space: FockSpace,
}

impl TruncatedSpace {
    /// Builds the space and rejects dimensions above `cap`.
    pub fn new(basis: &ModeBasis, cutoffs: &[usize], cap: usize) -> Result<Self> {
        let space = FockSpace::new(basis, cutoffs)?;
        if space.dim() > cap {
            return Err(Error::SpaceTooLarge {
                dim: space.dim(),
                cap,
            });
        }
        Ok(Self { space })
    }

    /// Builds the space under the default dimension cap.
    pub fn with_default_cap(basis: &ModeBasis, cutoffs: &[usize]) -> Result<Self> {
        Self::new(basis, cutoffs, DEFAULT_DIM_CAP)
    }

    /// The underlying Fock space.
    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    /// Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.space.dim()
    }
}

/// A density matrix over a truncated Fock space. Construction validates
/// unit trace, Hermiticity, and positivity (up to numerical floor).
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    space: FockSpace,
    data: Array2<C64>,
}

impl DensityMatrix {
    /// Wraps and validates a candidate density matrix.
    pub fn new(space: &FockSpace, data: Array2<C64>) -> Result<Self> {
        let dim = space.dim();
        if data.nrows() != dim || data.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "{}×{} matrix over a dimension-{dim} space",
                data.nrows(),
                data.ncols()
            )));
        }
        let trace: C64 = (0..dim).map(|i| data[(i, i)]).sum();
        if (trace - 1.0).norm() > tol::DENSITY_TRACE {
            return Err(Error::InvalidParameter(format!(
                "density matrix trace {trace} differs from 1"
            )));
        }
        let mut herm_defect = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                herm_defect = herm_defect.max((data[(i, j)] - data[(j, i)].conj()).norm());
            }
        }
        if herm_defect > tol::DENSITY_HERMITIAN {
            return Err(Error::InvalidParameter(format!(
                "density matrix Hermiticity defect {herm_defect:.3e}"
            )));
        }
        let eigs = data.eigvalsh(UPLO::Lower)?;
        let min_eig = eigs.iter().copied().fold(f64::INFINITY, f64::min);
        if min_eig < -tol::DENSITY_POSITIVITY {
            return Err(Error::InvalidParameter(format!(
                "density matrix minimum eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self {
            space: space.clone(),
            data,
        })
    }

    /// The vacuum state |0…0⟩⟨0…0|.
    pub fn vacuum(space: &FockSpace) -> Self {
        let mut data = Array2::zeros((space.dim(), space.dim()));
        data[(0, 0)] = C64::new(1.0, 0.0);
        Self {
            space: space.clone(),
            data,
        }
    }

    /// The space the state lives on.
    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    /// Matrix entries.
    pub fn data(&self) -> &Array2<C64> {
        &self.data
    }

    /// Trace (1 up to the validated tolerance).
    pub fn trace(&self) -> C64 {
        (0..self.space.dim()).map(|i| self.data[(i, i)]).sum()
    }
}

/// Expectation value tr(ρ·obs) of an operator polynomial in a state.
/// Real within 1e−10 for Hermitian observables.
pub fn moment(rho: &DensityMatrix, obs: &OpPoly) -> Result<C64> {
    let m = obs.to_matrix(&rho.space)?;
    let md = m.data();
    let dim = rho.space.dim();
    let mut acc = ZERO;
    for i in 0..dim {
        for j in 0..dim {
            acc += rho.data[(i, j)] * md[(j, i)];
        }
    }
    Ok(acc)
}

/// ‖U_θ ρ U_θ† − ρ‖_F for the phase rotation generated by the weighted
/// photon number — the symmetry-invariance defect of a state.
pub fn rotation_defect(rho: &DensityMatrix, charges: &[i32], theta: f64) -> Result<f64> {
    let dim = rho.space.dim();
    if charges.len() != rho.space.cutoffs().len() {
        return Err(Error::DimensionMismatch(format!(
            "{} charges for a {}-mode space",
            charges.len(),
            rho.space.cutoffs().len()
        )));
    }
    let phases: Vec<C64> = (0..dim)
        .map(|i| {
            let occ = rho.space.occupation(i);
            let q: f64 = occ
                .iter()
                .zip(charges)
                .map(|(&n, &c)| n as f64 * c as f64)
                .sum();
            C64::from_polar(1.0, theta * q)
        })
        .collect();
    let mut defect = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            let rotated = phases[i] * rho.data[(i, j)] * phases[j].conj();
            defect += (rotated - rho.data[(i, j)]).norm_sqr();
        }
    }
    Ok(defect.sqrt())
}

/// Frobenius norm of [Q, H] on the truncation-safe subspace, where Q is the
/// weighted photon number Σ w_m·n̂_m and the subspace keeps occupations at
/// least H's per-mode degree below each cutoff (where matrix truncation
/// cannot fake or break the identity).
pub fn conservation_check(h: &OpPoly, ts: &TruncatedSpace, weights: &[i32]) -> Result<f64> {
    let q = OpPoly::weighted_number(h.basis(), weights)?;
    let hm = h.to_matrix(ts.space())?;
    let qm = q.to_matrix(ts.space())?;
    let comm = qm.commutator(&hm)?;
    let margins: Vec<usize> = h
        .max_mode_powers()
        .iter()
        .map(|&(p, q)| p.max(q) as usize)
        .collect();
    let mask = ts.space().interior_mask(&margins)?;
    Ok(comm.restrict(&mask)?.frobenius())
}

/// Sparse rows and columns of a Hamiltonian matrix, for superoperator
/// assembly and fast full-space application.
struct SparseH {
    rows: Vec<Vec<(usize, C64)>>,
    cols: Vec<Vec<(usize, C64)>>,
}

fn sparsify(h: &Array2<C64>) -> SparseH {
    let dim = h.nrows();
    let mut rows = vec![Vec::new(); dim];
    let mut cols = vec![Vec::new(); dim];
    for i in 0..dim {
        for j in 0..dim {
            let v = h[(i, j)];
            if v != ZERO {
                rows[i].push((j, v));
                cols[j].push((i, v));
            }
        }
    }
    SparseH { rows, cols }
}

/// The Lindblad generator as a dense matrix on a vectorized basis of
/// ket–bra pairs (possibly symmetry-reduced; see the module docs).
pub struct Liouvillian {
    space: FockSpace,
    /// Representative pair (i, j) of each basis vector.
    reps: Vec<(usize, usize)>,
    /// Exchange-orbit size (1 or 2) of each basis vector.
    sizes: Vec<f64>,
    /// Every pair (including non-representative orbit members) → basis slot.
    index: HashMap<(usize, usize), usize>,
    matrix: Array2<C64>,
    h: SparseH,
    gammas: Vec<f64>,
}

/// Full vectorization over all ket–bra pairs: no structural assumptions on
/// H (drive terms welcome). The pair count dim² must stay under VECTOR_CAP.
pub fn liouvillian(h: &OpPoly, gammas: &[f64], ts: &TruncatedSpace) -> Result<Liouvillian> {
    let space = ts.space();
    check_gammas(gammas, space)?;
    let dim = space.dim();
    if dim * dim > VECTOR_CAP {
        return Err(Error::SpaceTooLarge {
            dim: dim * dim,
            cap: VECTOR_CAP,
        });
    }
    let mut reps = Vec::with_capacity(dim * dim);
    let mut index = HashMap::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            index.insert((i, j), reps.len());
            reps.push((i, j));
        }
    }
    let sizes = vec![1.0; reps.len()];
    assemble(h, gammas, space, reps, sizes, index)
}

/// Symmetry-reduced vectorization for a Hamiltonian that conserves the
/// weighted photon number Σ charges[m]·n̂_m (validated exactly, term by
/// term): the basis keeps only pairs with q(i) = q(j), folded further into
/// exchange orbits when the two modes enter symmetrically.
pub fn symmetric_liouvillian(
    h: &OpPoly,
    gammas: &[f64],
    ts: &TruncatedSpace,
    charges: &[i32],
) -> Result<Liouvillian> {
    let space = ts.space();
    check_gammas(gammas, space)?;
    let n_modes = space.cutoffs().len();
    if charges.len() != n_modes {
        return Err(Error::DimensionMismatch(format!(
            "{} charges for a {n_modes}-mode space",
            charges.len()
        )));
    }
    for (k, c) in h.terms() {
        let flow: i32 = k
            .iter()
            .zip(charges)
            .map(|(&(p, q), &w)| w * (p as i32 - q as i32))
            .sum();
        if flow != 0 && c != ZERO {
            return Err(Error::InvalidParameter(
                "hamiltonian does not conserve the weighted photon number".into(),
            ));
        }
    }
    let dim = space.dim();
    let q_of: Vec<i64> = (0..dim)
        .map(|i| {
            space
                .occupation(i)
                .iter()
                .zip(charges)
                .map(|(&n, &c)| n as i64 * c as i64)
                .sum()
        })
        .collect();

    // Exchange reduction of the first two modes, when valid.
    let swap = exchange_map(h, gammas, space);
    let mut reps = Vec::new();
    let mut sizes = Vec::new();
    let mut index = HashMap::new();
    for i in 0..dim {
        for j in 0..dim {
            if q_of[i] != q_of[j] {
                continue;
            }
            let pair = (i, j);
            let partner = swap.as_ref().map(|s| (s[i], s[j]));
            match partner {
                Some(p) if p < pair => continue, // handled with its representative
                Some(p) if p != pair => {
                    index.insert(pair, reps.len());
                    index.insert(p, reps.len());
                    reps.push(pair);
                    sizes.push(2.0);
                }
                _ => {
                    index.insert(pair, reps.len());
                    reps.push(pair);
                    sizes.push(1.0);
                }
            }
        }
    }
    if reps.len() > VECTOR_CAP {
        return Err(Error::SpaceTooLarge {
            dim: reps.len(),
            cap: VECTOR_CAP,
        });
    }
    assemble(h, gammas, space, reps, sizes, index)
}

fn check_gammas(gammas: &[f64], space: &FockSpace) -> Result<()> {
    if gammas.len() != space.cutoffs().len() {
        return Err(Error::DimensionMismatch(format!(
            "{} damping rates for a {}-mode space",
            gammas.len(),
            space.cutoffs().len()
        )));
    }
    if gammas.iter().any(|&g| !(g >= 0.0) || !g.is_finite()) {
        return Err(Error::InvalidParameter(
            "damping rates must be finite and nonnegative".into(),
        ));
    }
    Ok(())
}

/// Index permutation exchanging the first two modes, provided the exchange
/// is an exact symmetry: equal cutoffs, equal damping, and an exchange-
/// invariant Hamiltonian (checked at coefficient level).
fn exchange_map(h: &OpPoly, gammas: &[f64], space: &FockSpace) -> Option<Vec<usize>> {
    let cutoffs = space.cutoffs();
    if cutoffs.len() != 2 || cutoffs[0] != cutoffs[1] || gammas[0] != gammas[1] {
        return None;
    }
    let mut swapped = OpPoly::zero(h.basis());
    for (k, c) in h.terms() {
        let mut key = k.to_vec();
        key.swap(0, 1);
        let mono = OpPoly::monomial(h.basis(), &key, c).ok()?;
        swapped = swapped.add(&mono).ok()?;
    }
    let defect = h.sub(&swapped).ok()?.max_abs_coeff();
    if defect > tol::COEFF_EQ * (1.0 + h.max_abs_coeff()) {
        return None;
    }
    let map = (0..space.dim())
        .map(|i| {
            let mut occ = space.occupation(i);
            occ.swap(0, 1);
            space.index(&occ)
        })
        .collect();
    Some(map)
}

fn assemble(
    h: &OpPoly,
    gammas: &[f64],
    space: &FockSpace,
    reps: Vec<(usize, usize)>,
    sizes: Vec<f64>,
    index: HashMap<(usize, usize), usize>,
) -> Result<Liouvillian> {
    let h_mat = h.to_matrix(space)?;
    let sparse = sparsify(h_mat.data());
    let n = reps.len();
    let mut matrix = Array2::<C64>::zeros((n, n));
    let n_modes = space.cutoffs().len();
    for (alpha, &(i, j)) in reps.iter().enumerate() {
        let sa = sizes[alpha];
        let occ_i = space.occupation(i);
        let occ_j = space.occupation(j);
        let mut add = |pair: (usize, usize), c: C64| {
            let beta = *index
                .get(&pair)
                .expect("superoperator target escapes the symmetry sector");
            matrix[(beta, alpha)] += c * (sa / sizes[beta]).sqrt();
        };
        // −i·H·E_ij distributes H's column i over kets.
        for &(k, v) in &sparse.cols[i] {
            add((k, j), -I * v);
        }
        // +i·E_ij·H distributes H's row j over bras.
        for &(l, v) in &sparse.rows[j] {
            add((i, l), I * v);
        }
        for m in 0..n_modes {
            let g = gammas[m];
            let (ni, nj) = (occ_i[m], occ_j[m]);
            add((i, j), C64::new(-g * (ni + nj) as f64, 0.0));
            if ni > 0 && nj > 0 {
                let mut low_i = occ_i.clone();
                low_i[m] -= 1;
                let mut low_j = occ_j.clone();
                low_j[m] -= 1;
                let amp = 2.0 * g * ((ni * nj) as f64).sqrt();
                add(
                    (space.index(&low_i), space.index(&low_j)),
                    C64::new(amp, 0.0),
                );
            }
        }
    }
    Ok(Liouvillian {
        space: space.clone(),
        reps,
        sizes,
        index,
        matrix,
        h: sparse,
        gammas: gammas.to_vec(),
    })
}

impl Liouvillian {
    /// Dimension of the vectorized basis the dense matrix acts on.
    pub fn vector_dim(&self) -> usize {
        self.reps.len()
    }

    /// The dense superoperator matrix.
    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    /// The Fock space.
    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    /// The trace functional as a covector on the vectorized basis.
    pub fn trace_functional(&self) -> Array1<C64> {
        Array1::from_iter(self.reps.iter().zip(&self.sizes).map(|(&(i, j), &s)| {
            if i == j {
                C64::new(s.sqrt(), 0.0)
            } else {
                ZERO
            }
        }))
    }

    /// ‖1ᵀL‖₂, the trace-preservation defect of the assembled matrix.
    pub fn trace_preservation_defect(&self) -> f64 {
        let t = self.trace_functional();
        let n = self.reps.len();
        let mut acc = 0.0f64;
        for c in 0..n {
            let mut dot = ZERO;
            for r in 0..n {
                dot += t[r] * self.matrix[(r, c)];
            }
            acc += dot.norm_sqr();
        }
        acc.sqrt()
    }

    /// Expands vectorized coordinates into a full-space matrix.
    pub fn reconstruct(&self, x: &Array1<C64>) -> Array2<C64> {
        let dim = self.space.dim();
        let mut rho = Array2::<C64>::zeros((dim, dim));
        for (&(i, j), (&s, &v)) in self.reps.iter().zip(self.sizes.iter().zip(x.iter())) {
            let val = v / s.sqrt();
            rho[(i, j)] = val;
            if s > 1.0 {
                let mut occ_i = self.space.occupation(i);
                occ_i.swap(0, 1);
                let mut occ_j = self.space.occupation(j);
                occ_j.swap(0, 1);
                rho[(self.space.index(&occ_i), self.space.index(&occ_j))] = val;
            }
        }
        rho
    }

    /// Projects a full-space matrix onto the vectorized basis.
    pub fn project(&self, rho: &Array2<C64>) -> Array1<C64> {
        Array1::from_iter(self.reps.iter().zip(&self.sizes).map(|(&(i, j), &s)| {
            if s > 1.0 {
                let mut occ_i = self.space.occupation(i);
                occ_i.swap(0, 1);
                let mut occ_j = self.space.occupation(j);
                occ_j.swap(0, 1);
                (rho[(i, j)] + rho[(self.space.index(&occ_i), self.space.index(&occ_j))])
                    / s.sqrt()
            } else {
                rho[(i, j)]
            }
        }))
    }

    /// Applies the generator to a full-space matrix directly from H and the
    /// jump operators — independent of the assembled (possibly reduced)
    /// dense matrix, so it doubles as a check on the reduction.
    pub fn apply_full(&self, rho: &Array2<C64>) -> Array2<C64> {
        let dim = self.space.dim();
        let mut out = Array2::<C64>::zeros((dim, dim));
        // −i(Hρ − ρH)
        for k in 0..dim {
            for &(i, v) in &self.h.rows[k] {
                for l in 0..dim {
                    out[(k, l)] -= I * v * rho[(i, l)];
                }
            }
        }
        for l in 0..dim {
            for &(j, v) in &self.h.cols[l] {
                for k in 0..dim {
                    out[(k, l)] += I * rho[(k, j)] * v;
                }
            }
        }
        // Σ_m γ_m (2 a ρ a† − n̂ρ − ρn̂)
        let occs: Vec<Vec<usize>> = (0..dim).map(|i| self.space.occupation(i)).collect();
        for (m, &g) in self.gammas.iter().enumerate() {
            for k in 0..dim {
                let nk = occs[k][m];
                for l in 0..dim {
                    let nl = occs[l][m];
                    out[(k, l)] -= g * (nk + nl) as f64 * rho[(k, l)];
                    if occs[k][m] < self.space.cutoffs()[m] && occs[l][m] < self.space.cutoffs()[m]
                    {
                        let mut up_k = occs[k].clone();
                        up_k[m] += 1;
                        let mut up_l = occs[l].clone();
                        up_l[m] += 1;
                        let amp = 2.0 * g * (((nk + 1) * (nl + 1)) as f64).sqrt();
                        out[(k, l)] +=
                            amp * rho[(self.space.index(&up_k), self.space.index(&up_l))];
                    }
                }
            }
        }
        out
    }

    /// Frobenius norm of L(ρ) evaluated in the full space.
    pub fn residual(&self, rho: &DensityMatrix) -> f64 {
        self.apply_full(&rho.data)
            .iter()
            .map(|v| v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Unique steady state of the generator: the null vector normalized to unit
/// trace, found by replacing one row of L with the trace functional.
/// Uniqueness is certified by a singular-value count when the basis is
/// small enough for an SVD, and by agreement of two independent
/// row-replacement solves otherwise. The full-space residual ‖L(ρ)‖ must
/// come out below 1e−9.
pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix> {
    let rho = solve_with_replaced_row(l, l.index[&(0, 0)])?;

    const SVD_LIMIT: usize = 3000;
    if l.vector_dim() <= SVD_LIMIT {
        let (_, sv, _) = l.matrix.svd(false, false)?;
        let smax = sv.iter().copied().fold(0.0f64, f64::max);
        let nulls = sv.iter().filter(|&&s| s < 1e-10 * smax.max(1.0)).count();
        if nulls != 1 {
            return Err(Error::SteadyState(format!(
                "Liouvillian null space has dimension {nulls}"
            )));
        }
    } else {
        let first_excited = {
            let mut occ = vec![0usize; l.space.cutoffs().len()];
            occ[0] = 1;
            l.space.index(&occ)
        };
        let alt = solve_with_replaced_row(l, l.index[&(first_excited, first_excited)])?;
        let diff = (&rho - &alt).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if diff > 1e-8 {
            return Err(Error::SteadyState(format!(
                "independent null-vector solves disagree by {diff:.3e}: degenerate steady state"
            )));
        }
    }

    let state = DensityMatrix::new(&l.space, rho)?;
    let residual = l.residual(&state);
    if residual > tol::LIOUVILLIAN_RESIDUAL {
        return Err(Error::SteadyState(format!(
            "steady-state residual {residual:.3e} exceeds tolerance"
        )));
    }
    Ok(state)
}

/// Solves L x = 0, tr x = 1 with the trace condition written over row
/// `replace`, then reconstructs, hermitizes, and normalizes.
fn solve_with_replaced_row(l: &Liouvillian, replace: usize) -> Result<Array2<C64>> {
    let n = l.vector_dim();
    let t = l.trace_functional();
    let mut a = l.matrix.clone();
    for c in 0..n {
        a[(replace, c)] = t[c];
    }
    let mut rhs = Array1::<C64>::zeros(n);
    rhs[replace] = C64::new(1.0, 0.0);
    let x = a.factorize_into()?.solve_into(rhs)?;
    let raw = l.reconstruct(&x);
    let dim = l.space.dim();
    let mut rho = Array2::<C64>::zeros((dim, dim));
    for i in 0..dim {
        for j in 0..dim {
            rho[(i, j)] = (raw[(i, j)] + raw[(j, i)].conj()) * 0.5;
        }
    }
    let trace: C64 = (0..dim).map(|i| rho[(i, i)]).sum();
    if trace.norm() < 1e-12 {
        return Err(Error::SteadyState(
            "null vector has vanishing trace".into(),
        ));
    }
    Ok(rho.mapv(|v| v / trace))
}

/// Fourth-order Runge–Kutta integration of dρ/dt = L(ρ) on the vectorized
/// basis: a slow but independent cross-check of the algebraic steady state.
pub fn evolve_rk4(
    l: &Liouvillian,
    rho0: &DensityMatrix,
    dt: f64,
    steps: usize,
) -> Result<DensityMatrix> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter(format!("step size {dt}")));
    }
    let mut x = l.project(&rho0.data);
    let apply = |v: &Array1<C64>| l.matrix.dot(v);
    for _ in 0..steps {
        let k1 = apply(&x);
        let k2 = apply(&(&x + &(&k1 * C64::new(dt / 2.0, 0.0))));
        let k3 = apply(&(&x + &(&k2 * C64::new(dt / 2.0, 0.0))));
        let k4 = apply(&(&x + &(&k3 * C64::new(dt, 0.0))));
        let incr = (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4)
            * C64::new(dt / 6.0, 0.0);
        x = &x + &incr;
    }
    let raw = l.reconstruct(&x);
    let dim = l.space.dim();
    let mut rho = Array2::<C64>::zeros((dim, dim));
    for i in 0..dim {
        for j in 0..dim {
            rho[(i, j)] = (raw[(i, j)] + raw[(j, i)].conj()) * 0.5;
        }
    }
    DensityMatrix::new(&l.space, rho)
}

/// One parameter point of the oracle-versus-linearization comparison.
#[derive(Clone, Debug)]
pub enum OraclePoint {
    /// Signal-reduced parametric down-conversion model below threshold.
    Opo { params: OpoParams, cutoff: usize },
    /// Kerr model below threshold.
    Chi3 { params: Chi3Params, cutoff: usize },
}

impl OraclePoint {
    /// Stable human-readable label for report rows.
    pub fn label(&self) -> String {
        match self {
            OraclePoint::Opo { params, cutoff } => format!(
                "opo m={} cutoff={cutoff}",
                params.below_threshold_gain() / params.gamma_s
            ),
            OraclePoint::Chi3 { params, cutoff } => format!(
                "chi3 delta={} g={} rho2={} cutoff={cutoff}",
                params.delta, params.g, params.rho_sq
            ),
        }
    }

    fn system(&self) -> Result<System> {
        match self {
            OraclePoint::Opo { params, .. } => opo_signal_system(params),
            OraclePoint::Chi3 { params, .. } => chi3_system(params),
        }
    }

    fn cutoff(&self) -> usize {
        match self {
            OraclePoint::Opo { cutoff, .. } | OraclePoint::Chi3 { cutoff, .. } => *cutoff,
        }
    }
}

/// One row of the comparison report.
#[derive(Clone, Debug)]
pub struct OracleRow {
    /// Parameter-point label.
    pub point: String,
    /// Moment name.
    pub moment: &'static str,
    /// Master-equation value.
    pub oracle: f64,
    /// Linearized-covariance value.
    pub linearized: f64,
    /// |oracle − linearized| / max(|oracle|, floor).
    pub rel_dev: f64,
}

const MOMENT_NAMES: [&str; 4] = ["n_1", "n_2", "re_a1a2", "im_a1a2"];

/// The canonical below-threshold comparison points: three gains of the
/// down-conversion model and two pump intensities of the Kerr model at weak
/// coupling.
pub fn default_oracle_points() -> Vec<OraclePoint> {
    let opo = |pump: f64| OraclePoint::Opo {
        params: OpoParams {
            pump,
            chi: 1.0,
            gamma_p: 1.0,
            gamma_s: 1.0,
        },
        cutoff: 12,
    };
    let chi3 = |rho_sq: f64| OraclePoint::Chi3 {
        params: Chi3Params::kleinman(2.0, -0.01, rho_sq, 1.0),
        cutoff: 7,
    };
    vec![opo(0.1), opo(0.2), opo(0.3), chi3(5.0), chi3(10.0)]
}

/// Second moments of a two-mode state: (⟨n₁⟩, ⟨n₂⟩, ⟨a₁a₂⟩).
fn oracle_moments(point: &OraclePoint, cutoff: usize) -> Result<(f64, f64, C64)> {
    let sys = point.system()?;
    let ts = TruncatedSpace::with_default_cap(&sys.basis, &[cutoff, cutoff])?;
    let l = symmetric_liouvillian(&sys.hamiltonian, &sys.gammas, &ts, &sys.charges)?;
    let rho = steady_state(&l)?;
    let basis = &sys.basis;
    let n1 = moment(&rho, &OpPoly::number(basis, basis.modes()[0])?)?;
    let n2 = moment(&rho, &OpPoly::number(basis, basis.modes()[1])?)?;
    let pair = moment(
        &rho,
        &OpPoly::monomial(basis, &[(0, 1), (0, 1)], C64::new(1.0, 0.0))?,
    )?;
    Ok((n1.re, n2.re, pair))
}

/// The same moments from the linearized covariance around the trivial
/// state.
fn linearized_moments(point: &OraclePoint) -> Result<(f64, f64, C64)> {
    let sys = point.system()?;
    let trivial = ClassicalState::new(vec![ZERO; sys.n_modes()]);
    let dd = linearize(&sys, &trivial)?;
    let sigma = covariance_lyapunov(&dd)?;
    let n = |m: usize| (sigma[(2 * m, 2 * m)] + sigma[(2 * m + 1, 2 * m + 1)] - 2.0) / 4.0;
    let pair = C64::new(
        (sigma[(0, 2)] - sigma[(1, 3)]) / 4.0,
        (sigma[(0, 3)] + sigma[(1, 2)]) / 4.0,
    );
    Ok((n(0), n(1), pair))
}

fn comparison_rows(point: &OraclePoint, cutoff: usize) -> Result<Vec<OracleRow>> {
    let (on1, on2, opair) = oracle_moments(point, cutoff)?;
    let (ln1, ln2, lpair) = linearized_moments(point)?;
    let values = [
        (on1, ln1),
        (on2, ln2),
        (opair.re, lpair.re),
        (opair.im, lpair.im),
    ];
    Ok(MOMENT_NAMES
        .iter()
        .zip(values)
        .map(|(&name, (o, l))| OracleRow {
            point: point.label(),
            moment: name,
            oracle: o,
            linearized: l,
            rel_dev: (o - l).abs() / o.abs().max(tol::MOMENT_FLOOR),
        })
        .collect())
}

/// The oracle-versus-linearization table: four second moments per point.
pub fn oracle_comparison(points: &[OraclePoint]) -> Result<Vec<OracleRow>> {
    if points.is_empty() {
        return Err(Error::EmptyInput("oracle comparison points"));
    }
    let mut rows = Vec::new();
    for point in points {
        rows.extend(comparison_rows(point, point.cutoff())?);
    }
    Ok(rows)
}

/// Maximum relative change of any reported moment when the cutoffs double —
/// the truncation-convergence certificate.
pub fn doubling_drift(point: &OraclePoint) -> Result<f64> {
    let base = oracle_moments(point, point.cutoff())?;
    let fine = oracle_moments(point, 2 * point.cutoff())?;
    let pairs = [
        (base.0, fine.0),
        (base.1, fine.1),
        (base.2.re, fine.2.re),
        (base.2.im, fine.2.im),
    ];
    Ok(pairs
        .iter()
        .map(|&(b, f)| (b - f).abs() / f.abs().max(tol::MOMENT_FLOOR))
        .fold(0.0, f64::max))
}
