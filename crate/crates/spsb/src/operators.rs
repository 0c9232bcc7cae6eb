//! Exact algebra of normal-ordered polynomials in bosonic mode operators,
//! and their dense matrix realization in a truncated Fock space.
//!
//! A polynomial is a finite map from monomials to complex coefficients. A
//! monomial stores, per mode, the pair (creation power, annihilation power),
//! with creation factors understood to stand left of annihilation factors
//! (normal order). Products are brought back to normal order with the
//! single-mode reordering identity
//!
//! ```text
//! a^q (a†)^p = Σ_k k!·C(q,k)·C(p,k)·(a†)^(p−k) a^(q−k),   k = 0..min(p,q)
//! ```
//!
//! applied independently per mode. All coefficients met in practice are small
//! integer combinations of model constants, so the algebra is exact at the
//! f64 level; identities such as the Jacobi identity hold with zero residual
//! for integer-coefficient inputs.

use std::collections::BTreeMap;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::C64;

/// Bosonic mode labels. Linear (x/y) and circular (+/−) signal labels belong
/// to different bases of the same two-mode signal space and are never mixed
/// inside one polynomial; conversions go through
/// [`OpPoly::substitute`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    /// Signal mode polarized along e_x.
    SigX,
    /// Signal mode polarized along e_y.
    SigY,
    /// Right circular signal mode, amplitude (a_x − i a_y)/√2.
    SigPlus,
    /// Left circular signal mode, amplitude (a_x + i a_y)/√2.
    SigMinus,
    /// Pump mode of the OPO.
    Pump,
}

impl Mode {
    /// Short, stable display name.
    pub fn label(self) -> &'static str {
        match self {
            Mode::SigX => "sig_x",
            Mode::SigY => "sig_y",
            Mode::SigPlus => "sig_plus",
            Mode::SigMinus => "sig_minus",
            Mode::Pump => "pump_b",
        }
    }

    fn is_linear_signal(self) -> bool {
        matches!(self, Mode::SigX | Mode::SigY)
    }

    fn is_circular_signal(self) -> bool {
        matches!(self, Mode::SigPlus | Mode::SigMinus)
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Ordered list of distinct modes; the index of a mode in the basis is its
/// position in tensor products and amplitude vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeBasis {
    modes: Vec<Mode>,
}

impl ModeBasis {
    /// Builds a basis, rejecting duplicates and mixed linear/circular signal
    /// labels.
    pub fn new(modes: &[Mode]) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidBasis("empty mode list".into()));
        }
        for (i, m) in modes.iter().enumerate() {
            if modes[..i].contains(m) {
                return Err(Error::InvalidBasis(format!("duplicate mode {m}")));
            }
        }
        let has_linear = modes.iter().any(|m| m.is_linear_signal());
        let has_circular = modes.iter().any(|m| m.is_circular_signal());
        if has_linear && has_circular {
            return Err(Error::InvalidBasis(
                "linear (x/y) and circular (+/−) signal modes mixed".into(),
            ));
        }
        Ok(Self {
            modes: modes.to_vec(),
        })
    }

    /// Two-mode linear signal basis [x, y].
    pub fn linear_signal() -> Self {
        Self::new(&[Mode::SigX, Mode::SigY]).expect("static basis")
    }

    /// Two-mode circular signal basis [+, −].
    pub fn circular_signal() -> Self {
        Self::new(&[Mode::SigPlus, Mode::SigMinus]).expect("static basis")
    }

    /// Three-mode OPO basis [x, y, pump].
    pub fn opo_full() -> Self {
        Self::new(&[Mode::SigX, Mode::SigY, Mode::Pump]).expect("static basis")
    }

    /// Number of modes.
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    /// True when the basis holds no modes (never true for constructed values).
    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// The modes in index order.
    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    /// Position of a mode within this basis.
    pub fn index_of(&self, mode: Mode) -> Option<usize> {
        self.modes.iter().position(|&m| m == mode)
    }

    fn describe(&self) -> String {
        self.modes
            .iter()
            .map(|m| m.label())
            .collect::<Vec<_>>()
            .join(",")
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::BasisMismatch {
                left: self.describe(),
                right: other.describe(),
            })
        }
    }
}

/// Per-mode (creation power, annihilation power) of one monomial.
type MonKey = Vec<(u8, u8)>;

/// Normal-ordered polynomial in the creation/annihilation operators of a
/// fixed mode basis. Canonical form: keys unique (BTreeMap) and no stored
/// coefficient is exactly zero.
#[derive(Clone, Debug, PartialEq)]
pub struct OpPoly {
    basis: ModeBasis,
    terms: BTreeMap<MonKey, C64>,
}

impl OpPoly {
    /// The zero polynomial.
    pub fn zero(basis: &ModeBasis) -> Self {
        Self {
            basis: basis.clone(),
            terms: BTreeMap::new(),
        }
    }

    /// The constant polynomial c·1.
    pub fn constant(basis: &ModeBasis, c: C64) -> Self {
        let mut p = Self::zero(basis);
        p.accumulate(vec![(0, 0); basis.len()], c);
        p
    }

    /// The identity operator.
    pub fn identity(basis: &ModeBasis) -> Self {
        Self::constant(basis, C64::new(1.0, 0.0))
    }

    /// A single monomial with the given per-mode (creation, annihilation)
    /// powers.
    pub fn monomial(basis: &ModeBasis, powers: &[(u8, u8)], coeff: C64) -> Result<Self> {
        if powers.len() != basis.len() {
            return Err(Error::DimensionMismatch(format!(
                "monomial has {} power pairs for a {}-mode basis",
                powers.len(),
                basis.len()
            )));
        }
        let mut p = Self::zero(basis);
        p.accumulate(powers.to_vec(), coeff);
        Ok(p)
    }

    /// The annihilation operator of `mode`.
    pub fn annihilation(basis: &ModeBasis, mode: Mode) -> Result<Self> {
        let idx = basis
            .index_of(mode)
            .ok_or(Error::ModeNotInBasis(mode.label()))?;
        let mut powers = vec![(0, 0); basis.len()];
        powers[idx] = (0, 1);
        Self::monomial(basis, &powers, C64::new(1.0, 0.0))
    }

    /// The creation operator of `mode`.
    pub fn creation(basis: &ModeBasis, mode: Mode) -> Result<Self> {
        let idx = basis
            .index_of(mode)
            .ok_or(Error::ModeNotInBasis(mode.label()))?;
        let mut powers = vec![(0, 0); basis.len()];
        powers[idx] = (1, 0);
        Self::monomial(basis, &powers, C64::new(1.0, 0.0))
    }

    /// The photon-number operator a†a of `mode`.
    pub fn number(basis: &ModeBasis, mode: Mode) -> Result<Self> {
        let idx = basis
            .index_of(mode)
            .ok_or(Error::ModeNotInBasis(mode.label()))?;
        let mut powers = vec![(0, 0); basis.len()];
        powers[idx] = (1, 1);
        Self::monomial(basis, &powers, C64::new(1.0, 0.0))
    }

    /// Σ_m w_m a_m†a_m for integer weights, e.g. the conserved photon-number
    /// difference between the two signal modes.
    pub fn weighted_number(basis: &ModeBasis, weights: &[i32]) -> Result<Self> {
        if weights.len() != basis.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for a {}-mode basis",
                weights.len(),
                basis.len()
            )));
        }
        let mut p = Self::zero(basis);
        for (m, &w) in weights.iter().enumerate() {
            if w != 0 {
                let mut powers = vec![(0, 0); basis.len()];
                powers[m] = (1, 1);
                p.accumulate(powers, C64::new(w as f64, 0.0));
            }
        }
        Ok(p)
    }

    /// The mode basis this polynomial lives in.
    pub fn basis(&self) -> &ModeBasis {
        &self.basis
    }

    /// Iterates over (monomial powers, coefficient) in canonical key order.
    pub fn terms(&self) -> impl Iterator<Item = (&[(u8, u8)], C64)> + '_ {
        self.terms.iter().map(|(k, &c)| (k.as_slice(), c))
    }

    /// Number of stored monomials.
    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// True when no monomials are stored.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn accumulate(&mut self, key: MonKey, coeff: C64) {
        if coeff == C64::new(0.0, 0.0) {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(key) {
            Entry::Vacant(e) => {
                e.insert(coeff);
            }
            Entry::Occupied(mut e) => {
                let c = *e.get() + coeff;
                if c == C64::new(0.0, 0.0) {
                    e.remove();
                } else {
                    *e.get_mut() = c;
                }
            }
        }
    }

    /// Sum of two polynomials over the same basis.
    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.basis.check_same(&rhs.basis)?;
        let mut out = self.clone();
        for (k, &c) in &rhs.terms {
            out.accumulate(k.clone(), c);
        }
        Ok(out)
    }

    /// Difference of two polynomials over the same basis.
    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.add(&rhs.scale(C64::new(-1.0, 0.0)))
    }

    /// The polynomial scaled by a complex constant.
    pub fn scale(&self, c: C64) -> Self {
        let mut out = Self::zero(&self.basis);
        if c == C64::new(0.0, 0.0) {
            return out;
        }
        for (k, &v) in &self.terms {
            out.terms.insert(k.clone(), v * c);
        }
        out
    }

    /// Product in canonical normal order.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        self.basis.check_same(&rhs.basis)?;
        let n = self.basis.len();
        let mut out = Self::zero(&self.basis);
        for (kl, &cl) in &self.terms {
            for (kr, &cr) in &rhs.terms {
                // Expand per-mode reorderings as a running cartesian product.
                let mut partial: Vec<(MonKey, f64)> = vec![(Vec::with_capacity(n), 1.0)];
                for m in 0..n {
                    let (p1, q1) = kl[m];
                    let (p2, q2) = kr[m];
                    let kmax = q1.min(p2);
                    let mut next = Vec::with_capacity(partial.len() * (kmax as usize + 1));
                    for k in 0..=kmax {
                        let factor = reorder_factor(q1, p2, k);
                        let powers = (p1 + p2 - k, q1 + q2 - k);
                        for (key, f) in &partial {
                            let mut key2 = key.clone();
                            key2.push(powers);
                            next.push((key2, f * factor));
                        }
                    }
                    partial = next;
                }
                for (key, f) in partial {
                    out.accumulate(key, cl * cr * f);
                }
            }
        }
        Ok(out)
    }

    /// Hermitian adjoint: coefficients conjugated, creation/annihilation
    /// powers swapped per mode. Exact (no reordering needed: the adjoint of
    /// a normal-ordered monomial is normal-ordered).
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(&self.basis);
        for (k, &c) in &self.terms {
            let key: MonKey = k.iter().map(|&(p, q)| (q, p)).collect();
            out.accumulate(key, c.conj());
        }
        out
    }

    /// Commutator [self, rhs] = self·rhs − rhs·self in canonical form.
    pub fn commutator(&self, rhs: &Self) -> Result<Self> {
        self.mul(rhs)?.sub(&rhs.mul(self)?)
    }

    /// Applies the phase rotation a_m → a_m·exp(iθ·q_m) generated by integer
    /// charges q: each monomial coefficient picks up
    /// exp(iθ·Σ_m q_m·(annihilation_m − creation_m)). Monomials with zero net
    /// charge are left bit-for-bit unchanged.
    pub fn phase_rotate(&self, theta: f64, charges: &[i32]) -> Result<Self> {
        if charges.len() != self.basis.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} charges for a {}-mode basis",
                charges.len(),
                self.basis.len()
            )));
        }
        let mut out = Self::zero(&self.basis);
        for (k, &c) in &self.terms {
            let net: i64 = k
                .iter()
                .zip(charges)
                .map(|(&(p, q), &w)| w as i64 * (q as i64 - p as i64))
                .sum();
            let coeff = if net == 0 {
                c
            } else {
                c * C64::from_polar(1.0, theta * net as f64)
            };
            out.accumulate(k.clone(), coeff);
        }
        Ok(out)
    }

    /// True when every monomial carries zero net charge, i.e. the polynomial
    /// is exactly invariant under [`phase_rotate`](Self::phase_rotate) for
    /// every θ. Integer arithmetic; no tolerance involved.
    pub fn is_phase_invariant(&self, charges: &[i32]) -> Result<bool> {
        if charges.len() != self.basis.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} charges for a {}-mode basis",
                charges.len(),
                self.basis.len()
            )));
        }
        Ok(self.terms.keys().all(|k| {
            k.iter()
                .zip(charges)
                .map(|(&(p, q), &w)| w as i64 * (q as i64 - p as i64))
                .sum::<i64>()
                == 0
        }))
    }

    /// True when the polynomial equals its adjoint within `tol` on every
    /// coefficient.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.sub(&self.adjoint())
            .map(|d| d.max_abs_coeff() <= tol)
            .unwrap_or(false)
    }

    /// Largest coefficient magnitude (0 for the zero polynomial); the
    /// coefficient-level norm used by equivalence and symmetry residuals.
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// The polynomial with its operator-independent constant term removed.
    pub fn without_constant(&self) -> Self {
        let mut out = self.clone();
        let key = vec![(0u8, 0u8); self.basis.len()];
        out.terms.remove(&key);
        out
    }

    /// Maximum total power (creation + annihilation over all modes) over the
    /// monomials.
    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|k| k.iter().map(|&(p, q)| p as u32 + q as u32).sum())
            .max()
            .unwrap_or(0)
    }

    /// Per-mode maximum of the creation power and of the annihilation power
    /// over all monomials; used to size truncation-safe subspaces.
    pub fn max_mode_powers(&self) -> Vec<(u8, u8)> {
        let mut out = vec![(0u8, 0u8); self.basis.len()];
        for k in self.terms.keys() {
            for (m, &(p, q)) in k.iter().enumerate() {
                out[m].0 = out[m].0.max(p);
                out[m].1 = out[m].1.max(q);
            }
        }
        out
    }

    /// Classical expectation: a_m → α_m, a_m† → α_m*.
    pub fn evaluate(&self, amps: &[C64]) -> Result<C64> {
        self.eval_derivative(amps, &vec![0; self.basis.len()], &vec![0; self.basis.len()])
    }

    /// Formal Wirtinger derivative of the classical expectation:
    /// ∂^|d| / (Π_m ∂α_m^{d_ann_m} ∂α_m*^{d_cre_m}) of `evaluate`, at `amps`.
    /// Used for mean-field vector fields (first order in α*) and Jacobians
    /// (second order).
    pub fn eval_derivative(&self, amps: &[C64], d_ann: &[u8], d_cre: &[u8]) -> Result<C64> {
        let n = self.basis.len();
        if amps.len() != n || d_ann.len() != n || d_cre.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "amplitude/derivative vectors must have length {n}"
            )));
        }
        let mut total = C64::new(0.0, 0.0);
        'term: for (k, &c) in &self.terms {
            let mut factor = c;
            for m in 0..n {
                let (p, q) = k[m];
                let (dc, da) = (d_cre[m], d_ann[m]);
                if dc > p || da > q {
                    continue 'term;
                }
                let fc = falling(p as usize, dc as usize);
                let fa = falling(q as usize, da as usize);
                factor *= fc * fa;
                factor *= amps[m].conj().powi((p - dc) as i32);
                factor *= amps[m].powi((q - da) as i32);
            }
            total += factor;
        }
        Ok(total)
    }

    /// Rewrites the polynomial in a new mode basis under the linear
    /// substitution a_m = Σ_k map[m][k].1 · b_{map[m][k].0} (creation
    /// operators transform with the conjugated coefficients). The map must be
    /// unitary for the result to represent the same physical operator; this
    /// is not checked here. No reordering occurs: creation factors map to
    /// pure-creation polynomials and annihilation factors to
    /// pure-annihilation ones, so normal order is preserved exactly.
    pub fn substitute(&self, new_basis: &ModeBasis, map: &[Vec<(usize, C64)>]) -> Result<Self> {
        let n = self.basis.len();
        let nn = new_basis.len();
        if map.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "substitution map has {} rows for a {}-mode basis",
                map.len(),
                n
            )));
        }
        for row in map {
            for &(idx, _) in row {
                if idx >= nn {
                    return Err(Error::DimensionMismatch(format!(
                        "substitution target index {idx} out of range for {nn}-mode basis"
                    )));
                }
            }
        }
        let mut out = Self::zero(new_basis);
        for (k, &c) in &self.terms {
            // Accumulate the image of this monomial as a map from the new
            // key to a coefficient, starting from the constant monomial.
            let mut image: BTreeMap<MonKey, C64> = BTreeMap::new();
            image.insert(vec![(0, 0); nn], c);
            for m in 0..n {
                let (p, q) = k[m];
                for _ in 0..p {
                    image = mul_one_body(&image, &map[m], nn, true);
                }
                for _ in 0..q {
                    image = mul_one_body(&image, &map[m], nn, false);
                }
            }
            for (key, coeff) in image {
                out.accumulate(key, coeff);
            }
        }
        Ok(out)
    }

    /// Dense matrix of the polynomial on a truncated Fock space, with
    /// a|n⟩ = √n|n−1⟩ per mode and tensor-product ordering (first basis mode
    /// slowest). Errors when any monomial power exceeds the cutoff of its
    /// mode, since such a matrix could not contain the corresponding
    /// transition at all.
    pub fn to_matrix(&self, space: &FockSpace) -> Result<FockMatrix> {
        space.basis.check_same(&self.basis)?;
        for (m, &(p, q)) in self.max_mode_powers().iter().enumerate() {
            let top = p.max(q) as usize;
            if top > space.cutoffs[m] {
                return Err(Error::CutoffExceeded {
                    mode: self.basis.modes[m].label(),
                    power: top as u32,
                    cutoff: space.cutoffs[m],
                });
            }
        }
        let dim = space.dim();
        let mut data = Array2::<C64>::zeros((dim, dim));
        let n = self.basis.len();
        let mut occ = vec![0usize; n];
        for col in 0..dim {
            space.occupation_into(col, &mut occ);
            'term: for (k, &c) in &self.terms {
                let mut amp = 1.0f64;
                let mut row = 0usize;
                for m in 0..n {
                    let (p, q) = (k[m].0 as usize, k[m].1 as usize);
                    let nm = occ[m];
                    if q > nm {
                        continue 'term;
                    }
                    let target = nm - q + p;
                    if target > space.cutoffs[m] {
                        continue 'term;
                    }
                    amp *= (falling(nm, q) * falling(target, p)).sqrt();
                    row += target * space.strides[m];
                }
                data[(row, col)] += c * amp;
            }
        }
        Ok(FockMatrix {
            space: space.clone(),
            data,
        })
    }
}

/// k!·C(q,k)·C(p,k) — weight of the k-contraction in the normal-ordering
/// recurrence. Exact in f64 for the small powers used here.
fn reorder_factor(q: u8, p: u8, k: u8) -> f64 {
    let (q, p, k) = (q as usize, p as usize, k as usize);
    // k!·C(q,k)·C(p,k) = falling(q,k)·falling(p,k)/k!
    falling(q, k) * falling(p, k) / factorial(k)
}

/// n·(n−1)·…·(n−k+1), with falling(n, 0) = 1 and 0 when k > n.
fn falling(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut acc = 1.0;
    for i in 0..k {
        acc *= (n - i) as f64;
    }
    acc
}

fn factorial(k: usize) -> f64 {
    falling(k, k)
}

/// Multiplies an accumulated image by one factor Σ_k c_k·b_k (annihilation,
/// `creation=false`) or Σ_k c_k*·b_k† (`creation=true`). Keys only ever grow
/// on one side per call, so no reordering is required.
fn mul_one_body(
    image: &BTreeMap<MonKey, C64>,
    row: &[(usize, C64)],
    n_new: usize,
    creation: bool,
) -> BTreeMap<MonKey, C64> {
    let mut out: BTreeMap<MonKey, C64> = BTreeMap::new();
    for (key, &coeff) in image {
        for &(idx, c) in row {
            debug_assert!(idx < n_new);
            let mut key2 = key.clone();
            let factor = if creation {
                key2[idx].0 += 1;
                c.conj()
            } else {
                key2[idx].1 += 1;
                c
            };
            let v = out.entry(key2).or_insert(C64::new(0.0, 0.0));
            *v += coeff * factor;
        }
    }
    out.retain(|_, v| *v != C64::new(0.0, 0.0));
    out
}

/// Truncated Fock space: per-mode photon-number cutoffs N_m (each mode keeps
/// the levels 0..=N_m), tensor ordering with the first basis mode slowest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FockSpace {
    basis: ModeBasis,
    cutoffs: Vec<usize>,
    strides: Vec<usize>,
    dim: usize,
}

impl FockSpace {
    /// Builds the space; `cutoffs[m]` is the largest photon number kept for
    /// mode m.
    pub fn new(basis: &ModeBasis, cutoffs: &[usize]) -> Result<Self> {
        if cutoffs.len() != basis.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} cutoffs for a {}-mode basis",
                cutoffs.len(),
                basis.len()
            )));
        }
        if cutoffs.iter().any(|&n| n == 0) {
            return Err(Error::InvalidParameter(
                "Fock cutoffs must be at least 1".into(),
            ));
        }
        let mut dim = 1usize;
        for &n in cutoffs {
            dim = dim
                .checked_mul(n + 1)
                .ok_or(Error::InvalidParameter("Fock dimension overflow".into()))?;
        }
        let mut strides = vec![0usize; cutoffs.len()];
        let mut acc = 1usize;
        for m in (0..cutoffs.len()).rev() {
            strides[m] = acc;
            acc *= cutoffs[m] + 1;
        }
        Ok(Self {
            basis: basis.clone(),
            cutoffs: cutoffs.to_vec(),
            strides,
            dim,
        })
    }

    /// Total Hilbert-space dimension Π(N_m + 1).
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Per-mode cutoffs.
    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    /// The mode basis the space is built over.
    pub fn basis(&self) -> &ModeBasis {
        &self.basis
    }

    /// Linear index of an occupation-number vector.
    pub fn index(&self, occ: &[usize]) -> usize {
        debug_assert_eq!(occ.len(), self.cutoffs.len());
        debug_assert!(occ.iter().zip(&self.cutoffs) .all(|(&n, &cut)| n <= cut));
        occ.iter().zip(&self.strides).map(|(&n, &s)| n * s).sum()
    }

    /// Occupation-number vector of a linear index.
    pub fn occupation(&self, idx: usize) -> Vec<usize> {
        let mut occ = vec![0; self.cutoffs.len()];
        self.occupation_into(idx, &mut occ);
        occ
    }

    fn occupation_into(&self, idx: usize, occ: &mut [usize]) {
        let mut rest = idx;
        for m in 0..self.cutoffs.len() {
            occ[m] = rest / self.strides[m];
            rest %= self.strides[m];
        }
    }

    /// Mask of basis states whose occupations stay at least `margins[m]`
    /// below each cutoff — the truncation-safe subspace on which operator
    /// identities of a polynomial with those per-mode powers hold exactly.
    pub fn interior_mask(&self, margins: &[usize]) -> Result<Vec<bool>> {
        if margins.len() != self.cutoffs.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} margins for a {}-mode space",
                margins.len(),
                self.cutoffs.len()
            )));
        }
        let mut mask = vec![false; self.dim];
        let mut occ = vec![0usize; self.cutoffs.len()];
        for (idx, slot) in mask.iter_mut().enumerate() {
            self.occupation_into(idx, &mut occ);
            *slot = occ
                .iter()
                .zip(self.cutoffs.iter().zip(margins))
                .all(|(&n, (&cut, &mar))| n + mar <= cut);
        }
        Ok(mask)
    }
}

/// Dense complex matrix bound to its Fock space.
#[derive(Clone, Debug)]
pub struct FockMatrix {
    space: FockSpace,
    data: Array2<C64>,
}

impl FockMatrix {
    /// Identity matrix on `space`.
    pub fn identity(space: &FockSpace) -> Self {
        Self {
            space: space.clone(),
            data: Array2::eye(space.dim()),
        }
    }

    /// The underlying space.
    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    /// The matrix entries.
    pub fn data(&self) -> &Array2<C64> {
        &self.data
    }

    /// Consumes the wrapper, returning the entries.
    pub fn into_data(self) -> Array2<C64> {
        self.data
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space.clone(),
            data: self.data.t().mapv(|c| c.conj()),
        }
    }

    /// Matrix product.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        self.space.basis.check_same(&rhs.space.basis)?;
        if self.space.cutoffs != rhs.space.cutoffs {
            return Err(Error::DimensionMismatch(
                "Fock matrices over different cutoffs".into(),
            ));
        }
        Ok(Self {
            space: self.space.clone(),
            data: self.data.dot(&rhs.data),
        })
    }

    /// Matrix difference.
    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.space.basis.check_same(&rhs.space.basis)?;
        if self.space.cutoffs != rhs.space.cutoffs {
            return Err(Error::DimensionMismatch(
                "Fock matrices over different cutoffs".into(),
            ));
        }
        Ok(Self {
            space: self.space.clone(),
            data: &self.data - &rhs.data,
        })
    }

    /// Matrix commutator [self, rhs].
    pub fn commutator(&self, rhs: &Self) -> Result<Self> {
        self.mul(rhs)?.sub(&rhs.mul(self)?)
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> f64 {
        self.data
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Trace.
    pub fn trace(&self) -> C64 {
        (0..self.space.dim()).map(|i| self.data[(i, i)]).sum()
    }

    /// P·M·P with P the diagonal projector selected by `mask` — restriction
    /// to a subspace (rows and columns outside the mask zeroed).
    pub fn restrict(&self, mask: &[bool]) -> Result<Self> {
        if mask.len() != self.space.dim() {
            return Err(Error::DimensionMismatch(format!(
                "mask length {} for dimension {}",
                mask.len(),
                self.space.dim()
            )));
        }
        let mut data = self.data.clone();
        for (i, &keep_i) in mask.iter().enumerate() {
            for (j, &keep_j) in mask.iter().enumerate() {
                if !(keep_i && keep_j) {
                    data[(i, j)] = C64::new(0.0, 0.0);
                }
            }
        }
        Ok(Self {
            space: self.space.clone(),
            data,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_mode() -> ModeBasis {
        ModeBasis::new(&[Mode::SigX]).unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn rejects_bad_bases() {
        assert!(ModeBasis::new(&[]).is_err());
        assert!(ModeBasis::new(&[Mode::SigX, Mode::SigX]).is_err());
        assert!(ModeBasis::new(&[Mode::SigX, Mode::SigPlus]).is_err());
        assert!(ModeBasis::new(&[Mode::SigPlus, Mode::SigMinus, Mode::Pump]).is_ok());
    }

    #[test]
    fn a_times_a_dagger_reorders() {
        let b = one_mode();
        let a = OpPoly::annihilation(&b, Mode::SigX).unwrap();
        let ad = OpPoly::creation(&b, Mode::SigX).unwrap();
        let prod = a.mul(&ad).unwrap();
        let expected = OpPoly::number(&b, Mode::SigX)
            .unwrap()
            .add(&OpPoly::identity(&b))
            .unwrap();
        assert!(prod.sub(&expected).unwrap().is_zero());
    }

    #[test]
    fn number_squared_identity_and_matrix_homomorphism() {
        // (a†a)² = a†²a² + a†a, checked both at coefficient level and against
        // the matrix product on the safe subspace of a cutoff-6 space.
        let b = one_mode();
        let n = OpPoly::number(&b, Mode::SigX).unwrap();
        let n2 = n.mul(&n).unwrap();
        let expected = OpPoly::monomial(&b, &[(2, 2)], c(1.0, 0.0))
            .unwrap()
            .add(&n)
            .unwrap();
        assert!(n2.sub(&expected).unwrap().is_zero());

        let space = FockSpace::new(&b, &[6]).unwrap();
        let lhs = n2.to_matrix(&space).unwrap();
        let rhs = n.to_matrix(&space).unwrap().mul(&n.to_matrix(&space).unwrap()).unwrap();
        // n preserves photon number, so no truncation margin is needed here.
        assert!(lhs.sub(&rhs).unwrap().frobenius() < 1e-12);
    }

    #[test]
    fn commutator_canonical() {
        let b = one_mode();
        let a = OpPoly::annihilation(&b, Mode::SigX).unwrap();
        let ad = OpPoly::creation(&b, Mode::SigX).unwrap();
        let comm = a.commutator(&ad).unwrap();
        assert!(comm.sub(&OpPoly::identity(&b)).unwrap().is_zero());
    }

    #[test]
    fn charge_commutes_with_beamsplitter_free_pair() {
        // [n̂₊ − n̂₋, â₊â₋] = 0: the two single-mode contributions cancel.
        let b = ModeBasis::circular_signal();
        let q = OpPoly::weighted_number(&b, &[1, -1]).unwrap();
        let ap = OpPoly::annihilation(&b, Mode::SigPlus).unwrap();
        let am = OpPoly::annihilation(&b, Mode::SigMinus).unwrap();
        let pair = ap.mul(&am).unwrap();
        assert!(q.commutator(&pair).unwrap().is_zero());
    }

    #[test]
    fn phase_rotation_examples() {
        let b = ModeBasis::circular_signal();
        // Charge-balanced monomial is untouched for any θ.
        let ap = OpPoly::annihilation(&b, Mode::SigPlus).unwrap();
        let am = OpPoly::annihilation(&b, Mode::SigMinus).unwrap();
        let pair = ap.mul(&am).unwrap();
        let rot = pair.phase_rotate(0.7321, &[1, -1]).unwrap();
        assert!(rot.sub(&pair).unwrap().is_zero());
        assert!(pair.is_phase_invariant(&[1, -1]).unwrap());

        // a₊†² with charges (+1,−1) at θ = π/2 flips sign.
        let lin = ModeBasis::linear_signal();
        let adx2 = OpPoly::monomial(&lin, &[(2, 0), (0, 0)], c(1.0, 0.0)).unwrap();
        let rot = adx2
            .phase_rotate(std::f64::consts::FRAC_PI_2, &[1, -1])
            .unwrap();
        let diff = rot.add(&adx2).unwrap(); // rot = −adx2
        assert!(diff.max_abs_coeff() < 1e-15);
    }

    #[test]
    fn phase_rotation_composes() {
        let b = ModeBasis::linear_signal();
        let p = OpPoly::monomial(&b, &[(2, 1), (0, 3)], c(0.3, -1.1)).unwrap();
        let t1 = 0.3971;
        let t2 = -1.234;
        let once = p
            .phase_rotate(t1, &[1, -1])
            .unwrap()
            .phase_rotate(t2, &[1, -1])
            .unwrap();
        let both = p.phase_rotate(t1 + t2, &[1, -1]).unwrap();
        assert!(once.sub(&both).unwrap().max_abs_coeff() < 1e-14);
    }

    #[test]
    fn to_matrix_basics() {
        let b = one_mode();
        let space = FockSpace::new(&b, &[3]).unwrap();
        let n = OpPoly::number(&b, Mode::SigX).unwrap().to_matrix(&space).unwrap();
        for i in 0..4 {
            assert_eq!(n.data()[(i, i)], c(i as f64, 0.0));
        }

        let space2 = FockSpace::new(&b, &[2]).unwrap();
        let a = OpPoly::annihilation(&b, Mode::SigX)
            .unwrap()
            .to_matrix(&space2)
            .unwrap();
        assert_eq!(a.data()[(0, 1)], c(1.0, 0.0));
        assert!((a.data()[(1, 2)] - c(2f64.sqrt(), 0.0)).norm() < 1e-15);
        assert_eq!(a.data()[(1, 0)], c(0.0, 0.0));
    }

    #[test]
    fn to_matrix_adjoint_exact() {
        let b = ModeBasis::linear_signal();
        let p = OpPoly::monomial(&b, &[(2, 1), (1, 0)], c(0.3, 0.7)).unwrap();
        let space = FockSpace::new(&b, &[4, 4]).unwrap();
        let lhs = p.adjoint().to_matrix(&space).unwrap();
        let rhs = p.to_matrix(&space).unwrap().adjoint();
        assert_eq!(lhs.sub(&rhs).unwrap().frobenius(), 0.0);
    }

    #[test]
    fn cutoff_errors() {
        let b = one_mode();
        let space = FockSpace::new(&b, &[1]).unwrap();
        let p = OpPoly::monomial(&b, &[(2, 0)], c(1.0, 0.0)).unwrap();
        assert!(matches!(
            p.to_matrix(&space),
            Err(Error::CutoffExceeded { .. })
        ));
    }

    #[test]
    fn substitute_preserves_number_total() {
        // n̂x + n̂y = n̂₊ + n̂₋ under the circular-basis map.
        let lin = ModeBasis::linear_signal();
        let circ = ModeBasis::circular_signal();
        let s = 1.0 / 2f64.sqrt();
        // a_x = (a₊ + a₋)/√2; a_y = i(a₊ − a₋)/√2.
        let map = vec![
            vec![(0, c(s, 0.0)), (1, c(s, 0.0))],
            vec![(0, c(0.0, s)), (1, c(0.0, -s))],
        ];
        let total = OpPoly::weighted_number(&lin, &[1, 1]).unwrap();
        let image = total.substitute(&circ, &map).unwrap();
        let expected = OpPoly::weighted_number(&circ, &[1, 1]).unwrap();
        assert!(image.sub(&expected).unwrap().max_abs_coeff() < 1e-15);
    }

    #[test]
    fn evaluate_and_derivatives() {
        // ⟨a†a⟩ = |α|², ∂/∂α* = α, ∂²/∂α*∂α = 1.
        let b = one_mode();
        let n = OpPoly::number(&b, Mode::SigX).unwrap();
        let alpha = c(0.3, -0.8);
        let v = n.evaluate(&[alpha]).unwrap();
        assert!((v - c(alpha.norm_sqr(), 0.0)).norm() < 1e-15);
        let d = n.eval_derivative(&[alpha], &[0], &[1]).unwrap();
        assert!((d - alpha).norm() < 1e-15);
        let dd = n.eval_derivative(&[alpha], &[1], &[1]).unwrap();
        assert!((dd - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn interior_mask_counts() {
        let b = ModeBasis::linear_signal();
        let space = FockSpace::new(&b, &[3, 2]).unwrap();
        let mask = space.interior_mask(&[1, 1]).unwrap();
        // x ∈ {0..2} (3 values), y ∈ {0..1} (2 values).
        assert_eq!(mask.iter().filter(|&&k| k).count(), 6);
    }
}
