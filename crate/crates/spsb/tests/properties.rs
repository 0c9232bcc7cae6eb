//! Randomized structural invariants: ring axioms of the normal-ordered
//! operator algebra, unitarity of the polarization geometry, Hamiltonian
//! symmetries at random couplings, and stationarity/stability of the
//! symmetry-broken branch across its whole existence region.

use ndarray::Array2;
use proptest::prelude::*;
use spsb::fluctuations::{covariance_lyapunov, linearize, output_spectrum};
use spsb::meanfield::{
    chi3_bright_state, existence_interval, goldstone_alignment, rotate_state, stability,
    vector_field, ClassicalState,
};
use spsb::models::{
    build_opo_hamiltonian, chi3_system, opo_signal_system, symmetry_charges,
    verify_basis_equivalence, Chi3Params, OpoParams,
};
use spsb::operators::{FockSpace, ModeBasis, OpPoly};
use spsb::polarization::{bright_mode, dark_mode, qwp, JonesVector};
use spsb::{C64, ModelKind};

/// Scale-aware comparison of two polynomials: the largest coefficient of the
/// difference, relative to the largest coefficient of either side.
fn poly_rel_diff(a: &OpPoly, b: &OpPoly) -> f64 {
    let scale = 1.0 + a.max_abs_coeff().max(b.max_abs_coeff());
    a.sub(b).expect("same basis").max_abs_coeff() / scale
}

fn coeff() -> impl Strategy<Value = C64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| C64::new(re, im))
}

/// A random normal-ordered polynomial on the two-mode linear signal basis:
/// up to four monomials with per-mode creation/annihilation powers ≤ 2.
fn small_poly() -> impl Strategy<Value = OpPoly> {
    proptest::collection::vec(((0u8..3, 0u8..3), (0u8..3, 0u8..3), coeff()), 1..5).prop_map(
        |terms| {
            let basis = ModeBasis::linear_signal();
            let mut p = OpPoly::zero(&basis);
            for (pw1, pw2, c) in terms {
                let m = OpPoly::monomial(&basis, &[pw1, pw2], c).expect("valid monomial");
                p = p.add(&m).expect("same basis");
            }
            p
        },
    )
}

/// Random Kerr parameters with the coefficient constraint built in; both
/// coupling signs and both detuning signs are exercised.
fn chi3_params() -> impl Strategy<Value = Chi3Params> {
    (
        0.1..4.0f64,
        prop::bool::ANY,
        0.02..2.0f64,
        prop::bool::ANY,
        -0.5..1.0f64,
        0.01..5.0f64,
        0.2..3.0f64,
    )
        .prop_map(|(d, dneg, g, gneg, ratio_b, rho_sq, gamma_s)| Chi3Params {
            delta: if dneg { -d } else { d },
            g: if gneg { -g } else { g },
            ratio_a: 0.5 * (1.0 - ratio_b),
            ratio_b,
            rho_sq,
            gamma_s,
        })
}

/// A point strictly inside the symmetry-breaking region: detuning above the
/// √3·γs cusp and pump intensity an interior fraction of the existence
/// interval.
fn bright_point() -> impl Strategy<Value = Chi3Params> {
    (1.8..5.0f64, 0.1..0.9f64, 0.05..2.0f64).prop_map(|(delta, frac, g)| {
        let probe = Chi3Params::kleinman(delta, -g, 1.0, 1.0);
        let iv = existence_interval(&probe).expect("valid parameters");
        assert!(iv.exists, "detuning above the cusp must open a region");
        let rho_sq = iv.lower + frac * (iv.upper - iv.lower);
        Chi3Params::kleinman(delta, -g, rho_sq, 1.0)
    })
}

fn jones() -> impl Strategy<Value = JonesVector> {
    (coeff(), coeff())
        .prop_filter("nonzero vector", |(cx, cy)| {
            cx.norm_sqr() + cy.norm_sqr() > 1e-4
        })
        .prop_map(|(cx, cy)| JonesVector::new(cx, cy))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn multiplication_is_associative(a in small_poly(), b in small_poly(), c in small_poly()) {
        let left = a.mul(&b).unwrap().mul(&c).unwrap();
        let right = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert!(poly_rel_diff(&left, &right) < 1e-12);
    }

    #[test]
    fn multiplication_distributes_over_addition(
        a in small_poly(),
        b in small_poly(),
        c in small_poly(),
    ) {
        let left = a.mul(&b.add(&c).unwrap()).unwrap();
        let right = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
        prop_assert!(poly_rel_diff(&left, &right) < 1e-13);
    }

    #[test]
    fn adjoint_is_an_involution(a in small_poly()) {
        prop_assert_eq!(
            a.adjoint().adjoint().sub(&a).unwrap().max_abs_coeff(),
            0.0
        );
    }

    #[test]
    fn adjoint_reverses_products(a in small_poly(), b in small_poly()) {
        let left = a.mul(&b).unwrap().adjoint();
        let right = b.adjoint().mul(&a.adjoint()).unwrap();
        prop_assert!(poly_rel_diff(&left, &right) < 1e-13);
    }

    #[test]
    fn commutators_are_antisymmetric(a in small_poly(), b in small_poly()) {
        let sum = a.commutator(&b).unwrap().add(&b.commutator(&a).unwrap()).unwrap();
        let scale = 1.0 + a.max_abs_coeff() * b.max_abs_coeff();
        prop_assert!(sum.max_abs_coeff() / scale < 1e-13);
    }

    #[test]
    fn hermitian_combinations_report_hermitian(a in small_poly()) {
        let h = a.add(&a.adjoint()).unwrap();
        prop_assert!(h.is_hermitian(1e-12));
    }

    #[test]
    fn phase_rotations_compose_additively(
        a in small_poly(),
        t1 in -3.2..3.2f64,
        t2 in -3.2..3.2f64,
        q1 in -2i32..3,
        q2 in -2i32..3,
    ) {
        let charges = [q1, q2];
        let step = a
            .phase_rotate(t1, &charges).unwrap()
            .phase_rotate(t2, &charges).unwrap();
        let joint = a.phase_rotate(t1 + t2, &charges).unwrap();
        prop_assert!(poly_rel_diff(&step, &joint) < 1e-12);
        // Rotation multiplies coefficients by unit-modulus phases only.
        prop_assert!(
            (step.max_abs_coeff() - a.max_abs_coeff()).abs()
                < 1e-13 * (1.0 + a.max_abs_coeff())
        );
    }

    #[test]
    fn matrix_realization_respects_products(a in small_poly(), b in small_poly()) {
        // On column states far enough below the cutoff that no intermediate
        // state is truncated, the matrix of a product equals the product of
        // the matrices.
        let space = FockSpace::new(&ModeBasis::linear_signal(), &[7, 7]).unwrap();
        let exact = a.mul(&b).unwrap().to_matrix(&space).unwrap();
        let factored = a.to_matrix(&space).unwrap().mul(&b.to_matrix(&space).unwrap()).unwrap();
        let mask = space.interior_mask(&[4, 4]).unwrap();
        let diff = exact.sub(&factored).unwrap().restrict(&mask).unwrap().frobenius();
        let scale = 1.0 + exact.restrict(&mask).unwrap().frobenius();
        prop_assert!(diff / scale < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn circular_basis_change_is_unitary(v in jones()) {
        let (cp, cm) = v.to_circular();
        prop_assert!(
            (cp.norm_sqr() + cm.norm_sqr() - v.intensity()).abs()
                < 1e-13 * (1.0 + v.intensity())
        );
        let back = JonesVector::from_circular(cp, cm);
        prop_assert!((back.cx - v.cx).norm() < 1e-13 * (1.0 + v.norm()));
        prop_assert!((back.cy - v.cy).norm() < 1e-13 * (1.0 + v.norm()));
    }

    #[test]
    fn stokes_vectors_of_pure_states_lie_on_the_poincare_sphere(v in jones()) {
        let s = v.stokes().unwrap();
        prop_assert!((s.s0 - v.intensity()).abs() < 1e-13 * (1.0 + v.intensity()));
        let radius_sq = s.s1 * s.s1 + s.s2 * s.s2 + s.s3 * s.s3;
        prop_assert!((radius_sq - s.s0 * s.s0).abs() < 1e-12 * (1.0 + s.s0 * s.s0));
    }

    #[test]
    fn bright_and_dark_modes_stay_orthonormal(theta in -7.0..7.0f64) {
        for model in [ModelKind::Opo, ModelKind::Chi3] {
            let b = bright_mode(model, theta);
            let d = dark_mode(model, theta);
            prop_assert!((b.norm() - 1.0).abs() < 1e-14);
            prop_assert!((d.norm() - 1.0).abs() < 1e-14);
            prop_assert!(b.overlap(&d) < 1e-14);
        }
    }

    #[test]
    fn wave_plates_preserve_intensity(v in jones(), axis in -3.2..3.2f64) {
        let out = qwp(&v, axis);
        prop_assert!(
            (out.intensity() - v.intensity()).abs() < 1e-13 * (1.0 + v.intensity())
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kerr_hamiltonians_are_hermitian_and_symmetric(p in chi3_params()) {
        let sys = chi3_system(&p).unwrap();
        prop_assert!(sys.hamiltonian.is_hermitian(1e-12));
        prop_assert!(sys.hamiltonian.is_phase_invariant(&sys.charges).unwrap());
    }

    #[test]
    fn linear_and_circular_kerr_forms_agree(p in chi3_params()) {
        prop_assert!(verify_basis_equivalence(&p).unwrap() < 1e-12);
    }

    #[test]
    fn opo_hamiltonians_are_hermitian_and_symmetric(
        pump in 0.05..3.0f64,
        chi in 0.05..2.0f64,
        gamma_p in 0.2..3.0f64,
        gamma_s in 0.2..3.0f64,
    ) {
        let p = OpoParams { pump, chi, gamma_p, gamma_s };
        let h = build_opo_hamiltonian(&p).unwrap();
        prop_assert!(h.is_hermitian(1e-12));
        let charges = symmetry_charges(h.basis());
        prop_assert!(h.is_phase_invariant(&charges).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bright_branch_orbits_are_stationary_with_one_goldstone_mode(
        p in bright_point(),
        theta in -3.2..3.2f64,
    ) {
        let sys = chi3_system(&p).unwrap();
        let state = chi3_bright_state(&p).unwrap();
        // Every point of the symmetry orbit is stationary...
        let rotated = rotate_state(&state, &sys.charges, theta).unwrap();
        let f = vector_field(&sys, &rotated.amplitudes).unwrap();
        let resid = f.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(resid < 1e-8 * (1.0 + p.rho_sq));
        // ...with exactly one zero drift eigenvalue, aligned with the orbit
        // tangent.
        let report = stability(&sys, &rotated).unwrap();
        prop_assert_eq!(report.null_count(), 1);
        prop_assert!(report.stable);
        prop_assert!(goldstone_alignment(&sys, &rotated).unwrap() > 1.0 - 1e-6);
    }

    #[test]
    fn bright_branch_covariances_are_physical(p in bright_point()) {
        let sys = chi3_system(&p).unwrap();
        let state = chi3_bright_state(&p).unwrap();
        let dd = linearize(&sys, &state).unwrap();
        let sigma = covariance_lyapunov(&dd).unwrap();
        let asym = (&sigma - &sigma.t())
            .iter()
            .map(|x| x.abs())
            .fold(0.0, f64::max);
        prop_assert!(asym < 1e-10);
        // Zero variance along the Goldstone direction by construction.
        let t = dd.goldstone.as_ref().unwrap();
        let mut along = 0.0f64;
        for (i, ti) in t.iter().enumerate() {
            let mut row = 0.0;
            for (j, tj) in t.iter().enumerate() {
                row += sigma[(i, j)] * tj;
            }
            along = along.max((row * ti).abs().max(row.abs()));
        }
        prop_assert!(along < 1e-10 * (1.0 + sigma.iter().fold(0.0f64, |m, x| m.max(x.abs()))));
    }

    #[test]
    fn output_spectra_are_even_and_return_to_shot_noise(
        p in bright_point(),
        phi in 0.0..3.2f64,
        omega in 0.05..30.0f64,
    ) {
        let sys = chi3_system(&p).unwrap();
        let state = chi3_bright_state(&p).unwrap();
        let dd = linearize(&sys, &state).unwrap();
        let mode = dark_mode(ModelKind::Chi3, 0.0);
        let far = 1e4 * p.gamma_s;
        let spec = output_spectrum(&sys, &dd, &mode, phi, &[-omega, omega, far]).unwrap();
        let v_neg = spec.samples[0].1;
        let v_pos = spec.samples[1].1;
        let v_far = spec.samples[2].1;
        prop_assert!((v_neg - v_pos).abs() < 1e-10 * (1.0 + v_pos.abs()));
        prop_assert!((v_far - 1.0).abs() < 1e-5);
    }

    #[test]
    fn subthreshold_opo_covariances_are_positive_definite(
        m in 0.05..0.95f64,
        gamma_s in 0.3..2.0f64,
    ) {
        // Pump a fraction m < 1 of the threshold γp·γs/χ keeps the trivial
        // state stable.
        let p = OpoParams { pump: m * gamma_s, chi: 1.0, gamma_p: 1.0, gamma_s };
        let sys = opo_signal_system(&p).unwrap();
        let state = ClassicalState::new(vec![C64::new(0.0, 0.0); 2]);
        let dd = linearize(&sys, &state).unwrap();
        let sigma = covariance_lyapunov(&dd).unwrap();
        // Physicality: every quadrature variance stays strictly positive
        // (squeezing below vacuum never reaches zero at finite gain), and the
        // stationary covariance solves the Lyapunov equation.
        let n = sigma.nrows();
        let mut min_diag = f64::INFINITY;
        for i in 0..n {
            min_diag = min_diag.min(sigma[(i, i)]);
        }
        prop_assert!(min_diag > 0.0);
        let resid: Array2<f64> =
            &dd.drift.dot(&sigma) + &sigma.dot(&dd.drift.t()) + &dd.total_diffusion();
        let rmax = resid.iter().map(|x| x.abs()).fold(0.0, f64::max);
        prop_assert!(rmax < 1e-10 * (1.0 + m / (1.0 - m)));
    }
}
