//! Property tests for the structural invariants: unitarity of built
//! coefficient pairs, spectral symmetry and normalization, probability
//! bounds, periodicity, and the single/multi band reduction.

use gqspi_core::*;
use proptest::prelude::*;
use std::f64::consts::PI;

fn angle() -> impl Strategy<Value = f64> {
    -PI..PI
}

fn angles(d: usize) -> impl Strategy<Value = PhaseAngles> {
    (
        proptest::collection::vec(angle(), d + 1),
        proptest::collection::vec(angle(), d + 1),
        angle(),
    )
        .prop_map(|(t, p, l)| PhaseAngles::new(t, p, l).unwrap())
}

fn any_angles() -> impl Strategy<Value = PhaseAngles> {
    (0usize..=32).prop_flat_map(angles)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn built_polynomials_are_unitary(a in any_angles()) {
        let poly = gqsp_build(&a).unwrap();
        prop_assert!(verify_unitarity(&poly) < 1e-12);
    }

    #[test]
    fn spectra_are_hermitian_and_normalized(a in (0usize..=8).prop_flat_map(angles), kappa in 0.05f64..0.4) {
        let spec = response_coefficients(&gqsp_build(&a).unwrap(), kappa).unwrap();
        for s in 0..=(spec.degree() as i64) {
            prop_assert!((spec.coeff(-s) - spec.coeff(s).conj()).norm() < 1e-12);
        }
        prop_assert!((spec.coefficient_sum() - 1.0).norm() < 1e-10);
        // Probability bounds on a dense sample.
        let (lo, hi) = spec.sample_bounds(256).unwrap();
        prop_assert!(lo >= -1e-9 && hi <= 1.0 + 1e-9);
        // Response pinned to 1 at beta = 0.
        prop_assert!((response_eval(&spec, 0.0).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn optimizer_candidates_yield_valid_spectra(flat in proptest::collection::vec(-10.0f64..10.0, 5)) {
        // Mirrors the optimizer's parameter vectors: any flat vector of odd
        // length is a valid candidate whose spectrum passes the checks
        // (unitarity is structural, so no constraint handling exists).
        let a = PhaseAngles::from_flat(&flat).unwrap();
        let spec = response_coefficients(&gqsp_build(&a).unwrap(), 0.25).unwrap();
        prop_assert!((spec.coefficient_sum() - 1.0).norm() < 1e-10);
        for s in 0..=(spec.degree() as i64) {
            prop_assert!((spec.coeff(-s) - spec.coeff(s).conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn response_is_periodic(a in (1usize..=6).prop_flat_map(angles), kappa in 0.05f64..0.4, beta in -20.0f64..20.0) {
        let spec = response_coefficients(&gqsp_build(&a).unwrap(), kappa).unwrap();
        let p1 = response_eval(&spec, beta).unwrap();
        let p2 = response_eval(&spec, beta + PI / kappa).unwrap();
        prop_assert!((p1 - p2).abs() < 1e-10);
    }

    #[test]
    fn degree1_spectrum_is_symmetric(a in angles(1), kappa in 0.05f64..0.4) {
        let spec = response_coefficients(&gqsp_build(&a).unwrap(), kappa).unwrap();
        prop_assert!((spec.coeff(1) - spec.coeff(-1)).norm() < 1e-12);
    }

    #[test]
    fn multi_band_reduces_to_single(a in (1usize..=5).prop_flat_map(angles), frac_lo in -0.8f64..0.3, width in 0.1f64..0.5) {
        let kappa = 0.25;
        let half = 0.5 * PI / kappa;
        let lo = frac_lo * half;
        let hi = (frac_lo + width).min(0.95) * half;
        let spec = response_coefficients(&gqsp_build(&a).unwrap(), kappa).unwrap();
        let thr = ThresholdSpec::single(lo, hi, kappa).unwrap();
        let single = p_err_single(&spec, &thr).unwrap();
        let multi = p_err_multi(&spec, &thr).unwrap();
        prop_assert!((single - multi).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&single));
    }

    #[test]
    fn padding_preserves_the_response(a in (0usize..=4).prop_flat_map(angles), kappa in 0.05f64..0.4, beta in -10.0f64..10.0) {
        let spec = response_coefficients(&gqsp_build(&a).unwrap(), kappa).unwrap();
        let padded = response_coefficients(&gqsp_build(&a.pad_two()).unwrap(), kappa).unwrap();
        let p1 = response_eval(&spec, beta).unwrap();
        let p2 = response_eval(&padded, beta).unwrap();
        prop_assert!((p1 - p2).abs() < 1e-12);
    }
}
