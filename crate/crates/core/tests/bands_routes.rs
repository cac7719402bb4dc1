//! Band statistics through independent routes.

use std::f64::consts::PI;

use landau_dos::bands::{
    band_statistics, gamma2_closed_form, gamma2_variational, gamma_functional, sigma2,
    QuarticFunctional, VariationalOptions,
};
use landau_dos::covariance::CovarianceModel;
use landau_dos::landau::{radial_matrix_element, LandauBasis};
use landau_dos::specfun::{laguerre, LaguerreOrder};
use num_complex::Complex64;
use proptest::prelude::*;

fn laguerre0(ell: usize, x: f64) -> f64 {
    laguerre(LaguerreOrder::new(ell, 0).unwrap(), x).unwrap()
}

fn random_unit(n: usize, seed: u64) -> Vec<Complex64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut c: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let norm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    c.iter_mut().for_each(|z| *z /= norm);
    c
}

#[test]
fn bessel_sigma2_matches_closed_form() {
    for (b, tau) in [(1.0, 1.0), (2.0, 0.4), (0.7, 2.5)] {
        let m = CovarianceModel::bessel_oscillating(1.3, tau).unwrap();
        let x = 1.0 / (b * tau * tau);
        for ell in 0..=5 {
            let basis = LandauBasis::new(b, ell, 4).unwrap();
            let v = sigma2(&m, &basis).unwrap();
            let e = 1.3 * (-x).exp() * laguerre0(ell, x).powi(2);
            assert!((v - e).abs() <= 1e-10 * 1.3, "ell={ell}: {v} vs {e}");
        }
    }
}

#[test]
fn bessel_null_point_has_zero_width() {
    let m = CovarianceModel::bessel_oscillating(1.0, 1.0).unwrap();
    let basis = LandauBasis::new(1.0, 1, 4).unwrap();
    assert!(sigma2(&m, &basis).unwrap().abs() < 1e-16);
    let stats = band_statistics(&m, &basis, VariationalOptions::default()).unwrap();
    assert_eq!(stats.gamma2, 0.0);
}

#[test]
fn gaussian_sigma2_matches_diagonal_matrix_element() {
    for (c0, tau, b) in [(1.0, 1.0, 1.0), (2.0, 0.5, 3.0), (0.5, 2.0, 0.25)] {
        let m = CovarianceModel::gaussian(c0, tau).unwrap();
        for ell in [0usize, 1, 4, 9] {
            let basis = LandauBasis::new(b, ell, 2).unwrap();
            let s = sigma2(&m, &basis).unwrap();
            let route = radial_matrix_element(&basis, 0, 0, |r| m.evaluate_radial(r).unwrap()).unwrap();
            assert!((s - route).abs() <= 1e-8 * c0, "ell={ell}: {s} vs {route}");
        }
        let bt = b * tau * tau;
        let basis = LandauBasis::new(b, 0, 2).unwrap();
        assert!((sigma2(&m, &basis).unwrap() - c0 * bt / (bt + 1.0)).abs() < 1e-14);
    }
}

#[test]
fn sigma2_decreases_with_level() {
    let m = CovarianceModel::gaussian(1.0, 1.0).unwrap();
    let s = |ell| sigma2(&m, &LandauBasis::new(1.0, ell, 2).unwrap()).unwrap();
    assert!(s(8) < s(0));
    assert!(s(16) < s(8));
}

#[test]
fn delta_closed_form_is_limit_of_gaussian() {
    // Gaussian with C(0) = α²/2πτ² approaches the white-noise value as τ → 0
    let alpha2 = 1.0;
    for ell in 0..4 {
        let d = gamma2_closed_form(&CovarianceModel::delta_limit(alpha2).unwrap(), 1.0, ell).unwrap();
        let tau: f64 = 1e-4;
        let g = CovarianceModel::gaussian(alpha2 / (2.0 * PI * tau * tau), tau).unwrap();
        let v = gamma2_closed_form(&g, 1.0, ell).unwrap();
        assert!((v - d).abs() < 1e-6 * d, "ell={ell}: {v} vs {d}");
    }
}

#[test]
fn white_noise_tensor_matches_closed_form() {
    let m = CovarianceModel::delta_limit(1.0).unwrap();
    for ell in 0..4 {
        let basis = LandauBasis::new(1.0, ell, 6).unwrap();
        let mut c = vec![Complex64::new(0.0, 0.0); 6];
        c[0] = Complex64::new(1.0, 0.0);
        let v = gamma_functional(&m, &basis, &c).unwrap();
        let e = gamma2_closed_form(&m, 1.0, ell).unwrap();
        assert!((v - e).abs() < 1e-12 * e, "ell={ell}: {v} vs {e}");
    }
}

#[test]
fn random_vectors_stay_below_supremum() {
    let m = CovarianceModel::gaussian(1.0, 0.8).unwrap();
    for ell in 0..3 {
        let basis = LandauBasis::new(1.0, ell, 16).unwrap();
        let f = QuarticFunctional::new(&m, &basis).unwrap();
        let sup = gamma2_closed_form(&m, 1.0, ell).unwrap();
        for seed in 0..20 {
            let c = random_unit(16, seed);
            assert!(f.gamma2(&c) <= sup + 1e-8);
        }
    }
}

#[test]
fn variational_matches_closed_form() {
    for bt in [0.5f64, 2.0, 10.0] {
        let m = CovarianceModel::gaussian(1.0, bt.sqrt()).unwrap();
        for ell in 0..=3 {
            let basis = LandauBasis::new(1.0, ell, 32).unwrap();
            let st = gamma2_variational(&m, &basis, VariationalOptions::default()).unwrap();
            let e = gamma2_closed_form(&m, 1.0, ell).unwrap();
            let s2 = sigma2(&m, &basis).unwrap();
            assert!((st.value - e).abs() <= 1e-6 * e, "bt={bt} ell={ell}: {} vs {e}", st.value);
            assert!(s2 * s2 <= st.value + 1e-8 && st.value <= s2 + 1e-8);
        }
    }
}

#[test]
fn variational_constant_covariance_is_immediate() {
    let m = CovarianceModel::constant(2.5).unwrap();
    let basis = LandauBasis::new(1.0, 0, 8).unwrap();
    let opts = VariationalOptions { restarts: 1, ..Default::default() };
    let st = gamma2_variational(&m, &basis, opts).unwrap();
    assert!((st.value - 2.5).abs() < 1e-12);
    assert_eq!(st.iterations, 1);
}

#[test]
fn variational_is_monotone_in_truncation() {
    let m = CovarianceModel::poly_gaussian(1.0, 0.7).unwrap();
    let v = |n| {
        let basis = LandauBasis::new(1.0, 1, n).unwrap();
        gamma2_variational(&m, &basis, VariationalOptions { restarts: 3, ..Default::default() })
            .unwrap()
            .value
    };
    let (a, b, c) = (v(4), v(8), v(16));
    assert!(a <= b + 1e-9 && b <= c + 1e-9, "{a} {b} {c}");
}

#[test]
fn streaming_route_matches_tensor_route() {
    let m = CovarianceModel::gaussian(1.0, 1.0).unwrap();
    let opts = VariationalOptions { restarts: 2, ..Default::default() };
    let t = gamma2_variational(&m, &LandauBasis::new(1.0, 1, 64).unwrap(), opts).unwrap();
    let s = gamma2_variational(&m, &LandauBasis::new(1.0, 1, 128).unwrap(), opts).unwrap();
    assert!((t.value - s.value).abs() <= 1e-6 * t.value, "{} vs {}", t.value, s.value);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn functional_is_phase_invariant(seed in 0u64..10_000, phase in 0.0f64..6.283) {
        let m = CovarianceModel::gaussian(1.0, 0.6).unwrap();
        let basis = LandauBasis::new(1.0, 2, 10).unwrap();
        let f = QuarticFunctional::new(&m, &basis).unwrap();
        let c = random_unit(10, seed);
        let rot: Vec<Complex64> = c.iter().map(|z| z * Complex64::from_polar(1.0, phase)).collect();
        let (a, b) = (f.gamma2(&c), f.gamma2(&rot));
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300));
        prop_assert!(a >= -1e-10);
    }

    #[test]
    fn sandwich_holds_for_poly_gaussian(tau in 0.2f64..3.0, ell in 0usize..4) {
        let m = CovarianceModel::poly_gaussian(1.0, tau).unwrap();
        let basis = LandauBasis::new(1.0, ell, 12).unwrap();
        let st = band_statistics(&m, &basis, VariationalOptions { restarts: 2, ..Default::default() }).unwrap();
        prop_assert!(st.satisfies_sandwich(Some(1.0), 1e-8), "{:?}", st);
    }
}
