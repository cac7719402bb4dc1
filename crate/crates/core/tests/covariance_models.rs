//! Covariance models, spectral measures and smoothed covariances.

use std::f64::consts::PI;

use landau_dos::covariance::*;
use landau_dos::landau::{radial_matrix_element, LandauBasis};
use landau_dos::Error;
use proptest::prelude::*;
use rand::SeedableRng;

#[test]
fn spectral_measure_transforms_back_to_covariance() {
    for m in [
        CovarianceModel::gaussian(1.3, 0.8).unwrap(),
        CovarianceModel::poly_gaussian(0.7, 1.5).unwrap(),
        CovarianceModel::bessel_oscillating(2.0, 1.1).unwrap(),
        CovarianceModel::constant(0.4).unwrap(),
    ] {
        for r in [0.0, 0.3, 1.0, 2.7] {
            let direct = m.evaluate_radial(r).unwrap();
            let back = m.inverse_transform(r).unwrap();
            assert!((direct - back).abs() < 1e-11, "{:?} r={r}: {direct} vs {back}", m.kind);
        }
    }
}

#[test]
fn spectral_mass_is_value_at_origin() {
    let m = CovarianceModel::poly_gaussian(1.7, 0.6).unwrap();
    let mass = m.radial_spectral_integral(|_| 1.0).unwrap();
    assert!((mass - 1.7).abs() < 1e-12);
    let d = CovarianceModel::delta_limit(1.0).unwrap();
    assert!(d.spectral_measure().is_improper());
    assert!(d.radial_spectral_integral(|_| 1.0).is_err());
}

#[test]
fn spectral_rule_matches_adaptive_route() {
    let m = CovarianceModel::gaussian(1.0, 1.3).unwrap();
    let b = 1.5;
    let h = |u: f64| (-u).exp() * (1.0 - u).powi(2);
    let rule = m.spectral_rule(b, 1.0, 20).unwrap();
    let v = rule.apply(h);
    let e = m.radial_spectral_integral(|k| h(k * k / (2.0 * b))).unwrap();
    assert!((v - e).abs() < 1e-12, "{v} vs {e}");
}

#[test]
fn surrogate_approaches_white_noise() {
    let d = CovarianceModel::delta_limit(2.0).unwrap();
    let s = d.delta_surrogate(1.0).unwrap();
    assert_eq!(s.kind, CovarianceKind::Gaussian);
    // ∫ C = 2π c0 τ² = α²
    assert!((2.0 * PI * s.c0.unwrap() * s.tau.unwrap().powi(2) - 2.0).abs() < 1e-12);
    assert!((s.tau.unwrap().powi(2) - DELTA_SURROGATE_BTAU2).abs() < 1e-15);
}

#[test]
fn poly_gaussian_changes_sign_but_its_smoothing_is_positive() {
    let m = CovarianceModel::poly_gaussian(1.0, 1.0).unwrap();
    assert!(m.evaluate_radial(2.0).unwrap() < 0.0);
    assert!(matches!(
        c_mu(&m, &MuChoice::PointMass { weight: None }, 1.0),
        Err(Error::PositivityViolation { .. })
    ));
    let cm = c_mu(&m, &MuChoice::GaussianDensity { width: 2.0 }, 1.0).unwrap();
    for r in [0.0, 1.0, 2.0, 4.0, 8.0] {
        assert!(cm.eval(r).unwrap() >= -1e-10);
    }
}

#[test]
fn smoothed_covariance_is_normalized() {
    // ∫ μ(d²y) C_μ(y) = 1, checked with the μ̂ route: ∫ C̃ μ̂² = 1
    let m = CovarianceModel::gaussian(1.0, 0.9).unwrap();
    for mu in [
        MuChoice::PointMass { weight: None },
        MuChoice::CoherentDensity { ell: 1 },
        MuChoice::GaussianDensity { width: 0.6 },
        MuChoice::AngularDensity { ell: 2, k: -2 },
    ] {
        let cm = c_mu(&m, &mu, 1.2).unwrap();
        let energy = m.radial_spectral_integral(|k| cm.mu_hat(k).powi(2)).unwrap();
        assert!((energy - 1.0).abs() < 1e-8, "{mu:?}: {energy}");
    }
}

#[test]
fn smoothed_gaussian_by_gaussian_has_closed_form() {
    // Gaussian C (width τ) smoothed by N e^{-|y|²/2w²}: C_μ(r) ∝ e^{-r²/2(τ²+w²)}
    let (tau, w) = (0.8, 0.5);
    let m = CovarianceModel::gaussian(1.0, tau).unwrap();
    let cm = c_mu(&m, &MuChoice::GaussianDensity { width: w }, 1.0).unwrap();
    let s2 = tau * tau + w * w;
    let ratio = cm.eval(1.3).unwrap() / cm.eval(0.0).unwrap();
    assert!((ratio - (-1.69 / (2.0 * s2)).exp()).abs() < 1e-11);
}

#[test]
fn diagonal_elements_match_radial_route() {
    // a point mass makes C_μ a multiple of C, still a radial function
    let m = CovarianceModel::gaussian(2.0, 0.7).unwrap();
    let cm = c_mu(&m, &MuChoice::PointMass { weight: None }, 1.0).unwrap();
    let basis = LandauBasis::new(1.0, 2, 8).unwrap();
    for k in [-2i64, 0, 3] {
        let direct = radial_matrix_element(&basis, k, k, |r| cm.eval(r).unwrap()).unwrap();
        let v = cm.diagonal_element(2, k).unwrap();
        assert!((direct - v).abs() < 1e-9, "k={k}: {direct} vs {v}");
    }
}

#[test]
fn sampled_wavenumbers_follow_the_spectral_measure() {
    let m = CovarianceModel::poly_gaussian(1.0, 0.9).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
    let n = 200_000;
    let h = |k: f64| (-0.3 * k * k).exp();
    let samples: Vec<f64> = (0..n).map(|_| h(m.sample_wavenumber(&mut rng).unwrap())).collect();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let sd = (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64 / n as f64).sqrt();
    let e = m.radial_spectral_integral(h).unwrap();
    assert!((mean - e).abs() < 4.0 * sd, "{mean} vs {e}");
}

#[test]
fn config_round_trip() {
    let m = CovarianceModel::bessel_oscillating(1.0, 2.0).unwrap();
    let text = serde_json::to_string(&m).unwrap();
    assert_eq!(serde_json::from_str::<CovarianceModel>(&text).unwrap(), m);
    let mu = MuChoice::CustomRadial { radii: vec![0.0, 1.0, 2.0], weights: vec![1.0, 0.5, 0.0] };
    let text = serde_json::to_string(&mu).unwrap();
    assert_eq!(serde_json::from_str::<MuChoice>(&text).unwrap(), mu);
    assert!(serde_json::from_str::<CovarianceModel>(r#"{"kind":"gaussian","c0":1,"tau":1,"tua":2}"#).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn covariance_is_positive_definite_on_random_points(
        tau in 0.3f64..2.0,
        pts in proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 2..7),
        coef in proptest::collection::vec(-1.0f64..1.0, 7),
    ) {
        // Bochner: Σ a_i a_j C(x_i - x_j) ≥ 0
        for m in [CovarianceModel::gaussian(1.0, tau).unwrap(), CovarianceModel::bessel_oscillating(1.0, tau).unwrap(), CovarianceModel::poly_gaussian(1.0, tau).unwrap()] {
            let mut q = 0.0;
            for (i, a) in pts.iter().enumerate() {
                for (j, b) in pts.iter().enumerate() {
                    let r = (a.0 - b.0).hypot(a.1 - b.1);
                    q += coef[i] * coef[j] * m.evaluate_radial(r).unwrap();
                }
            }
            prop_assert!(q >= -1e-12);
        }
    }
}
