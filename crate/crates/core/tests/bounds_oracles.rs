//! Bound curves and reference densities against independent evaluations.

use std::f64::consts::PI;

use landau_dos::bands::{gamma2_closed_form, VariationalOptions};
use landau_dos::bounds::*;
use landau_dos::covariance::{c_mu, CovarianceModel, MuChoice};
use landau_dos::landau::LandauBasis;
use landau_dos::Error;
use proptest::prelude::*;

/// Composite Simpson rule on `[a, b]` with `2m` panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / (2 * m) as f64;
    let mut s = f(a) + f(b);
    for i in 1..2 * m {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn wegner_reference_is_normalized() {
    let sigma0 = 0.8;
    // the tail beyond 12σ_0 carries ≈ e^{-144} of the mass
    let total = simpson(|e| reference_wegner(sigma0, e).unwrap(), -12.0 * sigma0, 12.0 * sigma0, 20_000);
    assert!((total - 1.0).abs() < 1e-8, "{total}");
}

#[test]
fn wegner_value_at_zero() {
    for sigma0 in [0.3, 1.0, 5.0] {
        let v = reference_wegner(sigma0, 0.0).unwrap();
        let e = 2.0 / (PI.powf(1.5) * sigma0);
        assert!((v - e).abs() <= 1e-10 * e);
    }
}

#[test]
fn wegner_cdf_integrates_density() {
    let r = ReferenceDensity::new(ReferenceKind::WegnerExactL0, 1.0).unwrap();
    for e in [-3.0, -1.0, 0.4, 2.5] {
        let direct = 0.5 + simpson(|x| reference_wegner(1.0, x).unwrap(), 0.0, e, 4000);
        assert!((r.cdf(e) - direct).abs() < 1e-10, "{e}: {} vs {direct}", r.cdf(e));
    }
}

#[test]
fn wegner_tail_matches_original_form_at_the_crossover() {
    // direct formula with e^{η²} and ∫_0^η e^{ξ²} by quadrature, just inside the crossover
    let eta: f64 = 7.5;
    let integral = simpson(|x| (x * x).exp(), 0.0, eta, 200_000);
    let x = 2.0 / PI.sqrt() * integral;
    let direct = 2.0 / PI.powf(1.5) * (eta * eta).exp() / (1.0 + x * x);
    let v = reference_wegner(1.0, eta).unwrap();
    assert!((v - direct).abs() < 1e-8 * direct, "{v} vs {direct}");
}

#[test]
fn semielliptic_moments() {
    let sigma0 = 1.7;
    // E = 2σ_0 sin θ removes the square-root endpoints
    let moment = |p: i32| {
        simpson(
            |t| {
                let e = 2.0 * sigma0 * t.sin();
                reference_semielliptic(sigma0, e).unwrap() * e.powi(p) * 2.0 * sigma0 * t.cos()
            },
            -PI / 2.0,
            PI / 2.0,
            2000,
        )
    };
    assert!((moment(0) - 1.0).abs() < 1e-10);
    assert!((moment(2) - sigma0 * sigma0).abs() < 1e-10 * sigma0 * sigma0);
    assert!((reference_semielliptic(sigma0, 0.0).unwrap() - 1.0 / (PI * sigma0)).abs() < 1e-15);
}

#[test]
fn constant_covariance_is_the_equality_case() {
    let c0 = 2.3;
    let m = CovarianceModel::constant(c0).unwrap();
    let mu = MuChoice::PointMass { weight: None };
    let exact = |e: f64| (-e * e / (2.0 * c0)).exp() / (2.0 * PI * c0).sqrt();
    let curves = [
        bound_gaussian_cmu(&m, &mu, 1.0, 2).unwrap(),
        bound_gaussian_sigma(&m, 1.0, 2).unwrap(),
        bound_gaussian_boehm(&m, 1.0, 2).unwrap(),
    ];
    let flat = bound_wegner_flat(&m, &mu, 1.0, 2).unwrap();
    assert!((flat.evaluate(3.0) - exact(0.0)).abs() < 1e-12);
    for c in curves {
        for e in [-2.0, 0.0, 0.7, 4.0] {
            assert!((c.evaluate(e) - exact(e)).abs() < 1e-12 * exact(0.0), "{:?}", c.kind);
        }
    }
}

#[test]
fn gaussian_lowest_level_matches_closed_form_estimate() {
    for bt in [0.5, 4.0, 20.0] {
        let c0 = 1.3;
        let m = CovarianceModel::gaussian(c0, f64::sqrt(bt)).unwrap();
        let expected = ((bt + 2.0) / bt).sqrt() / (2.0 * PI * c0).sqrt();
        let cmu = bound_gaussian_cmu(&m, &MuChoice::CoherentDensity { ell: 0 }, 1.0, 0).unwrap();
        let boehm = bound_gaussian_boehm(&m, 1.0, 0).unwrap();
        for c in [cmu, boehm] {
            assert!((c.prefactor - expected).abs() < 1e-8 * expected, "bt={bt}: {} vs {expected}", c.prefactor);
            let e: f64 = 1.1;
            let v = expected * (-e * e / (2.0 * c0)).exp();
            assert!((c.evaluate(e) - v).abs() < 1e-8 * v);
        }
    }
}

#[test]
fn sigma_form_dominates_coherent_form() {
    let m = CovarianceModel::gaussian(1.0, 1.2).unwrap();
    for ell in 0..4 {
        let s = bound_gaussian_sigma(&m, 1.0, ell).unwrap();
        let c = bound_gaussian_cmu(&m, &MuChoice::CoherentDensity { ell }, 1.0, ell).unwrap();
        for e in [-3.0, -1.0, 0.0, 0.5, 2.0] {
            assert!(c.evaluate(e) <= s.evaluate(e) * (1.0 + 1e-12), "ell={ell} E={e}");
        }
    }
}

#[test]
fn bessel_null_point_is_degenerate() {
    let m = CovarianceModel::bessel_oscillating(1.0, 1.0).unwrap();
    let err = bound_gaussian_sigma(&m, 1.0, 1).unwrap_err();
    assert!(matches!(err, Error::DegenerateBand { ell: 1, .. }));
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn flat_bound_is_at_most_the_gaussian_bound_at_zero() {
    let m = CovarianceModel::gaussian(1.0, 0.9).unwrap();
    let mus = [
        MuChoice::PointMass { weight: None },
        MuChoice::CoherentDensity { ell: 1 },
        MuChoice::GaussianDensity { width: 0.5 },
    ];
    for mu in mus {
        let flat = bound_wegner_flat(&m, &mu, 1.0, 1).unwrap();
        let g = bound_gaussian_cmu(&m, &mu, 1.0, 1).unwrap();
        assert!(flat.evaluate(0.0) <= g.evaluate(0.0) * (1.0 + 1e-12), "{mu:?}");
        let norm = flat.constants.operator_norm.unwrap();
        let psi = g.constants.coherent_element.unwrap();
        assert!(norm >= psi - 1e-10);
    }
}

#[test]
fn point_mass_norm_is_attained_at_the_lowest_angular_momentum() {
    let m = CovarianceModel::gaussian(1.0, 1.0).unwrap();
    let cmu = c_mu(&m, &MuChoice::PointMass { weight: None }, 1.0).unwrap();
    let (norm, k) = operator_norm_cmu(&cmu, 0, DEFAULT_K_CAP).unwrap();
    assert_eq!(k, 0);
    assert!((norm - cmu.diagonal_element(0, 0).unwrap()).abs() < 1e-15);
    // ⟨φ_{0,0}, C φ_{0,0}⟩ = C(0) Bτ²/(Bτ²+1) for the unsmoothed covariance
    assert!((norm - 0.5).abs() < 1e-12);
}

#[test]
fn optimal_smoothing_attains_decay_energy() {
    // μ = |φ_{ℓ,-ℓ}|²/Γ_ℓ makes ‖P_ℓ C_μ P_ℓ‖ = Γ_ℓ
    let m = CovarianceModel::gaussian(1.0, 1.0).unwrap();
    for ell in 0..3usize {
        let mu = MuChoice::AngularDensity { ell, k: -(ell as i64) };
        let flat = bound_wegner_flat(&m, &mu, 1.0, ell).unwrap();
        let g2 = gamma2_closed_form(&m, 1.0, ell).unwrap();
        let e = 1.0 / (2.0 * PI * g2).sqrt();
        assert!((flat.prefactor - e).abs() < 1e-8 * e, "ell={ell}: {} vs {e}", flat.prefactor);
        let basis = LandauBasis::new(1.0, ell, 8).unwrap();
        let gam = bound_gaussian_gamma(&m, &basis, VariationalOptions::default()).unwrap();
        assert!((gam.prefactor - e).abs() < 1e-12 * e);
    }
}

#[test]
fn white_noise_wegner_density_is_below_flat_bound() {
    let alpha2 = 1.0;
    let b = 1.0;
    let m = CovarianceModel::delta_limit(alpha2).unwrap();
    let sigma0 = (alpha2 * b / (2.0 * PI)).sqrt();
    let basis = LandauBasis::new(b, 0, 4).unwrap();
    let flat = bound_gaussian_gamma(&m, &basis, VariationalOptions::default()).unwrap();
    assert!((flat.constants.gamma2.unwrap() - alpha2 * b / (4.0 * PI)).abs() < 1e-15);
    for i in -400..=400 {
        let e = i as f64 * 0.02 * sigma0;
        assert!(reference_wegner(sigma0, e).unwrap() <= flat.evaluate(e));
    }
}

#[test]
fn white_noise_decay_bound_grows_like_quarter_power() {
    let alpha2 = 2.0;
    let m = CovarianceModel::delta_limit(alpha2).unwrap();
    let sigma0 = (alpha2 / (2.0 * PI)).sqrt();
    let target = 1.0 / (PI.powf(0.25) * sigma0);
    let ratio = |ell: usize| {
        let g2 = gamma2_closed_form(&m, 1.0, ell).unwrap();
        1.0 / (2.0 * PI * g2).sqrt() / (ell as f64).powf(0.25)
    };
    let (a, b) = (ratio(64), ratio(256));
    assert!((a - target).abs() < 0.2 * target && (b - target).abs() < 0.2 * target);
    assert!((b - target).abs() < (a - target).abs());
}

#[test]
fn gamma_bound_rejects_sign_changing_covariance() {
    let m = CovarianceModel::bessel_oscillating(1.0, 2.0).unwrap();
    let basis = LandauBasis::new(1.0, 0, 4).unwrap();
    assert!(matches!(
        bound_gaussian_gamma(&m, &basis, VariationalOptions::default()),
        Err(Error::PositivityViolation { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn curves_are_even_and_nonnegative(tau in 0.3f64..3.0, ell in 0usize..3, e in -6.0f64..6.0) {
        let m = CovarianceModel::gaussian(1.0, tau).unwrap();
        let c = bound_gaussian_boehm(&m, 1.0, ell).unwrap();
        let s = bound_gaussian_sigma(&m, 1.0, ell).unwrap();
        for curve in [c, s] {
            prop_assert!(curve.evaluate(e) >= 0.0);
            prop_assert_eq!(curve.evaluate(e), curve.evaluate(-e));
        }
    }

    #[test]
    fn references_are_even(sigma0 in 0.1f64..5.0, e in -20.0f64..20.0) {
        let w = reference_wegner(sigma0, e).unwrap();
        prop_assert!(w >= 0.0);
        prop_assert_eq!(w, reference_wegner(sigma0, -e).unwrap());
        prop_assert_eq!(reference_semielliptic(sigma0, e).unwrap(), reference_semielliptic(sigma0, -e).unwrap());
    }
}
