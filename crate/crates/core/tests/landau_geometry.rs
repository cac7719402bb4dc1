//! Landau-level states and matrix elements against position-space quadrature.

use std::f64::consts::PI;

use landau_dos::landau::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[test]
fn basis_is_orthonormal() {
    for ell in [0usize, 1, 3] {
        let basis = LandauBasis::new(1.4, ell, 6).unwrap();
        let grid = RadialGrid::for_basis(&basis, 2.0, 32).unwrap();
        for j in basis.k_values() {
            for k in basis.k_values() {
                let v = grid.integrate(|x| {
                    basis_function(&basis, j, x).unwrap().conj() * basis_function(&basis, k, x).unwrap()
                });
                let e = if j == k { 1.0 } else { 0.0 };
                assert!((v - c(e)).norm() < 1e-10, "ell={ell} j={j} k={k}: {v}");
            }
        }
    }
}

#[test]
fn projection_kernel_reproduces_itself() {
    // ∫ P(x, z) P(z, y) d²z = P(x, y)
    for ell in [0usize, 2] {
        let basis = LandauBasis::new(1.0, ell, 1).unwrap();
        let x = PlanePoint::new(0.4, -0.3);
        let y = PlanePoint::new(-0.5, 0.8);
        let grid = RadialGrid::new(14.0, 40, 20, 96).unwrap();
        let v = grid.integrate(|z| projection_kernel(&basis, x, z) * projection_kernel(&basis, z, y));
        let e = projection_kernel(&basis, x, y);
        assert!((v - e).norm() < 1e-9, "ell={ell}: {v} vs {e}");
    }
}

#[test]
fn projection_kernel_is_sum_over_basis() {
    // P(x, y) = Σ_k φ_k(x) φ_k(y)*, truncated where the states at x and y are negligible
    let basis = LandauBasis::new(1.0, 1, 80).unwrap();
    let x = PlanePoint::new(0.3, 0.2);
    let y = PlanePoint::new(-0.1, 0.6);
    let sum: Complex64 = basis
        .k_values()
        .map(|k| basis_function(&basis, k, x).unwrap() * basis_function(&basis, k, y).unwrap().conj())
        .sum();
    let e = projection_kernel(&basis, x, y);
    assert!((sum - e).norm() < 1e-12, "{sum} vs {e}");
}

#[test]
fn coherent_states_are_normalized_and_translate() {
    let basis = LandauBasis::new(2.0, 2, 1).unwrap();
    let x = PlanePoint::new(1.1, -0.7);
    let grid = RadialGrid::new(10.0, 40, 20, 96).unwrap();
    let norm = grid.integrate(|y| c(coherent_state(&basis, x, y).norm_sqr()));
    assert!((norm - c(1.0)).norm() < 1e-9);
    let origin = PlanePoint::new(0.0, 0.0);
    let moved = magnetic_translate(&basis, x, move |y| coherent_state(&basis, origin, y));
    for y in [PlanePoint::new(0.3, 0.1), PlanePoint::new(-1.0, 2.0)] {
        assert!((moved(y) - coherent_state(&basis, x, y)).norm() < 1e-13);
    }
    // the coherent state at the origin is the angular-momentum-zero state
    for y in [PlanePoint::new(0.3, 0.1), PlanePoint::new(-1.0, 2.0)] {
        assert!((coherent_state(&basis, origin, y) - basis_function(&basis, 0, y).unwrap()).norm() < 1e-13);
    }
}

#[test]
fn plane_wave_routes_agree() {
    let basis = LandauBasis::new(1.3, 2, 8).unwrap();
    let q = (0.7, -1.2);
    let u = (q.0 * q.0 + q.1 * q.1) / (2.0 * basis.b);
    let theta = f64::atan2(q.1, q.0);
    for j in basis.k_values() {
        for k in basis.k_values() {
            let quad = plane_wave_matrix_element(&basis, j, k, q).unwrap();
            let d = k - j;
            let phase = Complex64::from_polar(1.0, d as f64 * theta) * Complex64::i().powi(d.rem_euclid(4) as i32);
            let closed = phase * plane_wave_form_factor(&basis, j, k, u).unwrap();
            assert!((quad - closed).norm() < 1e-9, "j={j} k={k}: {quad} vs {closed}");
        }
    }
}

#[test]
fn plane_wave_matches_position_space_integral() {
    let basis = LandauBasis::new(1.0, 1, 4).unwrap();
    let q = (0.9, 0.4);
    let grid = RadialGrid::for_basis(&basis, 2.0, 64).unwrap();
    for (j, k) in [(-1, -1), (-1, 1), (0, 2), (2, 0)] {
        let direct = grid.integrate(|x| {
            let wave = Complex64::from_polar(1.0, q.0 * x.x1 + q.1 * x.x2);
            basis_function(&basis, j, x).unwrap().conj() * wave * basis_function(&basis, k, x).unwrap()
        });
        let v = plane_wave_matrix_element(&basis, j, k, q).unwrap();
        assert!((direct - v).norm() < 1e-9, "({j},{k}): {direct} vs {v}");
    }
}

#[test]
fn radial_element_matches_position_space_integral() {
    let basis = LandauBasis::new(0.8, 3, 5).unwrap();
    let f = |r: f64| (-(r * r) / 3.0).exp() * (1.0 + r * r) + 0.1 * (r * 0.7).cos();
    let grid = RadialGrid::for_basis(&basis, 2.0, 8).unwrap();
    for k in basis.k_values() {
        let direct = grid.integrate(|x| c(basis_function(&basis, k, x).unwrap().norm_sqr() * f(x.norm())));
        let v = radial_matrix_element(&basis, k, k, f).unwrap();
        assert!((direct.re - v).abs() < 1e-10, "k={k}: {} vs {v}", direct.re);
    }
}

#[test]
fn form_factor_completeness() {
    // Σ_m |⟨φ_j, e^{iqx} φ_m⟩|² over the whole level = e^{-u} L_ℓ(u)²
    let basis = LandauBasis::new(1.0, 2, 1).unwrap();
    let u = 1.7;
    let total: f64 = (-2..200).map(|m| plane_wave_form_factor(&basis, 1, m, u).unwrap().powi(2)).sum();
    let l2 = 1.0 - 2.0 * u + u * u / 2.0;
    assert!((total - (-u).exp() * l2 * l2).abs() < 1e-13);
    assert!((2.0 * PI * projection_kernel(&basis, PlanePoint::new(0.0, 0.0), PlanePoint::new(0.0, 0.0)).re - basis.b).abs() < 1e-13);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn kernel_is_hermitian(ell in 0usize..5, a in -3.0f64..3.0, b in -3.0f64..3.0, cc in -3.0f64..3.0, d in -3.0f64..3.0) {
        let basis = LandauBasis::new(1.2, ell, 1).unwrap();
        let (x, y) = (PlanePoint::new(a, b), PlanePoint::new(cc, d));
        let diff = projection_kernel(&basis, x, y) - projection_kernel(&basis, y, x).conj();
        prop_assert!(diff.norm() < 1e-14);
    }

    #[test]
    fn form_factor_symmetry(ell in 0usize..4, j in 0i64..10, k in 0i64..10, u in 0.0f64..20.0) {
        let basis = LandauBasis::new(1.0, ell, 12).unwrap();
        let (j, k) = (j - ell as i64, k - ell as i64);
        let a = plane_wave_form_factor(&basis, j, k, u).unwrap();
        let b = plane_wave_form_factor(&basis, k, j, u).unwrap();
        let sign = if (k - j).rem_euclid(2) == 1 { -1.0 } else { 1.0 };
        prop_assert!((a - sign * b).abs() < 1e-14);
        prop_assert!(a.abs() <= 1.0 + 1e-14);
    }
}
