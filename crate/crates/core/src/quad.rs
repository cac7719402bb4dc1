//! Gauss rules built from Jacobi matrices and adaptive Gauss–Kronrod
//! integration.
//!
//! Gauss rules come from the Golub–Welsch construction: the nodes are the
//! eigenvalues of the symmetric tridiagonal Jacobi matrix and the weights are
//! the squared first components of its eigenvectors. Only the first row of the
//! eigenvector matrix is carried through the implicit QL sweeps, so a rule of
//! order N costs O(N²).

use crate::{Error, Result};

/// Nodes and weights of a quadrature rule.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| if w == 0.0 { 0.0 } else { w * f(x) })
            .sum()
    }
}

/// Eigenvalues and first eigenvector components of a symmetric tridiagonal
/// matrix with diagonal `diag` and off-diagonal `off` (`off.len() == diag.len() - 1`).
fn jacobi_eigen(diag: &[f64], off: &[f64]) -> Result<GaussRule> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(off);
    let mut z = vec![0.0; n];
    z[0] = 1.0;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::QuadratureNonconvergence(format!(
                    "implicit QL stalled on a Jacobi matrix of order {n}"
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut pairs: Vec<(f64, f64)> = d.into_iter().zip(z.into_iter().map(|v| v * v)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (nodes, weights) = pairs.into_iter().unzip();
    Ok(GaussRule { nodes, weights })
}

/// Generalized Gauss–Laguerre rule for the weight `x^alpha e^{-x}` on `[0, ∞)`.
///
/// The weights are normalized to sum to one; multiply by `Γ(alpha + 1)` for the
/// unnormalized rule. Normalized weights underflow gracefully to zero for the
/// outermost nodes of large rules.
pub fn gauss_laguerre(order: usize, alpha: f64) -> Result<GaussRule> {
    if order == 0 {
        return Err(Error::Domain("Gauss rule of order zero".into()));
    }
    if alpha <= -1.0 {
        return Err(Error::Domain(format!("Laguerre weight exponent {alpha} <= -1")));
    }
    let diag: Vec<f64> = (0..order).map(|i| 2.0 * i as f64 + alpha + 1.0).collect();
    let off: Vec<f64> = (1..order)
        .map(|i| ((i as f64) * (i as f64 + alpha)).sqrt())
        .collect();
    jacobi_eigen(&diag, &off)
}

/// Gauss–Legendre rule on `[a, b]`.
pub fn gauss_legendre(order: usize, a: f64, b: f64) -> Result<GaussRule> {
    if order == 0 {
        return Err(Error::Domain("Gauss rule of order zero".into()));
    }
    let diag = vec![0.0; order];
    let off: Vec<f64> = (1..order)
        .map(|i| {
            let i = i as f64;
            i / (4.0 * i * i - 1.0).sqrt()
        })
        .collect();
    let mut rule = jacobi_eigen(&diag, &off)?;
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    for (x, w) in rule.nodes.iter_mut().zip(rule.weights.iter_mut()) {
        *x = mid + half * *x;
        *w *= 2.0 * half;
    }
    Ok(rule)
}

const GK_XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_3,
    0.949_107_912_342_758_524_526_189_684_047_9,
    0.864_864_423_359_769_072_789_712_788_640_9,
    0.741_531_185_599_394_439_863_864_773_280_8,
    0.586_087_235_467_691_130_294_144_845_693_0,
    0.405_845_151_377_397_166_906_606_412_076_9,
    0.207_784_955_007_898_467_600_689_403_773_2,
    0.0,
];
const GK_WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_20,
    0.104_790_010_322_250_183_839_876_322_541_5,
    0.140_653_259_715_525_918_745_189_590_510_2,
    0.169_004_726_639_267_902_826_583_426_598_6,
    0.190_350_578_064_785_409_913_256_402_421_0,
    0.204_432_940_075_298_892_414_161_999_234_6,
    0.209_482_141_084_727_828_012_999_174_891_7,
];
const GK_WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_1,
    0.279_705_391_489_276_667_901_467_771_423_8,
    0.381_830_050_505_118_944_950_369_775_488_98,
    0.417_959_183_673_469_387_755_102_040_816_3,
];

fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * GK_WGK[7];
    let mut gauss = fc * GK_WG[3];
    for j in 0..7 {
        let dx = h * GK_XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += GK_WGK[j] * s;
        if j % 2 == 1 {
            gauss += GK_WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) integration of `f` over `[a, b]`.
///
/// Subdivides until the summed error estimate is below
/// `max(abs_tol, rel_tol * |result|)`.
pub fn integrate_adaptive(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut intervals = vec![{
        let (v, e) = gk15(&mut f, a, b);
        (a, b, v, e)
    }];
    for _ in 0..20_000 {
        let total: f64 = intervals.iter().map(|s| s.2).sum();
        let err: f64 = intervals.iter().map(|s| s.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty interval list");
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
    Err(Error::QuadratureNonconvergence(format!(
        "adaptive Gauss-Kronrod on [{a}, {b}] exceeded its subdivision budget"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laguerre_rule_integrates_moments_exactly() {
        // ∫ x^k e^{-x} dx = k!
        let rule = gauss_laguerre(20, 0.0).unwrap();
        let mut fact = 1.0;
        for k in 0..30 {
            if k > 0 {
                fact *= k as f64;
            }
            let v = rule.integrate(|x| x.powi(k));
            assert!((v - fact).abs() <= 1e-12 * fact, "k={k}: {v} vs {fact}");
        }
    }

    #[test]
    fn generalized_laguerre_rule_matches_gamma_ratios() {
        // normalized weights: E[x^k] under Gamma(alpha+1) = (alpha+1)_k
        let alpha = 7.5;
        let rule = gauss_laguerre(16, alpha).unwrap();
        let mut poch = 1.0;
        for k in 0..10 {
            if k > 0 {
                poch *= alpha + k as f64;
            }
            let v = rule.integrate(|x| x.powi(k));
            assert!((v - poch).abs() <= 1e-12 * poch);
        }
    }

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        let rule = gauss_legendre(10, -1.0, 2.0).unwrap();
        let v = rule.integrate(|x| x.powi(19));
        let exact = (2f64.powi(20) - 1.0) / 20.0;
        assert!((v - exact).abs() <= 1e-10 * exact);
        assert!((rule.weights.iter().sum::<f64>() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn large_laguerre_rule_is_well_formed() {
        let rule = gauss_laguerre(300, 0.0).unwrap();
        assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
        assert!((rule.weights.iter().sum::<f64>() - 1.0).abs() < 1e-13);
        let v = rule.integrate(|x| (-x).exp());
        assert!((v - 0.5).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let v = integrate_adaptive(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-13, 1e-13).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((v - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn zero_order_is_rejected() {
        assert!(gauss_laguerre(0, 0.0).is_err());
        assert!(gauss_legendre(0, 0.0, 1.0).is_err());
    }
}
