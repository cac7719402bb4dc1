//! Band statistics of a single Landau level: the variance `σ_ℓ²`, the decay
//! energy `Γ_ℓ²` in closed form, and `Γ_ℓ²` as a numerical maximum of the
//! quartic functional `γ²(φ) = E[⟨φ, Vφ⟩²]` over the truncated eigenspace.
//!
//! ## Structure of the quartic functional
//!
//! In the angular-momentum basis, `E[V_{jk} V_{j'k'}^*]` vanishes unless the
//! offsets `k - j` and `k' - j'` agree (isotropy). For offset `d ≥ 0` and lower
//! guiding-center indices `m, m'` the remaining block is real symmetric,
//! `Ā^{(d)}_{mm'} = ∫ C̃ I^{(d)}_m I^{(d)}_{m'}`, with the radial form factors of
//! [`crate::landau::plane_wave_form_factor`]. Writing `y^{(d)}_m = c_m^* c_{m+d}`,
//!
//! `γ²(c) = Σ_{d} (2 - δ_{d0}) Σ_{mm'} Ā^{(d)}_{mm'} y_m conj(y_{m'})`.
//!
//! The blocks are integrated exactly by a Gauss–Laguerre rule because every
//! integrand is `e^{-2u}` times a polynomial in `u = |k|²/2B`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::{CovarianceKind, CovarianceModel};
use crate::landau::{GuidingCenterTable, LandauBasis};
use crate::specfun::{legendre, ln_factorial, normalized_laguerre};
use crate::{Error, Result};

/// Largest truncation for which the block tensor is materialized.
pub const TENSOR_MAX_N: usize = 64;

/// How a band quantity was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    SpectralQuadrature,
    Variational,
    /// `σ² = 0` forces `Γ² = 0`.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandStatistics {
    pub sigma2: f64,
    pub gamma2: f64,
    pub sigma2_method: Method,
    pub gamma2_method: Method,
}

impl BandStatistics {
    /// Checks `σ⁴/C(0) ≤ Γ² ≤ σ²` to `tol` (skipped without a finite `C(0)`).
    pub fn satisfies_sandwich(&self, c0: Option<f64>, tol: f64) -> bool {
        if self.sigma2 < -tol || self.gamma2 < -tol || self.gamma2 > self.sigma2 + tol {
            return false;
        }
        match c0 {
            Some(c0) => self.sigma2 * self.sigma2 / c0 <= self.gamma2 + tol,
            None => true,
        }
    }
}

/// Band variance `σ_ℓ² = ∫ C̃(d²k) e^{-u} L_ℓ(u)²`, `u = |k|²/2B`.
pub fn sigma2(model: &CovarianceModel, basis: &LandauBasis) -> Result<f64> {
    model.validate()?;
    if model.kind == CovarianceKind::DeltaLimit {
        let alpha2 = model.alpha2.expect("validated");
        return Ok(alpha2 * basis.b / (2.0 * std::f64::consts::PI));
    }
    let ell = basis.ell;
    model.spectral_expectation(basis.b, 1.0, ell + 8, |u| {
        let f = normalized_laguerre(ell, 0, u);
        f * f
    })
}

/// `Γ_ℓ²` in closed form for the Gaussian, white-noise and constant models.
///
/// Gaussian: `C(0) (Bτ²/(Bτ²+2))^{ℓ+1} P_ℓ(((Bτ²+1)²+1)/((Bτ²+1)²-1))`;
/// white noise: `(α²B/4π) (2ℓ)!/(ℓ! 2^ℓ)²`; constant: `C(0)`.
pub fn gamma2_closed_form(model: &CovarianceModel, b: f64, ell: usize) -> Result<f64> {
    model.validate()?;
    match model.kind {
        CovarianceKind::Gaussian => {
            let c0 = model.c0.expect("validated");
            let x = b * model.tau.expect("validated").powi(2);
            let y = (x + 1.0) * (x + 1.0);
            Ok(c0 * (x / (x + 2.0)).powi(ell as i32 + 1) * legendre(ell, (y + 1.0) / (y - 1.0)))
        }
        CovarianceKind::DeltaLimit => {
            let alpha2 = model.alpha2.expect("validated");
            let ln_ratio = ln_factorial(2 * ell)
                - 2.0 * ln_factorial(ell)
                - 2.0 * ell as f64 * std::f64::consts::LN_2;
            Ok(alpha2 * b / (4.0 * std::f64::consts::PI) * ln_ratio.exp())
        }
        CovarianceKind::Constant => Ok(model.c0.expect("validated")),
        _ => Err(Error::Unsupported(format!(
            "no closed-form decay energy for the {:?} covariance",
            model.kind
        ))),
    }
}

/// Spectral quadrature of order high enough to integrate every form-factor
/// product exactly.
fn tensor_rule(model: &CovarianceModel, basis: &LandauBasis) -> Result<crate::covariance::SpectralRule> {
    model.spectral_rule(basis.b, 2.0, basis.n + basis.ell + 8)
}

/// Form factors `I^{(d)}_m(u)` for all offsets at one `u`, in
/// [`GuidingCenterTable`] layout with the level factor `e^{-u/2} L_ℓ(u)` applied.
fn fill_form_factors(table: &mut GuidingCenterTable, ell: usize, u: f64) -> f64 {
    table.fill(u);
    normalized_laguerre(ell, 0, u)
}

/// Offset blocks `Ā^{(d)}` of the covariance tensor of the matrix entries.
#[derive(Debug, Clone)]
pub struct DecayTensor {
    pub basis: LandauBasis,
    /// `blocks[d]` has size `(n-d) × (n-d)`.
    pub blocks: Vec<DMatrix<f64>>,
}

impl DecayTensor {
    /// Assembles all blocks; limited to `n ≤ 64`.
    pub fn assemble(model: &CovarianceModel, basis: &LandauBasis) -> Result<Self> {
        if basis.n > TENSOR_MAX_N {
            return Err(Error::Unsupported(format!(
                "tensor storage is limited to n <= {TENSOR_MAX_N}; use the streaming evaluator"
            )));
        }
        model.validate()?;
        let n = basis.n;
        let rule = tensor_rule(model, basis)?;
        let pieces: Vec<Vec<DMatrix<f64>>> = rule
            .nodes
            .par_iter()
            .zip(rule.weights.par_iter())
            .filter(|(_, w)| **w != 0.0)
            .map(|(&u, &w)| {
                let mut table = GuidingCenterTable::new(n);
                let level = fill_form_factors(&mut table, basis.ell, u);
                (0..n)
                    .map(|d| {
                        let v = nalgebra::DVector::from_iterator(
                            n - d,
                            table.block(d).iter().map(|g| g * level),
                        );
                        &v * v.transpose() * w
                    })
                    .collect()
            })
            .collect();
        let mut blocks: Vec<DMatrix<f64>> = (0..n).map(|d| DMatrix::zeros(n - d, n - d)).collect();
        // summed in node order so the result does not depend on scheduling
        for piece in pieces {
            for (acc, p) in blocks.iter_mut().zip(piece) {
                *acc += p;
            }
        }
        Ok(Self { basis: *basis, blocks })
    }

    /// `E[V_{jk} V_{j'k'}^*]` for zero-based indices.
    pub fn entry(&self, j: usize, k: usize, jp: usize, kp: usize) -> Complex64 {
        let d = k as i64 - j as i64;
        if kp as i64 - jp as i64 != d {
            return Complex64::new(0.0, 0.0);
        }
        let du = d.unsigned_abs() as usize;
        let (m, mp) = if d >= 0 { (j, jp) } else { (k, kp) };
        // I_{jk} = (-1)^d I_{kj}; the sign enters twice and cancels
        Complex64::new(self.blocks[du][(m, mp)], 0.0)
    }

    /// `γ²(c)`.
    pub fn gamma2(&self, c: &[Complex64]) -> f64 {
        let n = self.basis.n;
        let mut total = 0.0;
        for d in 0..n {
            let y: Vec<Complex64> = (0..n - d).map(|m| c[m].conj() * c[m + d]).collect();
            let a = &self.blocks[d];
            let mut s = 0.0;
            for m in 0..n - d {
                let mut row = Complex64::new(0.0, 0.0);
                for mp in 0..n - d {
                    row += y[mp].conj() * a[(m, mp)];
                }
                s += (y[m] * row).re;
            }
            total += if d == 0 { s } else { 2.0 * s };
        }
        total
    }

    /// `B(c) c` with `B(c)_{m,m+d} = Σ_{m'} Ā^{(d)}_{mm'} conj(y^{(d)}_{m'})`.
    fn apply_b(&self, c: &[Complex64]) -> Vec<Complex64> {
        let n = self.basis.n;
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for d in 0..n {
            let a = &self.blocks[d];
            let y: Vec<Complex64> = (0..n - d).map(|m| c[m].conj() * c[m + d]).collect();
            for m in 0..n - d {
                let mut bmd = Complex64::new(0.0, 0.0);
                for mp in 0..n - d {
                    bmd += a[(m, mp)] * y[mp].conj();
                }
                out[m] += bmd * c[m + d];
                if d > 0 {
                    out[m + d] += bmd.conj() * c[m];
                }
            }
        }
        out
    }
}

/// Evaluates `γ²` and `B(c)c` node by node without storing the tensor.
#[derive(Debug, Clone)]
pub struct StreamingFunctional {
    basis: LandauBasis,
    rule: crate::covariance::SpectralRule,
}

impl StreamingFunctional {
    pub fn new(model: &CovarianceModel, basis: &LandauBasis) -> Result<Self> {
        model.validate()?;
        Ok(Self {
            basis: *basis,
            rule: tensor_rule(model, basis)?,
        })
    }

    /// Returns `(γ²(c), B(c)c)`.
    fn evaluate(&self, c: &[Complex64], want_gradient: bool) -> (f64, Vec<Complex64>) {
        let n = self.basis.n;
        let ell = self.basis.ell;
        let ys: Vec<Vec<Complex64>> = (0..n)
            .map(|d| (0..n - d).map(|m| c[m].conj() * c[m + d]).collect())
            .collect();
        let partial: Vec<(f64, Vec<Complex64>)> = self
            .rule
            .nodes
            .par_iter()
            .zip(self.rule.weights.par_iter())
            .filter(|(_, w)| **w != 0.0)
            .map(|(&u, &w)| {
                let mut table = GuidingCenterTable::new(n);
                let level = fill_form_factors(&mut table, ell, u);
                let mut value = 0.0;
                let mut grad = if want_gradient {
                    vec![Complex64::new(0.0, 0.0); n]
                } else {
                    Vec::new()
                };
                for d in 0..n {
                    let g = table.block(d);
                    let s: Complex64 = ys[d]
                        .iter()
                        .zip(g)
                        .map(|(y, gm)| y * (gm * level))
                        .sum();
                    let weight = if d == 0 { 1.0 } else { 2.0 };
                    value += weight * w * s.norm_sqr();
                    if want_gradient {
                        for m in 0..n - d {
                            let bmd = s.conj() * (w * g[m] * level);
                            grad[m] += bmd * c[m + d];
                            if d > 0 {
                                grad[m + d] += bmd.conj() * c[m];
                            }
                        }
                    }
                }
                (value, grad)
            })
            .collect();
        let mut value = 0.0;
        let mut grad = vec![Complex64::new(0.0, 0.0); n];
        for (v, g) in partial {
            value += v;
            for (a, b) in grad.iter_mut().zip(g) {
                *a += b;
            }
        }
        (value, grad)
    }

    pub fn gamma2(&self, c: &[Complex64]) -> f64 {
        self.evaluate(c, false).0
    }
}

/// The quartic functional through whichever representation fits `n`.
#[derive(Debug, Clone)]
pub enum QuarticFunctional {
    Tensor(DecayTensor),
    Streaming(StreamingFunctional),
}

impl QuarticFunctional {
    pub fn new(model: &CovarianceModel, basis: &LandauBasis) -> Result<Self> {
        if basis.n <= TENSOR_MAX_N {
            Ok(Self::Tensor(DecayTensor::assemble(model, basis)?))
        } else {
            Ok(Self::Streaming(StreamingFunctional::new(model, basis)?))
        }
    }

    pub fn streaming(model: &CovarianceModel, basis: &LandauBasis) -> Result<Self> {
        Ok(Self::Streaming(StreamingFunctional::new(model, basis)?))
    }

    pub fn n(&self) -> usize {
        match self {
            Self::Tensor(t) => t.basis.n,
            Self::Streaming(s) => s.basis.n,
        }
    }

    pub fn gamma2(&self, c: &[Complex64]) -> f64 {
        match self {
            Self::Tensor(t) => t.gamma2(c),
            Self::Streaming(s) => s.gamma2(c),
        }
    }

    fn value_and_gradient(&self, c: &[Complex64]) -> (f64, Vec<Complex64>) {
        match self {
            Self::Tensor(t) => (t.gamma2(c), t.apply_b(c)),
            Self::Streaming(s) => s.evaluate(c, true),
        }
    }
}

fn check_unit(c: &[Complex64]) -> Result<()> {
    let norm: f64 = c.iter().map(|z| z.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("coefficient vector has squared norm {norm}, not 1")));
    }
    Ok(())
}

/// `γ²(φ)` for `φ = Σ_m c_m φ_{ℓ, m-ℓ}`.
pub fn gamma_functional(
    model: &CovarianceModel,
    basis: &LandauBasis,
    coefficients: &[Complex64],
) -> Result<f64> {
    if coefficients.len() != basis.n {
        return Err(Error::Domain(format!(
            "{} coefficients for a basis of dimension {}",
            coefficients.len(),
            basis.n
        )));
    }
    check_unit(coefficients)?;
    Ok(QuarticFunctional::new(model, basis)?.gamma2(coefficients))
}

/// Settings of the fixed-point maximizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VariationalOptions {
    pub restarts: usize,
    pub tol: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for VariationalOptions {
    fn default() -> Self {
        Self {
            restarts: 8,
            tol: 1e-10,
            max_iterations: 10_000,
            seed: 0x6c61_6e64_6175,
        }
    }
}

/// Best point found by the maximizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationalState {
    pub coefficients: Vec<Complex64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub restarts: usize,
    /// `|⟨e_{-ℓ}, c⟩|`, the overlap with `φ_{ℓ,-ℓ}`.
    pub overlap_lowest: f64,
}

fn normalize(v: &mut [Complex64]) -> f64 {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|z| *z /= norm);
    }
    norm
}

/// One ascent run of `c ← normalize(B(c)c + s c)` from `start`.
///
/// The shift `s` starts at zero and is raised whenever a step would lower the
/// value, so the recorded values never decrease.
fn ascend(
    functional: &QuarticFunctional,
    mut c: Vec<Complex64>,
    tol: f64,
    max_iterations: usize,
) -> Result<Run> {
    let (mut value, mut grad) = functional.value_and_gradient(&c);
    let mut shift = 0.0;
    for iter in 1..=max_iterations {
        let mut attempts = 0;
        loop {
            let mut next: Vec<Complex64> = grad.iter().zip(&c).map(|(g, z)| g + z * shift).collect();
            if normalize(&mut next) == 0.0 {
                // B(c)c = 0: γ² vanishes on the whole orbit
                return Ok(Run { c, value, iterations: iter, converged: true });
            }
            let (next_value, next_grad) = functional.value_and_gradient(&next);
            if next_value >= value * (1.0 - 1e-15) - 1e-300 {
                assert!(next_value >= value - 1e-13 * value.abs(), "ascent step lowered the value");
                let change = (next_value - value).abs();
                c = next;
                grad = next_grad;
                let prev = value;
                value = next_value.max(prev);
                if change <= tol * value {
                    return Ok(Run { c, value, iterations: iter, converged: true });
                }
                break;
            }
            attempts += 1;
            shift = if shift == 0.0 { value } else { 2.0 * shift };
            if attempts > 60 {
                return Err(Error::Nonconvergence {
                    iterations: iter,
                    last_change: next_value - value,
                });
            }
        }
    }
    Ok(Run { c, value, iterations: max_iterations, converged: false })
}

struct Run {
    c: Vec<Complex64>,
    value: f64,
    iterations: usize,
    converged: bool,
}

/// Maximizes `γ²` over unit vectors of the truncated basis from
/// `options.restarts` seeded random starts; returns the best run.
pub fn gamma2_variational(
    model: &CovarianceModel,
    basis: &LandauBasis,
    options: VariationalOptions,
) -> Result<VariationalState> {
    if options.restarts == 0 || !(options.tol > 0.0) {
        return Err(Error::Config("restarts must be >= 1 and tol > 0".into()));
    }
    let functional = QuarticFunctional::new(model, basis)?;
    gamma2_variational_with(&functional, basis, options)
}

/// As [`gamma2_variational`] with a prepared functional.
pub fn gamma2_variational_with(
    functional: &QuarticFunctional,
    basis: &LandauBasis,
    options: VariationalOptions,
) -> Result<VariationalState> {
    let n = basis.n;
    // start 0 is φ_{ℓ,-ℓ}; random starts drift only slowly along the nearly
    // flat family of translated maximizers of the truncated problem
    let runs: Vec<Result<Run>> = (0..options.restarts)
        .into_par_iter()
        .map(|r| {
            let c = if r == 0 {
                let mut c = vec![Complex64::new(0.0, 0.0); n];
                c[0] = Complex64::new(1.0, 0.0);
                c
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
                rng.set_stream(r as u64);
                let mut c: Vec<Complex64> = (0..n)
                    .map(|_| {
                        let re: f64 = StandardNormal.sample(&mut rng);
                        let im: f64 = StandardNormal.sample(&mut rng);
                        Complex64::new(re, im)
                    })
                    .collect();
                normalize(&mut c);
                c
            };
            ascend(functional, c, options.tol, options.max_iterations)
        })
        .collect();
    let mut best: Option<Run> = None;
    let mut total_iterations = 0;
    let mut any_converged = false;
    for run in runs {
        let run = run?;
        total_iterations += run.iterations;
        any_converged |= run.converged;
        if best.as_ref().map_or(true, |b| run.value > b.value) {
            best = Some(run);
        }
    }
    if !any_converged {
        return Err(Error::Nonconvergence {
            iterations: total_iterations,
            last_change: f64::NAN,
        });
    }
    let Run { c, value, converged, .. } = best.expect("restarts >= 1");
    let overlap = c[0].norm();
    Ok(VariationalState {
        coefficients: c,
        value,
        iterations: total_iterations,
        converged,
        restarts: options.restarts,
        overlap_lowest: overlap,
    })
}

/// `σ_ℓ²` and `Γ_ℓ²` together: closed-form `Γ²` where available, the
/// variational maximum otherwise, and zero when the band is degenerate.
pub fn band_statistics(
    model: &CovarianceModel,
    basis: &LandauBasis,
    options: VariationalOptions,
) -> Result<BandStatistics> {
    let s2 = sigma2(model, basis)?;
    let sigma2_method = if model.kind == CovarianceKind::DeltaLimit {
        Method::ClosedForm
    } else {
        Method::SpectralQuadrature
    };
    let scale = model.c_zero().unwrap_or(s2).max(f64::MIN_POSITIVE);
    if s2 <= 1e-14 * scale {
        return Ok(BandStatistics {
            sigma2: s2.max(0.0),
            gamma2: 0.0,
            sigma2_method,
            gamma2_method: Method::Degenerate,
        });
    }
    let (gamma2, gamma2_method) = match gamma2_closed_form(model, basis.b, basis.ell) {
        Ok(v) => (v, Method::ClosedForm),
        Err(Error::Unsupported(_)) => (gamma2_variational(model, basis, options)?.value, Method::Variational),
        Err(e) => return Err(e),
    };
    Ok(BandStatistics {
        sigma2: s2,
        gamma2,
        sigma2_method,
        gamma2_method,
    })
}
