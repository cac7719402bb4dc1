//! Covariance models of homogeneous, isotropic Gaussian random potentials,
//! their spectral measures, and the smoothed covariance `C_μ = μ * C`.
//!
//! Spectral integrals are written in the Landau variable `u = |k|²/2B`:
//! for a radial test function `h`, `∫ C̃(d²k) h(|k|)` becomes a one-dimensional
//! integral in `u` whose weight is `e^{-Bτ²u}` times a polynomial for the
//! Gaussian-type models. Integrands of the form `e^{-βu} p(u)` with polynomial
//! `p` are then integrated exactly by a Gauss–Laguerre rule.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use serde::{Deserialize, Serialize};

use crate::quad::{gauss_laguerre, gauss_legendre, integrate_adaptive};
use crate::specfun::{bessel_j, laguerre_recurrence};
use crate::{Error, Result};

/// Bτ² of the Gaussian stand-in used whenever the white-noise limit must be
/// sampled pointwise.
pub const DELTA_SURROGATE_BTAU2: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceKind {
    /// `C(x) = c0 e^{-|x|²/2τ²}`
    Gaussian,
    /// `C(x) = c0 J_0(√2|x|/τ)`
    BesselOscillating,
    /// `C(x) = c0 e^{-|x|²/2τ²} [1 - 7|x|²/16τ² + |x|⁴/32τ⁴]`
    PolyGaussian,
    /// White noise of strength `α²`: `C(x) = α² δ(x)`.
    DeltaLimit,
    /// Spatially constant potential, `C(x) = c0`.
    Constant,
}

/// A radial covariance function with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovarianceModel {
    pub kind: CovarianceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha2: Option<f64>,
}

fn positive(name: &str, v: Option<f64>) -> Result<f64> {
    match v {
        Some(x) if x > 0.0 && x.is_finite() => Ok(x),
        Some(x) => Err(Error::Config(format!("{name} = {x} must be positive and finite"))),
        None => Err(Error::Config(format!("{name} is required for this covariance kind"))),
    }
}

/// `w e^x` without overflowing when `w` is tiny and `x` large.
fn unweight(w: f64, x: f64) -> f64 {
    if x < 700.0 {
        w * x.exp()
    } else {
        (w.ln() + x).exp()
    }
}

impl CovarianceModel {
    pub fn gaussian(c0: f64, tau: f64) -> Result<Self> {
        Self::with(CovarianceKind::Gaussian, Some(c0), Some(tau), None)
    }

    pub fn bessel_oscillating(c0: f64, tau: f64) -> Result<Self> {
        Self::with(CovarianceKind::BesselOscillating, Some(c0), Some(tau), None)
    }

    pub fn poly_gaussian(c0: f64, tau: f64) -> Result<Self> {
        Self::with(CovarianceKind::PolyGaussian, Some(c0), Some(tau), None)
    }

    pub fn delta_limit(alpha2: f64) -> Result<Self> {
        Self::with(CovarianceKind::DeltaLimit, None, None, Some(alpha2))
    }

    pub fn constant(c0: f64) -> Result<Self> {
        Self::with(CovarianceKind::Constant, Some(c0), None, None)
    }

    fn with(kind: CovarianceKind, c0: Option<f64>, tau: Option<f64>, alpha2: Option<f64>) -> Result<Self> {
        let m = Self { kind, c0, tau, alpha2 };
        m.validate()?;
        Ok(m)
    }

    /// Checks that exactly the parameters of the kind are present and valid.
    pub fn validate(&self) -> Result<()> {
        use CovarianceKind::*;
        let (need_c0, need_tau, need_alpha) = match self.kind {
            Gaussian | BesselOscillating | PolyGaussian => (true, true, false),
            DeltaLimit => (false, false, true),
            Constant => (true, false, false),
        };
        for (name, need, v) in [
            ("c0", need_c0, self.c0),
            ("tau", need_tau, self.tau),
            ("alpha2", need_alpha, self.alpha2),
        ] {
            if need {
                positive(name, v)?;
            } else if v.is_some() {
                return Err(Error::Config(format!(
                    "{name} is not a parameter of the {:?} covariance",
                    self.kind
                )));
            }
        }
        Ok(())
    }

    /// `C(0)`; `None` for the white-noise limit.
    pub fn c_zero(&self) -> Option<f64> {
        match self.kind {
            CovarianceKind::DeltaLimit => None,
            _ => self.c0,
        }
    }

    fn c0v(&self) -> f64 {
        self.c0.unwrap_or(f64::NAN)
    }

    fn tauv(&self) -> f64 {
        self.tau.unwrap_or(f64::NAN)
    }

    fn alpha2v(&self) -> f64 {
        self.alpha2.unwrap_or(f64::NAN)
    }

    pub fn is_proper(&self) -> bool {
        self.kind != CovarianceKind::DeltaLimit
    }

    /// Gaussian model with Bτ² = 0.01 and `C(0) = α²/2πτ²`, the pointwise
    /// stand-in for the white-noise limit at field strength `b`.
    pub fn delta_surrogate(&self, b: f64) -> Result<Self> {
        if self.kind != CovarianceKind::DeltaLimit {
            return Err(Error::Unsupported("surrogate requested for a proper model".into()));
        }
        let tau2 = DELTA_SURROGATE_BTAU2 / b;
        Self::gaussian(self.alpha2v() / (2.0 * PI * tau2), tau2.sqrt())
    }

    /// `C(x)` at distance `r = |x|`.
    pub fn evaluate_radial(&self, r: f64) -> Result<f64> {
        use CovarianceKind::*;
        let c0 = self.c0v();
        let tau = self.tauv();
        Ok(match self.kind {
            Gaussian => c0 * (-r * r / (2.0 * tau * tau)).exp(),
            BesselOscillating => c0 * bessel_j(0, 2f64.sqrt() * r / tau),
            PolyGaussian => {
                let t = r * r / (tau * tau);
                c0 * (-0.5 * t).exp() * (1.0 - 7.0 * t / 16.0 + t * t / 32.0)
            }
            Constant => c0,
            DeltaLimit => {
                return Err(Error::Unsupported(
                    "the white-noise covariance has no pointwise values".into(),
                ))
            }
        })
    }

    pub fn evaluate(&self, x: crate::landau::PlanePoint) -> Result<f64> {
        self.evaluate_radial(x.norm())
    }

    pub fn spectral_measure(&self) -> SpectralMeasure {
        use CovarianceKind::*;
        match self.kind {
            Gaussian => SpectralMeasure::RadialDensity {
                profile: RadialProfile::Gaussian,
                c0: self.c0v(),
                tau: self.tauv(),
            },
            PolyGaussian => SpectralMeasure::RadialDensity {
                profile: RadialProfile::PolyGaussian,
                c0: self.c0v(),
                tau: self.tauv(),
            },
            BesselOscillating => SpectralMeasure::Circle {
                radius: 2f64.sqrt() / self.tauv(),
                mass: self.c0v(),
            },
            Constant => SpectralMeasure::Atom { mass: self.c0v() },
            DeltaLimit => SpectralMeasure::Flat {
                density: self.alpha2v() / (4.0 * PI * PI),
            },
        }
    }

    /// Quadrature nodes `u_i` and weights `W_i` with
    /// `∫ C̃(d²k) h(u) ≈ Σ W_i h(u_i)`, exact when `h(u) = e^{-βu} p(u)` with a
    /// polynomial `p` of degree below `2·order - 4`.
    pub fn spectral_rule(&self, b: f64, beta: f64, order: usize) -> Result<SpectralRule> {
        use CovarianceKind::*;
        match self.kind {
            Gaussian | PolyGaussian => {
                let c0 = self.c0v();
                let bt = b * self.tauv().powi(2);
                let rate = beta + bt;
                let rule = gauss_laguerre(order, 0.0)?;
                let poly = self.kind == PolyGaussian;
                let mut nodes = Vec::with_capacity(order);
                let mut weights = Vec::with_capacity(order);
                for (t, w) in rule.nodes.iter().zip(&rule.weights) {
                    let u = t / rate;
                    let s = bt * u;
                    let shape = if poly { (3.0 + 3.0 * s + s * s) / 8.0 } else { 1.0 };
                    nodes.push(u);
                    weights.push(if *w == 0.0 {
                        0.0
                    } else {
                        c0 * bt / rate * shape * unweight(*w, beta * u)
                    });
                }
                Ok(SpectralRule { nodes, weights })
            }
            DeltaLimit => {
                if !(beta > 0.0) {
                    return Err(Error::Unsupported(
                        "white-noise spectral integral needs a decaying integrand".into(),
                    ));
                }
                let rule = gauss_laguerre(order, 0.0)?;
                let pref = self.alpha2v() * b / (2.0 * PI * beta);
                let nodes: Vec<f64> = rule.nodes.iter().map(|t| t / beta).collect();
                let weights = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(t, w)| if *w == 0.0 { 0.0 } else { pref * unweight(*w, *t) })
                    .collect();
                Ok(SpectralRule { nodes, weights })
            }
            BesselOscillating => {
                let tau = self.tauv();
                Ok(SpectralRule {
                    nodes: vec![1.0 / (b * tau * tau)],
                    weights: vec![self.c0v()],
                })
            }
            Constant => Ok(SpectralRule {
                nodes: vec![0.0],
                weights: vec![self.c0v()],
            }),
        }
    }

    /// `∫ C̃(d²k) h(u)` with Gauss rules of doubling order (from `min_order`)
    /// until successive values agree to `1e-13` relative to `∫ C̃ |h|`.
    pub fn spectral_expectation(
        &self,
        b: f64,
        beta: f64,
        min_order: usize,
        h: impl Fn(f64) -> f64,
    ) -> Result<f64> {
        let mut order = min_order.max(8);
        let mut prev = self.spectral_rule(b, beta, order)?.apply(&h);
        if matches!(self.kind, CovarianceKind::BesselOscillating | CovarianceKind::Constant) {
            return Ok(prev);
        }
        for _ in 0..6 {
            order *= 2;
            let rule = self.spectral_rule(b, beta, order)?;
            let cur = rule.apply(&h);
            // cancellation limits the attainable accuracy to the L¹ mass of the sum
            let mass = rule.apply(|u| h(u).abs());
            if (cur - prev).abs() <= 1e-13 * cur.abs().max(mass) || (cur - prev).abs() < 1e-300 {
                return Ok(cur);
            }
            prev = cur;
        }
        Err(Error::QuadratureNonconvergence(format!(
            "spectral integral did not settle by Gauss order {order}"
        )))
    }

    /// `∫ C̃(d²k) h(|k|)` by adaptive quadrature in `s = τ²|k|²/2`; `h` must be
    /// bounded. Not available for the white-noise limit.
    pub fn radial_spectral_integral(&self, h: impl Fn(f64) -> f64) -> Result<f64> {
        use CovarianceKind::*;
        match self.kind {
            Gaussian | PolyGaussian => {
                let c0 = self.c0v();
                let tau = self.tauv();
                let poly = self.kind == PolyGaussian;
                let f = |s: f64| {
                    let shape = if poly { (3.0 + 3.0 * s + s * s) / 8.0 } else { 1.0 };
                    (-s).exp() * shape * h((2.0 * s).sqrt() / tau)
                };
                // substitute s = v² near the origin so the √s in |k| stays smooth
                let head = integrate_adaptive(|v| 2.0 * v * f(v * v), 0.0, 2.0, 1e-15, 1e-13)?;
                let mut total = head;
                let mut lo = 4.0;
                while lo < 64.0 {
                    total += integrate_adaptive(&f, lo, lo + 4.0, 1e-16, 1e-13)?;
                    lo += 4.0;
                }
                Ok(c0 * total)
            }
            BesselOscillating => Ok(self.c0v() * h(2f64.sqrt() / self.tauv())),
            Constant => Ok(self.c0v() * h(0.0)),
            DeltaLimit => Err(Error::Unsupported(
                "white-noise spectral measure has infinite mass".into(),
            )),
        }
    }

    /// Inverse Fourier transform of the spectral measure at radius `r`,
    /// which reproduces `C(r)` for proper models.
    pub fn inverse_transform(&self, r: f64) -> Result<f64> {
        self.radial_spectral_integral(|k| bessel_j(0, k * r))
    }

    /// Draws `|q|` from `C̃/C(0)`. The direction is uniform and drawn by the caller.
    pub fn sample_wavenumber<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        use CovarianceKind::*;
        let tau = self.tauv();
        let s: f64 = match self.kind {
            Gaussian => Exp1.sample(rng),
            PolyGaussian => {
                // density e^{-s}(3 + 3s + s²)/8 = mixture of Γ(1), Γ(2), Γ(3)
                // with weights 3/8, 3/8, 2/8
                let pick: f64 = rng.gen();
                let shape = if pick < 0.375 {
                    1.0
                } else if pick < 0.75 {
                    2.0
                } else {
                    3.0
                };
                Gamma::new(shape, 1.0).expect("valid shape").sample(rng)
            }
            BesselOscillating => return Ok(2f64.sqrt() / tau),
            Constant => return Ok(0.0),
            DeltaLimit => {
                return Err(Error::Unsupported(
                    "white noise cannot be sampled pointwise; use the surrogate".into(),
                ))
            }
        };
        Ok((2.0 * s).sqrt() / tau)
    }
}

/// Shape of an absolutely continuous radial spectral density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialProfile {
    Gaussian,
    PolyGaussian,
}

/// Spectral measure `C̃` with `C(x) = ∫ C̃(d²k) e^{ik·x}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralMeasure {
    /// Density per `d²k` depending on `|k|`.
    RadialDensity { profile: RadialProfile, c0: f64, tau: f64 },
    /// Mass spread uniformly on the circle `|k| = radius`.
    Circle { radius: f64, mass: f64 },
    /// Point mass at `k = 0`.
    Atom { mass: f64 },
    /// Constant density per `d²k`; infinite total mass.
    Flat { density: f64 },
}

impl SpectralMeasure {
    /// Density per `d²k` at `|k|`, for the absolutely continuous kinds.
    pub fn density(&self, k: f64) -> Option<f64> {
        match *self {
            SpectralMeasure::RadialDensity { profile, c0, tau } => {
                let s = 0.5 * tau * tau * k * k;
                let base = c0 * tau * tau / (2.0 * PI) * (-s).exp();
                Some(match profile {
                    RadialProfile::Gaussian => base,
                    RadialProfile::PolyGaussian => base * (3.0 + 3.0 * s + s * s) / 8.0,
                })
            }
            SpectralMeasure::Flat { density } => Some(density),
            _ => None,
        }
    }

    /// Total mass; `None` when improper.
    pub fn total_mass(&self) -> Option<f64> {
        match *self {
            SpectralMeasure::RadialDensity { c0, .. } => Some(c0),
            SpectralMeasure::Circle { mass, .. } | SpectralMeasure::Atom { mass } => Some(mass),
            SpectralMeasure::Flat { .. } => None,
        }
    }

    pub fn is_improper(&self) -> bool {
        matches!(self, SpectralMeasure::Flat { .. })
    }
}

/// Nodes in `u = |k|²/2B` and weights of a spectral quadrature rule.
#[derive(Debug, Clone)]
pub struct SpectralRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SpectralRule {
    pub fn apply(&self, h: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .filter(|(_, w)| **w != 0.0)
            .map(|(u, w)| w * h(*u))
            .sum()
    }
}

/// The smoothing measure `μ` in `C_μ(x) = ∫ μ(d²y) C(x - y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MuChoice {
    /// `μ = w δ_0`; `w` defaults to `1/√C(0)`.
    PointMass {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weight: Option<f64>,
    },
    /// `μ(d²x) = |ψ_{ℓ,0}(x)|² d²x / γ(ψ_{ℓ,0})`.
    CoherentDensity { ell: usize },
    /// `μ(d²x) = |φ_{ℓ,k}(x)|² d²x / γ(φ_{ℓ,k})`.
    AngularDensity { ell: usize, k: i64 },
    /// `μ(d²x) = N e^{-|x|²/2w²} d²x`, `N` fixed by the normalization.
    GaussianDensity { width: f64 },
    /// Tabulated radial density, linearly interpolated and zero beyond the
    /// last radius; rescaled to satisfy the normalization.
    CustomRadial { radii: Vec<f64>, weights: Vec<f64> },
}

impl MuChoice {
    pub fn validate(&self) -> Result<()> {
        match self {
            MuChoice::PointMass { weight: Some(w) } if !(w.is_finite() && *w != 0.0) => {
                Err(Error::Config(format!("point-mass weight {w} must be finite and nonzero")))
            }
            MuChoice::GaussianDensity { width } if !(*width > 0.0) => {
                Err(Error::Config(format!("density width {width} must be positive")))
            }
            MuChoice::AngularDensity { ell, k } if *k < -(*ell as i64) => {
                Err(Error::Config(format!("angular momentum {k} below -ell")))
            }
            MuChoice::CustomRadial { radii, weights } => {
                if radii.len() < 2 || radii.len() != weights.len() {
                    return Err(Error::Config(
                        "custom radial density needs >= 2 matching (radius, weight) pairs".into(),
                    ));
                }
                if radii[0] < 0.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Config("custom radii must be increasing and >= 0".into()));
                }
                if weights.iter().any(|w| !w.is_finite()) {
                    return Err(Error::Config("custom weights must be finite".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Fourier transform `μ̂(|k|) = ∫ μ(d²y) e^{-ik·y}` of a radial `μ`, before
/// normalization.
#[derive(Debug, Clone)]
enum MuHat {
    Constant(f64),
    /// `e^{-u} L_ℓ(u) L_m(u)`, `u = |k|²/2B`
    Angular { ell: usize, m: usize, b: f64 },
    /// `2π w² e^{-|k|²w²/2}`
    Gaussian { width: f64 },
    /// Hankel transform of a piecewise-linear profile.
    Tabulated { radii: Vec<f64>, weights: Vec<f64> },
}

impl MuHat {
    fn eval(&self, k: f64) -> f64 {
        match self {
            MuHat::Constant(w) => *w,
            MuHat::Angular { ell, m, b } => {
                let u = k * k / (2.0 * b);
                let (a1, s1) = laguerre_recurrence(*ell, 0.0, u);
                let (a2, s2) = laguerre_recurrence(*m, 0.0, u);
                a1 * a2 * (s1 + s2 - u).exp()
            }
            MuHat::Gaussian { width } => 2.0 * PI * width * width * (-0.5 * k * k * width * width).exp(),
            MuHat::Tabulated { radii, weights } => {
                let mut total = 0.0;
                for i in 0..radii.len() - 1 {
                    let (r0, r1) = (radii[i], radii[i + 1]);
                    let (w0, w1) = (weights[i], weights[i + 1]);
                    let rule = gauss_legendre(24, r0, r1).expect("fixed order");
                    total += rule.integrate(|r| {
                        let w = w0 + (w1 - w0) * (r - r0) / (r1 - r0);
                        w * bessel_j(0, k * r) * r
                    });
                }
                2.0 * PI * total
            }
        }
    }

    /// Exponential decay rate in `u = |k|²/2B` that a Gauss–Laguerre rule
    /// should absorb.
    fn decay_rate(&self, b: f64) -> f64 {
        match self {
            MuHat::Angular { .. } => 1.0,
            MuHat::Gaussian { width } => b * width * width,
            _ => 0.0,
        }
    }

    fn polynomial_degree(&self) -> usize {
        match self {
            MuHat::Angular { ell, m, .. } => ell + m,
            _ => 0,
        }
    }
}

/// A validated smoothed covariance `C_μ`.
#[derive(Debug, Clone)]
pub struct CMu {
    model: CovarianceModel,
    mu: MuChoice,
    b: f64,
    hat: MuHat,
    /// factor applied to `hat` so that `∫ μ C_μ = 1`
    scale: f64,
}

/// Builds `C_μ` and checks both smoothing conditions: `C_μ ≥ 0` on a radial
/// sample grid (to `-1e-10`) and `∫ μ(d²y) C_μ(y) = 1` (to `1e-8`).
///
/// `b` is the magnetic field, needed by the Landau-level densities.
pub fn c_mu(model: &CovarianceModel, mu: &MuChoice, b: f64) -> Result<CMu> {
    model.validate()?;
    mu.validate()?;
    if !(b > 0.0) {
        return Err(Error::Domain(format!("magnetic field {b} must be positive")));
    }
    let hat = match mu {
        MuChoice::PointMass { weight } => {
            if !model.is_proper() {
                return Err(Error::Unsupported(
                    "a point-mass smoothing of white noise has no pointwise values".into(),
                ));
            }
            MuHat::Constant(weight.unwrap_or(1.0))
        }
        MuChoice::CoherentDensity { ell } => MuHat::Angular { ell: *ell, m: *ell, b },
        MuChoice::AngularDensity { ell, k } => MuHat::Angular {
            ell: *ell,
            m: (*k + *ell as i64) as usize,
            b,
        },
        MuChoice::GaussianDensity { width } => MuHat::Gaussian { width: *width },
        MuChoice::CustomRadial { radii, weights } => MuHat::Tabulated {
            radii: radii.clone(),
            weights: weights.clone(),
        },
    };
    let mut out = CMu {
        model: *model,
        mu: mu.clone(),
        b,
        hat,
        scale: 1.0,
    };
    let norm = out.mu_energy()?;
    if !(norm > 0.0) {
        return Err(Error::PositivityViolation { radius: 0.0, value: norm });
    }
    out.scale = match mu {
        MuChoice::PointMass { weight: Some(_) } => 1.0,
        _ => 1.0 / norm.sqrt(),
    };
    let check = out.mu_energy()? * out.scale * out.scale;
    if (check - 1.0).abs() > 1e-8 {
        return Err(Error::Config(format!(
            "smoothing measure violates the normalization: ∫μC_μ = {check}"
        )));
    }
    out.check_positivity()?;
    Ok(out)
}

impl CMu {
    pub fn model(&self) -> &CovarianceModel {
        &self.model
    }

    pub fn mu(&self) -> &MuChoice {
        &self.mu
    }

    pub fn field(&self) -> f64 {
        self.b
    }

    /// Normalized `μ̂(|k|)`.
    pub fn mu_hat(&self, k: f64) -> f64 {
        self.scale * self.hat.eval(k)
    }

    /// Normalization factor applied to the unnormalized μ (the `N` or `1/γ`).
    pub fn normalization(&self) -> f64 {
        self.scale
    }

    /// `∫ C̃ |μ̂|²` of the unnormalized measure.
    fn mu_energy(&self) -> Result<f64> {
        if let MuHat::Constant(w) = self.hat {
            return match self.model.c_zero() {
                Some(c0) => Ok(w * w * c0),
                None => Err(Error::Unsupported("point mass on white noise".into())),
            };
        }
        let beta = 2.0 * self.hat.decay_rate(self.b);
        let hat = &self.hat;
        let b = self.b;
        match hat {
            MuHat::Angular { .. } | MuHat::Gaussian { .. } => self.model.spectral_expectation(
                b,
                beta,
                hat.polynomial_degree() + 8,
                |u| {
                    let v = hat.eval((2.0 * b * u).sqrt());
                    v * v
                },
            ),
            _ => self.model.radial_spectral_integral(|k| {
                let v = hat.eval(k);
                v * v
            }),
        }
    }

    /// `C_μ` at distance `r`.
    pub fn eval(&self, r: f64) -> Result<f64> {
        if let MuHat::Constant(w) = self.hat {
            return Ok(self.scale * w * self.model.evaluate_radial(r)?);
        }
        let b = self.b;
        let hat = &self.hat;
        let raw = match self.model.kind {
            CovarianceKind::DeltaLimit => {
                // α²/(4π²) ∫ d²k μ̂(k) J_0(kr) = α²B/(2π) ∫ du μ̂ J_0
                let rate = hat.decay_rate(b);
                if !(rate > 0.0) {
                    return Err(Error::Unsupported(
                        "white-noise smoothing needs a decaying μ̂".into(),
                    ));
                }
                let upper = 60.0 / rate;
                let f = |u: f64| {
                    let k = (2.0 * b * u).sqrt();
                    hat.eval(k) * bessel_j(0, k * r)
                };
                let panels = 16;
                let mut s = 0.0;
                for p in 0..panels {
                    let lo = upper * p as f64 / panels as f64;
                    s += integrate_adaptive(&f, lo, lo + upper / panels as f64, 1e-16, 1e-12)?;
                }
                self.model.alpha2v() * b / (2.0 * PI) * s
            }
            _ => self
                .model
                .radial_spectral_integral(|k| hat.eval(k) * bessel_j(0, k * r))?,
        };
        Ok(self.scale * raw)
    }

    /// Length scale over which `C_μ` varies.
    fn length_scale(&self) -> f64 {
        let mut l = 1.0 / self.b.sqrt();
        if let Some(t) = self.model.tau {
            l = l.max(t);
        }
        match &self.mu {
            MuChoice::GaussianDensity { width } => l.max(*width),
            MuChoice::CustomRadial { radii, .. } => l.max(*radii.last().expect("validated")),
            MuChoice::CoherentDensity { ell } | MuChoice::AngularDensity { ell, .. } => {
                l.max(((2 * ell + 2) as f64 / self.b).sqrt())
            }
            MuChoice::PointMass { .. } => l,
        }
    }

    fn check_positivity(&self) -> Result<()> {
        let reach = 8.0 * self.length_scale();
        for i in 0..=160 {
            let r = reach * i as f64 / 160.0;
            let v = self.eval(r)?;
            if v < -1e-10 {
                return Err(Error::PositivityViolation { radius: r, value: v });
            }
        }
        Ok(())
    }

    /// `⟨φ_{ℓ,k}, C_μ φ_{ℓ,k}⟩ = ∫ C̃ μ̂ e^{-u} L_ℓ(u) L_{k+ℓ}(u)`.
    pub fn diagonal_element(&self, ell: usize, k: i64) -> Result<f64> {
        if k < -(ell as i64) {
            return Err(Error::Domain(format!("angular momentum {k} below -ell")));
        }
        let m = (k + ell as i64) as usize;
        let b = self.b;
        let hat = &self.hat;
        let scale = self.scale;
        let beta = 1.0 + hat.decay_rate(b);
        let order = (ell + m + hat.polynomial_degree()) / 2 + 8;
        let f = |u: f64| {
            let (a1, s1) = laguerre_recurrence(ell, 0.0, u);
            let (a2, s2) = laguerre_recurrence(m, 0.0, u);
            scale * hat.eval((2.0 * b * u).sqrt()) * a1 * a2 * (s1 + s2 - u).exp()
        };
        match hat {
            MuHat::Tabulated { .. } => match self.model.kind {
                CovarianceKind::DeltaLimit => Err(Error::Unsupported(
                    "tabulated smoothing of white noise".into(),
                )),
                _ => self.model.radial_spectral_integral(|kk| f(kk * kk / (2.0 * b))),
            },
            _ => self.model.spectral_expectation(b, beta, order, f),
        }
    }
}
