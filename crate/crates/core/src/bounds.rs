//! Upper bounds on the restricted density of states `w_ℓ` and the exact
//! reference densities they are compared against.
//!
//! Every bound has the shape `prefactor · e^{-E²/2C(0)}`, with the Gaussian
//! factor dropped for the energy-independent kinds and for white noise.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bands::{band_statistics, sigma2, VariationalOptions};
use crate::covariance::{c_mu, CMu, CovarianceKind, CovarianceModel, MuChoice};
use crate::landau::LandauBasis;
use crate::specfun::dawson;
use crate::{Error, Result};

/// Default hard cap on the angular momentum searched for `‖P_ℓ C_μ P_ℓ‖`.
pub const DEFAULT_K_CAP: i64 = 4096;

/// Length of the non-increasing run of diagonal elements that certifies the sup.
const DECAY_RUN: usize = 16;

/// Beyond this `|E|/σ_0` the Wegner density is evaluated in its tail form.
pub const WEGNER_ASYMPTOTIC_ETA: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// `1/(√(2π) ‖P_ℓ C_μ P_ℓ‖)`
    WegnerFlat,
    /// `e^{-E²/2C(0)} / (√(2π) ⟨ψ_{ℓ,0}, C_μ ψ_{ℓ,0}⟩)`
    GaussianCmu,
    /// `(C(0)/σ_ℓ²) e^{-E²/2C(0)} / √(2π C(0))`
    GaussianSigma,
    /// The Gaussian bound with `μ = |ψ_{ℓ,0}|²/γ(ψ_{ℓ,0})`.
    GaussianBoehm,
    /// `1/√(2π Γ_ℓ²)` for nonnegative covariances.
    GaussianGamma,
}

impl BoundKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundKind::WegnerFlat => "wegner_flat",
            BoundKind::GaussianCmu => "gaussian_cmu",
            BoundKind::GaussianSigma => "gaussian_sigma",
            BoundKind::GaussianBoehm => "gaussian_boehm",
            BoundKind::GaussianGamma => "gaussian_gamma",
        }
    }
}

/// Constants entering a bound; fields not used by a kind are `None`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub operator_norm: Option<f64>,
    pub coherent_element: Option<f64>,
    pub sigma2: Option<f64>,
    pub gamma2: Option<f64>,
    pub c0: Option<f64>,
}

/// An upper bound `E ↦ prefactor · e^{-E²/2·decay2}` on `w_ℓ(E)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCurve {
    pub kind: BoundKind,
    pub prefactor: f64,
    /// Gaussian decay energy squared; `None` for a flat curve.
    pub decay2: Option<f64>,
    pub constants: BoundConstants,
}

impl BoundCurve {
    pub fn evaluate(&self, energy: f64) -> f64 {
        match self.decay2 {
            Some(c) => self.prefactor * (-energy * energy / (2.0 * c)).exp(),
            None => self.prefactor,
        }
    }
}

/// `‖P_ℓ C_μ P_ℓ‖ = sup_{k ≥ -ℓ} ⟨φ_{ℓ,k}, C_μ φ_{ℓ,k}⟩` for radial `C_μ`.
///
/// The diagonal is scanned upward from `k = -ℓ`; the sup is accepted once
/// [`DECAY_RUN`] consecutive elements past the running maximum are
/// non-increasing. Returns the sup and the `k` attaining it.
pub fn operator_norm_cmu(cmu: &CMu, ell: usize, k_cap: i64) -> Result<(f64, i64)> {
    let start = -(ell as i64);
    let mut best = f64::NEG_INFINITY;
    let mut arg = start;
    let mut prev = f64::INFINITY;
    let mut run = 0usize;
    let mut k = start;
    while k <= k_cap {
        let v = cmu.diagonal_element(ell, k)?;
        if v > best {
            best = v;
            arg = k;
        }
        let slack = 1e-14 * best.abs().max(1e-300);
        if v <= prev + slack {
            run += 1;
        } else {
            run = 0;
        }
        if run >= DECAY_RUN && k - arg >= DECAY_RUN as i64 - 1 {
            return Ok((best, arg));
        }
        prev = v;
        k += 1;
    }
    Err(Error::NoCertifiedSup { k_max: k_cap })
}

/// `⟨ψ_{ℓ,0}, C_μ ψ_{ℓ,0}⟩`, the coherent state at the origin being `φ_{ℓ,0}`.
pub fn coherent_element(cmu: &CMu, ell: usize) -> Result<f64> {
    cmu.diagonal_element(ell, 0)
}

fn gaussian_factor(model: &CovarianceModel) -> Option<f64> {
    model.c_zero()
}

pub fn bound_wegner_flat(model: &CovarianceModel, mu: &MuChoice, b: f64, ell: usize) -> Result<BoundCurve> {
    let cmu = c_mu(model, mu, b)?;
    let (norm, _) = operator_norm_cmu(&cmu, ell, DEFAULT_K_CAP)?;
    Ok(BoundCurve {
        kind: BoundKind::WegnerFlat,
        prefactor: 1.0 / ((2.0 * PI).sqrt() * norm),
        decay2: None,
        constants: BoundConstants {
            operator_norm: Some(norm),
            c0: model.c_zero(),
            ..Default::default()
        },
    })
}

fn gaussian_from_cmu(kind: BoundKind, model: &CovarianceModel, cmu: &CMu, ell: usize) -> Result<BoundCurve> {
    let psi = coherent_element(cmu, ell)?;
    if !(psi > 0.0) {
        return Err(Error::PositivityViolation { radius: 0.0, value: psi });
    }
    Ok(BoundCurve {
        kind,
        prefactor: 1.0 / ((2.0 * PI).sqrt() * psi),
        decay2: gaussian_factor(model),
        constants: BoundConstants {
            coherent_element: Some(psi),
            c0: model.c_zero(),
            ..Default::default()
        },
    })
}

/// Gaussian-shaped bound with prefactor `1/(√(2π)⟨ψ_{ℓ,0}, C_μ ψ_{ℓ,0}⟩)`.
/// Every [`MuChoice`] is radial, so only positivity can disqualify `μ`.
pub fn bound_gaussian_cmu(model: &CovarianceModel, mu: &MuChoice, b: f64, ell: usize) -> Result<BoundCurve> {
    let cmu = c_mu(model, mu, b)?;
    gaussian_from_cmu(BoundKind::GaussianCmu, model, &cmu, ell)
}

/// The Gaussian bound at the minimizing `μ = |ψ_{ℓ,0}|²/γ(ψ_{ℓ,0})`, whose
/// prefactor is `1/(√(2π) γ(ψ_{ℓ,0}))`.
pub fn bound_gaussian_boehm(model: &CovarianceModel, b: f64, ell: usize) -> Result<BoundCurve> {
    let cmu = c_mu(model, &MuChoice::CoherentDensity { ell }, b)?;
    gaussian_from_cmu(BoundKind::GaussianBoehm, model, &cmu, ell)
}

pub fn bound_gaussian_sigma(model: &CovarianceModel, b: f64, ell: usize) -> Result<BoundCurve> {
    let c0 = model.c_zero().ok_or_else(|| {
        Error::Unsupported("the σ-form of the Gaussian bound needs a finite C(0)".into())
    })?;
    let s2 = sigma2(model, &LandauBasis::new(b, ell, 1)?)?;
    if s2 <= 1e-14 * c0 {
        return Err(Error::DegenerateBand { ell, sigma2: s2 });
    }
    Ok(BoundCurve {
        kind: BoundKind::GaussianSigma,
        prefactor: c0 / s2 / (2.0 * PI * c0).sqrt(),
        decay2: Some(c0),
        constants: BoundConstants {
            sigma2: Some(s2),
            c0: Some(c0),
            ..Default::default()
        },
    })
}

/// Fails with a positivity violation unless `C(x) ≥ 0` everywhere.
pub fn check_nonnegative_covariance(model: &CovarianceModel) -> Result<()> {
    match model.kind {
        CovarianceKind::Gaussian | CovarianceKind::Constant | CovarianceKind::DeltaLimit => Ok(()),
        CovarianceKind::PolyGaussian | CovarianceKind::BesselOscillating => {
            let tau = model.tau.expect("validated");
            for i in 0..=4000 {
                let r = 12.0 * tau * i as f64 / 4000.0;
                let v = model.evaluate_radial(r)?;
                if v < 0.0 {
                    return Err(Error::PositivityViolation { radius: r, value: v });
                }
            }
            Ok(())
        }
    }
}

/// `1/√(2π Γ_ℓ²)`, with `Γ_ℓ²` in closed form or maximized over `basis`.
pub fn bound_gaussian_gamma(
    model: &CovarianceModel,
    basis: &LandauBasis,
    options: VariationalOptions,
) -> Result<BoundCurve> {
    check_nonnegative_covariance(model)?;
    let stats = band_statistics(model, basis, options)?;
    if !(stats.gamma2 > 0.0) {
        return Err(Error::DegenerateBand { ell: basis.ell, sigma2: stats.sigma2 });
    }
    Ok(BoundCurve {
        kind: BoundKind::GaussianGamma,
        prefactor: 1.0 / (2.0 * PI * stats.gamma2).sqrt(),
        decay2: None,
        constants: BoundConstants {
            sigma2: Some(stats.sigma2),
            gamma2: Some(stats.gamma2),
            c0: model.c_zero(),
            ..Default::default()
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceKind {
    /// Exact lowest-level density for white noise.
    WegnerExactL0,
    /// High-level limit for white noise.
    SemiElliptic,
}

/// A reference probability density with scale `σ_0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceDensity {
    pub kind: ReferenceKind,
    pub sigma0: f64,
}

impl ReferenceDensity {
    pub fn new(kind: ReferenceKind, sigma0: f64) -> Result<Self> {
        if !(sigma0 > 0.0 && sigma0.is_finite()) {
            return Err(Error::Domain(format!("reference scale {sigma0} must be positive")));
        }
        Ok(Self { kind, sigma0 })
    }

    pub fn density(&self, energy: f64) -> f64 {
        match self.kind {
            ReferenceKind::WegnerExactL0 => wegner_value(self.sigma0, energy).0,
            ReferenceKind::SemiElliptic => semielliptic_value(self.sigma0, energy),
        }
    }

    /// Cumulative distribution function.
    pub fn cdf(&self, energy: f64) -> f64 {
        let eta = energy / self.sigma0;
        match self.kind {
            ReferenceKind::WegnerExactL0 => {
                // w_0 dE = dX/(π(1+X²)) with X = (2/√π) e^{η²} F(η)
                let a = eta.abs();
                let inv_x = if a == 0.0 {
                    f64::INFINITY
                } else {
                    0.5 * PI.sqrt() * (-a * a).exp() / dawson(a)
                };
                let upper = inv_x.atan() / PI;
                if eta >= 0.0 {
                    1.0 - upper
                } else {
                    upper
                }
            }
            ReferenceKind::SemiElliptic => {
                let t = (eta / 2.0).clamp(-1.0, 1.0);
                0.5 + (t * (1.0 - t * t).sqrt() + t.asin()) / PI
            }
        }
    }
}

/// `w_0(E)` and whether the tail form was used.
fn wegner_value(sigma0: f64, energy: f64) -> (f64, bool) {
    let eta = energy / sigma0;
    let f = dawson(eta);
    let pref = 2.0 / (PI.powf(1.5) * sigma0);
    let e2 = (-eta * eta).exp();
    if eta.abs() > WEGNER_ASYMPTOTIC_ETA {
        (pref * e2 * PI / (4.0 * f * f), true)
    } else {
        (pref * e2 / (e2 * e2 + 4.0 / PI * f * f), false)
    }
}

/// Exact lowest-level density for white noise,
/// `(2/π^{3/2}σ_0) e^{η²} / (1 + [2π^{-1/2} ∫_0^η e^{ξ²}dξ]²)` with `η = E/σ_0`,
/// evaluated as `e^{-η²}/(e^{-2η²} + (4/π)F(η)²)` through the Dawson function.
pub fn reference_wegner(sigma0: f64, energy: f64) -> Result<f64> {
    reference_wegner_flagged(sigma0, energy).map(|(v, _)| v)
}

/// As [`reference_wegner`], also reporting whether `|η|` exceeded
/// [`WEGNER_ASYMPTOTIC_ETA`] and the tail form was used.
pub fn reference_wegner_flagged(sigma0: f64, energy: f64) -> Result<(f64, bool)> {
    ReferenceDensity::new(ReferenceKind::WegnerExactL0, sigma0)?;
    Ok(wegner_value(sigma0, energy))
}

fn semielliptic_value(sigma0: f64, energy: f64) -> f64 {
    let eta = energy / sigma0;
    let s = 4.0 - eta * eta;
    if s > 0.0 {
        s.sqrt() / (2.0 * PI * sigma0)
    } else {
        0.0
    }
}

/// Semicircle law of variance `σ_0²`, supported on `|E| ≤ 2σ_0`.
pub fn reference_semielliptic(sigma0: f64, energy: f64) -> Result<f64> {
    ReferenceDensity::new(ReferenceKind::SemiElliptic, sigma0)?;
    Ok(semielliptic_value(sigma0, energy))
}
