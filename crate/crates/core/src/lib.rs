//! Numerical laboratory for the restricted density of states of a single
//! Landau level broadened by a homogeneous Gaussian random potential.
//!
//! Units: ħ = m = charge = 1, so lengths are measured in units where the
//! magnetic length is `B^{-1/2}` and energies carry the units of the
//! potential.
//!
//! Layout:
//!
//! - [`specfun`]: Laguerre, Legendre, Bessel, Dawson, incomplete exponential
//!   and the truncated-projection profile `G_{ℓ,n}`.
//! - [`quad`]: Gauss rules and adaptive quadrature used throughout.
//! - [`landau`]: projection kernels, coherent states, the angular-momentum
//!   basis, magnetic translations and matrix elements.
//! - [`covariance`]: covariance models, spectral measures and the smoothed
//!   covariance `C_μ`.
//! - [`bands`]: band variance σ², decay energy Γ² and the quartic optimizer.
//! - [`bounds`]: analytic upper bounds and exact reference densities.
//! - [`mc`]: random-matrix Monte Carlo for the finite-n density of states.
//! - [`cli`]: experiment configuration, commands and file emitters.

pub mod bands;
pub mod bounds;
pub mod cli;
pub mod covariance;
mod error;
pub mod landau;
pub mod mc;
pub mod quad;
pub mod specfun;

pub use error::{Error, Result};
