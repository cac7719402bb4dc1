//! Experiment configuration files.
//!
//! TOML with one table per block; unknown keys are rejected. A `manifest.json`
//! written by `simulate` is accepted in place of the TOML file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bands::VariationalOptions;
use crate::covariance::{CovarianceModel, MuChoice};
use crate::landau::LandauBasis;
use crate::mc::{
    EnergyWindow, MatrixEnsembleSpec, SamplerKind, DEFAULT_BINS, DEFAULT_MODES, DEFAULT_WINDOW_SIGMAS,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LandauSection {
    #[serde(rename = "B")]
    pub b: f64,
    pub ell: usize,
    pub n: usize,
}

/// Histogram range: `±sigmas·σ_ℓ` of the sampled model, or explicit edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WindowSpec {
    Sigmas { sigmas: f64 },
    Range { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSection {
    pub sampler: SamplerKind,
    pub modes: usize,
    pub realizations: usize,
    pub seed: u64,
    pub window: WindowSpec,
    pub bins: usize,
}

impl Default for McSection {
    fn default() -> Self {
        Self {
            sampler: SamplerKind::SpectralField,
            modes: DEFAULT_MODES,
            realizations: 400,
            seed: 0,
            window: WindowSpec::Sigmas { sigmas: DEFAULT_WINDOW_SIGMAS },
            bins: DEFAULT_BINS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSection {
    /// A bin is dominated when `density ≤ bound + slack·stderr`.
    pub slack: f64,
}

impl Default for ReportSection {
    fn default() -> Self {
        Self { slack: 3.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub raw_eigenvalues: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), raw_eigenvalues: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub landau: LandauSection,
    pub covariance: CovarianceModel,
    /// Defaults to the coherent-state density of the configured level.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<MuChoice>,
    #[serde(default)]
    pub mc: McSection,
    #[serde(default)]
    pub gamma: VariationalOptions,
    #[serde(default)]
    pub report: ReportSection,
    #[serde(default)]
    pub outputs: OutputSection,
}

#[derive(Deserialize)]
struct ManifestConfig {
    config: ExperimentConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.resolve()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a TOML config, or the `config` block of a JSON manifest.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        if text.trim_start().starts_with('{') {
            let m: ManifestConfig =
                serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            let mut cfg = m.config;
            cfg.resolve()?;
            return Ok(cfg);
        }
        Self::from_toml(&text)
    }

    /// Fills defaults that depend on other fields and validates every block.
    fn resolve(&mut self) -> Result<()> {
        if self.mu.is_none() {
            self.mu = Some(MuChoice::CoherentDensity { ell: self.landau.ell });
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        self.basis()?;
        self.covariance.validate()?;
        self.mu().validate()?;
        self.ensemble().validate()?;
        if self.mc.bins < 10 {
            return Err(Error::Config(format!("at least 10 bins required, got {}", self.mc.bins)));
        }
        match self.mc.window {
            WindowSpec::Sigmas { sigmas } if !(sigmas > 0.0 && sigmas.is_finite()) => {
                return Err(Error::Config(format!("window sigmas {sigmas} must be positive")))
            }
            WindowSpec::Range { lo, hi } => {
                EnergyWindow::new(lo, hi, self.mc.bins)?;
            }
            _ => {}
        }
        if self.gamma.restarts == 0 || !(self.gamma.tol > 0.0) || self.gamma.max_iterations == 0 {
            return Err(Error::Config("gamma: restarts, tol and max_iterations must be positive".into()));
        }
        if !(self.report.slack >= 0.0 && self.report.slack.is_finite()) {
            return Err(Error::Config(format!("report slack {} must be >= 0", self.report.slack)));
        }
        Ok(())
    }

    pub fn basis(&self) -> Result<LandauBasis> {
        LandauBasis::new(self.landau.b, self.landau.ell, self.landau.n)
            .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn mu(&self) -> MuChoice {
        self.mu.clone().unwrap_or(MuChoice::CoherentDensity { ell: self.landau.ell })
    }

    pub fn ensemble(&self) -> MatrixEnsembleSpec {
        MatrixEnsembleSpec {
            basis: LandauBasis { b: self.landau.b, ell: self.landau.ell, n: self.landau.n },
            model: self.covariance,
            sampler: self.mc.sampler,
            modes: self.mc.modes,
            realizations: self.mc.realizations,
            seed: self.mc.seed,
        }
    }

    /// The histogram window; `σ_ℓ`-relative windows need a nondegenerate band.
    pub fn window(&self) -> Result<EnergyWindow> {
        match self.mc.window {
            WindowSpec::Range { lo, hi } => EnergyWindow::new(lo, hi, self.mc.bins),
            WindowSpec::Sigmas { sigmas } => {
                let spec = self.ensemble();
                let sigma = spec.sigma()?;
                let c0 = spec.sampled_model()?.c_zero().unwrap_or(sigma * sigma);
                if !(sigma * sigma > 1e-14 * c0) {
                    return Err(Error::DegenerateBand { ell: self.landau.ell, sigma2: sigma * sigma });
                }
                EnergyWindow::symmetric(sigmas * sigma, self.mc.bins)
            }
        }
    }

    /// Hex SHA-256 of the canonical JSON form; the output directory does not
    /// enter, so the same experiment has the same id wherever it is written.
    pub fn run_id(&self) -> String {
        let mut canonical = self.clone();
        canonical.outputs.dir = PathBuf::new();
        let json = serde_json::to_string(&canonical).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
