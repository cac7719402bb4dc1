use thiserror::Error;

/// Every failure the library can report. The CLI maps these onto stable exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("positivity violation: smoothed covariance reaches {value:.3e} at r = {radius:.4}")]
    PositivityViolation { radius: f64, value: f64 },
    #[error("degenerate band: sigma^2 = {sigma2:.3e} for level {ell}")]
    DegenerateBand { ell: usize, sigma2: f64 },
    #[error("quadrature did not converge: {0}")]
    QuadratureNonconvergence(String),
    #[error("iteration did not converge after {iterations} steps (last relative change {last_change:.3e})")]
    Nonconvergence { iterations: usize, last_change: f64 },
    #[error("operator norm not certified: no monotone tail found up to k = {k_max}")]
    NoCertifiedSup { k_max: i64 },
    #[error("covariance factorization failed: pivot {pivot:.3e} below tolerance {tolerance:.3e}")]
    Factorization { pivot: f64, tolerance: f64 },
    #[error("eigensolver failed on realization {realization}")]
    Eigensolver { realization: u64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("missing input: {0}")]
    MissingInput(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Exit status used by the command-line front end.
    ///
    /// 2 invalid physics or configuration, 3 numerical nonconvergence, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_)
            | Error::Unsupported(_)
            | Error::PositivityViolation { .. }
            | Error::DegenerateBand { .. }
            | Error::Config(_) => 2,
            Error::Overflow(_)
            | Error::QuadratureNonconvergence(_)
            | Error::Nonconvergence { .. }
            | Error::NoCertifiedSup { .. }
            | Error::Factorization { .. }
            | Error::Eigensolver { .. } => 3,
            Error::MissingInput(_) | Error::Io { .. } => 4,
        }
    }

    /// Short machine-readable tag for error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Overflow(_) => "overflow",
            Error::Unsupported(_) => "unsupported",
            Error::PositivityViolation { .. } => "positivity_violation",
            Error::DegenerateBand { .. } => "degenerate_band",
            Error::QuadratureNonconvergence(_) => "quadrature_nonconvergence",
            Error::Nonconvergence { .. } => "nonconvergence",
            Error::NoCertifiedSup { .. } => "no_certified_sup",
            Error::Factorization { .. } => "factorization",
            Error::Eigensolver { .. } => "eigensolver",
            Error::Config(_) => "config",
            Error::MissingInput(_) => "missing_input",
            Error::Io { .. } => "io",
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
