//! The four subcommands. Each takes a resolved [`RunContext`], writes its
//! files into the output directory and returns what it wrote.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::output::{write_csv, write_json, write_text, Cell, CsvTable};
use crate::bands::{band_statistics, gamma2_closed_form, gamma2_variational, sigma2, BandStatistics};
use crate::bounds::{
    bound_gaussian_cmu, bound_gaussian_gamma, bound_gaussian_sigma, bound_wegner_flat, coherent_element,
    operator_norm_cmu, BoundCurve, BoundKind, ReferenceDensity, ReferenceKind, DEFAULT_K_CAP,
};
use crate::covariance::{c_mu, CovarianceKind, CovarianceModel};
use crate::mc::{simulate, write_raw_eigenvalues, DosHistogram, EnergyWindow, MomentSummary};
use crate::specfun::{g_tail_integral, GFunctionSpec};
use crate::{Error, Result};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const BOUNDS_CSV: &str = "bounds.csv";
pub const SUMMARY_JSON: &str = "summary.json";
pub const HISTOGRAM_CSV: &str = "dos_histogram.csv";
pub const MANIFEST_JSON: &str = "manifest.json";
pub const GAMMA_JSON: &str = "gamma.json";
pub const REPORT_CSV: &str = "report.csv";
pub const REPORT_JSON: &str = "report.json";
pub const REPORT_LONG_CSV: &str = "report_long.csv";
pub const PLOT_SCRIPT: &str = "plot_report.py";
pub const ERROR_JSON: &str = "error.json";

const BOUND_COLUMNS: [BoundKind; 4] =
    [BoundKind::WegnerFlat, BoundKind::GaussianCmu, BoundKind::GaussianSigma, BoundKind::GaussianGamma];
const WEGNER_COLUMN: &str = "wegner_exact";
const SEMI_ELLIPTIC_COLUMN: &str = "semi_elliptic";

/// A configuration with command-line overrides applied and its run id.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub config: ExperimentConfig,
    pub run_id: String,
}

impl RunContext {
    pub fn new(mut config: ExperimentConfig, out: Option<PathBuf>, seed: Option<u64>) -> Result<Self> {
        if let Some(dir) = out {
            config.outputs.dir = dir;
        }
        if let Some(seed) = seed {
            config.mc.seed = seed;
        }
        config.validate()?;
        let run_id = config.run_id();
        Ok(Self { config, run_id })
    }

    pub fn out_dir(&self) -> &Path {
        &self.config.outputs.dir
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out_dir().join(name)
    }

    fn ensure_out_dir(&self) -> Result<()> {
        std::fs::create_dir_all(self.out_dir()).map_err(|e| Error::io(self.out_dir(), e))
    }

    pub fn raw_eigenvalue_path(&self) -> PathBuf {
        self.path(&format!("eigenvalues-{}.bin", self.run_id))
    }
}

/// Reference densities that apply to the model, at scale `sigma`.
fn references(model: &CovarianceModel, ell: usize, sigma: f64) -> Result<Vec<(&'static str, ReferenceDensity)>> {
    if model.kind != CovarianceKind::DeltaLimit || !(sigma > 0.0) {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    if ell == 0 {
        out.push((WEGNER_COLUMN, ReferenceDensity::new(ReferenceKind::WegnerExactL0, sigma)?));
    }
    out.push((SEMI_ELLIPTIC_COLUMN, ReferenceDensity::new(ReferenceKind::SemiElliptic, sigma)?));
    Ok(out)
}

/// Bounds that do not apply to a model (no finite `C(0)`, sign-changing
/// covariance) are skipped; every other failure is fatal.
fn optional_bound(r: Result<BoundCurve>, skipped: &mut Vec<SkippedBound>, kind: BoundKind) -> Result<Option<BoundCurve>> {
    match r {
        Ok(c) => Ok(Some(c)),
        Err(e @ (Error::Unsupported(_) | Error::PositivityViolation { .. })) => {
            skipped.push(SkippedBound { kind, reason: e.to_string() });
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedBound {
    pub kind: BoundKind,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSummary {
    pub kind: BoundKind,
    pub prefactor: f64,
    pub decay2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub c0: Option<f64>,
    pub sigma2: f64,
    pub gamma2: Option<f64>,
    pub operator_norm: Option<f64>,
    /// `k` attaining `‖P_ℓ C_μ P_ℓ‖`.
    pub operator_norm_k: Option<i64>,
    pub coherent_element: Option<f64>,
    /// `s_{ℓ,n}`
    pub tail_integral: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsSummary {
    pub run_id: String,
    pub artifact_version: String,
    pub window: EnergyWindow,
    pub constants: DerivedConstants,
    pub bounds: Vec<BoundSummary>,
    pub skipped: Vec<SkippedBound>,
    /// Reference densities and the `σ_0` they are drawn at.
    pub references: Vec<(String, f64)>,
}

/// `bounds.csv` on the bin centers of the configured window, and `summary.json`.
pub fn cmd_bounds(ctx: &RunContext) -> Result<BoundsSummary> {
    let cfg = &ctx.config;
    let basis = cfg.basis()?;
    let (model, mu, b, ell) = (cfg.covariance, cfg.mu(), basis.b, basis.ell);
    let window = cfg.window()?;
    let mut skipped = Vec::new();
    let flat = bound_wegner_flat(&model, &mu, b, ell)?;
    let cmu = bound_gaussian_cmu(&model, &mu, b, ell)?;
    let sig = optional_bound(bound_gaussian_sigma(&model, b, ell), &mut skipped, BoundKind::GaussianSigma)?;
    let gam = optional_bound(bound_gaussian_gamma(&model, &basis, cfg.gamma), &mut skipped, BoundKind::GaussianGamma)?;
    let curves: Vec<Option<BoundCurve>> = vec![Some(flat), Some(cmu), sig, gam];

    let s2 = sigma2(&model, &basis)?;
    let refs = references(&model, ell, s2.max(0.0).sqrt())?;
    let energies = centers(&window);
    let mut header: Vec<&str> = vec!["E"];
    header.extend(BOUND_COLUMNS.iter().map(|k| k.name()));
    header.extend([WEGNER_COLUMN, SEMI_ELLIPTIC_COLUMN]);
    let rows: Vec<Vec<Cell>> = energies
        .iter()
        .map(|&e| {
            let mut row = vec![Cell::Float(e)];
            row.extend(curves.iter().map(|c| Cell::from(c.as_ref().map(|c| c.evaluate(e)))));
            for col in [WEGNER_COLUMN, SEMI_ELLIPTIC_COLUMN] {
                let v = refs.iter().find(|(n, _)| *n == col).map(|(_, r)| r.density(e));
                row.push(v.into());
            }
            row
        })
        .collect();

    let constants = DerivedConstants {
        c0: model.c_zero(),
        sigma2: s2,
        gamma2: curves[3].and_then(|c| c.constants.gamma2),
        operator_norm: curves[0].and_then(|c| c.constants.operator_norm),
        operator_norm_k: None,
        coherent_element: curves[1].and_then(|c| c.constants.coherent_element),
        tail_integral: g_tail_integral(GFunctionSpec::new(ell, basis.n)?)?,
    };
    let summary = BoundsSummary {
        run_id: ctx.run_id.clone(),
        artifact_version: ARTIFACT_VERSION.into(),
        window,
        constants,
        bounds: curves
            .iter()
            .flatten()
            .map(|c| BoundSummary { kind: c.kind, prefactor: c.prefactor, decay2: c.decay2 })
            .collect(),
        skipped,
        references: refs.iter().map(|(n, r)| (n.to_string(), r.sigma0)).collect(),
    };
    ctx.ensure_out_dir()?;
    write_csv(&ctx.path(BOUNDS_CSV), &ctx.run_id, &header, &rows)?;
    write_json(&ctx.path(SUMMARY_JSON), &summary)?;
    Ok(summary)
}

fn centers(window: &EnergyWindow) -> Vec<f64> {
    window.edges().windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramSummary {
    pub n: usize,
    pub realizations: usize,
    pub total_weight: f64,
    pub overflow_below: u64,
    pub overflow_above: u64,
    pub evenness_statistic: f64,
}

/// Constants of the model as configured and of the model actually sampled;
/// entries that cannot be computed carry the reason instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestConstants {
    pub sampled_model: CovarianceModel,
    pub sigma2_sampled: f64,
    pub sigma2: Option<f64>,
    pub gamma2: Option<f64>,
    pub operator_norm: Option<f64>,
    pub coherent_element: Option<f64>,
    /// `s_{ℓ,n}`
    pub tail_integral: Option<f64>,
    pub unavailable: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub run_id: String,
    pub seed: u64,
    pub started_at: String,
    pub finished_at: String,
    pub config: ExperimentConfig,
    pub window: EnergyWindow,
    pub constants: ManifestConstants,
    pub histogram: HistogramSummary,
    pub moments: MomentSummary,
    pub raw_eigenvalues: Option<String>,
}

fn note<T>(r: Result<T>, what: &str, unavailable: &mut Vec<(String, String)>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            unavailable.push((what.into(), e.to_string()));
            None
        }
    }
}

fn manifest_constants(cfg: &ExperimentConfig) -> Result<ManifestConstants> {
    let basis = cfg.basis()?;
    let model = cfg.covariance;
    let spec = cfg.ensemble();
    let sampled = spec.sampled_model()?;
    let mut un = Vec::new();
    let stats: Option<BandStatistics> = note(band_statistics(&model, &basis, cfg.gamma), "gamma2", &mut un);
    let cmu = note(c_mu(&model, &cfg.mu(), basis.b), "c_mu", &mut un);
    let (norm, psi) = match &cmu {
        Some(cm) => (
            note(operator_norm_cmu(cm, basis.ell, DEFAULT_K_CAP), "operator_norm", &mut un).map(|x| x.0),
            note(coherent_element(cm, basis.ell), "coherent_element", &mut un),
        ),
        None => (None, None),
    };
    let tail = note(GFunctionSpec::new(basis.ell, basis.n).and_then(g_tail_integral), "tail_integral", &mut un);
    Ok(ManifestConstants {
        sampled_model: sampled,
        sigma2_sampled: sigma2(&sampled, &basis)?,
        sigma2: stats.map(|s| s.sigma2),
        gamma2: stats.map(|s| s.gamma2),
        operator_norm: norm,
        coherent_element: psi,
        tail_integral: tail,
        unavailable: un,
    })
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// `dos_histogram.csv`, the optional raw eigenvalue dump, and `manifest.json`.
pub fn cmd_simulate(ctx: &RunContext) -> Result<RunManifest> {
    let started_at = now();
    let cfg = &ctx.config;
    let spec = cfg.ensemble();
    let window = cfg.window()?;
    let constants = manifest_constants(cfg)?;
    let sim = simulate(&spec, &window, cfg.outputs.raw_eigenvalues)?;
    let h = &sim.histogram;
    ctx.ensure_out_dir()?;
    write_csv(&ctx.path(HISTOGRAM_CSV), &ctx.run_id, &["E_center", "density", "stderr", "counts"], &histogram_rows(h))?;
    let raw = match &sim.eigenvalues {
        Some(values) => {
            let path = ctx.raw_eigenvalue_path();
            write_raw_eigenvalues(&path, spec.basis.n, spec.realizations, spec.seed, values)?;
            Some(path.file_name().expect("file name").to_string_lossy().into_owned())
        }
        None => None,
    };
    let manifest = RunManifest {
        artifact_version: ARTIFACT_VERSION.into(),
        run_id: ctx.run_id.clone(),
        seed: spec.seed,
        started_at,
        finished_at: now(),
        config: cfg.clone(),
        window,
        constants,
        histogram: HistogramSummary {
            n: h.n,
            realizations: h.realizations,
            total_weight: h.total_weight,
            overflow_below: h.overflow_below,
            overflow_above: h.overflow_above,
            evenness_statistic: h.evenness_statistic(),
        },
        moments: sim.moments,
        raw_eigenvalues: raw,
    };
    write_json(&ctx.path(MANIFEST_JSON), &manifest)?;
    Ok(manifest)
}

fn histogram_rows(h: &DosHistogram) -> Vec<Vec<Cell>> {
    h.centers()
        .iter()
        .enumerate()
        .map(|(p, &e)| vec![Cell::Float(e), Cell::Float(h.density[p]), Cell::Float(h.stderr[p]), Cell::Count(h.counts[p])])
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaReport {
    pub run_id: String,
    pub variational: f64,
    pub closed_form: Option<f64>,
    pub relative_gap: Option<f64>,
    pub sigma2: f64,
    pub c0: Option<f64>,
    /// `σ⁴/C(0) ≤ Γ² ≤ σ²` to `1e-8`.
    pub sandwich_holds: bool,
    pub iterations: usize,
    pub restarts: usize,
    pub converged: bool,
    /// `|⟨φ_{ℓ,-ℓ}, c⟩|` for the maximizer `c`.
    pub maximizer_overlap: f64,
    pub evaluator: String,
}

/// `gamma.json`: the variational `Γ_ℓ²` against the closed form when there is one.
pub fn cmd_gamma(ctx: &RunContext) -> Result<GammaReport> {
    let cfg = &ctx.config;
    let basis = cfg.basis()?;
    let model = cfg.covariance;
    let state = gamma2_variational(&model, &basis, cfg.gamma)?;
    let closed = match gamma2_closed_form(&model, basis.b, basis.ell) {
        Ok(v) => Some(v),
        Err(Error::Unsupported(_)) => None,
        Err(e) => return Err(e),
    };
    let s2 = sigma2(&model, &basis)?;
    let stats = BandStatistics {
        sigma2: s2,
        gamma2: state.value,
        sigma2_method: crate::bands::Method::SpectralQuadrature,
        gamma2_method: crate::bands::Method::Variational,
    };
    let report = GammaReport {
        run_id: ctx.run_id.clone(),
        variational: state.value,
        closed_form: closed,
        relative_gap: closed.map(|c| if c == 0.0 { (state.value - c).abs() } else { (state.value - c).abs() / c }),
        sigma2: s2,
        c0: model.c_zero(),
        sandwich_holds: stats.satisfies_sandwich(model.c_zero(), 1e-8),
        iterations: state.iterations,
        restarts: state.restarts,
        converged: state.converged,
        maximizer_overlap: state.overlap_lowest,
        evaluator: if basis.n <= crate::bands::TENSOR_MAX_N { "tensor" } else { "streaming" }.into(),
    };
    ctx.ensure_out_dir()?;
    write_json(&ctx.path(GAMMA_JSON), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domination {
    pub bound: String,
    pub pass: bool,
    /// Bins with `density > bound + slack·stderr`.
    pub violations: usize,
    /// Largest `(density - bound)/stderr` over bins.
    pub worst_excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentsTable {
    pub mean: f64,
    pub mean_stderr: f64,
    pub second: f64,
    pub second_stderr: f64,
    /// `σ_ℓ²` of the sampled model.
    pub sigma2: f64,
    pub second_over_sigma2: f64,
    pub evenness_statistic: f64,
    pub total_weight: f64,
    pub overflow_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub run_id: String,
    pub slack: f64,
    pub domination: Vec<Domination>,
    pub moments: MomentsTable,
    /// Kolmogorov–Smirnov distance to each applicable reference, drawn at the
    /// `σ_ℓ` of the sampled model.
    pub ks: Vec<(String, f64)>,
}

fn read_run_csv(ctx: &RunContext, name: &str) -> Result<CsvTable> {
    let t = CsvTable::read(&ctx.path(name))?;
    if t.run_id != ctx.run_id {
        return Err(Error::MissingInput(format!(
            "{name} belongs to run {} , not {}",
            t.run_id, ctx.run_id
        )));
    }
    Ok(t)
}

/// Joins `dos_histogram.csv` with `bounds.csv` of the same run.
pub fn cmd_report(ctx: &RunContext) -> Result<Report> {
    let bounds = read_run_csv(ctx, BOUNDS_CSV)?;
    let hist = read_run_csv(ctx, HISTOGRAM_CSV)?;
    let manifest_path = ctx.path(MANIFEST_JSON);
    let text = std::fs::read_to_string(&manifest_path)
        .map_err(|_| Error::MissingInput(format!("{} not found", manifest_path.display())))?;
    let manifest: RunManifest =
        serde_json::from_str(&text).map_err(|e| Error::MissingInput(format!("{}: {e}", manifest_path.display())))?;
    if manifest.run_id != ctx.run_id {
        return Err(Error::MissingInput(format!("manifest belongs to run {}", manifest.run_id)));
    }

    let energy = hist.dense_column("E_center")?;
    let density = hist.dense_column("density")?;
    let stderr = hist.dense_column("stderr")?;
    let counts: Vec<f64> = hist.dense_column("counts")?;
    let grid = bounds.dense_column("E")?;
    if grid.len() != energy.len() || grid.iter().zip(&energy).any(|(a, b)| (a - b).abs() > 1e-12 * (1.0 + a.abs())) {
        return Err(Error::MissingInput("bounds and histogram use different energy grids".into()));
    }
    let slack = ctx.config.report.slack;

    let mut header: Vec<String> = vec!["E_center".into(), "density".into(), "stderr".into()];
    let mut series: Vec<(String, Vec<Option<f64>>)> = Vec::new();
    let mut domination = Vec::new();
    for kind in BOUND_COLUMNS {
        let col = bounds.column(kind.name())?;
        if col.iter().all(Option::is_none) {
            continue;
        }
        let mut violations = 0;
        let mut worst = f64::NEG_INFINITY;
        for p in 0..energy.len() {
            let bound = col[p].unwrap_or(f64::INFINITY);
            if density[p] > bound + slack * stderr[p] {
                violations += 1;
            }
            let excess = if stderr[p] > 0.0 {
                (density[p] - bound) / stderr[p]
            } else if density[p] > bound {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            };
            worst = worst.max(excess);
        }
        domination.push(Domination { bound: kind.name().into(), pass: violations == 0, violations, worst_excess: worst });
        series.push((kind.name().into(), col));
    }

    let n = manifest.histogram.n as f64;
    let r = manifest.histogram.realizations as f64;
    let sigma2 = manifest.constants.sigma2_sampled;
    let refs = references(&ctx.config.covariance, ctx.config.landau.ell, sigma2.max(0.0).sqrt())?;
    let edges = manifest.window.edges();
    let mut cumulative = Vec::with_capacity(edges.len());
    let mut acc = manifest.histogram.overflow_below as f64;
    cumulative.push(acc / (n * r));
    for c in &counts {
        acc += c;
        cumulative.push(acc / (n * r));
    }
    let mut ks = Vec::new();
    for (name, reference) in &refs {
        let d = edges.iter().zip(&cumulative).map(|(&e, &h)| (h - reference.cdf(e)).abs()).fold(0.0, f64::max);
        ks.push((name.to_string(), d));
        series.push((name.to_string(), energy.iter().map(|&e| Some(reference.density(e))).collect()));
    }
    header.extend(series.iter().map(|(n, _)| n.clone()));

    let m = manifest.moments;
    let report = Report {
        run_id: ctx.run_id.clone(),
        slack,
        domination,
        moments: MomentsTable {
            mean: m.mean,
            mean_stderr: m.mean_stderr,
            second: m.second,
            second_stderr: m.second_stderr,
            sigma2,
            second_over_sigma2: m.second / sigma2,
            evenness_statistic: manifest.histogram.evenness_statistic,
            total_weight: manifest.histogram.total_weight,
            overflow_fraction: (manifest.histogram.overflow_below + manifest.histogram.overflow_above) as f64 / (n * r),
        },
        ks,
    };

    let rows: Vec<Vec<Cell>> = (0..energy.len())
        .map(|p| {
            let mut row = vec![Cell::Float(energy[p]), Cell::Float(density[p]), Cell::Float(stderr[p])];
            row.extend(series.iter().map(|(_, v)| Cell::from(v[p])));
            row
        })
        .collect();
    let mut long = Vec::new();
    for p in 0..energy.len() {
        long.push(vec![Cell::Float(energy[p]), Cell::Text("empirical".into()), Cell::Float(density[p]), Cell::Float(stderr[p])]);
    }
    for (name, v) in &series {
        for p in 0..energy.len() {
            if let Some(x) = v[p] {
                long.push(vec![Cell::Float(energy[p]), Cell::Text(name.clone()), Cell::Float(x), Cell::Empty]);
            }
        }
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(&ctx.path(REPORT_CSV), &ctx.run_id, &header_refs, &rows)?;
    write_csv(&ctx.path(REPORT_LONG_CSV), &ctx.run_id, &["E", "series", "value", "stderr"], &long)?;
    write_json(&ctx.path(REPORT_JSON), &report)?;
    write_text(&ctx.path(PLOT_SCRIPT), &plot_script())?;
    Ok(report)
}

fn plot_script() -> String {
    format!(
        r##"#!/usr/bin/env python3
"""Plots {REPORT_LONG_CSV}: empirical density with error bars, bounds and references."""
import csv
import sys
from collections import defaultdict

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "{REPORT_LONG_CSV}"
series = defaultdict(lambda: ([], [], []))
with open(path) as f:
    rows = [line for line in f if not line.startswith("#")]
for row in csv.DictReader(rows):
    e, v, s = series[row["series"]]
    e.append(float(row["E"]))
    v.append(float(row["value"]))
    s.append(float(row["stderr"]) if row["stderr"] else 0.0)

fig, ax = plt.subplots()
for name, (e, v, s) in series.items():
    if name == "empirical":
        ax.errorbar(e, v, yerr=s, fmt=".", ms=3, label=name)
    else:
        ax.plot(e, v, label=name)
ax.set_xlabel("E")
ax.set_ylabel("density")
ax.set_yscale("log")
ax.legend()
fig.savefig(path.rsplit(".", 1)[0] + ".png", dpi=150)
"##
    )
}

/// Machine-readable record of a failed command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub kind: String,
    pub exit_code: i32,
    pub message: String,
}

impl From<&Error> for ErrorRecord {
    fn from(e: &Error) -> Self {
        Self { kind: e.kind().into(), exit_code: e.exit_code(), message: e.to_string() }
    }
}

/// Best effort: writes `error.json` into `dir` if it can be created.
pub fn write_error_record(dir: &Path, e: &Error) -> bool {
    std::fs::create_dir_all(dir).is_ok() && write_json(&dir.join(ERROR_JSON), &ErrorRecord::from(e)).is_ok()
}
