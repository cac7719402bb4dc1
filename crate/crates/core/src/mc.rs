//! Monte Carlo engine for the truncated restricted random matrix
//! `V_{jk} = ⟨φ_{ℓ,j}, V φ_{ℓ,k}⟩`, `j, k` in the first `n` angular momenta.
//!
//! Two samplers:
//!
//! * `spectral_field`: `V(x) = √(2C(0)/M) Σ_m cos(q_m·x + θ_m)` with `q_m`
//!   drawn from `C̃/C(0)`. Its matrix elements are exact for the drawn modes;
//!   the field is Gaussian only as `M → ∞`.
//! * `exact_matrix`: exactly Gaussian entries with covariance given by the
//!   offset blocks of [`DecayTensor`], for `n ≤ 64`.
//!
//! Realization `r` draws from ChaCha8 keyed by `seed` on stream `r`, so results
//! do not depend on scheduling. Per-realization tallies are integers and are
//! merged in realization order.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bands::{sigma2, DecayTensor};
use crate::covariance::{CovarianceKind, CovarianceModel};
use crate::landau::{GuidingCenterTable, LandauBasis, UNDERFLOW_LN};
use crate::specfun::normalized_laguerre;
use crate::{Error, Result};

pub const DEFAULT_MODES: usize = 4096;
pub const MIN_MODES: usize = 256;
pub const EXACT_MAX_N: usize = 64;
pub const DEFAULT_BINS: usize = 201;
/// Default half-width of the histogram window in units of `σ_ℓ`.
pub const DEFAULT_WINDOW_SIGMAS: f64 = 5.0;

/// Realizations processed per parallel batch before merging.
const BATCH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    SpectralField,
    ExactMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatrixEnsembleSpec {
    pub basis: LandauBasis,
    pub model: CovarianceModel,
    pub sampler: SamplerKind,
    pub modes: usize,
    pub realizations: usize,
    pub seed: u64,
}

impl MatrixEnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.realizations == 0 {
            return Err(Error::Config("realizations must be positive".into()));
        }
        match self.sampler {
            SamplerKind::ExactMatrix if self.basis.n > EXACT_MAX_N => Err(Error::Config(format!(
                "exact_matrix sampling is limited to n <= {EXACT_MAX_N}, got {}",
                self.basis.n
            ))),
            SamplerKind::SpectralField if self.modes < MIN_MODES => Err(Error::Config(format!(
                "spectral_field needs at least {MIN_MODES} modes, got {}",
                self.modes
            ))),
            _ => Ok(()),
        }
    }

    /// The model actually sampled: white noise is replaced by its Gaussian
    /// surrogate for the spectral sampler, everything else is unchanged.
    pub fn sampled_model(&self) -> Result<CovarianceModel> {
        match (self.sampler, self.model.kind) {
            (SamplerKind::SpectralField, CovarianceKind::DeltaLimit) => {
                self.model.delta_surrogate(self.basis.b)
            }
            _ => Ok(self.model),
        }
    }

    /// `σ_ℓ` of the sampled model.
    pub fn sigma(&self) -> Result<f64> {
        Ok(sigma2(&self.sampled_model()?, &self.basis)?.max(0.0).sqrt())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSample {
    pub entries: DMatrix<Complex64>,
    pub realization_index: u64,
    pub sampler: SamplerKind,
}

fn realization_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Lower-triangular `L` with `L Lᵀ = A` from a diagonally pivoted Cholesky
/// factorization that stops once the remaining diagonal is below
/// `1e-8·trace(A)`. Fails if a remaining diagonal entry is below minus that.
pub fn pivoted_cholesky(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let trace: f64 = a.diagonal().iter().sum();
    let tol = 1e-8 * trace.abs();
    let mut work = a.clone();
    let mut l = DMatrix::<f64>::zeros(n, n);
    let mut perm: Vec<usize> = (0..n).collect();
    for step in 0..n {
        let (offset, &pivot_index) = perm[step..]
            .iter()
            .enumerate()
            .max_by(|x, y| work[(*x.1, *x.1)].total_cmp(&work[(*y.1, *y.1)]))
            .expect("nonempty");
        let min_diag = perm[step..].iter().map(|&i| work[(i, i)]).fold(f64::INFINITY, f64::min);
        if min_diag < -tol {
            return Err(Error::Factorization { pivot: min_diag, tolerance: tol });
        }
        let pivot = work[(pivot_index, pivot_index)];
        if pivot <= tol {
            break;
        }
        perm.swap(step, step + offset);
        let root = pivot.sqrt();
        let p = pivot_index;
        for &i in &perm[step..] {
            l[(i, step)] = work[(i, p)] / root;
        }
        for &i in &perm[step + 1..] {
            for &j in &perm[step + 1..] {
                work[(i, j)] -= l[(i, step)] * l[(j, step)];
            }
        }
        for &i in &perm[step..] {
            work[(i, p)] = 0.0;
            work[(p, i)] = 0.0;
        }
    }
    Ok(l)
}

/// Read-only data shared by all realizations of one ensemble.
#[derive(Debug, Clone)]
pub enum EnsembleSampler {
    Spectral {
        basis: LandauBasis,
        model: CovarianceModel,
        modes: usize,
        amplitude: f64,
    },
    Exact {
        basis: LandauBasis,
        /// Cholesky factors of the offset blocks.
        factors: Vec<DMatrix<f64>>,
    },
}

impl EnsembleSampler {
    pub fn new(spec: &MatrixEnsembleSpec) -> Result<Self> {
        spec.validate()?;
        match spec.sampler {
            SamplerKind::SpectralField => {
                let model = spec.sampled_model()?;
                let c0 = model.c_zero().ok_or_else(|| {
                    Error::Unsupported("spectral sampling needs a finite C(0)".into())
                })?;
                Ok(Self::Spectral {
                    basis: spec.basis,
                    model,
                    modes: spec.modes,
                    amplitude: (2.0 * c0 / spec.modes as f64).sqrt(),
                })
            }
            SamplerKind::ExactMatrix => {
                let tensor = DecayTensor::assemble(&spec.model, &spec.basis)?;
                let factors = tensor
                    .blocks
                    .iter()
                    .map(pivoted_cholesky)
                    .collect::<Result<Vec<_>>>()?;
                Ok(Self::Exact {
                    basis: spec.basis,
                    factors,
                })
            }
        }
    }

    pub fn kind(&self) -> SamplerKind {
        match self {
            Self::Spectral { .. } => SamplerKind::SpectralField,
            Self::Exact { .. } => SamplerKind::ExactMatrix,
        }
    }

    fn n(&self) -> usize {
        match self {
            Self::Spectral { basis, .. } | Self::Exact { basis, .. } => basis.n,
        }
    }

    /// Realization `index` for `seed`.
    pub fn sample(&self, seed: u64, index: u64) -> Result<MatrixSample> {
        let mut rng = realization_rng(seed, index);
        let n = self.n();
        // upper triangle in GuidingCenterTable layout: V_{m, m+d} at offset(d) + m
        let len = n * (n + 1) / 2;
        let mut re = vec![0.0; len];
        let mut im = vec![0.0; len];
        let table = GuidingCenterTable::new(n);
        match self {
            Self::Spectral {
                basis,
                model,
                modes,
                amplitude,
            } => {
                let mut batch = Vec::with_capacity(LANES);
                for mode in 0..*modes {
                    let q = model.sample_wavenumber(&mut rng)?;
                    let direction = 2.0 * PI * rng.gen::<f64>();
                    let theta = 2.0 * PI * rng.gen::<f64>();
                    let u = q * q / (2.0 * basis.b);
                    let level = amplitude * normalized_laguerre(basis.ell, 0, u);
                    if level != 0.0 {
                        batch.push(Mode { u, level, direction, theta });
                    }
                    if batch.len() == LANES || (mode + 1 == *modes && !batch.is_empty()) {
                        accumulate_modes(&table, &batch, &mut re, &mut im);
                        batch.clear();
                    }
                }
            }
            Self::Exact { factors, .. } => {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                for (d, l) in factors.iter().enumerate() {
                    let start = table.offset(d);
                    let k = n - d;
                    let z1 = DVector::<f64>::from_fn(k, |_, _| rng.sample(StandardNormal));
                    if d == 0 {
                        re[start..start + k].copy_from_slice((l * z1).as_slice());
                    } else {
                        let z2 = DVector::<f64>::from_fn(k, |_, _| rng.sample(StandardNormal));
                        let (a, b) = (l * z1, l * z2);
                        for m in 0..k {
                            re[start + m] = h * a[m];
                            im[start + m] = h * b[m];
                        }
                    }
                }
            }
        }
        let mut entries = DMatrix::<Complex64>::zeros(n, n);
        for d in 0..n {
            let start = table.offset(d);
            for m in 0..n - d {
                let v = Complex64::new(re[start + m], im[start + m]);
                if d == 0 {
                    entries[(m, m)] = Complex64::new(v.re, 0.0);
                } else {
                    entries[(m, m + d)] = v;
                    entries[(m + d, m)] = v.conj();
                }
            }
        }
        Ok(MatrixSample {
            entries,
            realization_index: index,
            sampler: self.kind(),
        })
    }
}

/// Modes accumulated together; their recurrences run side by side.
const LANES: usize = 8;

struct Mode {
    u: f64,
    level: f64,
    direction: f64,
    theta: f64,
}

/// Adds the matrix elements of `cos(q·x + θ)` for each mode to the upper
/// triangle `re + i·im` (table layout), without storing the form factors.
fn accumulate_modes(table: &GuidingCenterTable, modes: &[Mode], re: &mut [f64], im: &mut [f64]) {
    let n = table.n();
    let mut u = [0.0; LANES];
    let mut rot = [Complex64::new(0.0, 0.0); LANES];
    let mut phase = [Complex64::new(0.0, 0.0); LANES];
    let mut even = [0.0; LANES];
    let mut odd = [0.0; LANES];
    for (k, mode) in modes.iter().enumerate() {
        u[k] = mode.u;
        rot[k] = Complex64::from_polar(1.0, mode.direction) * Complex64::i();
        phase[k] = Complex64::new(mode.level, 0.0);
        let (s, c) = mode.theta.sin_cos();
        even[k] = c;
        odd[k] = s;
    }
    let mut scratch = Vec::new();
    for d in 0..n {
        let len = n - d;
        let start = table.offset(d);
        let (scale, lag) = table.recurrence(d);
        // ½(e^{iθ} M(q) + e^{-iθ} M(-q)) = e^{idφ} i^d I · (cos θ | i sin θ)
        let mut cr = [0.0; LANES];
        let mut ci = [0.0; LANES];
        let mut cur = [0.0; LANES];
        let mut diag = [0.0; LANES];
        let mut live = false;
        for k in 0..modes.len() {
            let coef = if d % 2 == 0 {
                phase[k] * even[k]
            } else {
                phase[k] * Complex64::new(0.0, odd[k])
            };
            phase[k] *= rot[k];
            let ln_g0 = table.ln_first(d, u[k]);
            if ln_g0 >= UNDERFLOW_LN {
                cr[k] = coef.re;
                ci[k] = coef.im;
                cur[k] = ln_g0.exp();
                live = true;
            } else if ln_g0 > f64::NEG_INFINITY {
                // rare: far tail of the spectrum with a large truncation
                scratch.resize(len, 0.0);
                table.block_at(d, u[k], &mut scratch);
                for m in 0..len {
                    re[start + m] += coef.re * scratch[m];
                    im[start + m] += coef.im * scratch[m];
                }
            }
            diag[k] = 1.0 + d as f64 - u[k];
        }
        if !live {
            continue;
        }
        let mut prev = [0.0; LANES];
        let (r, i) = (&mut re[start..start + len], &mut im[start..start + len]);
        for m in 0..len {
            let mut sr = 0.0;
            let mut si = 0.0;
            for k in 0..LANES {
                sr += cr[k] * cur[k];
                si += ci[k] * cur[k];
            }
            r[m] += sr;
            i[m] += si;
            for k in 0..LANES {
                let next = scale[m] * diag[k] * cur[k] - lag[m] * prev[k];
                prev[k] = cur[k];
                cur[k] = next;
                diag[k] += 2.0;
            }
        }
    }
}

pub fn sample_field_matrix(spec: &MatrixEnsembleSpec, realization_index: u64) -> Result<MatrixSample> {
    if spec.sampler != SamplerKind::SpectralField {
        return Err(Error::Config("spec does not select the spectral_field sampler".into()));
    }
    EnsembleSampler::new(spec)?.sample(spec.seed, realization_index)
}

pub fn sample_exact_matrix(spec: &MatrixEnsembleSpec, realization_index: u64) -> Result<MatrixSample> {
    if spec.sampler != SamplerKind::ExactMatrix {
        return Err(Error::Config("spec does not select the exact_matrix sampler".into()));
    }
    EnsembleSampler::new(spec)?.sample(spec.seed, realization_index)
}

/// Ascending eigenvalues of a Hermitian sample.
pub fn eigenvalues(sample: &MatrixSample) -> Result<Vec<f64>> {
    let fail = Error::Eigensolver {
        realization: sample.realization_index,
    };
    if sample.entries.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(fail);
    }
    let mut values: Vec<f64> = sample.entries.symmetric_eigenvalues().iter().copied().collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(fail);
    }
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// `E[(1/n) tr V²] = (1/n) Σ_{jk} E|V_{jk}|²` for the sampled model, exact by
/// spectral quadrature.
pub fn expected_mean_square(model: &CovarianceModel, basis: &LandauBasis) -> Result<f64> {
    let n = basis.n;
    let rule = model.spectral_rule(basis.b, 2.0, n + basis.ell + 8)?;
    let mut table = GuidingCenterTable::new(n);
    let mut total = 0.0;
    for (&u, &w) in rule.nodes.iter().zip(&rule.weights) {
        if w == 0.0 {
            continue;
        }
        table.fill(u);
        let level = normalized_laguerre(basis.ell, 0, u);
        let mut s = 0.0;
        for d in 0..n {
            let block: f64 = table.block(d).iter().map(|g| g * g).sum();
            s += if d == 0 { block } else { 2.0 * block };
        }
        total += w * level * level * s;
    }
    Ok(total / n as f64)
}

/// Uniform bins over `[lo, hi]`; bin `p` is the half-open interval `(e_p, e_{p+1}]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyWindow {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

impl EnergyWindow {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return Err(Error::Config(format!("invalid energy window [{lo}, {hi}]")));
        }
        if bins < 10 {
            return Err(Error::Config(format!("at least 10 bins required, got {bins}")));
        }
        Ok(Self { lo, hi, bins })
    }

    /// `±half_width`.
    pub fn symmetric(half_width: f64, bins: usize) -> Result<Self> {
        Self::new(-half_width, half_width, bins)
    }

    pub fn edges(&self) -> Vec<f64> {
        let w = (self.hi - self.lo) / self.bins as f64;
        (0..=self.bins)
            .map(|p| if p == self.bins { self.hi } else { self.lo + p as f64 * w })
            .collect()
    }
}

/// Per-bin integer tallies over realizations.
#[derive(Debug, Clone, PartialEq)]
struct Tally {
    counts: Vec<u64>,
    squares: Vec<u64>,
    below: u64,
    above: u64,
}

impl Tally {
    fn new(bins: usize) -> Self {
        Self {
            counts: vec![0; bins],
            squares: vec![0; bins],
            below: 0,
            above: 0,
        }
    }

    fn add_realization(&mut self, edges: &[f64], values: &[f64]) {
        let bins = self.counts.len();
        let mut local = vec![0u64; bins];
        for &v in values {
            // number of edges strictly below v; v on an edge falls in the lower bin
            let i = edges.partition_point(|e| *e < v);
            if i == 0 {
                self.below += 1;
            } else if i > bins {
                self.above += 1;
            } else {
                local[i - 1] += 1;
            }
        }
        for p in 0..bins {
            self.counts[p] += local[p];
            self.squares[p] += local[p] * local[p];
        }
    }
}

/// Finite-n restricted density-of-states histogram, weight `1/n` per eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DosHistogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub density: Vec<f64>,
    pub stderr: Vec<f64>,
    pub realizations: usize,
    pub n: usize,
    /// Mass inside the window, `1 - overflow`.
    pub total_weight: f64,
    pub overflow_below: u64,
    pub overflow_above: u64,
}

impl DosHistogram {
    fn from_tally(window: &EnergyWindow, tally: &Tally, n: usize, realizations: usize) -> Self {
        let edges = window.edges();
        let width = (window.hi - window.lo) / window.bins as f64;
        let r = realizations as f64;
        let scale = 1.0 / (n as f64 * width);
        let density = tally.counts.iter().map(|&c| c as f64 * scale / r).collect();
        let stderr = tally
            .counts
            .iter()
            .zip(&tally.squares)
            .map(|(&c, &s)| {
                if realizations < 2 {
                    return f64::NAN;
                }
                let mean = c as f64 / r;
                let var = ((s as f64 - r * mean * mean) / (r - 1.0)).max(0.0);
                (var / r).sqrt() * scale
            })
            .collect();
        let inside: u64 = tally.counts.iter().sum();
        Self {
            bin_edges: edges,
            counts: tally.counts.clone(),
            density,
            stderr,
            realizations,
            n,
            total_weight: inside as f64 / (n as f64 * r),
            overflow_below: tally.below,
            overflow_above: tally.above,
        }
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.bin_edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn widths(&self) -> Vec<f64> {
        self.bin_edges.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn overflow_fraction(&self) -> f64 {
        (self.overflow_below + self.overflow_above) as f64 / (self.n * self.realizations) as f64
    }

    /// Cumulative mass at each edge, including the mass below the window.
    pub fn cumulative(&self) -> Vec<f64> {
        let total = (self.n * self.realizations) as f64;
        let mut acc = self.overflow_below as f64;
        let mut out = Vec::with_capacity(self.counts.len() + 1);
        out.push(acc / total);
        for &c in &self.counts {
            acc += c as f64;
            out.push(acc / total);
        }
        out
    }

    /// Largest `|density(E) - density(-E)|` over mirrored bins in units of
    /// the combined standard error, for a window symmetric about zero.
    pub fn evenness_statistic(&self) -> f64 {
        let b = self.bins();
        (0..b / 2)
            .map(|p| {
                let q = b - 1 - p;
                let se = (self.stderr[p].powi(2) + self.stderr[q].powi(2)).sqrt();
                let diff = (self.density[p] - self.density[q]).abs();
                if se > 0.0 {
                    diff / se
                } else if diff == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Moments of `ν_{ℓ,n}` from the eigenvalues, with standard errors from the
/// spread of the per-realization values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub mean: f64,
    pub mean_stderr: f64,
    pub second: f64,
    pub second_stderr: f64,
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let r = values.len() as f64;
    let mean = values.iter().sum::<f64>() / r;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0);
    (mean, (var / r).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub histogram: DosHistogram,
    pub moments: MomentSummary,
    /// Per-realization `(1/n) Σ λ` and `(1/n) Σ λ²`, in realization order.
    pub realization_moments: Vec<(f64, f64)>,
    /// All eigenvalues in realization order, when requested.
    pub eigenvalues: Option<Vec<f64>>,
}

/// Default window `±5σ_ℓ` of the sampled model with 201 bins.
pub fn default_window(spec: &MatrixEnsembleSpec) -> Result<EnergyWindow> {
    let sigma = spec.sigma()?;
    if !(sigma > 0.0) {
        return Err(Error::DegenerateBand {
            ell: spec.basis.ell,
            sigma2: sigma * sigma,
        });
    }
    EnergyWindow::symmetric(DEFAULT_WINDOW_SIGMAS * sigma, DEFAULT_BINS)
}

/// Runs all realizations and tallies their eigenvalues into `window`.
pub fn simulate(spec: &MatrixEnsembleSpec, window: &EnergyWindow, keep_eigenvalues: bool) -> Result<Simulation> {
    let sampler = EnsembleSampler::new(spec)?;
    let edges = window.edges();
    let n = spec.basis.n;
    let mut tally = Tally::new(window.bins);
    let mut realization_moments = Vec::with_capacity(spec.realizations);
    let mut kept = keep_eigenvalues.then(|| Vec::with_capacity(n * spec.realizations));
    let mut start = 0;
    while start < spec.realizations {
        let end = (start + BATCH).min(spec.realizations);
        let batch: Vec<Result<Vec<f64>>> = (start..end)
            .into_par_iter()
            .map(|r| sampler.sample(spec.seed, r as u64).and_then(|s| eigenvalues(&s)))
            .collect();
        for values in batch {
            let values = values?;
            tally.add_realization(&edges, &values);
            let m1 = values.iter().sum::<f64>() / n as f64;
            let m2 = values.iter().map(|v| v * v).sum::<f64>() / n as f64;
            realization_moments.push((m1, m2));
            if let Some(k) = kept.as_mut() {
                k.extend_from_slice(&values);
            }
        }
        start = end;
    }
    let (mean, mean_stderr) = mean_and_stderr(&realization_moments.iter().map(|m| m.0).collect::<Vec<_>>());
    let (second, second_stderr) = mean_and_stderr(&realization_moments.iter().map(|m| m.1).collect::<Vec<_>>());
    Ok(Simulation {
        histogram: DosHistogram::from_tally(window, &tally, n, spec.realizations),
        moments: MomentSummary {
            mean,
            mean_stderr,
            second,
            second_stderr,
        },
        realization_moments,
        eigenvalues: kept,
    })
}

/// Histogram only; see [`simulate`].
pub fn accumulate_dos(spec: &MatrixEnsembleSpec, window: &EnergyWindow) -> Result<DosHistogram> {
    if spec.realizations < 2 {
        return Err(Error::Config("at least two realizations are needed for error bars".into()));
    }
    Ok(simulate(spec, window, false)?.histogram)
}

/// Kolmogorov–Smirnov distance between the cumulative histogram and `cdf`,
/// evaluated at the bin edges.
pub fn ks_to_cdf(hist: &DosHistogram, cdf: impl Fn(f64) -> f64) -> f64 {
    hist.bin_edges
        .iter()
        .zip(hist.cumulative())
        .map(|(&e, h)| (h - cdf(e)).abs())
        .fold(0.0, f64::max)
}

/// Kolmogorov–Smirnov distance between two histograms on the same edges.
pub fn ks_between(a: &DosHistogram, b: &DosHistogram) -> Result<f64> {
    if a.bin_edges != b.bin_edges {
        return Err(Error::Domain("histograms have different bin edges".into()));
    }
    Ok(a.cumulative()
        .iter()
        .zip(b.cumulative())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// Writes eigenvalues as little-endian u64 `n`, u64 `R`, u64 `seed`, then the
/// f64 values in realization order.
pub fn write_raw_eigenvalues(path: &Path, n: usize, realizations: usize, seed: u64, values: &[f64]) -> Result<()> {
    let mut buf = Vec::with_capacity(24 + 8 * values.len());
    buf.extend_from_slice(&(n as u64).to_le_bytes());
    buf.extend_from_slice(&(realizations as u64).to_le_bytes());
    buf.extend_from_slice(&seed.to_le_bytes());
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}

/// Inverse of [`write_raw_eigenvalues`]: `(n, R, seed, values)`.
pub fn read_raw_eigenvalues(path: &Path) -> Result<(usize, usize, u64, Vec<f64>)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() < 24 || (bytes.len() - 24) % 8 != 0 {
        return Err(Error::Domain(format!("{} is not a raw eigenvalue dump", path.display())));
    }
    let word = |i: usize| u64::from_le_bytes(bytes[8 * i..8 * i + 8].try_into().expect("8 bytes"));
    let values = bytes[24..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok((word(0) as usize, word(1) as usize, word(2), values))
}
