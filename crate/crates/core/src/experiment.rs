//! Configuration-driven runner: analytic self-checks and Monte Carlo
//! campaigns with deterministic CSV and JSON output.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::correlation::{
    cluster_cyclic, cluster_from_correlations, correlation, correlations_from_clusters,
    cumulants_from_cluster_integrals, fischer_check, PointTuple,
};
use crate::error::{Error, Result};
use crate::fredholm::{
    conditional_kernel, discretize_translation, expected_short_gaps, intensity_table,
    IntensityTable, DEFAULT_NODES_PER_UNIT, DEFAULT_WINDOW_ORDER,
};
use crate::sampler::{Configuration, DppSampler, SamplerOptions};
use crate::spacing::{
    count_below, dispersion_index, en2_bound, en2_scaling, min_spacing_rescaled, poisson_gof,
    s_modify, spacings, survival_vs_weibull, threshold, Dispersion, En2Scaling, GofReport,
};
use crate::spectral_kernel::{
    density_by_name, kernel_from_density, validate_density, QuadratureOptions, SpectralDensity,
    TranslationKernel, ValidationGrid,
};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "DPP_SPACINGS_OUTPUT_DIR";
/// Fraction of failed trials that aborts a run.
pub const MAX_FAILED_FRACTION: f64 = 0.01;
/// Allowed relative finite-window bias of the mean count.
pub const FINITE_L_ALLOWANCE: f64 = 0.15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    /// Height and half-width for the plain `indicator` kernel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
}

impl KernelSpec {
    pub fn named(name: &str) -> Self {
        Self {
            name: name.to_string(),
            a: None,
            path: None,
            height: None,
            half_width: None,
        }
    }

    pub fn density(&self) -> Result<SpectralDensity> {
        if self.name == "indicator" {
            let (h, w) = self.height.zip(self.half_width).ok_or_else(|| {
                Error::Config("indicator kernel needs `height` and `half_width`".into())
            })?;
            return Ok(SpectralDensity::indicator(h, w));
        }
        density_by_name(&self.name, self.a, self.path.as_deref())
    }
}

fn default_quadrature_order() -> usize {
    DEFAULT_NODES_PER_UNIT
}

fn default_workers() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kernel: KernelSpec,
    #[serde(rename = "L")]
    pub length: f64,
    pub s_values: Vec<f64>,
    pub trials: u64,
    pub master_seed: u64,
    /// Nyström nodes per unit length.
    #[serde(default = "default_quadrature_order")]
    pub quadrature_order: usize,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Grid for the survival comparison of `η`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_grid: Option<Vec<f64>>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::Config(format!(
                "L must be positive, got {}",
                self.length
            )));
        }
        if self.length < 10.0 {
            log::warn!(
                "L = {} is below 10; finite-window effects will dominate",
                self.length
            );
        }
        if self.s_values.is_empty() {
            return Err(Error::Config("s_values must not be empty".into()));
        }
        if self.s_values.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::Config("s_values must be positive".into()));
        }
        if self.s_values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Config("s_values must be sorted ascending".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.quadrature_order < 2 {
            return Err(Error::Config("quadrature_order must be at least 2".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        Ok(())
    }

    pub fn resolved_output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("output"))
    }

    pub fn resolved_eta_grid(&self) -> Vec<f64> {
        self.eta_grid
            .clone()
            .unwrap_or_else(|| (0..7).map(|i| 0.4 + 0.2 * i as f64).collect())
    }

    /// Copy with every default filled in, as echoed in the summary.
    pub fn resolved(&self) -> Self {
        let mut c = self.clone();
        c.output_dir = Some(self.resolved_output_dir());
        c.eta_grid = Some(self.resolved_eta_grid());
        c
    }

    pub fn kernel(&self) -> Result<TranslationKernel> {
        let phi = self.kernel.density()?;
        let v = validate_density(&phi, &ValidationGrid::for_density(&phi))
            .map_err(|e| check_error("validate_density", e))?;
        kernel_from_density(&v, &QuadratureOptions::default()).map_err(|e| check_error("kernel", e))
    }
}

fn check_error(name: &str, e: Error) -> Error {
    Error::Check {
        name: name.into(),
        source: Box::new(e),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            passed,
            detail,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SelfcheckReport {
    pub kernel: String,
    pub alpha: f64,
    pub checks: Vec<Check>,
    pub intensity: Option<IntensityTable>,
    pub en2_scaling: Vec<En2Scaling>,
}

impl SelfcheckReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Small-gap scaling of the `E N₂` bound: `ρ₃` vanishes like a squared
/// Vandermonde near coincidence, so the double integral goes like `s̃⁸`.
pub const EN2_EXPONENT: f64 = 8.0;
const SELFCHECK_SEED: u64 = 0x5eed;

/// Runs the analytic invariants of every module for the configured kernel.
pub fn run_selfcheck(config: &ExperimentConfig) -> Result<SelfcheckReport> {
    config.validate()?;
    let phi = config.kernel.density()?;
    let validated = validate_density(&phi, &ValidationGrid::for_density(&phi))
        .map_err(|e| check_error("validate_density", e))?;
    let kernel = kernel_from_density(&validated, &QuadratureOptions::default())
        .map_err(|e| check_error("kernel", e))?;
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(SELFCHECK_SEED);

    let alpha = kernel.alpha();
    let from_moments = 4.0 * PI * PI / 3.0 * validated.m0 * validated.m2;
    let fd = kernel.alpha_finite_difference();
    let scale = alpha.abs().max(f64::MIN_POSITIVE);
    checks.push(Check::new(
        "alpha_two_path",
        (from_moments - alpha).abs() <= 1e-8 * scale
            && (fd - alpha).abs() <= 1e-4 * scale.max(1e-12),
        format!(
            "alpha = {alpha:.16e}, moments = {from_moments:.16e}, finite difference = {fd:.16e}"
        ),
    ));

    let mut worst_cluster = 0.0f64;
    let mut worst_round_trip = 0.0f64;
    for _ in 0..200 {
        let k = rng.random_range(1..=5);
        let mut pts: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..3.0)).collect();
        pts.sort_by(f64::total_cmp);
        let Ok(tuple) = PointTuple::new(pts) else {
            continue;
        };
        let a = cluster_cyclic(&tuple, &kernel).map_err(|e| check_error("cluster_mobius", e))?;
        let b = cluster_from_correlations(&tuple, &kernel)
            .map_err(|e| check_error("cluster_mobius", e))?;
        worst_cluster = worst_cluster.max((a - b).abs());
        let rho = correlation(&tuple, &kernel).map_err(|e| check_error("cluster_round_trip", e))?;
        let back = correlations_from_clusters(&tuple, |sub| {
            PointTuple::new(sub.to_vec())
                .and_then(|t| cluster_cyclic(&t, &kernel))
                .unwrap_or(f64::NAN)
        })
        .map_err(|e| check_error("cluster_round_trip", e))?;
        worst_round_trip = worst_round_trip.max((rho - back).abs());
    }
    checks.push(Check::new(
        "cluster_mobius",
        worst_cluster <= 1e-10,
        format!("max |cyclic - Möbius| = {worst_cluster:e} over 200 tuples, k <= 5"),
    ));
    checks.push(Check::new(
        "cluster_round_trip",
        worst_round_trip <= 1e-10,
        format!("max |rho - inverse(clusters)| = {worst_round_trip:e}"),
    ));

    let mut cumulant_ok = true;
    for _ in 0..100 {
        let v: Vec<i64> = (0..5).map(|_| rng.random_range(-1000..1000)).collect();
        let c = cumulants_from_cluster_integrals(&v, 5)
            .map_err(|e| check_error("cumulant_identities", e))?;
        let expected = [
            v[0],
            v[0] + v[1],
            v[0] + 3 * v[1] + v[2],
            v[0] + 7 * v[1] + 6 * v[2] + v[3],
            v[0] + 15 * v[1] + 25 * v[2] + 10 * v[3] + v[4],
        ];
        cumulant_ok &= c == expected;
    }
    checks.push(Check::new(
        "cumulant_identities",
        cumulant_ok,
        "C_n = Σ S(n, j) V_j for n <= 5 on 100 exact integer draws".into(),
    ));

    let mut fischer_ok = true;
    for _ in 0..1000 {
        let n = rng.random_range(1..=4);
        let m = rng.random_range(1..=4);
        let rank = rng.random_range(1..=n + m + 2);
        let g = DMatrix::from_fn(n + m, rank, |_, _| rng.random_range(-1.0..1.0));
        let full = &g * g.transpose();
        let a = full.view((0, 0), (n, n)).into_owned();
        let c = full.view((n, n), (m, m)).into_owned();
        let b = full.view((0, n), (n, m)).into_owned();
        fischer_ok &= fischer_check(&a, &c, &b)
            .map_err(|e| check_error("fischer", e))?
            .holds;
    }
    checks.push(Check::new(
        "fischer",
        fischer_ok,
        "1000 random PSD block matrices".into(),
    ));

    if kernel.is_zero() {
        checks.push(Check::new(
            "conditional_kernel_vanishing",
            true,
            "zero kernel: not applicable".into(),
        ));
    } else {
        let (x, y) = (0.3, 0.8);
        let ck = conditional_kernel(&kernel, x, y)
            .map_err(|e| check_error("conditional_kernel_vanishing", e))?;
        let worst = (0..=40)
            .map(|i| -1.0 + 0.075 * i as f64)
            .flat_map(|v| [ck.eval(x, v), ck.eval(y, v), ck.eval(v, x), ck.eval(v, y)])
            .fold(0.0f64, |m, t| m.max(t.abs()));
        checks.push(Check::new(
            "conditional_kernel_vanishing",
            worst <= 1e-10,
            format!("max |K̃| on conditioned rows/columns = {worst:e}"),
        ));
    }

    let mut intensity = None;
    if kernel.is_zero() {
        checks.push(Check::new(
            "intensity_two_path",
            true,
            "zero kernel: not applicable".into(),
        ));
    } else {
        let s_values = [0.2, 0.1, 0.05, 0.025];
        let table = intensity_table(&kernel, &s_values)
            .map_err(|e| check_error("intensity_two_path", e))?;
        let worst = table
            .rows
            .iter()
            .map(|r| r.route_rel_diff)
            .fold(0.0, f64::max);
        let gaps: Vec<f64> = table.rows.iter().map(|r| (r.ratio - 1.0).abs()).collect();
        let monotone = gaps.windows(2).all(|w| w[1] < w[0]);
        checks.push(Check::new(
            "intensity_two_path",
            worst <= 1e-6,
            format!("max relative difference between routes = {worst:e}"),
        ));
        checks.push(Check::new(
            "intensity_ratio",
            monotone && (table.extrapolated_ratio - 1.0).abs() <= 0.01,
            format!(
                "ratios {:?}, extrapolated {:.6}, order {:.3}",
                table.rows.iter().map(|r| r.ratio).collect::<Vec<_>>(),
                table.extrapolated_ratio,
                table.estimated_order
            ),
        ));
        intensity = Some(table);
    }

    let mut scaling = Vec::new();
    if kernel.is_zero() {
        checks.push(Check::new(
            "en2_scaling",
            true,
            "zero kernel: not applicable".into(),
        ));
    } else {
        let base = threshold(config.s_values[config.s_values.len() - 1], config.length).min(0.5);
        for j in 0..3 {
            let s = base / 2f64.powi(j);
            scaling.push(
                en2_scaling(&kernel, config.length, s)
                    .map_err(|e| check_error("en2_scaling", e))?,
            );
        }
        let last = scaling.last().map(|s| s.exponent).unwrap_or(f64::NAN);
        checks.push(Check::new(
            "en2_scaling",
            (last - EN2_EXPONENT).abs() <= 0.5,
            format!(
                "exponents {:?} at s̃ = {:?}",
                scaling.iter().map(|s| s.exponent).collect::<Vec<_>>(),
                scaling.iter().map(|s| s.s_tilde).collect::<Vec<_>>()
            ),
        ));
    }

    Ok(SelfcheckReport {
        kernel: kernel.name().to_string(),
        alpha,
        checks,
        intensity,
        en2_scaling: scaling,
    })
}

/// Per-trial statistics; one CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial_id: u64,
    pub n_points: usize,
    pub min_spacing: f64,
    pub eta: f64,
    pub count_below: Vec<usize>,
    pub n1: Vec<usize>,
    pub n2: Vec<usize>,
}

impl TrialRecord {
    pub fn from_configuration(trial_id: u64, config: &Configuration, s_values: &[f64]) -> Self {
        let set = spacings(config);
        let min_spacing = set.spacings.iter().copied().fold(f64::INFINITY, f64::min);
        let mut count = Vec::with_capacity(s_values.len());
        let mut n1 = Vec::with_capacity(s_values.len());
        let mut n2 = Vec::with_capacity(s_values.len());
        for &s in s_values {
            count.push(count_below(&set, s));
            let m = s_modify(config, threshold(s, config.length()));
            n1.push(m.n1);
            n2.push(m.n2);
        }
        Self {
            trial_id,
            n_points: config.len(),
            min_spacing,
            eta: min_spacing_rescaled(config),
            count_below: count,
            n1,
            n2,
        }
    }
}

/// Seventeen significant digits; `inf` for the no-spacing sentinel.
pub fn format_float(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

pub fn csv_header(s_count: usize) -> String {
    let mut h = String::from("trial_id,n_points,min_spacing,eta");
    for j in 0..s_count {
        write!(h, ",count_below_s{j},n1_s{j},n2_s{j}").unwrap();
    }
    h
}

pub fn write_csv(records: &[TrialRecord], s_count: usize) -> String {
    let mut out = csv_header(s_count);
    out.push('\n');
    for r in records {
        write!(
            out,
            "{},{},{},{}",
            r.trial_id,
            r.n_points,
            format_float(r.min_spacing),
            format_float(r.eta)
        )
        .unwrap();
        for j in 0..s_count {
            write!(out, ",{},{},{}", r.count_below[j], r.n1[j], r.n2[j]).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Serialize)]
pub struct SStats {
    pub s: f64,
    pub threshold: f64,
    /// Limit-law mean `α s³`.
    pub expected_mean: f64,
    /// Exact expected count in the finite window.
    pub finite_window_mean: f64,
    pub mean_count: f64,
    pub variance_count: f64,
    pub std_err: f64,
    pub dispersion: Option<Dispersion>,
    /// Chi-square against Poisson with the finite-window mean.
    pub poisson: Option<GofReport>,
    /// Chi-square against Poisson with the limit mean `α s³`.
    pub poisson_limit: Option<GofReport>,
    pub mean_n1: f64,
    pub mean_n2: f64,
    pub n2_std_err: f64,
    pub fraction_n2_positive: f64,
    pub en2_bound: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub kernel: String,
    pub alpha: f64,
    pub trials: u64,
    pub completed_trials: usize,
    pub failed_trials: Vec<u64>,
    pub mean_points: f64,
    pub insufficient_for_gof: bool,
    pub per_s: Vec<SStats>,
    pub survival: Option<GofReport>,
    pub sampler_refinement: usize,
    pub runtime_seconds: f64,
    pub csv_sha256: String,
    pub checks: Vec<Check>,
    pub config: ExperimentConfig,
}

impl Summary {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug)]
pub struct RunOutput {
    pub records: Vec<TrialRecord>,
    pub csv: String,
    pub summary: Summary,
    pub csv_path: PathBuf,
    pub summary_path: PathBuf,
}

fn mean_and_se(values: &[f64]) -> (f64, f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var, (var / n).sqrt())
}

const MIN_GOF_TRIALS: usize = 1000;

/// Samples `trials` configurations on `workers` threads, writes
/// `trials.csv`, `survival.csv` and `summary.json`, and evaluates the
/// limit-law checks. Output bytes depend only on the configuration.
pub fn run_montecarlo(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    let start = Instant::now();
    let kernel = config.kernel()?;
    let op = discretize_translation(&kernel, (0.0, config.length), config.quadrature_order)?;
    let sampler = DppSampler::new(&op, &SamplerOptions::default())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let results: Vec<Result<TrialRecord>> = pool.install(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|t| {
                sampler
                    .sample(config.master_seed, t)
                    .map(|c| TrialRecord::from_configuration(t, &c, &config.s_values))
                    .map_err(|e| Error::Trial {
                        trial_id: t,
                        source: Box::new(e),
                    })
            })
            .collect()
    });
    let mut records = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(e) => {
                log::warn!("{e}");
                failures.push(e);
            }
        }
    }
    if failures.len() as f64 > MAX_FAILED_FRACTION * config.trials as f64 {
        return Err(failures.swap_remove(0));
    }
    let failed_trials: Vec<u64> = failures
        .iter()
        .filter_map(|e| match e {
            Error::Trial { trial_id, .. } => Some(*trial_id),
            _ => None,
        })
        .collect();

    let csv = write_csv(&records, config.s_values.len());
    let csv_sha256 = sha256_hex(csv.as_bytes());
    let mut summary = summarize(config, &kernel, &records, failed_trials, csv_sha256)?;
    summary.sampler_refinement = sampler.refinement();
    summary.runtime_seconds = start.elapsed().as_secs_f64();

    let dir = config.resolved_output_dir();
    fs::create_dir_all(&dir)?;
    let csv_path = dir.join("trials.csv");
    let summary_path = dir.join("summary.json");
    fs::write(&csv_path, &csv)?;
    if let Some(survival) = &summary.survival {
        let mut curve = String::from("s,empirical,target\n");
        for &(s, dev) in &survival.deviations {
            let target = (-summary.alpha * s.powi(3)).exp();
            writeln!(
                curve,
                "{},{},{}",
                format_float(s),
                format_float(target + dev),
                format_float(target)
            )
            .unwrap();
        }
        fs::write(dir.join("survival.csv"), curve)?;
    }
    fs::write(&summary_path, serde_json::to_string_pretty(&summary)?)?;
    Ok(RunOutput {
        records,
        csv,
        summary,
        csv_path,
        summary_path,
    })
}

fn summarize(
    config: &ExperimentConfig,
    kernel: &TranslationKernel,
    records: &[TrialRecord],
    failed_trials: Vec<u64>,
    csv_sha256: String,
) -> Result<Summary> {
    let alpha = kernel.alpha();
    let sufficient = records.len() >= MIN_GOF_TRIALS;
    let mut checks = Vec::new();
    let mut per_s = Vec::with_capacity(config.s_values.len());
    for (j, &s) in config.s_values.iter().enumerate() {
        let counts: Vec<f64> = records.iter().map(|r| r.count_below[j] as f64).collect();
        let (mean_count, variance_count, std_err) = mean_and_se(&counts);
        let n2: Vec<f64> = records.iter().map(|r| r.n2[j] as f64).collect();
        let (mean_n2, _, n2_std_err) = mean_and_se(&n2);
        let mean_n1 =
            records.iter().map(|r| r.n1[j] as f64).sum::<f64>() / records.len().max(1) as f64;
        let fraction_n2_positive =
            records.iter().filter(|r| r.n2[j] > 0).count() as f64 / records.len().max(1) as f64;
        let expected_mean = alpha * s.powi(3);
        let s_tilde = threshold(s, config.length);
        let finite_window_mean = if s_tilde <= config.length {
            expected_short_gaps(kernel, config.length, s_tilde, DEFAULT_WINDOW_ORDER)?
        } else {
            f64::NAN
        };
        let bound = if s_tilde < 1.0 {
            Some(en2_bound(kernel, config.length, s_tilde)?)
        } else {
            None
        };
        let mut stats = SStats {
            s,
            threshold: s_tilde,
            expected_mean,
            finite_window_mean,
            mean_count,
            variance_count,
            std_err,
            dispersion: None,
            poisson: None,
            poisson_limit: None,
            mean_n1,
            mean_n2,
            n2_std_err,
            fraction_n2_positive,
            en2_bound: bound,
        };
        if sufficient && expected_mean > 0.0 {
            let int_counts: Vec<usize> = records.iter().map(|r| r.count_below[j]).collect();
            let gof = poisson_gof(&int_counts, finite_window_mean)?;
            let gof_limit = poisson_gof(&int_counts, expected_mean)?;
            let disp = dispersion_index(&counts).ok();
            let lo = (1.0 - FINITE_L_ALLOWANCE) * expected_mean - 3.0 * std_err;
            let hi = (1.0 + FINITE_L_ALLOWANCE) * expected_mean + 3.0 * std_err;
            checks.push(Check::new(
                &format!("mean_count_s{j}"),
                (lo..=hi).contains(&mean_count),
                format!("mean {mean_count:.6} ± {std_err:.6} vs α s³ = {expected_mean:.6} (±15%)"),
            ));
            checks.push(Check::new(
                &format!("finite_window_mean_s{j}"),
                (mean_count - finite_window_mean).abs() <= 3.0 * std_err,
                format!("mean {mean_count:.6} ± {std_err:.6} vs exact finite-window mean {finite_window_mean:.6}"),
            ));
            let p = gof.p_value.unwrap_or(0.0);
            let p_limit = gof_limit.p_value.unwrap_or(0.0);
            checks.push(Check::new(
                &format!("poisson_s{j}"),
                p > 0.01,
                format!("chi-square p = {p:.6} (mean {finite_window_mean:.6}); against α s³: p = {p_limit:.6}"),
            ));
            if let Some(d) = &disp {
                checks.push(Check::new(
                    &format!("dispersion_s{j}"),
                    (0.8..=1.25).contains(&d.index),
                    format!("variance/mean = {:.4} ± {:.4}", d.index, d.jackknife_se),
                ));
            }
            if let Some(b) = bound {
                checks.push(Check::new(
                    &format!("n2_bound_s{j}"),
                    mean_n2 <= b + 3.0 * n2_std_err,
                    format!("mean n2 {mean_n2:.6} ± {n2_std_err:.6} vs bound {b:.6}"),
                ));
            }
            stats.poisson = Some(gof);
            stats.poisson_limit = Some(gof_limit);
            stats.dispersion = disp;
        }
        per_s.push(stats);
    }
    let means: Vec<f64> = per_s.iter().map(|s| s.mean_count).collect();
    checks.push(Check::new(
        "mean_count_monotone",
        means.windows(2).all(|w| w[1] >= w[0]),
        format!("means {means:?}"),
    ));

    let etas: Vec<f64> = records.iter().map(|r| r.eta).collect();
    let finite_etas = etas.iter().filter(|e| e.is_finite()).count();
    let survival = if sufficient && alpha > 0.0 && finite_etas >= MIN_GOF_TRIALS {
        let report = survival_vs_weibull(&etas, alpha, &config.resolved_eta_grid())?;
        let d = report.distance.unwrap_or(f64::INFINITY);
        checks.push(Check::new(
            "survival",
            d <= 0.05,
            format!("sup distance {d:.5}"),
        ));
        Some(report)
    } else {
        None
    };

    Ok(Summary {
        kernel: kernel.name().to_string(),
        alpha,
        trials: config.trials,
        completed_trials: records.len(),
        failed_trials,
        mean_points: records.iter().map(|r| r.n_points as f64).sum::<f64>()
            / records.len().max(1) as f64,
        insufficient_for_gof: !sufficient,
        per_s,
        survival,
        sampler_refinement: 0,
        runtime_seconds: 0.0,
        csv_sha256,
        checks,
        config: config.resolved(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_json() -> String {
        r#"{"kernel": {"name": "sine"}, "L": 20, "s_values": [0.5, 1.0], "trials": 3, "master_seed": 7}"#.into()
    }

    #[test]
    fn config_parses_with_defaults() {
        let c = ExperimentConfig::from_json(&base_json()).unwrap();
        assert_eq!(c.quadrature_order, DEFAULT_NODES_PER_UNIT);
        assert_eq!(c.workers, 1);
        assert_eq!(c.resolved_eta_grid().len(), 7);
        assert!((c.resolved_eta_grid()[6] - 1.6).abs() < 1e-12);
    }

    #[test]
    fn config_rejects_unknown_and_invalid() {
        let typo = base_json().replace("\"trials\"", "\"trails\"");
        assert!(matches!(
            ExperimentConfig::from_json(&typo),
            Err(Error::Config(_))
        ));
        let unsorted = base_json().replace("[0.5, 1.0]", "[1.0, 0.5]");
        assert!(ExperimentConfig::from_json(&unsorted).is_err());
        let empty = base_json().replace("[0.5, 1.0]", "[]");
        assert!(ExperimentConfig::from_json(&empty).is_err());
        let zero = base_json().replace("\"trials\": 3", "\"trials\": 0");
        assert!(ExperimentConfig::from_json(&zero).is_err());
    }

    #[test]
    fn csv_formatting() {
        assert_eq!(format_float(f64::INFINITY), "inf");
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(0.1).parse::<f64>().unwrap(), 0.1);
        assert_eq!(csv_header(2), "trial_id,n_points,min_spacing,eta,count_below_s0,n1_s0,n2_s0,count_below_s1,n1_s1,n2_s1");
    }

    #[test]
    fn record_from_configuration() {
        let c = Configuration::new(vec![0.0, 0.3, 5.0, 5.2, 5.3], 1000.0).unwrap();
        let r = TrialRecord::from_configuration(4, &c, &[0.9, 5.0]);
        assert_eq!(r.n_points, 5);
        assert!((r.min_spacing - 0.1).abs() < 1e-12);
        assert!((r.eta - 1.0).abs() < 1e-10);
        // thresholds 0.09 and 0.5
        assert_eq!(r.count_below, vec![0, 3]);
        assert_eq!((r.n1[1], r.n2[1]), (2, 1));
        assert!(r.count_below.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn selfcheck_rejects_overshooting_density() {
        let json = r#"{"kernel": {"name": "indicator", "height": 1.5, "half_width": 0.5}, "L": 20, "s_values": [1.0], "trials": 1, "master_seed": 1}"#;
        let c = ExperimentConfig::from_json(json).unwrap();
        match run_selfcheck(&c) {
            Err(Error::Check { name, source }) => {
                assert_eq!(name, "validate_density");
                assert!(matches!(*source, Error::RangeViolation { .. }));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
