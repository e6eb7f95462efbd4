//! Nearest-spacing statistics: counts of small gaps, the rescaled minimum
//! gap, the s-modified configuration, the `E N₂` bound and goodness-of-fit
//! tests against the Poisson and `exp(-α s³)` limit laws.

use std::collections::BTreeMap;

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, DiscreteCDF, Poisson};

use crate::correlation::kernel_determinant;
use crate::error::{Error, Result};
use crate::quadrature::{tensor_integrate, QuadratureRule};
use crate::sampler::Configuration;
use crate::spectral_kernel::TranslationKernel;

#[derive(Debug, Clone, PartialEq)]
pub struct SpacingSet {
    pub spacings: Vec<f64>,
    pub length: f64,
    /// Set when the configuration had fewer than two points.
    pub too_few_points: bool,
}

pub fn spacings(config: &Configuration) -> SpacingSet {
    let spacings: Vec<f64> = config.points().windows(2).map(|w| w[1] - w[0]).collect();
    SpacingSet {
        too_few_points: config.len() < 2,
        spacings,
        length: config.length(),
    }
}

/// Gap threshold `s · L^{-1/3}`.
pub fn threshold(s: f64, length: f64) -> f64 {
    s * length.powf(-1.0 / 3.0)
}

/// Number of spacings strictly below `s · L^{-1/3}`.
pub fn count_below(set: &SpacingSet, s: f64) -> usize {
    let t = threshold(s, set.length);
    set.spacings.iter().filter(|&&g| g < t).count()
}

/// `L^{1/3} · min θ_i`, or `+∞` when there is no spacing.
pub fn min_spacing_rescaled(config: &Configuration) -> f64 {
    let set = spacings(config);
    set.spacings.iter().copied().fold(f64::INFINITY, f64::min) * config.length().cbrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModifiedConfig {
    pub kept_points: Vec<f64>,
    pub s: f64,
    pub n1: usize,
    pub n2: usize,
}

/// Keeps the points with exactly one right neighbour within distance `s`.
/// The last point is never kept; a missing second neighbour counts as
/// infinitely far away.
pub fn s_modify(config: &Configuration, s: f64) -> ModifiedConfig {
    let p = config.points();
    let mut kept_points = Vec::new();
    let mut n2 = 0;
    for i in 0..p.len().saturating_sub(1) {
        if p[i + 1] - p[i] > s {
            continue;
        }
        match p.get(i + 2) {
            Some(&x2) if x2 - p[i] <= s => n2 += 1,
            _ => kept_points.push(p[i]),
        }
    }
    ModifiedConfig {
        n1: kept_points.len(),
        kept_points,
        s,
        n2,
    }
}

const EN2_COARSE_ORDER: usize = 16;
const EN2_FINE_ORDER: usize = 24;
const EN2_TOLERANCE: f64 = 1e-6;

/// `L · ∫₀^s̃ ∫₀^s̃ rho_3(0, y₁, y₂) dy₁ dy₂`, an upper bound on the expected
/// number of points with two right neighbours within `s̃`.
pub fn en2_bound(kernel: &TranslationKernel, length: f64, s_tilde: f64) -> Result<f64> {
    if !(s_tilde > 0.0 && s_tilde < 1.0) || !(length > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "en2_bound needs 0 < s_tilde < 1 and L > 0, got s_tilde = {s_tilde}, L = {length}"
        )));
    }
    if kernel.is_zero() {
        return Ok(0.0);
    }
    let integral = |order: usize| {
        let rule = QuadratureRule::gauss_legendre(order, 0.0, s_tilde);
        tensor_integrate(&rule, 2, |y| {
            kernel_determinant(&[0.0, y[0], y[1]], kernel).max(0.0)
        })
    };
    let coarse = integral(EN2_COARSE_ORDER);
    let fine = integral(EN2_FINE_ORDER);
    if (fine - coarse).abs() > EN2_TOLERANCE * fine.abs() {
        return Err(Error::QuadratureFailure(format!(
            "rho_3 integral at s_tilde = {s_tilde}: order {EN2_FINE_ORDER} gives {fine:e}, order {EN2_COARSE_ORDER} gives {coarse:e}"
        )));
    }
    Ok(length * fine)
}

#[derive(Debug, Clone, Serialize)]
pub struct En2Scaling {
    pub s_tilde: f64,
    pub bound: f64,
    pub bound_half: f64,
    /// `log₂(bound(s̃) / bound(s̃/2))`.
    pub exponent: f64,
}

pub fn en2_scaling(kernel: &TranslationKernel, length: f64, s_tilde: f64) -> Result<En2Scaling> {
    let bound = en2_bound(kernel, length, s_tilde)?;
    let bound_half = en2_bound(kernel, length, s_tilde / 2.0)?;
    Ok(En2Scaling {
        s_tilde,
        bound,
        bound_half,
        exponent: (bound / bound_half).log2(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GofReport {
    pub statistic: String,
    pub value: f64,
    pub p_value: Option<f64>,
    pub distance: Option<f64>,
    pub degrees_of_freedom: Option<usize>,
    pub sample_size: usize,
    pub parameters: BTreeMap<String, f64>,
    /// `(grid point, empirical − target)` for curve comparisons.
    pub deviations: Vec<(f64, f64)>,
}

const MIN_GOF_SAMPLES: usize = 1000;
const MIN_EXPECTED: f64 = 5.0;

/// Chi-square test of the count histogram against Poisson(`mean`), with
/// cells pooled so every expected count is at least 5.
pub fn poisson_gof(counts: &[usize], mean: f64) -> Result<GofReport> {
    if counts.len() < MIN_GOF_SAMPLES {
        return Err(Error::InsufficientTrials {
            needed: MIN_GOF_SAMPLES,
            got: counts.len(),
        });
    }
    if !(mean > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "Poisson mean {mean} is not positive"
        )));
    }
    let law = Poisson::new(mean).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let n = counts.len() as f64;
    let max_count = counts.iter().copied().max().unwrap_or(0) as u64;

    // Cells are ranges [lo, hi) of counts; the last one is open-ended.
    let mut cells: Vec<(u64, f64)> = Vec::new();
    let mut lo = 0u64;
    let mut acc = 0.0;
    let mut k = 0u64;
    loop {
        acc += n * law.pmf(k);
        k += 1;
        let tail = n * law.sf(k - 1);
        if acc >= MIN_EXPECTED && tail >= MIN_EXPECTED {
            cells.push((lo, acc));
            lo = k;
            acc = 0.0;
        } else if tail < MIN_EXPECTED && k > max_count.max(mean.ceil() as u64) {
            break;
        }
    }
    // Everything from `lo` upward goes into one final cell.
    let rest = n * if lo == 0 { 1.0 } else { law.sf(lo - 1) };
    if rest >= MIN_EXPECTED || cells.is_empty() {
        cells.push((lo, rest));
    } else if let Some(last) = cells.last_mut() {
        last.1 += rest;
    }

    let mut observed = vec![0.0; cells.len()];
    for &c in counts {
        let idx = cells.partition_point(|&(start, _)| start <= c as u64) - 1;
        observed[idx] += 1.0;
    }
    let statistic: f64 = observed
        .iter()
        .zip(&cells)
        .map(|(o, &(_, e))| (o - e).powi(2) / e)
        .sum();
    let df = cells.len().saturating_sub(1);
    let p_value = if df == 0 {
        1.0
    } else {
        ChiSquared::new(df as f64)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .sf(statistic)
            .clamp(0.0, 1.0)
    };
    Ok(GofReport {
        statistic: "chi_square_poisson".into(),
        value: statistic,
        p_value: Some(p_value),
        distance: None,
        degrees_of_freedom: Some(df),
        sample_size: counts.len(),
        parameters: BTreeMap::from([("mean".to_string(), mean)]),
        deviations: Vec::new(),
    })
}

/// Sup distance between the empirical survival of `etas` and
/// `exp(-α s³)` over `s_grid`. Infinite entries (fewer than two points)
/// survive every threshold.
pub fn survival_vs_weibull(etas: &[f64], alpha: f64, s_grid: &[f64]) -> Result<GofReport> {
    let finite = etas.iter().filter(|e| e.is_finite()).count();
    if finite < MIN_GOF_SAMPLES {
        return Err(Error::InsufficientTrials {
            needed: MIN_GOF_SAMPLES,
            got: finite,
        });
    }
    if etas.iter().any(|e| e.is_nan()) {
        return Err(Error::InvalidArgument("eta values contain NaN".into()));
    }
    let n = etas.len() as f64;
    let deviations: Vec<(f64, f64)> = s_grid
        .iter()
        .map(|&s| {
            let empirical = etas.iter().filter(|&&e| e > s).count() as f64 / n;
            (s, empirical - (-alpha * s.powi(3)).exp())
        })
        .collect();
    let distance = deviations.iter().map(|d| d.1.abs()).fold(0.0, f64::max);
    Ok(GofReport {
        statistic: "survival_sup_distance".into(),
        value: distance,
        p_value: None,
        distance: Some(distance),
        degrees_of_freedom: None,
        sample_size: etas.len(),
        parameters: BTreeMap::from([("alpha".to_string(), alpha)]),
        deviations,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Dispersion {
    pub mean: f64,
    pub variance: f64,
    /// Variance-to-mean ratio.
    pub index: f64,
    pub jackknife_se: f64,
}

/// Variance/mean ratio with a leave-one-out jackknife standard error.
pub fn dispersion_index(counts: &[f64]) -> Result<Dispersion> {
    let n = counts.len();
    if n < 3 {
        return Err(Error::InsufficientTrials { needed: 3, got: n });
    }
    let nf = n as f64;
    let sum: f64 = counts.iter().sum();
    let sum2: f64 = counts.iter().map(|c| c * c).sum();
    let stats = |s: f64, s2: f64, m: f64| {
        let mean = s / m;
        let variance = (s2 - s * mean) / (m - 1.0);
        (mean, variance)
    };
    let (mean, variance) = stats(sum, sum2, nf);
    if !(mean > 0.0) {
        return Err(Error::InvalidArgument(
            "dispersion index needs a positive mean".into(),
        ));
    }
    let loo: Vec<f64> = counts
        .iter()
        .map(|c| {
            let (m, v) = stats(sum - c, sum2 - c * c, nf - 1.0);
            if m > 0.0 {
                v / m
            } else {
                0.0
            }
        })
        .collect();
    let loo_mean = loo.iter().sum::<f64>() / nf;
    let jackknife_se =
        ((nf - 1.0) / nf * loo.iter().map(|x| (x - loo_mean).powi(2)).sum::<f64>()).sqrt();
    Ok(Dispersion {
        mean,
        variance,
        index: variance / mean,
        jackknife_se,
    })
}
