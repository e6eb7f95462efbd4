//! Exact spectral sampling of the process restricted to an interval.
//!
//! Each eigenfunction of the discretized kernel is kept independently with
//! probability equal to its eigenvalue; the kept modes span a projection
//! process that is sampled point by point. Every step proposes from the
//! mixture `(1/k) Σ φ_m²` (inverse CDF on a refined grid) and accepts with
//! the squared norm of the evaluation vector left after removing the
//! directions of the points already drawn.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fredholm::DiscretizedOperator;
use crate::quadrature::{
    barycentric_basis, gauss_legendre_reference, integrate_adaptive, legendre_barycentric_weights,
};
use crate::spectral_kernel::TranslationKernel;

/// A sorted point set in `[0, L]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    points: Vec<f64>,
    length: f64,
}

impl Configuration {
    pub fn new(points: Vec<f64>, length: f64) -> Result<Self> {
        if !(length > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "window length {length} is not positive"
            )));
        }
        if points.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(
                "configuration points must be strictly increasing".into(),
            ));
        }
        if points.iter().any(|&x| !(0.0..=length).contains(&x)) {
            return Err(Error::InvalidArgument(format!(
                "configuration leaves [0, {length}]"
            )));
        }
        Ok(Self { points, length })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Counter-based stream: the ChaCha key comes from the master seed and
/// the trial id selects the stream, so trials are independent of order.
pub fn trial_rng(master_seed: u64, trial_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial_id);
    rng
}

#[derive(Debug, Clone, Copy)]
pub struct SamplerOptions {
    /// Grid cells per quadrature node before refinement checks.
    pub initial_refinement: usize,
    pub max_refinement: usize,
    /// Total-variation change of the first-step density that stops refinement.
    pub tv_tolerance: f64,
    /// Modes with smaller eigenvalues are dropped.
    pub mode_cutoff: f64,
    /// Proposals allowed per point before declaring underflow.
    pub max_proposals: usize,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        Self {
            initial_refinement: 8,
            max_refinement: 64,
            tv_tolerance: 1e-6,
            mode_cutoff: 1e-12,
            max_proposals: 1_000_000,
        }
    }
}

/// Precomputed eigenfunction tables shared read-only by all trials.
#[derive(Debug, Clone)]
pub struct DppSampler {
    a: f64,
    b: f64,
    panel_width: f64,
    panel_count: usize,
    order: usize,
    reference_nodes: Vec<f64>,
    bary: Vec<f64>,
    eigenvalues: Vec<f64>,
    /// `φ_m(t_i)` at quadrature node `i`, stored node-major.
    node_values: Vec<f64>,
    grid: Vec<f64>,
    /// Per mode: `φ_m²` on the grid and its cumulative trapezoid mass.
    densities: Vec<Vec<f64>>,
    cumulative: Vec<Vec<f64>>,
    refinement: usize,
    tv_change: f64,
    max_proposals: usize,
}

impl DppSampler {
    pub fn new(op: &DiscretizedOperator, opts: &SamplerOptions) -> Result<Self> {
        let (a, b) = op.interval;
        let order = op.panels.order;
        let panel_count = op.panels.count;
        let (reference_nodes, reference_weights) = gauss_legendre_reference(order);
        let bary = legendre_barycentric_weights(&reference_nodes, &reference_weights);
        let kept: Vec<usize> = (0..op.eigenvalues.len())
            .filter(|&i| op.eigenvalues[i] > opts.mode_cutoff)
            .collect();
        let n = op.len();
        let modes = kept.len();
        let mut node_values = vec![0.0; n * modes];
        for i in 0..n {
            let inv = 1.0 / op.weights[i].sqrt();
            for (slot, &m) in kept.iter().enumerate() {
                node_values[i * modes + slot] = op.eigenvectors[(i, m)] * inv;
            }
        }
        let mut sampler = Self {
            a,
            b,
            panel_width: (b - a) / panel_count as f64,
            panel_count,
            order,
            reference_nodes,
            bary,
            eigenvalues: kept.iter().map(|&m| op.eigenvalues[m]).collect(),
            node_values,
            grid: Vec::new(),
            densities: Vec::new(),
            cumulative: Vec::new(),
            refinement: opts.initial_refinement.max(1),
            tv_change: f64::NAN,
            max_proposals: opts.max_proposals,
        };

        let mut refinement = sampler.refinement;
        let mut coarse = sampler.intensity_cell_masses(refinement);
        loop {
            let fine = sampler.intensity_cell_masses(2 * refinement);
            let tv = 0.5
                * coarse
                    .iter()
                    .enumerate()
                    .map(|(c, &p)| (p - fine[2 * c] - fine[2 * c + 1]).abs())
                    .sum::<f64>();
            sampler.tv_change = tv;
            if tv < opts.tv_tolerance || 2 * refinement > opts.max_refinement {
                if tv >= opts.tv_tolerance {
                    log::warn!(
                        "sampling grid stopped at refinement {refinement} with TV change {tv:e}"
                    );
                }
                break;
            }
            refinement *= 2;
            coarse = fine;
        }
        sampler.refinement = refinement;
        sampler.build_tables();
        Ok(sampler)
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn refinement(&self) -> usize {
        self.refinement
    }

    /// Total-variation change at the last refinement check.
    pub fn tv_change(&self) -> f64 {
        self.tv_change
    }

    fn grid_points(&self, refinement: usize) -> Vec<f64> {
        let cells = self.panel_count * self.order * refinement;
        let h = (self.b - self.a) / cells as f64;
        (0..=cells).map(|i| self.a + h * i as f64).collect()
    }

    /// Writes `φ_m(x)` for the requested mode slots into `out`.
    fn eval_modes(&self, x: f64, slots: &[usize], basis: &mut [f64], out: &mut [f64]) {
        let modes = self.eigenvalues.len();
        let p = (((x - self.a) / self.panel_width) as usize).min(self.panel_count - 1);
        let lo = self.a + p as f64 * self.panel_width;
        let xi = (2.0 * (x - lo) / self.panel_width - 1.0).clamp(-1.0, 1.0);
        barycentric_basis(&self.reference_nodes, &self.bary, xi, basis);
        out.iter_mut().for_each(|o| *o = 0.0);
        for (j, &l) in basis.iter().enumerate() {
            let row =
                &self.node_values[(p * self.order + j) * modes..(p * self.order + j + 1) * modes];
            for (o, &s) in out.iter_mut().zip(slots) {
                *o += l * row[s];
            }
        }
    }

    /// Normalized cell masses of the mean intensity `Σ λ_m φ_m²`.
    fn intensity_cell_masses(&self, refinement: usize) -> Vec<f64> {
        let grid = self.grid_points(refinement);
        let all: Vec<usize> = (0..self.eigenvalues.len()).collect();
        let mut basis = vec![0.0; self.order];
        let mut vals = vec![0.0; all.len()];
        let f: Vec<f64> = grid
            .iter()
            .map(|&x| {
                self.eval_modes(x, &all, &mut basis, &mut vals);
                vals.iter()
                    .zip(&self.eigenvalues)
                    .map(|(v, l)| l * v * v)
                    .sum()
            })
            .collect();
        let h = grid[1] - grid[0];
        let masses: Vec<f64> = f.windows(2).map(|w| 0.5 * h * (w[0] + w[1])).collect();
        let total: f64 = masses.iter().sum();
        if total > 0.0 {
            masses.iter().map(|m| m / total).collect()
        } else {
            masses
        }
    }

    fn build_tables(&mut self) {
        self.grid = self.grid_points(self.refinement);
        let modes = self.eigenvalues.len();
        let all: Vec<usize> = (0..modes).collect();
        let mut basis = vec![0.0; self.order];
        let mut vals = vec![0.0; modes];
        let g = self.grid.len();
        let mut densities = vec![vec![0.0; g]; modes];
        for (i, &x) in self.grid.iter().enumerate() {
            self.eval_modes(x, &all, &mut basis, &mut vals);
            for m in 0..modes {
                densities[m][i] = vals[m] * vals[m];
            }
        }
        let h = self.grid[1] - self.grid[0];
        self.cumulative = densities
            .iter()
            .map(|d| {
                let mut acc = 0.0;
                let mut c = Vec::with_capacity(g);
                c.push(0.0);
                for w in d.windows(2) {
                    acc += 0.5 * h * (w[0] + w[1]);
                    c.push(acc);
                }
                c
            })
            .collect();
        self.densities = densities;
    }

    /// Inverse-CDF draw from `φ_m²`, linear density within each grid cell.
    fn draw_from_mode<R: Rng>(&self, m: usize, rng: &mut R) -> f64 {
        let cum = &self.cumulative[m];
        let dens = &self.densities[m];
        let total = cum[cum.len() - 1];
        let target = rng.random::<f64>() * total;
        let c = cum
            .partition_point(|&v| v <= target)
            .clamp(1, cum.len() - 1)
            - 1;
        let h = self.grid[c + 1] - self.grid[c];
        let (f0, f1) = (dens[c], dens[c + 1]);
        let r = (target - cum[c]).max(0.0);
        let disc = (f0 * f0 + 2.0 * (f1 - f0) * r / h).max(0.0);
        let denom = f0 + disc.sqrt();
        let s = if denom > 0.0 {
            2.0 * r / denom
        } else {
            0.5 * h
        };
        (self.grid[c] + s.min(h)).clamp(self.a, self.b)
    }

    /// One configuration for `(seed, trial_id)`; identical inputs give
    /// bit-identical output.
    pub fn sample(&self, seed: u64, trial_id: u64) -> Result<Configuration> {
        let mut rng = trial_rng(seed, trial_id);
        let selected: Vec<usize> = self
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| rng.random::<f64>() < l)
            .map(|(m, _)| m)
            .collect();
        let points = self.sample_projection(&selected, &mut rng)?;
        Configuration::new(points, self.b - self.a).map(|c| self.shift(c))
    }

    /// Mode slots chosen by the Bernoulli stage for `(seed, trial_id)`.
    pub fn selected_modes(&self, seed: u64, trial_id: u64) -> Vec<usize> {
        let mut rng = trial_rng(seed, trial_id);
        self.eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| rng.random::<f64>() < l)
            .map(|(m, _)| m)
            .collect()
    }

    fn shift(&self, c: Configuration) -> Configuration {
        if self.a == 0.0 {
            return c;
        }
        Configuration {
            points: c.points.iter().map(|x| x - self.a).collect(),
            length: c.length,
        }
    }

    fn sample_projection<R: Rng>(&self, selected: &[usize], rng: &mut R) -> Result<Vec<f64>> {
        let k = selected.len();
        let mut points = Vec::with_capacity(k);
        let mut directions: Vec<Vec<f64>> = Vec::with_capacity(k);
        let mut basis = vec![0.0; self.order];
        let mut v = vec![0.0; k];
        for step in 0..k {
            let mut accepted = false;
            for _ in 0..self.max_proposals {
                let j = rng.random_range(0..k);
                let x = self.draw_from_mode(selected[j], rng);
                self.eval_modes(x, selected, &mut basis, &mut v);
                let norm2: f64 = v.iter().map(|t| t * t).sum();
                if !(norm2 > 0.0) {
                    continue;
                }
                // Two Gram-Schmidt passes keep the residual orthogonal.
                for _ in 0..2 {
                    for d in &directions {
                        let c: f64 = d.iter().zip(&v).map(|(a, b)| a * b).sum();
                        v.iter_mut().zip(d).for_each(|(t, di)| *t -= c * di);
                    }
                }
                let res2: f64 = v.iter().map(|t| t * t).sum();
                if rng.random::<f64>() * norm2 < res2 {
                    let inv = 1.0 / res2.sqrt();
                    directions.push(v.iter().map(|t| t * inv).collect());
                    points.push(x);
                    accepted = true;
                    break;
                }
            }
            if !accepted {
                return Err(Error::NumericalUnderflow { step, total: k });
            }
        }
        points.sort_by(f64::total_cmp);
        Ok(points)
    }
}

/// Empirical-versus-exact comparison in one bin.
#[derive(Debug, Clone, Serialize)]
pub struct BinStat {
    pub lo: f64,
    pub hi: f64,
    pub estimate: f64,
    pub expected: f64,
    pub std_err: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrelationReport {
    pub trials: usize,
    pub no_points: bool,
    pub intensity: Vec<BinStat>,
    pub pair: Vec<BinStat>,
    pub max_abs_z: f64,
}

/// Distance range covered by the pair-correlation bins.
pub const PAIR_RANGE: f64 = 3.0;
const MIN_TRIALS: usize = 1000;

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn z_score(estimate: f64, expected: f64, se: f64) -> f64 {
    if se > 0.0 {
        (estimate - expected) / se
    } else if estimate == expected {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Compares the one-point intensity (on `bins` bins over `[0, L]`) and the
/// pair correlation `g(0)² - g(u)²` (on `bins` distance bins over
/// `(0, 3]`) with Monte Carlo standard errors from per-trial variation.
pub fn empirical_correlation_check(
    trials: &[Configuration],
    kernel: &TranslationKernel,
    bins: usize,
) -> Result<CorrelationReport> {
    if trials.len() < MIN_TRIALS {
        return Err(Error::InsufficientTrials {
            needed: MIN_TRIALS,
            got: trials.len(),
        });
    }
    if bins == 0 {
        return Err(Error::InvalidArgument("need at least one bin".into()));
    }
    let n = trials.len();
    if trials.iter().all(|c| c.is_empty()) {
        return Ok(CorrelationReport {
            trials: n,
            no_points: true,
            intensity: Vec::new(),
            pair: Vec::new(),
            max_abs_z: 0.0,
        });
    }
    let length = trials[0].length();
    let width = length / bins as f64;
    let mut per_bin = vec![vec![0.0; n]; bins];
    let pair_width = PAIR_RANGE / bins as f64;
    let mut per_pair_bin = vec![vec![0.0; n]; bins];
    for (t, c) in trials.iter().enumerate() {
        let pts = c.points();
        for &x in pts {
            let b = ((x / width) as usize).min(bins - 1);
            per_bin[b][t] += 1.0;
        }
        for i in 0..pts.len() {
            for &y in &pts[i + 1..] {
                let u = y - pts[i];
                if u >= PAIR_RANGE {
                    break;
                }
                let b = ((u / pair_width) as usize).min(bins - 1);
                per_pair_bin[b][t] += 1.0;
            }
        }
    }
    let mut intensity = Vec::with_capacity(bins);
    for (b, counts) in per_bin.iter().enumerate() {
        let (mean, se) = mean_and_se(counts);
        let estimate = mean / width;
        intensity.push(BinStat {
            lo: b as f64 * width,
            hi: (b + 1) as f64 * width,
            estimate,
            expected: kernel.g0,
            std_err: se / width,
            z: z_score(estimate, kernel.g0, se / width),
        });
    }
    let rho2 = |u: f64| kernel.g0 * kernel.g0 - kernel.g(u).powi(2);
    let mut pair = Vec::with_capacity(bins);
    for (b, counts) in per_pair_bin.iter().enumerate() {
        let (lo, hi) = (b as f64 * pair_width, (b + 1) as f64 * pair_width);
        // Ordered pairs x < y inside [0, L] at distance u have measure L - u.
        let measure = (length - lo).powi(2) / 2.0 - (length - hi).powi(2) / 2.0;
        let expected_count = integrate_adaptive(&|u: f64| (length - u) * rho2(u), lo, hi, 1e-12)?;
        let (mean, se) = mean_and_se(counts);
        pair.push(BinStat {
            lo,
            hi,
            estimate: mean / measure,
            expected: expected_count / measure,
            std_err: se / measure,
            z: z_score(mean, expected_count, se),
        });
    }
    let max_abs_z = intensity
        .iter()
        .chain(&pair)
        .map(|s| s.z.abs())
        .fold(0.0f64, f64::max);
    Ok(CorrelationReport {
        trials: n,
        no_points: false,
        intensity,
        pair,
        max_abs_z,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FactorialMomentCheck {
    pub interval: (f64, f64),
    pub empirical: f64,
    pub expected: f64,
    pub std_err: f64,
    pub z: f64,
}

/// `E[#I (#I - 1)]` over the trials against `∫_{I²} rho_2`.
pub fn factorial_moment_check(
    trials: &[Configuration],
    kernel: &TranslationKernel,
    interval: (f64, f64),
) -> Result<FactorialMomentCheck> {
    if trials.len() < 2 {
        return Err(Error::InsufficientTrials {
            needed: 2,
            got: trials.len(),
        });
    }
    let (lo, hi) = interval;
    let ell = hi - lo;
    let values: Vec<f64> = trials
        .iter()
        .map(|c| {
            let n = c.points().iter().filter(|&&x| x >= lo && x < hi).count() as f64;
            n * (n - 1.0)
        })
        .collect();
    let (empirical, std_err) = mean_and_se(&values);
    let integrand = |u: f64| 2.0 * (ell - u) * (kernel.g0 * kernel.g0 - kernel.g(u).powi(2));
    let expected = integrate_adaptive(&integrand, 0.0, ell, 1e-13)?;
    Ok(FactorialMomentCheck {
        interval,
        empirical,
        expected,
        std_err,
        z: z_score(empirical, expected, std_err),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fredholm::{discretize_translation, DEFAULT_NODES_PER_UNIT};
    use crate::spectral_kernel::{build_kernel, SpectralDensity};

    fn sampler_for(phi: &SpectralDensity, length: f64) -> (TranslationKernel, DppSampler) {
        let k = build_kernel(phi).unwrap();
        let op = discretize_translation(&k, (0.0, length), DEFAULT_NODES_PER_UNIT).unwrap();
        let s = DppSampler::new(&op, &SamplerOptions::default()).unwrap();
        (k, s)
    }

    #[test]
    fn configuration_invariants() {
        assert!(Configuration::new(vec![0.5, 0.2], 1.0).is_err());
        assert!(Configuration::new(vec![0.5, 1.5], 1.0).is_err());
        assert!(Configuration::new(vec![0.5, 0.5], 1.0).is_err());
        assert_eq!(Configuration::new(vec![0.0, 1.0], 1.0).unwrap().len(), 2);
    }

    #[test]
    fn zero_kernel_gives_empty_configurations() {
        let (k, s) = sampler_for(&SpectralDensity::zero(), 10.0);
        let trials: Vec<Configuration> = (0..1000).map(|t| s.sample(1, t).unwrap()).collect();
        assert!(trials.iter().all(|c| c.is_empty()));
        let report = empirical_correlation_check(&trials, &k, 10).unwrap();
        assert!(report.no_points);
    }

    #[test]
    fn deterministic_per_trial() {
        let (_, s) = sampler_for(&SpectralDensity::sine(), 20.0);
        let a = s.sample(42, 7).unwrap();
        let b = s.sample(42, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, s.sample(42, 8).unwrap());
        assert_ne!(a, s.sample(43, 7).unwrap());
    }

    #[test]
    fn count_equals_selected_modes() {
        let (_, s) = sampler_for(&SpectralDensity::sine(), 20.0);
        for t in 0..50 {
            let c = s.sample(9, t).unwrap();
            assert_eq!(c.len(), s.selected_modes(9, t).len());
            assert!(c.points().windows(2).all(|w| w[1] - w[0] > 0.0));
            assert!(c.points().iter().all(|&x| (0.0..=20.0).contains(&x)));
        }
    }

    #[test]
    fn grid_refinement_reaches_tolerance() {
        let (_, s) = sampler_for(&SpectralDensity::sine(), 20.0);
        assert!(s.tv_change() < 1e-6, "{}", s.tv_change());
        assert!(s.refinement() >= 8);
    }

    #[test]
    fn mean_count_scaled_indicator() {
        let (_, s) = sampler_for(&SpectralDensity::scaled_indicator(0.5).unwrap(), 50.0);
        let counts: Vec<f64> = (0..2000)
            .map(|t| s.sample(5, t).unwrap().len() as f64)
            .collect();
        let (mean, se) = mean_and_se(&counts);
        assert!((mean - 25.0).abs() < 3.0 * se, "{mean} ± {se}");
    }

    #[test]
    fn empirical_correlations_match_sine_kernel() {
        let (k, s) = sampler_for(&SpectralDensity::sine(), 20.0);
        let trials: Vec<Configuration> = (0..3000).map(|t| s.sample(11, t).unwrap()).collect();
        let report = empirical_correlation_check(&trials, &k, 10).unwrap();
        assert!(!report.no_points);
        for b in &report.intensity {
            assert!(b.z.abs() < 4.0, "{b:?}");
        }
        // repulsion: the first distance bin sits far below the last
        assert!(report.pair[0].estimate < 0.1 * report.pair[9].estimate);
        assert!(report.pair[0].expected < 0.15);
        let moment = factorial_moment_check(&trials, &k, (9.0, 11.0)).unwrap();
        assert!(moment.z.abs() < 4.0, "{moment:?}");
        assert!(matches!(
            empirical_correlation_check(&trials[..999], &k, 10),
            Err(Error::InsufficientTrials { .. })
        ));
    }

    #[test]
    fn factorial_moment_expectation_matches_tensor_oracle() {
        let k = build_kernel(&SpectralDensity::sine()).unwrap();
        let empty = vec![Configuration::new(vec![], 2.0).unwrap(); 2];
        let check = factorial_moment_check(&empty, &k, (0.0, 2.0)).unwrap();
        let rule = crate::quadrature::QuadratureRule::composite(16, 16, 0.0, 2.0);
        let oracle =
            crate::quadrature::tensor_integrate(&rule, 2, |p| 1.0 - k.g(p[1] - p[0]).powi(2));
        assert!(
            (check.expected - oracle).abs() < 1e-10,
            "{} vs {oracle}",
            check.expected
        );
    }
}
