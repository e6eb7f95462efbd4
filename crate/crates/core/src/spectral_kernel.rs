//! Spectral densities and the translation-invariant kernels they define.
//!
//! A density `phi` on the real line with `0 <= phi <= 1` determines the
//! kernel `K(x, y) = g(y - x)` through `g(x) = ∫ cos(2πxt) phi(t) dt`.
//! Built-in densities carry closed forms for `g` and `g'`; tabulated and
//! custom densities fall back to panel quadrature.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre_reference, integrate_adaptive};

const EVEN_TOL: f64 = 1e-12;
const RANGE_TOL: f64 = 1e-12;
const MOMENT_TOL: f64 = 1e-14;

#[derive(Clone)]
enum Shape {
    /// `height` on `[-half_width, half_width]`, zero outside.
    Indicator {
        height: f64,
        half_width: f64,
    },
    /// `exp(-π t²)`.
    Gaussian,
    Zero,
    Table(Arc<Table>),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

/// Piecewise-linear density, symmetrized on evaluation.
#[derive(Debug, Clone)]
struct Table {
    t: Vec<f64>,
    phi: Vec<f64>,
    mirrored: bool,
}

impl Table {
    fn interpolate(&self, t: f64) -> f64 {
        let n = self.t.len();
        if n == 0 || t < self.t[0] || t > self.t[n - 1] {
            return 0.0;
        }
        let i = self.t.partition_point(|&s| s <= t);
        if i == 0 {
            return self.phi[0];
        }
        if i == n {
            return self.phi[n - 1];
        }
        let (t0, t1) = (self.t[i - 1], self.t[i]);
        let w = (t - t0) / (t1 - t0);
        self.phi[i - 1] * (1.0 - w) + self.phi[i] * w
    }

    fn eval(&self, t: f64) -> f64 {
        if self.mirrored {
            self.interpolate(t.abs())
        } else {
            0.5 * (self.interpolate(t) + self.interpolate(-t))
        }
    }
}

/// The even function `phi` defining a translation-invariant process.
#[derive(Clone)]
pub struct SpectralDensity {
    name: String,
    shape: Shape,
    /// `phi(t) = 0` for `|t|` beyond this bound; `None` means unbounded
    /// support with numerically negligible tails.
    pub support_bound: Option<f64>,
    pub moment0_hint: Option<f64>,
    pub moment2_hint: Option<f64>,
}

impl fmt::Debug for SpectralDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralDensity")
            .field("name", &self.name)
            .field("support_bound", &self.support_bound)
            .finish_non_exhaustive()
    }
}

impl SpectralDensity {
    /// Indicator of `[-1/2, 1/2]`; its kernel is the sine kernel.
    pub fn sine() -> Self {
        let mut d = Self::indicator(1.0, 0.5);
        d.name = "sine".into();
        d
    }

    /// `exp(-π t²)`, which is its own Fourier transform.
    pub fn gaussian() -> Self {
        Self {
            name: "gaussian".into(),
            shape: Shape::Gaussian,
            support_bound: None,
            moment0_hint: Some(1.0),
            moment2_hint: Some(1.0 / (2.0 * PI)),
        }
    }

    /// `a` times the indicator of `[-1/2, 1/2]`, `a` in `(0, 1]`.
    pub fn scaled_indicator(a: f64) -> Result<Self> {
        if !(a > 0.0 && a <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "scaled_indicator parameter must lie in (0, 1], got {a}"
            )));
        }
        let mut d = Self::indicator(a, 0.5);
        d.name = format!("scaled_indicator({a})");
        Ok(d)
    }

    /// `height` times the indicator of `[-half_width, half_width]`. Not
    /// validated; `validate_density` rejects heights above one.
    pub fn indicator(height: f64, half_width: f64) -> Self {
        Self {
            name: format!("indicator({height}, {half_width})"),
            shape: Shape::Indicator { height, half_width },
            support_bound: Some(half_width),
            moment0_hint: Some(2.0 * height * half_width),
            moment2_hint: Some(2.0 * height * half_width.powi(3) / 3.0),
        }
    }

    pub fn zero() -> Self {
        Self {
            name: "zero".into(),
            shape: Shape::Zero,
            support_bound: Some(0.0),
            moment0_hint: Some(0.0),
            moment2_hint: Some(0.0),
        }
    }

    /// Piecewise-linear density through `(t, phi)` samples. If every `t`
    /// is non-negative the table describes the half line and is mirrored;
    /// otherwise `phi(t)` and `phi(-t)` are averaged.
    pub fn from_table(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidArgument(
                "a density table needs at least two rows".into(),
            ));
        }
        if points.iter().any(|(t, p)| !t.is_finite() || !p.is_finite()) {
            return Err(Error::InvalidArgument(
                "density table has non-finite entries".into(),
            ));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidArgument(
                "density table repeats a t value".into(),
            ));
        }
        let mirrored = points[0].0 >= 0.0;
        let bound = points.iter().map(|(t, _)| t.abs()).fold(0.0f64, f64::max);
        Ok(Self {
            name: "table".into(),
            shape: Shape::Table(Arc::new(Table {
                t: points.iter().map(|p| p.0).collect(),
                phi: points.iter().map(|p| p.1).collect(),
                mirrored,
            })),
            support_bound: Some(bound),
            moment0_hint: None,
            moment2_hint: None,
        })
    }

    /// Reads a two-column `t,phi` CSV; a non-numeric first line is a header.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split(',').map(str::trim);
            let parsed = match (cols.next(), cols.next()) {
                (Some(a), Some(b)) => a.parse::<f64>().ok().zip(b.parse::<f64>().ok()),
                _ => None,
            };
            match parsed {
                Some(row) => rows.push(row),
                None if rows.is_empty() && lineno == 0 => continue,
                None => {
                    return Err(Error::InvalidArgument(format!(
                        "{}:{}: expected two numeric columns",
                        path.display(),
                        lineno + 1
                    )))
                }
            }
        }
        let mut d = Self::from_table(rows)?;
        d.name = format!("table({})", path.display());
        Ok(d)
    }

    pub fn custom<F>(name: &str, f: F, support_bound: Option<f64>) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            shape: Shape::Custom(Arc::new(f)),
            support_bound,
            moment0_hint: None,
            moment2_hint: None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.shape {
            Shape::Indicator { height, half_width } => {
                if t.abs() <= *half_width {
                    *height
                } else {
                    0.0
                }
            }
            Shape::Gaussian => (-PI * t * t).exp(),
            Shape::Zero => 0.0,
            Shape::Table(table) => table.eval(t),
            Shape::Custom(f) => f(t),
        }
    }

    /// Non-negative points where `phi` may fail to be smooth.
    fn breakpoints(&self) -> Vec<f64> {
        match &self.shape {
            Shape::Indicator { half_width, .. } => vec![*half_width],
            Shape::Table(table) => {
                let mut b: Vec<f64> = table.t.iter().map(|t| t.abs()).collect();
                b.sort_by(f64::total_cmp);
                b.dedup();
                b
            }
            _ => Vec::new(),
        }
    }

    /// Truncation point beyond which `phi` is numerically negligible.
    fn effective_cutoff(&self) -> Result<f64> {
        if let Some(b) = self.support_bound {
            return Ok(b);
        }
        let mut cutoff = 1.0;
        while cutoff < 1e6 {
            let tail = (0..=64)
                .map(|i| cutoff * (1.0 + i as f64 / 64.0))
                .map(|t| self.eval(t).abs().max(self.eval(-t).abs()))
                .fold(0.0f64, f64::max);
            if tail < 1e-18 {
                return Ok(cutoff);
            }
            cutoff *= 1.25;
        }
        Err(Error::DivergentMoment { order: 0 })
    }
}

/// Sample points for the evenness and range checks.
#[derive(Debug, Clone, Copy)]
pub struct ValidationGrid {
    pub half_width: f64,
    pub points: usize,
}

impl ValidationGrid {
    pub fn for_density(phi: &SpectralDensity) -> Self {
        let half_width = match phi.support_bound {
            Some(b) if b > 0.0 => 1.25 * b,
            Some(_) => 1.0,
            None => 8.0,
        };
        Self {
            half_width,
            points: 4001,
        }
    }

    fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.points.max(2);
        (0..n).map(move |i| -self.half_width + 2.0 * self.half_width * i as f64 / (n - 1) as f64)
    }
}

/// A density that passed validation, with its moments `∫phi` and `∫t²phi`.
#[derive(Debug, Clone)]
pub struct ValidatedDensity {
    pub density: SpectralDensity,
    pub m0: f64,
    pub m2: f64,
    cutoff: f64,
}

/// Checks evenness and `0 <= phi <= 1` on `grid`, then computes the
/// zeroth and second moments (closed form when hinted).
pub fn validate_density(phi: &SpectralDensity, grid: &ValidationGrid) -> Result<ValidatedDensity> {
    for t in grid.iter() {
        let v = phi.eval(t);
        if !v.is_finite() {
            return Err(Error::NonFiniteDensity { t });
        }
        if !(-RANGE_TOL..=1.0 + RANGE_TOL).contains(&v) {
            return Err(Error::RangeViolation { t, value: v });
        }
        let mirror = phi.eval(-t);
        if (v - mirror).abs() > EVEN_TOL {
            return Err(Error::NotEven {
                t,
                left: v,
                right: mirror,
            });
        }
    }
    let cutoff = phi.effective_cutoff()?;
    let m0 = match phi.moment0_hint {
        Some(m) => m,
        None => moment(phi, 0, cutoff)?,
    };
    let m2 = match phi.moment2_hint {
        Some(m) => m,
        None => moment(phi, 2, cutoff)?,
    };
    Ok(ValidatedDensity {
        density: phi.clone(),
        m0,
        m2,
        cutoff,
    })
}

/// `∫ t^order phi(t) dt` over the real line using evenness. Unbounded
/// supports are integrated over doubling windows until the added mass
/// stops mattering.
fn moment(phi: &SpectralDensity, order: u32, cutoff: f64) -> Result<f64> {
    let f = |t: f64| t.powi(order as i32) * phi.eval(t);
    let mut edges = vec![0.0];
    edges.extend(
        phi.breakpoints()
            .into_iter()
            .filter(|&b| b > 0.0 && b < cutoff),
    );
    edges.push(cutoff);
    let mut total = 0.0;
    for w in edges.windows(2) {
        total += integrate_adaptive(&f, w[0], w[1], MOMENT_TOL)
            .map_err(|_| Error::DivergentMoment { order })?;
    }
    if phi.support_bound.is_none() {
        let mut lo = cutoff;
        loop {
            let add = integrate_adaptive(&f, lo, 2.0 * lo, MOMENT_TOL)
                .map_err(|_| Error::DivergentMoment { order })?;
            total += add;
            if add.abs() <= MOMENT_TOL * total.abs().max(1.0) {
                break;
            }
            lo *= 2.0;
            if lo > 1e8 {
                return Err(Error::DivergentMoment { order });
            }
        }
    }
    if !total.is_finite() {
        return Err(Error::DivergentMoment { order });
    }
    Ok(2.0 * total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    Quadrature,
}

#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    /// Absolute tolerance for the Fourier integrals.
    pub tolerance: f64,
    /// Use panel quadrature even when a closed form exists.
    pub force_quadrature: bool,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            force_quadrature: false,
        }
    }
}

#[derive(Clone)]
enum KernelRepr {
    Sinc { scale: f64 },
    Gaussian,
    Zero,
    Fourier(Arc<FourierQuadrature>),
}

/// Cosine/sine transforms of an even density by Gauss–Legendre panels
/// narrow enough to resolve the oscillation.
struct FourierQuadrature {
    density: SpectralDensity,
    edges: Vec<f64>,
    cutoff: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

const FOURIER_ORDER: usize = 16;

impl FourierQuadrature {
    fn new(v: &ValidatedDensity, order: usize) -> Self {
        let mut edges = vec![0.0];
        edges.extend(
            v.density
                .breakpoints()
                .into_iter()
                .filter(|&b| b > 0.0 && b < v.cutoff),
        );
        edges.push(v.cutoff);
        let (nodes, weights) = gauss_legendre_reference(order);
        Self {
            density: v.density.clone(),
            edges,
            cutoff: v.cutoff,
            nodes,
            weights,
        }
    }

    /// `2 ∫_0^cutoff w(t) phi(t) dt` where `w` is the supplied weight.
    fn transform<W: Fn(f64) -> f64>(&self, x: f64, weight: W) -> f64 {
        if self.cutoff <= 0.0 {
            return 0.0;
        }
        let max_width = if x == 0.0 {
            f64::INFINITY
        } else {
            1.0 / (4.0 * x.abs() * self.cutoff)
        }
        .min(self.cutoff / 16.0);
        let mut total = 0.0;
        for e in self.edges.windows(2) {
            let (lo, hi) = (e[0], e[1]);
            if hi <= lo {
                continue;
            }
            let panels = ((hi - lo) / max_width).ceil().max(1.0) as usize;
            let width = (hi - lo) / panels as f64;
            for p in 0..panels {
                let mid = lo + width * (p as f64 + 0.5);
                let half = 0.5 * width;
                let mut s = 0.0;
                for (&t, &w) in self.nodes.iter().zip(&self.weights) {
                    let tt = mid + half * t;
                    s += w * weight(tt) * self.density.eval(tt);
                }
                total += s * half;
            }
        }
        2.0 * total
    }

    fn g(&self, x: f64) -> f64 {
        self.transform(x, |t| (2.0 * PI * x * t).cos())
    }

    fn g_prime(&self, x: f64) -> f64 {
        -self.transform(x, |t| 2.0 * PI * t * (2.0 * PI * x * t).sin())
    }
}

/// `K(x, y) = g(y - x)` together with the constants the limit laws use.
#[derive(Clone)]
pub struct TranslationKernel {
    name: String,
    repr: KernelRepr,
    /// `g(0) = ∫phi`.
    pub g0: f64,
    /// `g''(0) = -4π² ∫t²phi`.
    pub g2_at_0: f64,
    /// `(4π²/3) ∫phi ∫t²phi`.
    pub alpha: f64,
    pub provenance: Provenance,
}

impl fmt::Debug for TranslationKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TranslationKernel")
            .field("name", &self.name)
            .field("g0", &self.g0)
            .field("g2_at_0", &self.g2_at_0)
            .field("alpha", &self.alpha)
            .field("provenance", &self.provenance)
            .finish()
    }
}

fn sinc(x: f64) -> f64 {
    let y = PI * x;
    if y.abs() < 1e-4 {
        let y2 = y * y;
        1.0 - y2 / 6.0 + y2 * y2 / 120.0
    } else {
        y.sin() / y
    }
}

fn sinc_prime(x: f64) -> f64 {
    let y = PI * x;
    if y.abs() < 0.15 {
        // d/dx Σ (-1)^k (πx)^{2k}/(2k+1)!
        let mut term = 1.0; // (-1)^k y^{2k} / (2k+1)! at k = 0
        let mut sum = 0.0;
        for k in 1..10 {
            let kf = k as f64;
            term *= -y * y / ((2.0 * kf) * (2.0 * kf + 1.0));
            sum += 2.0 * kf * term;
        }
        if x == 0.0 {
            0.0
        } else {
            sum / x
        }
    } else {
        (y * y.cos() - y.sin()) / (PI * x * x)
    }
}

impl TranslationKernel {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn g(&self, x: f64) -> f64 {
        match &self.repr {
            KernelRepr::Sinc { scale } => scale * sinc(x),
            KernelRepr::Gaussian => (-PI * x * x).exp(),
            KernelRepr::Zero => 0.0,
            KernelRepr::Fourier(q) => q.g(x),
        }
    }

    pub fn g_prime(&self, x: f64) -> f64 {
        match &self.repr {
            KernelRepr::Sinc { scale } => scale * sinc_prime(x),
            KernelRepr::Gaussian => -2.0 * PI * x * (-PI * x * x).exp(),
            KernelRepr::Zero => 0.0,
            KernelRepr::Fourier(q) => q.g_prime(x),
        }
    }

    /// `K(x, y) = g(y - x)`.
    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.g(y - x)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `(1/3) g(0) |g''(0)|` with `g''(0)` from a central second difference.
    pub fn alpha_finite_difference(&self) -> f64 {
        let h = 1e-3;
        let second = (self.g(h) - 2.0 * self.g(0.0) + self.g(-h)) / (h * h);
        self.g(0.0) * second.abs() / 3.0
    }

    pub fn is_zero(&self) -> bool {
        self.g0 == 0.0
    }
}

/// Builds `g` from a validated density: closed forms for the built-ins,
/// panel quadrature otherwise (or when forced).
pub fn kernel_from_density(
    phi: &ValidatedDensity,
    opts: &QuadratureOptions,
) -> Result<TranslationKernel> {
    let closed = if opts.force_quadrature {
        None
    } else {
        match phi.density.shape {
            Shape::Indicator {
                height,
                half_width: 0.5,
            } => Some(KernelRepr::Sinc { scale: height }),
            Shape::Gaussian => Some(KernelRepr::Gaussian),
            Shape::Zero => Some(KernelRepr::Zero),
            _ => None,
        }
    };
    let (repr, provenance) = match closed {
        Some(r) => (r, Provenance::ClosedForm),
        None => {
            let fine = FourierQuadrature::new(phi, FOURIER_ORDER);
            let coarse = FourierQuadrature::new(phi, FOURIER_ORDER - 4);
            for i in 0..=40 {
                let x = i as f64 * 0.25 + if i % 2 == 1 { 0.0625 } else { 0.0 };
                let (a, b) = (fine.g(x), coarse.g(x));
                let (da, db) = (fine.g_prime(x), coarse.g_prime(x));
                if (a - b).abs() > opts.tolerance || (da - db).abs() > opts.tolerance * 10.0 {
                    return Err(Error::QuadratureFailure(format!(
                        "Fourier transform at x = {x}: {a} vs {b}"
                    )));
                }
            }
            (KernelRepr::Fourier(Arc::new(fine)), Provenance::Quadrature)
        }
    };
    let kernel = TranslationKernel {
        name: phi.density.name.clone(),
        repr,
        g0: phi.m0,
        g2_at_0: -4.0 * PI * PI * phi.m2,
        alpha: 4.0 * PI * PI / 3.0 * phi.m0 * phi.m2,
        provenance,
    };
    let fd = kernel.alpha_finite_difference();
    if (fd - kernel.alpha).abs() > 1e-4 * kernel.alpha.max(1e-12) {
        log::warn!(
            "kernel {}: alpha from moments {} disagrees with finite-difference {}",
            kernel.name,
            kernel.alpha,
            fd
        );
    }
    if matches!(phi.density.shape, Shape::Table(_) | Shape::Custom(_)) {
        let decay = decay_check(&kernel);
        if !decay.satisfied {
            log::warn!(
                "kernel {}: slow decay (log-log slopes g: {:.3}, g': {:.3}); limit theorems may not apply",
                kernel.name,
                decay.slope_g,
                decay.slope_g_prime
            );
        }
    }
    Ok(kernel)
}

/// Convenience: validate on the default grid and build with default options.
pub fn build_kernel(phi: &SpectralDensity) -> Result<TranslationKernel> {
    let v = validate_density(phi, &ValidationGrid::for_density(phi))?;
    kernel_from_density(&v, &QuadratureOptions::default())
}

#[derive(Debug, Clone, Copy)]
pub struct DecayCheck {
    pub slope_g: f64,
    pub slope_g_prime: f64,
    pub satisfied: bool,
}

/// Least-squares slope of the log envelope of `|g|` and `|g'|` against
/// `log x` on `[1, 100]`; the decay hypotheses want both at most `-1/2`.
pub fn decay_check(kernel: &TranslationKernel) -> DecayCheck {
    if kernel.is_zero() {
        return DecayCheck {
            slope_g: f64::NEG_INFINITY,
            slope_g_prime: f64::NEG_INFINITY,
            satisfied: true,
        };
    }
    let xs: Vec<f64> = (0..=20).map(|j| 10f64.powf(j as f64 / 10.0)).collect();
    let envelope = |f: &dyn Fn(f64) -> f64, x: f64| -> f64 {
        (0..64)
            .map(|i| f(x + i as f64 / 64.0).abs())
            .fold(0.0f64, f64::max)
            .max(1e-300)
    };
    let slope = |f: &dyn Fn(f64) -> f64| -> f64 {
        let pts: Vec<(f64, f64)> = xs.iter().map(|&x| (x.ln(), envelope(f, x).ln())).collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    };
    let slope_g = slope(&|x| kernel.g(x));
    let slope_g_prime = slope(&|x| kernel.g_prime(x));
    DecayCheck {
        slope_g,
        slope_g_prime,
        satisfied: slope_g <= -0.5 && slope_g_prime <= -0.5,
    }
}

/// Resolves a kernel by its configuration name.
pub fn density_by_name(
    name: &str,
    a: Option<f64>,
    table: Option<&Path>,
) -> Result<SpectralDensity> {
    match name {
        "sine" => Ok(SpectralDensity::sine()),
        "gaussian" => Ok(SpectralDensity::gaussian()),
        "scaled_indicator" => SpectralDensity::scaled_indicator(a.ok_or_else(|| {
            Error::InvalidArgument("scaled_indicator needs a parameter `a`".into())
        })?),
        "table" => SpectralDensity::from_csv(
            table.ok_or_else(|| Error::InvalidArgument("table kernel needs a `path`".into()))?,
        ),
        "zero" => Ok(SpectralDensity::zero()),
        other => Err(Error::InvalidArgument(format!("unknown kernel `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn validated(phi: &SpectralDensity) -> Result<ValidatedDensity> {
        validate_density(phi, &ValidationGrid::for_density(phi))
    }

    fn quadrature_kernel(phi: &SpectralDensity) -> TranslationKernel {
        let v = validated(phi).unwrap();
        kernel_from_density(
            &v,
            &QuadratureOptions {
                force_quadrature: true,
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn sine_density_moments() {
        let v = validated(&SpectralDensity::sine()).unwrap();
        assert_eq!(v.m0, 1.0);
        assert!((v.m2 - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn moments_by_quadrature_match_hints() {
        let mut phi = SpectralDensity::sine();
        phi.moment0_hint = None;
        phi.moment2_hint = None;
        let v = validated(&phi).unwrap();
        assert!((v.m0 - 1.0).abs() < 1e-13);
        assert!((v.m2 - 1.0 / 12.0).abs() < 1e-13);

        let mut phi = SpectralDensity::gaussian();
        phi.moment0_hint = None;
        phi.moment2_hint = None;
        let v = validated(&phi).unwrap();
        assert!((v.m0 - 1.0).abs() < 1e-12);
        assert!((v.m2 - 1.0 / (2.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn zero_density_is_valid() {
        let v = validated(&SpectralDensity::zero()).unwrap();
        assert_eq!((v.m0, v.m2), (0.0, 0.0));
        let k = kernel_from_density(&v, &QuadratureOptions::default()).unwrap();
        assert_eq!(k.g(0.3), 0.0);
        assert_eq!(k.alpha(), 0.0);
    }

    #[test]
    fn over_unit_density_is_rejected() {
        let phi = SpectralDensity::indicator(1.5, 1.0);
        assert!(matches!(validated(&phi), Err(Error::RangeViolation { .. })));
    }

    #[test]
    fn odd_density_is_rejected() {
        let phi = SpectralDensity::custom(
            "odd",
            |t| if t > 0.0 && t < 0.3 { 0.5 } else { 0.0 },
            Some(0.3),
        );
        assert!(matches!(validated(&phi), Err(Error::NotEven { .. })));
    }

    #[test]
    fn heavy_tail_moment_diverges() {
        let phi = SpectralDensity::custom("cauchy-like", |t| 1.0 / (1.0 + t * t), None);
        let err = validated(&phi).unwrap_err();
        assert!(matches!(err, Error::DivergentMoment { .. }), "{err}");
    }

    #[test]
    fn sine_kernel_values() {
        let k = build_kernel(&SpectralDensity::sine()).unwrap();
        assert!((k.g(0.5) - 2.0 / PI).abs() < 1e-15);
        assert_eq!(k.g(0.0), 1.0);
        assert!((k.alpha() - PI * PI / 9.0).abs() < 1e-15);
        assert!((k.alpha() - 1.0966227112321507).abs() < 1e-12);
    }

    #[test]
    fn gaussian_kernel_values() {
        let k = build_kernel(&SpectralDensity::gaussian()).unwrap();
        assert!((k.g(1.0) - (-PI).exp()).abs() < 1e-16);
        assert!((k.alpha() - 2.0 * PI / 3.0).abs() < 1e-14);
        assert!((k.g2_at_0 + 2.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn quadrature_agrees_with_closed_form() {
        for phi in [
            SpectralDensity::sine(),
            SpectralDensity::gaussian(),
            SpectralDensity::scaled_indicator(0.5).unwrap(),
        ] {
            let closed = build_kernel(&phi).unwrap();
            let quad = quadrature_kernel(&phi);
            assert_eq!(quad.provenance, Provenance::Quadrature);
            for i in 0..=400 {
                let x = -10.0 + 0.05 * i as f64 + 1e-3;
                let (a, b) = (closed.g(x), quad.g(x));
                assert!(
                    (a - b).abs() <= 1e-8 * closed.g0.max(a.abs()),
                    "{}: x = {x}: {a} vs {b}",
                    phi.name()
                );
                let (da, db) = (closed.g_prime(x), quad.g_prime(x));
                assert!(
                    (da - db).abs() < 1e-8,
                    "{}: g' at {x}: {da} vs {db}",
                    phi.name()
                );
            }
        }
    }

    #[test]
    fn derivative_matches_central_difference() {
        for phi in [SpectralDensity::sine(), SpectralDensity::gaussian()] {
            let k = build_kernel(&phi).unwrap();
            let h = 1e-4;
            for i in -60..=60 {
                let x = i as f64 * 0.13;
                let fd = (k.g(x + h) - k.g(x - h)) / (2.0 * h);
                assert!((k.g_prime(x) - fd).abs() <= 1e-6, "{} at {x}", phi.name());
            }
            assert!(k.g_prime(0.0).abs() < 1e-10);
        }
    }

    #[test]
    fn alpha_two_routes_agree() {
        for phi in [
            SpectralDensity::sine(),
            SpectralDensity::gaussian(),
            SpectralDensity::scaled_indicator(0.3).unwrap(),
        ] {
            let k = build_kernel(&phi).unwrap();
            let fd = k.alpha_finite_difference();
            assert!((fd - k.alpha()).abs() < 1e-4 * k.alpha(), "{}", phi.name());
        }
    }

    #[test]
    fn tabulated_density_matches_indicator_kernel() {
        // A steep trapezoid close to the indicator of [-1/2, 1/2].
        let rows = vec![(0.0, 1.0), (0.4999, 1.0), (0.5001, 0.0), (1.0, 0.0)];
        let phi = SpectralDensity::from_table(rows).unwrap();
        let k = build_kernel(&phi).unwrap();
        assert_eq!(k.provenance, Provenance::Quadrature);
        assert!((k.g0 - 1.0).abs() < 1e-12);
        let sine = build_kernel(&SpectralDensity::sine()).unwrap();
        for x in [0.0, 0.3, 1.7, 4.2] {
            assert!((k.g(x) - sine.g(x)).abs() < 1e-6);
        }
    }

    #[test]
    fn two_sided_table_is_symmetrized() {
        let rows = vec![(-1.0, 0.0), (-0.5, 0.4), (0.0, 0.6), (0.5, 0.2), (1.0, 0.0)];
        let phi = SpectralDensity::from_table(rows).unwrap();
        assert!((phi.eval(0.5) - 0.3).abs() < 1e-15);
        assert_eq!(phi.eval(0.25), phi.eval(-0.25));
        assert!(validated(&phi).is_ok());
    }

    #[test]
    fn kernel_is_even_and_bounded() {
        for phi in [SpectralDensity::sine(), SpectralDensity::gaussian()] {
            let k = build_kernel(&phi).unwrap();
            for i in 0..500 {
                let x = i as f64 * 0.037;
                assert!((k.g(x) - k.g(-x)).abs() < 1e-10);
                assert!(k.g(x).abs() <= k.g0 + 1e-15);
            }
        }
    }

    #[test]
    fn decay_heuristic() {
        let sine = build_kernel(&SpectralDensity::sine()).unwrap();
        let d = decay_check(&sine);
        assert!(d.satisfied);
        assert!((d.slope_g + 1.0).abs() < 0.15, "{d:?}");
        let gauss = build_kernel(&SpectralDensity::gaussian()).unwrap();
        assert!(decay_check(&gauss).satisfied);
    }
}
