//! Nyström discretization of integral operators on an interval, Fredholm
//! determinants, the two-point conditional kernel, and the intensity of
//! the s-modified process computed by two independent routes.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::correlation::kernel_determinant;
use crate::error::{Error, Result};
use crate::linalg::{determinant, sorted_symmetric_eigen};
use crate::quadrature::{tensor_integrate, QuadratureRule};
use crate::spectral_kernel::TranslationKernel;

/// Eigenvalues may leave `[0, 1]` by this much before it is an error.
pub const EIG_TOL: f64 = 1e-8;
/// Nodes on the short window `[0, s]` and for the `y` integral.
pub const DEFAULT_WINDOW_ORDER: usize = 24;
/// Nodes per axis for the tensor integrals of the series route.
pub const DEFAULT_SERIES_ORDER: usize = 8;
/// Gauss–Legendre nodes per panel for sampler-scale intervals.
pub const PANEL_ORDER: usize = 12;
/// Default nodes per unit length for sampler-scale intervals.
pub const DEFAULT_NODES_PER_UNIT: usize = 12;

const MIN_ORDER: usize = 4;
const SINGULAR_TOL: f64 = 1e-12;
const SKIP_TERM_BELOW: f64 = 1e-14;
const TRUNCATION_REL_TOL: f64 = 1e-10;

/// Equal-width panels, each carrying `order` Gauss–Legendre nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanelLayout {
    pub count: usize,
    pub order: usize,
}

/// Symmetrized Nyström matrix `sqrt(w_i w_j) κ(t_i, t_j)` with its
/// spectrum. Eigenvalues are clamped to `[0, 1]`, descending; column `i`
/// of `eigenvectors` belongs to `eigenvalues[i]`.
#[derive(Debug, Clone)]
pub struct DiscretizedOperator {
    pub interval: (f64, f64),
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub panels: PanelLayout,
    pub matrix: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
}

fn check_interval(a: f64, b: f64) -> Result<()> {
    if !(b > a) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidArgument(format!("bad interval [{a}, {b}]")));
    }
    Ok(())
}

/// Single-panel Gauss–Legendre discretization of order `order`.
pub fn discretize<K>(kernel: K, interval: (f64, f64), order: usize) -> Result<DiscretizedOperator>
where
    K: Fn(f64, f64) -> f64,
{
    discretize_composite(kernel, interval, 1, order)
}

/// Composite discretization with `panels` equal panels of `order` nodes.
pub fn discretize_composite<K>(
    kernel: K,
    interval: (f64, f64),
    panels: usize,
    order: usize,
) -> Result<DiscretizedOperator>
where
    K: Fn(f64, f64) -> f64,
{
    let (a, b) = interval;
    check_interval(a, b)?;
    if order < MIN_ORDER {
        return Err(Error::OrderTooSmall {
            order,
            min: MIN_ORDER,
        });
    }
    let rule = QuadratureRule::composite(panels.max(1), order, a, b);
    let matrix = nystrom_matrix(&kernel, &rule);
    let (raw, eigenvectors) = sorted_symmetric_eigen(matrix.clone());
    let mut eigenvalues = Vec::with_capacity(raw.len());
    for v in raw {
        if !(-EIG_TOL..=1.0 + EIG_TOL).contains(&v) {
            return Err(Error::EigOutOfRange { value: v });
        }
        eigenvalues.push(v.clamp(0.0, 1.0));
    }
    Ok(DiscretizedOperator {
        interval,
        nodes: rule.nodes,
        weights: rule.weights,
        panels: PanelLayout {
            count: panels.max(1),
            order,
        },
        matrix,
        eigenvalues,
        eigenvectors,
    })
}

fn nystrom_matrix<K: Fn(f64, f64) -> f64>(kernel: &K, rule: &QuadratureRule) -> DMatrix<f64> {
    let n = rule.len();
    let sw: Vec<f64> = rule.weights.iter().map(|w| w.sqrt()).collect();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = sw[i] * sw[j] * kernel(rule.nodes[i], rule.nodes[j]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Squared Hilbert–Schmidt norm of the discretized translation kernel,
/// `Σ_ij w_i w_j g(t_j - t_i)²`; cheap convergence proxy for `Σ λ²`.
fn hilbert_schmidt_sq(kernel: &TranslationKernel, rule: &QuadratureRule) -> f64 {
    let n = rule.len();
    let mut total = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += rule.weights[j] * kernel.eval(rule.nodes[i], rule.nodes[j]).powi(2);
        }
        total += rule.weights[i] * row;
    }
    total
}

/// Sampler-scale discretization of a translation kernel on `[a, b]`:
/// panels of `PANEL_ORDER` nodes at `nodes_per_unit` density, halved in
/// width until `Σ λ²` is stable to `1e-8` (relative).
pub fn discretize_translation(
    kernel: &TranslationKernel,
    interval: (f64, f64),
    nodes_per_unit: usize,
) -> Result<DiscretizedOperator> {
    let (a, b) = interval;
    check_interval(a, b)?;
    if nodes_per_unit < MIN_ORDER {
        return Err(Error::OrderTooSmall {
            order: nodes_per_unit,
            min: MIN_ORDER,
        });
    }
    let width = PANEL_ORDER as f64 / nodes_per_unit as f64;
    let mut panels = ((b - a) / width).ceil().max(1.0) as usize;
    let mut previous = hilbert_schmidt_sq(
        kernel,
        &QuadratureRule::composite(panels, PANEL_ORDER, a, b),
    );
    for _ in 0..4 {
        let next = hilbert_schmidt_sq(
            kernel,
            &QuadratureRule::composite(2 * panels, PANEL_ORDER, a, b),
        );
        let converged = (next - previous).abs() <= 1e-8 * next.abs().max(1e-300);
        if converged {
            break;
        }
        panels *= 2;
        previous = next;
    }
    discretize_composite(|x, y| kernel.eval(x, y), interval, panels, PANEL_ORDER)
}

impl DiscretizedOperator {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn trace(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    /// `det(I - A)` by LU, independent of the eigen-decomposition.
    pub fn direct_det(&self) -> f64 {
        let n = self.len();
        let m = DMatrix::identity(n, n) - &self.matrix;
        determinant(&m)
    }
}

/// `det(1 - K) = Π (1 - λ_i)` over the clamped spectrum.
pub fn fredholm_det(op: &DiscretizedOperator) -> f64 {
    op.eigenvalues.iter().map(|l| 1.0 - l).product()
}

/// The kernel of the process conditioned on points at `x` and `y`:
/// `K(u, v) - [K(u,x) K(u,y)] T [K(x,v) K(y,v)]^T` with `T` the inverse of
/// the 2x2 Gram block at `(x, y)`.
#[derive(Debug, Clone)]
pub struct ConditionalKernel {
    pub base: TranslationKernel,
    pub x: f64,
    pub y: f64,
    pub t: [[f64; 2]; 2],
}

pub fn conditional_kernel(kernel: &TranslationKernel, x: f64, y: f64) -> Result<ConditionalKernel> {
    let kxx = kernel.eval(x, x);
    let kxy = kernel.eval(x, y);
    let kyx = kernel.eval(y, x);
    let kyy = kernel.eval(y, y);
    let det = kxx * kyy - kxy * kyx;
    if !(det > SINGULAR_TOL) {
        return Err(Error::SingularBlock { x, y, det });
    }
    Ok(ConditionalKernel {
        base: kernel.clone(),
        x,
        y,
        t: [[kyy / det, -kxy / det], [-kyx / det, kxx / det]],
    })
}

impl ConditionalKernel {
    pub fn eval(&self, u: f64, v: f64) -> f64 {
        let k = &self.base;
        let (ux, uy) = (k.eval(u, self.x), k.eval(u, self.y));
        let (xv, yv) = (k.eval(self.x, v), k.eval(self.y, v));
        let t = &self.t;
        k.eval(u, v) - ux * t[0][0] * xv - ux * t[0][1] * yv - uy * t[1][0] * xv - uy * t[1][1] * yv
    }

    /// `∫_a^b K̃(z, z) dz`, the trace of the conditioned operator.
    fn diagonal_integral(&self, a: f64, b: f64, order: usize) -> f64 {
        QuadratureRule::gauss_legendre(order, a, b).integrate(|z| self.eval(z, z).max(0.0))
    }
}

/// `rho_2(0, y) = g(0)² - g(y)²`.
fn pair_correlation(kernel: &TranslationKernel, y: f64) -> f64 {
    kernel.g0 * kernel.g0 - kernel.g(y).powi(2)
}

/// Intensity `rho_1(0; s)` of the s-modified process as
/// `∫_0^s rho_2(0, y) det(1 - K̃_{0,y}) dy`, the Fredholm determinant on
/// `[0, s]` discretized with `order` nodes. The `y` rule is open, so
/// `y = 0` is never evaluated.
pub fn modified_intensity_fredholm(
    kernel: &TranslationKernel,
    s_tilde: f64,
    order: usize,
) -> Result<f64> {
    if !(s_tilde > 0.0) {
        return Err(Error::InvalidArgument("s must be positive".into()));
    }
    if order < MIN_ORDER {
        return Err(Error::OrderTooSmall {
            order,
            min: MIN_ORDER,
        });
    }
    if kernel.is_zero() {
        return Ok(0.0);
    }
    let rule = QuadratureRule::gauss_legendre(order, 0.0, s_tilde);
    let contributions: Vec<Result<f64>> = rule
        .nodes
        .par_iter()
        .zip(rule.weights.par_iter())
        .map(|(&y, &w)| {
            let rho2 = pair_correlation(kernel, y);
            if rho2 <= SINGULAR_TOL {
                // The block cannot be inverted; D lies in [0, 1] and is 1 to
                // leading order on a window this short.
                return Ok(w * rho2.max(0.0));
            }
            let kt = conditional_kernel(kernel, 0.0, y)?;
            let op = discretize(|u, v| kt.eval(u, v), (0.0, s_tilde), order)?;
            Ok(w * rho2 * fredholm_det(&op))
        })
        .collect();
    contributions.into_iter().sum()
}

/// Exact expected number of nearest spacings shorter than `s` among the
/// points in `[0, L]`: `∫_0^s (L - y) rho_2(0, y) det(1 - K̃_{0,y})_{(0,y)} dy`,
/// the gap probability between two points at distance `y` weighted by the
/// room left for the pair inside the window.
pub fn expected_short_gaps(
    kernel: &TranslationKernel,
    length: f64,
    s: f64,
    order: usize,
) -> Result<f64> {
    if !(s > 0.0 && s <= length) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < s <= L, got s = {s}, L = {length}"
        )));
    }
    if order < MIN_ORDER {
        return Err(Error::OrderTooSmall {
            order,
            min: MIN_ORDER,
        });
    }
    if kernel.is_zero() {
        return Ok(0.0);
    }
    let rule = QuadratureRule::gauss_legendre(order, 0.0, s);
    let contributions: Vec<Result<f64>> = rule
        .nodes
        .par_iter()
        .zip(rule.weights.par_iter())
        .map(|(&y, &w)| {
            let rho2 = pair_correlation(kernel, y);
            if rho2 <= SINGULAR_TOL {
                return Ok(w * (length - y) * rho2.max(0.0));
            }
            let kt = conditional_kernel(kernel, 0.0, y)?;
            let op = discretize(|u, v| kt.eval(u, v), (0.0, y), order)?;
            Ok(w * (length - y) * rho2 * fredholm_det(&op))
        })
        .collect();
    contributions.into_iter().sum()
}

/// The inclusion–exclusion series for `rho_1(0; s)` truncated at `m_max`.
#[derive(Debug, Clone)]
pub struct SeriesIntensity {
    pub value: f64,
    /// Signed term `(-1)^m/m! ∫ rho_{m+2}` for each `m`; skipped terms are 0.
    pub terms: Vec<f64>,
    pub skipped: Vec<usize>,
    /// Hadamard bound on the omitted tail `Σ_{m > m_max}`.
    pub truncation_bound: f64,
}

/// Series route without the convergence requirement.
pub fn series_terms(
    kernel: &TranslationKernel,
    s_tilde: f64,
    m_max: usize,
    order: usize,
) -> Result<SeriesIntensity> {
    if !(s_tilde > 0.0 && s_tilde <= 0.5) {
        return Err(Error::InvalidArgument(format!(
            "series route needs 0 < s <= 0.5, got {s_tilde}"
        )));
    }
    if m_max > 6 {
        return Err(Error::TooLarge {
            what: "series order",
            size: m_max,
            limit: 6,
        });
    }
    if order < 2 {
        return Err(Error::OrderTooSmall { order, min: 2 });
    }
    let per_term = term_bounds(kernel, s_tilde, m_max)?;
    let rule = QuadratureRule::gauss_legendre(order, 0.0, s_tilde);
    let mut terms = Vec::with_capacity(m_max + 1);
    let mut skipped = Vec::new();
    let mut factorial = 1.0;
    for m in 0..=m_max {
        if m > 0 {
            factorial *= m as f64;
        }
        if m >= 3 && per_term.bounds[m] < SKIP_TERM_BELOW {
            terms.push(0.0);
            skipped.push(m);
            continue;
        }
        let integral = tensor_integrate(&rule, m + 1, |yz| {
            let mut pts = Vec::with_capacity(m + 2);
            pts.push(0.0);
            pts.extend_from_slice(yz);
            kernel_determinant(&pts, kernel)
        });
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        terms.push(sign * integral / factorial);
    }
    Ok(SeriesIntensity {
        value: terms.iter().sum(),
        terms,
        skipped,
        truncation_bound: per_term.tail,
    })
}

/// Series route `Σ_m (-1)^m/m! ∫_{[0,s]^{m+1}} rho_{m+2}(0, y, z)`; fails
/// when the tail bound exceeds `1e-10` of the value.
pub fn modified_intensity_series(
    kernel: &TranslationKernel,
    s_tilde: f64,
    m_max: usize,
    order: usize,
) -> Result<SeriesIntensity> {
    let out = series_terms(kernel, s_tilde, m_max, order)?;
    if out.truncation_bound > TRUNCATION_REL_TOL * out.value.abs() {
        return Err(Error::TruncationNotConverged {
            bound: out.truncation_bound,
            value: out.value,
        });
    }
    Ok(out)
}

struct TermBounds {
    bounds: Vec<f64>,
    tail: f64,
}

/// Since `rho_{m+2}(0, y, z) = rho_2(0, y) K̃[z]` and `K̃` is positive
/// semidefinite, Hadamard gives `|term m| <= (1/m!) ∫ rho_2(0,y) τ(y)^m dy`
/// with `τ(y) = ∫_0^s K̃(z, z) dz`.
fn term_bounds(kernel: &TranslationKernel, s_tilde: f64, m_max: usize) -> Result<TermBounds> {
    let rule = QuadratureRule::gauss_legendre(DEFAULT_WINDOW_ORDER, 0.0, s_tilde);
    let mut bounds = vec![0.0; m_max + 1];
    let mut tail = 0.0;
    for (&y, &w) in rule.nodes.iter().zip(&rule.weights) {
        let rho2 = pair_correlation(kernel, y).max(0.0);
        if rho2 == 0.0 {
            continue;
        }
        let tau = if rho2 <= SINGULAR_TOL {
            s_tilde * kernel.g0
        } else {
            conditional_kernel(kernel, 0.0, y)?.diagonal_integral(
                0.0,
                s_tilde,
                DEFAULT_WINDOW_ORDER,
            )
        };
        let mut power = 1.0; // tau^m / m!
        for (m, b) in bounds.iter_mut().enumerate() {
            if m > 0 {
                power *= tau / m as f64;
            }
            *b += w * rho2 * power;
        }
        let mut t = 0.0;
        for m in m_max + 1..m_max + 40 {
            power *= tau / m as f64;
            t += power;
            if power <= 1e-18 * t {
                break;
            }
        }
        tail += w * rho2 * t;
    }
    Ok(TermBounds { bounds, tail })
}

/// One row of the `rho_1(0; s) / (α s³)` table.
#[derive(Debug, Clone, serde::Serialize)]
pub struct IntensityRow {
    pub s_tilde: f64,
    pub fredholm: f64,
    pub series: f64,
    pub alpha_s3: f64,
    pub ratio: f64,
    pub route_rel_diff: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct IntensityTable {
    pub alpha: f64,
    pub rows: Vec<IntensityRow>,
    /// Richardson extrapolation of the ratio to `s -> 0`.
    pub extrapolated_ratio: f64,
    /// Convergence order estimated from the last three rows.
    pub estimated_order: f64,
}

/// Evaluates both intensity routes at each `s` (expected to be a halving
/// sequence) and extrapolates the ratio to `α s³`.
pub fn intensity_table(kernel: &TranslationKernel, s_values: &[f64]) -> Result<IntensityTable> {
    let alpha = kernel.alpha();
    let mut rows = Vec::with_capacity(s_values.len());
    for &s in s_values {
        let fredholm = modified_intensity_fredholm(kernel, s, DEFAULT_WINDOW_ORDER)?;
        let series = modified_intensity_series(kernel, s, 4, DEFAULT_SERIES_ORDER)?.value;
        let alpha_s3 = alpha * s.powi(3);
        rows.push(IntensityRow {
            s_tilde: s,
            fredholm,
            series,
            alpha_s3,
            ratio: if alpha_s3 > 0.0 {
                fredholm / alpha_s3
            } else {
                f64::NAN
            },
            route_rel_diff: (fredholm - series).abs() / fredholm.abs().max(f64::MIN_POSITIVE),
        });
    }
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let (extrapolated_ratio, estimated_order) = richardson(&ratios);
    Ok(IntensityTable {
        alpha,
        rows,
        extrapolated_ratio,
        estimated_order,
    })
}

/// Richardson extrapolation of a sequence sampled at halving step sizes,
/// with the order estimated from the last three values (order 1 when the
/// estimate is unusable).
pub fn richardson(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    match n {
        0 => (f64::NAN, f64::NAN),
        1 => (values[0], f64::NAN),
        _ => {
            let mut p = 1.0;
            if n >= 3 {
                let d1 = values[n - 2] - values[n - 3];
                let d2 = values[n - 1] - values[n - 2];
                let q = d1 / d2;
                if q.is_finite() && q > 1.0 {
                    p = q.log2();
                }
            }
            let last = values[n - 1];
            let prev = values[n - 2];
            (last + (last - prev) / (2f64.powf(p) - 1.0), p)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_kernel::{build_kernel, SpectralDensity};
    use std::f64::consts::PI;

    fn sine() -> TranslationKernel {
        build_kernel(&SpectralDensity::sine()).unwrap()
    }

    #[test]
    fn zero_operator() {
        let op = discretize(|_, _| 0.0, (0.0, 3.0), 16).unwrap();
        assert!(op.eigenvalues.iter().all(|&l| l == 0.0));
        assert_eq!(fredholm_det(&op), 1.0);
    }

    #[test]
    fn order_and_interval_errors() {
        assert!(matches!(
            discretize(|_, _| 0.0, (0.0, 1.0), 3),
            Err(Error::OrderTooSmall { .. })
        ));
        assert!(discretize(|_, _| 0.0, (1.0, 1.0), 8).is_err());
        // 2 * indicator has eigenvalue 2 on [0, 1].
        assert!(matches!(
            discretize(|_, _| 2.0, (0.0, 1.0), 8),
            Err(Error::EigOutOfRange { .. })
        ));
    }

    #[test]
    fn rank_one_operator() {
        // psi(u) = sqrt(2) sin(π u) on [0, 1] has unit L² norm.
        let c = 0.37;
        let psi = |u: f64| 2f64.sqrt() * (PI * u).sin();
        let op = discretize(|u, v| c * psi(u) * psi(v), (0.0, 1.0), 20).unwrap();
        assert!((op.eigenvalues[0] - c).abs() < 1e-13);
        assert!(op.eigenvalues[1..].iter().all(|&l| l < 1e-13));
        assert!((fredholm_det(&op) - (1.0 - c)).abs() < 1e-13);
    }

    #[test]
    fn sine_trace_identity() {
        let k = sine();
        let op = discretize(|x, y| k.eval(x, y), (0.0, 10.0), 80).unwrap();
        assert!((op.trace() - 10.0).abs() < 1e-6);
        let sw: f64 = op.weights.iter().sum();
        assert!((sw - 10.0).abs() < 1e-12);
        assert!(crate::linalg::max_asymmetry(&op.matrix) < 1e-12);
    }

    #[test]
    fn eigenvalues_stable_under_doubling() {
        let k = sine();
        let a = discretize(|x, y| k.eval(x, y), (0.0, 0.2), DEFAULT_WINDOW_ORDER).unwrap();
        let b = discretize(|x, y| k.eval(x, y), (0.0, 0.2), 2 * DEFAULT_WINDOW_ORDER).unwrap();
        for i in 0..a.len() {
            assert!((a.eigenvalues[i] - b.eigenvalues[i]).abs() < 1e-8);
        }
        let c = discretize_translation(&k, (0.0, 10.0), DEFAULT_NODES_PER_UNIT).unwrap();
        let d = discretize_composite(
            |x, y| k.eval(x, y),
            (0.0, 10.0),
            2 * c.panels.count,
            PANEL_ORDER,
        )
        .unwrap();
        for i in 0..20 {
            assert!((c.eigenvalues[i] - d.eigenvalues[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn determinant_two_routes() {
        let k = sine();
        let op = discretize(|x, y| k.eval(x, y), (0.0, 0.1), DEFAULT_WINDOW_ORDER).unwrap();
        let a = fredholm_det(&op);
        let b = op.direct_det();
        assert!((a - b).abs() <= 1e-10 * b.abs());
        // longer window: product of (1 - λ) with larger λ
        let op2 = discretize(|x, y| k.eval(x, y), (0.0, 2.0), 40).unwrap();
        assert!((fredholm_det(&op2) - op2.direct_det()).abs() <= 1e-10 * op2.direct_det().abs());
    }

    #[test]
    fn determinant_decreases_with_length() {
        let k = sine();
        let mut last = 1.0;
        for len in [0.1, 0.5, 1.0, 2.0, 3.0] {
            let d = fredholm_det(&discretize(|x, y| k.eval(x, y), (0.0, len), 40).unwrap());
            assert!(d < last, "{len}: {d} !< {last}");
            last = d;
        }
    }

    #[test]
    fn conditional_kernel_annihilates_conditioned_points() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for phi in [SpectralDensity::sine(), SpectralDensity::gaussian()] {
            let k = build_kernel(&phi).unwrap();
            let (x, y) = (0.3, 0.9);
            let kt = conditional_kernel(&k, x, y).unwrap();
            for _ in 0..20 {
                let v: f64 = rng.random_range(-3.0..3.0);
                let u: f64 = rng.random_range(-3.0..3.0);
                assert!(kt.eval(x, v).abs() < 1e-10);
                assert!(kt.eval(y, v).abs() < 1e-10);
                assert!(kt.eval(u, x).abs() < 1e-10);
                assert!(kt.eval(u, y).abs() < 1e-10);
                assert!((kt.eval(u, v) - kt.eval(v, u)).abs() < 1e-12);
            }
            let op = discretize(|u, v| kt.eval(u, v), (0.0, 4.0), 40).unwrap();
            assert!(op.eigenvalues.iter().all(|&l| l >= 0.0));
        }
    }

    #[test]
    fn conditional_kernel_far_field_and_singularity() {
        let k = sine();
        let kt = conditional_kernel(&k, 0.0, 0.4).unwrap();
        for (u, v) in [(100.0, 100.5), (100.2, 101.7), (-100.0, -99.1)] {
            assert!((kt.eval(u, v) - k.eval(u, v)).abs() < 1e-1);
        }
        let zero = build_kernel(&SpectralDensity::zero()).unwrap();
        assert!(matches!(
            conditional_kernel(&zero, 0.0, 0.4),
            Err(Error::SingularBlock { .. })
        ));
    }

    #[test]
    fn conditioning_factorizes_determinants() {
        let k = sine();
        let (x, y) = (0.0, 0.15);
        let zs = [0.05, 0.11, 0.19];
        let kt = conditional_kernel(&k, x, y).unwrap();
        let mut pts = vec![x, y];
        pts.extend_from_slice(&zs);
        let lhs = kernel_determinant(&pts, &k);
        let tilde = DMatrix::from_fn(3, 3, |i, j| kt.eval(zs[i], zs[j]));
        let rhs = kernel_determinant(&[x, y], &k) * determinant(&tilde);
        assert!(
            (lhs - rhs).abs() < 1e-14 + 1e-6 * lhs.abs(),
            "{lhs} vs {rhs}"
        );
    }

    #[test]
    fn zero_kernel_intensity() {
        let zero = build_kernel(&SpectralDensity::zero()).unwrap();
        assert_eq!(modified_intensity_fredholm(&zero, 0.1, 24).unwrap(), 0.0);
        assert_eq!(
            modified_intensity_series(&zero, 0.1, 4, 8).unwrap().value,
            0.0
        );
    }

    #[test]
    fn small_window_intensity_close_to_alpha_s3() {
        let k = sine();
        let s = 0.05;
        let v = modified_intensity_fredholm(&k, s, DEFAULT_WINDOW_ORDER).unwrap();
        let ratio = v / (k.alpha() * s.powi(3));
        assert!((0.9..=1.1).contains(&ratio), "{ratio}");
    }

    #[test]
    fn leading_series_term_is_pair_integral() {
        let k = sine();
        let s = 0.2;
        let out = series_terms(&k, s, 0, DEFAULT_SERIES_ORDER).unwrap();
        let oracle =
            crate::quadrature::integrate_adaptive(&|t: f64| 1.0 - k.g(t).powi(2), 0.0, s, 1e-16)
                .unwrap();
        assert!(
            (out.value - oracle).abs() < 1e-14,
            "{} vs {oracle}",
            out.value
        );
        // truncating after the first term is far from converged
        assert!(matches!(
            modified_intensity_series(&k, s, 0, DEFAULT_SERIES_ORDER),
            Err(Error::TruncationNotConverged { .. })
        ));
    }

    #[test]
    fn routes_agree() {
        for phi in [SpectralDensity::sine(), SpectralDensity::gaussian()] {
            let k = build_kernel(&phi).unwrap();
            for s in [0.2, 0.1] {
                let f = modified_intensity_fredholm(&k, s, DEFAULT_WINDOW_ORDER).unwrap();
                let ser = modified_intensity_series(&k, s, 4, DEFAULT_SERIES_ORDER).unwrap();
                assert!(
                    (f - ser.value).abs() <= 1e-6 * f,
                    "{} s={s}: {f} vs {}",
                    phi.name(),
                    ser.value
                );
            }
        }
    }

    #[test]
    fn ratio_converges_to_alpha() {
        for phi in [SpectralDensity::sine(), SpectralDensity::gaussian()] {
            let k = build_kernel(&phi).unwrap();
            let table = intensity_table(&k, &[0.2, 0.1, 0.05, 0.025]).unwrap();
            let dist: Vec<f64> = table.rows.iter().map(|r| (r.ratio - 1.0).abs()).collect();
            assert!(dist.windows(2).all(|w| w[1] < w[0]), "{dist:?}");
            assert!((table.extrapolated_ratio - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn richardson_on_known_sequence() {
        let vals: Vec<f64> = [0.4, 0.2, 0.1, 0.05]
            .iter()
            .map(|h: &f64| 1.0 + 3.0 * h * h)
            .collect();
        let (lim, p) = richardson(&vals);
        assert!((p - 2.0).abs() < 1e-9);
        assert!((lim - 1.0).abs() < 1e-12);
    }
    #[test]
    fn expected_short_gaps_small_window_limit() {
        let k = sine();
        let s = 0.05;
        let e = expected_short_gaps(&k, 50.0, s, DEFAULT_WINDOW_ORDER).unwrap();
        let lead = 50.0 * k.alpha() * s.powi(3);
        assert!(e < lead && e / lead > 0.99, "{e} vs {lead}");
        let a = expected_short_gaps(&k, 50.0, 0.3, 16).unwrap();
        let b = expected_short_gaps(&k, 50.0, 0.3, 24).unwrap();
        assert!((a - b).abs() < 1e-10 * b, "{a} vs {b}");
        let zero = crate::spectral_kernel::build_kernel(&crate::SpectralDensity::zero()).unwrap();
        assert_eq!(expected_short_gaps(&zero, 50.0, 0.3, 16).unwrap(), 0.0);
    }
}
