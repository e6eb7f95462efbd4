//! Gauss–Legendre rules, composite panels, adaptive integration and
//! barycentric interpolation on Legendre nodes.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// A quadrature rule on a finite interval, nodes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub a: f64,
    pub b: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre_reference(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d.is_finite() { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

impl QuadratureRule {
    /// `n`-point Gauss–Legendre rule mapped to [a, b].
    pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Self {
        let (t, w) = gauss_legendre_reference(n);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        Self {
            a,
            b,
            nodes: t.iter().map(|&t| mid + half * t).collect(),
            weights: w.iter().map(|&w| half * w).collect(),
        }
    }

    /// Composite rule: `panels` equal panels of `order` Gauss–Legendre nodes.
    pub fn composite(panels: usize, order: usize, a: f64, b: f64) -> Self {
        let (t, w) = gauss_legendre_reference(order);
        let width = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let lo = a + width * p as f64;
            let mid = lo + 0.5 * width;
            for (ti, wi) in t.iter().zip(&w) {
                nodes.push(mid + 0.5 * width * ti);
                weights.push(0.5 * width * wi);
            }
        }
        Self {
            a,
            b,
            nodes,
            weights,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Tensor-product Gauss–Legendre integral of `f` over `[a, b]^dim`.
pub fn tensor_integrate<F: FnMut(&[f64]) -> f64>(
    rule: &QuadratureRule,
    dim: usize,
    mut f: F,
) -> f64 {
    let n = rule.len();
    if dim == 0 {
        return f(&[]);
    }
    let mut idx = vec![0usize; dim];
    let mut point: Vec<f64> = vec![rule.nodes[0]; dim];
    let mut total = 0.0;
    loop {
        let mut w = 1.0;
        for (d, &i) in idx.iter().enumerate() {
            point[d] = rule.nodes[i];
            w *= rule.weights[i];
        }
        total += w * f(&point);
        // odometer increment
        let mut d = 0;
        loop {
            idx[d] += 1;
            if idx[d] < n {
                break;
            }
            idx[d] = 0;
            d += 1;
            if d == dim {
                return total;
            }
        }
    }
}

const ADAPTIVE_ORDER: usize = 15;
const MAX_DEPTH: usize = 40;

/// Adaptive Gauss–Legendre integration: a panel is accepted when the
/// one-panel and two-half-panel estimates agree to `tol` (absolute,
/// scaled by the panel's share of the interval).
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (t, w) = gauss_legendre_reference(ADAPTIVE_ORDER);
    let panel = |lo: f64, hi: f64| -> f64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        t.iter()
            .zip(&w)
            .map(|(&ti, &wi)| wi * f(mid + half * ti))
            .sum::<f64>()
            * half
    };
    let total_width = (b - a).abs();
    let mut stack = vec![(a, b, panel(a, b), 0usize)];
    let mut sum = 0.0;
    let mut compensation = 0.0;
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = panel(lo, mid);
        let right = panel(mid, hi);
        let refined = left + right;
        let budget = tol * ((hi - lo).abs() / total_width).max(1e-3);
        if (refined - whole).abs() <= budget || (hi - lo).abs() < 1e-13 * total_width {
            // Kahan summation keeps many tiny panels from drifting.
            let y = refined - compensation;
            let s = sum + y;
            compensation = (s - sum) - y;
            sum = s;
        } else if depth >= MAX_DEPTH {
            return Err(Error::QuadratureFailure(format!(
                "adaptive subdivision exceeded depth {MAX_DEPTH} on [{lo}, {hi}]"
            )));
        } else {
            stack.push((mid, hi, right, depth + 1));
            stack.push((lo, mid, left, depth + 1));
        }
        if !sum.is_finite() {
            return Err(Error::QuadratureFailure("non-finite integrand".into()));
        }
    }
    Ok(sum)
}

/// Barycentric weights for Gauss–Legendre nodes (ascending) given their
/// quadrature weights on the reference interval.
pub fn legendre_barycentric_weights(nodes: &[f64], weights: &[f64]) -> Vec<f64> {
    nodes
        .iter()
        .zip(weights)
        .enumerate()
        .map(|(j, (&x, &w))| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * ((1.0 - x * x) * w).sqrt()
        })
        .collect()
}

/// Lagrange basis values at `x` through `nodes`, written to `out`, using
/// the second barycentric formula.
pub fn barycentric_basis(nodes: &[f64], bary: &[f64], x: f64, out: &mut [f64]) {
    for (j, &xj) in nodes.iter().enumerate() {
        if x == xj {
            out.iter_mut().for_each(|o| *o = 0.0);
            out[j] = 1.0;
            return;
        }
    }
    let mut denom = 0.0;
    for ((o, &xj), &bj) in out.iter_mut().zip(nodes).zip(bary) {
        let t = bj / (x - xj);
        *o = t;
        denom += t;
    }
    out.iter_mut().for_each(|o| *o /= denom);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_order_rules_match_tables() {
        let (x, w) = gauss_legendre_reference(3);
        assert!((x[2] - (0.6f64).sqrt()).abs() < 1e-15);
        assert!(x[1].abs() < 1e-15);
        assert!((w[0] - 5.0 / 9.0).abs() < 1e-15);
        assert!((w[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn high_order_rule_integrates_polynomials() {
        for n in [5, 24, 120, 600] {
            let rule = QuadratureRule::gauss_legendre(n, 0.0, 2.0);
            let sum_w: f64 = rule.weights.iter().sum();
            assert!((sum_w - 2.0).abs() < 1e-12, "n = {n}: {sum_w}");
            // x^(2n-1) is the highest exact degree; use something lower.
            let deg = (2 * n - 1).min(9) as i32;
            let exact = 2f64.powi(deg + 1) / (deg + 1) as f64;
            let got = rule.integrate(|x| x.powi(deg));
            assert!((got - exact).abs() < 1e-11 * exact, "n = {n}");
        }
    }

    #[test]
    fn composite_weights_sum_to_length() {
        let rule = QuadratureRule::composite(50, 12, 0.0, 50.0);
        assert_eq!(rule.len(), 600);
        let s: f64 = rule.weights.iter().sum();
        assert!((s - 50.0).abs() < 1e-12);
        assert!(rule.nodes.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn adaptive_handles_jumps() {
        let f = |t: f64| if t.abs() <= 0.5 { t * t } else { 0.0 };
        let v = integrate_adaptive(&f, -1.0, 1.0, 1e-13).unwrap();
        assert!((v - 1.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn tensor_rule_integrates_product() {
        let rule = QuadratureRule::gauss_legendre(6, 0.0, 1.0);
        let v = tensor_integrate(&rule, 3, |p| p[0] * p[1] * p[1] * p[2].powi(3));
        assert!((v - 1.0 / 2.0 / 3.0 / 4.0).abs() < 1e-14);
    }

    #[test]
    fn barycentric_reproduces_polynomials() {
        let (x, w) = gauss_legendre_reference(12);
        let bary = legendre_barycentric_weights(&x, &w);
        let f = |t: f64| 3.0 * t.powi(11) - t.powi(4) + 0.5;
        let values: Vec<f64> = x.iter().map(|&t| f(t)).collect();
        let mut basis = vec![0.0; 12];
        for &t in &[-1.0, -0.37, 0.0, 0.81, 1.0] {
            barycentric_basis(&x, &bary, t, &mut basis);
            let got: f64 = basis.iter().zip(&values).map(|(b, v)| b * v).sum();
            assert!((got - f(t)).abs() < 1e-12, "t = {t}");
        }
    }
}
