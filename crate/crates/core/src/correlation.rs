//! Correlation and cluster functions of a determinantal process at finite
//! point tuples, their Möbius inversion, the cumulant transform, and the
//! determinant inequalities the spacing estimates rely on.

use std::ops::{Add, Mul};

use nalgebra::DMatrix;
use num_traits::{FromPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::{determinant, min_symmetric_eigenvalue};
use crate::spectral_kernel::TranslationKernel;

/// Largest tuple for determinant and cyclic-permutation evaluation.
pub const MAX_TUPLE: usize = 12;
/// Largest tuple for set-partition (Bell number) enumeration.
pub const MAX_PARTITION: usize = 10;
/// Largest order of the cumulant transform.
pub const MAX_CUMULANT: usize = 10;

const MIN_GAP: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

/// Distinct points `(x_1, ..., x_k)`, `1 <= k <= 12`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointTuple(Vec<f64>);

impl PointTuple {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("point tuple is empty".into()));
        }
        if points.len() > MAX_TUPLE {
            return Err(Error::TooLarge {
                what: "tuple size",
                size: points.len(),
                limit: MAX_TUPLE,
            });
        }
        let mut sorted = points.clone();
        sorted.sort_by(f64::total_cmp);
        if let Some(gap) = sorted
            .windows(2)
            .map(|w| w[1] - w[0])
            .find(|&gap| !(gap > MIN_GAP))
        {
            return Err(Error::DegenerateTuple { gap });
        }
        Ok(Self(points))
    }

    pub fn points(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `(K(x_i, x_j))_{i,j}` with `K(x, y) = g(y - x)`.
pub fn gram_matrix(points: &[f64], kernel: &TranslationKernel) -> DMatrix<f64> {
    let k = points.len();
    let mut m = DMatrix::zeros(k, k);
    for i in 0..k {
        m[(i, i)] = kernel.g0;
        for j in 0..i {
            let v = kernel.eval(points[i], points[j]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// `K[x_1, ..., x_k] = det(K(x_i, x_j))` without tuple validation.
pub fn kernel_determinant(points: &[f64], kernel: &TranslationKernel) -> f64 {
    determinant(&gram_matrix(points, kernel))
}

/// The `k`-point correlation function `rho_k = det(K(x_i, x_j))`.
/// Round-off negatives down to `-1e-10` are reported as zero.
pub fn correlation(points: &PointTuple, kernel: &TranslationKernel) -> Result<f64> {
    let d = kernel_determinant(points.points(), kernel);
    let scale = kernel.g0.abs().max(1.0).powi(points.len() as i32);
    if d >= 0.0 {
        Ok(d)
    } else if d >= -PSD_TOL * scale {
        Ok(0.0)
    } else {
        Err(Error::NotPsd { min_eigenvalue: d })
    }
}

/// Cluster function as the signed sum over the `(k-1)!` cyclic
/// permutations: `(-1)^{k-1} Σ_σ Π K(x_i, x_σ(i))`.
pub fn cluster_cyclic(points: &PointTuple, kernel: &TranslationKernel) -> Result<f64> {
    let k = points.len();
    if k > MAX_TUPLE {
        return Err(Error::TooLarge {
            what: "tuple size",
            size: k,
            limit: MAX_TUPLE,
        });
    }
    let m = gram_matrix(points.points(), kernel);
    if k == 1 {
        return Ok(m[(0, 0)]);
    }
    // Cycle 0 -> a_1 -> ... -> a_{k-1} -> 0 for every ordering of 1..k.
    let mut rest: Vec<usize> = (1..k).collect();
    let cycle_product = |order: &[usize]| -> f64 {
        let mut p = m[(0, order[0])];
        for w in order.windows(2) {
            p *= m[(w[0], w[1])];
        }
        p * m[(order[order.len() - 1], 0)]
    };
    let mut total = cycle_product(&rest);
    // Heap's algorithm, iterative form.
    let n = rest.len();
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                rest.swap(0, i);
            } else {
                rest.swap(c[i], i);
            }
            total += cycle_product(&rest);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    let sign = if (k - 1).is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign * total)
}

/// Calls `visit` with the block bitmasks of every set partition of
/// `{0, ..., k-1}`, enumerated through restricted-growth strings.
pub fn for_each_set_partition<F: FnMut(&[u32])>(k: usize, mut visit: F) {
    if k == 0 {
        visit(&[]);
        return;
    }
    let mut rgs = vec![0usize; k];
    let mut blocks = Vec::with_capacity(k);
    fn recurse<F: FnMut(&[u32])>(
        pos: usize,
        max_label: usize,
        rgs: &mut [usize],
        blocks: &mut Vec<u32>,
        visit: &mut F,
    ) {
        let k = rgs.len();
        if pos == k {
            blocks.clear();
            blocks.resize(max_label + 1, 0);
            for (i, &label) in rgs.iter().enumerate() {
                blocks[label] |= 1 << i;
            }
            visit(blocks);
            return;
        }
        for label in 0..=max_label + 1 {
            rgs[pos] = label;
            recurse(pos + 1, max_label.max(label), rgs, blocks, visit);
        }
    }
    // rgs[0] = 0 always; recurse over the rest with current max 0.
    recurse(1, 0, &mut rgs, &mut blocks, &mut visit);
}

fn subset(points: &[f64], mask: u32) -> Vec<f64> {
    points
        .iter()
        .enumerate()
        .filter(|(i, _)| mask & (1 << i) != 0)
        .map(|(_, &x)| x)
        .collect()
}

fn check_partition_size(k: usize) -> Result<()> {
    if k > MAX_PARTITION {
        return Err(Error::TooLarge {
            what: "tuple size for partition enumeration",
            size: k,
            limit: MAX_PARTITION,
        });
    }
    Ok(())
}

/// Cluster function from correlation functions by Möbius inversion over
/// set partitions: `Σ_G (-1)^{m-1} (m-1)! Π_j rho_{|G_j|}`.
pub fn cluster_from_correlations(points: &PointTuple, kernel: &TranslationKernel) -> Result<f64> {
    let k = points.len();
    check_partition_size(k)?;
    let mut rho = vec![f64::NAN; 1 << k];
    let mut total = 0.0;
    let mut factorial = vec![1.0; k + 1];
    for i in 1..=k {
        factorial[i] = factorial[i - 1] * i as f64;
    }
    for_each_set_partition(k, |blocks| {
        let m = blocks.len();
        let mut term = if m % 2 == 1 { 1.0 } else { -1.0 } * factorial[m - 1];
        for &mask in blocks {
            let slot = &mut rho[mask as usize];
            if slot.is_nan() {
                *slot = kernel_determinant(&subset(points.points(), mask), kernel);
            }
            term *= *slot;
        }
        total += term;
    });
    Ok(total)
}

/// Correlation function from a cluster-function oracle:
/// `rho_k = Σ_G Π_j r_{|G_j|}(x(G_j))`.
pub fn correlations_from_clusters<F>(points: &PointTuple, cluster_oracle: F) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let k = points.len();
    check_partition_size(k)?;
    let mut r = vec![f64::NAN; 1 << k];
    let mut total = 0.0;
    for_each_set_partition(k, |blocks| {
        let mut term = 1.0;
        for &mask in blocks {
            let slot = &mut r[mask as usize];
            if slot.is_nan() {
                *slot = cluster_oracle(&subset(points.points(), mask));
            }
            term *= *slot;
        }
        total += term;
    });
    Ok(total)
}

/// Stirling numbers of the second kind `S(n, j)` for `0 <= j <= n <= n_max`,
/// from `S(n, j) = j S(n-1, j) + S(n-1, j-1)`.
pub fn stirling2_table(n_max: usize) -> Vec<Vec<u64>> {
    let mut s = vec![vec![0u64; n_max + 1]; n_max + 1];
    s[0][0] = 1;
    for n in 1..=n_max {
        for j in 1..=n {
            s[n][j] = j as u64 * s[n - 1][j] + s[n - 1][j - 1];
        }
    }
    s
}

/// Cumulants `C_1..C_{n_max}` of the counting variable from the integrated
/// cluster functions `V_1, V_2, ...`, by comparing coefficients in
/// `Σ C_n z^n/n! = Σ V_n (e^z - 1)^n / n!`, i.e. `C_n = Σ_j S(n, j) V_j`.
pub fn cumulants_from_cluster_integrals<T>(v: &[T], n_max: usize) -> Result<Vec<T>>
where
    T: Clone + Zero + Add<Output = T> + Mul<Output = T> + FromPrimitive,
{
    if n_max > MAX_CUMULANT {
        return Err(Error::TooLarge {
            what: "cumulant order",
            size: n_max,
            limit: MAX_CUMULANT,
        });
    }
    if n_max > v.len() {
        return Err(Error::InvalidArgument(format!(
            "{n_max} cumulants requested from {} cluster integrals",
            v.len()
        )));
    }
    let s = stirling2_table(n_max);
    Ok((1..=n_max)
        .map(|n| {
            (1..=n).fold(T::zero(), |acc, j| {
                let coeff = T::from_u64(s[n][j]).expect("Stirling number fits the scalar type");
                acc + coeff * v[j - 1].clone()
            })
        })
        .collect())
}

/// Truncated correlation of two conditioning windows:
/// `K[x1, y1, x2, y2, z...] - K[x1, y1, z in window 1] K[x2, y2, z in window 2]`
/// where window `i` is `[x_i, x_i + s_tilde]`.
pub fn truncated_pair_correlation(
    (x1, x2): (f64, f64),
    (y1, y2): (f64, f64),
    zs: &[f64],
    s_tilde: f64,
    kernel: &TranslationKernel,
) -> Result<f64> {
    if !(s_tilde > 0.0) {
        return Err(Error::InvalidArgument(
            "window width must be positive".into(),
        ));
    }
    if (x1 - x2).abs() <= s_tilde {
        return Err(Error::InvalidArgument(format!(
            "windows overlap: |x1 - x2| = {} <= {s_tilde}",
            (x1 - x2).abs()
        )));
    }
    let in_window = |x: f64, u: f64| u >= x && u <= x + s_tilde;
    if !in_window(x1, y1) || !in_window(x2, y2) {
        return Err(Error::InvalidArgument(
            "y_i must lie in [x_i, x_i + s]".into(),
        ));
    }
    let total = 4 + zs.len();
    if total > MAX_TUPLE {
        return Err(Error::TooLarge {
            what: "tuple size",
            size: total,
            limit: MAX_TUPLE,
        });
    }
    let mut first = vec![x1, y1];
    let mut second = vec![x2, y2];
    for &z in zs {
        match (in_window(x1, z), in_window(x2, z)) {
            (true, false) => first.push(z),
            (false, true) => second.push(z),
            (a, b) => {
                return Err(Error::PartitionAmbiguity {
                    z,
                    count: a as usize + b as usize,
                })
            }
        }
    }
    let mut all = vec![x1, y1, x2, y2];
    all.extend_from_slice(zs);
    Ok(kernel_determinant(&all, kernel)
        - kernel_determinant(&first, kernel) * kernel_determinant(&second, kernel))
}

#[derive(Debug, Clone, Copy)]
pub struct FischerOutcome {
    pub holds: bool,
    pub det_m: f64,
    pub det_a_times_det_c: f64,
}

/// Fischer's inequality `det [[A, B], [B^T, C]] <= det A det C` for a
/// positive semidefinite block matrix; `B` is `n x m`.
pub fn fischer_check(
    a: &DMatrix<f64>,
    c: &DMatrix<f64>,
    b: &DMatrix<f64>,
) -> Result<FischerOutcome> {
    let (n, m) = (a.nrows(), c.nrows());
    if a.ncols() != n || c.ncols() != m || b.nrows() != n || b.ncols() != m {
        return Err(Error::InvalidArgument("block shapes do not match".into()));
    }
    let mut full = DMatrix::zeros(n + m, n + m);
    full.view_mut((0, 0), (n, n)).copy_from(a);
    full.view_mut((n, n), (m, m)).copy_from(c);
    full.view_mut((0, n), (n, m)).copy_from(b);
    full.view_mut((n, 0), (m, n)).copy_from(&b.transpose());
    let scale = full.amax().max(1.0);
    let min_eig = min_symmetric_eigenvalue(&full);
    if min_eig < -PSD_TOL * scale {
        return Err(Error::NotPsd {
            min_eigenvalue: min_eig,
        });
    }
    let det_m = determinant(&full);
    let det_a_times_det_c = determinant(a) * determinant(c);
    Ok(FischerOutcome {
        holds: det_m <= det_a_times_det_c + PSD_TOL * det_a_times_det_c.abs().max(1.0),
        det_m,
        det_a_times_det_c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_kernel::{build_kernel, SpectralDensity};
    use num_rational::Ratio;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sine() -> TranslationKernel {
        build_kernel(&SpectralDensity::sine()).unwrap()
    }

    /// Cofactor (Laplace) expansion along the first row.
    fn cofactor_det(m: &DMatrix<f64>) -> f64 {
        let n = m.nrows();
        if n == 1 {
            return m[(0, 0)];
        }
        (0..n)
            .map(|j| {
                let minor = m.clone().remove_row(0).remove_column(j);
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * m[(0, j)] * cofactor_det(&minor)
            })
            .sum()
    }

    fn tuple(p: &[f64]) -> PointTuple {
        PointTuple::new(p.to_vec()).unwrap()
    }

    #[test]
    fn one_point_correlation_is_g0() {
        let k = sine();
        assert_eq!(correlation(&tuple(&[3.7]), &k).unwrap(), 1.0);
        assert_eq!(cluster_cyclic(&tuple(&[3.7]), &k).unwrap(), 1.0);
        assert_eq!(cluster_from_correlations(&tuple(&[3.7]), &k).unwrap(), 1.0);
    }

    #[test]
    fn two_point_functions() {
        for phi in [SpectralDensity::sine(), SpectralDensity::gaussian()] {
            let k = build_kernel(&phi).unwrap();
            let u = 0.37;
            let expected = k.g0 * k.g0 - k.g(u).powi(2);
            let p = tuple(&[0.0, u]);
            assert!((correlation(&p, &k).unwrap() - expected).abs() < 1e-15);
            assert!((cluster_cyclic(&p, &k).unwrap() + k.g(u).powi(2)).abs() < 1e-15);
            let from_corr = cluster_from_correlations(&p, &k).unwrap();
            assert!((from_corr + k.g(u).powi(2)).abs() < 1e-15);
        }
    }

    #[test]
    fn three_point_correlation_matches_cofactor_oracle() {
        let k = sine();
        let pts = [0.0, 0.5, 1.3];
        let oracle = cofactor_det(&gram_matrix(&pts, &k));
        let got = correlation(&tuple(&pts), &k).unwrap();
        assert!((got - oracle).abs() < 1e-14, "{got} vs {oracle}");
    }

    #[test]
    fn three_point_cluster_two_routes() {
        let k = sine();
        let p = tuple(&[0.0, 0.5, 1.3]);
        let a = cluster_cyclic(&p, &k).unwrap();
        let b = cluster_from_correlations(&p, &k).unwrap();
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn round_trip_three_points() {
        let k = sine();
        let p = tuple(&[0.0, 0.7, 2.1]);
        let rho = correlations_from_clusters(&p, |xs| {
            cluster_cyclic(&PointTuple::new(xs.to_vec()).unwrap(), &k).unwrap()
        })
        .unwrap();
        let direct = correlation(&p, &k).unwrap();
        assert!((rho - direct).abs() < 1e-12);

        let two = tuple(&[0.0, 0.4]);
        let rho2 = correlations_from_clusters(&two, |xs| {
            cluster_cyclic(&PointTuple::new(xs.to_vec()).unwrap(), &k).unwrap()
        })
        .unwrap();
        assert!((rho2 - (1.0 - k.g(0.4).powi(2))).abs() < 1e-15);
        let one = correlations_from_clusters(&tuple(&[5.0]), |_| 0.25).unwrap();
        assert_eq!(one, 0.25);
    }

    #[test]
    fn partition_counts_are_bell_numbers() {
        let bell = [1usize, 1, 2, 5, 15, 52, 203, 877];
        for (k, &b) in bell.iter().enumerate() {
            let mut count = 0;
            for_each_set_partition(k, |blocks| {
                let union = blocks.iter().fold(0u32, |acc, m| {
                    assert_eq!(acc & m, 0);
                    acc | m
                });
                assert_eq!(union, ((1u64 << k) - 1) as u32);
                count += 1;
            });
            assert_eq!(count, b, "k = {k}");
        }
    }

    #[test]
    fn size_limits() {
        let k = sine();
        let many: Vec<f64> = (0..11).map(|i| i as f64).collect();
        assert!(matches!(
            cluster_from_correlations(&tuple(&many), &k),
            Err(Error::TooLarge { .. })
        ));
        let too_many: Vec<f64> = (0..13).map(|i| i as f64).collect();
        assert!(matches!(
            PointTuple::new(too_many),
            Err(Error::TooLarge { .. })
        ));
        assert!(matches!(
            PointTuple::new(vec![1.0, 2.0, 1.0]),
            Err(Error::DegenerateTuple { .. })
        ));
    }

    #[test]
    fn stirling_rows() {
        let s = stirling2_table(5);
        assert_eq!(s[3], vec![0, 1, 3, 1, 0, 0]);
        assert_eq!(s[5][1..=5], [1, 15, 25, 10, 1]);
    }

    #[test]
    fn cumulant_identities_exact_on_rationals() {
        let r = |n, d| Ratio::new(n, d);
        let v = vec![r(2i64, 3), r(-5, 7), r(11, 13)];
        let c = cumulants_from_cluster_integrals(&v, 3).unwrap();
        assert_eq!(c[0], v[0]);
        assert_eq!(c[1], v[0] + v[1]);
        assert_eq!(c[2], v[0] + r(3, 1) * v[1] + v[2]);
        assert_eq!(
            cumulants_from_cluster_integrals(&[r(4i64, 9)], 1).unwrap(),
            vec![r(4, 9)]
        );
    }

    #[test]
    fn cumulants_of_pure_first_cluster() {
        let mut v = vec![0.0f64; 8];
        v[0] = 1.0;
        let c = cumulants_from_cluster_integrals(&v, 8).unwrap();
        assert!(c.iter().all(|&x| x == 1.0));
        assert!(matches!(
            cumulants_from_cluster_integrals(&[0.0f64; 11], 11),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn truncated_pair_far_apart_is_small() {
        let k = sine();
        let s = 0.2;
        let v = truncated_pair_correlation((0.0, 50.0), (0.1, 50.15), &[], s, &k).unwrap();
        assert!(v.abs() <= 1e-2, "{v}");
    }

    #[test]
    fn truncated_pair_matches_cofactor_oracle() {
        let k = sine();
        let s = 0.3;
        let (x1, y1, x2, y2, z) = (0.0, 0.2, 1.5, 1.7, 0.1);
        let got = truncated_pair_correlation((x1, x2), (y1, y2), &[z], s, &k).unwrap();
        let all = cofactor_det(&gram_matrix(&[x1, y1, x2, y2, z], &k));
        let first = cofactor_det(&gram_matrix(&[x1, y1, z], &k));
        let second = cofactor_det(&gram_matrix(&[x2, y2], &k));
        assert!((got - (all - first * second)).abs() < 1e-12);
    }

    #[test]
    fn truncated_pair_zero_kernel_and_ambiguity() {
        let zero = build_kernel(&SpectralDensity::zero()).unwrap();
        let v = truncated_pair_correlation((0.0, 2.0), (0.1, 2.1), &[0.05], 0.3, &zero).unwrap();
        assert_eq!(v, 0.0);
        let k = sine();
        assert!(matches!(
            truncated_pair_correlation((0.0, 2.0), (0.1, 2.1), &[1.0], 0.3, &k),
            Err(Error::PartitionAmbiguity { count: 0, .. })
        ));
    }

    #[test]
    fn fischer_small_cases() {
        let one = DMatrix::from_element(1, 1, 1.0);
        for b in [-1.0, -0.3, 0.0, 0.8, 1.0] {
            let out = fischer_check(&one, &one, &DMatrix::from_element(1, 1, b)).unwrap();
            assert!(out.holds);
            assert!((out.det_m - (1.0 - b * b)).abs() < 1e-15);
        }
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let c = DMatrix::from_element(1, 1, 3.0);
        let out = fischer_check(&a, &c, &DMatrix::zeros(2, 1)).unwrap();
        assert!((out.det_m - out.det_a_times_det_c).abs() < 1e-14);
        assert!(matches!(
            fischer_check(&one, &one, &DMatrix::from_element(1, 1, 2.0)),
            Err(Error::NotPsd { .. })
        ));
    }

    #[test]
    fn fischer_random_gram_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let g = DMatrix::from_fn(5, 7, |_, _| rng.random_range(-1.0..1.0));
            let m = &g * g.transpose();
            let a = m.view((0, 0), (3, 3)).into_owned();
            let c = m.view((3, 3), (2, 2)).into_owned();
            let b = m.view((0, 3), (3, 2)).into_owned();
            assert!(fischer_check(&a, &c, &b).unwrap().holds);
        }
    }

    fn distinct_points(k: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.05f64..1.0, k).prop_map(|gaps| {
            let mut x = 0.0;
            gaps.iter()
                .map(|g| {
                    x += g;
                    x
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn cyclic_and_mobius_clusters_agree(pts in (1usize..=6).prop_flat_map(distinct_points)) {
            let k = sine();
            let p = PointTuple::new(pts).unwrap();
            let a = cluster_cyclic(&p, &k).unwrap();
            let b = cluster_from_correlations(&p, &k).unwrap();
            prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
        }

        #[test]
        fn mobius_round_trip(pts in (1usize..=6).prop_flat_map(distinct_points)) {
            let k = sine();
            let p = PointTuple::new(pts).unwrap();
            let rho = correlations_from_clusters(&p, |xs| {
                cluster_from_correlations(&PointTuple::new(xs.to_vec()).unwrap(), &k).unwrap()
            }).unwrap();
            let direct = correlation(&p, &k).unwrap();
            prop_assert!((rho - direct).abs() <= 1e-10 * direct.abs().max(1.0));
        }

        #[test]
        fn hadamard_bound(pts in (1usize..=8).prop_flat_map(distinct_points)) {
            for phi in [SpectralDensity::sine(), SpectralDensity::scaled_indicator(0.6).unwrap()] {
                let k = build_kernel(&phi).unwrap();
                let p = PointTuple::new(pts.clone()).unwrap();
                let rho = correlation(&p, &k).unwrap();
                prop_assert!(rho <= k.g0.powi(p.len() as i32) + 1e-10);
            }
        }

        #[test]
        fn fischer_on_kernel_gram_splits(pts in (2usize..=8).prop_flat_map(distinct_points), cut in 1usize..7) {
            let k = sine();
            let cut = cut.min(pts.len() - 1);
            let m = gram_matrix(&pts, &k);
            let n = pts.len();
            let a = m.view((0, 0), (cut, cut)).into_owned();
            let c = m.view((cut, cut), (n - cut, n - cut)).into_owned();
            let b = m.view((0, cut), (cut, n - cut)).into_owned();
            prop_assert!(fischer_check(&a, &c, &b).unwrap().holds);
        }
    }
}
