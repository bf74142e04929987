//! Cluster-quality statistics (RMSSTD, RS, noise ratio, inter-cluster
//! distances) and nonparametric Wilcoxon tests for comparing per-text
//! statistic distributions between corpora.

use std::collections::BTreeMap;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-text cluster geometry features. Noise points (label 0) are excluded
/// from every statistic.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterStats {
    pub rmsstd: f64,
    pub rs: f64,
    pub noise_ratio: f64,
    pub inter_avg: f64,
    pub inter_min: f64,
    pub inter_max: f64,
    /// Fewer than 2 clusters: the inter-cluster features are zeros.
    pub degenerate: bool,
}

fn group_members(labels: &[usize]) -> BTreeMap<usize, Vec<usize>> {
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        if l != 0 {
            groups.entry(l).or_default().push(i);
        }
    }
    groups
}

fn centroid(points: ArrayView2<f64>, members: &[usize]) -> Vec<f64> {
    let d = points.ncols();
    let mut c = vec![0.0; d];
    for &i in members {
        for (j, v) in c.iter_mut().enumerate() {
            *v += points[[i, j]];
        }
    }
    for v in c.iter_mut() {
        *v /= members.len() as f64;
    }
    c
}

fn sq_dist_to(points: ArrayView2<f64>, i: usize, c: &[f64]) -> f64 {
    c.iter()
        .enumerate()
        .map(|(j, &v)| (points[[i, j]] - v) * (points[[i, j]] - v))
        .sum()
}

/// Pooled root-mean-square standard deviation:
/// sqrt( sum_c sum_{x in c} ||x - mu_c||^2 / (d * sum_c (n_c - 1)) ).
pub fn rmsstd(points: ArrayView2<f64>, labels: &[usize]) -> Result<f64> {
    if points.nrows() != labels.len() {
        return Err(Error::invalid("points/labels length mismatch"));
    }
    let groups = group_members(labels);
    if groups.is_empty() {
        return Err(Error::invalid("no non-noise clusters"));
    }
    let d = points.ncols() as f64;
    let mut ssw = 0.0;
    let mut dof = 0usize;
    for members in groups.values() {
        let c = centroid(points, members);
        for &i in members {
            ssw += sq_dist_to(points, i, &c);
        }
        dof += members.len() - 1;
    }
    if dof == 0 {
        return Err(Error::invalid("rmsstd undefined: all clusters singleton"));
    }
    Ok((ssw / (d * dof as f64)).sqrt())
}

/// RS = (SST - SSW) / SST over non-noise points.
pub fn rs(points: ArrayView2<f64>, labels: &[usize]) -> Result<f64> {
    if points.nrows() != labels.len() {
        return Err(Error::invalid("points/labels length mismatch"));
    }
    let groups = group_members(labels);
    if groups.is_empty() {
        return Err(Error::invalid("no non-noise clusters"));
    }
    let all: Vec<usize> = groups.values().flatten().copied().collect();
    let global = centroid(points, &all);
    let sst: f64 = all.iter().map(|&i| sq_dist_to(points, i, &global)).sum();
    if sst == 0.0 {
        return Err(Error::invalid("rs undefined: zero total scatter"));
    }
    let mut ssw = 0.0;
    for members in groups.values() {
        let c = centroid(points, members);
        for &i in members {
            ssw += sq_dist_to(points, i, &c);
        }
    }
    Ok((sst - ssw) / sst)
}

/// Member means of the non-noise clusters, ordered by cluster label.
pub fn centroids_of(points: ArrayView2<f64>, labels: &[usize]) -> Array2<f64> {
    let groups = group_members(labels);
    let mut out = Array2::zeros((groups.len(), points.ncols()));
    for (row, members) in groups.values().enumerate() {
        let c = centroid(points, members);
        for (j, v) in c.into_iter().enumerate() {
            out[[row, j]] = v;
        }
    }
    out
}

/// (average, minimum, maximum) Euclidean distance over all unordered
/// centroid pairs. With fewer than two centroids the features degenerate to
/// zeros and the flag is set.
pub fn intercluster(centroids: ArrayView2<f64>) -> (f64, f64, f64, bool) {
    let k = centroids.nrows();
    if k < 2 {
        return (0.0, 0.0, 0.0, true);
    }
    let mut sum = 0.0;
    let mut min = f64::INFINITY;
    let mut max = 0.0f64;
    let mut pairs = 0usize;
    for i in 0..k {
        for j in (i + 1)..k {
            let d = centroids
                .row(i)
                .iter()
                .zip(centroids.row(j).iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            sum += d;
            min = min.min(d);
            max = max.max(d);
            pairs += 1;
        }
    }
    (sum / pairs as f64, min, max, false)
}

/// All per-text statistics in one pass. `rmsstd`/`rs` become NaN when
/// undefined (degenerate clusterings) rather than failing the whole text.
pub fn cluster_stats(points: ArrayView2<f64>, labels: &[usize]) -> ClusterStats {
    let noise_ratio = if labels.is_empty() {
        0.0
    } else {
        labels.iter().filter(|&&l| l == 0).count() as f64 / labels.len() as f64
    };
    let rmsstd = rmsstd(points, labels).unwrap_or(f64::NAN);
    let rs = rs(points, labels).unwrap_or(f64::NAN);
    let cents = centroids_of(points, labels);
    let (inter_avg, inter_min, inter_max, degenerate) = intercluster(cents.view());
    ClusterStats {
        rmsstd,
        rs,
        noise_ratio,
        inter_avg,
        inter_min,
        inter_max,
        degenerate,
    }
}

/// p-value mode for the rank-sum test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PValueMode {
    /// Full enumeration of C(n_a + n_b, n_a) group assignments
    /// (limited to n_a + n_b <= 20).
    Exact,
    /// Normal approximation with tie-corrected variance and continuity
    /// correction.
    Normal,
}

/// Midranks of the pooled sample (average rank over ties).
fn midranks(pooled: &[f64]) -> Vec<f64> {
    let n = pooled.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| pooled[a].partial_cmp(&pooled[b]).unwrap());
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && pooled[order[j]] == pooled[order[i]] {
            j += 1;
        }
        let avg = (i + j + 1) as f64 / 2.0; // ranks are 1-based
        for &idx in &order[i..j] {
            ranks[idx] = avg;
        }
        i = j;
    }
    ranks
}

fn u_from_ranks(ranks: &[f64], selected: &[usize], n_a: usize) -> f64 {
    let r_a: f64 = selected.iter().map(|&i| ranks[i]).sum();
    r_a - (n_a * (n_a + 1)) as f64 / 2.0
}

/// Mann-Whitney rank-sum test for two independent samples; returns the U
/// statistic of `a` and the two-sided p-value.
pub fn wilcoxon_ranksum(a: &[f64], b: &[f64], mode: PValueMode) -> Result<(f64, f64)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("rank-sum test needs non-empty samples"));
    }
    if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return Err(Error::invalid("rank-sum test requires finite values"));
    }
    let n_a = a.len();
    let n_b = b.len();
    let n = n_a + n_b;
    let pooled: Vec<f64> = a.iter().chain(b.iter()).copied().collect();
    let ranks = midranks(&pooled);
    let obs: Vec<usize> = (0..n_a).collect();
    let u_obs = u_from_ranks(&ranks, &obs, n_a);

    let p = match mode {
        PValueMode::Exact => {
            if n > 20 {
                return Err(Error::invalid("exact mode limited to n_a + n_b <= 20"));
            }
            // enumerate all assignments of n_a pooled positions to sample a
            let mut count_le = 0u64;
            let mut count_ge = 0u64;
            let mut total = 0u64;
            let mut sel: Vec<usize> = (0..n_a).collect();
            let mut done = false;
            while !done {
                let u = u_from_ranks(&ranks, &sel, n_a);
                if u <= u_obs + 1e-9 {
                    count_le += 1;
                }
                if u >= u_obs - 1e-9 {
                    count_ge += 1;
                }
                total += 1;
                // next combination in lexicographic order
                done = true;
                for i in (0..n_a).rev() {
                    if sel[i] != i + n - n_a {
                        sel[i] += 1;
                        for j in (i + 1)..n_a {
                            sel[j] = sel[j - 1] + 1;
                        }
                        done = false;
                        break;
                    }
                }
            }
            let one_sided = (count_le.min(count_ge)) as f64 / total as f64;
            (2.0 * one_sided).min(1.0)
        }
        PValueMode::Normal => {
            let mean = (n_a * n_b) as f64 / 2.0;
            // tie correction from run lengths of equal ranks
            let mut tie_sum = 0.0;
            let mut sorted = pooled.clone();
            sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
            let mut i = 0;
            while i < n {
                let mut j = i + 1;
                while j < n && sorted[j] == sorted[i] {
                    j += 1;
                }
                let t = (j - i) as f64;
                tie_sum += t * t * t - t;
                i = j;
            }
            let nf = n as f64;
            let var = (n_a * n_b) as f64 / 12.0 * ((nf + 1.0) - tie_sum / (nf * (nf - 1.0)));
            if var <= 0.0 {
                1.0 // every value tied
            } else {
                let diff = u_obs - mean;
                let corrected = if diff > 0.5 {
                    diff - 0.5
                } else if diff < -0.5 {
                    diff + 0.5
                } else {
                    0.0
                };
                let z = corrected / var.sqrt();
                (libm::erfc(z.abs() / std::f64::consts::SQRT_2)).min(1.0)
            }
        }
    };
    Ok((u_obs, p))
}

/// Paired Wilcoxon signed-rank test (two-sided). Zero differences are
/// dropped; exact enumeration over sign assignments for n <= 20, normal
/// approximation otherwise. Returns (W+, p).
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.len() != b.len() {
        return Err(Error::invalid("signed-rank test needs paired samples"));
    }
    let diffs: Vec<f64> = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| x - y)
        .filter(|d| *d != 0.0)
        .collect();
    if diffs.is_empty() {
        return Ok((0.0, 1.0));
    }
    let n = diffs.len();
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = midranks(&abs);
    let w_plus: f64 = diffs
        .iter()
        .zip(ranks.iter())
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();

    let p = if n <= 20 {
        let total = 1u64 << n;
        let mut count_le = 0u64;
        let mut count_ge = 0u64;
        for mask in 0..total {
            let w: f64 = (0..n)
                .filter(|&i| mask & (1 << i) != 0)
                .map(|i| ranks[i])
                .sum();
            if w <= w_plus + 1e-9 {
                count_le += 1;
            }
            if w >= w_plus - 1e-9 {
                count_ge += 1;
            }
        }
        (2.0 * count_le.min(count_ge) as f64 / total as f64).min(1.0)
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        // tie correction over rank runs
        let mut tie_sum = 0.0;
        let mut sorted = abs.clone();
        sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut i = 0;
        while i < n {
            let mut j = i + 1;
            while j < n && sorted[j] == sorted[i] {
                j += 1;
            }
            let t = (j - i) as f64;
            tie_sum += t * t * t - t;
            i = j;
        }
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_sum / 48.0;
        let diff = w_plus - mean;
        let corrected = if diff > 0.5 {
            diff - 0.5
        } else if diff < -0.5 {
            diff + 0.5
        } else {
            0.0
        };
        let z = corrected / var.sqrt();
        (libm::erfc(z.abs() / std::f64::consts::SQRT_2)).min(1.0)
    };
    Ok((w_plus, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rmsstd_hand_example() {
        // one cluster {0, 2} in 1-D: sqrt((1 + 1) / (1 * 1)) = sqrt(2)
        let pts = array![[0.0], [2.0]];
        let v = rmsstd(pts.view(), &[1, 1]).unwrap();
        assert!((v - 2.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rmsstd_identical_points_zero() {
        let pts = array![[3.0], [3.0], [5.0], [5.0]];
        let v = rmsstd(pts.view(), &[1, 1, 2, 2]).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn rmsstd_mirrored_clusters_equal_single() {
        let one = array![[0.0], [2.0]];
        let two = array![[0.0], [2.0], [10.0], [12.0]];
        let a = rmsstd(one.view(), &[1, 1]).unwrap();
        let b = rmsstd(two.view(), &[1, 1, 2, 2]).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn rmsstd_all_singletons_errors() {
        let pts = array![[0.0], [1.0]];
        assert!(rmsstd(pts.view(), &[1, 2]).is_err());
    }

    #[test]
    fn rs_single_cluster_zero() {
        let pts = array![[0.0], [1.0], [5.0]];
        assert_eq!(rs(pts.view(), &[1, 1, 1]).unwrap(), 0.0);
    }

    #[test]
    fn rs_identical_cluster_points_one() {
        let pts = array![[1.0], [1.0], [9.0], [9.0]];
        assert_eq!(rs(pts.view(), &[1, 1, 2, 2]).unwrap(), 1.0);
    }

    #[test]
    fn rs_two_pair_split() {
        // {0,2} vs {10,12}: SSW = 2 + 2 = 4, SST = 104 -> RS = 100/104
        let pts = array![[0.0], [2.0], [10.0], [12.0]];
        let v = rs(pts.view(), &[1, 1, 2, 2]).unwrap();
        assert!((v - 100.0 / 104.0).abs() < 1e-12, "got {v}");
    }

    #[test]
    fn rs_degenerate_data_errors() {
        let pts = array![[1.0], [1.0]];
        assert!(rs(pts.view(), &[1, 1]).is_err());
    }

    #[test]
    fn intercluster_single_pair() {
        let c = array![[0.0, 0.0], [3.0, 4.0]];
        let (avg, min, max, degenerate) = intercluster(c.view());
        assert_eq!((avg, min, max), (5.0, 5.0, 5.0));
        assert!(!degenerate);
    }

    #[test]
    fn intercluster_equilateral_triangle() {
        let h = 3.0f64.sqrt() / 2.0;
        let c = array![[0.0, 0.0], [1.0, 0.0], [0.5, h]];
        let (avg, min, max, _) = intercluster(c.view());
        assert!((avg - 1.0).abs() < 1e-12);
        assert!((min - 1.0).abs() < 1e-12);
        assert!((max - 1.0).abs() < 1e-12);
    }

    #[test]
    fn intercluster_collinear() {
        // centroids 0, 1, 3: pair distances {1, 2, 3}
        let c = array![[0.0], [1.0], [3.0]];
        let (avg, min, max, _) = intercluster(c.view());
        assert!((avg - 2.0).abs() < 1e-12);
        assert_eq!(min, 1.0);
        assert_eq!(max, 3.0);
    }

    #[test]
    fn intercluster_degenerate_flag() {
        let c = array![[0.0, 0.0]];
        let (avg, min, max, degenerate) = intercluster(c.view());
        assert_eq!((avg, min, max), (0.0, 0.0, 0.0));
        assert!(degenerate);
    }

    #[test]
    fn ranksum_extreme_separation() {
        let (u, p) = wilcoxon_ranksum(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], PValueMode::Exact).unwrap();
        assert_eq!(u, 0.0);
        assert!((p - 0.1).abs() < 1e-12, "got {p}");
    }

    #[test]
    fn ranksum_identical_samples_p_one() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let (_, p) = wilcoxon_ranksum(&a, &a, PValueMode::Exact).unwrap();
        assert_eq!(p, 1.0);
    }

    #[test]
    fn ranksum_symmetric_in_arguments() {
        let a = [1.0, 5.0, 2.5, 7.0, 3.0];
        let b = [2.0, 2.0, 9.0, 4.0];
        for mode in [PValueMode::Exact, PValueMode::Normal] {
            let (_, p_ab) = wilcoxon_ranksum(&a, &b, mode).unwrap();
            let (_, p_ba) = wilcoxon_ranksum(&b, &a, mode).unwrap();
            assert_eq!(p_ab, p_ba);
        }
    }

    #[test]
    fn ranksum_normal_close_to_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let a: Vec<f64> = (0..8).map(|_| rng.random::<f64>() * 3.0).collect();
            let b: Vec<f64> = (0..8).map(|_| rng.random::<f64>() * 3.0 + 0.5).collect();
            let (_, pe) = wilcoxon_ranksum(&a, &b, PValueMode::Exact).unwrap();
            let (_, pn) = wilcoxon_ranksum(&a, &b, PValueMode::Normal).unwrap();
            assert!((pe - pn).abs() < 0.02, "exact {pe} vs normal {pn}");
        }
    }

    #[test]
    fn ranksum_empty_sample_errors() {
        assert!(wilcoxon_ranksum(&[], &[1.0], PValueMode::Normal).is_err());
    }

    #[test]
    fn signed_rank_detects_shift() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
        let b: Vec<f64> = a.iter().map(|v| v + 1.0).collect();
        let (_, p) = wilcoxon_signed_rank(&a, &b).unwrap();
        assert!(p < 0.05, "got {p}");
    }

    #[test]
    fn signed_rank_identical_p_one() {
        let a = [1.0, 2.0, 3.0];
        let (w, p) = wilcoxon_signed_rank(&a, &a).unwrap();
        assert_eq!(w, 0.0);
        assert_eq!(p, 1.0);
    }

    fn rotate(points: &Array2<f64>, theta: f64) -> Array2<f64> {
        let (c, s) = (theta.cos(), theta.sin());
        let mut out = points.clone();
        for mut row in out.rows_mut() {
            let (x, y) = (row[0], row[1]);
            row[0] = c * x - s * y;
            row[1] = s * x + c * y;
        }
        out
    }

    proptest! {
        // translation + rotation invariance; RMSSTD scales linearly and RS is
        // scale-invariant
        #[test]
        fn stats_rigid_motion_invariance(
            seed in 0u64..200,
            theta in 0.0f64..6.28,
            shift in -20.0f64..20.0,
            scale in 0.1f64..5.0,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts = Array2::from_shape_fn((12, 2), |_| rng.random::<f64>() * 4.0);
            let labels: Vec<usize> = (0..12).map(|i| 1 + i % 3).collect();
            let r0 = rmsstd(pts.view(), &labels).unwrap();
            let s0 = rs(pts.view(), &labels).unwrap();

            let moved = rotate(&pts, theta).mapv(|v| v + shift);
            prop_assert!((rmsstd(moved.view(), &labels).unwrap() - r0).abs() < 1e-9);
            prop_assert!((rs(moved.view(), &labels).unwrap() - s0).abs() < 1e-9);

            let scaled = pts.mapv(|v| v * scale);
            prop_assert!((rmsstd(scaled.view(), &labels).unwrap() - r0 * scale).abs() < 1e-9);
            prop_assert!((rs(scaled.view(), &labels).unwrap() - s0).abs() < 1e-9);
        }

        // shrinking within-cluster spread decreases RMSSTD and increases RS
        #[test]
        fn compactness_monotonicity(seed in 0u64..100, shrink in 0.1f64..0.9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5555);
            let centers = [[0.0, 0.0], [8.0, 0.0], [4.0, 7.0]];
            let mut pts = Array2::zeros((30, 2));
            let mut labels = vec![0usize; 30];
            for i in 0..30 {
                let c = i % 3;
                labels[i] = c + 1;
                pts[[i, 0]] = centers[c][0] + rng.random::<f64>() - 0.5;
                pts[[i, 1]] = centers[c][1] + rng.random::<f64>() - 0.5;
            }
            // shrink points toward their cluster centroids
            let mut tight = pts.clone();
            for c in 1..=3usize {
                let members: Vec<usize> = (0..30).filter(|&i| labels[i] == c).collect();
                let cent = centroid(pts.view(), &members);
                for &i in &members {
                    for j in 0..2 {
                        tight[[i, j]] = cent[j] + (pts[[i, j]] - cent[j]) * shrink;
                    }
                }
            }
            prop_assert!(rmsstd(tight.view(), &labels).unwrap() < rmsstd(pts.view(), &labels).unwrap());
            prop_assert!(rs(tight.view(), &labels).unwrap() > rs(pts.view(), &labels).unwrap());
        }

        // p-value symmetry on random unequal samples
        #[test]
        fn ranksum_p_symmetry(seed in 0u64..300) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37);
            let a: Vec<f64> = (0..6).map(|_| (rng.random::<f64>() * 8.0).round()).collect();
            let b: Vec<f64> = (0..7).map(|_| (rng.random::<f64>() * 8.0).round()).collect();
            let (_, p_ab) = wilcoxon_ranksum(&a, &b, PValueMode::Exact).unwrap();
            let (_, p_ba) = wilcoxon_ranksum(&b, &a, PValueMode::Exact).unwrap();
            prop_assert_eq!(p_ab, p_ba);
        }
    }
}
