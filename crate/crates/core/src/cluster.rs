//! Crisp and fuzzy clustering: K-Means, fuzzy C-Means and the Wishart
//! density-based algorithm over precomputed distance matrices (including
//! fuzzy distances).

use ndarray::{Array2, ArrayView1, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fuzzy::{fuzzy_distance_matrix, TrapFuzzyVector};

/// Point-to-cluster assignment. Label 0 is reserved for noise; clusters are
/// numbered 1..=k_found.
#[derive(Debug, Clone)]
pub struct Clustering {
    pub labels: Vec<usize>,
    pub k_found: usize,
    /// Centroids for centroid-based methods (row c-1 = cluster c).
    pub centroids: Option<Array2<f64>>,
    /// Row-stochastic membership matrix (fuzzy C-Means).
    pub memberships: Option<Array2<f64>>,
    /// Per-point log-density estimates (Wishart).
    pub densities: Option<Vec<f64>>,
    /// Objective value after each iteration (K-Means inertia / C-Means J).
    pub objective_trace: Option<Vec<f64>>,
}

impl Clustering {
    pub fn noise_ratio(&self) -> f64 {
        if self.labels.is_empty() {
            return 0.0;
        }
        self.labels.iter().filter(|&&l| l == 0).count() as f64 / self.labels.len() as f64
    }
}

fn sq_dist(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

/// k-means++ seeding: first centroid uniform, then proportional to squared
/// distance from the nearest chosen centroid.
fn kmeans_pp_init(points: ArrayView2<f64>, k: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let n = points.nrows();
    let mut centroids = Array2::zeros((k, points.ncols()));
    let first = rng.random_range(0..n);
    centroids.row_mut(0).assign(&points.row(first));
    let mut best_sq: Vec<f64> = (0..n)
        .map(|i| sq_dist(points.row(i), centroids.row(0)))
        .collect();
    for c in 1..k {
        let total: f64 = best_sq.iter().sum();
        let chosen = if total <= 0.0 {
            // all points coincide with chosen centroids
            rng.random_range(0..n)
        } else {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in best_sq.iter().enumerate() {
                target -= w;
                if target <= 0.0 {
                    pick = i;
                    break;
                }
            }
            pick
        };
        centroids.row_mut(c).assign(&points.row(chosen));
        for i in 0..n {
            let d = sq_dist(points.row(i), centroids.row(c));
            if d < best_sq[i] {
                best_sq[i] = d;
            }
        }
    }
    centroids
}

/// Lloyd iterations from k-means++ seeding. Empty clusters are re-seeded at
/// the point farthest from its current centroid. Labels are 1..=k.
pub fn kmeans(
    points: ArrayView2<f64>,
    k: usize,
    seed: u64,
    tol: f64,
    max_iter: usize,
) -> Result<Clustering> {
    let n = points.nrows();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("kmeans requires 1 <= k <= {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = kmeans_pp_init(points, k, &mut rng);
    let mut assign = vec![0usize; n];
    let mut trace = Vec::new();

    for _iter in 0..max_iter {
        // assignment step; ties go to the lowest centroid index
        let mut inertia = 0.0;
        for i in 0..n {
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for c in 0..k {
                let d = sq_dist(points.row(i), centroids.row(c));
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            assign[i] = best;
            inertia += best_d;
        }
        trace.push(inertia);

        // update step
        let mut sums = Array2::zeros((k, points.ncols()));
        let mut counts = vec![0usize; k];
        for i in 0..n {
            sums.row_mut(assign[i]).scaled_add(1.0, &points.row(i));
            counts[assign[i]] += 1;
        }
        let mut new_centroids = centroids.clone();
        for c in 0..k {
            if counts[c] > 0 {
                new_centroids
                    .row_mut(c)
                    .assign(&(&sums.row(c) / counts[c] as f64));
            } else {
                // re-seed at the point farthest from its own centroid
                let mut far = 0usize;
                let mut far_d = -1.0;
                for i in 0..n {
                    let d = sq_dist(points.row(i), centroids.row(assign[i]));
                    if d > far_d {
                        far_d = d;
                        far = i;
                    }
                }
                new_centroids.row_mut(c).assign(&points.row(far));
                assign[far] = c;
            }
        }

        let shift = (0..k)
            .map(|c| sq_dist(centroids.row(c), new_centroids.row(c)).sqrt())
            .fold(0.0f64, f64::max);
        centroids = new_centroids;
        if shift < tol {
            break;
        }
    }

    // final assignment against the converged centroids
    let mut inertia = 0.0;
    for i in 0..n {
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for c in 0..k {
            let d = sq_dist(points.row(i), centroids.row(c));
            if d < best_d {
                best_d = d;
                best = c;
            }
        }
        assign[i] = best;
        inertia += best_d;
    }
    trace.push(inertia);

    Ok(Clustering {
        labels: assign.iter().map(|&c| c + 1).collect(),
        k_found: k,
        centroids: Some(centroids),
        memberships: None,
        densities: None,
        objective_trace: Some(trace),
    })
}

/// Bezdek fuzzy C-Means: alternating membership/centroid updates with
/// fuzzifier f > 1. A point coinciding with a centroid takes membership 1
/// there (split equally over coincident centroids). Hard labels are the
/// argmax memberships, numbered 1..=k.
pub fn cmeans(
    points: ArrayView2<f64>,
    k: usize,
    fuzzifier: f64,
    seed: u64,
    tol: f64,
    max_iter: usize,
) -> Result<Clustering> {
    let n = points.nrows();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("cmeans requires 1 <= k <= {n}")));
    }
    if fuzzifier <= 1.0 {
        return Err(Error::invalid("fuzzifier must be > 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = kmeans_pp_init(points, k, &mut rng);
    let mut u: Array2<f64> = Array2::zeros((n, k));
    let expo = 2.0 / (fuzzifier - 1.0);
    let mut trace = Vec::new();

    for _iter in 0..max_iter {
        // membership update
        let mut max_change = 0.0f64;
        for i in 0..n {
            let d: Vec<f64> = (0..k)
                .map(|c| sq_dist(points.row(i), centroids.row(c)).sqrt())
                .collect();
            let zeros: Vec<usize> = (0..k).filter(|&c| d[c] == 0.0).collect();
            let new_row: Vec<f64> = if !zeros.is_empty() {
                let w = 1.0 / zeros.len() as f64;
                (0..k)
                    .map(|c| if d[c] == 0.0 { w } else { 0.0 })
                    .collect()
            } else {
                (0..k)
                    .map(|c| {
                        let denom: f64 = (0..k).map(|l| (d[c] / d[l]).powf(expo)).sum();
                        1.0 / denom
                    })
                    .collect()
            };
            for c in 0..k {
                max_change = max_change.max((u[[i, c]] - new_row[c]).abs());
                u[[i, c]] = new_row[c];
            }
        }

        // centroid update
        for c in 0..k {
            let mut num = vec![0.0; points.ncols()];
            let mut den = 0.0;
            for i in 0..n {
                let w = u[[i, c]].powf(fuzzifier);
                den += w;
                for (j, &x) in points.row(i).iter().enumerate() {
                    num[j] += w * x;
                }
            }
            if den > 0.0 {
                for (j, v) in num.iter().enumerate() {
                    centroids[[c, j]] = v / den;
                }
            }
        }

        let objective: f64 = (0..n)
            .map(|i| {
                (0..k)
                    .map(|c| u[[i, c]].powf(fuzzifier) * sq_dist(points.row(i), centroids.row(c)))
                    .sum::<f64>()
            })
            .sum();
        trace.push(objective);

        if max_change < tol {
            break;
        }
    }

    let labels: Vec<usize> = (0..n)
        .map(|i| {
            let mut best = 0usize;
            let mut best_u = -1.0;
            for c in 0..k {
                if u[[i, c]] > best_u {
                    best_u = u[[i, c]];
                    best = c;
                }
            }
            best + 1
        })
        .collect();

    Ok(Clustering {
        labels,
        k_found: k,
        centroids: Some(centroids),
        memberships: Some(u),
        densities: None,
        objective_trace: Some(trace),
    })
}

/// log of the volume of the unit ball in `dim` dimensions,
/// ln V = (dim/2) ln pi - ln Gamma(dim/2 + 1), computed exactly for integer
/// and half-integer arguments.
fn ln_unit_ball_volume(dim: usize) -> f64 {
    let half = dim as f64 / 2.0;
    half * std::f64::consts::PI.ln() - ln_gamma_half(dim + 2)
}

/// ln Gamma(n/2) for positive integer n, via the recurrence from
/// Gamma(1) = 1 and Gamma(1/2) = sqrt(pi).
fn ln_gamma_half(n: usize) -> f64 {
    let mut acc;
    let mut z;
    if n % 2 == 0 {
        acc = 0.0; // ln Gamma(1)
        z = 1.0;
    } else {
        acc = 0.5 * std::f64::consts::PI.ln(); // ln Gamma(1/2)
        z = 0.5;
    }
    while z + 1.0 <= n as f64 / 2.0 + 1e-9 {
        acc += z.ln();
        z += 1.0;
    }
    acc
}

struct WishartCluster {
    open: bool,
    max_lnp: f64,
    members: Vec<usize>,
}

/// Wishart's mode analysis over a pairwise distance matrix.
///
/// Points are processed in ascending k-NN radius (descending density, ties
/// broken by point index). Each point connects to the already-processed
/// points within its own radius; depending on how many open clusters it
/// touches it opens, joins, merges (into the oldest connected open cluster)
/// or completes clusters, with the density significance threshold `h` in
/// log-density units. Points connected only to completed clusters become
/// noise (label 0).
pub fn wishart(
    dist: ArrayView2<f64>,
    k_neighbors: usize,
    h: f64,
    dim: usize,
) -> Result<Clustering> {
    let n = dist.nrows();
    if dist.ncols() != n {
        return Err(Error::invalid("distance matrix must be square"));
    }
    if n == 0 {
        return Err(Error::invalid("empty distance matrix"));
    }
    if k_neighbors == 0 || k_neighbors >= n {
        return Err(Error::invalid(format!(
            "wishart requires 1 <= k_neighbors < {n}"
        )));
    }
    let scale = dist.iter().cloned().fold(0.0f64, f64::max);
    let tol = 1e-9 * (1.0 + scale);
    for i in 0..n {
        if dist[[i, i]].abs() > tol {
            return Err(Error::invalid("distance matrix diagonal must be zero"));
        }
        for j in (i + 1)..n {
            if (dist[[i, j]] - dist[[j, i]]).abs() > tol {
                return Err(Error::invalid("distance matrix must be symmetric"));
            }
        }
    }

    // k-NN radius and log-density per point
    let ln_ball = ln_unit_ball_volume(dim);
    let ln_const = (k_neighbors as f64).ln() - (n as f64).ln() - ln_ball;
    let mut radius = vec![0.0f64; n];
    let mut lnp = vec![0.0f64; n];
    for i in 0..n {
        let mut row: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| dist[[i, j]]).collect();
        row.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let r = row[k_neighbors - 1];
        radius[i] = r;
        lnp[i] = ln_const - dim as f64 * r.max(f64::MIN_POSITIVE).ln();
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| radius[a].partial_cmp(&radius[b]).unwrap().then(a.cmp(&b)));

    let mut labels = vec![usize::MAX; n]; // MAX = unprocessed
    let mut clusters: Vec<WishartCluster> = Vec::new(); // index = label - 1
    let mut processed: Vec<usize> = Vec::new();

    for &i in &order {
        // connected clusters among processed points within radius[i]
        let mut open_ids: Vec<usize> = Vec::new();
        let mut completed = false;
        for &j in &processed {
            if dist[[i, j]] <= radius[i] {
                let lab = labels[j];
                if lab == 0 {
                    continue; // noise points carry no cluster
                }
                let c = lab - 1;
                if clusters[c].open {
                    if !open_ids.contains(&c) {
                        open_ids.push(c);
                    }
                } else {
                    completed = true;
                }
            }
        }

        if open_ids.is_empty() {
            if completed {
                labels[i] = 0;
            } else {
                clusters.push(WishartCluster {
                    open: true,
                    max_lnp: lnp[i],
                    members: vec![i],
                });
                labels[i] = clusters.len();
            }
        } else if open_ids.len() == 1 {
            let c = open_ids[0];
            clusters[c].members.push(i);
            clusters[c].max_lnp = clusters[c].max_lnp.max(lnp[i]);
            labels[i] = c + 1;
        } else {
            let significant: Vec<usize> = open_ids
                .iter()
                .copied()
                .filter(|&c| clusters[c].max_lnp - lnp[i] >= h)
                .collect();
            if significant.len() >= 2 {
                for &c in &significant {
                    clusters[c].open = false;
                }
                labels[i] = 0;
            } else {
                // at most one significant: all connected open clusters merge
                // into the oldest one, and the point joins it
                let target = *open_ids.iter().min().unwrap();
                for &c in &open_ids {
                    if c == target {
                        continue;
                    }
                    let members = std::mem::take(&mut clusters[c].members);
                    for &m in &members {
                        labels[m] = target + 1;
                    }
                    let moved_max = clusters[c].max_lnp;
                    clusters[target].members.extend(members);
                    clusters[target].max_lnp = clusters[target].max_lnp.max(moved_max);
                    clusters[c].open = false;
                }
                clusters[target].members.push(i);
                clusters[target].max_lnp = clusters[target].max_lnp.max(lnp[i]);
                labels[i] = target + 1;
            }
        }
        processed.push(i);
    }

    // compact labels: non-empty clusters keep creation order
    let mut remap = vec![0usize; clusters.len() + 1];
    let mut k_found = 0usize;
    for (c, cl) in clusters.iter().enumerate() {
        if !cl.members.is_empty() {
            k_found += 1;
            remap[c + 1] = k_found;
        }
    }
    let labels: Vec<usize> = labels.iter().map(|&l| remap[l]).collect();

    Ok(Clustering {
        labels,
        k_found,
        centroids: None,
        memberships: None,
        densities: Some(lnp),
        objective_trace: None,
    })
}

/// Wishart over the fuzzy distance matrix of a fuzzified dataset; the
/// ambient dimension for the density estimate is the fuzzy vector length.
pub fn wishart_fuzzy(
    data: &[TrapFuzzyVector],
    k_neighbors: usize,
    h: f64,
    alpha_levels: usize,
) -> Result<Clustering> {
    if data.is_empty() {
        return Err(Error::invalid("empty fuzzy dataset"));
    }
    let dim = data[0].len();
    let dist = fuzzy_distance_matrix(data, alpha_levels)?;
    wishart(dist.view(), k_neighbors, h, dim)
}

/// Euclidean pairwise distances, parallel over rows.
pub fn pairwise_distances(points: ArrayView2<f64>) -> Array2<f64> {
    let n = points.nrows();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| sq_dist(points.row(i), points.row(j)).sqrt())
                .collect()
        })
        .collect();
    let mut out = Array2::zeros((n, n));
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            out[[i, j]] = v;
        }
    }
    // enforce exact symmetry
    for i in 0..n {
        out[[i, i]] = 0.0;
        for j in (i + 1)..n {
            let v = out[[i, j]];
            out[[j, i]] = v;
        }
    }
    out
}

/// Pair-counting Rand index between two labelings (1.0 = identical
/// partitions).
pub fn rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    if n < 2 {
        return 1.0;
    }
    let mut agree = 0usize;
    let mut total = 0usize;
    for i in 0..n {
        for j in (i + 1)..n {
            total += 1;
            let same_a = a[i] == a[j];
            let same_b = b[i] == b[j];
            if same_a == same_b {
                agree += 1;
            }
        }
    }
    agree as f64 / total as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzy::{fuzzify, FuzzyParams};
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn kmeans_symmetric_pairs() {
        let pts = array![[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]];
        let c = kmeans(pts.view(), 2, 1, 1e-6, 300).unwrap();
        let cents = c.centroids.unwrap();
        let mut rows: Vec<Vec<f64>> = (0..2).map(|i| cents.row(i).to_vec()).collect();
        rows.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap());
        assert_eq!(rows[0], vec![0.0, 0.5]);
        assert_eq!(rows[1], vec![10.0, 0.5]);
        assert_eq!(c.labels[0], c.labels[1]);
        assert_ne!(c.labels[0], c.labels[2]);
    }

    #[test]
    fn kmeans_k1_gives_global_mean() {
        let pts = array![[1.0], [2.0], [6.0]];
        let c = kmeans(pts.view(), 1, 3, 1e-9, 300).unwrap();
        assert!((c.centroids.unwrap()[[0, 0]] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn kmeans_k_equals_n_zero_inertia() {
        let pts = array![[0.0], [5.0], [9.0]];
        let c = kmeans(pts.view(), 3, 7, 1e-9, 300).unwrap();
        let trace = c.objective_trace.unwrap();
        assert!(trace.last().unwrap().abs() < 1e-18);
        let mut sorted = c.labels.clone();
        sorted.sort();
        assert_eq!(sorted, vec![1, 2, 3]);
    }

    #[test]
    fn kmeans_inertia_non_increasing() {
        let pts = Array2::from_shape_fn((40, 2), |(i, j)| {
            ((i * 13 + j * 7) % 17) as f64 * 0.9 - (i % 5) as f64
        });
        let c = kmeans(pts.view(), 4, 11, 1e-9, 300).unwrap();
        let trace = c.objective_trace.unwrap();
        for w in trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "inertia increased: {w:?}");
        }
    }

    #[test]
    fn cmeans_equidistant_point_half_memberships() {
        // two tight groups and a middle point equidistant from both
        let pts = array![[0.0], [0.0], [10.0], [10.0], [5.0]];
        let c = cmeans(pts.view(), 2, 2.0, 5, 1e-9, 500).unwrap();
        let u = c.memberships.unwrap();
        assert!((u[[4, 0]] - 0.5).abs() < 1e-6, "got {}", u[[4, 0]]);
        assert!((u[[4, 1]] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn cmeans_low_fuzzifier_approaches_kmeans() {
        // separated blobs: f -> 1+ gives near one-hot memberships matching
        // the crisp assignment
        let mut vals = Vec::new();
        for i in 0..10 {
            vals.push([i as f64 * 0.01, 0.0]);
            vals.push([10.0 + i as f64 * 0.01, 0.0]);
        }
        let pts = Array2::from_shape_vec(
            (20, 2),
            vals.iter().flat_map(|r| r.iter().copied()).collect(),
        )
        .unwrap();
        let cm = cmeans(pts.view(), 2, 1.05, 42, 1e-9, 500).unwrap();
        let km = kmeans(pts.view(), 2, 42, 1e-9, 300).unwrap();
        assert_eq!(rand_index(&cm.labels, &km.labels), 1.0);
        let u = cm.memberships.unwrap();
        for i in 0..20 {
            let max_off = (0..2)
                .map(|c| u[[i, c]])
                .fold(f64::INFINITY, f64::min);
            assert!(max_off < 0.05, "off-membership too large: {max_off}");
        }
    }

    #[test]
    fn cmeans_k1_all_memberships_one() {
        let pts = array![[1.0], [3.0]];
        let c = cmeans(pts.view(), 1, 2.0, 9, 1e-9, 300).unwrap();
        let u = c.memberships.unwrap();
        assert_eq!(u[[0, 0]], 1.0);
        assert_eq!(u[[1, 0]], 1.0);
        assert!((c.centroids.unwrap()[[0, 0]] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn cmeans_membership_rows_sum_to_one() {
        let pts = Array2::from_shape_fn((15, 2), |(i, j)| ((i * 5 + j * 3) % 7) as f64);
        let c = cmeans(pts.view(), 3, 2.0, 13, 1e-9, 300).unwrap();
        let u = c.memberships.unwrap();
        for i in 0..15 {
            let sum: f64 = (0..3).map(|c| u[[i, c]]).sum();
            assert!((sum - 1.0).abs() < 1e-9);
        }
    }

    fn two_blob_matrix() -> Array2<f64> {
        // blob A at 0, blob B at 100; 5 points each on a line
        let xs: Vec<f64> = vec![0.0, 0.5, 1.0, 1.5, 2.0, 100.0, 100.5, 101.0, 101.5, 102.0];
        let pts = Array2::from_shape_vec((10, 1), xs).unwrap();
        pairwise_distances(pts.view())
    }

    #[test]
    fn wishart_two_blobs() {
        let dist = two_blob_matrix();
        let c = wishart(dist.view(), 2, 0.0, 1).unwrap();
        assert_eq!(c.k_found, 2);
        assert_eq!(c.noise_ratio(), 0.0);
        // first five together, last five together, different labels
        assert!(c.labels[..5].iter().all(|&l| l == c.labels[0] && l != 0));
        assert!(c.labels[5..].iter().all(|&l| l == c.labels[5] && l != 0));
        assert_ne!(c.labels[0], c.labels[5]);
    }

    #[test]
    fn wishart_infinite_h_merges_everything() {
        // connected radius graph: h = +inf means no cluster is ever
        // significant, so the merging branch always runs -> one cluster
        let xs: Vec<f64> = (0..12).map(|i| i as f64).collect();
        let pts = Array2::from_shape_vec((12, 1), xs).unwrap();
        let dist = pairwise_distances(pts.view());
        let c = wishart(dist.view(), 2, f64::INFINITY, 1).unwrap();
        assert_eq!(c.k_found, 1);
        assert_eq!(c.noise_ratio(), 0.0);
    }

    #[test]
    fn wishart_infinite_h_no_noise_on_random_data() {
        let pts = Array2::from_shape_fn((30, 2), |(i, j)| {
            ((i * 31 + j * 17) % 23) as f64 * 0.37 + (i as f64 * 0.01)
        });
        let dist = pairwise_distances(pts.view());
        let c = wishart(dist.view(), 3, f64::INFINITY, 2).unwrap();
        assert_eq!(c.noise_ratio(), 0.0);
    }

    #[test]
    fn wishart_three_collinear_points() {
        let pts = array![[0.0], [1.0], [2.0]];
        let dist = pairwise_distances(pts.view());
        let c = wishart(dist.view(), 1, 0.0, 1).unwrap();
        assert_eq!(c.k_found, 1);
        assert_eq!(c.labels, vec![1, 1, 1]);
    }

    #[test]
    fn wishart_rejects_asymmetric_matrix() {
        let mut dist = two_blob_matrix();
        dist[[0, 1]] += 1.0;
        assert!(wishart(dist.view(), 2, 0.0, 1).is_err());
    }

    #[test]
    fn wishart_fuzzy_crisp_degenerate_matches_crisp() {
        let xs: Vec<f64> = vec![0.0, 0.5, 1.0, 1.5, 2.0, 100.0, 100.5, 101.0, 101.5, 102.0];
        let pts = Array2::from_shape_vec((10, 1), xs.clone()).unwrap();
        let dist = pairwise_distances(pts.view());
        let crisp = wishart(dist.view(), 2, 0.0, 1).unwrap();

        let params = FuzzyParams::crisp(1);
        let data: Vec<_> = xs.iter().map(|&x| fuzzify(&[x], 1.0, &params).unwrap()).collect();
        let fz = wishart_fuzzy(&data, 2, 0.0, 11).unwrap();
        assert_eq!(crisp.labels, fz.labels);
    }

    #[test]
    fn wishart_fuzzy_constant_widths_cancel() {
        // heights all 1 and equal widths: the distance offset cancels, so the
        // fuzzy distance matrix equals the crisp one within 1e-12
        let xs: Vec<f64> = vec![0.0, 0.5, 1.0, 1.5, 2.0, 100.0, 100.5, 101.0, 101.5, 102.0];
        let params = FuzzyParams::uniform(0.3, 0.2, 0.2, 1).unwrap();
        let data: Vec<_> = xs.iter().map(|&x| fuzzify(&[x], 1.0, &params).unwrap()).collect();
        let fm = crate::fuzzy::fuzzy_distance_matrix(&data, 11).unwrap();
        let pts = Array2::from_shape_vec((10, 1), xs).unwrap();
        let cm = pairwise_distances(pts.view());
        for (f, c) in fm.iter().zip(cm.iter()) {
            assert!((f - c).abs() < 1e-12);
        }
        let fz = wishart(fm.view(), 2, 0.0, 1).unwrap();
        let cr = wishart(cm.view(), 2, 0.0, 1).unwrap();
        assert_eq!(fz.labels, cr.labels);
    }

    #[test]
    fn wishart_fuzzy_two_blobs() {
        let xs: Vec<f64> = vec![0.0, 0.5, 1.0, 1.5, 2.0, 100.0, 100.5, 101.0, 101.5, 102.0];
        let params = FuzzyParams::uniform(0.1, 0.05, 0.05, 1).unwrap();
        let data: Vec<_> = xs.iter().map(|&x| fuzzify(&[x], 0.8, &params).unwrap()).collect();
        let c = wishart_fuzzy(&data, 2, 0.0, 11).unwrap();
        assert_eq!(c.k_found, 2);
        assert_eq!(c.noise_ratio(), 0.0);
    }

    #[test]
    fn rand_index_basics() {
        assert_eq!(rand_index(&[1, 1, 2, 2], &[2, 2, 1, 1]), 1.0);
        assert!(rand_index(&[1, 1, 2, 2], &[1, 2, 1, 2]) < 1.0);
    }

    proptest! {
        // input order invariance of the Wishart partition on tie-free data,
        // checked by pair counting. Gaps growing faster than 2x keep every
        // k-NN radius distinct (mutual-neighbor pairs would otherwise tie).
        #[test]
        fn wishart_shuffle_invariant(seed in 0u64..200) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 12usize;
            let mut xs: Vec<f64> = Vec::with_capacity(n);
            let mut x = 0.0;
            let mut gap = 1.0;
            for _ in 0..n {
                xs.push(x);
                x += gap;
                gap *= 2.5 + rng.random::<f64>();
            }

            let pts = Array2::from_shape_vec((n, 1), xs.clone()).unwrap();
            let base = wishart(pairwise_distances(pts.view()).view(), 2, 0.1, 1).unwrap();

            // random permutation
            let mut perm: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                let j = rng.random_range(0..=i);
                perm.swap(i, j);
            }
            let shuffled: Vec<f64> = perm.iter().map(|&i| xs[i]).collect();
            let pts2 = Array2::from_shape_vec((n, 1), shuffled).unwrap();
            let c2 = wishart(pairwise_distances(pts2.view()).view(), 2, 0.1, 1).unwrap();
            // map shuffled labels back to original positions
            let mut back = vec![0usize; n];
            for (pos, &orig) in perm.iter().enumerate() {
                back[orig] = c2.labels[pos];
            }
            prop_assert_eq!(rand_index(&base.labels, &back), 1.0);
        }

        // C-Means objective is non-increasing across iterations
        #[test]
        fn cmeans_objective_non_increasing(seed in 0u64..100) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
            let pts = Array2::from_shape_fn((25, 2), |_| rng.random::<f64>() * 4.0);
            let c = cmeans(pts.view(), 3, 2.0, seed, 1e-12, 100).unwrap();
            let trace = c.objective_trace.unwrap();
            for w in trace.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-9);
            }
        }
    }
}
