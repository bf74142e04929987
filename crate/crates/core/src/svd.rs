//! Seeded randomized truncated SVD (subspace iteration) for sparse
//! term-document matrices.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Column-major sparse matrix: `cols[j]` holds `(row, value)` pairs sorted
/// by row index.
#[derive(Debug, Clone)]
pub struct SparseColMatrix {
    rows: usize,
    cols: Vec<Vec<(u32, f64)>>,
}

impl SparseColMatrix {
    pub fn new(rows: usize, cols: Vec<Vec<(u32, f64)>>) -> SparseColMatrix {
        SparseColMatrix { rows, cols }
    }

    pub fn from_dense(a: &Array2<f64>) -> SparseColMatrix {
        let (rows, cols) = a.dim();
        let cols = (0..cols)
            .map(|j| {
                (0..rows)
                    .filter(|&i| a[[i, j]] != 0.0)
                    .map(|i| (i as u32, a[[i, j]]))
                    .collect()
            })
            .collect();
        SparseColMatrix { rows, cols }
    }

    pub fn num_rows(&self) -> usize {
        self.rows
    }

    pub fn num_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn map_values(mut self, f: impl Fn(f64) -> f64) -> SparseColMatrix {
        for col in &mut self.cols {
            for entry in col.iter_mut() {
                entry.1 = f(entry.1);
            }
        }
        self
    }

    /// A * omega, with omega dense (num_cols x r).
    fn mul_dense(&self, omega: &Array2<f64>) -> Array2<f64> {
        let r = omega.ncols();
        let mut out = Array2::zeros((self.rows, r));
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, v) in col {
                out.row_mut(i as usize).scaled_add(v, &omega.row(j));
            }
        }
        out
    }

    /// A^T * q, with q dense (num_rows x r).
    fn tr_mul_dense(&self, q: &Array2<f64>) -> Array2<f64> {
        let r = q.ncols();
        let mut out = Array2::zeros((self.cols.len(), r));
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, v) in col {
                out.row_mut(j).scaled_add(v, &q.row(i as usize));
            }
        }
        out
    }
}

/// Truncated decomposition A ~ U * diag(s) * Vt with s non-increasing.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Array2<f64>,
    pub s: Vec<f64>,
    pub vt: Array2<f64>,
    /// Requested rank exceeded the numerical rank; fewer columns returned.
    pub rank_deficient: bool,
}

/// Randomized truncated SVD with Gaussian test matrix, `oversample` extra
/// probe directions and `power_iters` subspace iterations. Deterministic for
/// a fixed seed. The sign of each left singular vector is fixed so that its
/// largest-magnitude entry is non-negative.
pub fn truncated_svd(
    a: &SparseColMatrix,
    rank: usize,
    oversample: usize,
    power_iters: usize,
    seed: u64,
) -> Result<Svd> {
    let (rows, cols) = (a.num_rows(), a.num_cols());
    if rows == 0 || cols == 0 {
        return Err(Error::invalid("svd on an empty matrix"));
    }
    if rank == 0 {
        return Err(Error::invalid("svd rank must be >= 1"));
    }
    let upper = rows.min(cols);
    let target = rank.min(upper);
    let probes = (rank + oversample).min(upper);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega = gaussian_matrix(cols, probes, &mut rng);

    let mut q = orthonormalize(a.mul_dense(&omega));
    for _ in 0..power_iters {
        let z = orthonormalize(a.tr_mul_dense(&q));
        q = orthonormalize(a.mul_dense(&z));
    }

    // B = Q^T A; run one-sided Jacobi on B^T = A^T Q (cols x probes).
    let bt = a.tr_mul_dense(&q);
    let (u_b, mut sigma, v_b) = jacobi_onesided(bt);

    // B = V_b * diag(sigma) * U_b^T, so A ~ (Q V_b) diag(sigma) U_b^T.
    let mut u = q.dot(&v_b);
    let mut vt = u_b.reversed_axes();

    // Order singular values descending (ties keep original order).
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).unwrap().then(i.cmp(&j)));
    u = reorder_cols(&u, &order);
    vt = reorder_rows(&vt, &order);
    sigma = order.iter().map(|&i| sigma[i]).collect();

    let s0 = sigma.first().copied().unwrap_or(0.0);
    if s0 <= 0.0 {
        return Err(Error::invalid("svd on a zero matrix"));
    }
    let numerical_rank = sigma.iter().take_while(|&&s| s > s0 * 1e-12).count();
    let keep = target.min(numerical_rank);
    let rank_deficient = rank > keep;

    let mut u = u.slice(ndarray::s![.., ..keep]).to_owned();
    let mut vt = vt.slice(ndarray::s![..keep, ..]).to_owned();
    sigma.truncate(keep);

    // Deterministic sign: largest-magnitude entry of each U column >= 0.
    for k in 0..keep {
        let col = u.column(k);
        let mut best = 0usize;
        let mut best_abs = -1.0;
        for (i, &v) in col.iter().enumerate() {
            if v.abs() > best_abs {
                best_abs = v.abs();
                best = i;
            }
        }
        if u[[best, k]] < 0.0 {
            u.column_mut(k).mapv_inplace(|v| -v);
            vt.row_mut(k).mapv_inplace(|v| -v);
        }
    }

    Ok(Svd {
        u,
        s: sigma,
        vt,
        rank_deficient,
    })
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| {
        let u1: f64 = loop {
            let v = rng.random::<f64>();
            if v > 1e-300 {
                break v;
            }
        };
        let u2: f64 = rng.random();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    })
}

/// Modified Gram-Schmidt, two passes. Columns that vanish are zeroed rather
/// than renormalized; they carry no information and truncate away as zero
/// singular values.
fn orthonormalize(mut y: Array2<f64>) -> Array2<f64> {
    let (rows, cols) = y.dim();
    let scale = (0..cols)
        .map(|k| y.column(k).dot(&y.column(k)).sqrt())
        .fold(0.0f64, f64::max);
    if scale == 0.0 {
        return y;
    }
    for k in 0..cols {
        for _pass in 0..2 {
            for p in 0..k {
                let proj = y.column(p).dot(&y.column(k));
                for i in 0..rows {
                    y[[i, k]] -= proj * y[[i, p]];
                }
            }
        }
        let norm = y.column(k).dot(&y.column(k)).sqrt();
        if norm <= scale * 1e-13 {
            y.column_mut(k).fill(0.0);
        } else {
            y.column_mut(k).mapv_inplace(|v| v / norm);
        }
    }
    y
}

/// One-sided Jacobi (Hestenes) SVD: orthogonalizes the columns of `m`,
/// returning (U, sigma, V) with m = U * diag(sigma) * V^T.
fn jacobi_onesided(mut m: Array2<f64>) -> (Array2<f64>, Vec<f64>, Array2<f64>) {
    let (rows, cols) = m.dim();
    let mut v = Array2::eye(cols);
    let eps = 1e-15;
    for _sweep in 0..60 {
        let mut rotated = false;
        for i in 0..cols.saturating_sub(1) {
            for j in (i + 1)..cols {
                let alpha = m.column(i).dot(&m.column(i));
                let beta = m.column(j).dot(&m.column(j));
                let gamma = m.column(i).dot(&m.column(j));
                if gamma.abs() <= eps * (alpha * beta).sqrt() || alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..rows {
                    let mi = m[[r, i]];
                    let mj = m[[r, j]];
                    m[[r, i]] = c * mi - s * mj;
                    m[[r, j]] = s * mi + c * mj;
                }
                for r in 0..cols {
                    let vi = v[[r, i]];
                    let vj = v[[r, j]];
                    v[[r, i]] = c * vi - s * vj;
                    v[[r, j]] = s * vi + c * vj;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sigma = vec![0.0; cols];
    let mut u = Array2::zeros((rows, cols));
    for k in 0..cols {
        let norm = m.column(k).dot(&m.column(k)).sqrt();
        sigma[k] = norm;
        if norm > 0.0 {
            for r in 0..rows {
                u[[r, k]] = m[[r, k]] / norm;
            }
        }
    }
    (u, sigma, v)
}

fn reorder_cols(a: &Array2<f64>, order: &[usize]) -> Array2<f64> {
    let mut out = Array2::zeros((a.nrows(), order.len()));
    for (new, &old) in order.iter().enumerate() {
        out.column_mut(new).assign(&a.column(old));
    }
    out
}

fn reorder_rows(a: &Array2<f64>, order: &[usize]) -> Array2<f64> {
    let mut out = Array2::zeros((order.len(), a.ncols()));
    for (new, &old) in order.iter().enumerate() {
        out.row_mut(new).assign(&a.row(old));
    }
    out
}
