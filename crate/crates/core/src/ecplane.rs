//! Bandt-Pompe ordinal pattern distributions (one-dimensional and the
//! multidimensional tuple extension), normalized permutation entropy,
//! Jensen-Shannon statistical complexity, theoretical boundary curves and
//! chaotic-area membership.

use std::collections::BTreeMap;

use ndarray::ArrayView2;
use rayon::prelude::*;

use crate::error::{Error, Result};

const LN_2: f64 = std::f64::consts::LN_2;

/// ln(n!) by direct summation.
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Ordinal pattern of a window: the permutation that sorts it ascending,
/// ties broken by earlier index first (Bandt-Pompe convention).
pub fn ordinal_pattern(window: &[f64]) -> Result<Vec<u8>> {
    let n = window.len();
    if n < 2 {
        return Err(Error::invalid("ordinal pattern needs a window of >= 2"));
    }
    if n > u8::MAX as usize {
        return Err(Error::invalid("ordinal window too long"));
    }
    if window.iter().any(|v| v.is_nan()) {
        return Err(Error::invalid("NaN in ordinal window"));
    }
    let mut idx: Vec<u8> = (0..n as u8).collect();
    idx.sort_by(|&a, &b| {
        window[a as usize]
            .partial_cmp(&window[b as usize])
            .unwrap()
            .then(a.cmp(&b))
    });
    Ok(idx)
}

/// Empirical distribution of m-tuples of ordinal patterns over sliding
/// windows of `n` consecutive rows. Keys are the m patterns concatenated
/// (length m*n); the alphabet size is (n!)^m.
#[derive(Debug, Clone)]
pub struct OrdinalDistribution {
    pub n: usize,
    pub m: usize,
    probs: BTreeMap<Vec<u8>, f64>,
    pub total_windows: usize,
}

impl OrdinalDistribution {
    pub fn probs(&self) -> &BTreeMap<Vec<u8>, f64> {
        &self.probs
    }

    pub fn distinct_patterns(&self) -> usize {
        self.probs.len()
    }

    /// ln of the alphabet size (n!)^m.
    pub fn ln_alphabet(&self) -> f64 {
        self.m as f64 * ln_factorial(self.n)
    }
}

/// Ordinal pattern tuple distribution of a multivariate series (rows =
/// time, the first `m` columns are used).
pub fn multidim_distribution(
    series: ArrayView2<f64>,
    m: usize,
    n: usize,
    stride: usize,
) -> Result<OrdinalDistribution> {
    if m == 0 || stride == 0 {
        return Err(Error::invalid("m and stride must be positive"));
    }
    if n < 2 {
        return Err(Error::invalid("pattern length n must be >= 2"));
    }
    if series.ncols() < m {
        return Err(Error::invalid(format!(
            "series has {} components, need {m}",
            series.ncols()
        )));
    }
    let len = series.nrows();
    if len < n {
        return Err(Error::invalid(format!(
            "series length {len} shorter than pattern length {n}"
        )));
    }

    let mut counts: BTreeMap<Vec<u8>, u64> = BTreeMap::new();
    let mut window = vec![0.0f64; n];
    let mut t = 0;
    let mut total = 0usize;
    while t + n <= len {
        let mut key = Vec::with_capacity(m * n);
        for d in 0..m {
            for (w, slot) in window.iter_mut().enumerate() {
                *slot = series[[t + w, d]];
            }
            key.extend(ordinal_pattern(&window)?);
        }
        *counts.entry(key).or_insert(0) += 1;
        total += 1;
        t += stride;
    }

    let probs = counts
        .into_iter()
        .map(|(k, c)| (k, c as f64 / total as f64))
        .collect();
    Ok(OrdinalDistribution {
        n,
        m,
        probs,
        total_windows: total,
    })
}

/// A point on the entropy-complexity plane.
#[derive(Debug, Clone, Copy)]
pub struct ECPoint {
    pub h: f64,
    pub c: f64,
    pub n: usize,
    pub m: usize,
    pub ln_alphabet: f64,
}

fn neg_x_ln_x(x: f64) -> f64 {
    if x > 0.0 {
        -x * x.ln()
    } else {
        0.0
    }
}

/// Shared core of the MPR complexity: given ln N, the Shannon entropy S(P)
/// and the entropy of the even mixture S((P+Pe)/2), produce (H, C).
fn ec_from_entropies(ln_n: f64, s_p: f64, s_mix: f64) -> (f64, f64) {
    let h = (s_p / ln_n).clamp(0.0, 1.0);
    let js = (s_mix - s_p / 2.0 - ln_n / 2.0).max(0.0);
    let inv = (-ln_n).exp();
    // (N+1)/N * ln(N+1) - 2 ln(2N) + ln N, rearranged around ln N so it
    // stays finite for huge alphabets
    let denom = inv * ln_n + (1.0 + inv) * inv.ln_1p() - 2.0 * LN_2;
    let q0 = -2.0 / denom;
    let c = (q0 * js * h).max(0.0);
    (h, c)
}

/// Normalized permutation entropy H and statistical complexity C = Q * H,
/// with Q the Jensen-Shannon divergence to the uniform distribution over
/// all (n!)^m patterns, normalized by its maximum. Unseen patterns enter
/// only through the closed-form uniform term.
pub fn entropy_complexity(dist: &OrdinalDistribution) -> ECPoint {
    let ln_n = dist.ln_alphabet();
    let inv = (-ln_n).exp(); // 1/N, may underflow to 0 for huge alphabets
    let mut s_p = 0.0;
    let mut s_mix = 0.0;
    for &p in dist.probs.values() {
        s_p += neg_x_ln_x(p);
        s_mix += neg_x_ln_x((p + inv) / 2.0);
    }
    // the N - k unseen patterns contribute (1 - k/N)/2 * ln(2N) in total
    let seen_mass = dist.probs.len() as f64 * inv;
    s_mix += (1.0 - seen_mass).max(0.0) * (ln_n + LN_2) / 2.0;

    let (h, c) = ec_from_entropies(ln_n, s_p, s_mix);
    ECPoint {
        h,
        c,
        n: dist.n,
        m: dist.m,
        ln_alphabet: ln_n,
    }
}

/// (H, C) of the "two-block" family: one entry p, `support - 1` entries
/// (1-p)/(support-1), and N - support zeros.
fn ec_two_block(ln_n: f64, alphabet: f64, support: f64, p: f64) -> (f64, f64) {
    let inv = 1.0 / alphabet;
    let rest = support - 1.0;
    let q = if rest > 0.0 { (1.0 - p) / rest } else { 0.0 };
    let s_p = neg_x_ln_x(p) + rest * neg_x_ln_x(q);
    let mut s_mix = neg_x_ln_x((p + inv) / 2.0) + rest * neg_x_ln_x((q + inv) / 2.0);
    s_mix += (1.0 - support * inv).max(0.0) * (ln_n + LN_2) / 2.0;
    ec_from_entropies(ln_n, s_p, s_mix)
}

/// Sampled lower and upper boundary polylines of the entropy-complexity
/// plane for a given alphabet size, both sorted by H with endpoints at
/// (0,0) and (1,0).
#[derive(Debug, Clone)]
pub struct BoundaryCurves {
    pub alphabet: u64,
    pub lower: Vec<(f64, f64)>,
    pub upper: Vec<(f64, f64)>,
}

/// Total sampled points allowed on the upper envelope before the family
/// grid is subsampled (geometric spacing in the support size).
const MAX_ENVELOPE_POINTS: usize = 2_000_000;

/// Lower curve: the one-parameter family {p, (1-p)/(N-1), ...} for
/// p in [1/N, 1]. Upper curve: the envelope over families with M zero
/// entries (support size s = N - M from 2 to N), one entry p in [0, 1/s]
/// and the rest equal. For alphabets too large to enumerate every family
/// the support grid is subsampled geometrically.
pub fn boundary_curves(alphabet: u64, samples_per_family: usize) -> Result<BoundaryCurves> {
    if alphabet < 2 {
        return Err(Error::invalid("alphabet size must be >= 2"));
    }
    if samples_per_family < 2 {
        return Err(Error::invalid("need at least 2 samples per family"));
    }
    let n_f = alphabet as f64;
    let ln_n = n_f.ln();

    let mut lower = Vec::with_capacity(samples_per_family);
    for t in 0..samples_per_family {
        let frac = t as f64 / (samples_per_family - 1) as f64;
        let p = 1.0 / n_f + (1.0 - 1.0 / n_f) * frac;
        lower.push(ec_two_block(ln_n, n_f, n_f, p));
    }
    lower.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    // choose the support-size grid for the upper envelope
    let families = alphabet - 1;
    let supports: Vec<f64> = if families as usize * samples_per_family <= MAX_ENVELOPE_POINTS {
        (2..=alphabet).map(|s| s as f64).collect()
    } else {
        let budget = (MAX_ENVELOPE_POINTS / samples_per_family).max(2);
        let ratio = (n_f / 2.0).powf(1.0 / (budget as f64 - 1.0));
        let mut grid: Vec<f64> = Vec::with_capacity(budget);
        let mut s = 2.0f64;
        for _ in 0..budget {
            grid.push(s.round().min(n_f));
            s *= ratio;
        }
        grid.push(n_f);
        grid.dedup();
        grid
    };

    let mut upper = Vec::with_capacity(supports.len() * samples_per_family);
    for &s in &supports {
        for t in 0..samples_per_family {
            let p = (1.0 / s) * t as f64 / (samples_per_family - 1) as f64;
            upper.push(ec_two_block(ln_n, n_f, s, p));
        }
    }
    upper.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    Ok(BoundaryCurves {
        alphabet,
        lower,
        upper,
    })
}

fn interpolate(poly: &[(f64, f64)], h: f64) -> f64 {
    if poly.is_empty() {
        return 0.0;
    }
    if h <= poly[0].0 {
        return poly[0].1;
    }
    if h >= poly[poly.len() - 1].0 {
        return poly[poly.len() - 1].1;
    }
    let mut lo = 0usize;
    let mut hi = poly.len() - 1;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if poly[mid].0 <= h {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (h0, c0) = poly[lo];
    let (h1, c1) = poly[hi];
    if h1 == h0 {
        c0.max(c1)
    } else {
        c0 + (c1 - c0) * (h - h0) / (h1 - h0)
    }
}

impl BoundaryCurves {
    pub fn upper_at(&self, h: f64) -> f64 {
        interpolate(&self.upper, h)
    }

    pub fn lower_at(&self, h: f64) -> f64 {
        interpolate(&self.lower, h)
    }

    pub fn max_upper_c(&self) -> f64 {
        self.upper.iter().map(|&(_, c)| c).fold(0.0, f64::max)
    }
}

/// Chaotic-area membership: true iff the point sits within `margin` below
/// the upper boundary (vertically) and its entropy lies in the interior
/// band [0.25, 0.95]. Also returns the vertical distance to the upper curve.
pub fn chaotic_area_test(
    pt: &ECPoint,
    curves: &BoundaryCurves,
    margin: f64,
) -> Result<(bool, f64)> {
    if !(0.0..=1.0).contains(&pt.h) {
        return Err(Error::invalid(format!("entropy {} outside [0, 1]", pt.h)));
    }
    let curve_ln = (curves.alphabet as f64).ln();
    if (curve_ln - pt.ln_alphabet).abs() > 1e-6 * curve_ln.max(1.0) {
        return Err(Error::invalid(
            "boundary curves built for a different alphabet size",
        ));
    }
    let dist = curves.upper_at(pt.h) - pt.c;
    let chaotic = dist <= margin && (0.25..=0.95).contains(&pt.h);
    Ok((chaotic, dist))
}

/// One cell of the (m, n) parameter sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub m: usize,
    pub n: usize,
    pub mean_h: f64,
    pub mean_c: f64,
    pub chaotic_fraction: f64,
    pub texts_used: usize,
    pub skipped: Option<String>,
}

/// Sweep the pattern parameters over every text series. Cells whose
/// alphabet (n!)^m exceeds `pattern_budget` are skipped with a reason;
/// texts shorter than the window are excluded per cell. The chaotic margin
/// is `delta_frac` times the maximum upper-boundary complexity.
pub fn parameter_sweep(
    series: &[ArrayView2<f64>],
    m_grid: &[usize],
    n_grid: &[usize],
    stride: usize,
    pattern_budget: f64,
    delta_frac: f64,
    samples_per_family: usize,
) -> Result<Vec<SweepRow>> {
    if m_grid.is_empty() || n_grid.is_empty() {
        return Err(Error::invalid("empty parameter grid"));
    }
    let mut rows = Vec::with_capacity(m_grid.len() * n_grid.len());
    for &m in m_grid {
        for &n in n_grid {
            let ln_alpha = m as f64 * ln_factorial(n);
            if ln_alpha.exp() > pattern_budget {
                rows.push(SweepRow {
                    m,
                    n,
                    mean_h: f64::NAN,
                    mean_c: f64::NAN,
                    chaotic_fraction: f64::NAN,
                    texts_used: 0,
                    skipped: Some(format!(
                        "alphabet (n!)^m = exp({ln_alpha:.2}) exceeds budget {pattern_budget}"
                    )),
                });
                continue;
            }
            let alphabet = ln_alpha.exp().round() as u64;
            let curves = boundary_curves(alphabet, samples_per_family)?;
            let margin = delta_frac * curves.max_upper_c();

            let points: Vec<(f64, f64, bool)> = series
                .par_iter()
                .filter_map(|s| {
                    if s.nrows() < n {
                        return None;
                    }
                    let dist = multidim_distribution(*s, m, n, stride).ok()?;
                    let pt = entropy_complexity(&dist);
                    let (chaotic, _) = chaotic_area_test(&pt, &curves, margin).ok()?;
                    Some((pt.h, pt.c, chaotic))
                })
                .collect();

            if points.is_empty() {
                rows.push(SweepRow {
                    m,
                    n,
                    mean_h: f64::NAN,
                    mean_c: f64::NAN,
                    chaotic_fraction: f64::NAN,
                    texts_used: 0,
                    skipped: Some("no text long enough for this window".into()),
                });
                continue;
            }
            let count = points.len() as f64;
            let mean_h = points.iter().map(|p| p.0).sum::<f64>() / count;
            let mean_c = points.iter().map(|p| p.1).sum::<f64>() / count;
            let chaotic_fraction =
                points.iter().filter(|p| p.2).count() as f64 / count;
            rows.push(SweepRow {
                m,
                n,
                mean_h,
                mean_c,
                chaotic_fraction,
                texts_used: points.len(),
                skipped: None,
            });
        }
    }
    Ok(rows)
}
