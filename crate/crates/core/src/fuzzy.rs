//! Trapezoidal fuzzy numbers: fuzzification of embedding vectors weighted by
//! token frequency, n-gram joins (min of membership heights) and the
//! averaged alpha-cut distance used by Wishart clustering on fuzzy data.

use std::collections::BTreeMap;

use ndarray::Array2;
use rayon::prelude::*;

use crate::corpus::{normalized_frequencies, NGramStream, TokenDoc};
use crate::embed::EmbeddingTable;
use crate::error::{Error, Result};

/// Trapezoid with core [m1, m2] at `height`, linear flanks of widths l and r.
/// Membership is 0 outside [m1 - l, m2 + r].
#[derive(Debug, Clone, PartialEq)]
pub struct TrapFuzzyNumber {
    pub m1: f64,
    pub m2: f64,
    pub l: f64,
    pub r: f64,
    pub height: f64,
}

impl TrapFuzzyNumber {
    pub fn new(m1: f64, m2: f64, l: f64, r: f64, height: f64) -> Result<TrapFuzzyNumber> {
        if m1 > m2 {
            return Err(Error::invalid("trapezoid core requires m1 <= m2"));
        }
        if l < 0.0 || r < 0.0 {
            return Err(Error::invalid("support extensions must be non-negative"));
        }
        if !(height > 0.0 && height <= 1.0) {
            return Err(Error::invalid("height must lie in (0, 1]"));
        }
        Ok(TrapFuzzyNumber { m1, m2, l, r, height })
    }

    /// Crisp singleton at x (degenerate trapezoid of height 1).
    pub fn crisp(x: f64) -> TrapFuzzyNumber {
        TrapFuzzyNumber {
            m1: x,
            m2: x,
            l: 0.0,
            r: 0.0,
            height: 1.0,
        }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.m1 - self.l, self.m2 + self.r)
    }

    /// Alpha-cut endpoints for alpha in [0, height]: the interval where the
    /// membership function is >= alpha.
    pub fn alpha_cut(&self, alpha: f64) -> (f64, f64) {
        debug_assert!(alpha >= 0.0 && alpha <= self.height + 1e-12);
        let f = (alpha / self.height).clamp(0.0, 1.0);
        (self.m1 - self.l * (1.0 - f), self.m2 + self.r * (1.0 - f))
    }
}

/// One trapezoidal fuzzy number per embedding dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct TrapFuzzyVector {
    components: Vec<TrapFuzzyNumber>,
}

impl TrapFuzzyVector {
    pub fn new(components: Vec<TrapFuzzyNumber>) -> TrapFuzzyVector {
        TrapFuzzyVector { components }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn component(&self, j: usize) -> &TrapFuzzyNumber {
        &self.components[j]
    }

    pub fn components(&self) -> &[TrapFuzzyNumber] {
        &self.components
    }

    /// Common membership height (all components share it after fuzzify/join).
    pub fn height(&self) -> f64 {
        self.components.first().map(|c| c.height).unwrap_or(1.0)
    }
}

/// Per-dimension fuzzification widths. `delta_c` is the core width
/// m2 - m1; `l` and `r` extend the support beyond the core.
#[derive(Debug, Clone)]
pub struct FuzzyParams {
    pub delta_c: Vec<f64>,
    pub l: Vec<f64>,
    pub r: Vec<f64>,
}

impl FuzzyParams {
    pub fn uniform(delta_c: f64, l: f64, r: f64, dim: usize) -> Result<FuzzyParams> {
        if delta_c < 0.0 || l < 0.0 || r < 0.0 {
            return Err(Error::invalid("fuzzy widths must be non-negative"));
        }
        Ok(FuzzyParams {
            delta_c: vec![delta_c; dim],
            l: vec![l; dim],
            r: vec![r; dim],
        })
    }

    /// Crisp limit: all widths zero.
    pub fn crisp(dim: usize) -> FuzzyParams {
        FuzzyParams {
            delta_c: vec![0.0; dim],
            l: vec![0.0; dim],
            r: vec![0.0; dim],
        }
    }

    /// Scale-aware default: widths = factor * per-dimension standard
    /// deviation of the embedding table rows.
    pub fn scaled_to_table(table: &EmbeddingTable, factor: f64) -> FuzzyParams {
        let n = table.vectors.nrows().max(1) as f64;
        let stds: Vec<f64> = (0..table.dim)
            .map(|j| {
                let col = table.vectors.column(j);
                let mean = col.sum() / n;
                let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
                var.sqrt() * factor
            })
            .collect();
        FuzzyParams {
            delta_c: stds.clone(),
            l: stds.clone(),
            r: stds,
        }
    }

    pub fn dim(&self) -> usize {
        self.delta_c.len()
    }
}

/// Fuzzify a crisp vector: component j gets core [x_j - dc/2, x_j + dc/2],
/// flanks l_j / r_j, and membership height `mu`.
pub fn fuzzify(x: &[f64], mu: f64, params: &FuzzyParams) -> Result<TrapFuzzyVector> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::invalid(format!("mu must lie in (0, 1], got {mu}")));
    }
    if x.len() != params.dim() {
        return Err(Error::invalid("vector/params dimension mismatch"));
    }
    let components = x
        .iter()
        .enumerate()
        .map(|(j, &xj)| {
            let half = params.delta_c[j] / 2.0;
            TrapFuzzyNumber::new(xj - half, xj + half, params.l[j], params.r[j], mu)
        })
        .collect::<Result<_>>()?;
    Ok(TrapFuzzyVector { components })
}

/// Join word fuzzifications over an n-gram: concatenate components and
/// replace every height by the minimum over the words (fuzzy AND).
pub fn join_ngram(words: &[TrapFuzzyVector]) -> Result<TrapFuzzyVector> {
    if words.is_empty() {
        return Err(Error::invalid("join_ngram on an empty n-gram"));
    }
    let dim = words[0].len();
    if words.iter().any(|w| w.len() != dim) {
        return Err(Error::invalid("words must share the same dimension"));
    }
    let min_height = words
        .iter()
        .map(|w| w.height())
        .fold(f64::INFINITY, f64::min);
    let components = words
        .iter()
        .flat_map(|w| w.components().iter().cloned())
        .map(|mut c| {
            c.height = min_height;
            c
        })
        .collect();
    Ok(TrapFuzzyVector { components })
}

/// Averaged alpha-cut endpoint distance. Per component,
/// d_j = mean over K levels of (|dL| + |dR|)/2 with the levels spaced on
/// [0, min(height_a, height_b)]; the total is the Euclidean norm of the d_j.
pub fn fuzzy_distance(a: &TrapFuzzyVector, b: &TrapFuzzyVector, levels: usize) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid("fuzzy vectors differ in length"));
    }
    if levels < 2 {
        return Err(Error::invalid("need at least 2 alpha levels"));
    }
    let mut total = 0.0;
    for (ca, cb) in a.components().iter().zip(b.components()) {
        let hmin = ca.height.min(cb.height);
        let mut acc = 0.0;
        for t in 0..levels {
            let alpha = hmin * (t as f64 / (levels - 1) as f64);
            let (la, ra) = ca.alpha_cut(alpha);
            let (lb, rb) = cb.alpha_cut(alpha);
            acc += ((la - lb).abs() + (ra - rb).abs()) / 2.0;
        }
        let dj = acc / levels as f64;
        total += dj * dj;
    }
    Ok(total.sqrt())
}

/// Membership weights mu_t = n_t / max n_t from normalized frequencies.
pub fn membership_weights(freqs: &BTreeMap<u32, f64>) -> BTreeMap<u32, f64> {
    let max = freqs.values().cloned().fold(0.0f64, f64::max);
    if max <= 0.0 {
        return BTreeMap::new();
    }
    freqs.iter().map(|(&t, &f)| (t, f / max)).collect()
}

/// Fuzzify every n-gram of a stream: each word is fuzzified with its own
/// membership weight in the source text, then the gram is joined.
pub fn fuzzify_stream(
    stream: &NGramStream,
    table: &EmbeddingTable,
    mu: &BTreeMap<u32, f64>,
    params: &FuzzyParams,
) -> Result<Vec<TrapFuzzyVector>> {
    stream
        .iter()
        .map(|gram| {
            let words = gram
                .iter()
                .map(|&token| {
                    let mu_w = *mu
                        .get(&token)
                        .ok_or_else(|| Error::invalid(format!("no frequency for token {token}")))?;
                    let x = table.vector(token).to_vec();
                    fuzzify(&x, mu_w, params)
                })
                .collect::<Result<Vec<_>>>()?;
            join_ngram(&words)
        })
        .collect()
}

/// Full per-document fuzzification: frequencies, membership weights, then
/// fuzzified n-grams.
pub fn fuzzify_doc(
    doc: &TokenDoc,
    table: &EmbeddingTable,
    n: usize,
    stride: usize,
    params: &FuzzyParams,
) -> Result<Vec<TrapFuzzyVector>> {
    let stream = crate::corpus::extract_ngrams(doc, n, stride)?;
    let freqs = normalized_frequencies(doc)?;
    let mu = membership_weights(&freqs);
    fuzzify_stream(&stream, table, &mu, params)
}

/// Symmetric pairwise fuzzy distance matrix (parallel over rows).
pub fn fuzzy_distance_matrix(data: &[TrapFuzzyVector], levels: usize) -> Result<Array2<f64>> {
    let n = data.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![0.0; n];
            for j in (i + 1)..n {
                row[j] = fuzzy_distance(&data[i], &data[j], levels)?;
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let mut out = Array2::zeros((n, n));
    for (i, row) in rows.iter().enumerate() {
        for j in (i + 1)..n {
            out[[i, j]] = row[j];
            out[[j, i]] = row[j];
        }
    }
    Ok(out)
}
