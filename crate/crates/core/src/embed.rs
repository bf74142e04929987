//! Word embeddings (in-house truncated SVD of the document-term matrix, or
//! loaded from plain-text vector files) and semantic paths of concatenated
//! n-gram embeddings.

use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::corpus::{extract_ngrams, Corpus, Label, TokenDoc, Vocab};
use crate::error::{Error, Result};
use crate::svd::{truncated_svd, SparseColMatrix, Svd};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EmbeddingSource {
    #[serde(rename = "svd")]
    Svd,
    #[serde(rename = "external")]
    External,
}

/// Count weighting applied to the document-term matrix before the SVD.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Weighting {
    #[serde(rename = "raw")]
    Raw,
    /// log(1 + count), the usual LSA damping.
    #[serde(rename = "log")]
    LogCount,
}

/// One embedding vector per vocabulary entry (V x d, row i = term i).
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    pub dim: usize,
    pub vectors: Array2<f64>,
    pub source: EmbeddingSource,
    /// Set when the requested rank exceeded the numerical rank of the matrix.
    pub rank_deficient: bool,
}

impl EmbeddingTable {
    pub fn vector(&self, token: u32) -> ArrayView1<'_, f64> {
        self.vectors.row(token as usize)
    }

    pub fn vocab_size(&self) -> usize {
        self.vectors.nrows()
    }
}

/// Fraction of vocabulary entries found in an external vector file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverageReport {
    pub found: usize,
    pub vocab_size: usize,
}

impl CoverageReport {
    pub fn fraction(&self) -> f64 {
        if self.vocab_size == 0 {
            0.0
        } else {
            self.found as f64 / self.vocab_size as f64
        }
    }
}

/// Build the weighted sparse document-term matrix of a corpus (V x D).
pub fn weighted_counts(corpus: &Corpus, weighting: Weighting) -> SparseColMatrix {
    let cols = (0..corpus.num_docs())
        .map(|j| {
            corpus
                .counts_column(j)
                .iter()
                .map(|&(term, c)| {
                    let w = match weighting {
                        Weighting::Raw => c as f64,
                        Weighting::LogCount => (1.0 + c as f64).ln(),
                    };
                    (term, w)
                })
                .collect()
        })
        .collect();
    SparseColMatrix::new(corpus.vocab.len(), cols)
}

/// Term vectors from the rank-d truncated SVD of the (weighted) counts:
/// row i of U_d * Sigma_d. Returns the table and the singular values.
pub fn svd_embed(
    counts: &SparseColMatrix,
    rank: usize,
    seed: u64,
) -> Result<(EmbeddingTable, Vec<f64>)> {
    let Svd {
        mut u,
        s,
        rank_deficient,
        ..
    } = truncated_svd(counts, rank, 10, 4, seed)?;
    for (k, &sv) in s.iter().enumerate() {
        u.column_mut(k).mapv_inplace(|v| v * sv);
    }
    let table = EmbeddingTable {
        dim: s.len(),
        vectors: u,
        source: EmbeddingSource::Svd,
        rank_deficient,
    };
    Ok((table, s))
}

/// Load a plain-text vector file: header `V d`, then `token v1 .. vd` lines.
/// Vocabulary tokens missing from the file map to the zero vector and are
/// reflected in the coverage report.
pub fn load_embeddings(path: &Path, vocab: &Vocab) -> Result<(EmbeddingTable, CoverageReport)> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| vector_err(path, 1, "empty file"))?;
    let header = header.map_err(|e| Error::io(path, e))?;
    let mut head = header.split_whitespace();
    let _declared: usize = head
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| vector_err(path, 1, "header must be `V d`"))?;
    let dim: usize = head
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| vector_err(path, 1, "header must be `V d`"))?;
    if dim == 0 {
        return Err(vector_err(path, 1, "dimension must be >= 1"));
    }

    let mut vectors = Array2::zeros((vocab.len(), dim));
    let mut seen = vec![false; vocab.len()];
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let token = fields
            .next()
            .ok_or_else(|| vector_err(path, line_no, "missing token"))?;
        let values: Vec<f64> = fields
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| vector_err(path, line_no, &format!("bad float `{f}`")))
            })
            .collect::<Result<_>>()?;
        if values.len() != dim {
            return Err(vector_err(
                path,
                line_no,
                &format!("expected {dim} values, found {}", values.len()),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(vector_err(path, line_no, "non-finite value"));
        }
        if let Some(i) = vocab.index_of(token) {
            // Later duplicates overwrite earlier lines.
            for (k, &v) in values.iter().enumerate() {
                vectors[[i as usize, k]] = v;
            }
            seen[i as usize] = true;
        }
    }

    let found = seen.iter().filter(|&&s| s).count();
    Ok((
        EmbeddingTable {
            dim,
            vectors,
            source: EmbeddingSource::External,
            rank_deficient: false,
        },
        CoverageReport {
            found,
            vocab_size: vocab.len(),
        },
    ))
}

fn vector_err(path: &Path, line: usize, reason: &str) -> Error {
    Error::VectorFile {
        path: path.to_path_buf(),
        line,
        reason: reason.to_string(),
    }
}

/// Write an embedding table in the same plain-text format `load_embeddings`
/// reads, so SVD embeddings round-trip through files.
pub fn save_embeddings(path: &Path, table: &EmbeddingTable, vocab: &Vocab) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("{} {}\n", vocab.len(), table.dim));
    for (i, token) in vocab.tokens().iter().enumerate() {
        out.push_str(token);
        for k in 0..table.dim {
            out.push(' ');
            out.push_str(&format!("{}", table.vectors[[i, k]]));
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// The ordered n-gram embedding sequence of one text: row t is the
/// concatenation of the n word vectors of gram t (L x n*d).
#[derive(Debug, Clone)]
pub struct SemanticPath {
    pub doc_id: String,
    pub label: Label,
    pub n: usize,
    pub points: Array2<f64>,
}

/// Concatenate word vectors over each n-gram window of `doc`.
pub fn build_path(
    doc: &TokenDoc,
    table: &EmbeddingTable,
    n: usize,
    stride: usize,
) -> Result<SemanticPath> {
    let stream = extract_ngrams(doc, n, stride)?;
    let width = n * table.dim;
    let mut points = Array2::zeros((stream.len(), width));
    for (t, gram) in stream.iter().enumerate() {
        for (w, &token) in gram.iter().enumerate() {
            if (token as usize) >= table.vocab_size() {
                return Err(Error::invalid(format!(
                    "token index {token} outside embedding table"
                )));
            }
            let offset = w * table.dim;
            points
                .row_mut(t)
                .slice_mut(ndarray::s![offset..offset + table.dim])
                .assign(&table.vector(token));
        }
    }
    Ok(SemanticPath {
        doc_id: doc.id.clone(),
        label: doc.label,
        n,
        points,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct PathMetaDoc {
    id: String,
    label: Label,
    rows: usize,
    offset: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct PathMeta {
    n: usize,
    point_dim: usize,
    docs: Vec<PathMetaDoc>,
}

/// Persist paths as `paths.bin` (little-endian f64, row-major, concatenated)
/// plus a `paths.json` sidecar with dims and doc ids.
pub fn save_paths(dir: &Path, paths: &[SemanticPath]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let point_dim = paths.first().map(|p| p.points.ncols()).unwrap_or(0);
    let n = paths.first().map(|p| p.n).unwrap_or(0);
    let mut meta = PathMeta {
        n,
        point_dim,
        docs: Vec::with_capacity(paths.len()),
    };
    let mut bin: Vec<u8> = Vec::new();
    let mut offset = 0usize;
    for p in paths {
        if p.points.ncols() != point_dim {
            return Err(Error::invalid("inconsistent path dimensions"));
        }
        meta.docs.push(PathMetaDoc {
            id: p.doc_id.clone(),
            label: p.label,
            rows: p.points.nrows(),
            offset,
        });
        for v in p.points.iter() {
            bin.extend_from_slice(&v.to_le_bytes());
        }
        offset += p.points.len();
    }
    let bin_path = dir.join("paths.bin");
    fs::write(&bin_path, bin).map_err(|e| Error::io(&bin_path, e))?;
    let meta_path = dir.join("paths.json");
    let json = serde_json::to_vec_pretty(&meta)?;
    fs::write(&meta_path, json).map_err(|e| Error::io(&meta_path, e))
}

pub fn load_paths(dir: &Path) -> Result<Vec<SemanticPath>> {
    let meta_path = dir.join("paths.json");
    let bytes = fs::read(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let meta: PathMeta = serde_json::from_slice(&bytes)?;
    let bin_path = dir.join("paths.bin");
    let bin = fs::read(&bin_path).map_err(|e| Error::io(&bin_path, e))?;
    if bin.len() % 8 != 0 {
        return Err(Error::invalid("paths.bin length not a multiple of 8"));
    }
    let values: Vec<f64> = bin
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let mut out = Vec::with_capacity(meta.docs.len());
    for doc in &meta.docs {
        let len = doc.rows * meta.point_dim;
        let slice = values
            .get(doc.offset..doc.offset + len)
            .ok_or_else(|| Error::invalid("paths.bin shorter than sidecar claims"))?;
        let points = Array2::from_shape_vec((doc.rows, meta.point_dim), slice.to_vec())
            .map_err(|e| Error::invalid(format!("bad path shape: {e}")))?;
        out.push(SemanticPath {
            doc_id: doc.id.clone(),
            label: doc.label,
            n: meta.n,
            points,
        });
    }
    Ok(out)
}
