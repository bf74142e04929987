//! Corpus ingestion: tokenization, vocabulary, n-gram streams and
//! document-term counts.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Provenance of a document, used downstream as the classification target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "human")]
    Human,
    #[serde(rename = "bot-simple")]
    BotSimple,
    #[serde(rename = "bot-advanced")]
    BotAdvanced,
    #[serde(rename = "unlabeled")]
    Unlabeled,
}

impl Label {
    pub fn parse(s: &str) -> Result<Label> {
        match s {
            "human" => Ok(Label::Human),
            "bot-simple" => Ok(Label::BotSimple),
            "bot-advanced" => Ok(Label::BotAdvanced),
            "unlabeled" => Ok(Label::Unlabeled),
            other => Err(Error::invalid(format!("unknown label `{other}`"))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Label::Human => "human",
            Label::BotSimple => "bot-simple",
            Label::BotAdvanced => "bot-advanced",
            Label::Unlabeled => "unlabeled",
        }
    }

    /// +1 for human, -1 for either bot class. Unlabeled rows cannot train.
    pub fn to_class(&self) -> Option<i8> {
        match self {
            Label::Human => Some(1),
            Label::BotSimple | Label::BotAdvanced => Some(-1),
            Label::Unlabeled => None,
        }
    }
}

/// Rule-based tokenizer configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TokenizerRules {
    /// Case-fold tokens to lowercase.
    pub lowercase: bool,
    /// Drop every non-alphanumeric character from each token.
    pub strip_punctuation: bool,
}

impl Default for TokenizerRules {
    fn default() -> Self {
        TokenizerRules {
            lowercase: true,
            strip_punctuation: true,
        }
    }
}

/// Split on Unicode whitespace, then apply case-folding and punctuation
/// stripping per `rules`. Tokens that become empty are dropped, so the
/// output never contains the empty string.
pub fn tokenize(raw: &str, rules: &TokenizerRules) -> Vec<String> {
    raw.split_whitespace()
        .filter_map(|w| {
            let w = if rules.lowercase {
                w.to_lowercase()
            } else {
                w.to_string()
            };
            let w: String = if rules.strip_punctuation {
                w.chars().filter(|c| c.is_alphanumeric()).collect()
            } else {
                w
            };
            if w.is_empty() {
                None
            } else {
                Some(w)
            }
        })
        .collect()
}

/// Dense token-string <-> index bijection, indices 0..V-1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Vocab {
    tokens: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, u32>,
}

impl Vocab {
    fn from_tokens(tokens: Vec<String>) -> Vocab {
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Vocab { tokens, index }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn index_of(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn token(&self, idx: u32) -> &str {
        &self.tokens[idx as usize]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Rebuild the reverse index after deserialization.
    fn rebuild_index(&mut self) {
        self.index = self
            .tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
    }
}

/// A tokenized document: ordered token indices into a corpus vocabulary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TokenDoc {
    pub id: String,
    pub tokens: Vec<u32>,
    pub label: Label,
}

/// Contiguous n-gram windows of a token stream, stored flat
/// (`grams.len() == count * n`).
#[derive(Debug, Clone)]
pub struct NGramStream {
    pub n: usize,
    pub stride: usize,
    grams: Vec<u32>,
}

impl NGramStream {
    pub fn len(&self) -> usize {
        if self.n == 0 {
            0
        } else {
            self.grams.len() / self.n
        }
    }

    pub fn is_empty(&self) -> bool {
        self.grams.is_empty()
    }

    pub fn gram(&self, i: usize) -> &[u32] {
        &self.grams[i * self.n..(i + 1) * self.n]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u32]> {
        self.grams.chunks_exact(self.n)
    }
}

/// Sliding n-gram windows over `doc.tokens` with the given stride.
/// Short documents yield an empty stream; the window count obeys
/// `max(0, floor((len - n) / stride) + 1)`.
pub fn extract_ngrams(doc: &TokenDoc, n: usize, stride: usize) -> Result<NGramStream> {
    if n == 0 || stride == 0 {
        return Err(Error::invalid("n and stride must be positive"));
    }
    let mut grams = Vec::new();
    if doc.tokens.len() >= n {
        let mut start = 0;
        while start + n <= doc.tokens.len() {
            grams.extend_from_slice(&doc.tokens[start..start + n]);
            start += stride;
        }
    }
    Ok(NGramStream { n, stride, grams })
}

/// Per-token relative frequencies n_j = count_j / total; they sum to 1.
pub fn normalized_frequencies(doc: &TokenDoc) -> Result<BTreeMap<u32, f64>> {
    if doc.tokens.is_empty() {
        return Err(Error::EmptyDocument(doc.id.clone()));
    }
    let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
    for &t in &doc.tokens {
        *counts.entry(t).or_insert(0) += 1;
    }
    let total = doc.tokens.len() as f64;
    Ok(counts
        .into_iter()
        .map(|(t, c)| (t, c as f64 / total))
        .collect())
}

/// A built corpus: vocabulary, documents and the sparse term-by-document
/// count matrix (per-document columns of `(term, count)` sorted by term).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Corpus {
    pub vocab: Vocab,
    pub docs: Vec<TokenDoc>,
    counts: Vec<Vec<(u32, u32)>>,
}

impl Corpus {
    /// Column j of the term-document count matrix.
    pub fn counts_column(&self, doc_idx: usize) -> &[(u32, u32)] {
        &self.counts[doc_idx]
    }

    pub fn num_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn doc_by_id(&self, id: &str) -> Option<&TokenDoc> {
        self.docs.iter().find(|d| d.id == id)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_vec(self)?;
        fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Corpus> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let mut corpus: Corpus = serde_json::from_slice(&bytes)?;
        corpus.vocab.rebuild_index();
        corpus.validate()?;
        Ok(corpus)
    }

    /// Check the column-sum law and index bounds.
    pub fn validate(&self) -> Result<()> {
        let v = self.vocab.len() as u32;
        if self.counts.len() != self.docs.len() {
            return Err(Error::invalid("counts/docs length mismatch"));
        }
        for (doc, col) in self.docs.iter().zip(&self.counts) {
            if doc.tokens.iter().any(|&t| t >= v) {
                return Err(Error::invalid(format!(
                    "token index out of range in doc {}",
                    doc.id
                )));
            }
            let sum: u64 = col.iter().map(|&(_, c)| c as u64).sum();
            if sum != doc.tokens.len() as u64 {
                return Err(Error::invalid(format!(
                    "count column for doc {} does not sum to its token count",
                    doc.id
                )));
            }
        }
        Ok(())
    }
}

/// One raw document queued for corpus construction.
struct PendingDoc {
    id: String,
    label: Label,
    tokens: Vec<String>,
}

/// Accumulates documents, then builds the vocabulary (frequency-sorted,
/// ties by token string) and the count matrix in one pass.
pub struct CorpusBuilder {
    rules: TokenizerRules,
    min_count: u64,
    pending: Vec<PendingDoc>,
}

impl CorpusBuilder {
    pub fn new(rules: TokenizerRules, min_count: u64) -> CorpusBuilder {
        CorpusBuilder {
            rules,
            min_count: min_count.max(1),
            pending: Vec::new(),
        }
    }

    pub fn add_document(&mut self, id: impl Into<String>, label: Label, raw_text: &str) {
        let tokens = tokenize(raw_text, &self.rules);
        self.pending.push(PendingDoc {
            id: id.into(),
            label,
            tokens,
        });
    }

    /// Accept externally tokenized input: one token per whitespace-separated
    /// field, used verbatim (no case folding or stripping).
    pub fn add_pretokenized(&mut self, id: impl Into<String>, label: Label, text: &str) {
        let tokens = text.split_whitespace().map(str::to_string).collect();
        self.pending.push(PendingDoc {
            id: id.into(),
            label,
            tokens,
        });
    }

    pub fn build(self) -> Result<Corpus> {
        let mut seen_ids: HashMap<&str, ()> = HashMap::new();
        for doc in &self.pending {
            if seen_ids.insert(&doc.id, ()).is_some() {
                return Err(Error::DuplicateDocId(doc.id.clone()));
            }
        }

        let mut freq: BTreeMap<&str, u64> = BTreeMap::new();
        for doc in &self.pending {
            for t in &doc.tokens {
                *freq.entry(t.as_str()).or_insert(0) += 1;
            }
        }
        let mut kept: Vec<(&str, u64)> = freq
            .into_iter()
            .filter(|&(_, c)| c >= self.min_count)
            .collect();
        // Frequency-descending, token-ascending: deterministic dense indices.
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let vocab = Vocab::from_tokens(kept.into_iter().map(|(t, _)| t.to_string()).collect());

        let mut docs = Vec::with_capacity(self.pending.len());
        let mut counts = Vec::with_capacity(self.pending.len());
        for doc in &self.pending {
            // Tokens below the min-count cutoff are omitted from the stream.
            let tokens: Vec<u32> = doc
                .tokens
                .iter()
                .filter_map(|t| vocab.index_of(t))
                .collect();
            let mut col: BTreeMap<u32, u32> = BTreeMap::new();
            for &t in &tokens {
                *col.entry(t).or_insert(0) += 1;
            }
            docs.push(TokenDoc {
                id: doc.id.clone(),
                tokens,
                label: doc.label,
            });
            counts.push(col.into_iter().collect());
        }

        Ok(Corpus {
            vocab,
            docs,
            counts,
        })
    }
}

/// Entry of a manifest file: `[{"id": ..., "path": ..., "label": ...}]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub path: PathBuf,
    #[serde(default = "default_label")]
    pub label: Label,
}

fn default_label() -> Label {
    Label::Unlabeled
}

/// Read a UTF-8 text file; invalid UTF-8 is reported with its byte offset.
pub fn read_text_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidUtf8 {
        path: path.to_path_buf(),
        offset: e.utf8_error().valid_up_to(),
    })
}

/// Queue every `.txt` file of a directory (sorted by file name; the file
/// stem becomes the document id).
pub fn ingest_dir(
    builder: &mut CorpusBuilder,
    dir: &Path,
    label: Label,
    pretokenized: bool,
) -> Result<usize> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().map_or(false, |ext| ext == "txt"))
        .collect();
    paths.sort();
    for path in &paths {
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.to_string_lossy().into_owned());
        let text = read_text_file(path)?;
        if pretokenized {
            builder.add_pretokenized(id, label, &text);
        } else {
            builder.add_document(id, label, &text);
        }
    }
    Ok(paths.len())
}

/// Queue the documents listed in a manifest JSON file. Relative paths are
/// resolved against the manifest's directory.
pub fn ingest_manifest(
    builder: &mut CorpusBuilder,
    manifest_path: &Path,
    pretokenized: bool,
) -> Result<usize> {
    let bytes = fs::read(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
    let entries: Vec<ManifestEntry> = serde_json::from_slice(&bytes)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    for entry in &entries {
        let path = if entry.path.is_absolute() {
            entry.path.clone()
        } else {
            base.join(&entry.path)
        };
        let text = read_text_file(&path)?;
        if pretokenized {
            builder.add_pretokenized(entry.id.clone(), entry.label, &text);
        } else {
            builder.add_document(entry.id.clone(), entry.label, &text);
        }
    }
    Ok(entries.len())
}
