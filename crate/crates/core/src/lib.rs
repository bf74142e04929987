//! Detecting machine-generated text from the geometry of its semantic path.
//!
//! The pipeline ingests tokenized documents, embeds n-grams by concatenating
//! word vectors (truncated SVD of the document-term matrix or externally
//! trained vectors), and derives per-text features from two directions:
//! cluster geometry (K-Means, fuzzy C-Means, Wishart on crisp or fuzzy
//! distances) and the permutation entropy-complexity plane. A linear
//! max-margin classifier separates human from generated texts on those
//! features.

pub mod classify;
pub mod cluster;
pub mod corpus;
pub mod ecplane;
pub mod embed;
pub mod error;
pub mod fuzzy;
pub mod markov;
pub mod metrics;
pub mod svd;

pub use classify::{cross_validate, train_svc, CvReport, FeatureRow, LinearModel};
pub use cluster::{cmeans, kmeans, pairwise_distances, rand_index, wishart, wishart_fuzzy, Clustering};
pub use corpus::{
    extract_ngrams, normalized_frequencies, tokenize, Corpus, CorpusBuilder, Label, NGramStream,
    TokenDoc, TokenizerRules, Vocab,
};
pub use ecplane::{
    boundary_curves, chaotic_area_test, entropy_complexity, multidim_distribution,
    ordinal_pattern, parameter_sweep, BoundaryCurves, ECPoint, OrdinalDistribution, SweepRow,
};
pub use embed::{
    build_path, load_embeddings, save_embeddings, svd_embed, EmbeddingTable, SemanticPath,
    Weighting,
};
pub use error::{Error, Result};
pub use fuzzy::{
    fuzzify, fuzzy_distance, fuzzy_distance_matrix, join_ngram, FuzzyParams, TrapFuzzyNumber,
    TrapFuzzyVector,
};
pub use markov::MarkovModel;
pub use metrics::{cluster_stats, intercluster, rmsstd, rs, wilcoxon_ranksum, ClusterStats, PValueMode};
