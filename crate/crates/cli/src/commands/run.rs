//! The `run` subcommand: configuration-driven end-to-end pipeline with
//! content-hash cached stages and a machine-readable run report.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use spotbot_core::classify::cross_validate;
use spotbot_core::cluster::{cmeans, kmeans, pairwise_distances, wishart, wishart_fuzzy};
use spotbot_core::corpus::{
    extract_ngrams, ingest_dir, normalized_frequencies, Corpus, CorpusBuilder, Label,
    TokenizerRules,
};
use spotbot_core::embed::{
    build_path, load_embeddings, save_embeddings, save_paths, svd_embed, weighted_counts,
    SemanticPath,
};
use spotbot_core::fuzzy::{fuzzify_stream, membership_weights, FuzzyParams};
use spotbot_core::markov::{CharMarkov, MarkovModel};
use spotbot_core::metrics::{cluster_stats, wilcoxon_ranksum, PValueMode};

use super::model::{read_feature_rows, CvSummary, ModelFile};
use super::{fmt_f64, write_csv, CliError, CliResult, LabelsFile, TextLabels};
use crate::RunArgs;

// ---------------------------------------------------------------- config --

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub out_dir: PathBuf,
    #[serde(default)]
    pub inputs: Vec<InputSpec>,
    #[serde(default)]
    pub bot: Option<BotSpec>,
    #[serde(default)]
    pub tokenizer: TokenizerSpec,
    #[serde(default)]
    pub embed: EmbedSpec,
    #[serde(default)]
    pub path: PathSpec,
    #[serde(default)]
    pub features: FeaturesSpec,
    #[serde(default)]
    pub cluster: ClusterSpec,
    #[serde(default)]
    pub ec: EcSpec,
    #[serde(default)]
    pub classify: ClassifySpec,
}

fn default_seed() -> u64 {
    7
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputSpec {
    pub dir: PathBuf,
    #[serde(default = "default_label")]
    pub label: String,
    #[serde(default)]
    pub pretokenized: bool,
}

fn default_label() -> String {
    "unlabeled".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BotSpec {
    /// word | char
    #[serde(default = "default_level")]
    pub level: String,
    #[serde(default = "default_order")]
    pub order: usize,
}

fn default_level() -> String {
    "word".into()
}

fn default_order() -> usize {
    2
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TokenizerSpec {
    #[serde(default = "default_true")]
    pub lowercase: bool,
    #[serde(default = "default_true")]
    pub strip_punctuation: bool,
    #[serde(default = "default_min_count")]
    pub min_count: u64,
}

fn default_true() -> bool {
    true
}

fn default_min_count() -> u64 {
    1
}

impl Default for TokenizerSpec {
    fn default() -> Self {
        TokenizerSpec {
            lowercase: true,
            strip_punctuation: true,
            min_count: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbedSpec {
    #[serde(default = "default_method")]
    pub method: String,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_weighting")]
    pub weighting: String,
    #[serde(default)]
    pub vectors: Option<PathBuf>,
}

fn default_method() -> String {
    "svd".into()
}

fn default_dim() -> usize {
    8
}

fn default_weighting() -> String {
    "log".into()
}

impl Default for EmbedSpec {
    fn default() -> Self {
        EmbedSpec {
            method: default_method(),
            dim: default_dim(),
            weighting: default_weighting(),
            vectors: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathSpec {
    #[serde(default = "default_ngram")]
    pub n: usize,
    #[serde(default = "default_stride")]
    pub stride: usize,
}

fn default_ngram() -> usize {
    2
}

fn default_stride() -> usize {
    1
}

impl Default for PathSpec {
    fn default() -> Self {
        PathSpec { n: 2, stride: 1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeaturesSpec {
    /// ec | cluster | both
    #[serde(default = "default_kind")]
    pub kind: String,
}

fn default_kind() -> String {
    "ec".into()
}

impl Default for FeaturesSpec {
    fn default() -> Self {
        FeaturesSpec {
            kind: default_kind(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterSpec {
    #[serde(default = "default_algo")]
    pub algo: String,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_k_neighbors")]
    pub k_neighbors: usize,
    #[serde(default)]
    pub h: f64,
    #[serde(default = "default_fuzzifier")]
    pub fuzzifier: f64,
    #[serde(default = "default_sample")]
    pub sample: usize,
    #[serde(default = "default_alpha_levels")]
    pub alpha_levels: usize,
}

fn default_algo() -> String {
    "kmeans".into()
}

fn default_k() -> usize {
    16
}

fn default_k_neighbors() -> usize {
    8
}

fn default_fuzzifier() -> f64 {
    2.0
}

fn default_sample() -> usize {
    100_000
}

fn default_alpha_levels() -> usize {
    11
}

impl Default for ClusterSpec {
    fn default() -> Self {
        ClusterSpec {
            algo: default_algo(),
            k: default_k(),
            k_neighbors: default_k_neighbors(),
            h: 0.0,
            fuzzifier: default_fuzzifier(),
            sample: default_sample(),
            alpha_levels: default_alpha_levels(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EcSpec {
    #[serde(default = "default_m_grid")]
    pub m: Vec<usize>,
    #[serde(default = "default_n_grid")]
    pub n: Vec<usize>,
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default = "default_budget")]
    pub budget: f64,
    #[serde(default = "default_delta_frac")]
    pub delta_frac: f64,
    #[serde(default = "default_boundary_samples")]
    pub boundary_samples: usize,
}

fn default_m_grid() -> Vec<usize> {
    vec![1, 2]
}

fn default_n_grid() -> Vec<usize> {
    vec![3, 4, 5, 6]
}

fn default_budget() -> f64 {
    1e7
}

fn default_delta_frac() -> f64 {
    0.05
}

fn default_boundary_samples() -> usize {
    1000
}

impl Default for EcSpec {
    fn default() -> Self {
        EcSpec {
            m: default_m_grid(),
            n: default_n_grid(),
            stride: 1,
            budget: default_budget(),
            delta_frac: default_delta_frac(),
            boundary_samples: default_boundary_samples(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifySpec {
    #[serde(default = "default_lambda_grid")]
    pub lambda_grid: Vec<f64>,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
}

fn default_lambda_grid() -> Vec<f64> {
    vec![1e-4, 1e-3, 1e-2]
}

fn default_folds() -> usize {
    5
}

fn default_epochs() -> usize {
    200
}

impl Default for ClassifySpec {
    fn default() -> Self {
        ClassifySpec {
            lambda_grid: default_lambda_grid(),
            folds: default_folds(),
            epochs: default_epochs(),
        }
    }
}

impl RunConfig {
    /// Everything checked before any stage computes.
    pub fn validate(&self) -> CliResult {
        if self.inputs.is_empty() {
            return Err(CliError::validation("config needs at least one [[inputs]]"));
        }
        for input in &self.inputs {
            if !input.dir.is_dir() {
                return Err(CliError::validation(format!(
                    "input directory does not exist: {}",
                    input.dir.display()
                )));
            }
            Label::parse(&input.label).map_err(|e| CliError::validation(e.to_string()))?;
        }
        if let Some(bot) = &self.bot {
            if !matches!(bot.level.as_str(), "word" | "char") {
                return Err(CliError::validation(format!(
                    "unknown bot level `{}`",
                    bot.level
                )));
            }
        }
        match self.embed.method.as_str() {
            "svd" => {
                if self.embed.dim == 0 {
                    return Err(CliError::validation("embed.dim must be >= 1"));
                }
                if !matches!(self.embed.weighting.as_str(), "log" | "raw") {
                    return Err(CliError::validation(format!(
                        "unknown weighting `{}`",
                        self.embed.weighting
                    )));
                }
            }
            "load" => match &self.embed.vectors {
                Some(v) if v.is_file() => {}
                Some(v) => {
                    return Err(CliError::validation(format!(
                        "embed.vectors not found: {}",
                        v.display()
                    )))
                }
                None => return Err(CliError::validation("embed.method = load needs vectors")),
            },
            other => {
                return Err(CliError::validation(format!(
                    "unknown embed method `{other}`"
                )))
            }
        }
        if self.path.n == 0 || self.path.stride == 0 {
            return Err(CliError::validation("path.n and path.stride must be >= 1"));
        }
        if !matches!(self.features.kind.as_str(), "ec" | "cluster" | "both") {
            return Err(CliError::validation(format!(
                "unknown features kind `{}`",
                self.features.kind
            )));
        }
        if !matches!(
            self.cluster.algo.as_str(),
            "kmeans" | "cmeans" | "wishart" | "wishart-fuzzy"
        ) {
            return Err(CliError::validation(format!(
                "unknown clustering algorithm `{}`",
                self.cluster.algo
            )));
        }
        if self.ec.m.is_empty() || self.ec.n.is_empty() {
            return Err(CliError::validation("ec grids must be non-empty"));
        }
        if self.ec.n.iter().any(|&n| n < 2) {
            return Err(CliError::validation("ec.n entries must be >= 2"));
        }
        if self.classify.folds < 2 {
            return Err(CliError::validation("classify.folds must be >= 2"));
        }
        if self.classify.lambda_grid.iter().any(|&l| l <= 0.0) {
            return Err(CliError::validation("lambda grid must be positive"));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------- report --

#[derive(Debug, Serialize)]
struct StageReport {
    name: String,
    seconds: f64,
    cached: bool,
    outputs: Vec<OutputHash>,
}

#[derive(Debug, Serialize)]
struct OutputHash {
    path: String,
    sha256: String,
}

#[derive(Debug, Default, Serialize)]
struct RunMetrics {
    corpus_docs: usize,
    vocab_size: usize,
    cluster: Option<ClusterMetrics>,
    ec: Option<EcMetrics>,
}

#[derive(Debug, Serialize)]
struct ClusterMetrics {
    algo: String,
    mean_noise_ratio: f64,
    wilcoxon_rmsstd_p: Option<f64>,
    cv: Option<CvSummary>,
}

#[derive(Debug, Serialize)]
struct EcMetrics {
    cells: Vec<CellMetric>,
    best_m: Option<usize>,
    best_n: Option<usize>,
    best_cv: Option<CvSummary>,
}

#[derive(Debug, Serialize)]
struct CellMetric {
    m: usize,
    n: usize,
    mean_h: f64,
    mean_c: f64,
    chaotic_fraction: f64,
    cv_accuracy: Option<f64>,
    skipped: Option<String>,
}

#[derive(Debug, Serialize)]
struct RunReport {
    config_hash: String,
    seed: u64,
    stages: Vec<StageReport>,
    metrics: RunMetrics,
}

fn sha256_file(path: &Path) -> CliResult<String> {
    let bytes = fs::read(path).map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))?;
    Ok(hex_digest(&bytes))
}

fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Runs one stage unless the cache key matches and every output exists.
struct Stager {
    out_dir: PathBuf,
    stages: Vec<StageReport>,
}

impl Stager {
    fn new(out_dir: &Path) -> CliResult<Stager> {
        fs::create_dir_all(out_dir.join("cache"))
            .map_err(|e| CliError::runtime(format!("{}: {e}", out_dir.display())))?;
        Ok(Stager {
            out_dir: out_dir.to_path_buf(),
            stages: Vec::new(),
        })
    }

    fn stage<K: Serialize>(
        &mut self,
        name: &str,
        key_material: &K,
        outputs: &[PathBuf],
        run: impl FnOnce() -> CliResult,
    ) -> CliResult<bool> {
        let key = hex_digest(&serde_json::to_vec(key_material).map_err(CliError::runtime)?);
        let key_path = self.out_dir.join("cache").join(format!("{name}.key"));
        let cached = fs::read_to_string(&key_path)
            .map(|k| k == key)
            .unwrap_or(false)
            && outputs.iter().all(|p| p.exists());

        let start = Instant::now();
        if !cached {
            run().map_err(|e| match e {
                CliError::Validation(m) => CliError::Validation(format!("stage {name}: {m}")),
                CliError::Runtime(m) => CliError::Runtime(format!("stage {name}: {m}")),
            })?;
            fs::write(&key_path, &key).map_err(CliError::runtime)?;
        }
        let mut hashes = Vec::with_capacity(outputs.len());
        for path in outputs {
            hashes.push(OutputHash {
                path: path
                    .strip_prefix(&self.out_dir)
                    .unwrap_or(path)
                    .to_string_lossy()
                    .into_owned(),
                sha256: sha256_file(path)?,
            });
        }
        self.stages.push(StageReport {
            name: name.to_string(),
            seconds: start.elapsed().as_secs_f64(),
            cached,
            outputs: hashes,
        });
        Ok(cached)
    }
}

// -------------------------------------------------------------- pipeline --

pub fn run(args: RunArgs) -> CliResult {
    super::require_file(&args.config, "--config")?;
    let text = fs::read_to_string(&args.config)
        .map_err(|e| CliError::validation(format!("{}: {e}", args.config.display())))?;
    let mut config: RunConfig = toml::from_str(&text)
        .map_err(|e| CliError::validation(format!("{}: {e}", args.config.display())))?;
    if let Some(out) = args.out_dir {
        config.out_dir = out;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    config.validate()?;

    let out = config.out_dir.clone();
    fs::create_dir_all(&out).map_err(CliError::runtime)?;
    let config_hash = hex_digest(&serde_json::to_vec(&config).map_err(CliError::runtime)?);
    let mut stager = Stager::new(&out)?;
    let mut metrics = RunMetrics::default();

    // stage: ingest (+ optional bot generation into the same corpus)
    let corpus_path = out.join("corpus.json");
    let input_hashes = input_dir_hashes(&config)?;
    stager.stage(
        "ingest",
        &("ingest", &config.tokenizer, &config.inputs, &config.bot, config.seed, &input_hashes),
        &[corpus_path.clone()],
        || build_corpus(&config, &corpus_path),
    )?;
    let corpus = Corpus::load(&corpus_path).map_err(CliError::runtime)?;
    metrics.corpus_docs = corpus.num_docs();
    metrics.vocab_size = corpus.vocab.len();

    // stage: embed
    let vectors_path = out.join("emb.vec");
    let corpus_hash = sha256_file(&corpus_path)?;
    stager.stage(
        "embed",
        &("embed", &config.embed, config.seed, &corpus_hash),
        &[vectors_path.clone()],
        || {
            match config.embed.method.as_str() {
                "svd" => {
                    let weighting = super::data::parse_weighting(&config.embed.weighting)?;
                    let counts = weighted_counts(&corpus, weighting);
                    let (table, _) =
                        svd_embed(&counts, config.embed.dim, config.seed).map_err(CliError::runtime)?;
                    save_embeddings(&vectors_path, &table, &corpus.vocab).map_err(CliError::runtime)
                }
                _ => {
                    let src = config.embed.vectors.as_ref().unwrap();
                    let (table, _) =
                        load_embeddings(src, &corpus.vocab).map_err(CliError::runtime)?;
                    save_embeddings(&vectors_path, &table, &corpus.vocab).map_err(CliError::runtime)
                }
            }
        },
    )?;
    let (table, _) = load_embeddings(&vectors_path, &corpus.vocab).map_err(CliError::runtime)?;

    // stage: paths
    let paths_dir = out.join("paths");
    let vectors_hash = sha256_file(&vectors_path)?;
    stager.stage(
        "path",
        &("path", &config.path, &corpus_hash, &vectors_hash),
        &[paths_dir.join("paths.bin"), paths_dir.join("paths.json")],
        || {
            let paths: Vec<SemanticPath> = corpus
                .docs
                .iter()
                .map(|d| build_path(d, &table, config.path.n, config.path.stride))
                .collect::<Result<_, _>>()
                .map_err(CliError::runtime)?;
            save_paths(&paths_dir, &paths).map_err(CliError::runtime)
        },
    )?;
    let paths = spotbot_core::embed::load_paths(&paths_dir).map_err(CliError::runtime)?;
    let paths_hash = sha256_file(&paths_dir.join("paths.bin"))?;

    let do_cluster = matches!(config.features.kind.as_str(), "cluster" | "both");
    let do_ec = matches!(config.features.kind.as_str(), "ec" | "both");

    if do_cluster {
        metrics.cluster = Some(cluster_branch(
            &config, &out, &mut stager, &corpus, &table, &paths, &paths_hash,
        )?);
    }
    if do_ec {
        metrics.ec = Some(ec_branch(&config, &out, &mut stager, &paths, &paths_hash)?);
    }

    emit_plot_data(&config, &out, &mut stager, &metrics, &paths_hash)?;

    let report = RunReport {
        config_hash,
        seed: config.seed,
        stages: stager.stages,
        metrics,
    };
    let report_path = out.join("report.json");
    let json = serde_json::to_vec_pretty(&report).map_err(CliError::runtime)?;
    fs::write(&report_path, json).map_err(CliError::runtime)?;
    println!("pipeline complete -> {}", report_path.display());
    Ok(())
}

fn input_dir_hashes(config: &RunConfig) -> CliResult<Vec<String>> {
    let mut hashes = Vec::new();
    for input in &config.inputs {
        let mut files: Vec<PathBuf> = fs::read_dir(&input.dir)
            .map_err(|e| CliError::validation(format!("{}: {e}", input.dir.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().map_or(false, |x| x == "txt"))
            .collect();
        files.sort();
        for f in files {
            hashes.push(sha256_file(&f)?);
        }
    }
    Ok(hashes)
}

fn build_corpus(config: &RunConfig, corpus_path: &Path) -> CliResult {
    let rules = TokenizerRules {
        lowercase: config.tokenizer.lowercase,
        strip_punctuation: config.tokenizer.strip_punctuation,
    };
    let mut builder = CorpusBuilder::new(rules.clone(), config.tokenizer.min_count);
    for input in &config.inputs {
        let label = Label::parse(&input.label).map_err(CliError::runtime)?;
        ingest_dir(&mut builder, &input.dir, label, input.pretokenized).map_err(CliError::runtime)?;
    }
    let ingested = builder.build().map_err(CliError::runtime)?;

    let corpus = if let Some(bot) = &config.bot {
        // train the bot on human-labeled documents and rebuild the corpus
        // jointly so both sides share one vocabulary
        let human: Vec<_> = ingested
            .docs
            .iter()
            .filter(|d| d.label == Label::Human)
            .collect();
        if human.is_empty() {
            return Err(CliError::validation(
                "bot generation needs human-labeled inputs",
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0xb07);
        let mut joint = CorpusBuilder::new(rules, config.tokenizer.min_count);
        for d in &ingested.docs {
            let text: Vec<&str> = d.tokens.iter().map(|&t| ingested.vocab.token(t)).collect();
            joint.add_pretokenized(d.id.clone(), d.label, &text.join(" "));
        }
        match bot.level.as_str() {
            "word" => {
                let streams: Vec<&[u32]> = human.iter().map(|d| d.tokens.as_slice()).collect();
                let model = MarkovModel::train(&streams, bot.order).map_err(CliError::runtime)?;
                for d in &human {
                    let tokens = model.generate(d.tokens.len(), &mut rng);
                    let text: Vec<&str> =
                        tokens.iter().map(|&t| ingested.vocab.token(t)).collect();
                    joint.add_pretokenized(
                        format!("bot_{}", d.id),
                        Label::BotSimple,
                        &text.join(" "),
                    );
                }
            }
            _ => {
                let texts: Vec<String> = human
                    .iter()
                    .map(|d| {
                        d.tokens
                            .iter()
                            .map(|&t| ingested.vocab.token(t))
                            .collect::<Vec<_>>()
                            .join(" ")
                    })
                    .collect();
                let refs: Vec<&str> = texts.iter().map(|s| s.as_str()).collect();
                let model = CharMarkov::train(&refs, bot.order).map_err(CliError::runtime)?;
                for d in &human {
                    let raw = model.generate(d.tokens.len() * 8, &mut rng);
                    let tokens: Vec<&str> =
                        raw.split_whitespace().take(d.tokens.len()).collect();
                    joint.add_pretokenized(
                        format!("bot_{}", d.id),
                        Label::BotSimple,
                        &tokens.join(" "),
                    );
                }
            }
        }
        joint.build().map_err(CliError::runtime)?
    } else {
        ingested
    };

    corpus.save(corpus_path).map_err(CliError::runtime)
}

fn cluster_branch(
    config: &RunConfig,
    out: &Path,
    stager: &mut Stager,
    corpus: &Corpus,
    table: &spotbot_core::embed::EmbeddingTable,
    paths: &[SemanticPath],
    paths_hash: &str,
) -> CliResult<ClusterMetrics> {
    let spec = &config.cluster;
    let labels_path = out.join("labels.json");
    stager.stage(
        "cluster",
        &("cluster", spec, config.seed, paths_hash),
        &[labels_path.clone()],
        || {
            let mut texts = Vec::with_capacity(paths.len());
            for p in paths {
                let cap = p.points.nrows().min(spec.sample);
                let points = p.points.slice(ndarray::s![..cap, ..]);
                let n = points.nrows();
                let clustering = match spec.algo.as_str() {
                    "kmeans" => kmeans(points, spec.k.min(n), config.seed, 1e-6, 300),
                    "cmeans" => cmeans(points, spec.k.min(n), spec.fuzzifier, config.seed, 1e-6, 300),
                    "wishart" => {
                        let dist = pairwise_distances(points);
                        wishart(
                            dist.view(),
                            spec.k_neighbors.min(n.saturating_sub(1)).max(1),
                            spec.h,
                            points.ncols(),
                        )
                    }
                    _ => (|| {
                        let doc = corpus
                            .doc_by_id(&p.doc_id)
                            .expect("path doc in corpus");
                        let stream =
                            extract_ngrams(doc, config.path.n, config.path.stride)?;
                        let freqs = normalized_frequencies(doc)?;
                        let mu = membership_weights(&freqs);
                        let params = FuzzyParams::scaled_to_table(table, 0.1);
                        let mut data = fuzzify_stream(&stream, table, &mu, &params)?;
                        data.truncate(spec.sample);
                        wishart_fuzzy(
                            &data,
                            spec.k_neighbors.min(data.len().saturating_sub(1)).max(1),
                            spec.h,
                            spec.alpha_levels,
                        )
                    })(),
                }
                .map_err(|e| CliError::runtime(format!("doc {}: {e}", p.doc_id)))?;
                texts.push(TextLabels {
                    doc_id: p.doc_id.clone(),
                    label: p.label,
                    k_found: clustering.k_found,
                    noise_ratio: clustering.noise_ratio(),
                    labels: clustering.labels,
                });
            }
            LabelsFile {
                algo: spec.algo.clone(),
                params: format!(
                    "k={};k_neighbors={};h={};fuzzifier={};seed={}",
                    spec.k, spec.k_neighbors, spec.h, spec.fuzzifier, config.seed
                ),
                texts,
            }
            .save(&labels_path)
        },
    )?;
    let labels = LabelsFile::load(&labels_path)?;

    // stats.csv
    let stats_path = out.join("stats.csv");
    let labels_hash = sha256_file(&labels_path)?;
    stager.stage(
        "stats",
        &("stats", &labels_hash, paths_hash),
        &[stats_path.clone()],
        || {
            let mut rows = Vec::new();
            for t in &labels.texts {
                let p = paths.iter().find(|p| p.doc_id == t.doc_id).unwrap();
                let points = p.points.slice(ndarray::s![..t.labels.len(), ..]);
                let s = cluster_stats(points, &t.labels);
                rows.push(vec![
                    t.doc_id.clone(),
                    labels.algo.clone(),
                    labels.params.clone(),
                    fmt_f64(s.rmsstd),
                    fmt_f64(s.rs),
                    fmt_f64(s.noise_ratio),
                    fmt_f64(s.inter_avg),
                    fmt_f64(s.inter_min),
                    fmt_f64(s.inter_max),
                ]);
            }
            write_csv(
                &stats_path,
                "doc_id,algo,params,rmsstd,rs,noise_ratio,inter_avg,inter_min,inter_max",
                &rows,
            )
        },
    )?;

    // features + model
    let features_path = out.join("features_cluster.csv");
    let stats_hash = sha256_file(&stats_path)?;
    stager.stage(
        "features-cluster",
        &("features-cluster", &stats_hash),
        &[features_path.clone()],
        || {
            let table = super::CsvTable::read(&stats_path)?;
            let id = table.column_index("doc_id")?;
            let avg = table.column_index("inter_avg")?;
            let min = table.column_index("inter_min")?;
            let max = table.column_index("inter_max")?;
            let mut rows = Vec::new();
            for r in &table.rows {
                let label = corpus
                    .doc_by_id(&r[id])
                    .map(|d| d.label.as_str().to_string())
                    .unwrap_or_else(|| "unlabeled".into());
                rows.push(vec![
                    r[id].clone(),
                    label,
                    r[avg].clone(),
                    r[min].clone(),
                    r[max].clone(),
                ]);
            }
            write_csv(&features_path, "doc_id,label,inter_avg,inter_min,inter_max", &rows)
        },
    )?;

    // wilcoxon between human and bot rmsstd, when both sides exist
    let stats_table = super::CsvTable::read(&stats_path)?;
    let id_idx = stats_table.column_index("doc_id")?;
    let rmsstd_col = stats_table.f64_column("rmsstd")?;
    let mut human_rmsstd = Vec::new();
    let mut bot_rmsstd = Vec::new();
    for (row, &v) in stats_table.rows.iter().zip(&rmsstd_col) {
        if !v.is_finite() {
            continue;
        }
        match corpus.doc_by_id(&row[id_idx]).map(|d| d.label) {
            Some(Label::Human) => human_rmsstd.push(v),
            Some(Label::BotSimple) | Some(Label::BotAdvanced) => bot_rmsstd.push(v),
            _ => {}
        }
    }
    let wilcoxon_p = if !human_rmsstd.is_empty() && !bot_rmsstd.is_empty() {
        Some(
            wilcoxon_ranksum(&human_rmsstd, &bot_rmsstd, PValueMode::Normal)
                .map_err(CliError::runtime)?
                .1,
        )
    } else {
        None
    };

    // train when both classes are present
    let (_, rows) = read_feature_rows(&features_path).unwrap_or((Vec::new(), Vec::new()));
    let has_both = rows.iter().any(|r| r.label == 1) && rows.iter().any(|r| r.label == -1);
    let cv = if has_both {
        let model_path = out.join("model_cluster.json");
        let report = cross_validate(
            &rows,
            config.classify.folds,
            &config.classify.lambda_grid,
            config.classify.epochs,
            config.seed,
        )
        .map_err(CliError::runtime)?;
        let summary = CvSummary::from_report(&report);
        let file = ModelFile {
            feature_schema: vec!["inter_avg".into(), "inter_min".into(), "inter_max".into()],
            cv: CvSummary::from_report(&report),
            model: report.final_model,
        };
        let json = serde_json::to_vec_pretty(&file).map_err(CliError::runtime)?;
        fs::write(&model_path, json).map_err(CliError::runtime)?;
        Some(summary)
    } else {
        None
    };

    let mean_noise =
        labels.texts.iter().map(|t| t.noise_ratio).sum::<f64>() / labels.texts.len().max(1) as f64;
    Ok(ClusterMetrics {
        algo: spec.algo.clone(),
        mean_noise_ratio: mean_noise,
        wilcoxon_rmsstd_p: wilcoxon_p,
        cv,
    })
}

fn ec_branch(
    config: &RunConfig,
    out: &Path,
    stager: &mut Stager,
    paths: &[SemanticPath],
    paths_hash: &str,
) -> CliResult<EcMetrics> {
    let spec = &config.ec;
    let ec_path = out.join("ec.csv");
    let sweep_path = out.join("sweep.csv");
    stager.stage(
        "ecplane",
        &("ecplane", spec, paths_hash),
        &[ec_path.clone(), sweep_path.clone()],
        || {
            let args = crate::EcplaneArgs {
                paths: out.join("paths"),
                m: spec
                    .m
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
                n: spec
                    .n
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
                stride: spec.stride,
                budget: spec.budget,
                delta_frac: spec.delta_frac,
                boundary_samples: spec.boundary_samples,
                out: ec_path.clone(),
                sweep_out: Some(sweep_path.clone()),
            };
            super::ec::ecplane(args)
        },
    )?;

    // per-cell classification on [H, C]
    let ec_table = super::CsvTable::read(&ec_path)?;
    let id_idx = ec_table.column_index("doc_id")?;
    let m_idx = ec_table.column_index("m")?;
    let n_idx = ec_table.column_index("n")?;
    let h_idx = ec_table.column_index("H")?;
    let c_idx = ec_table.column_index("C")?;
    let label_of: BTreeMap<&str, Label> =
        paths.iter().map(|p| (p.doc_id.as_str(), p.label)).collect();

    let sweep_table = super::CsvTable::read(&sweep_path)?;
    let sm = sweep_table.column_index("m")?;
    let sn = sweep_table.column_index("n")?;
    let smh = sweep_table.column_index("mean_H")?;
    let smc = sweep_table.column_index("mean_C")?;
    let scf = sweep_table.column_index("chaotic_fraction")?;
    let ssk = sweep_table.column_index("skipped")?;

    let mut cells = Vec::new();
    let mut best: Option<(f64, usize, usize, CvSummary)> = None;
    for row in &sweep_table.rows {
        let m: usize = row[sm].parse().unwrap_or(0);
        let n: usize = row[sn].parse().unwrap_or(0);
        let skipped = if row[ssk].is_empty() {
            None
        } else {
            Some(row[ssk].clone())
        };
        let mut cv_accuracy = None;
        if skipped.is_none() {
            let mut rows = Vec::new();
            for r in &ec_table.rows {
                if r[m_idx] != row[sm] || r[n_idx] != row[sn] {
                    continue;
                }
                let Some(label) = label_of.get(r[id_idx].as_str()) else {
                    continue;
                };
                let Some(class) = label.to_class() else {
                    continue;
                };
                let h: f64 = r[h_idx].parse().unwrap_or(f64::NAN);
                let c: f64 = r[c_idx].parse().unwrap_or(f64::NAN);
                if h.is_finite() && c.is_finite() {
                    rows.push(spotbot_core::classify::FeatureRow {
                        doc_id: r[id_idx].clone(),
                        features: vec![h, c],
                        label: class,
                    });
                }
            }
            let has_both = rows.iter().any(|r| r.label == 1) && rows.iter().any(|r| r.label == -1);
            if has_both {
                let report = cross_validate(
                    &rows,
                    config.classify.folds,
                    &config.classify.lambda_grid,
                    config.classify.epochs,
                    config.seed,
                )
                .map_err(CliError::runtime)?;
                cv_accuracy = Some(report.mean_accuracy);
                let better = best
                    .as_ref()
                    .map(|(acc, _, _, _)| report.mean_accuracy > *acc)
                    .unwrap_or(true);
                if better {
                    let summary = CvSummary::from_report(&report);
                    best = Some((report.mean_accuracy, m, n, CvSummary::from_report(&report)));
                    // persist the best cell's features and model
                    let mut feature_rows = Vec::new();
                    for r in &rows {
                        feature_rows.push(vec![
                            r.doc_id.clone(),
                            if r.label == 1 { "human" } else { "bot-simple" }.to_string(),
                            fmt_f64(r.features[0]),
                            fmt_f64(r.features[1]),
                        ]);
                    }
                    write_csv(
                        &out.join("features_ec.csv"),
                        "doc_id,label,h,c",
                        &feature_rows,
                    )?;
                    let file = ModelFile {
                        feature_schema: vec!["h".into(), "c".into()],
                        model: report.final_model,
                        cv: summary,
                    };
                    let json = serde_json::to_vec_pretty(&file).map_err(CliError::runtime)?;
                    fs::write(out.join("model_ec.json"), json).map_err(CliError::runtime)?;
                }
            }
        }
        cells.push(CellMetric {
            m,
            n,
            mean_h: row[smh].parse().unwrap_or(f64::NAN),
            mean_c: row[smc].parse().unwrap_or(f64::NAN),
            chaotic_fraction: row[scf].parse().unwrap_or(f64::NAN),
            cv_accuracy,
            skipped,
        });
    }

    Ok(EcMetrics {
        best_m: best.as_ref().map(|b| b.1),
        best_n: best.as_ref().map(|b| b.2),
        best_cv: best.map(|b| b.3),
        cells,
    })
}

/// Plot-ready CSV emissions: ec scatter, boundary curves, per-label noise
/// ratios, and the (m, n) mean-complexity heatmap.
fn emit_plot_data(
    config: &RunConfig,
    out: &Path,
    stager: &mut Stager,
    metrics: &RunMetrics,
    paths_hash: &str,
) -> CliResult {
    let plots = out.join("plots");
    fs::create_dir_all(&plots).map_err(CliError::runtime)?;

    if let Some(ec) = &metrics.ec {
        // scatter for the best cell (fall back to the first unskipped cell)
        let (m, n) = match (ec.best_m, ec.best_n) {
            (Some(m), Some(n)) => (m, n),
            _ => match ec.cells.iter().find(|c| c.skipped.is_none()) {
                Some(c) => (c.m, c.n),
                None => return Ok(()),
            },
        };
        let ec_table = super::CsvTable::read(&out.join("ec.csv"))?;
        let id = ec_table.column_index("doc_id")?;
        let mi = ec_table.column_index("m")?;
        let ni = ec_table.column_index("n")?;
        let hi = ec_table.column_index("H")?;
        let ci = ec_table.column_index("C")?;
        let scatter_path = plots.join("ec_scatter.csv");
        let boundaries_path = plots.join("boundaries.csv");
        let heatmap_path = plots.join("sweep_heatmap.csv");
        stager.stage(
            "plot-data-ec",
            &("plot-data-ec", m, n, paths_hash, &config.ec),
            &[
                scatter_path.clone(),
                boundaries_path.clone(),
                heatmap_path.clone(),
            ],
            || {
                let mut rows = Vec::new();
                for r in &ec_table.rows {
                    if r[mi] == m.to_string() && r[ni] == n.to_string() {
                        rows.push(vec![
                            r[id].clone(),
                            r[hi].clone(),
                            r[ci].clone(),
                        ]);
                    }
                }
                write_csv(&scatter_path, "doc_id,h,c", &rows)?;

                let args = crate::BoundariesArgs {
                    n,
                    m,
                    samples: config.ec.boundary_samples,
                    grid: 1000,
                    out: boundaries_path.clone(),
                };
                super::ec::boundaries(args)?;

                let sweep_table = super::CsvTable::read(&out.join("sweep.csv"))?;
                let sm = sweep_table.column_index("m")?;
                let sn = sweep_table.column_index("n")?;
                let sc = sweep_table.column_index("mean_C")?;
                let mut heat = Vec::new();
                for r in &sweep_table.rows {
                    heat.push(vec![r[sm].clone(), r[sn].clone(), r[sc].clone()]);
                }
                write_csv(&heatmap_path, "m,n,mean_C", &heat)
            },
        )?;
    }

    if metrics.cluster.is_some() {
        let labels = LabelsFile::load(&out.join("labels.json"))?;
        let noise_path = plots.join("noise_ratio.csv");
        let labels_hash = sha256_file(&out.join("labels.json"))?;
        stager.stage(
            "plot-data-noise",
            &("plot-data-noise", &labels_hash),
            &[noise_path.clone()],
            || {
                let mut groups: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
                for t in &labels.texts {
                    let entry = groups.entry(t.label.as_str()).or_insert((0.0, 0));
                    entry.0 += t.noise_ratio;
                    entry.1 += 1;
                }
                let rows: Vec<Vec<String>> = groups
                    .into_iter()
                    .map(|(label, (sum, count))| {
                        vec![label.to_string(), fmt_f64(sum / count as f64)]
                    })
                    .collect();
                write_csv(&noise_path, "corpus,noise_ratio", &rows)
            },
        )?;
    }
    Ok(())
}
