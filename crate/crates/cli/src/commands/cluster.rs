//! cluster, stats and wilcoxon subcommands.

use ndarray::ArrayView2;
use spotbot_core::cluster::{cmeans, kmeans, pairwise_distances, wishart, wishart_fuzzy, Clustering};
use spotbot_core::corpus::{extract_ngrams, normalized_frequencies, Corpus};
use spotbot_core::embed::{load_embeddings, load_paths, SemanticPath};
use spotbot_core::fuzzy::{fuzzify_stream, membership_weights, FuzzyParams};
use spotbot_core::metrics::{cluster_stats, wilcoxon_ranksum, wilcoxon_signed_rank, PValueMode};

use super::{fmt_f64, require_dir, require_file, CliError, CliResult, CsvTable, LabelsFile, TextLabels};
use crate::{ClusterArgs, StatsArgs, WilcoxonArgs};

fn sampled(points: ArrayView2<f64>, cap: usize) -> ArrayView2<f64> {
    let n = points.nrows().min(cap);
    points.slice_move(ndarray::s![..n, ..])
}

pub fn cluster(args: ClusterArgs) -> CliResult {
    require_dir(&args.paths, "--paths")?;
    if args.sample == 0 {
        return Err(CliError::validation("--sample must be >= 1"));
    }
    let algo = args.algo.as_str();
    if !matches!(algo, "kmeans" | "cmeans" | "wishart" | "wishart-fuzzy") {
        return Err(CliError::validation(format!(
            "unknown algorithm `{algo}` (expected kmeans|cmeans|wishart|wishart-fuzzy)"
        )));
    }
    if algo == "wishart-fuzzy" && (args.corpus.is_none() || args.vectors.is_none()) {
        return Err(CliError::validation(
            "wishart-fuzzy needs --corpus and --vectors for the fuzzification",
        ));
    }
    let paths = load_paths(&args.paths).map_err(CliError::runtime)?;
    if paths.is_empty() {
        return Err(CliError::validation("no paths found"));
    }

    // wishart-fuzzy reconstructs per-word fuzzy vectors from the corpus
    let fuzzy_setup = if algo == "wishart-fuzzy" {
        let corpus_path = args.corpus.as_ref().unwrap();
        let vectors_path = args.vectors.as_ref().unwrap();
        require_file(corpus_path, "--corpus")?;
        require_file(vectors_path, "--vectors")?;
        let corpus = Corpus::load(corpus_path).map_err(CliError::runtime)?;
        let (table, _) = load_embeddings(vectors_path, &corpus.vocab).map_err(CliError::runtime)?;
        let params = match (args.delta_c, args.l, args.r) {
            (Some(dc), Some(l), Some(r)) => {
                FuzzyParams::uniform(dc, l, r, table.dim).map_err(CliError::runtime)?
            }
            (None, None, None) => FuzzyParams::scaled_to_table(&table, 0.1),
            _ => {
                return Err(CliError::validation(
                    "--delta-c, --l and --r must be given together (or all omitted)",
                ))
            }
        };
        Some((corpus, table, params))
    } else {
        None
    };

    let params_str = match algo {
        "kmeans" => format!("k={};seed={}", args.k, args.seed),
        "cmeans" => format!("k={};fuzzifier={};seed={}", args.k, args.fuzzifier, args.seed),
        "wishart" => format!("k_neighbors={};h={}", args.k_neighbors, args.h),
        _ => format!(
            "k_neighbors={};h={};alpha_levels={}",
            args.k_neighbors, args.h, args.alpha_levels
        ),
    };

    let mut texts = Vec::with_capacity(paths.len());
    for p in &paths {
        let points = sampled(p.points.view(), args.sample);
        let clustering = run_algo(&args, algo, p, points, &fuzzy_setup)?;
        texts.push(TextLabels {
            doc_id: p.doc_id.clone(),
            label: p.label,
            k_found: clustering.k_found,
            noise_ratio: clustering.noise_ratio(),
            labels: clustering.labels,
        });
    }

    let file = LabelsFile {
        algo: algo.to_string(),
        params: params_str,
        texts,
    };
    file.save(&args.out)?;
    let mean_noise: f64 =
        file.texts.iter().map(|t| t.noise_ratio).sum::<f64>() / file.texts.len() as f64;
    println!(
        "clustered {} texts with {} -> {} (mean noise ratio {:.3})",
        file.texts.len(),
        algo,
        args.out.display(),
        mean_noise
    );
    Ok(())
}

fn run_algo(
    args: &ClusterArgs,
    algo: &str,
    path: &SemanticPath,
    points: ArrayView2<f64>,
    fuzzy_setup: &Option<(Corpus, spotbot_core::embed::EmbeddingTable, FuzzyParams)>,
) -> CliResult<Clustering> {
    let n = points.nrows();
    let run = || -> spotbot_core::Result<Clustering> {
        match algo {
            "kmeans" => kmeans(points, args.k.min(n), args.seed, 1e-6, 300),
            "cmeans" => cmeans(points, args.k.min(n), args.fuzzifier, args.seed, 1e-6, 300),
            "wishart" => {
                let dist = pairwise_distances(points);
                wishart(dist.view(), args.k_neighbors.min(n.saturating_sub(1)).max(1), args.h, points.ncols())
            }
            _ => {
                let (corpus, table, params) = fuzzy_setup.as_ref().unwrap();
                let doc = corpus
                    .doc_by_id(&path.doc_id)
                    .ok_or_else(|| spotbot_core::Error::InvalidInput(format!(
                        "doc {} not in corpus",
                        path.doc_id
                    )))?;
                let stream = extract_ngrams(doc, path.n, 1)?;
                let freqs = normalized_frequencies(doc)?;
                let mu = membership_weights(&freqs);
                let mut data = fuzzify_stream(&stream, table, &mu, params)?;
                data.truncate(args.sample);
                wishart_fuzzy(
                    &data,
                    args.k_neighbors.min(data.len().saturating_sub(1)).max(1),
                    args.h,
                    args.alpha_levels,
                )
            }
        }
    };
    run().map_err(|e| CliError::runtime(format!("{} on doc {}: {e}", algo, path.doc_id)))
}

pub fn stats(args: StatsArgs) -> CliResult {
    require_file(&args.labels, "--labels")?;
    require_dir(&args.paths, "--paths")?;
    let labels = LabelsFile::load(&args.labels)?;
    let paths = load_paths(&args.paths).map_err(CliError::runtime)?;

    let mut rows = Vec::with_capacity(labels.texts.len());
    for text in &labels.texts {
        let path = paths
            .iter()
            .find(|p| p.doc_id == text.doc_id)
            .ok_or_else(|| {
                CliError::validation(format!("doc {} missing from paths", text.doc_id))
            })?;
        let points = path.points.slice(ndarray::s![..text.labels.len(), ..]);
        let s = cluster_stats(points, &text.labels);
        rows.push(vec![
            text.doc_id.clone(),
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
    super::write_csv(
        &args.out,
        "doc_id,algo,params,rmsstd,rs,noise_ratio,inter_avg,inter_min,inter_max",
        &rows,
    )?;
    println!("wrote {} stat rows -> {}", rows.len(), args.out.display());
    Ok(())
}

pub fn wilcoxon(args: WilcoxonArgs) -> CliResult {
    require_file(&args.a, "--a")?;
    require_file(&args.b, "--b")?;
    let table_a = CsvTable::read(&args.a)?;
    let table_b = CsvTable::read(&args.b)?;
    let col_a = table_a.f64_column(&args.column)?;
    let col_b = table_b.f64_column(&args.column)?;
    // degenerate clusterings produce NaN statistics; they carry no rank
    let a: Vec<f64> = col_a.into_iter().filter(|v| v.is_finite()).collect();
    let b: Vec<f64> = col_b.into_iter().filter(|v| v.is_finite()).collect();

    if args.signed_rank {
        let (w, p) = wilcoxon_signed_rank(&a, &b).map_err(CliError::runtime)?;
        println!(
            "signed-rank column={} n={} W={} p_two_sided={}",
            args.column,
            a.len(),
            fmt_f64(w),
            fmt_f64(p)
        );
        return Ok(());
    }

    let mode = match args.mode.as_str() {
        "exact" => PValueMode::Exact,
        "normal" => PValueMode::Normal,
        other => {
            return Err(CliError::validation(format!(
                "unknown mode `{other}` (expected exact|normal)"
            )))
        }
    };
    let (u, p) = wilcoxon_ranksum(&a, &b, mode).map_err(CliError::runtime)?;
    println!(
        "rank-sum column={} n_a={} n_b={} U={} p_two_sided={}",
        args.column,
        a.len(),
        b.len(),
        fmt_f64(u),
        fmt_f64(p)
    );
    Ok(())
}
