//! ingest, embed, path and gen-markov subcommands.

use std::fs;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spotbot_core::corpus::{ingest_dir, ingest_manifest, Corpus, CorpusBuilder, Label, TokenizerRules};
use spotbot_core::embed::{
    build_path, load_embeddings, save_embeddings, save_paths, svd_embed, weighted_counts, Weighting,
};
use spotbot_core::markov::{CharMarkov, MarkovModel};

use super::{require_dir, require_file, CliError, CliResult};
use crate::{EmbedArgs, GenMarkovArgs, IngestArgs, PathArgs};

pub fn parse_weighting(s: &str) -> CliResult<Weighting> {
    match s {
        "log" => Ok(Weighting::LogCount),
        "raw" => Ok(Weighting::Raw),
        other => Err(CliError::validation(format!(
            "unknown weighting `{other}` (expected log|raw)"
        ))),
    }
}

pub fn ingest(args: IngestArgs) -> CliResult {
    if args.input.is_empty() && args.manifest.is_none() {
        return Err(CliError::validation("need --input and/or --manifest"));
    }
    for dir in &args.input {
        require_dir(dir, "--input")?;
    }
    if let Some(m) = &args.manifest {
        require_file(m, "--manifest")?;
    }
    // one label for every directory, or one label per directory
    let labels: Vec<Label> = match args.label.len() {
        0 => vec![Label::Unlabeled; args.input.len()],
        1 => {
            let l = Label::parse(&args.label[0]).map_err(|e| CliError::validation(e.to_string()))?;
            vec![l; args.input.len()]
        }
        n if n == args.input.len() => args
            .label
            .iter()
            .map(|s| Label::parse(s).map_err(|e| CliError::validation(e.to_string())))
            .collect::<CliResult<_>>()?,
        _ => {
            return Err(CliError::validation(
                "--label count must be 1 or match the --input count",
            ))
        }
    };
    let rules = TokenizerRules {
        lowercase: !args.no_lowercase,
        strip_punctuation: !args.keep_punctuation,
    };
    let mut builder = CorpusBuilder::new(rules, args.min_count);
    let mut total = 0usize;
    for (dir, &label) in args.input.iter().zip(&labels) {
        total += ingest_dir(&mut builder, dir, label, args.pretokenized).map_err(CliError::runtime)?;
    }
    if let Some(manifest) = &args.manifest {
        total += ingest_manifest(&mut builder, manifest, args.pretokenized).map_err(CliError::runtime)?;
    }
    let corpus = builder.build().map_err(CliError::runtime)?;
    corpus.save(&args.out).map_err(CliError::runtime)?;
    println!(
        "ingested {total} documents, vocabulary {} tokens -> {}",
        corpus.vocab.len(),
        args.out.display()
    );
    Ok(())
}

pub fn embed(args: EmbedArgs) -> CliResult {
    require_file(&args.corpus, "--corpus")?;
    let corpus = Corpus::load(&args.corpus).map_err(CliError::runtime)?;
    match args.method.as_str() {
        "svd" => {
            if args.dim == 0 {
                return Err(CliError::validation("--dim must be >= 1"));
            }
            let weighting = parse_weighting(&args.weighting)?;
            let counts = weighted_counts(&corpus, weighting);
            let (table, svals) = svd_embed(&counts, args.dim, args.seed).map_err(CliError::runtime)?;
            if table.rank_deficient {
                eprintln!(
                    "warning: requested rank {} exceeds the matrix rank; returning {} components",
                    args.dim, table.dim
                );
            }
            save_embeddings(&args.out, &table, &corpus.vocab).map_err(CliError::runtime)?;
            let shown: Vec<String> = svals.iter().take(8).map(|s| format!("{s:.4}")).collect();
            println!(
                "svd embeddings dim {} -> {} (leading singular values: {})",
                table.dim,
                args.out.display(),
                shown.join(", ")
            );
        }
        "load" => {
            let vectors = args
                .vectors
                .as_ref()
                .ok_or_else(|| CliError::validation("--method load requires --vectors"))?;
            require_file(vectors, "--vectors")?;
            let (table, coverage) = load_embeddings(vectors, &corpus.vocab).map_err(CliError::runtime)?;
            save_embeddings(&args.out, &table, &corpus.vocab).map_err(CliError::runtime)?;
            println!(
                "loaded embeddings dim {} -> {} (coverage {}/{} = {:.1}%)",
                table.dim,
                args.out.display(),
                coverage.found,
                coverage.vocab_size,
                coverage.fraction() * 100.0
            );
        }
        other => {
            return Err(CliError::validation(format!(
                "unknown method `{other}` (expected svd|load)"
            )))
        }
    }
    Ok(())
}

pub fn path(args: PathArgs) -> CliResult {
    require_file(&args.corpus, "--corpus")?;
    require_file(&args.vectors, "--vectors")?;
    if args.n == 0 || args.stride == 0 {
        return Err(CliError::validation("--n and --stride must be >= 1"));
    }
    let corpus = Corpus::load(&args.corpus).map_err(CliError::runtime)?;
    let (table, coverage) = load_embeddings(&args.vectors, &corpus.vocab).map_err(CliError::runtime)?;
    if coverage.found < coverage.vocab_size {
        eprintln!(
            "warning: {} of {} vocabulary tokens missing from the vector file (zero vectors)",
            coverage.vocab_size - coverage.found,
            coverage.vocab_size
        );
    }
    let paths: Vec<_> = corpus
        .docs
        .iter()
        .map(|d| build_path(d, &table, args.n, args.stride))
        .collect::<Result<_, _>>()
        .map_err(CliError::runtime)?;
    fs::create_dir_all(&args.out).map_err(CliError::runtime)?;
    save_paths(&args.out, &paths).map_err(CliError::runtime)?;
    let total_points: usize = paths.iter().map(|p| p.points.nrows()).sum();
    println!(
        "built {} semantic paths ({} points, dim {}) -> {}",
        paths.len(),
        total_points,
        args.n * table.dim,
        args.out.display()
    );
    Ok(())
}

pub fn gen_markov(args: GenMarkovArgs) -> CliResult {
    require_file(&args.corpus, "--corpus")?;
    let corpus = Corpus::load(&args.corpus).map_err(CliError::runtime)?;
    let human: Vec<_> = corpus
        .docs
        .iter()
        .filter(|d| d.label == Label::Human)
        .collect();
    let training: Vec<&spotbot_core::corpus::TokenDoc> = if human.is_empty() {
        corpus.docs.iter().collect()
    } else {
        human
    };
    if training.is_empty() {
        return Err(CliError::validation("corpus has no documents to train on"));
    }
    fs::create_dir_all(&args.out).map_err(CliError::runtime)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);

    // (id, token length) of each text to generate
    let plan: Vec<(String, usize)> = if let Some(num) = args.num_texts {
        (0..num)
            .map(|i| (format!("gen_{i:03}"), args.length))
            .collect()
    } else {
        training
            .iter()
            .map(|d| (format!("bot_{}", d.id), d.tokens.len()))
            .collect()
    };

    match args.level.as_str() {
        "word" => {
            let streams: Vec<&[u32]> = training.iter().map(|d| d.tokens.as_slice()).collect();
            let model = MarkovModel::train(&streams, args.order).map_err(CliError::runtime)?;
            for (id, len) in &plan {
                let tokens = model.generate(*len, &mut rng);
                let text: Vec<&str> = tokens.iter().map(|&t| corpus.vocab.token(t)).collect();
                let file = args.out.join(format!("{id}.txt"));
                fs::write(&file, text.join(" ")).map_err(CliError::runtime)?;
            }
        }
        "char" => {
            let texts: Vec<String> = training
                .iter()
                .map(|d| {
                    d.tokens
                        .iter()
                        .map(|&t| corpus.vocab.token(t))
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .collect();
            let refs: Vec<&str> = texts.iter().map(|s| s.as_str()).collect();
            let model = CharMarkov::train(&refs, args.order).map_err(CliError::runtime)?;
            for (id, len) in &plan {
                // generous character budget, then truncate to the token count
                let raw = model.generate(len * 8, &mut rng);
                let tokens: Vec<&str> = raw.split_whitespace().take(*len).collect();
                let file = args.out.join(format!("{id}.txt"));
                fs::write(&file, tokens.join(" ")).map_err(CliError::runtime)?;
            }
        }
        other => {
            return Err(CliError::validation(format!(
                "unknown level `{other}` (expected word|char)"
            )))
        }
    }
    println!(
        "generated {} {}-level order-{} markov texts -> {}",
        plan.len(),
        args.level,
        args.order,
        args.out.display()
    );
    Ok(())
}
