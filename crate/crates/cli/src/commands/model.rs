//! features, train and eval subcommands.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use spotbot_core::classify::{cross_validate, CvReport, FeatureRow, LinearModel};
use spotbot_core::corpus::Corpus;

use super::{fmt_f64, parse_lambda_grid, require_file, CliError, CliResult, CsvTable};
use crate::{EvalArgs, FeaturesArgs, TrainArgs};

/// model.json: the trained model, its feature schema, and the CV summary.
#[derive(Debug, Serialize, Deserialize)]
pub struct ModelFile {
    pub feature_schema: Vec<String>,
    pub model: LinearModel,
    pub cv: CvSummary,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CvSummary {
    pub best_lambda: f64,
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    pub sd_accuracy: f64,
    pub per_lambda: Vec<(f64, f64)>,
    pub train_accuracy: f64,
}

impl CvSummary {
    pub fn from_report(r: &CvReport) -> CvSummary {
        CvSummary {
            best_lambda: r.best_lambda,
            fold_accuracies: r.fold_accuracies.clone(),
            mean_accuracy: r.mean_accuracy,
            sd_accuracy: r.sd_accuracy,
            per_lambda: r.per_lambda.clone(),
            train_accuracy: r.train_accuracy,
        }
    }
}

pub fn features(args: FeaturesArgs) -> CliResult {
    require_file(&args.corpus, "--corpus")?;
    let corpus = Corpus::load(&args.corpus).map_err(CliError::runtime)?;
    let label_of = |doc_id: &str| -> CliResult<String> {
        corpus
            .doc_by_id(doc_id)
            .map(|d| d.label.as_str().to_string())
            .ok_or_else(|| CliError::validation(format!("doc {doc_id} not in corpus")))
    };

    match args.kind.as_str() {
        "ec" => {
            let ec_path = args
                .ec
                .as_ref()
                .ok_or_else(|| CliError::validation("--kind ec requires --ec"))?;
            let (m, n) = match (args.m, args.n) {
                (Some(m), Some(n)) => (m, n),
                _ => return Err(CliError::validation("--kind ec requires --m and --n")),
            };
            require_file(ec_path, "--ec")?;
            let table = CsvTable::read(ec_path)?;
            let id_idx = table.column_index("doc_id")?;
            let m_idx = table.column_index("m")?;
            let n_idx = table.column_index("n")?;
            let h_idx = table.column_index("H")?;
            let c_idx = table.column_index("C")?;
            let mut rows = Vec::new();
            for r in &table.rows {
                if r[m_idx] != m.to_string() || r[n_idx] != n.to_string() {
                    continue;
                }
                rows.push(vec![
                    r[id_idx].clone(),
                    label_of(&r[id_idx])?,
                    r[h_idx].clone(),
                    r[c_idx].clone(),
                ]);
            }
            if rows.is_empty() {
                return Err(CliError::validation(format!(
                    "no rows for cell m={m} n={n} in {}",
                    ec_path.display()
                )));
            }
            super::write_csv(&args.out, "doc_id,label,h,c", &rows)?;
            println!("wrote {} ec feature rows -> {}", rows.len(), args.out.display());
        }
        "cluster" => {
            let stats_path = args
                .stats
                .as_ref()
                .ok_or_else(|| CliError::validation("--kind cluster requires --stats"))?;
            require_file(stats_path, "--stats")?;
            let table = CsvTable::read(stats_path)?;
            let id_idx = table.column_index("doc_id")?;
            let avg_idx = table.column_index("inter_avg")?;
            let min_idx = table.column_index("inter_min")?;
            let max_idx = table.column_index("inter_max")?;
            let mut rows = Vec::new();
            for r in &table.rows {
                rows.push(vec![
                    r[id_idx].clone(),
                    label_of(&r[id_idx])?,
                    r[avg_idx].clone(),
                    r[min_idx].clone(),
                    r[max_idx].clone(),
                ]);
            }
            super::write_csv(&args.out, "doc_id,label,inter_avg,inter_min,inter_max", &rows)?;
            println!(
                "wrote {} cluster feature rows -> {}",
                rows.len(),
                args.out.display()
            );
        }
        other => {
            return Err(CliError::validation(format!(
                "unknown kind `{other}` (expected ec|cluster)"
            )))
        }
    }
    Ok(())
}

/// Read a features.csv into classifier rows; label column maps human -> +1,
/// bot-* -> -1, and unlabeled rows are rejected.
pub fn read_feature_rows(path: &Path) -> CliResult<(Vec<String>, Vec<FeatureRow>)> {
    let table = CsvTable::read(path)?;
    let id_idx = table.column_index("doc_id")?;
    let label_idx = table.column_index("label")?;
    let feature_cols: Vec<usize> = (0..table.header.len())
        .filter(|&i| i != id_idx && i != label_idx)
        .collect();
    if feature_cols.is_empty() {
        return Err(CliError::validation("feature file has no feature columns"));
    }
    let schema: Vec<String> = feature_cols
        .iter()
        .map(|&i| table.header[i].clone())
        .collect();
    let mut rows = Vec::with_capacity(table.rows.len());
    for r in &table.rows {
        let label = match r[label_idx].as_str() {
            "human" => 1i8,
            "bot-simple" | "bot-advanced" => -1,
            other => {
                return Err(CliError::validation(format!(
                    "doc {} has label `{other}`; training needs human or bot-* labels",
                    r[id_idx]
                )))
            }
        };
        let mut features = Vec::with_capacity(feature_cols.len());
        for &i in &feature_cols {
            let v: f64 = r[i]
                .parse()
                .map_err(|_| CliError::validation(format!("bad float `{}`", r[i])))?;
            features.push(v);
        }
        if features.iter().any(|v| !v.is_finite()) {
            // degenerate statistics cannot feed the classifier
            continue;
        }
        rows.push(FeatureRow {
            doc_id: r[id_idx].clone(),
            features,
            label,
        });
    }
    Ok((schema, rows))
}

pub fn train(args: TrainArgs) -> CliResult {
    require_file(&args.features, "--features")?;
    let grid = parse_lambda_grid(&args.lambda_grid)?;
    if args.folds < 2 {
        return Err(CliError::validation("--folds must be >= 2"));
    }
    let (schema, rows) = read_feature_rows(&args.features)?;
    let report =
        cross_validate(&rows, args.folds, &grid, args.epochs, args.seed).map_err(CliError::runtime)?;
    let file = ModelFile {
        feature_schema: schema,
        model: report.final_model.clone(),
        cv: CvSummary::from_report(&report),
    };
    let json = serde_json::to_vec_pretty(&file).map_err(CliError::runtime)?;
    fs::write(&args.out, json).map_err(CliError::runtime)?;
    println!(
        "trained on {} rows: cv accuracy {:.3} +- {:.3} (best lambda {}), train accuracy {:.3} -> {}",
        rows.len(),
        report.mean_accuracy,
        report.sd_accuracy,
        fmt_f64(report.best_lambda),
        report.train_accuracy,
        args.out.display()
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct EvalReport {
    accuracy: f64,
    true_positive: usize,
    false_positive: usize,
    true_negative: usize,
    false_negative: usize,
}

pub fn eval(args: EvalArgs) -> CliResult {
    require_file(&args.model, "--model")?;
    require_file(&args.features, "--features")?;
    let bytes = fs::read(&args.model).map_err(CliError::runtime)?;
    let model_file: ModelFile = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::validation(format!("{}: {e}", args.model.display())))?;
    let (schema, rows) = read_feature_rows(&args.features)?;
    if schema != model_file.feature_schema {
        return Err(CliError::validation(format!(
            "feature schema mismatch: model expects {:?}, file has {:?}",
            model_file.feature_schema, schema
        )));
    }
    let mut tp = 0;
    let mut fp = 0;
    let mut tn = 0;
    let mut fn_ = 0;
    for row in &rows {
        let (pred, _) = model_file
            .model
            .predict(&row.features)
            .map_err(CliError::runtime)?;
        match (row.label, pred) {
            (1, 1) => tp += 1,
            (-1, 1) => fp += 1,
            (-1, -1) => tn += 1,
            (1, -1) => fn_ += 1,
            _ => unreachable!(),
        }
    }
    let accuracy = (tp + tn) as f64 / rows.len().max(1) as f64;
    println!(
        "eval: accuracy {:.3} on {} rows (tp={tp} fp={fp} tn={tn} fn={fn_})",
        accuracy,
        rows.len()
    );
    if let Some(out) = &args.out {
        let report = EvalReport {
            accuracy,
            true_positive: tp,
            false_positive: fp,
            true_negative: tn,
            false_negative: fn_,
        };
        let json = serde_json::to_vec_pretty(&report).map_err(CliError::runtime)?;
        fs::write(out, json).map_err(CliError::runtime)?;
    }
    Ok(())
}
