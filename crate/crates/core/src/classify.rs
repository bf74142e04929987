//! Linear max-margin classification: L2-regularized hinge loss minimized by
//! seeded stochastic subgradient descent over standardized features.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One training/evaluation example. `label` is +1 (human) or -1 (bot).
#[derive(Debug, Clone)]
pub struct FeatureRow {
    pub doc_id: String,
    pub features: Vec<f64>,
    pub label: i8,
}

/// Linear model over z-scored features: predict sign(w . x_std + b).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    pub lambda: f64,
}

impl LinearModel {
    fn standardized(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.means.iter().zip(&self.scales))
            .map(|(&v, (&m, &s))| (v - m) / s)
            .collect()
    }

    /// Signed margin and the predicted label; a zero margin maps to +1.
    pub fn predict(&self, features: &[f64]) -> Result<(i8, f64)> {
        if features.len() != self.weights.len() {
            return Err(Error::invalid(format!(
                "feature length {} does not match model dimension {}",
                features.len(),
                self.weights.len()
            )));
        }
        let x = self.standardized(features);
        let margin: f64 = self
            .weights
            .iter()
            .zip(&x)
            .map(|(w, v)| w * v)
            .sum::<f64>()
            + self.bias;
        Ok((if margin >= 0.0 { 1 } else { -1 }, margin))
    }

    pub fn accuracy(&self, rows: &[FeatureRow]) -> Result<f64> {
        if rows.is_empty() {
            return Err(Error::invalid("accuracy of an empty set"));
        }
        let mut hits = 0usize;
        for row in rows {
            let (label, _) = self.predict(&row.features)?;
            if label == row.label {
                hits += 1;
            }
        }
        Ok(hits as f64 / rows.len() as f64)
    }
}

/// Model plus its per-epoch objective values (regularizer + mean hinge).
#[derive(Debug, Clone)]
pub struct Training {
    pub model: LinearModel,
    pub objective_trace: Vec<f64>,
}

fn objective(rows: &[FeatureRow], model: &LinearModel) -> f64 {
    let reg: f64 = 0.5 * model.lambda * model.weights.iter().map(|w| w * w).sum::<f64>();
    let hinge: f64 = rows
        .iter()
        .map(|r| {
            let x = model.standardized(&r.features);
            let m: f64 = model
                .weights
                .iter()
                .zip(&x)
                .map(|(w, v)| w * v)
                .sum::<f64>()
                + model.bias;
            (1.0 - r.label as f64 * m).max(0.0)
        })
        .sum::<f64>()
        / rows.len() as f64;
    reg + hinge
}

fn standardization(rows: &[FeatureRow], dim: usize) -> (Vec<f64>, Vec<f64>) {
    let n = rows.len() as f64;
    let mut means = vec![0.0; dim];
    for r in rows {
        for (j, &v) in r.features.iter().enumerate() {
            means[j] += v;
        }
    }
    means.iter_mut().for_each(|m| *m /= n);
    let mut scales = vec![0.0; dim];
    for r in rows {
        for (j, &v) in r.features.iter().enumerate() {
            scales[j] += (v - means[j]) * (v - means[j]);
        }
    }
    for s in scales.iter_mut() {
        *s = (*s / n).sqrt();
        if *s <= 0.0 {
            *s = 1.0; // constant feature: pass through unscaled
        }
    }
    (means, scales)
}

/// Pegasos-style primal subgradient descent with step 1/(lambda * t).
/// Deterministic for a fixed seed; stops early once the objective plateaus
/// below 1e-6 over 10 epochs.
pub fn train_svc(rows: &[FeatureRow], lambda: f64, epochs: usize, seed: u64) -> Result<Training> {
    if rows.is_empty() {
        return Err(Error::invalid("no training rows"));
    }
    let dim = rows[0].features.len();
    if rows.iter().any(|r| r.features.len() != dim) {
        return Err(Error::invalid("inconsistent feature dimensions"));
    }
    if rows.iter().any(|r| r.features.iter().any(|v| !v.is_finite())) {
        return Err(Error::invalid("non-finite feature value"));
    }
    if rows.iter().any(|r| r.label != 1 && r.label != -1) {
        return Err(Error::invalid("labels must be +1 or -1"));
    }
    let pos = rows.iter().filter(|r| r.label == 1).count();
    if pos == 0 || pos == rows.len() {
        return Err(Error::invalid("training needs both classes present"));
    }
    if lambda <= 0.0 {
        return Err(Error::invalid("lambda must be positive"));
    }

    let (means, scales) = standardization(rows, dim);
    let standardized: Vec<(Vec<f64>, f64)> = rows
        .iter()
        .map(|r| {
            let x: Vec<f64> = r
                .features
                .iter()
                .zip(means.iter().zip(&scales))
                .map(|(&v, (&m, &s))| (v - m) / s)
                .collect();
            (x, r.label as f64)
        })
        .collect();

    let mut model = LinearModel {
        weights: vec![0.0; dim],
        bias: 0.0,
        means,
        scales,
        lambda,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..rows.len()).collect();
    let mut t = 0usize;
    let mut trace = Vec::with_capacity(epochs);

    for _epoch in 0..epochs {
        // Fisher-Yates shuffle, seeded
        for i in (1..order.len()).rev() {
            let j = rng.random_range(0..=i);
            order.swap(i, j);
        }
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let (x, y) = &standardized[i];
            let margin: f64 = model
                .weights
                .iter()
                .zip(x)
                .map(|(w, v)| w * v)
                .sum::<f64>()
                + model.bias;
            let violated = y * margin < 1.0;
            let shrink = 1.0 - eta * lambda;
            for (j, w) in model.weights.iter_mut().enumerate() {
                *w *= shrink;
                if violated {
                    *w += eta * y * x[j];
                }
            }
            if violated {
                model.bias += eta * y;
            }
        }
        trace.push(objective(rows, &model));
        if trace.len() > 10 {
            let window = &trace[trace.len() - 10..];
            let spread = window.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                - window.iter().cloned().fold(f64::INFINITY, f64::min);
            if spread < 1e-6 {
                break;
            }
        }
    }

    Ok(Training {
        model,
        objective_trace: trace,
    })
}

/// Cross-validation report: per-fold accuracies at the winning lambda, the
/// lambda grid results, and the final model refit on all rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvReport {
    pub best_lambda: f64,
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    pub sd_accuracy: f64,
    pub per_lambda: Vec<(f64, f64)>,
    pub train_accuracy: f64,
    pub final_model: LinearModel,
}

/// Deterministic stratified fold assignment: within each class the rows are
/// shuffled by the seed and dealt round-robin.
fn fold_assignment(rows: &[FeatureRow], folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; rows.len()];
    for class in [1i8, -1] {
        let mut idx: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].label == class).collect();
        for i in (1..idx.len()).rev() {
            let j = rng.random_range(0..=i);
            idx.swap(i, j);
        }
        for (pos, &i) in idx.iter().enumerate() {
            assignment[i] = pos % folds;
        }
    }
    assignment
}

/// Stratified k-fold cross-validation over a lambda grid, refitting the
/// winner on the full data. Deterministic for a fixed seed.
pub fn cross_validate(
    rows: &[FeatureRow],
    folds: usize,
    lambda_grid: &[f64],
    epochs: usize,
    seed: u64,
) -> Result<CvReport> {
    if folds < 2 {
        return Err(Error::invalid("need at least 2 folds"));
    }
    if lambda_grid.is_empty() {
        return Err(Error::invalid("empty lambda grid"));
    }
    let assignment = fold_assignment(rows, folds, seed);
    for fold in 0..folds {
        let test_has = |class: i8| {
            rows.iter()
                .enumerate()
                .any(|(i, r)| assignment[i] == fold && r.label == class)
        };
        let train_has = |class: i8| {
            rows.iter()
                .enumerate()
                .any(|(i, r)| assignment[i] != fold && r.label == class)
        };
        if !(test_has(1) && test_has(-1) && train_has(1) && train_has(-1)) {
            return Err(Error::invalid(format!(
                "fold {fold} lacks one of the classes; reduce folds or add data"
            )));
        }
    }

    let mut per_lambda = Vec::with_capacity(lambda_grid.len());
    let mut best: Option<(f64, Vec<f64>)> = None;
    for &lambda in lambda_grid {
        let mut fold_acc = Vec::with_capacity(folds);
        for fold in 0..folds {
            let train: Vec<FeatureRow> = rows
                .iter()
                .enumerate()
                .filter(|(i, _)| assignment[*i] != fold)
                .map(|(_, r)| r.clone())
                .collect();
            let test: Vec<FeatureRow> = rows
                .iter()
                .enumerate()
                .filter(|(i, _)| assignment[*i] == fold)
                .map(|(_, r)| r.clone())
                .collect();
            let trained = train_svc(&train, lambda, epochs, seed)?;
            fold_acc.push(trained.model.accuracy(&test)?);
        }
        let mean = fold_acc.iter().sum::<f64>() / folds as f64;
        per_lambda.push((lambda, mean));
        let better = match &best {
            None => true,
            Some((best_mean, _)) => mean > *best_mean,
        };
        if better {
            best = Some((mean, fold_acc));
        }
    }

    let (mean_accuracy, fold_accuracies) = best.unwrap();
    let best_lambda = per_lambda
        .iter()
        .find(|(_, m)| *m == mean_accuracy)
        .unwrap()
        .0;
    let sd_accuracy = {
        let var = fold_accuracies
            .iter()
            .map(|a| (a - mean_accuracy) * (a - mean_accuracy))
            .sum::<f64>()
            / folds as f64;
        var.sqrt()
    };
    let final_training = train_svc(rows, best_lambda, epochs, seed)?;
    let train_accuracy = final_training.model.accuracy(rows)?;

    Ok(CvReport {
        best_lambda,
        fold_accuracies,
        mean_accuracy,
        sd_accuracy,
        per_lambda,
        train_accuracy,
        final_model: final_training.model,
    })
}
