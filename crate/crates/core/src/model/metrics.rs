//! Classification metrics and the cross-validation protocol.

use super::{predict_proba, stratified_kfold, train_forest, ForestConfig, LabeledDataset, ModelError};

/// Single-fold metrics; the positive class is `improved` and 0/0 ratios
/// collapse to 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub accuracy: f64,
    pub f1: f64,
    pub auc: f64,
    pub precision: f64,
}

/// Tie-adjusted Mann-Whitney AUC: the probability that a random positive
/// scores above a random negative, counting ties as half.
pub fn auc_scores(scores: &[f64], labels: &[bool]) -> f64 {
    debug_assert_eq!(scores.len(), labels.len());
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return 0.5;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("scores are finite"));

    // average ranks over tie groups (ranks start at 1)
    let mut rank_sum_pos = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let average_rank = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            if labels[idx] {
                rank_sum_pos += average_rank;
            }
        }
        start = end;
    }
    (rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0) / (n_pos as f64 * n_neg as f64)
}

/// Metrics of a trained model on held-out rows (prediction threshold 0.5).
pub fn evaluate(
    model: &super::ForestModel,
    test: &LabeledDataset,
) -> Result<Metrics, ModelError> {
    if test.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    let mut scores = Vec::with_capacity(test.len());
    let labels = test.labels();
    for row in &test.rows {
        scores.push(predict_proba(model, &row.features)?);
    }

    let mut correct = 0usize;
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (&score, &label) in scores.iter().zip(&labels) {
        let predicted = score >= 0.5;
        if predicted == label {
            correct += 1;
        }
        match (predicted, label) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(Metrics {
        accuracy: correct as f64 / test.len() as f64,
        f1,
        auc: auc_scores(&scores, &labels),
        precision,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanStd {
    pub mean: f64,
    /// Population standard deviation across folds.
    pub std: f64,
}

impl MeanStd {
    fn from_values(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Self {
            mean,
            std: variance.sqrt(),
        }
    }
}

/// Per-metric mean and standard deviation across folds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub accuracy: MeanStd,
    pub f1: MeanStd,
    pub auc: MeanStd,
    pub precision: MeanStd,
}

impl MetricsReport {
    pub fn from_folds(folds: &[Metrics]) -> Self {
        let collect = |f: fn(&Metrics) -> f64| -> Vec<f64> { folds.iter().map(f).collect() };
        Self {
            accuracy: MeanStd::from_values(&collect(|m| m.accuracy)),
            f1: MeanStd::from_values(&collect(|m| m.f1)),
            auc: MeanStd::from_values(&collect(|m| m.auc)),
            precision: MeanStd::from_values(&collect(|m| m.precision)),
        }
    }
}

/// Cross-validation output: the per-fold metric summary and each row's
/// fold assignment.
#[derive(Debug, Clone)]
pub struct CrossValidation {
    pub report: MetricsReport,
    pub fold_metrics: Vec<Metrics>,
    pub fold_of_row: Vec<usize>,
}

/// Stratified k-fold cross-validation of a forest on an optional feature
/// subset. Each fold trains a fresh forest with the same config.
pub fn cross_validate(
    dataset: &LabeledDataset,
    k: usize,
    config: &ForestConfig,
    feature_subset: Option<&[String]>,
) -> Result<CrossValidation, ModelError> {
    let projected;
    let data = match feature_subset {
        Some(names) => {
            projected = dataset.select(names)?;
            &projected
        }
        None => dataset,
    };
    data.validate()?;
    let folds = stratified_kfold(&data.labels(), k, config.seed)?;

    let mut fold_of_row = vec![0usize; data.len()];
    for (fold_index, fold) in folds.iter().enumerate() {
        for &row in fold {
            fold_of_row[row] = fold_index;
        }
    }

    let mut fold_metrics = Vec::with_capacity(k);
    for fold_index in 0..k {
        let train_idx: Vec<usize> =
            (0..data.len()).filter(|i| fold_of_row[*i] != fold_index).collect();
        let test_idx: Vec<usize> = folds[fold_index].clone();
        let train = data.subset(&train_idx);
        let test = data.subset(&test_idx);
        let model = train_forest(&train, config)?;
        fold_metrics.push(evaluate(&model, &test)?);
    }
    Ok(CrossValidation {
        report: MetricsReport::from_folds(&fold_metrics),
        fold_metrics,
        fold_of_row,
    })
}
