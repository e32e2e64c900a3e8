//! Random-forest classification over feature vectors plus the statistical
//! kernels used by the evaluation protocol.

mod forest;
mod metrics;
mod stats;
mod tree;

pub use forest::{predict_proba, read_forest_model, train_forest, write_forest_model, ForestConfig, ForestModel};
pub use metrics::{auc_scores, cross_validate, evaluate, CrossValidation, MeanStd, Metrics, MetricsReport};
pub use stats::{
    group_stats, normal_quantile, pearson_r_ci, quartile_odds_ratio, student_t_two_sided_p,
    GroupStats, OddsRatio, PearsonCi,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("need at least 2 folds, got {k}")]
    TooFewFolds { k: usize },
    #[error("class {class:?} has {count} members, needs at least {need}")]
    ClassTooSmall {
        class: &'static str,
        count: usize,
        need: usize,
    },
    #[error("training data must contain both classes")]
    SingleClass,
    #[error("empty dataset")]
    EmptyDataset,
    #[error("temporal split produced an empty {side} side at cutoff {cutoff}")]
    EmptySplit { side: &'static str, cutoff: i32 },
    #[error("unknown feature column {name:?}")]
    UnknownFeature { name: String },
    #[error("expected {expected} feature values, got {found}")]
    FeatureCountMismatch { expected: usize, found: usize },
    #[error("feature value for {name:?} is not finite")]
    NonFiniteFeature { name: String },
    #[error("forest must have at least one tree")]
    EmptyForest,
    #[error("{what} requires at least {need} values, got {found}")]
    TooFewValues {
        what: &'static str,
        need: usize,
        found: usize,
    },
    #[error("{what} has zero variance")]
    ZeroVariance { what: &'static str },
    #[error("input lengths differ: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("malformed model file: {reason}")]
    MalformedModel { reason: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// One labeled example: named feature values, binary improvement label,
/// and the calendar year of the user's first post.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRow {
    pub user_id: String,
    pub features: Vec<f64>,
    pub improved: bool,
    pub first_post_year: i32,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabeledDataset {
    pub feature_names: Vec<String>,
    pub rows: Vec<DatasetRow>,
}

impl LabeledDataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn labels(&self) -> Vec<bool> {
        self.rows.iter().map(|r| r.improved).collect()
    }

    /// Reject missing (non-finite) values; flags are legitimate features,
    /// absent ones are not.
    pub fn validate(&self) -> Result<(), ModelError> {
        for row in &self.rows {
            if row.features.len() != self.feature_names.len() {
                return Err(ModelError::FeatureCountMismatch {
                    expected: self.feature_names.len(),
                    found: row.features.len(),
                });
            }
            for (value, name) in row.features.iter().zip(&self.feature_names) {
                if !value.is_finite() {
                    return Err(ModelError::NonFiniteFeature { name: name.clone() });
                }
            }
        }
        Ok(())
    }

    /// Project onto a named feature subset, preserving row order.
    pub fn select(&self, names: &[String]) -> Result<LabeledDataset, ModelError> {
        let indices: Vec<usize> = names
            .iter()
            .map(|name| {
                self.feature_names
                    .iter()
                    .position(|c| c == name)
                    .ok_or_else(|| ModelError::UnknownFeature { name: name.clone() })
            })
            .collect::<Result<_, _>>()?;
        Ok(LabeledDataset {
            feature_names: names.to_vec(),
            rows: self
                .rows
                .iter()
                .map(|row| DatasetRow {
                    user_id: row.user_id.clone(),
                    features: indices.iter().map(|&i| row.features[i]).collect(),
                    improved: row.improved,
                    first_post_year: row.first_post_year,
                })
                .collect(),
        })
    }

    fn subset(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            feature_names: self.feature_names.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }
}

/// Seeded stratified k-fold assignment. Within each class, indices are
/// shuffled and dealt round-robin, so per-fold class counts differ from
/// exact proportionality by at most one.
pub fn stratified_kfold(
    labels: &[bool],
    k: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>, ModelError> {
    if k < 2 {
        return Err(ModelError::TooFewFolds { k });
    }
    let mut positives: Vec<usize> = Vec::new();
    let mut negatives: Vec<usize> = Vec::new();
    for (i, &label) in labels.iter().enumerate() {
        if label {
            positives.push(i);
        } else {
            negatives.push(i);
        }
    }
    for (class, members) in [("improved", &positives), ("not_improved", &negatives)] {
        if members.len() < k {
            return Err(ModelError::ClassTooSmall {
                class,
                count: members.len(),
                need: k,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    positives.shuffle(&mut rng);
    negatives.shuffle(&mut rng);

    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (slot, index) in positives.into_iter().chain(negatives).enumerate() {
        folds[slot % k].push(index);
    }
    for fold in folds.iter_mut() {
        fold.sort_unstable();
    }
    Ok(folds)
}

/// Rows with `first_post_year <= cutoff_year` train; later rows test.
pub fn temporal_split(
    dataset: &LabeledDataset,
    cutoff_year: i32,
) -> Result<(LabeledDataset, LabeledDataset), ModelError> {
    let (train_idx, test_idx): (Vec<usize>, Vec<usize>) = (0..dataset.len())
        .partition(|&i| dataset.rows[i].first_post_year <= cutoff_year);
    if train_idx.is_empty() {
        return Err(ModelError::EmptySplit {
            side: "train",
            cutoff: cutoff_year,
        });
    }
    if test_idx.is_empty() {
        return Err(ModelError::EmptySplit {
            side: "test",
            cutoff: cutoff_year,
        });
    }
    Ok((dataset.subset(&train_idx), dataset.subset(&test_idx)))
}

#[cfg(test)]
pub(crate) fn toy_dataset(
    features: Vec<(Vec<f64>, bool)>,
    feature_names: &[&str],
) -> LabeledDataset {
    LabeledDataset {
        feature_names: feature_names.iter().map(|s| s.to_string()).collect(),
        rows: features
            .into_iter()
            .enumerate()
            .map(|(i, (features, improved))| DatasetRow {
                user_id: format!("u{i}"),
                features,
                improved,
                first_post_year: 2018 + (i % 3) as i32,
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_folds_are_exact() {
        let labels: Vec<bool> = (0..20).map(|i| i < 10).collect();
        let folds = stratified_kfold(&labels, 5, 1).unwrap();
        assert_eq!(folds.len(), 5);
        for fold in &folds {
            assert_eq!(fold.len(), 4);
            assert_eq!(fold.iter().filter(|&&i| labels[i]).count(), 2);
        }
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..20).collect::<Vec<_>>());
    }

    #[test]
    fn uneven_class_counts_spread_by_at_most_one() {
        let labels: Vec<bool> = (0..20).map(|i| i < 7).collect();
        let folds = stratified_kfold(&labels, 5, 9).unwrap();
        for fold in &folds {
            let positives = fold.iter().filter(|&&i| labels[i]).count();
            assert!((1..=2).contains(&positives), "fold had {positives} positives");
        }
    }

    #[test]
    fn same_seed_same_folds() {
        let labels: Vec<bool> = (0..40).map(|i| i % 3 == 0).collect();
        assert_eq!(
            stratified_kfold(&labels, 4, 7).unwrap(),
            stratified_kfold(&labels, 4, 7).unwrap()
        );
        assert_ne!(
            stratified_kfold(&labels, 4, 7).unwrap(),
            stratified_kfold(&labels, 4, 8).unwrap()
        );
    }

    #[test]
    fn small_class_rejected() {
        let labels = vec![true, false, false, false, false, false];
        assert!(matches!(
            stratified_kfold(&labels, 5, 0),
            Err(ModelError::ClassTooSmall { .. })
        ));
    }

    #[test]
    fn temporal_split_by_year() {
        let ds = toy_dataset(
            (0..9).map(|i| (vec![i as f64], i % 2 == 0)).collect(),
            &["x"],
        );
        // years cycle 2018, 2019, 2020
        let (train, test) = temporal_split(&ds, 2019).unwrap();
        assert!(train.rows.iter().all(|r| r.first_post_year <= 2019));
        assert!(test.rows.iter().all(|r| r.first_post_year == 2020));
        assert_eq!(train.len() + test.len(), 9);
    }

    #[test]
    fn temporal_split_empty_sides_error() {
        let ds = toy_dataset(vec![(vec![0.0], true), (vec![1.0], false)], &["x"]);
        // both rows are 2018/2019
        assert!(matches!(
            temporal_split(&ds, 2017),
            Err(ModelError::EmptySplit { side: "train", .. })
        ));
        assert!(matches!(
            temporal_split(&ds, 2020),
            Err(ModelError::EmptySplit { side: "test", .. })
        ));
    }

    #[test]
    fn select_projects_columns() {
        let ds = toy_dataset(
            vec![(vec![1.0, 2.0, 3.0], true), (vec![4.0, 5.0, 6.0], false)],
            &["a", "b", "c"],
        );
        let projected = ds.select(&["c".into(), "a".into()]).unwrap();
        assert_eq!(projected.feature_names, vec!["c", "a"]);
        assert_eq!(projected.rows[0].features, vec![3.0, 1.0]);
        assert!(ds.select(&["nope".into()]).is_err());
    }
}
