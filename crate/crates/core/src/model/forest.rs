//! Random forest with balanced class weights.
//!
//! Each tree trains on a bootstrap resample with per-sample weights
//! inversely proportional to class frequency in the training set, and a
//! fresh RNG stream derived from (seed, tree index), so parallel and
//! serial training produce identical forests.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::tree::{DecisionTree, Node};
use super::{LabeledDataset, ModelError};

#[derive(Debug, Clone)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub seed: u64,
    /// Minimum total sample-equivalent weight in a leaf.
    pub min_leaf_weight: f64,
}

impl ForestConfig {
    pub fn new(n_trees: usize, seed: u64) -> Self {
        Self {
            n_trees,
            seed,
            min_leaf_weight: 1.0,
        }
    }
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self::new(100, 0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    pub feature_names: Vec<String>,
    pub seed: u64,
    pub min_leaf_weight: f64,
    pub(crate) trees: Vec<DecisionTree>,
}

impl ForestModel {
    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }
}

/// Train a forest; features per split default to ceil(sqrt(p)).
pub fn train_forest(train: &LabeledDataset, config: &ForestConfig) -> Result<ForestModel, ModelError> {
    if config.n_trees == 0 {
        return Err(ModelError::EmptyForest);
    }
    if train.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    train.validate()?;
    let n = train.len();
    let positives = train.rows.iter().filter(|r| r.improved).count();
    let negatives = n - positives;
    if positives < 2 || negatives < 2 {
        if positives == 0 || negatives == 0 {
            return Err(ModelError::SingleClass);
        }
        return Err(ModelError::ClassTooSmall {
            class: if positives < 2 { "improved" } else { "not_improved" },
            count: positives.min(negatives),
            need: 2,
        });
    }

    // balanced class weights: n / (2 * class count), mean weight 1
    let weight_positive = n as f64 / (2.0 * positives as f64);
    let weight_negative = n as f64 / (2.0 * negatives as f64);
    let rows: Vec<Vec<f64>> = train.rows.iter().map(|r| r.features.clone()).collect();
    let labels: Vec<bool> = train.rows.iter().map(|r| r.improved).collect();
    let weights: Vec<f64> = labels
        .iter()
        .map(|&improved| if improved { weight_positive } else { weight_negative })
        .collect();

    let p = train.feature_names.len();
    let features_per_split = (p as f64).sqrt().ceil() as usize;

    let trees: Vec<DecisionTree> = (0..config.n_trees)
        .into_par_iter()
        .map(|tree_index| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(tree_index as u64 + 1);
            let bootstrap: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            DecisionTree::fit(
                &rows,
                &labels,
                &weights,
                bootstrap,
                p,
                features_per_split,
                config.min_leaf_weight,
                &mut rng,
            )
        })
        .collect();

    Ok(ForestModel {
        feature_names: train.feature_names.clone(),
        seed: config.seed,
        min_leaf_weight: config.min_leaf_weight,
        trees,
    })
}

/// Mean over trees of the leaf positive-class weight fraction.
pub fn predict_proba(model: &ForestModel, features: &[f64]) -> Result<f64, ModelError> {
    if model.trees.is_empty() {
        return Err(ModelError::EmptyForest);
    }
    if features.len() != model.feature_names.len() {
        return Err(ModelError::FeatureCountMismatch {
            expected: model.feature_names.len(),
            found: features.len(),
        });
    }
    let sum: f64 = model
        .trees
        .iter()
        .map(|tree| tree.positive_fraction(features))
        .sum();
    Ok(sum / model.trees.len() as f64)
}

/// Flat text serialization: header, feature names, then per-tree node
/// lists (`split <feature> <threshold> <left> <right>` or
/// `leaf <w_neg> <w_pos>`).
pub fn write_forest_model<W: Write>(mut writer: W, model: &ForestModel) -> Result<(), ModelError> {
    writeln!(
        writer,
        "forest trees={} seed={} min_leaf_weight={:.17e}",
        model.trees.len(),
        model.seed,
        model.min_leaf_weight
    )?;
    writeln!(writer, "features {}", model.feature_names.join(" "))?;
    for (index, tree) in model.trees.iter().enumerate() {
        writeln!(writer, "tree {index} nodes={}", tree.nodes.len())?;
        for node in &tree.nodes {
            match node {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => writeln!(writer, "split {feature} {threshold:.17e} {left} {right}")?,
                Node::Leaf {
                    weight_negative,
                    weight_positive,
                } => writeln!(writer, "leaf {weight_negative:.17e} {weight_positive:.17e}")?,
            }
        }
    }
    Ok(())
}

pub fn read_forest_model<R: BufRead>(reader: R) -> Result<ForestModel, ModelError> {
    let malformed = |reason: String| ModelError::MalformedModel { reason };
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| malformed("empty file".into()))??;
    let mut n_trees = None;
    let mut seed = None;
    let mut min_leaf_weight = 1.0;
    for token in header.split_whitespace().skip(1) {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| malformed(format!("bad header token {token:?}")))?;
        match key {
            "trees" => n_trees = Some(value.parse::<usize>().map_err(|e| malformed(e.to_string()))?),
            "seed" => seed = Some(value.parse::<u64>().map_err(|e| malformed(e.to_string()))?),
            "min_leaf_weight" => {
                min_leaf_weight = value.parse::<f64>().map_err(|e| malformed(e.to_string()))?
            }
            _ => return Err(malformed(format!("unknown header key {key:?}"))),
        }
    }
    let n_trees = n_trees.ok_or_else(|| malformed("missing tree count".into()))?;
    let seed = seed.ok_or_else(|| malformed("missing seed".into()))?;

    let features_line = lines
        .next()
        .ok_or_else(|| malformed("missing features row".into()))??;
    let feature_names: Vec<String> = features_line
        .strip_prefix("features ")
        .ok_or_else(|| malformed("expected features row".into()))?
        .split_whitespace()
        .map(str::to_string)
        .collect();

    let mut trees = Vec::with_capacity(n_trees);
    for tree_index in 0..n_trees {
        let tree_header = lines
            .next()
            .ok_or_else(|| malformed(format!("missing tree {tree_index}")))??;
        let nodes_expected: usize = tree_header
            .strip_prefix(&format!("tree {tree_index} nodes="))
            .ok_or_else(|| malformed(format!("bad tree header {tree_header:?}")))?
            .parse()
            .map_err(|e: std::num::ParseIntError| malformed(e.to_string()))?;
        let mut nodes = Vec::with_capacity(nodes_expected);
        for _ in 0..nodes_expected {
            let line = lines
                .next()
                .ok_or_else(|| malformed("truncated tree".into()))??;
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                ["split", feature, threshold, left, right] => nodes.push(Node::Split {
                    feature: feature.parse().map_err(|_| malformed(line.clone()))?,
                    threshold: threshold.parse().map_err(|_| malformed(line.clone()))?,
                    left: left.parse().map_err(|_| malformed(line.clone()))?,
                    right: right.parse().map_err(|_| malformed(line.clone()))?,
                }),
                ["leaf", negative, positive] => nodes.push(Node::Leaf {
                    weight_negative: negative.parse().map_err(|_| malformed(line.clone()))?,
                    weight_positive: positive.parse().map_err(|_| malformed(line.clone()))?,
                }),
                _ => return Err(malformed(format!("bad node line {line:?}"))),
            }
        }
        trees.push(DecisionTree { nodes });
    }
    Ok(ForestModel {
        feature_names,
        seed,
        min_leaf_weight,
        trees,
    })
}
