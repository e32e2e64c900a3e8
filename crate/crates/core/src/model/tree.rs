//! Weighted decision tree with Gini splits.
//!
//! Split predicates are `x <= v` where `v` is an observed feature value
//! (not a midpoint), so tree structure and predictions depend only on the
//! ordering of feature values. Growth stops at pure nodes or when a child
//! would fall below the minimum leaf weight.

use rand::seq::index::sample;
use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        weight_negative: f64,
        weight_positive: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

struct Builder<'a> {
    rows: &'a [Vec<f64>],
    labels: &'a [bool],
    weights: &'a [f64],
    n_features: usize,
    features_per_split: usize,
    min_leaf_weight: f64,
    nodes: Vec<Node>,
}

fn gini(weight_negative: f64, weight_positive: f64) -> f64 {
    let total = weight_negative + weight_positive;
    if total <= 0.0 {
        return 0.0;
    }
    1.0 - (weight_negative * weight_negative + weight_positive * weight_positive) / (total * total)
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl<'a> Builder<'a> {
    fn leaf(&mut self, indices: &[usize]) -> usize {
        let mut weight_negative = 0.0;
        let mut weight_positive = 0.0;
        for &i in indices {
            if self.labels[i] {
                weight_positive += self.weights[i];
            } else {
                weight_negative += self.weights[i];
            }
        }
        self.nodes.push(Node::Leaf {
            weight_negative,
            weight_positive,
        });
        self.nodes.len() - 1
    }

    fn best_split<R: Rng>(&self, indices: &[usize], rng: &mut R) -> Option<BestSplit> {
        let mut candidates: Vec<usize> =
            sample(rng, self.n_features, self.features_per_split).into_vec();
        candidates.sort_unstable();

        let (mut total_neg, mut total_pos) = (0.0, 0.0);
        for &i in indices {
            if self.labels[i] {
                total_pos += self.weights[i];
            } else {
                total_neg += self.weights[i];
            }
        }
        let total = total_neg + total_pos;
        let parent_impurity = gini(total_neg, total_pos);

        let mut best: Option<BestSplit> = None;
        for feature in candidates {
            let mut order: Vec<usize> = indices.to_vec();
            order.sort_by(|&a, &b| {
                self.rows[a][feature]
                    .partial_cmp(&self.rows[b][feature])
                    .expect("feature values are finite")
            });

            let (mut left_neg, mut left_pos) = (0.0, 0.0);
            let mut cursor = 0;
            while cursor < order.len() {
                let value = self.rows[order[cursor]][feature];
                // consume the whole run of equal values
                while cursor < order.len() && self.rows[order[cursor]][feature] == value {
                    let i = order[cursor];
                    if self.labels[i] {
                        left_pos += self.weights[i];
                    } else {
                        left_neg += self.weights[i];
                    }
                    cursor += 1;
                }
                if cursor == order.len() {
                    break; // everything on the left is not a split
                }
                let left = left_neg + left_pos;
                let right = total - left;
                if left < self.min_leaf_weight || right < self.min_leaf_weight {
                    continue;
                }
                let weighted_child_impurity = (left * gini(left_neg, left_pos)
                    + right * gini(total_neg - left_neg, total_pos - left_pos))
                    / total;
                let score = parent_impurity - weighted_child_impurity;
                if score > 1e-15 && best.as_ref().map_or(true, |b| score > b.score) {
                    best = Some(BestSplit {
                        feature,
                        threshold: value,
                        score,
                    });
                }
            }
        }
        best
    }

    fn build<R: Rng>(&mut self, indices: Vec<usize>, rng: &mut R) -> usize {
        let any_positive = indices.iter().any(|&i| self.labels[i]);
        let any_negative = indices.iter().any(|&i| !self.labels[i]);
        if !(any_positive && any_negative) {
            return self.leaf(&indices);
        }
        let Some(split) = self.best_split(&indices, rng) else {
            return self.leaf(&indices);
        };
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
            .into_iter()
            .partition(|&i| self.rows[i][split.feature] <= split.threshold);

        let placeholder = self.nodes.len();
        self.nodes.push(Node::Leaf {
            weight_negative: 0.0,
            weight_positive: 0.0,
        });
        let left = self.build(left_idx, rng);
        let right = self.build(right_idx, rng);
        self.nodes[placeholder] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        placeholder
    }
}

impl DecisionTree {
    /// Fit on the given row indices with per-row weights. The RNG drives
    /// the random feature subset at each node.
    pub fn fit<R: Rng>(
        rows: &[Vec<f64>],
        labels: &[bool],
        weights: &[f64],
        indices: Vec<usize>,
        n_features: usize,
        features_per_split: usize,
        min_leaf_weight: f64,
        rng: &mut R,
    ) -> DecisionTree {
        let mut builder = Builder {
            rows,
            labels,
            weights,
            n_features,
            features_per_split: features_per_split.clamp(1, n_features),
            min_leaf_weight,
            nodes: Vec::new(),
        };
        let root = builder.build(indices, rng);
        debug_assert_eq!(root, 0);
        DecisionTree {
            nodes: builder.nodes,
        }
    }

    /// Weighted positive-class fraction at the reached leaf.
    pub fn positive_fraction(&self, features: &[f64]) -> f64 {
        let mut node = 0;
        loop {
            match &self.nodes[node] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if features[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
                Node::Leaf {
                    weight_negative,
                    weight_positive,
                } => {
                    let total = weight_negative + weight_positive;
                    return if total > 0.0 {
                        weight_positive / total
                    } else {
                        0.5
                    };
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fit_simple(rows: &[Vec<f64>], labels: &[bool], weights: &[f64], seed: u64) -> DecisionTree {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DecisionTree::fit(
            rows,
            labels,
            weights,
            (0..rows.len()).collect(),
            rows[0].len(),
            rows[0].len(),
            1.0,
            &mut rng,
        )
    }

    #[test]
    fn separable_data_is_memorized() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 - 9.5]).collect();
        let labels: Vec<bool> = (0..20).map(|i| i >= 10).collect();
        let weights = vec![1.0; 20];
        let tree = fit_simple(&rows, &labels, &weights, 0);
        for (row, &label) in rows.iter().zip(&labels) {
            let fraction = tree.positive_fraction(row);
            assert_eq!(fraction, if label { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn pure_node_is_single_leaf() {
        let rows = vec![vec![1.0], vec![2.0], vec![3.0]];
        let labels = vec![true, true, true];
        let tree = fit_simple(&rows, &labels, &[1.0; 3], 0);
        assert_eq!(tree.nodes.len(), 1);
        assert_eq!(tree.positive_fraction(&[5.0]), 1.0);
    }

    #[test]
    fn weighted_equals_duplicated_on_integer_ratios() {
        // 6 negatives with weight 1, 3 positives with weight 2 must split
        // exactly like 6 negatives + 6 duplicated positives, all weight 1.
        let base_neg: Vec<f64> = vec![0.1, 0.9, 1.7, 2.2, 2.9, 3.4];
        let base_pos: Vec<f64> = vec![5.1, 6.3, 7.7];

        let mut weighted_rows: Vec<Vec<f64>> = Vec::new();
        let mut weighted_labels = Vec::new();
        let mut weights = Vec::new();
        for &v in &base_neg {
            weighted_rows.push(vec![v, -v]);
            weighted_labels.push(false);
            weights.push(1.0);
        }
        for &v in &base_pos {
            weighted_rows.push(vec![v, -v]);
            weighted_labels.push(true);
            weights.push(2.0);
        }

        let mut dup_rows = Vec::new();
        let mut dup_labels = Vec::new();
        for &v in &base_neg {
            dup_rows.push(vec![v, -v]);
            dup_labels.push(false);
        }
        for &v in &base_pos {
            for _ in 0..2 {
                dup_rows.push(vec![v, -v]);
                dup_labels.push(true);
            }
        }

        let weighted = fit_simple(&weighted_rows, &weighted_labels, &weights, 42);
        let duplicated = fit_simple(&dup_rows, &dup_labels, &vec![1.0; dup_rows.len()], 42);

        // identical split structure; leaf weights match as totals
        let splits = |tree: &DecisionTree| -> Vec<(usize, f64)> {
            tree.nodes
                .iter()
                .filter_map(|n| match n {
                    Node::Split {
                        feature, threshold, ..
                    } => Some((*feature, *threshold)),
                    _ => None,
                })
                .collect()
        };
        assert_eq!(splits(&weighted), splits(&duplicated));
        for probe in [[0.5, -0.5], [3.0, -3.0], [6.0, -6.0]] {
            assert_eq!(
                weighted.positive_fraction(&probe),
                duplicated.positive_fraction(&probe)
            );
        }
    }

    #[test]
    fn same_rng_same_tree() {
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|i| vec![(i as f64 * 0.7).sin(), (i as f64 * 1.3).cos(), i as f64])
            .collect();
        let labels: Vec<bool> = (0..30).map(|i| i % 3 == 0).collect();
        let weights = vec![1.0; 30];
        let a = fit_simple(&rows, &labels, &weights, 5);
        let b = fit_simple(&rows, &labels, &weights, 5);
        assert_eq!(a, b);
    }
}
