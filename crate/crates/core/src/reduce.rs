//! Deterministic linear projection of high-dimensional embeddings to 3D.
//!
//! The reducer is a fixed 3-component PCA fit on corpus-pooled embeddings:
//! one shared semantic space per corpus so per-user centroids stay
//! comparable. Fitting is deterministic; component signs are fixed by
//! making the largest-magnitude coordinate of each component positive.
//! An alternative `passthrough` path accepts inputs that are already 3D
//! (e.g. produced by an external nonlinear reducer).

use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point3;
use crate::ingest::Trajectory;

/// A user's trajectory projected to 3D, with timestamps in fractional days.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedTrajectory {
    pub user_id: String,
    pub points: Vec<Point3>,
    pub timestamps_days: Vec<f64>,
}

impl ReducedTrajectory {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn span_days(&self) -> f64 {
        match (self.timestamps_days.first(), self.timestamps_days.last()) {
            (Some(first), Some(last)) => last - first,
            _ => 0.0,
        }
    }
}

/// Fitted linear reducer: mean, three orthonormal components, and the
/// explained-variance ratio of each component.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducerModel {
    pub mean: Vec<f64>,
    pub components: [Vec<f64>; 3],
    pub explained_variance_ratio: [f64; 3],
    /// True when the input had rank < 3 and components were padded with
    /// arbitrary orthonormal completions.
    pub rank_deficient: bool,
}

impl ReducerModel {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

#[derive(Debug, Error)]
pub enum ReduceError {
    #[error("need at least 4 distinct embeddings to fit, got {distinct}")]
    TooFewPoints { distinct: usize },
    #[error("embedding dimension must be >= 3, got {dim}")]
    DimensionTooSmall { dim: usize },
    #[error("embedding dimension {found} does not match model dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("all embeddings are identical (zero variance)")]
    ZeroVariance,
    #[error("passthrough requires 3-dimensional embeddings, got {dim}")]
    NotThreeDimensional { dim: usize },
    #[error("malformed reducer model file: {reason}")]
    MalformedModel { reason: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Eigenvalues below this fraction of the total variance count as rank
/// deficiency.
const RANK_TOL: f64 = 1e-12;

fn fix_sign(component: &mut [f64]) {
    let mut best = 0usize;
    for (i, v) in component.iter().enumerate() {
        if v.abs() > component[best].abs() {
            best = i;
        }
    }
    if component[best] < 0.0 {
        for v in component.iter_mut() {
            *v = -*v;
        }
    }
}

/// Gram-Schmidt a standard basis vector against `existing`; returns a unit
/// vector orthogonal to all of them.
fn orthonormal_completion(existing: &[Vec<f64>], dim: usize) -> Vec<f64> {
    for axis in 0..dim {
        let mut candidate = vec![0.0; dim];
        candidate[axis] = 1.0;
        for basis in existing {
            let proj: f64 = candidate.iter().zip(basis).map(|(c, b)| c * b).sum();
            for (c, b) in candidate.iter_mut().zip(basis) {
                *c -= proj * b;
            }
        }
        let norm: f64 = candidate.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 1e-6 {
            for c in candidate.iter_mut() {
                *c /= norm;
            }
            return candidate;
        }
    }
    unreachable!("fewer than dim existing vectors always leave a completion")
}

/// Fit the top-3 principal components of mean-centered pooled embeddings.
///
/// Uses the D x D covariance eigendecomposition, or the n x n Gram trick
/// when n < D. Rank-deficient inputs get padded components and a
/// `rank_deficient` flag; fully constant input is an error.
pub fn fit_reducer(embeddings: &[Vec<f64>]) -> Result<ReducerModel, ReduceError> {
    let n = embeddings.len();
    let dim = embeddings.first().map(|e| e.len()).unwrap_or(0);
    if dim < 3 {
        return Err(ReduceError::DimensionTooSmall { dim });
    }
    for e in embeddings {
        if e.len() != dim {
            return Err(ReduceError::DimensionMismatch {
                expected: dim,
                found: e.len(),
            });
        }
    }
    let mut distinct: Vec<&Vec<f64>> = Vec::new();
    for e in embeddings {
        if !distinct.iter().any(|d| *d == e) {
            distinct.push(e);
            if distinct.len() >= 4 {
                break;
            }
        }
    }
    if distinct.len() < 4 {
        return Err(ReduceError::TooFewPoints {
            distinct: distinct.len(),
        });
    }

    let mut mean = vec![0.0; dim];
    for e in embeddings {
        for (m, v) in mean.iter_mut().zip(e) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }

    // Centered data matrix, n rows x dim cols.
    let centered = DMatrix::from_fn(n, dim, |i, j| embeddings[i][j] - mean[j]);

    let total_variance: f64 = centered.iter().map(|v| v * v).sum::<f64>() / n as f64;
    if total_variance <= 0.0 {
        return Err(ReduceError::ZeroVariance);
    }

    // Eigenvalues of the covariance scale as lambda; the Gram matrix
    // X X^T / n shares the nonzero spectrum and its eigenvectors map back
    // through X^T.
    let (mut eigvals, mut eigvecs): (Vec<f64>, Vec<Vec<f64>>) = if n <= dim {
        let gram = &centered * centered.transpose() / n as f64;
        let se = nalgebra::SymmetricEigen::new(gram);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| se.eigenvalues[b].partial_cmp(&se.eigenvalues[a]).unwrap());
        let mut vals = Vec::new();
        let mut vecs = Vec::new();
        for &idx in order.iter().take(3) {
            let lambda = se.eigenvalues[idx].max(0.0);
            vals.push(lambda);
            let u: DVector<f64> = se.eigenvectors.column(idx).into();
            let mut v = centered.transpose() * u;
            let norm = v.norm();
            if norm > 0.0 {
                v /= norm;
            }
            vecs.push(v.iter().copied().collect());
        }
        (vals, vecs)
    } else {
        let cov = centered.transpose() * &centered / n as f64;
        let se = nalgebra::SymmetricEigen::new(cov);
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| se.eigenvalues[b].partial_cmp(&se.eigenvalues[a]).unwrap());
        let mut vals = Vec::new();
        let mut vecs = Vec::new();
        for &idx in order.iter().take(3) {
            vals.push(se.eigenvalues[idx].max(0.0));
            vecs.push(se.eigenvectors.column(idx).iter().copied().collect());
        }
        (vals, vecs)
    };

    let mut rank_deficient = false;
    for i in 0..3 {
        if eigvals[i] <= RANK_TOL * total_variance {
            eigvals[i] = 0.0;
            eigvecs[i] = orthonormal_completion(&eigvecs[..i], dim);
            rank_deficient = true;
        }
    }
    for v in eigvecs.iter_mut() {
        fix_sign(v);
    }

    let ratios = [
        eigvals[0] / total_variance,
        eigvals[1] / total_variance,
        eigvals[2] / total_variance,
    ];
    let mut components = eigvecs.into_iter();
    Ok(ReducerModel {
        mean,
        components: [
            components.next().unwrap(),
            components.next().unwrap(),
            components.next().unwrap(),
        ],
        explained_variance_ratio: ratios,
        rank_deficient,
    })
}

/// Project one embedding through the model.
pub fn project(model: &ReducerModel, embedding: &[f64]) -> Result<Point3, ReduceError> {
    if embedding.len() != model.dim() {
        return Err(ReduceError::DimensionMismatch {
            expected: model.dim(),
            found: embedding.len(),
        });
    }
    let mut point = [0.0; 3];
    for (axis, component) in model.components.iter().enumerate() {
        point[axis] = component
            .iter()
            .zip(embedding.iter().zip(&model.mean))
            .map(|(c, (e, m))| c * (e - m))
            .sum();
    }
    Ok(point)
}

/// Project a trajectory's embeddings; order and timestamps are preserved.
pub fn transform(model: &ReducerModel, trajectory: &Trajectory) -> Result<ReducedTrajectory, ReduceError> {
    let mut points = Vec::with_capacity(trajectory.len());
    let mut timestamps_days = Vec::with_capacity(trajectory.len());
    for post in &trajectory.posts {
        points.push(project(model, &post.embedding)?);
        timestamps_days.push(post.timestamp_days());
    }
    Ok(ReducedTrajectory {
        user_id: trajectory.user_id.clone(),
        points,
        timestamps_days,
    })
}

/// Accept already-3D embeddings verbatim (external reducer output).
pub fn passthrough(trajectory: &Trajectory) -> Result<ReducedTrajectory, ReduceError> {
    let mut points = Vec::with_capacity(trajectory.len());
    let mut timestamps_days = Vec::with_capacity(trajectory.len());
    for post in &trajectory.posts {
        if post.embedding.len() != 3 {
            return Err(ReduceError::NotThreeDimensional {
                dim: post.embedding.len(),
            });
        }
        points.push([post.embedding[0], post.embedding[1], post.embedding[2]]);
        timestamps_days.push(post.timestamp_days());
    }
    Ok(ReducedTrajectory {
        user_id: trajectory.user_id.clone(),
        points,
        timestamps_days,
    })
}

fn write_row<W: Write>(writer: &mut W, label: &str, values: &[f64]) -> std::io::Result<()> {
    write!(writer, "{label}")?;
    for v in values {
        write!(writer, " {v:.17e}")?;
    }
    writeln!(writer)
}

/// Serialize a model to the flat text format (`pca3` header, then mean,
/// components, and ratios as decimal rows).
pub fn write_reducer_model<W: Write>(mut writer: W, model: &ReducerModel) -> Result<(), ReduceError> {
    writeln!(writer, "pca3 dim={} rank_deficient={}", model.dim(), u8::from(model.rank_deficient))?;
    write_row(&mut writer, "mean", &model.mean)?;
    for (i, component) in model.components.iter().enumerate() {
        write_row(&mut writer, &format!("component{i}"), component)?;
    }
    write_row(&mut writer, "explained_variance_ratio", &model.explained_variance_ratio)?;
    Ok(())
}

fn parse_row(line: &str, label: &str) -> Result<Vec<f64>, ReduceError> {
    let mut parts = line.split_whitespace();
    let found = parts.next().unwrap_or("");
    if found != label {
        return Err(ReduceError::MalformedModel {
            reason: format!("expected row {label:?}, found {found:?}"),
        });
    }
    parts
        .map(|tok| {
            tok.parse::<f64>().map_err(|e| ReduceError::MalformedModel {
                reason: format!("bad float {tok:?}: {e}"),
            })
        })
        .collect()
}

pub fn read_reducer_model<R: BufRead>(reader: R) -> Result<ReducerModel, ReduceError> {
    let lines: Vec<String> = reader.lines().collect::<Result<_, _>>()?;
    if lines.len() < 6 {
        return Err(ReduceError::MalformedModel {
            reason: format!("expected 6 rows, found {}", lines.len()),
        });
    }
    let header = &lines[0];
    if !header.starts_with("pca3") {
        return Err(ReduceError::MalformedModel {
            reason: format!("unknown header {header:?}"),
        });
    }
    let rank_deficient = header.contains("rank_deficient=1");
    let mean = parse_row(&lines[1], "mean")?;
    let c0 = parse_row(&lines[2], "component0")?;
    let c1 = parse_row(&lines[3], "component1")?;
    let c2 = parse_row(&lines[4], "component2")?;
    let ratios = parse_row(&lines[5], "explained_variance_ratio")?;
    if ratios.len() != 3 {
        return Err(ReduceError::MalformedModel {
            reason: format!("expected 3 variance ratios, found {}", ratios.len()),
        });
    }
    Ok(ReducerModel {
        mean,
        components: [c0, c1, c2],
        explained_variance_ratio: [ratios[0], ratios[1], ratios[2]],
        rank_deficient,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct ReducedRecord {
    user_id: String,
    timestamps_days: Vec<f64>,
    points: Vec<[f64; 3]>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    rank_deficient: bool,
}

/// Write reduced trajectories as line-delimited JSON, one user per line.
/// `rank_deficient` marks corpora whose reducer needed padding.
pub fn write_reduced<W: Write>(
    mut writer: W,
    trajectories: &[ReducedTrajectory],
    rank_deficient: bool,
) -> Result<(), ReduceError> {
    for t in trajectories {
        let record = ReducedRecord {
            user_id: t.user_id.clone(),
            timestamps_days: t.timestamps_days.clone(),
            points: t.points.clone(),
            rank_deficient,
        };
        serde_json::to_writer(&mut writer, &record).map_err(|e| ReduceError::MalformedModel {
            reason: e.to_string(),
        })?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Read a reduced trajectory file; returns the trajectories and whether the
/// corpus carried a rank-deficiency mark.
pub fn read_reduced<R: BufRead>(reader: R) -> Result<(Vec<ReducedTrajectory>, bool), ReduceError> {
    let mut out = Vec::new();
    let mut rank_deficient = false;
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ReducedRecord =
            serde_json::from_str(&line).map_err(|e| ReduceError::MalformedModel {
                reason: e.to_string(),
            })?;
        rank_deficient |= record.rank_deficient;
        if record.points.len() != record.timestamps_days.len() {
            return Err(ReduceError::MalformedModel {
                reason: format!(
                    "user {}: {} points but {} timestamps",
                    record.user_id,
                    record.points.len(),
                    record.timestamps_days.len()
                ),
            });
        }
        out.push(ReducedTrajectory {
            user_id: record.user_id,
            points: record.points,
            timestamps_days: record.timestamps_days,
        });
    }
    out.sort_by(|a, b| a.user_id.cmp(&b.user_id));
    Ok((out, rank_deficient))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Post;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn trajectory_from(embeddings: Vec<Vec<f64>>) -> Trajectory {
        Trajectory {
            user_id: "u".into(),
            posts: embeddings
                .into_iter()
                .enumerate()
                .map(|(i, embedding)| Post {
                    post_id: format!("p{i}"),
                    timestamp_secs: i as f64 * 86_400.0,
                    embedding,
                    text: None,
                    comment_count: None,
                })
                .collect(),
        }
    }

    #[test]
    fn lossless_when_data_is_three_dimensional() {
        // 8-dim embeddings confined to a 3D linear subspace.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let basis: Vec<Vec<f64>> = (0..3)
            .map(|axis| {
                let mut v = vec![0.0; 8];
                v[axis] = 1.0;
                v[axis + 3] = 0.5;
                v
            })
            .collect();
        let embeddings: Vec<Vec<f64>> = (0..40)
            .map(|_| {
                let coeffs: [f64; 3] = [rng.gen(), rng.gen(), rng.gen()];
                let mut e = vec![0.0; 8];
                for (c, b) in coeffs.iter().zip(&basis) {
                    for (ei, bi) in e.iter_mut().zip(b) {
                        *ei += c * bi;
                    }
                }
                e
            })
            .collect();
        let model = fit_reducer(&embeddings).unwrap();
        let total: f64 = model.explained_variance_ratio.iter().sum();
        assert!((total - 1.0).abs() < 1e-9, "ratios sum to {total}");
        assert!(!model.rank_deficient);
    }

    #[test]
    fn isotropic_gaussian_ratios_near_uniform() {
        // Monte-Carlo oracle: for an isotropic sample the top sample
        // eigenvalues stay inside the Marchenko-Pastur bulk edges.
        let (n, dim) = (2000usize, 768usize);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let normal = rand_distr::StandardNormal;
        let embeddings: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| rng.sample::<f64, _>(normal)).collect())
            .collect();
        let model = fit_reducer(&embeddings).unwrap();
        let gamma = (dim as f64 / n as f64).sqrt();
        let upper = (1.0 + gamma).powi(2) / dim as f64 * 1.05;
        let lower = (1.0 - gamma).powi(2) / dim as f64 * 0.95;
        for ratio in model.explained_variance_ratio {
            assert!(ratio < upper, "ratio {ratio} above MP edge {upper}");
            assert!(ratio > lower, "ratio {ratio} below MP edge {lower}");
        }
    }

    #[test]
    fn identical_embeddings_rejected() {
        let embeddings = vec![vec![1.0, 2.0, 3.0, 4.0]; 10];
        assert!(matches!(
            fit_reducer(&embeddings),
            Err(ReduceError::TooFewPoints { .. })
        ));
    }

    #[test]
    fn rank_two_data_flagged_and_padded() {
        // Points in a 2D subspace of 5D.
        let embeddings: Vec<Vec<f64>> = (0..20)
            .map(|i| {
                let a = i as f64;
                let b = (i as f64).sin();
                vec![a, b, a + b, 0.0, 0.0]
            })
            .collect();
        let model = fit_reducer(&embeddings).unwrap();
        assert!(model.rank_deficient);
        assert_eq!(model.explained_variance_ratio[2], 0.0);
        // padded component still orthonormal
        for i in 0..3 {
            for j in 0..3 {
                let d: f64 = model.components[i]
                    .iter()
                    .zip(&model.components[j])
                    .map(|(a, b)| a * b)
                    .sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((d - expected).abs() < 1e-8, "component {i}.{j} dot {d}");
            }
        }
    }

    #[test]
    fn zero_mean_zero_vector_projects_to_origin() {
        let mut model = fit_reducer(
            &(0..10)
                .map(|i| vec![(i as f64).cos(), (i as f64).sin(), i as f64, 1.0 / (i as f64 + 1.0)])
                .collect::<Vec<_>>(),
        )
        .unwrap();
        model.mean = vec![0.0; 4];
        let point = project(&model, &[0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(point, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn translation_of_corpus_leaves_projection_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let embeddings: Vec<Vec<f64>> = (0..12)
            .map(|_| (0..5).map(|_| rng.gen::<f64>()).collect())
            .collect();
        let shift: Vec<f64> = (0..5).map(|_| rng.gen::<f64>() * 10.0).collect();
        let shifted: Vec<Vec<f64>> = embeddings
            .iter()
            .map(|e| e.iter().zip(&shift).map(|(v, s)| v + s).collect())
            .collect();
        let model_a = fit_reducer(&embeddings).unwrap();
        let model_b = fit_reducer(&shifted).unwrap();
        for (e, s) in embeddings.iter().zip(&shifted) {
            let pa = project(&model_a, e).unwrap();
            let pb = project(&model_b, s).unwrap();
            for axis in 0..3 {
                assert!((pa[axis] - pb[axis]).abs() < 1e-9);
            }
        }
    }

    /// Independent oracle: power iteration with deflation on the explicitly
    /// assembled covariance of a small fixture, no shared code with the
    /// implementation path.
    fn oracle_projection(embeddings: &[Vec<f64>]) -> Vec<[f64; 3]> {
        let n = embeddings.len();
        let dim = embeddings[0].len();
        let mut mean = vec![0.0; dim];
        for e in embeddings {
            for (m, v) in mean.iter_mut().zip(e) {
                *m += v / n as f64;
            }
        }
        let mut cov = vec![vec![0.0; dim]; dim];
        for e in embeddings {
            for i in 0..dim {
                for j in 0..dim {
                    cov[i][j] += (e[i] - mean[i]) * (e[j] - mean[j]) / n as f64;
                }
            }
        }
        let mut components: Vec<Vec<f64>> = Vec::new();
        for _ in 0..3 {
            let mut v: Vec<f64> = (0..dim).map(|i| 1.0 + i as f64).collect();
            for _ in 0..20_000 {
                // deflate previously found directions
                for c in &components {
                    let proj: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
                    for (vi, ci) in v.iter_mut().zip(c) {
                        *vi -= proj * ci;
                    }
                }
                let mut next = vec![0.0; dim];
                for i in 0..dim {
                    for j in 0..dim {
                        next[i] += cov[i][j] * v[j];
                    }
                }
                let norm: f64 = next.iter().map(|x| x * x).sum::<f64>().sqrt();
                for x in next.iter_mut() {
                    *x /= norm;
                }
                v = next;
            }
            for c in &components {
                let proj: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi -= proj * ci;
                }
            }
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            for x in v.iter_mut() {
                *x /= norm;
            }
            super::fix_sign(&mut v);
            components.push(v);
        }
        embeddings
            .iter()
            .map(|e| {
                let mut p = [0.0; 3];
                for (axis, c) in components.iter().enumerate() {
                    p[axis] = c
                        .iter()
                        .zip(e.iter().zip(&mean))
                        .map(|(ci, (ei, mi))| ci * (ei - mi))
                        .sum();
                }
                p
            })
            .collect()
    }

    #[test]
    fn transform_matches_dense_linear_algebra_oracle() {
        // 10 x 5 fixture with well-separated spectrum so both routes
        // converge to the same components.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let embeddings: Vec<Vec<f64>> = (0..10)
            .map(|i| {
                let t = i as f64;
                vec![
                    8.0 * t + rng.gen::<f64>() * 0.1,
                    4.0 * (t * 0.7).sin() + rng.gen::<f64>() * 0.1,
                    2.0 * (t * 1.3).cos() + rng.gen::<f64>() * 0.1,
                    0.5 * t.sqrt(),
                    rng.gen::<f64>() * 0.05,
                ]
            })
            .collect();
        let expected = oracle_projection(&embeddings);
        let model = fit_reducer(&embeddings).unwrap();
        let trajectory = trajectory_from(embeddings);
        let reduced = transform(&model, &trajectory).unwrap();
        for (got, want) in reduced.points.iter().zip(&expected) {
            for axis in 0..3 {
                assert!(
                    (got[axis] - want[axis]).abs() < 1e-6,
                    "axis {axis}: {} vs {}",
                    got[axis],
                    want[axis]
                );
            }
        }
    }

    #[test]
    fn fit_is_deterministic() {
        let embeddings: Vec<Vec<f64>> = (0..30)
            .map(|i| {
                let t = i as f64;
                vec![t, t.sin(), t.cos(), t * t * 0.01, 1.0 / (t + 1.0)]
            })
            .collect();
        let a = fit_reducer(&embeddings).unwrap();
        let b = fit_reducer(&embeddings).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dimension_mismatch_on_transform() {
        let embeddings: Vec<Vec<f64>> = (0..10)
            .map(|i| vec![i as f64, (i * i) as f64, (i as f64).sin(), 1.0])
            .collect();
        let model = fit_reducer(&embeddings).unwrap();
        let bad = trajectory_from(vec![vec![1.0, 2.0, 3.0]]);
        assert!(matches!(
            transform(&model, &bad),
            Err(ReduceError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn model_file_round_trip() {
        let embeddings: Vec<Vec<f64>> = (0..10)
            .map(|i| vec![i as f64, (i as f64).sin(), (i as f64 * 0.5).cos(), i as f64 * 0.1])
            .collect();
        let model = fit_reducer(&embeddings).unwrap();
        let mut buf = Vec::new();
        write_reducer_model(&mut buf, &model).unwrap();
        let restored = read_reducer_model(buf.as_slice()).unwrap();
        assert_eq!(model, restored);
    }

    #[test]
    fn reduced_file_round_trip() {
        let reduced = vec![ReducedTrajectory {
            user_id: "u1".into(),
            points: vec![[0.1, 0.2, 0.3], [0.4, 0.5, 0.6]],
            timestamps_days: vec![0.0, 1.5],
        }];
        let mut buf = Vec::new();
        write_reduced(&mut buf, &reduced, true).unwrap();
        let (restored, rank_deficient) = read_reduced(buf.as_slice()).unwrap();
        assert_eq!(reduced, restored);
        assert!(rank_deficient);
    }
}
