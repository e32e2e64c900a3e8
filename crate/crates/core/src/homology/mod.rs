//! Vietoris-Rips persistent homology of 3D point clouds.
//!
//! The pipeline is: [`distance_matrix`] -> [`vietoris_rips`] ->
//! [`persistence`]. Homology is computed over the two-element field in
//! dimensions 0 (components), 1 (loops), and 2 (voids). A definitional
//! rank-based oracle ([`persistence_bruteforce`]) is provided for small
//! inputs so the reduction can be cross-checked.

mod bruteforce;
mod persistence;
mod rips;

pub use bruteforce::persistence_bruteforce;
pub use persistence::persistence;
pub use rips::vietoris_rips;

use std::io::{BufRead, Write};

use arrayvec::ArrayVec;
use thiserror::Error;

use crate::geometry::{self, Point3};
use crate::reduce::ReducedTrajectory;

#[derive(Debug, Error)]
pub enum HomologyError {
    #[error("point {index} has a non-finite coordinate")]
    NonFinitePoint { index: usize },
    #[error("need at least one point")]
    Empty,
    #[error("max homology dimension must be 0, 1, or 2, got {dim}")]
    DimensionTooLarge { dim: u8 },
    #[error("brute-force oracle supports at most 8 points, got {n}")]
    TooLargeForOracle { n: usize },
    #[error("window must be >= 4 and stride >= 1, got window {window}, stride {stride}")]
    BadWindow { window: usize, stride: usize },
    #[error("trajectory has {len} points, shorter than window {window}")]
    TrajectoryTooShort { len: usize, window: usize },
    #[error("malformed diagram file: {reason}")]
    MalformedDiagram { reason: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Symmetric Euclidean distance matrix with a zero diagonal.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    /// Smallest radius at which some point is within reach of every other
    /// point: min over i of max over j of d(i, j). Beyond this scale the
    /// complex is a cone and no new finite feature appears.
    pub fn enclosing_radius(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| self.get(i, j))
                    .fold(0.0_f64, f64::max)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Pairwise Euclidean distances; exact symmetry by construction.
pub fn distance_matrix(points: &[Point3]) -> Result<DistanceMatrix, HomologyError> {
    if points.is_empty() {
        return Err(HomologyError::Empty);
    }
    for (index, p) in points.iter().enumerate() {
        if !geometry::is_finite(*p) {
            return Err(HomologyError::NonFinitePoint { index });
        }
    }
    let n = points.len();
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = geometry::distance(points[i], points[j]);
            entries[i * n + j] = d;
            entries[j * n + i] = d;
        }
    }
    Ok(DistanceMatrix { n, entries })
}

/// A simplex of dimension 0..=3 with its filtration value (the largest
/// pairwise distance among its vertices).
#[derive(Debug, Clone, PartialEq)]
pub struct Simplex {
    pub vertices: ArrayVec<u32, 4>,
    pub value: f64,
}

impl Simplex {
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }
}

/// Simplices of a Vietoris-Rips filtration, sorted by
/// (filtration value, dimension, lexicographic vertices) so that every
/// face precedes its cofaces and reduction is deterministic.
#[derive(Debug, Clone)]
pub struct Filtration {
    pub(crate) simplices: Vec<Simplex>,
    pub(crate) n_points: usize,
    pub(crate) max_homology_dim: u8,
}

impl Filtration {
    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn max_homology_dim(&self) -> u8 {
        self.max_homology_dim
    }
}

/// One persistence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub birth: f64,
    /// `f64::INFINITY` for essential classes.
    pub death: f64,
    pub dim: u8,
}

impl Interval {
    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    pub fn is_infinite(&self) -> bool {
        self.death.is_infinite()
    }
}

/// Multiset of (birth, death, dim) intervals, sorted by
/// (dim, birth, death).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PersistenceDiagram {
    pub intervals: Vec<Interval>,
}

impl PersistenceDiagram {
    /// Build a diagram from intervals, sorting into the canonical order.
    pub fn canonicalize(mut intervals: Vec<Interval>) -> Self {
        intervals.sort_by(|a, b| {
            (a.dim, a.birth, a.death)
                .partial_cmp(&(b.dim, b.birth, b.death))
                .expect("interval endpoints are never NaN")
        });
        Self { intervals }
    }

    pub fn in_dim(&self, dim: u8) -> impl Iterator<Item = &Interval> {
        self.intervals.iter().filter(move |iv| iv.dim == dim)
    }
}

/// Number of alive features of one dimension at each grid scale, using the
/// half-open convention birth <= eps < death.
#[derive(Debug, Clone, PartialEq)]
pub struct BettiCurve {
    pub dim: u8,
    pub grid: Vec<f64>,
    pub counts: Vec<usize>,
}

pub fn betti_curve(diagram: &PersistenceDiagram, dim: u8, grid: &[f64]) -> BettiCurve {
    debug_assert!(grid.windows(2).all(|w| w[0] <= w[1]), "grid must be sorted");
    let counts = grid
        .iter()
        .map(|&eps| {
            diagram
                .in_dim(dim)
                .filter(|iv| iv.birth <= eps && eps < iv.death)
                .count()
        })
        .collect();
    BettiCurve {
        dim,
        grid: grid.to_vec(),
        counts,
    }
}

/// Settings for a single diagram computation.
#[derive(Debug, Clone, Copy)]
pub struct HomologyConfig {
    pub max_homology_dim: u8,
    /// `None` selects the enclosing radius of the input cloud.
    pub max_eps: Option<f64>,
}

impl Default for HomologyConfig {
    fn default() -> Self {
        Self {
            max_homology_dim: 2,
            max_eps: None,
        }
    }
}

/// Distance matrix, filtration, and reduction in one call.
pub fn diagram_for_points(
    points: &[Point3],
    config: &HomologyConfig,
) -> Result<PersistenceDiagram, HomologyError> {
    if config.max_homology_dim > 2 {
        return Err(HomologyError::DimensionTooLarge {
            dim: config.max_homology_dim,
        });
    }
    let dm = distance_matrix(points)?;
    let max_eps = config.max_eps.unwrap_or_else(|| dm.enclosing_radius());
    let filtration = vietoris_rips(&dm, config.max_homology_dim, max_eps);
    Ok(persistence(&filtration))
}

/// Persistence diagrams over sliding windows of consecutive points.
///
/// Window starts advance by `stride`; the final window is clamped so the
/// last point is always covered.
pub fn sliding_window_diagrams(
    reduced: &ReducedTrajectory,
    window: usize,
    stride: usize,
    config: &HomologyConfig,
) -> Result<Vec<(usize, PersistenceDiagram)>, HomologyError> {
    if window < 4 || stride < 1 {
        return Err(HomologyError::BadWindow { window, stride });
    }
    let len = reduced.len();
    if len < window {
        return Err(HomologyError::TrajectoryTooShort { len, window });
    }
    let mut starts: Vec<usize> = (0..)
        .map(|i| i * stride)
        .take_while(|s| s + window <= len)
        .collect();
    if *starts.last().expect("at least start 0") + window < len {
        starts.push(len - window);
    }
    starts
        .into_iter()
        .map(|start| {
            let diagram = diagram_for_points(&reduced.points[start..start + window], config)?;
            Ok((start, diagram))
        })
        .collect()
}

/// Write a diagram as text, one `dim birth death` triple per line with 17
/// significant digits; infinite deaths are written as `inf`.
pub fn write_diagram<W: Write>(mut writer: W, diagram: &PersistenceDiagram) -> Result<(), HomologyError> {
    for iv in &diagram.intervals {
        if iv.death.is_infinite() {
            writeln!(writer, "{} {:.16e} inf", iv.dim, iv.birth)?;
        } else {
            writeln!(writer, "{} {:.16e} {:.16e}", iv.dim, iv.birth, iv.death)?;
        }
    }
    Ok(())
}

pub fn read_diagram<R: BufRead>(reader: R) -> Result<PersistenceDiagram, HomologyError> {
    let mut intervals = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(HomologyError::MalformedDiagram {
                reason: format!("line {}: expected 3 fields, found {}", idx + 1, fields.len()),
            });
        }
        let parse_err = |what: &str| HomologyError::MalformedDiagram {
            reason: format!("line {}: bad {what}", idx + 1),
        };
        let dim: u8 = fields[0].parse().map_err(|_| parse_err("dimension"))?;
        let birth: f64 = fields[1].parse().map_err(|_| parse_err("birth"))?;
        let death: f64 = if fields[2] == "inf" {
            f64::INFINITY
        } else {
            fields[2].parse().map_err(|_| parse_err("death"))?
        };
        intervals.push(Interval { birth, death, dim });
    }
    Ok(PersistenceDiagram::canonicalize(intervals))
}

/// Write a Betti curve as two-column `eps count` text.
pub fn write_betti_curve<W: Write>(mut writer: W, curve: &BettiCurve) -> Result<(), HomologyError> {
    for (eps, count) in curve.grid.iter().zip(&curve.counts) {
        writeln!(writer, "{eps:.16e} {count}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn unit_square() -> Vec<Point3> {
        vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
            [0.0, 1.0, 0.0],
        ]
    }

    #[test]
    fn unit_square_distances() {
        let dm = distance_matrix(&unit_square()).unwrap();
        assert_eq!(dm.get(0, 1), 1.0);
        assert_eq!(dm.get(1, 2), 1.0);
        assert_eq!(dm.get(0, 2), 2.0_f64.sqrt());
        assert_eq!(dm.get(1, 3), 2.0_f64.sqrt());
        for i in 0..4 {
            assert_eq!(dm.get(i, i), 0.0);
            for j in 0..4 {
                assert_eq!(dm.get(i, j), dm.get(j, i));
            }
        }
    }

    #[test]
    fn single_point_matrix() {
        let dm = distance_matrix(&[[1.0, 2.0, 3.0]]).unwrap();
        assert_eq!(dm.len(), 1);
        assert_eq!(dm.get(0, 0), 0.0);
        assert_eq!(dm.enclosing_radius(), 0.0);
    }

    #[test]
    fn random_points_match_elementwise_oracle() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let points: Vec<Point3> = (0..10)
            .map(|_| [rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()])
            .collect();
        let dm = distance_matrix(&points).unwrap();
        for i in 0..10 {
            for j in 0..10 {
                let expected = ((points[i][0] - points[j][0]).powi(2)
                    + (points[i][1] - points[j][1]).powi(2)
                    + (points[i][2] - points[j][2]).powi(2))
                .sqrt();
                assert!((dm.get(i, j) - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn non_finite_point_rejected() {
        let result = distance_matrix(&[[0.0, 0.0, 0.0], [f64::NAN, 0.0, 0.0]]);
        assert!(matches!(result, Err(HomologyError::NonFinitePoint { index: 1 })));
    }

    #[test]
    fn betti_curve_square() {
        let diagram = diagram_for_points(&unit_square(), &HomologyConfig::default()).unwrap();
        let curve = betti_curve(&diagram, 1, &[0.5, 1.2, 1.5]);
        assert_eq!(curve.counts, vec![0, 1, 0]);
    }

    #[test]
    fn betti_curve_empty_dim_is_zero() {
        let diagram = diagram_for_points(&unit_square(), &HomologyConfig::default()).unwrap();
        let curve = betti_curve(&diagram, 2, &[0.1, 1.0, 10.0]);
        assert_eq!(curve.counts, vec![0, 0, 0]);
    }

    #[test]
    fn window_starts_with_clamping() {
        let reduced = ReducedTrajectory {
            user_id: "u".into(),
            points: (0..10).map(|i| [i as f64, 0.0, 0.0]).collect(),
            timestamps_days: (0..10).map(|i| i as f64).collect(),
        };
        let config = HomologyConfig {
            max_homology_dim: 1,
            max_eps: None,
        };
        let starts: Vec<usize> = sliding_window_diagrams(&reduced, 5, 5, &config)
            .unwrap()
            .into_iter()
            .map(|(s, _)| s)
            .collect();
        assert_eq!(starts, vec![0, 5]);

        let starts: Vec<usize> = sliding_window_diagrams(&reduced, 5, 2, &config)
            .unwrap()
            .into_iter()
            .map(|(s, _)| s)
            .collect();
        assert_eq!(starts, vec![0, 2, 4, 5]);
    }

    #[test]
    fn constant_trajectory_windows_have_only_infinite_bar() {
        let reduced = ReducedTrajectory {
            user_id: "u".into(),
            points: vec![[1.0, 1.0, 1.0]; 12],
            timestamps_days: (0..12).map(|i| i as f64).collect(),
        };
        let config = HomologyConfig::default();
        for (_, diagram) in sliding_window_diagrams(&reduced, 5, 5, &config).unwrap() {
            assert_eq!(diagram.intervals.len(), 1);
            let iv = diagram.intervals[0];
            assert_eq!(iv.dim, 0);
            assert_eq!(iv.birth, 0.0);
            assert!(iv.is_infinite());
        }
    }

    #[test]
    fn window_shorter_than_trajectory_errors() {
        let reduced = ReducedTrajectory {
            user_id: "u".into(),
            points: vec![[0.0; 3]; 3],
            timestamps_days: vec![0.0, 1.0, 2.0],
        };
        assert!(matches!(
            sliding_window_diagrams(&reduced, 5, 1, &HomologyConfig::default()),
            Err(HomologyError::TrajectoryTooShort { .. })
        ));
        assert!(matches!(
            sliding_window_diagrams(&reduced, 3, 1, &HomologyConfig::default()),
            Err(HomologyError::BadWindow { .. })
        ));
    }

    #[test]
    fn diagram_file_round_trip() {
        let diagram = diagram_for_points(&unit_square(), &HomologyConfig::default()).unwrap();
        let mut buf = Vec::new();
        write_diagram(&mut buf, &diagram).unwrap();
        let restored = read_diagram(buf.as_slice()).unwrap();
        assert_eq!(diagram, restored);
    }
}
