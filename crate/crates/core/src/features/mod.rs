//! The three trajectory features: Loop Persistence, Flare Index, and
//! Semantic Recovery Velocity, plus the early-post centroid they hinge on.

mod hull;

pub use hull::convex_hull_volume;

use std::collections::BTreeSet;
use std::fmt;
use std::io::{BufRead, Write};

use thiserror::Error;

use crate::geometry::{self, Point3};
use crate::homology::{diagram_for_points, HomologyConfig, HomologyError, PersistenceDiagram};
use crate::reduce::ReducedTrajectory;

/// Smallest allowed gap between consecutive posts: one minute, in days.
pub const MIN_DT_DAYS: f64 = 1.0 / 1440.0;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("point {index} has a non-finite coordinate")]
    NonFinitePoint { index: usize },
    #[error("trajectory has {len} points, need at least {need}")]
    TrajectoryTooShort { len: usize, need: usize },
    #[error("k must be >= 1, got {k}")]
    BadK { k: usize },
    #[error("homology failed: {0}")]
    Homology(#[from] HomologyError),
    #[error("malformed feature table: {reason}")]
    MalformedTable { reason: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Degenerate-input markers carried alongside feature values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Flag {
    HullDegenerate,
    DtClamped,
    RankDeficient,
    /// A loop survived past the filtration cutoff and was excluded from LP.
    LpTruncated,
}

impl Flag {
    pub fn name(&self) -> &'static str {
        match self {
            Flag::HullDegenerate => "hull_degenerate",
            Flag::DtClamped => "dt_clamped",
            Flag::RankDeficient => "rank_deficient",
            Flag::LpTruncated => "lp_truncated",
        }
    }

    pub fn from_name(name: &str) -> Option<Flag> {
        match name {
            "hull_degenerate" => Some(Flag::HullDegenerate),
            "dt_clamped" => Some(Flag::DtClamped),
            "rank_deficient" => Some(Flag::RankDeficient),
            "lp_truncated" => Some(Flag::LpTruncated),
            _ => None,
        }
    }

    pub const ALL: [Flag; 4] = [
        Flag::HullDegenerate,
        Flag::DtClamped,
        Flag::RankDeficient,
        Flag::LpTruncated,
    ];
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-user feature values with their degeneracy flags.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub user_id: String,
    pub lp: f64,
    pub fi: f64,
    pub srv: f64,
    pub trauma_center: Point3,
    pub n_posts: usize,
    pub span_days: f64,
    pub flags: BTreeSet<Flag>,
}

/// Sum of finite H1 interval lengths. `truncated` is set when an infinite
/// H1 interval was present (only possible when the filtration was cut
/// below the enclosing radius) and excluded from the sum.
pub fn loop_persistence(diagram: &PersistenceDiagram) -> (f64, bool) {
    let mut total = 0.0;
    let mut truncated = false;
    for interval in diagram.in_dim(1) {
        if interval.is_infinite() {
            truncated = true;
        } else {
            total += interval.persistence();
        }
    }
    (total, truncated)
}

/// Convex-hull volume over axis-aligned bounding-box volume, in [0, 1].
/// Returns 0 with `degenerate` set when either volume vanishes.
pub fn flare_index(points: &[Point3]) -> Result<(f64, bool), FeatureError> {
    if points.is_empty() {
        return Err(FeatureError::TrajectoryTooShort { len: 0, need: 1 });
    }
    let hull = convex_hull_volume(points)?;
    let (lo, hi) = geometry::bounding_box(points);
    let bbox: f64 = (0..3).map(|axis| hi[axis] - lo[axis]).product();
    if bbox == 0.0 || hull == 0.0 {
        return Ok((0.0, true));
    }
    Ok(((hull / bbox).min(1.0), false))
}

/// Centroid of the first `k` reduced points.
pub fn trauma_center(reduced: &ReducedTrajectory, k: usize) -> Result<Point3, FeatureError> {
    if k < 1 {
        return Err(FeatureError::BadK { k });
    }
    if reduced.len() < k {
        return Err(FeatureError::TrajectoryTooShort {
            len: reduced.len(),
            need: k,
        });
    }
    let mut center = [0.0; 3];
    for point in &reduced.points[..k] {
        center = geometry::add(center, *point);
    }
    Ok(geometry::scale(center, 1.0 / k as f64))
}

/// Time-normalized mean change in distance from the trauma center, in
/// reduced-space units per day. Zero-length gaps are clamped to one minute
/// and flagged.
pub fn semantic_recovery_velocity(
    reduced: &ReducedTrajectory,
    k: usize,
) -> Result<(f64, bool), FeatureError> {
    let n = reduced.len();
    if n < k + 1 {
        return Err(FeatureError::TrajectoryTooShort { len: n, need: k + 1 });
    }
    let center = trauma_center(reduced, k)?;
    let mut sum = 0.0;
    let mut clamped = false;
    for i in k..n {
        let current = geometry::distance(reduced.points[i], center);
        let previous = geometry::distance(reduced.points[i - 1], center);
        let mut dt = reduced.timestamps_days[i] - reduced.timestamps_days[i - 1];
        if dt < MIN_DT_DAYS {
            dt = MIN_DT_DAYS;
            clamped = true;
        }
        sum += (current - previous) / dt;
    }
    Ok((sum / (n - k) as f64, clamped))
}

/// Compute the full feature vector for one trajectory. LP is taken over
/// the whole point cloud; homology runs in dimension >= 1 regardless of
/// the configured cap so H1 is always available.
pub fn extract_features(
    reduced: &ReducedTrajectory,
    k: usize,
    config: &HomologyConfig,
) -> Result<FeatureVector, FeatureError> {
    let homology_config = HomologyConfig {
        max_homology_dim: config.max_homology_dim.max(1),
        max_eps: config.max_eps,
    };
    let diagram = diagram_for_points(&reduced.points, &homology_config)?;
    let (lp, truncated) = loop_persistence(&diagram);
    let (fi, hull_degenerate) = flare_index(&reduced.points)?;
    let (srv, dt_clamped) = semantic_recovery_velocity(reduced, k)?;
    let center = trauma_center(reduced, k)?;

    let mut flags = BTreeSet::new();
    if hull_degenerate {
        flags.insert(Flag::HullDegenerate);
    }
    if dt_clamped {
        flags.insert(Flag::DtClamped);
    }
    if truncated {
        flags.insert(Flag::LpTruncated);
    }

    Ok(FeatureVector {
        user_id: reduced.user_id.clone(),
        lp,
        fi,
        srv,
        trauma_center: center,
        n_posts: reduced.len(),
        span_days: reduced.span_days(),
        flags,
    })
}

fn flags_to_string(flags: &BTreeSet<Flag>) -> String {
    flags
        .iter()
        .map(Flag::name)
        .collect::<Vec<_>>()
        .join(";")
}

/// Write the feature table: `user_id,lp,fi,srv,n_posts,span_days,flags`.
pub fn write_feature_table<W: Write>(
    mut writer: W,
    features: &[FeatureVector],
) -> Result<(), FeatureError> {
    writeln!(writer, "user_id,lp,fi,srv,n_posts,span_days,flags")?;
    for fv in features {
        writeln!(
            writer,
            "{},{},{},{},{},{},{}",
            fv.user_id,
            fv.lp,
            fv.fi,
            fv.srv,
            fv.n_posts,
            fv.span_days,
            flags_to_string(&fv.flags)
        )?;
    }
    Ok(())
}

/// A parsed feature table: named numeric columns per user. A `flags`
/// column expands into 0/1 indicator columns named `flag_<name>`.
#[derive(Debug, Clone)]
pub struct FeatureTable {
    pub columns: Vec<String>,
    pub rows: Vec<(String, Vec<f64>)>,
}

impl FeatureTable {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

pub fn read_feature_table<R: BufRead>(reader: R) -> Result<FeatureTable, FeatureError> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| FeatureError::MalformedTable {
            reason: "empty file".into(),
        })??;
    let header_fields: Vec<String> = header.split(',').map(str::to_string).collect();
    if header_fields.first().map(String::as_str) != Some("user_id") {
        return Err(FeatureError::MalformedTable {
            reason: format!("first column must be user_id, found {:?}", header_fields.first()),
        });
    }
    let flags_at = header_fields.iter().position(|c| c == "flags");

    let mut columns: Vec<String> = header_fields[1..]
        .iter()
        .filter(|c| c.as_str() != "flags")
        .cloned()
        .collect();
    if flags_at.is_some() {
        for flag in Flag::ALL {
            columns.push(format!("flag_{}", flag.name()));
        }
    }

    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != header_fields.len() {
            return Err(FeatureError::MalformedTable {
                reason: format!(
                    "row {}: {} fields, header has {}",
                    idx + 2,
                    fields.len(),
                    header_fields.len()
                ),
            });
        }
        let user_id = fields[0].to_string();
        let mut values = Vec::with_capacity(columns.len());
        for (field, name) in fields[1..].iter().zip(&header_fields[1..]) {
            if name == "flags" {
                continue;
            }
            let value: f64 = field.parse().map_err(|_| FeatureError::MalformedTable {
                reason: format!("row {}: bad value {:?} in column {}", idx + 2, field, name),
            })?;
            values.push(value);
        }
        if let Some(at) = flags_at {
            let set: BTreeSet<&str> = fields[at].split(';').filter(|s| !s.is_empty()).collect();
            for flag in Flag::ALL {
                values.push(if set.contains(flag.name()) { 1.0 } else { 0.0 });
            }
        }
        rows.push((user_id, values));
    }
    Ok(FeatureTable { columns, rows })
}
