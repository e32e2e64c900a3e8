//! Parsing, validation, and filtering of longitudinal post records.
//!
//! Input is UTF-8 line-delimited JSON, one record per line with fields
//! `user_id`, `post_id`, `timestamp`, `embedding`, and optionally `text`
//! and `comment_count`. Timestamps are accepted as epoch seconds (integer
//! or fractional) or as ISO-8601 strings and normalized internally to
//! fractional epoch seconds; downstream formulas work in fractional days.
//!
//! The canonical trajectory file written by [`write_corpus`] uses the same
//! record schema with numeric timestamps, records grouped by user and
//! sorted by time, users sorted by id. Parsing a canonical file yields the
//! same trajectories (round-trip).

use std::collections::BTreeMap;
use std::collections::HashSet;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

pub const SECONDS_PER_DAY: f64 = 86_400.0;

/// One timestamped document with its embedding vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Post {
    pub post_id: String,
    /// Fractional epoch seconds (UTC).
    pub timestamp_secs: f64,
    pub embedding: Vec<f64>,
    pub text: Option<String>,
    pub comment_count: Option<u64>,
}

impl Post {
    /// Timestamp as fractional days since the epoch.
    pub fn timestamp_days(&self) -> f64 {
        self.timestamp_secs / SECONDS_PER_DAY
    }
}

/// A user's chronologically ordered posts.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub user_id: String,
    pub posts: Vec<Post>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    /// Time between first and last post, in days.
    pub fn span_days(&self) -> f64 {
        match (self.posts.first(), self.posts.last()) {
            (Some(first), Some(last)) => last.timestamp_days() - first.timestamp_days(),
            _ => 0.0,
        }
    }

    /// Calendar year of the first post (UTC).
    pub fn first_post_year(&self) -> Option<i32> {
        self.posts.first().map(|p| year_of_secs(p.timestamp_secs))
    }
}

/// Calendar year (UTC) for a fractional epoch-second timestamp.
pub fn year_of_secs(secs: f64) -> i32 {
    use chrono::Datelike;
    chrono::DateTime::from_timestamp(secs.floor() as i64, 0)
        .map(|dt| dt.year())
        .unwrap_or(1970)
}

/// Inclusion filter: minimum post count and minimum time span.
#[derive(Debug, Clone, Copy)]
pub struct CorpusFilter {
    min_posts: usize,
    min_span_days: f64,
}

impl CorpusFilter {
    pub const DEFAULT_MIN_POSTS: usize = 10;
    pub const DEFAULT_MIN_SPAN_DAYS: f64 = 90.0;

    pub fn new(min_posts: usize, min_span_days: f64) -> Result<Self, IngestError> {
        if min_posts < 2 {
            return Err(IngestError::InvalidFilter {
                reason: format!("min_posts must be >= 2, got {min_posts}"),
            });
        }
        if !(min_span_days > 0.0) {
            return Err(IngestError::InvalidFilter {
                reason: format!("min_span_days must be positive, got {min_span_days}"),
            });
        }
        Ok(Self {
            min_posts,
            min_span_days,
        })
    }

    pub fn min_posts(&self) -> usize {
        self.min_posts
    }

    pub fn min_span_days(&self) -> f64 {
        self.min_span_days
    }

    pub fn retains(&self, trajectory: &Trajectory) -> bool {
        trajectory.len() >= self.min_posts && trajectory.span_days() >= self.min_span_days
    }
}

impl Default for CorpusFilter {
    fn default() -> Self {
        Self {
            min_posts: Self::DEFAULT_MIN_POSTS,
            min_span_days: Self::DEFAULT_MIN_SPAN_DAYS,
        }
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: malformed record: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: embedding dimension {found} differs from corpus dimension {expected}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: embedding contains a non-finite value")]
    NonFinite { line: usize },
    #[error("line {line}: duplicate post_id {post_id:?} for user {user_id:?}")]
    DuplicatePostId {
        line: usize,
        user_id: String,
        post_id: String,
    },
    #[error("invalid filter: {reason}")]
    InvalidFilter { reason: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Deserialize)]
struct RawRecord {
    user_id: String,
    post_id: String,
    timestamp: Value,
    embedding: Vec<f64>,
    #[serde(default)]
    text: Option<String>,
    #[serde(default)]
    comment_count: Option<u64>,
}

#[derive(Debug, Serialize)]
struct OutRecord<'a> {
    user_id: &'a str,
    post_id: &'a str,
    timestamp: f64,
    embedding: &'a [f64],
    #[serde(skip_serializing_if = "Option::is_none")]
    text: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    comment_count: Option<u64>,
}

fn parse_timestamp(value: &Value, line: usize) -> Result<f64, IngestError> {
    match value {
        Value::Number(n) => n.as_f64().ok_or_else(|| IngestError::Malformed {
            line,
            reason: format!("timestamp {n} is not representable as a float"),
        }),
        Value::String(s) => {
            if let Ok(dt) = chrono::DateTime::parse_from_rfc3339(s) {
                return Ok(dt.timestamp() as f64 + f64::from(dt.timestamp_subsec_nanos()) * 1e-9);
            }
            if let Ok(date) = chrono::NaiveDate::parse_from_str(s, "%Y-%m-%d") {
                let dt = date.and_hms_opt(0, 0, 0).expect("midnight is valid");
                return Ok(dt.and_utc().timestamp() as f64);
            }
            Err(IngestError::Malformed {
                line,
                reason: format!("unrecognized timestamp {s:?} (expected epoch seconds or ISO-8601)"),
            })
        }
        other => Err(IngestError::Malformed {
            line,
            reason: format!("timestamp must be a number or string, got {other}"),
        }),
    }
}

/// Parse a line-delimited record stream into per-user trajectories.
///
/// Records are grouped by `user_id` and stable-sorted by timestamp, so
/// same-timestamp posts keep their input order. The returned trajectories
/// are sorted by user id. Embedding dimension must be identical across
/// the whole corpus.
pub fn parse_corpus<R: BufRead>(reader: R) -> Result<Vec<Trajectory>, IngestError> {
    let mut users: BTreeMap<String, Vec<Post>> = BTreeMap::new();
    let mut seen_ids: HashSet<(String, String)> = HashSet::new();
    let mut corpus_dim: Option<usize> = None;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: RawRecord =
            serde_json::from_str(&line).map_err(|e| IngestError::Malformed {
                line: line_no,
                reason: e.to_string(),
            })?;

        match corpus_dim {
            None => corpus_dim = Some(record.embedding.len()),
            Some(expected) if expected != record.embedding.len() => {
                return Err(IngestError::DimensionMismatch {
                    line: line_no,
                    expected,
                    found: record.embedding.len(),
                });
            }
            _ => {}
        }
        if record.embedding.iter().any(|v| !v.is_finite()) {
            return Err(IngestError::NonFinite { line: line_no });
        }
        if !seen_ids.insert((record.user_id.clone(), record.post_id.clone())) {
            return Err(IngestError::DuplicatePostId {
                line: line_no,
                user_id: record.user_id,
                post_id: record.post_id,
            });
        }

        let timestamp_secs = parse_timestamp(&record.timestamp, line_no)?;
        users.entry(record.user_id).or_default().push(Post {
            post_id: record.post_id,
            timestamp_secs,
            embedding: record.embedding,
            text: record.text,
            comment_count: record.comment_count,
        });
    }

    Ok(users
        .into_iter()
        .map(|(user_id, mut posts)| {
            posts.sort_by(|a, b| {
                a.timestamp_secs
                    .partial_cmp(&b.timestamp_secs)
                    .expect("timestamps are finite")
            });
            Trajectory { user_id, posts }
        })
        .collect())
}

/// Write trajectories in the canonical line-delimited format.
pub fn write_corpus<W: Write>(mut writer: W, trajectories: &[Trajectory]) -> Result<(), IngestError> {
    for trajectory in trajectories {
        for post in &trajectory.posts {
            let record = OutRecord {
                user_id: &trajectory.user_id,
                post_id: &post.post_id,
                timestamp: post.timestamp_secs,
                embedding: &post.embedding,
                text: post.text.as_deref(),
                comment_count: post.comment_count,
            };
            serde_json::to_writer(&mut writer, &record).map_err(|e| IngestError::Malformed {
                line: 0,
                reason: e.to_string(),
            })?;
            writer.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// Retain exactly the trajectories meeting the filter's post-count and
/// time-span thresholds.
pub fn apply_filter(trajectories: Vec<Trajectory>, filter: &CorpusFilter) -> Vec<Trajectory> {
    trajectories
        .into_iter()
        .filter(|t| filter.retains(t))
        .collect()
}
