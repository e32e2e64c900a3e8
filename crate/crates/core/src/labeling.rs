//! Proxy improvement labels from text patterns and posting behavior, and
//! chance-corrected agreement between label sources.
//!
//! Pattern labeling ships with a small default phrase list; real analyses
//! should supply their own pattern file (one case-insensitive regex per
//! line, `#` comments). Negation ("not feeling better") is not handled by
//! the default matcher.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use regex::{Regex, RegexBuilder};
use thiserror::Error;

use crate::ingest::Trajectory;

#[derive(Debug, Error)]
pub enum LabelError {
    #[error("pattern list is empty")]
    EmptyPatterns,
    #[error("pattern {index} failed to compile: {source}")]
    BadPattern {
        index: usize,
        source: regex::Error,
    },
    #[error("trajectory has {len} posts, need at least {need}")]
    TooFewPosts { len: usize, need: usize },
    #[error("trajectory spans {span:.3} days, need at least {need}")]
    SpanTooShort { span: f64, need: f64 },
    #[error("label vectors have different lengths: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("label vectors are empty")]
    EmptyLabels,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed label table: {reason}")]
    MalformedTable { reason: String },
}

/// Ordered list of case-insensitive improvement-phrase patterns.
#[derive(Debug, Clone)]
pub struct PatternSet {
    patterns: Vec<Regex>,
}

impl PatternSet {
    pub fn compile<S: AsRef<str>>(sources: &[S]) -> Result<Self, LabelError> {
        if sources.is_empty() {
            return Err(LabelError::EmptyPatterns);
        }
        let patterns = sources
            .iter()
            .enumerate()
            .map(|(index, src)| {
                RegexBuilder::new(src.as_ref())
                    .case_insensitive(true)
                    .build()
                    .map_err(|source| LabelError::BadPattern { index, source })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { patterns })
    }

    /// Read a pattern file: one pattern per line, `#` starts a comment.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self, LabelError> {
        let mut sources = Vec::new();
        for line in reader.lines() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            sources.push(trimmed.to_string());
        }
        Self::compile(&sources)
    }

    pub fn matches(&self, text: &str) -> bool {
        self.patterns.iter().any(|p| p.is_match(text))
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }
}

/// Example improvement phrases plus tense and contraction variants.
pub fn default_patterns() -> PatternSet {
    PatternSet::compile(&[
        r"i\s*('m|am)\s+(finally\s+)?feeling\s+better",
        r"things\s+(are|have\s+been)\s+improving",
        r"therapy\s+(is|has\s+been)\s+helping",
    ])
    .expect("built-in patterns compile")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Improved,
    NotImproved,
    Unclear,
}

impl Label {
    pub fn name(&self) -> &'static str {
        match self {
            Label::Improved => "improved",
            Label::NotImproved => "not_improved",
            Label::Unclear => "unclear",
        }
    }

    pub fn from_name(name: &str) -> Option<Label> {
        match name {
            "improved" => Some(Label::Improved),
            "not_improved" => Some(Label::NotImproved),
            "unclear" => Some(Label::Unclear),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LabelSource {
    Pattern,
    BehaviorFrequency,
    BehaviorResponse,
}

impl LabelSource {
    pub fn name(&self) -> &'static str {
        match self {
            LabelSource::Pattern => "pattern",
            LabelSource::BehaviorFrequency => "behavior_frequency",
            LabelSource::BehaviorResponse => "behavior_response",
        }
    }

    pub fn from_name(name: &str) -> Option<LabelSource> {
        match name {
            "pattern" => Some(LabelSource::Pattern),
            "behavior_frequency" => Some(LabelSource::BehaviorFrequency),
            "behavior_response" => Some(LabelSource::BehaviorResponse),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelRecord {
    pub user_id: String,
    pub label: Label,
    pub source: LabelSource,
}

/// Default relative-change threshold for the behavioral proxies.
pub const DEFAULT_THETA: f64 = 0.25;

/// Ceiling slice size for the first/last 20% of posts.
fn slice_len(n: usize) -> usize {
    n.div_ceil(5)
}

/// Improved iff some pattern matches the final 20% of posts and none
/// matches the first 20%. Posts without text in either slice make the
/// label unclear.
pub fn pattern_label(
    trajectory: &Trajectory,
    patterns: &PatternSet,
) -> Result<LabelRecord, LabelError> {
    let n = trajectory.len();
    if n < 5 {
        return Err(LabelError::TooFewPosts { len: n, need: 5 });
    }
    let slice = slice_len(n);
    let head = &trajectory.posts[..slice];
    let tail = &trajectory.posts[n - slice..];

    let record = |label| LabelRecord {
        user_id: trajectory.user_id.clone(),
        label,
        source: LabelSource::Pattern,
    };

    if head.iter().chain(tail).any(|p| p.text.is_none()) {
        return Ok(record(Label::Unclear));
    }
    let matches_any = |posts: &[crate::ingest::Post]| {
        posts
            .iter()
            .any(|p| patterns.matches(p.text.as_deref().unwrap_or("")))
    };
    let label = if matches_any(tail) && !matches_any(head) {
        Label::Improved
    } else {
        Label::NotImproved
    };
    Ok(record(label))
}

/// Split the trajectory at the temporal midpoint; improved iff the late
/// posting rate dropped to at most (1 - theta) of the early rate.
pub fn frequency_label(trajectory: &Trajectory, theta: f64) -> Result<LabelRecord, LabelError> {
    let span = trajectory.span_days();
    if span < 2.0 {
        return Err(LabelError::SpanTooShort { span, need: 2.0 });
    }
    let first = trajectory.posts[0].timestamp_days();
    let midpoint = first + span / 2.0;
    let early = trajectory
        .posts
        .iter()
        .filter(|p| p.timestamp_days() <= midpoint)
        .count();
    let late = trajectory.len() - early;
    // equal half-spans, so comparing counts compares rates
    let label = if (late as f64) <= (1.0 - theta) * early as f64 {
        Label::Improved
    } else {
        Label::NotImproved
    };
    Ok(LabelRecord {
        user_id: trajectory.user_id.clone(),
        label,
        source: LabelSource::BehaviorFrequency,
    })
}

/// Mean comments per post, late half vs early half; improved iff the late
/// mean rose to at least (1 + theta) of the early mean. Unclear when fewer
/// than 80% of posts carry a comment count.
pub fn response_label(trajectory: &Trajectory, theta: f64) -> LabelRecord {
    let record = |label| LabelRecord {
        user_id: trajectory.user_id.clone(),
        label,
        source: LabelSource::BehaviorResponse,
    };
    let n = trajectory.len();
    let with_counts = trajectory
        .posts
        .iter()
        .filter(|p| p.comment_count.is_some())
        .count();
    if n == 0 || (with_counts as f64) < 0.8 * n as f64 {
        return record(Label::Unclear);
    }
    let first = trajectory.posts[0].timestamp_days();
    let midpoint = first + trajectory.span_days() / 2.0;
    let mean_of = |late: bool| {
        let counts: Vec<f64> = trajectory
            .posts
            .iter()
            .filter(|p| (p.timestamp_days() > midpoint) == late)
            .filter_map(|p| p.comment_count.map(|c| c as f64))
            .collect();
        if counts.is_empty() {
            0.0
        } else {
            counts.iter().sum::<f64>() / counts.len() as f64
        }
    };
    let early = mean_of(false);
    let late = mean_of(true);
    // strict positivity so an all-zero history never counts as improvement
    let label = if late > 0.0 && late >= (1.0 + theta) * early {
        Label::Improved
    } else {
        Label::NotImproved
    };
    record(label)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaResult {
    pub kappa: f64,
    /// Set when expected agreement is 1 and kappa falls back to a
    /// convention value.
    pub degenerate: bool,
}

/// Cohen's kappa with marginal-product expected agreement. Unclear records
/// must be excluded pairwise by the caller.
pub fn cohens_kappa<T: Eq + std::hash::Hash>(a: &[T], b: &[T]) -> Result<KappaResult, LabelError> {
    if a.len() != b.len() {
        return Err(LabelError::LengthMismatch {
            a: a.len(),
            b: b.len(),
        });
    }
    if a.is_empty() {
        return Err(LabelError::EmptyLabels);
    }
    let n = a.len() as f64;
    let observed = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64 / n;

    let mut marginal_a: HashMap<&T, f64> = HashMap::new();
    let mut marginal_b: HashMap<&T, f64> = HashMap::new();
    for x in a {
        *marginal_a.entry(x).or_insert(0.0) += 1.0 / n;
    }
    for y in b {
        *marginal_b.entry(y).or_insert(0.0) += 1.0 / n;
    }
    let expected: f64 = marginal_a
        .iter()
        .map(|(class, pa)| pa * marginal_b.get(class).copied().unwrap_or(0.0))
        .sum();

    if (1.0 - expected).abs() < 1e-12 {
        return Ok(KappaResult {
            kappa: if (1.0 - observed).abs() < 1e-12 { 1.0 } else { 0.0 },
            degenerate: true,
        });
    }
    Ok(KappaResult {
        kappa: (observed - expected) / (1.0 - expected),
        degenerate: false,
    })
}

/// Drop index pairs where either side is `Unclear`.
pub fn pairwise_complete(a: &[Label], b: &[Label]) -> (Vec<Label>, Vec<Label>) {
    a.iter()
        .zip(b)
        .filter(|(x, y)| **x != Label::Unclear && **y != Label::Unclear)
        .map(|(x, y)| (*x, *y))
        .unzip()
}

/// Write the label table: `user_id,source,label`.
pub fn write_label_table<W: Write>(mut writer: W, records: &[LabelRecord]) -> Result<(), LabelError> {
    writeln!(writer, "user_id,source,label")?;
    for r in records {
        writeln!(writer, "{},{},{}", r.user_id, r.source.name(), r.label.name())?;
    }
    Ok(())
}

pub fn read_label_table<R: BufRead>(reader: R) -> Result<Vec<LabelRecord>, LabelError> {
    let mut lines = reader.lines();
    match lines.next() {
        Some(Ok(header)) if header.trim() == "user_id,source,label" => {}
        other => {
            return Err(LabelError::MalformedTable {
                reason: format!("bad header: {other:?}"),
            })
        }
    }
    let mut records = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(LabelError::MalformedTable {
                reason: format!("row {}: expected 3 fields", idx + 2),
            });
        }
        let source = LabelSource::from_name(fields[1]).ok_or_else(|| LabelError::MalformedTable {
            reason: format!("row {}: unknown source {:?}", idx + 2, fields[1]),
        })?;
        let label = Label::from_name(fields[2]).ok_or_else(|| LabelError::MalformedTable {
            reason: format!("row {}: unknown label {:?}", idx + 2, fields[2]),
        })?;
        records.push(LabelRecord {
            user_id: fields[0].to_string(),
            label,
            source,
        });
    }
    Ok(records)
}
