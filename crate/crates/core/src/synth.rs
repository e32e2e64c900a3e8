//! Synthetic trajectories with known topological ground truth.
//!
//! Three archetypes:
//! - `loop`: one full lap of a circle in a fixed tilted plane; the last
//!   point returns exactly to the starting angle, so the distance-from-
//!   center increments telescope to zero and the archetype's recovery
//!   velocity is ~0 while its loop persistence is large.
//! - `flare`: a flat outward spiral (sweep < 2 pi, so it never closes a
//!   cycle) with a shallow vertical pitch; distance from the early-post
//!   centroid grows monotonically, so recovery velocity is positive and
//!   loop persistence is zero in the noiseless case.
//! - `mixed`: a flare segment followed by a loop segment.
//!
//! Noise is isotropic Gaussian; the default sigma is 5% of the structural
//! scale (loop radius). Beyond roughly 30% the archetypes blur together.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::geometry::{add, scale, Point3};
use crate::ingest::{Post, Trajectory, SECONDS_PER_DAY};
use crate::labeling::Label;
use crate::reduce::ReducedTrajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Archetype {
    Loop,
    Flare,
    Mixed,
}

impl Archetype {
    pub fn name(&self) -> &'static str {
        match self {
            Archetype::Loop => "loop",
            Archetype::Flare => "flare",
            Archetype::Mixed => "mixed",
        }
    }

    pub fn from_name(name: &str) -> Option<Archetype> {
        match name {
            "loop" => Some(Archetype::Loop),
            "flare" => Some(Archetype::Flare),
            "mixed" => Some(Archetype::Mixed),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub archetype: Archetype,
    pub n_posts: usize,
    pub noise_sigma: f64,
    pub seed: u64,
    pub time_step_days: f64,
    pub loop_radius: f64,
    pub drift_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            archetype: Archetype::Loop,
            n_posts: 20,
            noise_sigma: 0.05,
            seed: 0,
            time_step_days: 7.0,
            loop_radius: 1.0,
            drift_rate: 0.1,
        }
    }
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("n_posts must be >= 10, got {n}")]
    TooFewPosts { n: usize },
    #[error("{field} must be positive, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("noise_sigma must be >= 0, got {value}")]
    NegativeNoise { value: f64 },
}

#[derive(Debug, Clone)]
pub struct SynthResult {
    pub trajectory: ReducedTrajectory,
    /// Ground truth: flares count as improved, loops and mixed do not.
    pub label: Label,
}

// Orthonormal basis of the loop plane (normal (1,1,1)/sqrt(3)), so the
// loop's bounding box is not axis-aligned with its disk.
const PLANE_U: Point3 = [
    std::f64::consts::FRAC_1_SQRT_2,
    -std::f64::consts::FRAC_1_SQRT_2,
    0.0,
];
const PLANE_V: Point3 = [0.40824829046386302, 0.40824829046386302, -0.81649658092772603];

/// Total angular sweep of the flare spiral; below 2 pi for every n.
const FLARE_SWEEP: f64 = 1.5 * std::f64::consts::PI;
/// Vertical rise per unit of radial drift.
const FLARE_PITCH: f64 = 0.15;

fn validate(config: &SynthConfig) -> Result<(), SynthError> {
    if config.n_posts < 10 {
        return Err(SynthError::TooFewPosts { n: config.n_posts });
    }
    for (field, value) in [
        ("time_step_days", config.time_step_days),
        ("loop_radius", config.loop_radius),
        ("drift_rate", config.drift_rate),
    ] {
        if !(value > 0.0) {
            return Err(SynthError::NonPositive { field, value });
        }
    }
    if config.noise_sigma < 0.0 {
        return Err(SynthError::NegativeNoise {
            value: config.noise_sigma,
        });
    }
    Ok(())
}

fn circle_point(center: Point3, radius: f64, theta: f64) -> Point3 {
    add(
        center,
        add(
            scale(PLANE_U, radius * theta.cos()),
            scale(PLANE_V, radius * theta.sin()),
        ),
    )
}

fn loop_points(n: usize, radius: f64, center: Point3) -> Vec<Point3> {
    (0..n)
        .map(|i| {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64;
            circle_point(center, radius, theta)
        })
        .collect()
}

fn flare_points(n: usize, drift: f64) -> Vec<Point3> {
    let angular_step = FLARE_SWEEP / (n - 1) as f64;
    (0..n)
        .map(|i| {
            let radius = drift * i as f64;
            let phi = angular_step * i as f64;
            [
                radius * phi.cos(),
                radius * phi.sin(),
                FLARE_PITCH * drift * i as f64,
            ]
        })
        .collect()
}

/// Generate one synthetic trajectory with its ground-truth label.
pub fn generate(config: &SynthConfig, user_id: &str) -> Result<SynthResult, SynthError> {
    validate(config)?;
    let n = config.n_posts;

    let (mut points, label) = match config.archetype {
        Archetype::Loop => (
            loop_points(n, config.loop_radius, [0.0; 3]),
            Label::NotImproved,
        ),
        Archetype::Flare => (flare_points(n, config.drift_rate), Label::Improved),
        Archetype::Mixed => {
            let flare_len = n / 2;
            let mut points = flare_points(flare_len, config.drift_rate);
            let rejoin = *points.last().expect("flare segment is non-empty");
            points.extend(loop_points(n - flare_len, config.loop_radius, rejoin));
            (points, Label::NotImproved)
        }
    };

    if config.noise_sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        for point in points.iter_mut() {
            for axis in 0..3 {
                let jitter: f64 = rng.sample(StandardNormal);
                point[axis] += config.noise_sigma * jitter;
            }
        }
    }

    let timestamps_days = (0..n).map(|i| i as f64 * config.time_step_days).collect();
    Ok(SynthResult {
        trajectory: ReducedTrajectory {
            user_id: user_id.to_string(),
            points,
            timestamps_days,
        },
        label,
    })
}

fn stub_text(archetype: Archetype, index: usize, n: usize) -> String {
    let is_last = index + 1 == n;
    match archetype {
        Archetype::Loop => format!("week {index}: same problems, different day"),
        Archetype::Flare => {
            if is_last {
                format!("week {index}: started running last month and therapy is helping")
            } else if index + 1 >= n - n.div_ceil(5) {
                format!("week {index}: things are improving bit by bit")
            } else {
                format!("week {index}: writing through a rough stretch")
            }
        }
        Archetype::Mixed => format!("week {index}: ups and downs, hard to tell"),
    }
}

fn stub_comments(archetype: Archetype, index: usize, n: usize) -> u64 {
    let late = index >= n / 2;
    match archetype {
        Archetype::Flare if late => 3 + (index % 2) as u64,
        _ => 1 + (index % 3) as u64,
    }
}

/// Render a generated trajectory as ingest-format posts: 3D embeddings
/// (for the passthrough reducer), deterministic text stubs whose final
/// posts carry improvement phrases only for flares, and comment counts.
/// `start_epoch_days` positions the first post in calendar time.
pub fn as_posts(result: &SynthResult, archetype: Archetype, start_epoch_days: f64) -> Trajectory {
    let n = result.trajectory.len();
    let posts = result
        .trajectory
        .points
        .iter()
        .zip(&result.trajectory.timestamps_days)
        .enumerate()
        .map(|(i, (point, days))| Post {
            post_id: format!("{}-{i:04}", result.trajectory.user_id),
            timestamp_secs: (start_epoch_days + days) * SECONDS_PER_DAY,
            embedding: point.to_vec(),
            text: Some(stub_text(archetype, i, n)),
            comment_count: Some(stub_comments(archetype, i, n)),
        })
        .collect();
    Trajectory {
        user_id: result.trajectory.user_id.clone(),
        posts,
    }
}
