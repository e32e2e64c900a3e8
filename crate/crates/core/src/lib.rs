//! trajtopo: topology of longitudinal embedding trajectories.
//!
//! A user's chronologically ordered post embeddings, projected to 3D, form
//! a point cloud whose shape carries signal: persistent loops mark a
//! trajectory circling back to earlier semantic regions, volumetric
//! "flaring" marks exploration of new ones, and the rate of movement away
//! from the earliest posts gives a continuous recovery-velocity signal.
//! This crate ingests such trajectories, computes Vietoris-Rips persistent
//! homology (H0/H1/H2) and the three interpretable features built on it,
//! derives proxy improvement labels from text and behavior, and runs a
//! seeded random-forest evaluation protocol over the result.
//!
//! Pipeline stages map one-to-one onto modules: [`ingest`] -> [`reduce`]
//! -> [`homology`] -> [`features`] -> [`labeling`] -> [`model`], with
//! [`synth`] providing archetypal trajectories with known ground truth for
//! end-to-end validation.

pub mod features;
pub mod geometry;
pub mod homology;
pub mod ingest;
pub mod labeling;
pub mod model;
pub mod reduce;
pub mod synth;

pub use features::{extract_features, FeatureVector, Flag};
pub use homology::{
    betti_curve, diagram_for_points, distance_matrix, persistence, persistence_bruteforce,
    sliding_window_diagrams, vietoris_rips, BettiCurve, DistanceMatrix, Filtration,
    HomologyConfig, Interval, PersistenceDiagram,
};
pub use ingest::{apply_filter, parse_corpus, write_corpus, CorpusFilter, Post, Trajectory};
pub use labeling::{
    cohens_kappa, default_patterns, frequency_label, pattern_label, response_label, Label,
    LabelRecord, LabelSource, PatternSet,
};
pub use model::{
    cross_validate, evaluate, group_stats, pearson_r_ci, predict_proba, quartile_odds_ratio,
    stratified_kfold, temporal_split, train_forest, ForestConfig, ForestModel, LabeledDataset,
    MetricsReport,
};
pub use reduce::{fit_reducer, passthrough, transform, ReducedTrajectory, ReducerModel};
pub use synth::{generate, Archetype, SynthConfig, SynthResult};
