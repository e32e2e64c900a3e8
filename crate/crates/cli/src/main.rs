//! trajtopo: file-to-file pipeline stages for trajectory topology.
//!
//! Stages communicate through documented files so each one is
//! independently re-runnable; identical inputs and seeds produce
//! byte-identical outputs.

mod commands;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "trajtopo", version, about = "Trajectory-topology pipeline")]
struct Cli {
    /// Worker threads for per-user stages (default: machine parallelism).
    /// Output ordering is deterministic regardless.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, validate, and filter line-delimited post records into the
    /// canonical trajectory file.
    Ingest {
        /// Line-delimited JSON records: user_id, post_id, timestamp,
        /// embedding, optional text and comment_count
        #[arg(long)]
        input: PathBuf,
        /// Canonical trajectory file (same record schema, grouped and sorted)
        #[arg(long)]
        output: PathBuf,
        /// Minimum posts per user [paper default: 10]
        #[arg(long, default_value_t = 10)]
        min_posts: usize,
        /// Minimum days between first and last post [paper default: 90]
        #[arg(long, default_value_t = 90.0)]
        min_span_days: f64,
    },
    /// Project embeddings to 3D with a corpus-fit PCA, or pass through
    /// embeddings that are already 3D.
    Reduce {
        /// Canonical trajectory file
        #[arg(long)]
        input: PathBuf,
        /// Reduced trajectory file; the fitted model is written next to it
        /// as <output>.reducer.txt when --reducer is pca3
        #[arg(long)]
        output: PathBuf,
        /// pca3 = deterministic 3-component PCA; passthrough = embeddings
        /// are already 3D (e.g. external UMAP output)
        #[arg(long, default_value = "pca3")]
        reducer: String,
    },
    /// Persistence diagrams (and optional Betti curves) per user.
    Ph {
        /// Reduced trajectory file, or raw records with 3D embeddings
        #[arg(long)]
        input: PathBuf,
        /// Output directory: <user>.dgm per user (<user>.w<start>.dgm when
        /// windowed, <user>.betti<dim>.txt with --betti-grid)
        #[arg(long)]
        output: PathBuf,
        /// Highest homology dimension (0, 1, or 2)
        #[arg(long, default_value_t = 2)]
        max_dim: u8,
        /// Filtration cutoff; defaults to each cloud's enclosing radius
        #[arg(long)]
        max_eps: Option<f64>,
        /// Sliding-window length (enables windowed mode) [default: 10]
        #[arg(long)]
        window: Option<usize>,
        /// Sliding-window stride [default: 5]
        #[arg(long)]
        stride: Option<usize>,
        /// Also write Betti curves on an N-point grid over [0, max_eps]
        #[arg(long)]
        betti_grid: Option<usize>,
    },
    /// Per-user feature table: loop persistence, flare index, recovery
    /// velocity.
    Features {
        /// Reduced trajectory file, or raw records with 3D embeddings
        #[arg(long)]
        input: PathBuf,
        /// Feature table CSV: user_id,lp,fi,srv,n_posts,span_days,flags
        #[arg(long)]
        output: PathBuf,
        /// Number of earliest posts defining the trauma center [paper
        /// default: 5]
        #[arg(long, default_value_t = 5)]
        k: usize,
        /// Highest homology dimension used for loop persistence (at least
        /// 1 is always computed)
        #[arg(long, default_value_t = 1)]
        max_dim: u8,
        /// Filtration cutoff; defaults to each cloud's enclosing radius
        #[arg(long)]
        max_eps: Option<f64>,
    },
    /// Proxy improvement labels from text patterns and posting behavior;
    /// prints pairwise label-source agreement (Cohen's kappa).
    Label {
        /// Trajectory file with post text (and comment counts if available)
        #[arg(long)]
        input: PathBuf,
        /// Label table CSV: user_id,source,label
        #[arg(long)]
        output: PathBuf,
        /// Pattern file: one case-insensitive regex per line, # comments
        /// (default: built-in improvement phrases)
        #[arg(long)]
        patterns: Option<PathBuf>,
        /// Posting-rate drop needed for the frequency proxy
        #[arg(long, default_value_t = 0.25)]
        theta_freq: f64,
        /// Comment-rate rise needed for the response proxy
        #[arg(long, default_value_t = 0.25)]
        theta_resp: f64,
    },
    /// Train a random forest on a feature table and label table.
    Train {
        /// Feature table CSV
        #[arg(long)]
        input: PathBuf,
        /// Label table CSV (user_id,source,label)
        #[arg(long)]
        labels: PathBuf,
        /// Which label source to train against
        #[arg(long, default_value = "pattern")]
        label_source: String,
        /// Comma-separated feature columns
        #[arg(long, default_value = "lp,fi,srv")]
        feature_cols: String,
        /// Trees in the forest [paper default: 100]
        #[arg(long, default_value_t = 100)]
        trees: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Model file
        #[arg(long)]
        output: PathBuf,
    },
    /// Evaluate by stratified cross-validation (default), temporal
    /// holdout (--cutoff-year), or a saved model (--model).
    Evaluate {
        /// Feature table CSV
        #[arg(long)]
        input: PathBuf,
        /// Label table CSV
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, default_value = "pattern")]
        label_source: String,
        #[arg(long, default_value = "lp,fi,srv")]
        feature_cols: String,
        /// Metrics CSV; in CV mode fold assignments go to <output>.folds.csv
        #[arg(long)]
        output: PathBuf,
        /// Stratified CV folds [paper default: 5]
        #[arg(long, default_value_t = 5)]
        folds: usize,
        #[arg(long, default_value_t = 100)]
        trees: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Temporal holdout: train on first-post years <= cutoff, test on
        /// later years (requires --years-from)
        #[arg(long)]
        cutoff_year: Option<i32>,
        /// Trajectory file used to recover first-post years for the
        /// temporal split
        #[arg(long)]
        years_from: Option<PathBuf>,
        /// Evaluate this saved model instead of training
        #[arg(long)]
        model: Option<PathBuf>,
        /// Also write per-feature group statistics (Welch t, Cohen's d,
        /// Pearson r with CI, quartile odds ratio)
        #[arg(long)]
        stats_output: Option<PathBuf>,
    },
    /// Generate synthetic archetype trajectories (ingest record format,
    /// 3D embeddings, text stubs).
    Synth {
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of looping users (ground truth: not improved)
        #[arg(long, default_value_t = 100)]
        loops: usize,
        /// Number of flaring users (ground truth: improved)
        #[arg(long, default_value_t = 100)]
        flares: usize,
        /// Number of mixed users (flare then loop; not improved)
        #[arg(long, default_value_t = 0)]
        mixed: usize,
        #[arg(long, default_value_t = 20)]
        n_posts: usize,
        /// Isotropic noise sigma (structural scale is the loop radius)
        #[arg(long, default_value_t = 0.05)]
        noise: f64,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        /// Outward drift per step for flares
        #[arg(long, default_value_t = 0.1)]
        drift: f64,
        /// Days between consecutive posts
        #[arg(long, default_value_t = 7.0)]
        time_step: f64,
    },
    /// Render a persistence diagram or Betti curve to SVG.
    Plot {
        /// Diagram file (dim birth death) or Betti curve file (eps count);
        /// detected by column count
        #[arg(long)]
        input: PathBuf,
        /// SVG file
        #[arg(long)]
        output: PathBuf,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()?;
    }
    match cli.command {
        Command::Ingest {
            input,
            output,
            min_posts,
            min_span_days,
        } => commands::ingest(&input, &output, min_posts, min_span_days),
        Command::Reduce {
            input,
            output,
            reducer,
        } => commands::reduce(&input, &output, &reducer),
        Command::Ph {
            input,
            output,
            max_dim,
            max_eps,
            window,
            stride,
            betti_grid,
        } => commands::ph(&input, &output, max_dim, max_eps, window, stride, betti_grid),
        Command::Features {
            input,
            output,
            k,
            max_dim,
            max_eps,
        } => commands::features(&input, &output, k, max_dim, max_eps),
        Command::Label {
            input,
            output,
            patterns,
            theta_freq,
            theta_resp,
        } => commands::label(&input, &output, patterns.as_deref(), theta_freq, theta_resp),
        Command::Train {
            input,
            labels,
            label_source,
            feature_cols,
            trees,
            seed,
            output,
        } => commands::train(
            &input,
            &labels,
            &label_source,
            &feature_cols,
            trees,
            seed,
            &output,
        ),
        Command::Evaluate {
            input,
            labels,
            label_source,
            feature_cols,
            output,
            folds,
            trees,
            seed,
            cutoff_year,
            years_from,
            model,
            stats_output,
        } => commands::evaluate(commands::EvaluateArgs {
            input,
            labels,
            label_source,
            feature_cols,
            output,
            folds,
            trees,
            seed,
            cutoff_year,
            years_from,
            model,
            stats_output,
        }),
        Command::Synth {
            output,
            seed,
            loops,
            flares,
            mixed,
            n_posts,
            noise,
            radius,
            drift,
            time_step,
        } => commands::synth(commands::SynthArgs {
            output,
            seed,
            loops,
            flares,
            mixed,
            n_posts,
            noise,
            radius,
            drift,
            time_step,
        }),
        Command::Plot { input, output } => commands::plot_file(&input, &output),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::FAILURE
        }
    }
}
