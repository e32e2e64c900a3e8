//! Subcommand implementations: each reads documented files and writes
//! documented artifacts.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use trajtopo::features::{extract_features, read_feature_table, write_feature_table, FeatureTable, Flag};
use trajtopo::homology::{
    betti_curve, diagram_for_points, read_diagram, sliding_window_diagrams, write_betti_curve,
    write_diagram, HomologyConfig, PersistenceDiagram,
};
use trajtopo::ingest::{
    apply_filter, parse_corpus, write_corpus, year_of_secs, CorpusFilter, Trajectory,
    SECONDS_PER_DAY,
};
use trajtopo::labeling::{
    cohens_kappa, default_patterns, frequency_label, pairwise_complete, pattern_label,
    read_label_table, response_label, write_label_table, Label, LabelRecord, LabelSource,
    PatternSet,
};
use trajtopo::model::{
    cross_validate, evaluate as evaluate_model, group_stats, pearson_r_ci, quartile_odds_ratio,
    read_forest_model, temporal_split, train_forest, write_forest_model, DatasetRow, ForestConfig,
    LabeledDataset, MeanStd, MetricsReport,
};
use trajtopo::reduce::{
    fit_reducer, passthrough, read_reduced, transform, write_reduced, write_reducer_model,
    ReducedTrajectory,
};
use trajtopo::synth::{as_posts, generate, Archetype, SynthConfig};

fn reader(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("cannot open {}", path.display()))?,
    ))
}

fn writer(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| {
        format!("cannot create {}", path.display())
    })?))
}

pub fn ingest(input: &Path, output: &Path, min_posts: usize, min_span_days: f64) -> Result<()> {
    let filter = CorpusFilter::new(min_posts, min_span_days)?;
    let trajectories = parse_corpus(reader(input)?)?;
    let total = trajectories.len();
    let kept = apply_filter(trajectories, &filter);
    if kept.is_empty() {
        bail!(
            "no trajectory passes the filter (>= {min_posts} posts over >= {min_span_days} days); \
             {total} users read"
        );
    }
    write_corpus(writer(output)?, &kept)?;
    println!("ingest: kept {} of {} users", kept.len(), total);
    Ok(())
}

pub fn reduce(input: &Path, output: &Path, reducer: &str) -> Result<()> {
    let trajectories = parse_corpus(reader(input)?)?;
    if trajectories.is_empty() {
        bail!("input corpus is empty");
    }
    match reducer {
        "pca3" => {
            let pooled: Vec<Vec<f64>> = trajectories
                .iter()
                .flat_map(|t| t.posts.iter().map(|p| p.embedding.clone()))
                .collect();
            let model = fit_reducer(&pooled)?;
            let reduced: Vec<ReducedTrajectory> = trajectories
                .par_iter()
                .map(|t| transform(&model, t))
                .collect::<Result<_, _>>()?;
            write_reduced(writer(output)?, &reduced, model.rank_deficient)?;
            let model_path = reducer_model_path(output);
            write_reducer_model(writer(&model_path)?, &model)?;
            println!(
                "reduce: pca3 on {} users, variance captured {:.4}; model at {}",
                reduced.len(),
                model.explained_variance_ratio.iter().sum::<f64>(),
                model_path.display()
            );
        }
        "passthrough" => {
            let reduced: Vec<ReducedTrajectory> = trajectories
                .iter()
                .map(passthrough)
                .collect::<Result<_, _>>()?;
            write_reduced(writer(output)?, &reduced, false)?;
            println!("reduce: passthrough of {} users", reduced.len());
        }
        other => bail!("unknown reducer {other:?} (expected pca3 or passthrough)"),
    }
    Ok(())
}

fn reducer_model_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".reducer.txt");
    output.with_file_name(name)
}

/// Load reduced trajectories from either a reduced file or raw records
/// whose embeddings are already 3D. Returns the rank-deficiency mark.
fn load_reduced(input: &Path) -> Result<(Vec<ReducedTrajectory>, bool)> {
    let mut first_line = String::new();
    {
        let mut r = reader(input)?;
        loop {
            first_line.clear();
            if r.read_line(&mut first_line)? == 0 {
                bail!("{} is empty", input.display());
            }
            if !first_line.trim().is_empty() {
                break;
            }
        }
    }
    if first_line.contains("\"points\"") {
        Ok(read_reduced(reader(input)?)?)
    } else {
        let trajectories = parse_corpus(reader(input)?)?;
        let reduced = trajectories
            .iter()
            .map(passthrough)
            .collect::<Result<Vec<_>, _>>()
            .context("raw input must carry 3D embeddings; run `reduce` first")?;
        Ok((reduced, false))
    }
}

#[allow(clippy::too_many_arguments)]
pub fn ph(
    input: &Path,
    output: &Path,
    max_dim: u8,
    max_eps: Option<f64>,
    window: Option<usize>,
    stride: Option<usize>,
    betti_grid: Option<usize>,
) -> Result<()> {
    let (reduced, _) = load_reduced(input)?;
    std::fs::create_dir_all(output)
        .with_context(|| format!("cannot create {}", output.display()))?;
    let config = HomologyConfig {
        max_homology_dim: max_dim,
        max_eps,
    };
    let windowed = window.is_some() || stride.is_some();
    let window = window.unwrap_or(10);
    let stride = stride.unwrap_or(5);

    let results: Vec<(String, Vec<(Option<usize>, PersistenceDiagram)>)> = reduced
        .par_iter()
        .map(|rt| -> Result<_> {
            let diagrams = if windowed {
                sliding_window_diagrams(rt, window, stride, &config)
                    .with_context(|| format!("user {}", rt.user_id))?
                    .into_iter()
                    .map(|(start, d)| (Some(start), d))
                    .collect()
            } else {
                let diagram = diagram_for_points(&rt.points, &config)
                    .with_context(|| format!("user {}", rt.user_id))?;
                vec![(None, diagram)]
            };
            Ok((rt.user_id.clone(), diagrams))
        })
        .collect::<Result<_>>()?;

    let mut files = 0usize;
    for (user_id, diagrams) in &results {
        for (start, diagram) in diagrams {
            let name = match start {
                Some(s) => format!("{user_id}.w{s}.dgm"),
                None => format!("{user_id}.dgm"),
            };
            write_diagram(writer(&output.join(name))?, diagram)?;
            files += 1;
            if let Some(grid_len) = betti_grid {
                let top = diagram
                    .intervals
                    .iter()
                    .filter(|iv| !iv.is_infinite())
                    .map(|iv| iv.death)
                    .fold(max_eps.unwrap_or(0.0), f64::max);
                let grid: Vec<f64> = (0..grid_len)
                    .map(|i| top * i as f64 / (grid_len.max(2) - 1) as f64)
                    .collect();
                for dim in 0..=max_dim {
                    let curve = betti_curve(diagram, dim, &grid);
                    let name = match start {
                        Some(s) => format!("{user_id}.w{s}.betti{dim}.txt"),
                        None => format!("{user_id}.betti{dim}.txt"),
                    };
                    write_betti_curve(writer(&output.join(name))?, &curve)?;
                }
            }
        }
    }
    println!("ph: wrote {files} diagram file(s) for {} users", results.len());
    Ok(())
}

pub fn features(
    input: &Path,
    output: &Path,
    k: usize,
    max_dim: u8,
    max_eps: Option<f64>,
) -> Result<()> {
    let (reduced, rank_deficient) = load_reduced(input)?;
    if reduced.is_empty() {
        bail!("no trajectories in {}", input.display());
    }
    let config = HomologyConfig {
        max_homology_dim: max_dim,
        max_eps,
    };
    let mut vectors = reduced
        .par_iter()
        .map(|rt| {
            extract_features(rt, k, &config).with_context(|| format!("user {}", rt.user_id))
        })
        .collect::<Result<Vec<_>>>()?;
    if rank_deficient {
        for fv in vectors.iter_mut() {
            fv.flags.insert(Flag::RankDeficient);
        }
    }
    write_feature_table(writer(output)?, &vectors)?;
    println!("features: wrote {} rows to {}", vectors.len(), output.display());
    Ok(())
}

pub fn label(
    input: &Path,
    output: &Path,
    patterns: Option<&Path>,
    theta_freq: f64,
    theta_resp: f64,
) -> Result<()> {
    let pattern_set = match patterns {
        Some(path) => PatternSet::from_reader(reader(path)?)?,
        None => default_patterns(),
    };
    let trajectories = parse_corpus(reader(input)?)?;
    if trajectories.is_empty() {
        bail!("no trajectories in {}", input.display());
    }

    let mut records: Vec<LabelRecord> = Vec::with_capacity(trajectories.len() * 3);
    for trajectory in &trajectories {
        records.push(pattern_label(trajectory, &pattern_set)?);
        records.push(frequency_label(trajectory, theta_freq)?);
        records.push(response_label(trajectory, theta_resp));
    }
    write_label_table(writer(output)?, &records)?;

    // pairwise agreement between sources, unclear excluded pairwise
    let by_source = |source: LabelSource| -> Vec<Label> {
        records
            .iter()
            .filter(|r| r.source == source)
            .map(|r| r.label)
            .collect()
    };
    let pattern = by_source(LabelSource::Pattern);
    let frequency = by_source(LabelSource::BehaviorFrequency);
    let response = by_source(LabelSource::BehaviorResponse);
    for (name, a, b) in [
        ("pattern/behavior_frequency", &pattern, &frequency),
        ("pattern/behavior_response", &pattern, &response),
        ("behavior_frequency/behavior_response", &frequency, &response),
    ] {
        let (ca, cb) = pairwise_complete(a, b);
        match cohens_kappa(&ca, &cb) {
            Ok(result) => println!(
                "label: kappa {name} = {:.4}{}",
                result.kappa,
                if result.degenerate { " (degenerate)" } else { "" }
            ),
            Err(_) => println!("label: kappa {name} = n/a (no overlapping clear labels)"),
        }
    }
    println!("label: wrote {} records for {} users", records.len(), trajectories.len());
    Ok(())
}

fn parse_label_source(name: &str) -> Result<LabelSource> {
    LabelSource::from_name(name)
        .with_context(|| format!("unknown label source {name:?} (pattern, behavior_frequency, behavior_response)"))
}

fn feature_columns(spec: &str) -> Vec<String> {
    spec.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

/// Join a feature table with one label source into a training dataset.
/// Unclear-labeled and unlabeled users are dropped. Years default to 0
/// and can be supplied from a trajectory file for temporal splits.
fn build_dataset(
    table: &FeatureTable,
    labels: &[LabelRecord],
    source: LabelSource,
    years: Option<&std::collections::HashMap<String, i32>>,
) -> Result<LabeledDataset> {
    let mut label_of: std::collections::HashMap<&str, Label> = std::collections::HashMap::new();
    for record in labels.iter().filter(|r| r.source == source) {
        label_of.insert(&record.user_id, record.label);
    }
    let mut rows = Vec::new();
    for (user_id, values) in &table.rows {
        let Some(label) = label_of.get(user_id.as_str()) else {
            continue;
        };
        let improved = match label {
            Label::Improved => true,
            Label::NotImproved => false,
            Label::Unclear => continue,
        };
        let first_post_year = years
            .and_then(|map| map.get(user_id).copied())
            .unwrap_or(0);
        rows.push(DatasetRow {
            user_id: user_id.clone(),
            features: values.clone(),
            improved,
            first_post_year,
        });
    }
    if rows.is_empty() {
        bail!("no rows with clear {} labels match the feature table", source.name());
    }
    Ok(LabeledDataset {
        feature_names: table.columns.clone(),
        rows,
    })
}

pub fn train(
    input: &Path,
    labels: &Path,
    label_source: &str,
    feature_cols: &str,
    trees: usize,
    seed: u64,
    output: &Path,
) -> Result<()> {
    let table = read_feature_table(reader(input)?)?;
    let label_records = read_label_table(reader(labels)?)?;
    let source = parse_label_source(label_source)?;
    let dataset = build_dataset(&table, &label_records, source, None)?;
    let selected = dataset.select(&feature_columns(feature_cols))?;
    let model = train_forest(&selected, &ForestConfig::new(trees, seed))?;
    write_forest_model(writer(output)?, &model)?;
    println!(
        "train: {} trees on {} rows x {} features -> {}",
        model.n_trees(),
        selected.len(),
        selected.feature_names.len(),
        output.display()
    );
    Ok(())
}

pub struct EvaluateArgs {
    pub input: PathBuf,
    pub labels: PathBuf,
    pub label_source: String,
    pub feature_cols: String,
    pub output: PathBuf,
    pub folds: usize,
    pub trees: usize,
    pub seed: u64,
    pub cutoff_year: Option<i32>,
    pub years_from: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub stats_output: Option<PathBuf>,
}

fn write_metrics(path: &Path, feature_set: &str, report: &MetricsReport) -> Result<()> {
    let mut w = writer(path)?;
    writeln!(
        w,
        "feature_set,accuracy_mean,accuracy_std,f1_mean,f1_std,auc_mean,auc_std,precision_mean,precision_std"
    )?;
    let cell = |m: MeanStd| format!("{},{}", m.mean, m.std);
    writeln!(
        w,
        "{feature_set},{},{},{},{}",
        cell(report.accuracy),
        cell(report.f1),
        cell(report.auc),
        cell(report.precision)
    )?;
    Ok(())
}

fn folds_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".folds.csv");
    output.with_file_name(name)
}

fn single_fold_report(metrics: trajtopo::model::Metrics) -> MetricsReport {
    let point = |v: f64| MeanStd { mean: v, std: 0.0 };
    MetricsReport {
        accuracy: point(metrics.accuracy),
        f1: point(metrics.f1),
        auc: point(metrics.auc),
        precision: point(metrics.precision),
    }
}

fn year_map(path: &Path) -> Result<std::collections::HashMap<String, i32>> {
    // accept either raw records or a reduced trajectory file
    let mut map = std::collections::HashMap::new();
    let mut first_line = String::new();
    {
        let mut r = reader(path)?;
        r.read_line(&mut first_line)?;
    }
    if first_line.contains("\"points\"") {
        let (reduced, _) = read_reduced(reader(path)?)?;
        for rt in reduced {
            if let Some(first) = rt.timestamps_days.first() {
                map.insert(rt.user_id, year_of_secs(first * SECONDS_PER_DAY));
            }
        }
    } else {
        for trajectory in parse_corpus(reader(path)?)? {
            if let Some(year) = trajectory.first_post_year() {
                map.insert(trajectory.user_id, year);
            }
        }
    }
    Ok(map)
}

pub fn evaluate(args: EvaluateArgs) -> Result<()> {
    let table = read_feature_table(reader(&args.input)?)?;
    let label_records = read_label_table(reader(&args.labels)?)?;
    let source = parse_label_source(&args.label_source)?;
    let years = match &args.years_from {
        Some(path) => Some(year_map(path)?),
        None => None,
    };
    let dataset = build_dataset(&table, &label_records, source, years.as_ref())?;
    let columns = feature_columns(&args.feature_cols);
    let selected = dataset.select(&columns)?;
    let feature_set = columns.join("+");
    let config = ForestConfig::new(args.trees, args.seed);

    if let Some(model_path) = &args.model {
        let model = read_forest_model(reader(model_path)?)?;
        let projected = dataset.select(&model.feature_names)?;
        let metrics = evaluate_model(&model, &projected)?;
        write_metrics(&args.output, &model.feature_names.join("+"), &single_fold_report(metrics))?;
        println!("evaluate: saved model on {} rows -> {}", projected.len(), args.output.display());
    } else if let Some(cutoff) = args.cutoff_year {
        if years.is_none() {
            bail!("--cutoff-year needs --years-from to recover first-post years");
        }
        let (train_set, test_set) = temporal_split(&selected, cutoff)?;
        let model = train_forest(&train_set, &config)?;
        let metrics = evaluate_model(&model, &test_set)?;
        write_metrics(&args.output, &feature_set, &single_fold_report(metrics))?;
        println!(
            "evaluate: temporal holdout at {cutoff} ({} train / {} test) -> {}",
            train_set.len(),
            test_set.len(),
            args.output.display()
        );
    } else {
        let cv = cross_validate(&selected, args.folds, &config, None)?;
        write_metrics(&args.output, &feature_set, &cv.report)?;
        let folds_file = folds_path(&args.output);
        let mut w = writer(&folds_file)?;
        writeln!(w, "user_id,fold")?;
        for (row, fold) in selected.rows.iter().zip(&cv.fold_of_row) {
            writeln!(w, "{},{fold}", row.user_id)?;
        }
        println!(
            "evaluate: {}-fold CV on {} rows, accuracy {:.4} +/- {:.4} -> {}",
            args.folds,
            selected.len(),
            cv.report.accuracy.mean,
            cv.report.accuracy.std,
            args.output.display()
        );
    }

    if let Some(stats_path) = &args.stats_output {
        write_group_stats(stats_path, &dataset, &columns)?;
        println!("evaluate: group statistics -> {}", stats_path.display());
    }
    Ok(())
}

fn write_group_stats(path: &Path, dataset: &LabeledDataset, columns: &[String]) -> Result<()> {
    let mut w = writer(path)?;
    writeln!(
        w,
        "feature,mean_improved,mean_not_improved,cohens_d,welch_t,welch_df,p_two_sided,\
         pearson_r,pearson_ci_low,pearson_ci_high,odds_ratio,or_ci_low,or_ci_high,or_corrected"
    )?;
    for name in columns {
        let idx = dataset
            .feature_names
            .iter()
            .position(|c| c == name)
            .with_context(|| format!("unknown feature column {name:?}"))?;
        let improved: Vec<f64> = dataset
            .rows
            .iter()
            .filter(|r| r.improved)
            .map(|r| r.features[idx])
            .collect();
        let not_improved: Vec<f64> = dataset
            .rows
            .iter()
            .filter(|r| !r.improved)
            .map(|r| r.features[idx])
            .collect();
        let values: Vec<f64> = dataset.rows.iter().map(|r| r.features[idx]).collect();
        let labels_bool: Vec<bool> = dataset.rows.iter().map(|r| r.improved).collect();
        let labels_f64: Vec<f64> = labels_bool.iter().map(|&b| f64::from(u8::from(b))).collect();

        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let gs = group_stats(&improved, &not_improved)?;
        let pearson = pearson_r_ci(&values, &labels_f64, 0.95)?;
        let or = quartile_odds_ratio(&values, &labels_bool)?;
        writeln!(
            w,
            "{name},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            mean(&improved),
            mean(&not_improved),
            gs.cohens_d,
            gs.welch_t,
            gs.welch_df,
            gs.p_two_sided,
            pearson.r,
            pearson.ci_low,
            pearson.ci_high,
            or.or,
            or.ci_low,
            or.ci_high,
            u8::from(or.corrected)
        )?;
    }
    Ok(())
}

pub struct SynthArgs {
    pub output: PathBuf,
    pub seed: u64,
    pub loops: usize,
    pub flares: usize,
    pub mixed: usize,
    pub n_posts: usize,
    pub noise: f64,
    pub radius: f64,
    pub drift: f64,
    pub time_step: f64,
}

/// Epoch day of 2018-01-01; synthetic users stagger their start year over
/// 2018-2020 so temporal splits have both sides.
const SYNTH_EPOCH_DAYS: f64 = 17_532.0;

pub fn synth(args: SynthArgs) -> Result<()> {
    let mut trajectories: Vec<Trajectory> = Vec::new();
    let mut user_index = 0usize;
    for (archetype, count) in [
        (Archetype::Loop, args.loops),
        (Archetype::Flare, args.flares),
        (Archetype::Mixed, args.mixed),
    ] {
        for i in 0..count {
            let user_id = format!("{}_{i:04}", archetype.name());
            let config = SynthConfig {
                archetype,
                n_posts: args.n_posts,
                noise_sigma: args.noise,
                seed: args.seed.wrapping_add(user_index as u64),
                time_step_days: args.time_step,
                loop_radius: args.radius,
                drift_rate: args.drift,
            };
            let result = generate(&config, &user_id)?;
            let start = SYNTH_EPOCH_DAYS + (user_index % 3) as f64 * 365.0;
            trajectories.push(as_posts(&result, archetype, start));
            user_index += 1;
        }
    }
    if trajectories.is_empty() {
        bail!("nothing to generate: loops, flares, and mixed are all zero");
    }
    trajectories.sort_by(|a, b| a.user_id.cmp(&b.user_id));
    write_corpus(writer(&args.output)?, &trajectories)?;
    println!(
        "synth: {} users ({} posts each) -> {}",
        trajectories.len(),
        args.n_posts,
        args.output.display()
    );
    Ok(())
}

pub fn plot_file(input: &Path, output: &Path) -> Result<()> {
    let first_data_line = reader(input)?
        .lines()
        .map_while(Result::ok)
        .find(|l| !l.trim().is_empty());
    let svg = match first_data_line {
        Some(line) if line.split_whitespace().count() == 2 => {
            let curve = read_betti_file(input)?;
            crate::plot::betti_svg(&curve)
        }
        _ => {
            // empty files plot as an empty diagram
            let diagram = read_diagram(reader(input)?)?;
            crate::plot::diagram_svg(&diagram)
        }
    };
    let mut w = writer(output)?;
    w.write_all(svg.as_bytes())?;
    println!("plot: {} -> {}", input.display(), output.display());
    Ok(())
}

fn read_betti_file(input: &Path) -> Result<Vec<(f64, usize)>> {
    let mut points = Vec::new();
    for (idx, line) in reader(input)?.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            bail!("line {}: expected `eps count`", idx + 1);
        }
        let eps: f64 = fields[0]
            .parse()
            .with_context(|| format!("line {}: bad eps", idx + 1))?;
        let count: usize = fields[1]
            .parse()
            .with_context(|| format!("line {}: bad count", idx + 1))?;
        points.push((eps, count));
    }
    Ok(points)
}
