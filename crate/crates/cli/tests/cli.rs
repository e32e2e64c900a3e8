//! Subcommand-level integration tests against the built binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_trajtopo"))
}

fn run_ok(args: &[&str]) -> Output {
    let output = bin().args(args).output().expect("binary runs");
    assert!(
        output.status.success(),
        "command {:?} failed:\n{}",
        args,
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

fn path_str(path: &Path) -> &str {
    path.to_str().expect("utf-8 path")
}

fn square_corpus(dir: &Path) -> PathBuf {
    let path = dir.join("square.jsonl");
    let day = 86_400;
    let lines = [
        format!(r#"{{"user_id":"sq","post_id":"a","timestamp":0,"embedding":[0.0,0.0,0.0]}}"#),
        format!(r#"{{"user_id":"sq","post_id":"b","timestamp":{day},"embedding":[1.0,0.0,0.0]}}"#),
        format!(
            r#"{{"user_id":"sq","post_id":"c","timestamp":{},"embedding":[1.0,1.0,0.0]}}"#,
            2 * day
        ),
        format!(
            r#"{{"user_id":"sq","post_id":"d","timestamp":{},"embedding":[0.0,1.0,0.0]}}"#,
            3 * day
        ),
    ];
    fs::write(&path, lines.join("\n")).unwrap();
    path
}

#[test]
fn ph_writes_the_square_h1_interval() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = square_corpus(dir.path());
    let out = dir.path().join("dgms");
    run_ok(&[
        "ph",
        "--input",
        path_str(&corpus),
        "--output",
        path_str(&out),
        "--max-dim",
        "2",
    ]);
    let diagram = fs::read_to_string(out.join("sq.dgm")).unwrap();
    assert!(
        diagram.contains("1.41421"),
        "missing H1 death in:\n{diagram}"
    );
    let h1: Vec<&str> = diagram.lines().filter(|l| l.starts_with("1 ")).collect();
    assert_eq!(h1.len(), 1);
    let fields: Vec<f64> = h1[0]
        .split_whitespace()
        .skip(1)
        .map(|f| f.parse().unwrap())
        .collect();
    assert!((fields[0] - 1.0).abs() < 1e-12);
    assert!((fields[1] - 2.0_f64.sqrt()).abs() < 1e-12);
}

#[test]
fn plot_empty_diagram_is_valid_svg_with_diagonal() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.dgm");
    fs::write(&empty, "").unwrap();
    let svg_path = dir.path().join("empty.svg");
    run_ok(&[
        "plot",
        "--input",
        path_str(&empty),
        "--output",
        path_str(&svg_path),
    ]);
    let svg = fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains("</svg>"));
    assert!(svg.contains("<line")); // the diagonal
}

#[test]
fn ingest_filters_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("raw.jsonl");
    let day = 86_400u64;
    let mut lines = Vec::new();
    // "keep": 10 posts over 90 days; "drop": 10 posts over 80 days
    for i in 0..10u64 {
        lines.push(format!(
            r#"{{"user_id":"keep","post_id":"k{i}","timestamp":{},"embedding":[{}.0]}}"#,
            i * day * 10,
            i
        ));
        lines.push(format!(
            r#"{{"user_id":"drop","post_id":"d{i}","timestamp":{},"embedding":[{}.0]}}"#,
            i * day * 80 / 9,
            i
        ));
    }
    fs::write(&input, lines.join("\n")).unwrap();
    let output = dir.path().join("canonical.jsonl");
    run_ok(&[
        "ingest",
        "--input",
        path_str(&input),
        "--output",
        path_str(&output),
        "--min-posts",
        "10",
        "--min-span-days",
        "90",
    ]);
    let canonical = fs::read_to_string(&output).unwrap();
    assert_eq!(canonical.lines().count(), 10);
    assert!(canonical.contains("\"keep\""));
    assert!(!canonical.contains("\"drop\""));

    // re-ingesting the canonical file is a fixed point
    let output2 = dir.path().join("canonical2.jsonl");
    run_ok(&[
        "ingest",
        "--input",
        path_str(&output),
        "--output",
        path_str(&output2),
    ]);
    assert_eq!(canonical, fs::read_to_string(&output2).unwrap());
}

#[test]
fn ingest_rejects_malformed_input_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.jsonl");
    fs::write(
        &input,
        "{\"user_id\":\"u\",\"post_id\":\"a\",\"timestamp\":0,\"embedding\":[1.0]}\nnot json",
    )
    .unwrap();
    let output = dir.path().join("out.jsonl");
    let result = bin()
        .args(["ingest", "--input", path_str(&input), "--output", path_str(&output)])
        .output()
        .unwrap();
    assert!(!result.status.success());
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("line 2"), "diagnostic was: {stderr}");
}

#[test]
fn reduce_pca3_writes_model_and_reduced_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("hd.jsonl");
    let day = 86_400u64;
    let mut lines = Vec::new();
    for u in 0..3 {
        for i in 0..12u64 {
            let t = (u * 12 + i) as f64;
            lines.push(format!(
                r#"{{"user_id":"u{u}","post_id":"p{i}","timestamp":{},"embedding":[{},{},{},{},{}]}}"#,
                i * day,
                t.sin(),
                t.cos(),
                0.1 * t,
                (0.5 * t).sin(),
                0.01 * t * t
            ));
        }
    }
    fs::write(&input, lines.join("\n")).unwrap();
    let reduced = dir.path().join("reduced.jsonl");
    run_ok(&[
        "reduce",
        "--input",
        path_str(&input),
        "--output",
        path_str(&reduced),
        "--reducer",
        "pca3",
    ]);
    assert!(reduced.exists());
    let model = dir.path().join("reduced.jsonl.reducer.txt");
    let model_text = fs::read_to_string(&model).unwrap();
    assert!(model_text.starts_with("pca3"));
    assert!(model_text.contains("component2"));
    let reduced_text = fs::read_to_string(&reduced).unwrap();
    assert_eq!(reduced_text.lines().count(), 3);
    assert!(reduced_text.contains("\"points\""));

    // passthrough rejects non-3D input
    let result = bin()
        .args([
            "reduce",
            "--input",
            path_str(&input),
            "--output",
            path_str(&dir.path().join("x.jsonl")),
            "--reducer",
            "passthrough",
        ])
        .output()
        .unwrap();
    assert!(!result.status.success());
}

#[test]
fn label_writes_three_sources_per_user() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    run_ok(&[
        "synth",
        "--output",
        path_str(&corpus),
        "--loops",
        "3",
        "--flares",
        "3",
        "--seed",
        "5",
    ]);
    let labels = dir.path().join("labels.csv");
    let output = run_ok(&[
        "label",
        "--input",
        path_str(&corpus),
        "--output",
        path_str(&labels),
    ]);
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("kappa pattern/behavior_frequency"));
    let table = fs::read_to_string(&labels).unwrap();
    assert_eq!(table.lines().count(), 1 + 6 * 3);
    // flares are pattern-labeled improved, loops are not
    for line in table.lines().skip(1) {
        if line.contains(",pattern,") {
            let improved = line.ends_with(",improved");
            assert_eq!(line.starts_with("flare"), improved, "line {line}");
        }
    }
}

#[test]
fn custom_pattern_file_is_used() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    run_ok(&[
        "synth",
        "--output",
        path_str(&corpus),
        "--loops",
        "2",
        "--flares",
        "2",
        "--seed",
        "5",
    ]);
    let patterns = dir.path().join("patterns.txt");
    fs::write(&patterns, "# custom list\nnever-match-anything-xyz\n").unwrap();
    let labels = dir.path().join("labels.csv");
    run_ok(&[
        "label",
        "--input",
        path_str(&corpus),
        "--output",
        path_str(&labels),
        "--patterns",
        path_str(&patterns),
    ]);
    let table = fs::read_to_string(&labels).unwrap();
    // nothing matches, so no pattern row is improved
    for line in table.lines().filter(|l| l.contains(",pattern,")) {
        assert!(line.ends_with(",not_improved"), "line {line}");
    }
}

#[test]
fn evaluate_with_saved_model_and_feature_subsets() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    run_ok(&[
        "synth",
        "--output",
        path_str(&corpus),
        "--loops",
        "10",
        "--flares",
        "10",
        "--seed",
        "2",
    ]);
    let features = dir.path().join("features.csv");
    run_ok(&["features", "--input", path_str(&corpus), "--output", path_str(&features)]);
    let labels = dir.path().join("labels.csv");
    run_ok(&["label", "--input", path_str(&corpus), "--output", path_str(&labels)]);
    let model = dir.path().join("model.txt");
    run_ok(&[
        "train",
        "--input",
        path_str(&features),
        "--labels",
        path_str(&labels),
        "--output",
        path_str(&model),
        "--trees",
        "20",
        "--seed",
        "4",
        "--feature-cols",
        "lp,fi",
    ]);
    let metrics = dir.path().join("metrics.csv");
    run_ok(&[
        "evaluate",
        "--input",
        path_str(&features),
        "--labels",
        path_str(&labels),
        "--model",
        path_str(&model),
        "--output",
        path_str(&metrics),
    ]);
    let text = fs::read_to_string(&metrics).unwrap();
    assert!(text.lines().count() == 2);
    assert!(text.contains("lp+fi,"), "feature set header wrong: {text}");
}

#[test]
fn windowed_ph_and_betti_plot() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    run_ok(&[
        "synth",
        "--output",
        path_str(&corpus),
        "--loops",
        "1",
        "--flares",
        "0",
        "--n-posts",
        "12",
        "--seed",
        "3",
    ]);
    let out = dir.path().join("dgms");
    run_ok(&[
        "ph",
        "--input",
        path_str(&corpus),
        "--output",
        path_str(&out),
        "--max-dim",
        "1",
        "--window",
        "5",
        "--stride",
        "4",
        "--betti-grid",
        "16",
    ]);
    // length 12, window 5, stride 4 -> starts 0, 4, then clamped 7
    for start in [0, 4, 7] {
        assert!(out.join(format!("loop_0000.w{start}.dgm")).exists());
        assert!(out.join(format!("loop_0000.w{start}.betti1.txt")).exists());
    }
    let svg = dir.path().join("betti.svg");
    run_ok(&[
        "plot",
        "--input",
        path_str(&out.join("loop_0000.w0.betti1.txt")),
        "--output",
        path_str(&svg),
    ]);
    assert!(fs::read_to_string(&svg).unwrap().contains("count"));
}

#[test]
fn help_lists_documented_flags() {
    for (subcommand, expected) in [
        ("ingest", vec!["--input", "--output", "--min-posts", "--min-span-days"]),
        ("reduce", vec!["--reducer"]),
        ("ph", vec!["--max-dim", "--max-eps", "--window", "--stride"]),
        ("features", vec!["--k", "--max-eps"]),
        ("label", vec!["--patterns", "--theta-freq", "--theta-resp"]),
        ("train", vec!["--trees", "--seed"]),
        ("evaluate", vec!["--folds", "--cutoff-year"]),
        ("synth", vec!["--seed", "--n-posts"]),
        ("plot", vec!["--input", "--output"]),
    ] {
        let output = bin().args([subcommand, "--help"]).output().unwrap();
        assert!(output.status.success());
        let help = String::from_utf8_lossy(&output.stdout);
        for flag in expected {
            assert!(help.contains(flag), "{subcommand} --help missing {flag}");
        }
        assert!(
            bin().arg(subcommand).arg("--help").output().unwrap().status.success()
        );
    }
    // paper-derived defaults are marked in the help text
    let help = String::from_utf8_lossy(&bin().args(["features", "--help"]).output().unwrap().stdout).to_string();
    assert!(help.contains("paper"), "default provenance missing: {help}");
}
