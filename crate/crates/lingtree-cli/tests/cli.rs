//! End-to-end tests against the built binary: exit codes, the stdout
//! contract of `evaluate`, and byte-identical reports across reruns.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lingtree"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).unwrap()
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

/// Experiment config sized so a full synth + experiment round trip
/// stays under a second or two.
const TINY_CONFIG: &str = r#"
master_seed = 9
feature_sets = ["pos-trigrams", "function-words"]

[synth]
families = 2
languages_per_family = 2
tokens_per_language = 2600
original_tokens = 2600

[ot]
chunk_tokens = 500
chunks_per_class = 8
folds = 2

[source_id]
chunk_tokens = 400
chunks_per_language = 4
folds = 2

[trees]
repetitions = 2
norm_samples = 2000
baseline_n = 50
"#;

/// Generates a synthetic world under `dir/world` and returns its path.
fn synth_world(dir: &Path) -> std::path::PathBuf {
    std::fs::write(dir.join("exp.toml"), TINY_CONFIG).unwrap();
    let out = run_in(dir, &["synth", "--config", "exp.toml", "--output", "world"]);
    assert_eq!(code(&out), 0, "synth failed: {}", stderr(&out));
    dir.join("world")
}

#[test]
fn evaluate_identical_trees_prints_zero_and_exits_clean() {
    let tmp = TempDir::new().unwrap();
    let newick = "((aa:1,ab:1):2,ba:3);\n";
    std::fs::write(tmp.path().join("t.nwk"), newick).unwrap();
    std::fs::write(tmp.path().join("gold.nwk"), newick).unwrap();

    let out = run_in(
        tmp.path(),
        &["evaluate", "--tree", "t.nwk", "--gold", "gold.nwk", "--mode", "unweighted"],
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert_eq!(stdout(&out).trim(), "0");

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("out/evaluation.json")).unwrap())
            .unwrap();
    assert_eq!(report["raw"], 0.0);
    assert_eq!(report["normalized"], 0.0);

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("out/run_manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["command"], "evaluate");
    assert_eq!(manifest["seed"], 0);
    assert!(manifest["versions"]["lingtree"].is_string());
    assert!(manifest["timings_ms"]["total"].is_number());
}

#[test]
fn missing_gold_file_exits_with_io_code() {
    let tmp = TempDir::new().unwrap();
    std::fs::write(tmp.path().join("t.nwk"), "(aa:1,ab:1);\n").unwrap();
    let out = run_in(
        tmp.path(),
        &["evaluate", "--tree", "t.nwk", "--gold", "missing.nwk"],
    );
    assert_eq!(code(&out), 3);
    let err = stderr(&out);
    assert!(err.starts_with("error[io]:"), "stderr: {err}");
    assert!(err.contains("missing.nwk"), "stderr: {err}");
}

#[test]
fn malformed_tree_exits_with_data_code() {
    let tmp = TempDir::new().unwrap();
    std::fs::write(tmp.path().join("t.nwk"), "((aa:1,ab:1):2;\n").unwrap();
    std::fs::write(tmp.path().join("gold.nwk"), "(aa:1,ab:1);\n").unwrap();
    let out = run_in(
        tmp.path(),
        &["evaluate", "--tree", "t.nwk", "--gold", "gold.nwk"],
    );
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).starts_with("error[data]:"), "stderr: {}", stderr(&out));
}

#[test]
fn usage_errors_exit_2() {
    let tmp = TempDir::new().unwrap();
    // Unknown subcommand: clap's own usage handling.
    assert_eq!(code(&run_in(tmp.path(), &["frobnicate"])), 2);
    // Unknown flag.
    assert_eq!(code(&run_in(tmp.path(), &["evaluate", "--bogus"])), 2);
    // A format the subcommand does not produce.
    std::fs::write(tmp.path().join("t.nwk"), "(aa:1,ab:1);\n").unwrap();
    let out = run_in(
        tmp.path(),
        &["evaluate", "--tree", "t.nwk", "--gold", "t.nwk", "--format", "svg"],
    );
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).starts_with("error[usage]:"), "stderr: {}", stderr(&out));
}

#[test]
fn invalid_config_exits_with_data_code() {
    let tmp = TempDir::new().unwrap();
    std::fs::write(tmp.path().join("bad.toml"), "trigram_k = 0\n").unwrap();
    let out = run_in(tmp.path(), &["experiment", "--config", "bad.toml"]);
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).starts_with("error[data]:"), "stderr: {}", stderr(&out));

    std::fs::write(tmp.path().join("garbage.toml"), "not toml [[[").unwrap();
    let out = run_in(tmp.path(), &["experiment", "--config", "garbage.toml"]);
    assert_eq!(code(&out), 4);
}

#[test]
fn experiment_reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let world = synth_world(tmp.path());
    let config = world.join("experiment.toml");
    let config = config.to_str().unwrap();

    let first = run_in(tmp.path(), &["experiment", "--config", config, "--output", "run1"]);
    assert_eq!(code(&first), 0, "stderr: {}", stderr(&first));
    let second = run_in(tmp.path(), &["experiment", "--config", config, "--output", "run2"]);
    assert_eq!(code(&second), 0, "stderr: {}", stderr(&second));
    // A serial rerun must not change a single byte either: parallel
    // sections may not reorder or reseed anything.
    let serial = run_in(
        tmp.path(),
        &["experiment", "--config", config, "--output", "run3", "--jobs", "1"],
    );
    assert_eq!(code(&serial), 0, "stderr: {}", stderr(&serial));

    let artifacts = [
        "ot_report.json",
        "ot_accuracy.csv",
        "source_id_report.json",
        "source_id_accuracy.csv",
        "tree_report.json",
        "tree_distances.csv",
        "tree_pos-trigrams.nwk",
        "tree_function-words.nwk",
    ];
    for name in artifacts {
        let a = std::fs::read(tmp.path().join("run1").join(name)).unwrap();
        let b = std::fs::read(tmp.path().join("run2").join(name)).unwrap();
        let c = std::fs::read(tmp.path().join("run3").join(name)).unwrap();
        assert!(!a.is_empty(), "{name} is empty");
        assert_eq!(a, b, "{name} differs between identical runs");
        assert_eq!(a, c, "{name} differs under --jobs 1");
    }
    assert!(tmp.path().join("run1/run_manifest.json").exists());
}

#[test]
fn seed_flag_overrides_config_and_changes_reports() {
    let tmp = TempDir::new().unwrap();
    let world = synth_world(tmp.path());
    let config = world.join("experiment.toml");
    let config = config.to_str().unwrap();

    let base = run_in(
        tmp.path(),
        &["experiment", "--config", config, "--task", "trees", "--output", "a"],
    );
    assert_eq!(code(&base), 0, "stderr: {}", stderr(&base));
    let reseeded = run_in(
        tmp.path(),
        &["experiment", "--config", config, "--task", "trees", "--seed", "123", "--output", "b"],
    );
    assert_eq!(code(&reseeded), 0, "stderr: {}", stderr(&reseeded));

    let a: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("a/tree_report.json")).unwrap())
            .unwrap();
    let b: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("b/tree_report.json")).unwrap())
            .unwrap();
    assert_eq!(a["master_seed"], 9);
    assert_eq!(b["master_seed"], 123);
    assert_eq!(b["config"]["master_seed"], 123, "report echoes the effective seed");
}

#[test]
fn cluster_renders_all_tree_formats() {
    let tmp = TempDir::new().unwrap();
    let world = synth_world(tmp.path());
    let config = world.join("experiment.toml");

    let out = run_in(
        tmp.path(),
        &[
            "cluster",
            "--config",
            config.to_str().unwrap(),
            "--output",
            "trees",
            "--format",
            "newick",
            "--format",
            "ascii",
            "--format",
            "svg",
        ],
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let newick = std::fs::read_to_string(tmp.path().join("trees/tree_pos-trigrams.nwk")).unwrap();
    let tree = lingtree::phylo::parse_newick(&newick).unwrap();
    assert_eq!(tree.leaf_count(), 4);
    let ascii = std::fs::read_to_string(tmp.path().join("trees/tree_pos-trigrams.txt")).unwrap();
    assert!(ascii.contains("aa"), "ascii render: {ascii}");
    let svg = std::fs::read_to_string(tmp.path().join("trees/tree_pos-trigrams.svg")).unwrap();
    assert!(svg.starts_with("<svg"), "svg render starts with {:.40}", svg);
    assert!(tmp.path().join("trees/tree_function-words.nwk").exists());
}

#[test]
fn ingest_features_analyze_round_trip_on_synth_world() {
    let tmp = TempDir::new().unwrap();
    let world = synth_world(tmp.path());
    let manifest = world.join("manifest.toml");
    let manifest = manifest.to_str().unwrap();

    let out = run_in(tmp.path(), &["ingest", "--manifest", manifest, "--output", "ing"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let csv = std::fs::read_to_string(tmp.path().join("ing/ingest.csv")).unwrap();
    // 4 translated corpora plus the original, after the header.
    assert_eq!(csv.lines().count(), 6, "ingest.csv:\n{csv}");
    assert!(csv.lines().next().unwrap().starts_with("path,source_language"));

    let out = run_in(
        tmp.path(),
        &[
            "features",
            "--manifest",
            manifest,
            "--feature-set",
            "function-words",
            "--function-words",
            world.join("function_words.txt").to_str().unwrap(),
            "--chunk-tokens",
            "600",
            "--output",
            "feats",
            "--format",
            "json",
        ],
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("feats/features.json")).unwrap())
            .unwrap();
    assert_eq!(doc["feature_set"], "function-words");
    assert!(doc["rows"].as_array().unwrap().len() >= 5);

    let out = run_in(
        tmp.path(),
        &["analyze", "--manifest", manifest, "--output", "ana", "--format", "json"],
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let rows: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("ana/analysis.json")).unwrap())
            .unwrap();
    // 5 corpora x 5 phenomena.
    assert_eq!(rows.as_array().unwrap().len(), 25);
}

#[test]
fn classify_matches_experiment_artifacts() {
    let tmp = TempDir::new().unwrap();
    let world = synth_world(tmp.path());
    let config = world.join("experiment.toml");
    let config = config.to_str().unwrap();

    let classify = run_in(
        tmp.path(),
        &["classify", "--config", config, "--task", "ot", "--output", "c"],
    );
    assert_eq!(code(&classify), 0, "stderr: {}", stderr(&classify));
    let experiment = run_in(
        tmp.path(),
        &["experiment", "--config", config, "--task", "ot", "--output", "e"],
    );
    assert_eq!(code(&experiment), 0, "stderr: {}", stderr(&experiment));

    let a = std::fs::read(tmp.path().join("c/ot_report.json")).unwrap();
    let b = std::fs::read(tmp.path().join("e/ot_report.json")).unwrap();
    assert_eq!(a, b, "classify and experiment disagree on the same task");
}
