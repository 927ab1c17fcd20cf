//! Command-level tests: exit codes, error messages, layered configuration,
//! and byte-identical reruns.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_engage-facets"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin()
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

#[test]
fn metrics_command_reproduces_reference_values() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("m.csv");
    fs::write(&matrix, "6347,1318,916\n384,4893,1153\n683,1203,5345\n").unwrap();
    let output = run(&["metrics", "--matrix", "m.csv"], dir.path());
    assert!(output.status.success(), "{}", stderr(&output));
    let text = stdout(&output);
    assert!(text.contains("accuracy: 74.57%"), "{text}");
    assert!(text.contains("0.856"));
    assert!(text.contains("0.794"));
}

#[test]
fn metrics_identity_and_uniform_matrices() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("id.csv"), "100,0,0\n0,100,0\n0,0,100\n").unwrap();
    let output = run(&["metrics", "--matrix", "id.csv"], dir.path());
    let text = stdout(&output);
    assert!(text.contains("accuracy: 100.00%"), "{text}");
    assert!(text.contains("fpr                0.000       0.000       0.000"));

    fs::write(dir.path().join("uni.csv"), "5,5,5\n5,5,5\n5,5,5\n").unwrap();
    let output = run(&["metrics", "--matrix", "uni.csv"], dir.path());
    assert!(stdout(&output).contains("accuracy: 33.33%"));
}

#[test]
fn metrics_malformed_matrix_exits_1_and_missing_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.csv"), "1,2\n3,4\n").unwrap();
    let output = run(&["metrics", "--matrix", "bad.csv"], dir.path());
    assert_eq!(output.status.code(), Some(1), "{}", stderr(&output));

    let output = run(&["metrics", "--matrix", "nope.csv"], dir.path());
    assert_eq!(output.status.code(), Some(2), "{}", stderr(&output));
}

#[test]
fn unknown_flags_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(&["generate", "--bogus"], dir.path());
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn generate_rejects_zero_interactions() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(
        &["generate", "--n-interactions", "0", "--out", "c"],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(1), "{}", stderr(&output));
}

#[test]
fn generate_unwritable_path_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("blocker"), "file, not a dir").unwrap();
    let output = run(
        &[
            "generate",
            "--out",
            "blocker/corpus",
            "--n-interactions",
            "1",
            "--duration-ms",
            "5000",
        ],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(2), "{}", stderr(&output));
}

#[test]
fn generate_same_seed_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let output = run(
            &[
                "generate",
                "--out",
                out,
                "--seed",
                "9",
                "--n-interactions",
                "2",
                "--duration-ms",
                "20000",
            ],
            dir.path(),
        );
        assert!(output.status.success(), "{}", stderr(&output));
    }
    for name in ["int_000", "int_001"] {
        for file in ["tiers.tsv", "truth.csv"] {
            let a = fs::read(dir.path().join("a").join(name).join(file)).unwrap();
            let b = fs::read(dir.path().join("b").join(name).join(file)).unwrap();
            assert_eq!(a, b, "{name}/{file} differs");
        }
    }
}

#[test]
fn extract_missing_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(&["extract", "--input", "missing"], dir.path());
    assert_eq!(output.status.code(), Some(2), "{}", stderr(&output));
}

#[test]
fn extract_corrupted_line_reports_line_number_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let interaction = dir.path().join("corpus/int_000");
    fs::create_dir_all(&interaction).unwrap();
    fs::write(
        interaction.join("tiers.tsv"),
        "p1.vfoa\t0\t400\tnao\np1.vfoa\tbroken\t800\tnao\n",
    )
    .unwrap();
    let output = run(
        &["extract", "--input", "corpus", "--out", "features"],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(2));
    let err = stderr(&output);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn extract_missing_channel_names_file_and_channel() {
    let dir = tempfile::tempdir().unwrap();
    let interaction = dir.path().join("corpus/int_000");
    fs::create_dir_all(&interaction).unwrap();
    // Only a p1 vfoa tier: everything else is missing.
    fs::write(interaction.join("tiers.tsv"), "p1.vfoa\t0\t4000\tnao\n").unwrap();
    let output = run(
        &["extract", "--input", "corpus", "--out", "features"],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(2));
    let err = stderr(&output);
    assert!(err.contains("tiers.tsv"), "{err}");
    assert!(err.contains("p1.addressee"), "{err}");
}

#[test]
fn config_file_applies_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.conf"),
        "seed = 5\nn_interactions = 1\nduration_ms = 10000\nout = from_config\n",
    )
    .unwrap();

    // Config file only.
    let output = run(&["generate", "--config", "run.conf"], dir.path());
    assert!(output.status.success(), "{}", stderr(&output));
    assert!(dir.path().join("from_config/int_000/tiers.tsv").is_file());

    // Flag overrides the configured output directory.
    let output = run(
        &["generate", "--config", "run.conf", "--out", "from_flag"],
        dir.path(),
    );
    assert!(output.status.success(), "{}", stderr(&output));
    assert!(dir.path().join("from_flag/int_000/tiers.tsv").is_file());
    let a = fs::read(dir.path().join("from_config/int_000/tiers.tsv")).unwrap();
    let b = fs::read(dir.path().join("from_flag/int_000/tiers.tsv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn evaluate_training_blowup_exits_3_with_incomplete_report() {
    let dir = tempfile::tempdir().unwrap();
    let ok = |o: &Output| assert!(o.status.success(), "{}", stderr(o));
    ok(&run(
        &[
            "generate",
            "--out",
            "corpus",
            "--seed",
            "4",
            "--n-interactions",
            "1",
            "--duration-ms",
            "120000",
            "--frame-rate",
            "5",
        ],
        dir.path(),
    ));
    ok(&run(
        &[
            "extract",
            "--input",
            "corpus",
            "--out",
            "features",
            "--frame-rate",
            "5",
        ],
        dir.path(),
    ));
    // A learning rate large enough to overflow the weights into NaN loss.
    fs::write(dir.path().join("run.conf"), "logistic_learning_rate = 1e308\n").unwrap();
    let output = run(
        &[
            "evaluate",
            "--config",
            "run.conf",
            "--input",
            "features",
            "--out",
            "reports",
            "--seed",
            "4",
            "--k",
            "2",
            "--classifier",
            "logistic",
            "--classifier",
            "naive_bayes",
        ],
        dir.path(),
    );
    assert_eq!(output.status.code(), Some(3), "{}", stderr(&output));
    let json = fs::read_to_string(dir.path().join("reports/report.json")).unwrap();
    let report: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(report["incomplete"], serde_json::json!(true));
    let text = fs::read_to_string(dir.path().join("reports/report.txt")).unwrap();
    assert!(text.contains("INCOMPLETE"), "{text}");
    // The healthy classifier still reported.
    assert!(text.contains("naive_bayes"), "{text}");
}

#[test]
fn evaluate_on_tiny_corpus_writes_reports_and_models() {
    let dir = tempfile::tempdir().unwrap();
    let ok = |o: &Output| assert!(o.status.success(), "{}", stderr(o));
    ok(&run(
        &[
            "generate",
            "--out",
            "corpus",
            "--seed",
            "3",
            "--n-interactions",
            "1",
            "--duration-ms",
            "120000",
            "--frame-rate",
            "5",
        ],
        dir.path(),
    ));
    ok(&run(
        &[
            "extract",
            "--input",
            "corpus",
            "--out",
            "features",
            "--frame-rate",
            "5",
        ],
        dir.path(),
    ));
    ok(&run(
        &[
            "evaluate",
            "--input",
            "features",
            "--out",
            "reports",
            "--seed",
            "3",
            "--k",
            "2",
            "--classifier",
            "naive_bayes",
            "--classifier",
            "logistic",
        ],
        dir.path(),
    ));
    let reports = dir.path().join("reports");
    for file in ["report.txt", "report.json", "balanced.csv", "folds.csv"] {
        assert!(reports.join(file).is_file(), "missing {file}");
    }
    for model in ["naive_bayes.model", "logistic.model"] {
        assert!(reports.join("models").join(model).is_file(), "missing {model}");
    }
    let text = fs::read_to_string(reports.join("report.txt")).unwrap();
    assert!(text.contains("classifier accuracy (%)"));
    assert!(text.contains("naive_bayes"));
    assert!(text.contains("logistic"));
}
