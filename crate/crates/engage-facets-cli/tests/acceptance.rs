//! Acceptance suite. Each test implements one acceptance criterion at its
//! stated tolerance and prints one pass line (visible with
//! `cargo test --test acceptance -- --nocapture`).

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use engage_facets::classifiers::{gradient_check, ClassifierKind, ClassifierSpec, TrainingData};
use engage_facets::dataset::{
    balance, facet_of, stratified_kfold, EngagementState, Facet, LabeledDataset, LabeledRow,
    Provenance,
};
use engage_facets::evaluation::parse_report_json;
use engage_facets::features::{mutual_and, one_hot, vfoa_shift, FEATURE_COUNT};
use engage_facets::timeline::{
    discretize, segments_from_frames, ColumnKey, InteractionBundle, Owner, SegmentTier,
};
use engage_facets::vocab::{self, NO_LABEL};

fn run_ok(args: &[&str], dir: &Path) {
    let output = Command::new(env!("CARGO_BIN_EXE_engage-facets"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs");
    assert!(
        output.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&output.stderr)
    );
}

fn dataset_with_counts(counts: [usize; 3]) -> LabeledDataset {
    let mut dataset = LabeledDataset::new("v1");
    let mut id = 0;
    for (&facet, &count) in Facet::ALL.iter().zip(&counts) {
        for _ in 0..count {
            let mut features = vec![0u8; FEATURE_COUNT];
            features[facet.index()] = 1;
            dataset.rows.push(LabeledRow {
                features,
                facet,
                provenance: Provenance {
                    interaction_id: "acc".into(),
                    participant: Owner::Participant1,
                    frame_index: id,
                },
            });
            id += 1;
        }
    }
    dataset
}

#[test]
fn criterion_1_metrics_oracle_reproduces_reference_tables() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("matrix.csv"),
        "6347,1318,916\n384,4893,1153\n683,1203,5345\n",
    )
    .unwrap();
    let started = Instant::now();
    let output = Command::new(env!("CARGO_BIN_EXE_engage-facets"))
        .args(["metrics", "--matrix", "matrix.csv"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    let elapsed = started.elapsed();
    assert!(output.status.success());
    let text = String::from_utf8_lossy(&output.stdout).into_owned();

    let expect = [
        "tpr                0.856       0.660       0.721",
        "fpr                0.151       0.104       0.127",
        "precision          0.740       0.761       0.739",
        "recall             0.856       0.660       0.721",
        "f_score            0.794       0.707       0.730",
        "accuracy: 74.57%",
    ];
    for line in expect {
        assert!(text.contains(line), "missing `{line}` in:\n{text}");
    }
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    println!("criterion 1 PASS: metrics oracle exact at 3-decimal rounding, {elapsed:?}");
}

#[test]
fn criterion_2_balancing_arithmetic() {
    let dataset = dataset_with_counts([10_331, 7_414, 80_902]);
    let started = Instant::now();
    let balanced = balance(&dataset, 42).unwrap();
    let elapsed = started.elapsed();
    assert_eq!(balanced.class_counts(), [7_414, 7_414, 7_414]);
    assert_eq!(balanced.len(), 22_242);
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    println!("criterion 2 PASS: 10331/7414/80902 balances to 3 x 7414 = 22242, {elapsed:?}");
}

#[test]
fn criterion_3_stratification_arithmetic() {
    let balanced = balance(&dataset_with_counts([10_331, 7_414, 80_902]), 42).unwrap();
    let folds = stratified_kfold(&balanced, 5, 42).unwrap();
    assert_eq!(folds.len(), 5);
    for (i, fold) in folds.iter().enumerate() {
        let mut per_class = [0usize; 3];
        for &row in fold {
            per_class[balanced.rows[row].facet.index()] += 1;
        }
        for (class, &count) in per_class.iter().enumerate() {
            assert!(
                count == 1482 || count == 1483,
                "fold {i} class {class}: {count}"
            );
        }
    }
    println!("criterion 3 PASS: per-class fold counts all in {{1482, 1483}}");
}

#[test]
fn criterion_4_end_to_end_classifier_floor() {
    let dir = tempfile::tempdir().unwrap();
    let started = Instant::now();
    run_ok(
        &[
            "generate",
            "--out",
            "corpus",
            "--seed",
            "42",
            "--n-interactions",
            "4",
            "--duration-ms",
            "660000",
            "--frame-rate",
            "5",
        ],
        dir.path(),
    );
    run_ok(
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
    );
    run_ok(
        &[
            "evaluate",
            "--input",
            "features",
            "--out",
            "reports",
            "--seed",
            "42",
            "--k",
            "5",
        ],
        dir.path(),
    );
    let elapsed = started.elapsed();

    let json = fs::read_to_string(dir.path().join("reports/report.json")).unwrap();
    let report = parse_report_json(&json).unwrap();
    assert_eq!(report.reports.len(), 4, "expected all four classifiers");
    let accuracy_of = |kind: &str| -> f64 {
        report
            .reports
            .iter()
            .find(|r| r.classifier == kind)
            .unwrap_or_else(|| panic!("missing {kind}"))
            .accuracy
    };
    for kind in ["naive_bayes", "logistic", "linear_svm", "ann"] {
        let accuracy = accuracy_of(kind);
        assert!(accuracy > 0.60, "{kind} accuracy {accuracy} below 60%");
    }
    let ann = accuracy_of("ann");
    let nb = accuracy_of("naive_bayes");
    assert!(
        ann >= nb - 0.05,
        "ann {ann} more than 5 points below naive bayes {nb}"
    );
    assert!(elapsed < Duration::from_secs(300), "took {elapsed:?}");
    println!(
        "criterion 4 PASS: pooled 5-fold accuracies nb {:.3} lr {:.3} svm {:.3} ann {:.3} in {elapsed:?}",
        nb,
        accuracy_of("logistic"),
        accuracy_of("linear_svm"),
        ann
    );
}

#[test]
fn criterion_5_stream_operator_property_suite() {
    const CASES: usize = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let labels = ["nao", "other_participant", "windows", "table", NO_LABEL];

    // mutual_and: commutativity, idempotence, pointwise <=.
    for _ in 0..CASES {
        let n = rng.random_range(1..64);
        let a: Vec<u8> = (0..n).map(|_| rng.random_range(0..=1) as u8).collect();
        let b: Vec<u8> = (0..n).map(|_| rng.random_range(0..=1) as u8).collect();
        let ab = mutual_and(&a, &b).unwrap();
        assert_eq!(ab, mutual_and(&b, &a).unwrap());
        assert_eq!(mutual_and(&a, &a).unwrap(), a);
        for i in 0..n {
            assert!(ab[i] <= a[i] && ab[i] <= b[i]);
        }
    }

    // vfoa_shift sum equals a brute-force adjacent-change count.
    for _ in 0..CASES {
        let n = rng.random_range(1..64);
        let column: Vec<String> = (0..n)
            .map(|_| labels[rng.random_range(0..labels.len())].to_string())
            .collect();
        let shifts = vfoa_shift(&column).unwrap();
        let total: u32 = shifts.iter().map(|&v| u32::from(v)).sum();
        let mut brute = 0u32;
        for i in 1..n {
            if column[i] != column[i - 1] {
                brute += 1;
            }
        }
        assert_eq!(total, brute);
    }

    // one-hot row sums are 0 or 1.
    let vocab = vocab::vfoa();
    for _ in 0..CASES {
        let n = rng.random_range(1..64);
        let column: Vec<String> = (0..n)
            .map(|_| labels[rng.random_range(0..labels.len())].to_string())
            .collect();
        for row in one_hot(&column, &vocab) {
            let sum: u8 = row.iter().sum();
            assert!(sum <= 1);
        }
    }

    // discretize(segments_from_frames(c)) == c at assorted frame rates.
    let rates = [5.0, 10.0, 12.5, 25.0, 30.0, 100.0];
    for _ in 0..CASES {
        let rate = rates[rng.random_range(0..rates.len())];
        let n = rng.random_range(1..64);
        let column: Vec<String> = (0..n)
            .map(|_| labels[rng.random_range(0..labels.len())].to_string())
            .collect();
        let segments = segments_from_frames(&column, rate).unwrap();
        let tier = SegmentTier::new("p1.vfoa".parse::<ColumnKey>().unwrap(), segments).unwrap();
        let span = (n as f64 * 1000.0 / rate).ceil() as u64;
        let bundle = InteractionBundle::new("rt", vec![tier], span, rate).unwrap();
        let table = discretize(&bundle).unwrap();
        let got = table.column("p1.vfoa".parse().unwrap()).unwrap();
        assert_eq!(&got[..n], &column[..], "rate {rate}");
        for extra in &got[n..] {
            assert_eq!(extra, NO_LABEL);
        }
    }

    println!("criterion 5 PASS: 4 property suites x {CASES} randomized cases, zero failures");
}

#[test]
fn criterion_6_gradient_correctness() {
    let mut worst: f64 = 0.0;
    for ds in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + ds);
        let rows = rng.random_range(5..=20);
        let width = rng.random_range(4..=12);
        let features: Vec<Vec<u8>> = (0..rows)
            .map(|_| (0..width).map(|_| rng.random_range(0..=1) as u8).collect())
            .collect();
        let labels: Vec<Facet> = (0..rows)
            .map(|i| Facet::from_index(i % 3).unwrap())
            .collect();
        let data = TrainingData::new(
            "v1",
            features.iter().map(Vec::as_slice).collect(),
            labels,
        )
        .unwrap();

        let logistic = ClassifierSpec::new(ClassifierKind::Logistic, 2000 + ds);
        let err = gradient_check(&logistic, &data).unwrap();
        assert!(err < 1e-4, "logistic dataset {ds}: {err}");
        worst = worst.max(err);

        let mut ann = ClassifierSpec::new(ClassifierKind::Ann, 3000 + ds);
        ann.hyper.hidden_units = 4;
        let err = gradient_check(&ann, &data).unwrap();
        assert!(err < 1e-4, "ann dataset {ds}: {err}");
        worst = worst.max(err);
    }
    println!("criterion 6 PASS: max relative gradient error {worst:.3e} over 10 datasets");
}

#[test]
fn criterion_7_full_pipeline_determinism() {
    let dir = tempfile::tempdir().unwrap();
    for tag in ["one", "two"] {
        let corpus = format!("{tag}/corpus");
        let features = format!("{tag}/features");
        let reports = format!("{tag}/reports");
        run_ok(
            &[
                "generate",
                "--out",
                &corpus,
                "--seed",
                "7",
                "--n-interactions",
                "2",
                "--duration-ms",
                "120000",
                "--frame-rate",
                "5",
            ],
            dir.path(),
        );
        run_ok(
            &[
                "extract",
                "--input",
                &corpus,
                "--out",
                &features,
                "--frame-rate",
                "5",
            ],
            dir.path(),
        );
        run_ok(
            &[
                "evaluate",
                "--input",
                &features,
                "--out",
                &reports,
                "--seed",
                "7",
                "--k",
                "3",
            ],
            dir.path(),
        );
    }

    let mut compared = 0usize;
    let mut stack = vec![dir.path().join("one")];
    while let Some(current) = stack.pop() {
        for entry in fs::read_dir(&current).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let relative = path.strip_prefix(dir.path().join("one")).unwrap();
                let twin = dir.path().join("two").join(relative);
                assert_eq!(
                    fs::read(&path).unwrap(),
                    fs::read(&twin).unwrap(),
                    "{} differs between runs",
                    relative.display()
                );
                compared += 1;
            }
        }
    }
    assert!(compared >= 16, "only {compared} files compared");
    println!("criterion 7 PASS: {compared} pipeline output files byte-identical across reruns");
}

#[test]
fn criterion_8_facet_mapping_totality() {
    let mut preimage = [0usize; 3];
    for state in EngagementState::ALL {
        preimage[facet_of(state).index()] += 1;
    }
    assert_eq!(preimage[Facet::Mental.index()], 5);
    assert_eq!(preimage[Facet::Behavioral.index()], 1);
    assert_eq!(preimage[Facet::Emotional.index()], 2);
    println!("criterion 8 PASS: all 8 states mapped, preimage sizes 5/1/2");
}
