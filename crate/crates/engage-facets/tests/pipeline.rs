//! End-to-end library tests: generated corpus through discretization,
//! feature assembly, labeling, balancing, and cross-validation, checked
//! against the generator's ground truth.

use engage_facets::classifiers::{ClassifierKind, ClassifierSpec};
use engage_facets::dataset::{
    attach_labels, balance, facet_of, EngagementState, Facet, LabeledDataset,
};
use engage_facets::evaluation::cross_validate;
use engage_facets::features::{assemble_features, FeatureSchema, KeywordConfig, FEATURE_COUNT};
use engage_facets::synthgen::{generate_corpus, generate_interaction, ScenarioConfig};
use engage_facets::timeline::{
    discretize, parse_tier_file, validate_bundle, write_tier_file, Channel, ColumnKey,
    InteractionBundle, Owner,
};

const RATE: f64 = 5.0;

fn small_config(seed: u64) -> ScenarioConfig {
    let mut config = ScenarioConfig::default_config(seed);
    config.phases[0].duration_ms = 72_000;
    config.phases[1].duration_ms = 48_000;
    config
}

fn extract_dataset(bundle: &InteractionBundle, rate: f64) -> LabeledDataset {
    let mut clocked = bundle.clone();
    clocked.frame_rate_hz = rate;
    let table = discretize(&clocked).unwrap();
    let schema = FeatureSchema::v1();
    let keywords = KeywordConfig::default();
    let mut dataset = LabeledDataset::new(schema.version.clone());
    for owner in [Owner::Participant1, Owner::Participant2] {
        let matrix = assemble_features(&table, owner, &schema, &keywords).unwrap();
        let states = table
            .column(ColumnKey::new(owner, Channel::EngagementState))
            .unwrap();
        dataset.rows.extend(attach_labels(&matrix, states).unwrap());
    }
    dataset
}

/// Frames whose start instant lies in [start, end) at `rate`, computed
/// independently of the discretizer.
fn frames_covered(start_ms: u64, end_ms: u64, rate: f64) -> usize {
    let first = (start_ms as f64 * rate / 1000.0).ceil() as usize;
    let last = (end_ms as f64 * rate / 1000.0).ceil() as usize;
    last - first
}

#[test]
fn generated_bundles_survive_a_tier_file_round_trip() {
    let bundle = generate_interaction(&small_config(3)).unwrap();
    let text = write_tier_file(&bundle.tiers);
    let parsed = parse_tier_file(&text).unwrap();
    assert_eq!(parsed.len(), bundle.tiers.len());
    for tier in &bundle.tiers {
        let round = parsed.iter().find(|t| t.key == tier.key).unwrap();
        assert_eq!(round.segments(), tier.segments());
    }
    let rebuilt = InteractionBundle::from_tiers("x", parsed, RATE).unwrap();
    assert_eq!(rebuilt.span_ms, bundle.span_ms);
    assert!(validate_bundle(&rebuilt).is_empty());
}

#[test]
fn attached_label_counts_match_ground_truth_segment_arithmetic() {
    let bundle = generate_interaction(&small_config(11)).unwrap();
    let dataset = extract_dataset(&bundle, RATE);

    // Oracle: per-facet frame counts from the raw state segments.
    let mut expected = [0usize; Facet::COUNT];
    for owner in [Owner::Participant1, Owner::Participant2] {
        let tier = bundle
            .tier(ColumnKey::new(owner, Channel::EngagementState))
            .unwrap();
        for segment in tier.segments() {
            let state = EngagementState::from_code(&segment.label).unwrap();
            expected[facet_of(state).index()] +=
                frames_covered(segment.start_ms, segment.end_ms, RATE);
        }
    }
    assert_eq!(dataset.class_counts(), expected);
    // State tiers cover the whole span, so no frame is dropped.
    let total_frames = 2 * engage_facets::timeline::frame_count(bundle.span_ms, RATE);
    assert_eq!(dataset.len(), total_frames);
}

#[test]
fn feature_rows_are_binary_with_bounded_onehot_groups() {
    let bundle = generate_interaction(&small_config(5)).unwrap();
    let mut clocked = bundle.clone();
    clocked.frame_rate_hz = RATE;
    let table = discretize(&clocked).unwrap();
    let matrix = assemble_features(
        &table,
        Owner::Participant1,
        &FeatureSchema::v1(),
        &KeywordConfig::default(),
    )
    .unwrap();
    // One-hot group bounds: vfoa 0..9 sums <= 1, robot activity 18..20
    // sums == 1 exactly, robot addressee 20..29 sums <= 1.
    for row in matrix.rows() {
        assert_eq!(row.len(), FEATURE_COUNT);
        assert!(row.iter().all(|&v| v <= 1));
        let vfoa_sum: u8 = row[0..9].iter().sum();
        assert!(vfoa_sum <= 1);
        let activity_sum: u8 = row[18..20].iter().sum();
        assert_eq!(activity_sum, 1);
        let robot_addr_sum: u8 = row[20..29].iter().sum();
        assert!(robot_addr_sum <= 1);
    }
}

#[test]
fn balanced_corpus_cross_validates_well_above_chance() {
    let corpus = generate_corpus(2, &small_config(21), 21).unwrap();
    let mut pooled = LabeledDataset::new("v1");
    for bundle in &corpus {
        pooled.rows.extend(extract_dataset(bundle, RATE).rows);
    }
    let balanced = balance(&pooled, 21).unwrap();
    let counts = balanced.class_counts();
    assert!(counts.iter().all(|&c| c == counts[0]));

    let spec = ClassifierSpec::new(ClassifierKind::NaiveBayes, 21);
    let report = cross_validate(&balanced, &spec, 5, 21).unwrap();
    assert!(
        report.accuracy > 0.6,
        "naive bayes accuracy {} at coupled defaults",
        report.accuracy
    );
    assert_eq!(report.confusion.total() as usize, balanced.len());
}
