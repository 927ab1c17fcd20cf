//! Labeled datasets over the three engagement facets: state-to-facet
//! mapping, label attachment, class balancing, and stratified folds.
//!
//! Instances are frames. Rows from all interactions and both participants
//! are pooled before balancing; balancing undersamples uniformly to the
//! minority facet.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::features::{FeatureMatrix, FeatureSchema, FEATURE_COUNT};
use crate::timeline::Owner;
use crate::vocab::NO_LABEL;
use crate::{Error, Result};

/// The 8 fine-grained engagement states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EngagementState {
    /// Listening to the robot.
    Listening,
    /// Waiting for the robot's feedback after answering.
    WaitingFeedback,
    /// Thinking about a response to the robot's question.
    Thinking,
    /// Concentrating with the robot.
    Concentrating,
    /// Listening to the other participant answering the robot.
    ListeningPerson2,
    /// Responding to the robot.
    Responding,
    /// Showing a positive reaction to the robot.
    PositiveReaction,
    /// Showing a negative reaction to the robot.
    NegativeReaction,
}

impl EngagementState {
    pub const ALL: [EngagementState; 8] = [
        EngagementState::Listening,
        EngagementState::WaitingFeedback,
        EngagementState::Thinking,
        EngagementState::Concentrating,
        EngagementState::ListeningPerson2,
        EngagementState::Responding,
        EngagementState::PositiveReaction,
        EngagementState::NegativeReaction,
    ];

    /// The annotation code used in tier files.
    pub fn code(self) -> &'static str {
        match self {
            EngagementState::Listening => "EL",
            EngagementState::WaitingFeedback => "EWF",
            EngagementState::Thinking => "ETh",
            EngagementState::Concentrating => "EC",
            EngagementState::ListeningPerson2 => "ELP2",
            EngagementState::Responding => "ER",
            EngagementState::PositiveReaction => "EPR",
            EngagementState::NegativeReaction => "ENR",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|s| s.code() == code)
    }
}

impl fmt::Display for EngagementState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// The three engagement facets, in canonical class order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Facet {
    Behavioral,
    Emotional,
    Mental,
}

impl Facet {
    pub const ALL: [Facet; 3] = [Facet::Behavioral, Facet::Emotional, Facet::Mental];
    pub const COUNT: usize = 3;

    pub fn index(self) -> usize {
        match self {
            Facet::Behavioral => 0,
            Facet::Emotional => 1,
            Facet::Mental => 2,
        }
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Facet::Behavioral => "behavioral",
            Facet::Emotional => "emotional",
            Facet::Mental => "mental",
        }
    }
}

impl fmt::Display for Facet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Facet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Facet::ALL
            .iter()
            .copied()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown facet '{s}'")))
    }
}

/// Maps a fine-grained engagement state to its facet. Total: mental for the
/// five attention states, behavioral for responding, emotional for the two
/// reactions.
pub fn facet_of(state: EngagementState) -> Facet {
    match state {
        EngagementState::Listening
        | EngagementState::WaitingFeedback
        | EngagementState::Thinking
        | EngagementState::Concentrating
        | EngagementState::ListeningPerson2 => Facet::Mental,
        EngagementState::Responding => Facet::Behavioral,
        EngagementState::PositiveReaction | EngagementState::NegativeReaction => Facet::Emotional,
    }
}

/// Where a labeled row came from.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Provenance {
    pub interaction_id: String,
    pub participant: Owner,
    pub frame_index: usize,
}

/// One feature vector with its facet label and provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledRow {
    pub features: Vec<u8>,
    pub facet: Facet,
    pub provenance: Provenance,
}

/// A set of labeled rows sharing one feature schema version.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledDataset {
    pub schema_version: String,
    pub rows: Vec<LabeledRow>,
}

impl LabeledDataset {
    pub fn new(schema_version: impl Into<String>) -> Self {
        Self {
            schema_version: schema_version.into(),
            rows: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Row counts per facet, in class order.
    pub fn class_counts(&self) -> [usize; Facet::COUNT] {
        let mut counts = [0; Facet::COUNT];
        for row in &self.rows {
            counts[row.facet.index()] += 1;
        }
        counts
    }
}

/// Pairs feature rows with facet labels from the per-frame engagement state
/// column. `NoLabel` frames are dropped; any other unknown code is an error.
pub fn attach_labels(features: &FeatureMatrix, states: &[String]) -> Result<Vec<LabeledRow>> {
    if features.n_rows != states.len() {
        return Err(Error::LengthMismatch {
            context: "attach_labels",
            left: features.n_rows,
            right: states.len(),
        });
    }
    let mut rows = Vec::new();
    for (frame, label) in states.iter().enumerate() {
        if label == NO_LABEL {
            continue;
        }
        let state = EngagementState::from_code(label).ok_or_else(|| Error::UnknownState {
            label: label.clone(),
            frame,
        })?;
        rows.push(LabeledRow {
            features: features.row(frame).to_vec(),
            facet: facet_of(state),
            provenance: Provenance {
                interaction_id: features.interaction_id.clone(),
                participant: features.participant,
                frame_index: frame,
            },
        });
    }
    Ok(rows)
}

/// First `amount` elements of a seeded partial Fisher-Yates shuffle of
/// `pool`.
fn sample_without_replacement(
    rng: &mut ChaCha8Rng,
    mut pool: Vec<usize>,
    amount: usize,
) -> Vec<usize> {
    debug_assert!(amount <= pool.len());
    for i in 0..amount {
        let j = rng.random_range(i..pool.len());
        pool.swap(i, j);
    }
    pool.truncate(amount);
    pool
}

/// Undersamples every facet to the minority facet's count, uniformly without
/// replacement. Output rows keep the input's relative order; the result is
/// deterministic for a given seed.
pub fn balance(dataset: &LabeledDataset, seed: u64) -> Result<LabeledDataset> {
    let mut by_facet: [Vec<usize>; Facet::COUNT] = Default::default();
    for (i, row) in dataset.rows.iter().enumerate() {
        by_facet[row.facet.index()].push(i);
    }
    for facet in Facet::ALL {
        if by_facet[facet.index()].is_empty() {
            return Err(Error::MissingFacet(facet.name()));
        }
    }
    let target = by_facet.iter().map(Vec::len).min().unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut selected: Vec<usize> = Vec::with_capacity(target * Facet::COUNT);
    for pool in by_facet {
        selected.extend(sample_without_replacement(&mut rng, pool, target));
    }
    selected.sort_unstable();

    Ok(LabeledDataset {
        schema_version: dataset.schema_version.clone(),
        rows: selected
            .into_iter()
            .map(|i| dataset.rows[i].clone())
            .collect(),
    })
}

/// Splits row indices into `k` stratified folds: disjoint, exhaustive, with
/// per-class fold counts differing by at most one. Deterministic per seed.
pub fn stratified_kfold(
    dataset: &LabeledDataset,
    k: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::InvalidK(k));
    }
    let mut by_facet: [Vec<usize>; Facet::COUNT] = Default::default();
    for (i, row) in dataset.rows.iter().enumerate() {
        by_facet[row.facet.index()].push(i);
    }
    for facet in Facet::ALL {
        let count = by_facet[facet.index()].len();
        if count > 0 && count < k {
            return Err(Error::ClassSmallerThanK {
                class: facet.name(),
                count,
                k,
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    for pool in &mut by_facet {
        let n = pool.len();
        let shuffled = sample_without_replacement(&mut rng, std::mem::take(pool), n);
        for (pos, row) in shuffled.into_iter().enumerate() {
            folds[pos % k].push(row);
        }
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(folds)
}

// ---------------------------------------------------------------------------
// CSV persistence
// ---------------------------------------------------------------------------

const PROVENANCE_COLUMNS: [&str; 3] = ["interaction_id", "participant_id", "frame_index"];

/// Serializes a dataset: a `# schema=<version>` line, a header row, then one
/// record per row with 39 feature columns, the facet, and provenance.
pub fn write_dataset_csv(dataset: &LabeledDataset, schema: &FeatureSchema) -> Result<String> {
    if schema.version != dataset.schema_version {
        return Err(Error::SchemaMismatch {
            expected: dataset.schema_version.clone(),
            found: schema.version.clone(),
        });
    }
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = schema.column_names();
    header.push("facet");
    header.extend(PROVENANCE_COLUMNS);
    writer.write_record(&header)?;
    for row in &dataset.rows {
        let mut record: Vec<String> =
            row.features.iter().map(|v| v.to_string()).collect();
        record.push(row.facet.name().to_string());
        record.push(row.provenance.interaction_id.clone());
        record.push(row.provenance.participant.token().to_string());
        record.push(row.provenance.frame_index.to_string());
        writer.write_record(&record)?;
    }
    let body = String::from_utf8(writer.into_inner().expect("in-memory writer"))
        .expect("csv output is utf-8");
    Ok(format!("# schema={}\n{body}", dataset.schema_version))
}

/// Parses dataset CSV content written by [`write_dataset_csv`].
pub fn read_dataset_csv(text: &str) -> Result<LabeledDataset> {
    let (first, rest) = text
        .split_once('\n')
        .ok_or_else(|| Error::DatasetFormat("empty file".into()))?;
    let version = first
        .strip_prefix("# schema=")
        .ok_or_else(|| Error::DatasetFormat("missing `# schema=` header line".into()))?
        .trim()
        .to_string();
    if version.is_empty() {
        return Err(Error::DatasetFormat("empty schema version".into()));
    }

    let mut reader = csv::Reader::from_reader(rest.as_bytes());
    let header = reader.headers()?.clone();
    let expected_len = FEATURE_COUNT + 1 + PROVENANCE_COLUMNS.len();
    if header.len() != expected_len {
        return Err(Error::DatasetFormat(format!(
            "expected {expected_len} columns, found {}",
            header.len()
        )));
    }

    let mut dataset = LabeledDataset::new(version);
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let mut features = Vec::with_capacity(FEATURE_COUNT);
        for j in 0..FEATURE_COUNT {
            match &record[j] {
                "0" => features.push(0),
                "1" => features.push(1),
                other => {
                    return Err(Error::DatasetFormat(format!(
                        "record {i}: feature value '{other}' is not binary"
                    )));
                }
            }
        }
        let facet: Facet = record[FEATURE_COUNT].parse()?;
        let interaction_id = record[FEATURE_COUNT + 1].to_string();
        let participant = match &record[FEATURE_COUNT + 2] {
            "p1" => Owner::Participant1,
            "p2" => Owner::Participant2,
            other => {
                return Err(Error::DatasetFormat(format!(
                    "record {i}: unknown participant '{other}'"
                )));
            }
        };
        let frame_index: usize = record[FEATURE_COUNT + 3].parse().map_err(|_| {
            Error::DatasetFormat(format!(
                "record {i}: bad frame index '{}'",
                &record[FEATURE_COUNT + 3]
            ))
        })?;
        dataset.rows.push(LabeledRow {
            features,
            facet,
            provenance: Provenance {
                interaction_id,
                participant,
                frame_index,
            },
        });
    }
    Ok(dataset)
}

/// Serializes fold assignments as the `row_id,fold` sidecar.
pub fn write_folds_csv(folds: &[Vec<usize>]) -> String {
    let mut assignment: Vec<(usize, usize)> = folds
        .iter()
        .enumerate()
        .flat_map(|(fold, rows)| rows.iter().map(move |&r| (r, fold)))
        .collect();
    assignment.sort_unstable();
    let mut out = String::from("row_id,fold\n");
    for (row, fold) in assignment {
        out.push_str(&format!("{row},{fold}\n"));
    }
    out
}
