//! Annotation timelines: tier files, interaction bundles, and discretization
//! onto a common frame clock.
//!
//! A tier file is TSV, one segment per line:
//! `tier_name \t start_ms \t end_ms \t label_or_text`, with tier names
//! following the `<owner>.<channel>` convention (`p1.vfoa`, `robot.utterance`).
//! Robot utterance segments carry free text in the label field.
//!
//! Frame `f` covers the half-open interval `[f/rate, (f+1)/rate)`; a frame
//! takes the label of the segment containing its start instant, otherwise the
//! reserved label `NoLabel`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::vocab::{self, Vocabulary, NO_LABEL};
use crate::{Error, Result};

/// Highest supported frame rate. Above this the integer-millisecond segment
/// representation can no longer round-trip frame columns.
pub const MAX_FRAME_RATE_HZ: f64 = 1000.0;

/// An interaction entity owning annotation tiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Owner {
    Participant1,
    Participant2,
    Robot,
}

impl Owner {
    pub fn token(self) -> &'static str {
        match self {
            Owner::Participant1 => "p1",
            Owner::Participant2 => "p2",
            Owner::Robot => "robot",
        }
    }

    /// The other participant; panics for the robot.
    pub fn co_participant(self) -> Owner {
        match self {
            Owner::Participant1 => Owner::Participant2,
            Owner::Participant2 => Owner::Participant1,
            Owner::Robot => panic!("the robot has no co-participant"),
        }
    }
}

impl fmt::Display for Owner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// An annotation channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Channel {
    Vfoa,
    Addressee,
    Speaking,
    Laughter,
    EngagementState,
    UtteranceText,
}

impl Channel {
    pub fn token(self) -> &'static str {
        match self {
            Channel::Vfoa => "vfoa",
            Channel::Addressee => "addressee",
            Channel::Speaking => "speaking",
            Channel::Laughter => "laughter",
            Channel::EngagementState => "engagement",
            Channel::UtteranceText => "utterance",
        }
    }

    /// Channels every participant must provide.
    pub const PARTICIPANT_CHANNELS: [Channel; 5] = [
        Channel::Vfoa,
        Channel::Addressee,
        Channel::Speaking,
        Channel::Laughter,
        Channel::EngagementState,
    ];
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Identifies one column of a [`FrameTable`]: an (owner, channel) pair,
/// rendered as the tier name `<owner>.<channel>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ColumnKey {
    pub owner: Owner,
    pub channel: Channel,
}

impl ColumnKey {
    pub fn new(owner: Owner, channel: Channel) -> Self {
        Self { owner, channel }
    }
}

impl fmt::Display for ColumnKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.owner, self.channel)
    }
}

impl FromStr for ColumnKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (owner, channel) = s.split_once('.').ok_or_else(|| Error::InvalidConfig(
            format!("tier name '{s}' is not of the form <owner>.<channel>"),
        ))?;
        let owner = match owner {
            "p1" => Owner::Participant1,
            "p2" => Owner::Participant2,
            "robot" => Owner::Robot,
            other => {
                return Err(Error::InvalidConfig(format!("unknown owner '{other}'")));
            }
        };
        let channel = match channel {
            "vfoa" => Channel::Vfoa,
            "addressee" => Channel::Addressee,
            "speaking" => Channel::Speaking,
            "laughter" => Channel::Laughter,
            "engagement" => Channel::EngagementState,
            "utterance" => Channel::UtteranceText,
            other => {
                return Err(Error::InvalidConfig(format!("unknown channel '{other}'")));
            }
        };
        Ok(ColumnKey { owner, channel })
    }
}

/// A labeled time interval `[start_ms, end_ms)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub start_ms: u64,
    pub end_ms: u64,
    pub label: String,
}

impl Segment {
    pub fn new(start_ms: u64, end_ms: u64, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if start_ms >= end_ms {
            return Err(Error::InvalidSegment {
                start_ms,
                end_ms,
                message: "start must precede end".into(),
            });
        }
        if label.is_empty() {
            return Err(Error::InvalidSegment {
                start_ms,
                end_ms,
                message: "label is empty".into(),
            });
        }
        Ok(Self {
            start_ms,
            end_ms,
            label,
        })
    }
}

/// A named, time-ordered, non-overlapping list of segments for one channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentTier {
    pub key: ColumnKey,
    segments: Vec<Segment>,
}

impl SegmentTier {
    /// Sorts segments by start time and rejects overlapping pairs. Adjacent
    /// segments (`prev.end == next.start`) are allowed.
    pub fn new(key: ColumnKey, mut segments: Vec<Segment>) -> Result<Self> {
        segments.sort_by_key(|s| (s.start_ms, s.end_ms));
        for pair in segments.windows(2) {
            if pair[0].end_ms > pair[1].start_ms {
                return Err(Error::OverlappingSegments {
                    tier: key.to_string(),
                    at_ms: pair[1].start_ms,
                });
            }
        }
        Ok(Self { key, segments })
    }

    pub fn name(&self) -> String {
        self.key.to_string()
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn max_end_ms(&self) -> u64 {
        self.segments.last().map_or(0, |s| s.end_ms)
    }
}

/// All annotation tiers of one recorded interaction.
#[derive(Debug, Clone)]
pub struct InteractionBundle {
    pub interaction_id: String,
    pub tiers: Vec<SegmentTier>,
    pub span_ms: u64,
    pub frame_rate_hz: f64,
}

impl InteractionBundle {
    pub fn new(
        interaction_id: impl Into<String>,
        tiers: Vec<SegmentTier>,
        span_ms: u64,
        frame_rate_hz: f64,
    ) -> Result<Self> {
        check_frame_rate(frame_rate_hz)?;
        Ok(Self {
            interaction_id: interaction_id.into(),
            tiers,
            span_ms,
            frame_rate_hz,
        })
    }

    /// Builds a bundle whose span is the maximum segment end over all tiers.
    pub fn from_tiers(
        interaction_id: impl Into<String>,
        tiers: Vec<SegmentTier>,
        frame_rate_hz: f64,
    ) -> Result<Self> {
        let span_ms = tiers.iter().map(SegmentTier::max_end_ms).max().unwrap_or(0);
        Self::new(interaction_id, tiers, span_ms, frame_rate_hz)
    }

    pub fn tier(&self, key: ColumnKey) -> Option<&SegmentTier> {
        self.tiers.iter().find(|t| t.key == key)
    }
}

/// Per-interaction discretized matrix: one row per frame, one column per
/// channel.
#[derive(Debug, Clone)]
pub struct FrameTable {
    pub interaction_id: String,
    pub n_frames: usize,
    pub frame_rate_hz: f64,
    columns: BTreeMap<ColumnKey, Vec<String>>,
}

impl FrameTable {
    /// Returns the column for `key`, or a `MissingChannel` error naming it.
    pub fn column(&self, key: ColumnKey) -> Result<&[String]> {
        self.columns
            .get(&key)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::MissingChannel(key.to_string()))
    }

    pub fn has_column(&self, key: ColumnKey) -> bool {
        self.columns.contains_key(&key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &ColumnKey> {
        self.columns.keys()
    }
}

fn check_frame_rate(rate: f64) -> Result<()> {
    if !(rate > 0.0 && rate <= MAX_FRAME_RATE_HZ && rate.is_finite()) {
        return Err(Error::InvalidFrameRate(rate));
    }
    Ok(())
}

/// Start instant of frame `f` in milliseconds.
fn frame_start_ms(frame: usize, rate: f64) -> f64 {
    frame as f64 * 1000.0 / rate
}

/// Number of frames covering `span_ms` at `rate`: `ceil(span * rate / 1000)`.
pub fn frame_count(span_ms: u64, rate: f64) -> usize {
    (span_ms as f64 * rate / 1000.0).ceil() as usize
}

/// Parses tier-file content into tiers grouped by tier name.
///
/// Tier order follows first appearance in the file; segments are sorted by
/// start time regardless of input line order. Overlap within a tier is
/// rejected.
pub fn parse_tier_file(text: &str) -> Result<Vec<SegmentTier>> {
    let mut order: Vec<ColumnKey> = Vec::new();
    let mut groups: BTreeMap<ColumnKey, Vec<Segment>> = BTreeMap::new();

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.is_empty() {
            continue;
        }
        let mut fields = line.splitn(4, '\t');
        let (name, start, end, label) = match (
            fields.next(),
            fields.next(),
            fields.next(),
            fields.next(),
        ) {
            (Some(n), Some(s), Some(e), Some(l)) => (n, s, e, l),
            _ => {
                return Err(Error::TierParse {
                    line: line_no,
                    message: "expected 4 tab-separated fields".into(),
                });
            }
        };
        let key: ColumnKey = name.parse().map_err(|e| Error::TierParse {
            line: line_no,
            message: format!("{e}"),
        })?;
        let start_ms: u64 = start.parse().map_err(|_| Error::TierParse {
            line: line_no,
            message: format!("non-numeric start time '{start}'"),
        })?;
        let end_ms: u64 = end.parse().map_err(|_| Error::TierParse {
            line: line_no,
            message: format!("non-numeric end time '{end}'"),
        })?;
        let segment = Segment::new(start_ms, end_ms, label).map_err(|e| Error::TierParse {
            line: line_no,
            message: format!("{e}"),
        })?;
        if !groups.contains_key(&key) {
            order.push(key);
        }
        groups.entry(key).or_default().push(segment);
    }

    order
        .into_iter()
        .map(|key| SegmentTier::new(key, groups.remove(&key).unwrap()))
        .collect()
}

/// Renders tiers back into tier-file content (inverse of [`parse_tier_file`]).
pub fn write_tier_file(tiers: &[SegmentTier]) -> String {
    let mut out = String::new();
    for tier in tiers {
        let name = tier.name();
        for seg in tier.segments() {
            out.push_str(&format!(
                "{name}\t{}\t{}\t{}\n",
                seg.start_ms, seg.end_ms, seg.label
            ));
        }
    }
    out
}

/// Discretizes every tier of `bundle` onto its frame clock.
///
/// Each frame samples the label of the segment containing its start instant.
/// Uncovered frames carry [`NO_LABEL`].
pub fn discretize(bundle: &InteractionBundle) -> Result<FrameTable> {
    check_frame_rate(bundle.frame_rate_hz)?;
    if bundle.span_ms == 0 {
        return Err(Error::ZeroDuration(bundle.interaction_id.clone()));
    }
    let n_frames = frame_count(bundle.span_ms, bundle.frame_rate_hz);
    let mut columns = BTreeMap::new();
    for tier in &bundle.tiers {
        if columns.contains_key(&tier.key) {
            return Err(Error::DuplicateChannel(tier.name()));
        }
        let column = discretize_tier(tier, n_frames, bundle.frame_rate_hz);
        columns.insert(tier.key, column);
    }
    Ok(FrameTable {
        interaction_id: bundle.interaction_id.clone(),
        n_frames,
        frame_rate_hz: bundle.frame_rate_hz,
        columns,
    })
}

fn discretize_tier(tier: &SegmentTier, n_frames: usize, rate: f64) -> Vec<String> {
    let segments = tier.segments();
    let mut column = Vec::with_capacity(n_frames);
    let mut si = 0;
    for f in 0..n_frames {
        let t = frame_start_ms(f, rate);
        while si < segments.len() && (segments[si].end_ms as f64) <= t {
            si += 1;
        }
        let label = match segments.get(si) {
            Some(s) if (s.start_ms as f64) <= t => s.label.as_str(),
            _ => NO_LABEL,
        };
        column.push(label.to_string());
    }
    column
}

/// Recovers segments from a frame column: maximal runs of identical
/// non-`NoLabel` labels. `discretize` of the result reproduces the column
/// exactly.
pub fn segments_from_frames(column: &[String], rate: f64) -> Result<Vec<Segment>> {
    check_frame_rate(rate)?;
    let boundary = |f: usize| frame_start_ms(f, rate).floor() as u64;
    let mut segments = Vec::new();
    let mut run_start = 0;
    for f in 1..=column.len() {
        if f == column.len() || column[f] != column[run_start] {
            if column[run_start] != NO_LABEL {
                segments.push(Segment::new(
                    boundary(run_start),
                    boundary(f),
                    column[run_start].clone(),
                )?);
            }
            run_start = f;
        }
    }
    Ok(segments)
}

/// One finding of [`validate_bundle`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Finding {
    MissingChannel { key: ColumnKey },
    DuplicateChannel { key: ColumnKey },
    OutOfSpan { tier: String, start_ms: u64, end_ms: u64, span_ms: u64 },
    UnknownLabel { tier: String, label: String },
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::MissingChannel { key } => write!(f, "missing channel {key}"),
            Finding::DuplicateChannel { key } => write!(f, "duplicate channel {key}"),
            Finding::OutOfSpan {
                tier,
                start_ms,
                end_ms,
                span_ms,
            } => write!(
                f,
                "tier {tier}: segment [{start_ms}, {end_ms}) exceeds span {span_ms}"
            ),
            Finding::UnknownLabel { tier, label } => {
                write!(f, "tier {tier}: unknown label '{label}'")
            }
        }
    }
}

/// Report-only validation result. Empty means the bundle is well formed.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.findings.is_empty()
    }
}

/// Default label vocabulary for a channel, if it has a closed one. The robot
/// utterance channel carries free text and is not validated.
pub fn default_vocabulary(channel: Channel) -> Option<Vocabulary> {
    match channel {
        Channel::Vfoa => Some(vocab::vfoa()),
        Channel::Addressee => Some(vocab::participant_addressee()),
        Channel::Speaking => Some(vocab::speaking()),
        Channel::Laughter => Some(vocab::laughter()),
        Channel::EngagementState => Some(vocab::engagement_states()),
        Channel::UtteranceText => None,
    }
}

/// Checks a bundle against its invariants and the default channel
/// vocabularies. Never fails; problems are returned as findings.
pub fn validate_bundle(bundle: &InteractionBundle) -> ValidationReport {
    let mut findings = Vec::new();

    let mut required: Vec<ColumnKey> = Vec::new();
    for owner in [Owner::Participant1, Owner::Participant2] {
        for channel in Channel::PARTICIPANT_CHANNELS {
            required.push(ColumnKey::new(owner, channel));
        }
    }
    required.push(ColumnKey::new(Owner::Robot, Channel::UtteranceText));

    for key in required {
        match bundle.tiers.iter().filter(|t| t.key == key).count() {
            0 => findings.push(Finding::MissingChannel { key }),
            1 => {}
            _ => findings.push(Finding::DuplicateChannel { key }),
        }
    }

    for tier in &bundle.tiers {
        for seg in tier.segments() {
            if seg.end_ms > bundle.span_ms {
                findings.push(Finding::OutOfSpan {
                    tier: tier.name(),
                    start_ms: seg.start_ms,
                    end_ms: seg.end_ms,
                    span_ms: bundle.span_ms,
                });
            }
        }
        if let Some(vocab) = default_vocabulary(tier.key.channel) {
            let mut seen = BTreeSet::new();
            for seg in tier.segments() {
                if !vocab.contains(&seg.label) && seen.insert(seg.label.clone()) {
                    findings.push(Finding::UnknownLabel {
                        tier: tier.name(),
                        label: seg.label.clone(),
                    });
                }
            }
        }
    }

    ValidationReport { findings }
}
