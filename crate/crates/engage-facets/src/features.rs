//! Contextual and relational feature streams, and their assembly into
//! 39-column binary feature matrices.
//!
//! Contextual features describe one entity's own behavior or the robot's
//! dialogue context (utterance activity, addressee, topic of speech).
//! Relational features are binary synchrony/alignment streams between two
//! entities, obtained by logical AND of their behavior indicators.
//!
//! Schema `v1` (39 columns, 34 contextual + 5 relational):
//! target VFOA one-hot (9), VFOA shift (1), target addressee one-hot (6),
//! target speaking (1), target laughing (1), robot activity one-hot (2),
//! robot addressee one-hot (9), robot topic one-hot (4), co-participant
//! speaking (1), then the 5 relational streams.

use std::collections::BTreeMap;

use crate::timeline::{Channel, ColumnKey, FrameTable, Owner};
use crate::vocab::{
    self, Vocabulary, ADDRESSEE_NAO, ADDRESSEE_PLEFT, ADDRESSEE_PRIGHT, NO_LABEL, SILENCE,
    SPEECH, TOPIC_NONE, VFOA_OTHER_PARTICIPANT,
};
use crate::{Error, Result};

/// Cue words driving robot addressee and topic detection. All tokens are
/// single lowercase words; matching is case-insensitive and whole-word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordConfig {
    pub person1: Vec<String>,
    pub person2: Vec<String>,
    pub group: Vec<String>,
    /// Topic keywords in priority order (earlier wins on ties).
    pub topics: Vec<String>,
}

impl Default for KeywordConfig {
    fn default() -> Self {
        Self {
            person1: vec!["anna".into()],
            person2: vec!["ben".into()],
            group: vec!["everyone".into(), "everybody".into(), "both".into()],
            topics: vec![
                "manray".into(),
                "warhol".into(),
                "arp".into(),
                "paintings".into(),
            ],
        }
    }
}

impl KeywordConfig {
    /// Parses the TSV keyword file: `cue_kind \t token`, cue_kind one of
    /// person1/person2/group/topic. Topic order follows file order.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = Self {
            person1: vec![],
            person2: vec![],
            group: vec![],
            topics: vec![],
        };
        for (idx, line) in text.lines().enumerate() {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (kind, token) = line.split_once('\t').ok_or_else(|| Error::InvalidConfig(
                format!("keyword line {}: expected `cue_kind\\ttoken`", idx + 1),
            ))?;
            let token = token.trim().to_lowercase();
            if token.is_empty() || token.contains(char::is_whitespace) {
                return Err(Error::InvalidConfig(format!(
                    "keyword line {}: token must be a single word",
                    idx + 1
                )));
            }
            match kind {
                "person1" => config.person1.push(token),
                "person2" => config.person2.push(token),
                "group" => config.group.push(token),
                "topic" => config.topics.push(token),
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "keyword line {}: unknown cue kind '{other}'",
                        idx + 1
                    )));
                }
            }
        }
        if config.topics.is_empty() {
            return Err(Error::InvalidConfig("keyword file defines no topics".into()));
        }
        Ok(config)
    }

    /// Renders the config back to the TSV format.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (kind, tokens) in [
            ("person1", &self.person1),
            ("person2", &self.person2),
            ("group", &self.group),
            ("topic", &self.topics),
        ] {
            for t in tokens {
                out.push_str(&format!("{kind}\t{t}\n"));
            }
        }
        out
    }

    /// Default mapping from VFOA target labels to topic labels, derived from
    /// the topic list: `painting_<t>` maps to `<t>`, and `paintings_other`
    /// maps to the generic `paintings` topic when present.
    pub fn vfoa_topic_map(&self) -> BTreeMap<String, String> {
        let mut map = BTreeMap::new();
        for t in &self.topics {
            map.insert(format!("painting_{t}"), t.clone());
        }
        if self.topics.iter().any(|t| t == "paintings") {
            map.insert("paintings_other".into(), "paintings".into());
        }
        map
    }
}

/// Lowercase words of `text` in order. Word boundaries are non-alphanumeric
/// characters.
fn words(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Word index of the first occurrence of any token, or `None`.
fn earliest(words: &[String], tokens: &[String]) -> Option<usize> {
    words.iter().position(|w| tokens.iter().any(|t| t == w))
}

// ---------------------------------------------------------------------------
// Stream operators
// ---------------------------------------------------------------------------

fn check_lengths(context: &'static str, left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::LengthMismatch {
            context,
            left,
            right,
        });
    }
    Ok(())
}

/// One-hot encodes a label column. Cell `(f, j)` is 1 iff
/// `column[f] == vocab.labels()[j]`; labels outside the vocabulary yield
/// all-zero rows.
pub fn one_hot(column: &[String], vocab: &Vocabulary) -> Vec<Vec<u8>> {
    column
        .iter()
        .map(|label| {
            let mut row = vec![0u8; vocab.len()];
            if let Some(j) = vocab.index_of(label) {
                row[j] = 1;
            }
            row
        })
        .collect()
}

/// Binary attention-shift stream: 1 at every frame whose VFOA label differs
/// from the previous frame's.
pub fn vfoa_shift(vfoa: &[String]) -> Result<Vec<u8>> {
    if vfoa.is_empty() {
        return Err(Error::EmptyStream);
    }
    let mut out = Vec::with_capacity(vfoa.len());
    out.push(0);
    for pair in vfoa.windows(2) {
        out.push(u8::from(pair[0] != pair[1]));
    }
    Ok(out)
}

/// Robot speech activity: `Speech` on frames covered by an utterance segment,
/// `Silence` elsewhere.
pub fn robot_utterance_activity(utterance_frames: &[String]) -> Vec<String> {
    utterance_frames
        .iter()
        .map(|l| if l == NO_LABEL { SILENCE } else { SPEECH }.to_string())
        .collect()
}

/// Classifies the robot's addressee per frame from its utterance text.
///
/// Silent frames are `Silence`. An utterance containing only a person cue is
/// `PersonX`; only a group cue, `GroupExplicit`; a group cue before a person
/// cue, `GroupPersonX`; a person cue before a group cue, `PersonXGroup`; and
/// no cue at all defaults to `Group` (the robot addresses everyone). When
/// both person cues occur, the earlier one determines X.
pub fn robot_addressee(utterance_frames: &[String], config: &KeywordConfig) -> Vec<String> {
    let mut cache: Option<(&str, String)> = None;
    utterance_frames
        .iter()
        .map(|text| {
            if text == NO_LABEL {
                return SILENCE.to_string();
            }
            if let Some((cached_text, label)) = &cache {
                if *cached_text == text.as_str() {
                    return label.clone();
                }
            }
            let label = classify_addressee(text, config);
            cache = Some((text.as_str(), label.clone()));
            label
        })
        .collect()
}

fn classify_addressee(text: &str, config: &KeywordConfig) -> String {
    let ws = words(text);
    let p1 = earliest(&ws, &config.person1);
    let p2 = earliest(&ws, &config.person2);
    let group = earliest(&ws, &config.group);
    let person = match (p1, p2) {
        (Some(a), Some(b)) if b < a => Some((b, 2)),
        (Some(a), _) => Some((a, 1)),
        (None, Some(b)) => Some((b, 2)),
        (None, None) => None,
    };
    match (person, group) {
        (None, None) => "Group".to_string(),
        (Some((_, x)), None) => format!("Person{x}"),
        (None, Some(_)) => "GroupExplicit".to_string(),
        (Some((pi, x)), Some(gi)) => {
            if gi < pi {
                format!("GroupPerson{x}")
            } else {
                format!("Person{x}Group")
            }
        }
    }
}

/// Detects the robot's topic of speech per frame: the first keyword (in
/// keyword-list order) occurring in the covering utterance, else `none`.
pub fn robot_topic(utterance_frames: &[String], topics: &[String]) -> Vec<String> {
    let mut cache: Option<(&str, String)> = None;
    utterance_frames
        .iter()
        .map(|text| {
            if text == NO_LABEL {
                return TOPIC_NONE.to_string();
            }
            if let Some((cached_text, label)) = &cache {
                if *cached_text == text.as_str() {
                    return label.clone();
                }
            }
            let ws = words(text);
            let label = topics
                .iter()
                .find(|t| ws.iter().any(|w| w == *t))
                .cloned()
                .unwrap_or_else(|| TOPIC_NONE.to_string());
            cache = Some((text.as_str(), label.clone()));
            label
        })
        .collect()
}

/// Pointwise logical AND of two binary streams.
pub fn mutual_and(a: &[u8], b: &[u8]) -> Result<Vec<u8>> {
    check_lengths("mutual_and", a.len(), b.len())?;
    Ok(a.iter().zip(b).map(|(x, y)| x & y).collect())
}

/// 1 on frames where the participant looks at the object matching the
/// robot's current topic of speech.
pub fn gaze_speech_alignment(
    vfoa: &[String],
    topic: &[String],
    vfoa_topic: &BTreeMap<String, String>,
) -> Result<Vec<u8>> {
    check_lengths("gaze_speech_alignment", vfoa.len(), topic.len())?;
    Ok(vfoa
        .iter()
        .zip(topic)
        .map(|(v, t)| u8::from(t != TOPIC_NONE && vfoa_topic.get(v) == Some(t)))
        .collect())
}

/// 1 on frames where the participant talks to the other participant while
/// the robot is speaking.
pub fn participant_talks_during_robot_speech(
    speaking: &[u8],
    addressee: &[String],
    robot_activity: &[String],
) -> Result<Vec<u8>> {
    check_lengths("talks_during_robot_speech", speaking.len(), addressee.len())?;
    check_lengths(
        "talks_during_robot_speech",
        speaking.len(),
        robot_activity.len(),
    )?;
    Ok((0..speaking.len())
        .map(|f| {
            u8::from(
                speaking[f] == 1
                    && (addressee[f] == ADDRESSEE_PRIGHT || addressee[f] == ADDRESSEE_PLEFT)
                    && robot_activity[f] == SPEECH,
            )
        })
        .collect())
}

/// 1 on frames where both participants look at each other.
pub fn mutual_looks(p1_vfoa: &[String], p2_vfoa: &[String]) -> Result<Vec<u8>> {
    check_lengths("mutual_looks", p1_vfoa.len(), p2_vfoa.len())?;
    Ok(p1_vfoa
        .iter()
        .zip(p2_vfoa)
        .map(|(a, b)| u8::from(a == VFOA_OTHER_PARTICIPANT && b == VFOA_OTHER_PARTICIPANT))
        .collect())
}

/// 1 on frames where both participants laugh together. Same contract as
/// [`mutual_and`] on the two laughter indicators.
pub fn mutual_laughter(p1_laughter: &[u8], p2_laughter: &[u8]) -> Result<Vec<u8>> {
    check_lengths("mutual_laughter", p1_laughter.len(), p2_laughter.len())?;
    mutual_and(p1_laughter, p2_laughter)
}

/// 1 on frames where the passive participant looks at the active one while
/// the active participant talks to the robot.
pub fn passive_looks_at_active_speaker(
    passive_vfoa: &[String],
    active_speaking: &[u8],
    active_addressee: &[String],
) -> Result<Vec<u8>> {
    check_lengths(
        "passive_looks_at_active_speaker",
        passive_vfoa.len(),
        active_speaking.len(),
    )?;
    check_lengths(
        "passive_looks_at_active_speaker",
        passive_vfoa.len(),
        active_addressee.len(),
    )?;
    Ok((0..passive_vfoa.len())
        .map(|f| {
            u8::from(
                passive_vfoa[f] == VFOA_OTHER_PARTICIPANT
                    && active_speaking[f] == 1
                    && active_addressee[f] == ADDRESSEE_NAO,
            )
        })
        .collect())
}

/// Binary indicator of a sparse channel: 1 on frames covered by any segment.
pub fn indicator(column: &[String]) -> Vec<u8> {
    column.iter().map(|l| u8::from(l != NO_LABEL)).collect()
}

// ---------------------------------------------------------------------------
// Schema and assembly
// ---------------------------------------------------------------------------

/// Whether a feature column is contextual or relational.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureSource {
    Contextual,
    Relational,
}

/// One column of the feature schema.
#[derive(Debug, Clone)]
pub struct ColumnDef {
    pub name: String,
    pub source: FeatureSource,
}

/// A versioned, ordered description of the feature columns.
#[derive(Debug, Clone)]
pub struct FeatureSchema {
    pub version: String,
    pub columns: Vec<ColumnDef>,
}

pub const SCHEMA_V1: &str = "v1";
pub const FEATURE_COUNT: usize = 39;

impl FeatureSchema {
    /// The canonical 39-column schema: 34 contextual + 5 relational.
    pub fn v1() -> Self {
        let mut columns = Vec::with_capacity(FEATURE_COUNT);
        let mut contextual = |name: String| {
            columns.push(ColumnDef {
                name,
                source: FeatureSource::Contextual,
            });
        };
        for label in vocab::vfoa().labels() {
            contextual(format!("vfoa_is_{label}"));
        }
        contextual("vfoa_shift".into());
        for label in vocab::participant_addressee().labels() {
            contextual(format!("addressee_is_{}", label.to_lowercase()));
        }
        contextual("speaking".into());
        contextual("laughing".into());
        for label in vocab::robot_activity().labels() {
            contextual(format!("robot_activity_is_{}", label.to_lowercase()));
        }
        for label in vocab::robot_addressee().labels() {
            contextual(format!("robot_addressee_is_{}", label.to_lowercase()));
        }
        for topic in KeywordConfig::default().topics {
            contextual(format!("robot_topic_is_{topic}"));
        }
        contextual("co_speaking".into());
        for name in [
            "gaze_speech_alignment",
            "talks_to_other_during_robot_speech",
            "mutual_looks",
            "mutual_laughter",
            "passive_looks_at_active_speaker",
        ] {
            columns.push(ColumnDef {
                name: name.into(),
                source: FeatureSource::Relational,
            });
        }
        let schema = Self {
            version: SCHEMA_V1.into(),
            columns,
        };
        debug_assert_eq!(schema.columns.len(), FEATURE_COUNT);
        debug_assert_eq!(schema.contextual_count(), 34);
        debug_assert_eq!(schema.relational_count(), 5);
        schema
    }

    pub fn by_version(version: &str) -> Result<Self> {
        match version {
            SCHEMA_V1 => Ok(Self::v1()),
            other => Err(Error::SchemaMismatch {
                expected: SCHEMA_V1.into(),
                found: other.into(),
            }),
        }
    }

    pub fn contextual_count(&self) -> usize {
        self.columns
            .iter()
            .filter(|c| c.source == FeatureSource::Contextual)
            .count()
    }

    pub fn relational_count(&self) -> usize {
        self.columns
            .iter()
            .filter(|c| c.source == FeatureSource::Relational)
            .count()
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }
}

/// Per-participant, per-frame binary feature vectors under a versioned
/// schema. Stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureMatrix {
    pub interaction_id: String,
    pub participant: Owner,
    pub schema_version: String,
    pub n_rows: usize,
    values: Vec<u8>,
}

impl FeatureMatrix {
    pub fn row(&self, i: usize) -> &[u8] {
        &self.values[i * FEATURE_COUNT..(i + 1) * FEATURE_COUNT]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u8]> {
        self.values.chunks_exact(FEATURE_COUNT)
    }

    pub fn column(&self, j: usize) -> Vec<u8> {
        self.rows().map(|r| r[j]).collect()
    }
}

/// Computes the full 39-column feature matrix for `target` from a discretized
/// frame table.
///
/// Relational columns treat `target` as "this participant" and the
/// co-participant as "other". Robot-derived columns are identical for both
/// targets.
pub fn assemble_features(
    table: &FrameTable,
    target: Owner,
    schema: &FeatureSchema,
    keywords: &KeywordConfig,
) -> Result<FeatureMatrix> {
    if schema.version != SCHEMA_V1 {
        return Err(Error::SchemaMismatch {
            expected: SCHEMA_V1.into(),
            found: schema.version.clone(),
        });
    }
    if target == Owner::Robot {
        return Err(Error::InvalidConfig(
            "feature target must be a participant".into(),
        ));
    }
    let other = target.co_participant();
    let col = |owner: Owner, channel: Channel| table.column(ColumnKey::new(owner, channel));

    let target_vfoa = col(target, Channel::Vfoa)?;
    let target_addressee = col(target, Channel::Addressee)?;
    let target_speaking = indicator(col(target, Channel::Speaking)?);
    let target_laughing = indicator(col(target, Channel::Laughter)?);
    let other_addressee = col(other, Channel::Addressee)?;
    let other_speaking = indicator(col(other, Channel::Speaking)?);
    let other_laughing = indicator(col(other, Channel::Laughter)?);
    let utterances = col(Owner::Robot, Channel::UtteranceText)?;

    let activity = robot_utterance_activity(utterances);
    let r_addressee = robot_addressee(utterances, keywords);
    let r_topic = robot_topic(utterances, &keywords.topics);

    let vfoa_oh = one_hot(target_vfoa, &vocab::vfoa());
    let shift = vfoa_shift(target_vfoa)?;
    let addressee_oh = one_hot(target_addressee, &vocab::participant_addressee());
    let activity_oh = one_hot(&activity, &vocab::robot_activity());
    let r_addressee_oh = one_hot(&r_addressee, &vocab::robot_addressee());
    let topic_vocab = Vocabulary::new(keywords.topics.clone());
    let topic_oh = one_hot(&r_topic, &topic_vocab);

    let alignment = gaze_speech_alignment(target_vfoa, &r_topic, &keywords.vfoa_topic_map())?;
    let talks_during =
        participant_talks_during_robot_speech(&target_speaking, target_addressee, &activity)?;
    let looks = mutual_looks(
        col(Owner::Participant1, Channel::Vfoa)?,
        col(Owner::Participant2, Channel::Vfoa)?,
    )?;
    let laughs = mutual_laughter(&target_laughing, &other_laughing)?;
    let passive_looks =
        passive_looks_at_active_speaker(target_vfoa, &other_speaking, other_addressee)?;

    let n = table.n_frames;
    let mut values = Vec::with_capacity(n * FEATURE_COUNT);
    for f in 0..n {
        values.extend_from_slice(&vfoa_oh[f]);
        values.push(shift[f]);
        values.extend_from_slice(&addressee_oh[f]);
        values.push(target_speaking[f]);
        values.push(target_laughing[f]);
        values.extend_from_slice(&activity_oh[f]);
        values.extend_from_slice(&r_addressee_oh[f]);
        values.extend_from_slice(&topic_oh[f]);
        values.push(other_speaking[f]);
        values.push(alignment[f]);
        values.push(talks_during[f]);
        values.push(looks[f]);
        values.push(laughs[f]);
        values.push(passive_looks[f]);
    }
    debug_assert_eq!(values.len(), n * FEATURE_COUNT);

    Ok(FeatureMatrix {
        interaction_id: table.interaction_id.clone(),
        participant: target,
        schema_version: schema.version.clone(),
        n_rows: n,
        values,
    })
}
