//! Seeded synthetic interaction generator: ground-truth engagement-state
//! tiers plus observable behavior channels statistically coupled to the
//! states, strong enough that end-to-end signal-flow bugs show up as
//! chance-level accuracy.
//!
//! Sampling is integer-only (probabilities in per-mille, durations in 100 ms
//! ticks) on a ChaCha stream, so generated bundles are bit-identical across
//! platforms for a fixed seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{facet_of, EngagementState, Facet};
use crate::features::KeywordConfig;
use crate::timeline::{Channel, ColumnKey, InteractionBundle, Owner, Segment, SegmentTier};
use crate::vocab::{ADDRESSEE_GROUP, ADDRESSEE_NAO, ADDRESSEE_PLEFT, ADDRESSEE_PRIGHT, SILENCE};
use crate::{Error, Result};

const TICK_MS: u64 = 100;
const PERMILLE: u32 = 1000;

/// Interaction phase kinds from the recording scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseKind {
    /// The robot describes paintings.
    Informative,
    /// The robot quizzes the participants.
    Quiz,
}

/// One scenario phase: its duration and the engagement-state distribution
/// (per-mille, summing to 1000).
#[derive(Debug, Clone)]
pub struct PhaseConfig {
    pub kind: PhaseKind,
    pub duration_ms: u64,
    pub state_permille: Vec<(EngagementState, u32)>,
}

/// Where a participant's gaze goes when the state's cue fires.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GazeTarget {
    Robot,
    CurrentPainting,
    RobotOrPainting,
    OtherParticipant,
    Away,
}

/// Whom a participant addresses when speaking.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpeechTarget {
    Robot,
    OtherParticipant,
    Group,
}

/// Per-state emission probabilities (per-mille) for the observable channels.
#[derive(Debug, Clone)]
pub struct EmissionRule {
    pub gaze: GazeTarget,
    pub gaze_on: u32,
    pub speaking: u32,
    pub addressee: SpeechTarget,
    pub laughter: u32,
}

/// Full generator configuration for one interaction.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub interaction_id: String,
    pub phases: Vec<PhaseConfig>,
    pub emissions: Vec<(EngagementState, EmissionRule)>,
    /// Mean engagement-segment length in 100 ms ticks.
    pub mean_segment_ticks: u32,
    pub keywords: KeywordConfig,
    pub seed: u64,
}

impl ScenarioConfig {
    /// The default scenario: an informative phase followed by a quiz,
    /// totalling eleven minutes, with 0.9/0.1 cue coupling and a class
    /// imbalance shaped like real annotation counts (mental dominant,
    /// emotional smallest).
    pub fn default_config(seed: u64) -> Self {
        use EngagementState::*;
        let phases = vec![
            PhaseConfig {
                kind: PhaseKind::Informative,
                duration_ms: 396_000,
                state_permille: vec![
                    (Listening, 500),
                    (Concentrating, 250),
                    (Thinking, 80),
                    (ListeningPerson2, 40),
                    (Responding, 40),
                    (PositiveReaction, 60),
                    (NegativeReaction, 30),
                ],
            },
            PhaseConfig {
                kind: PhaseKind::Quiz,
                duration_ms: 264_000,
                state_permille: vec![
                    (Listening, 100),
                    (WaitingFeedback, 180),
                    (Thinking, 200),
                    (Concentrating, 40),
                    (ListeningPerson2, 130),
                    (Responding, 250),
                    (PositiveReaction, 70),
                    (NegativeReaction, 30),
                ],
            },
        ];
        let emissions = vec![
            (
                Listening,
                EmissionRule {
                    gaze: GazeTarget::RobotOrPainting,
                    gaze_on: 900,
                    speaking: 50,
                    addressee: SpeechTarget::Robot,
                    laughter: 20,
                },
            ),
            (
                WaitingFeedback,
                EmissionRule {
                    gaze: GazeTarget::Robot,
                    gaze_on: 900,
                    speaking: 50,
                    addressee: SpeechTarget::Robot,
                    laughter: 50,
                },
            ),
            (
                Thinking,
                EmissionRule {
                    gaze: GazeTarget::Away,
                    gaze_on: 900,
                    speaking: 100,
                    addressee: SpeechTarget::Robot,
                    laughter: 20,
                },
            ),
            (
                Concentrating,
                EmissionRule {
                    gaze: GazeTarget::CurrentPainting,
                    gaze_on: 900,
                    speaking: 50,
                    addressee: SpeechTarget::Robot,
                    laughter: 20,
                },
            ),
            (
                ListeningPerson2,
                EmissionRule {
                    gaze: GazeTarget::OtherParticipant,
                    gaze_on: 900,
                    speaking: 50,
                    addressee: SpeechTarget::Robot,
                    laughter: 50,
                },
            ),
            (
                Responding,
                EmissionRule {
                    gaze: GazeTarget::Robot,
                    gaze_on: 800,
                    speaking: 900,
                    addressee: SpeechTarget::Robot,
                    laughter: 50,
                },
            ),
            (
                PositiveReaction,
                EmissionRule {
                    gaze: GazeTarget::Robot,
                    gaze_on: 700,
                    speaking: 300,
                    addressee: SpeechTarget::Robot,
                    laughter: 900,
                },
            ),
            (
                NegativeReaction,
                EmissionRule {
                    gaze: GazeTarget::Away,
                    gaze_on: 700,
                    speaking: 500,
                    addressee: SpeechTarget::OtherParticipant,
                    laughter: 50,
                },
            ),
        ];
        Self {
            interaction_id: "int_000".into(),
            phases,
            emissions,
            mean_segment_ticks: 20,
            keywords: KeywordConfig::default(),
            seed,
        }
    }

    pub fn span_ms(&self) -> u64 {
        self.phases.iter().map(|p| p.duration_ms).sum()
    }

    fn validate(&self) -> Result<()> {
        if self.phases.is_empty() {
            return Err(Error::InvalidConfig("scenario has no phases".into()));
        }
        for (i, phase) in self.phases.iter().enumerate() {
            if phase.duration_ms == 0 {
                return Err(Error::InvalidConfig(format!("phase {i} has zero duration")));
            }
            let total: u32 = phase.state_permille.iter().map(|(_, p)| p).sum();
            if total != PERMILLE {
                return Err(Error::InvalidConfig(format!(
                    "phase {i} state probabilities sum to {total} per-mille, expected 1000"
                )));
            }
        }
        for (state, rule) in &self.emissions {
            for (name, p) in [
                ("gaze_on", rule.gaze_on),
                ("speaking", rule.speaking),
                ("laughter", rule.laughter),
            ] {
                if p > PERMILLE {
                    return Err(Error::InvalidConfig(format!(
                        "{state}: {name} probability {p} exceeds 1000 per-mille"
                    )));
                }
            }
        }
        if self.mean_segment_ticks == 0 {
            return Err(Error::InvalidConfig("mean segment length is zero".into()));
        }
        Ok(())
    }

    fn rule_for(&self, state: EngagementState) -> Result<&EmissionRule> {
        self.emissions
            .iter()
            .find(|(s, _)| *s == state)
            .map(|(_, r)| r)
            .ok_or_else(|| {
                Error::InvalidConfig(format!("no emission rule for state {state}"))
            })
    }

    /// Duration-weighted per-facet probabilities implied by the phase state
    /// distributions (test support; not part of the sampling path).
    pub fn expected_facet_shares(&self) -> [f64; Facet::COUNT] {
        let span = self.span_ms() as f64;
        let mut shares = [0.0; Facet::COUNT];
        for phase in &self.phases {
            let weight = phase.duration_ms as f64 / span;
            for &(state, permille) in &phase.state_permille {
                shares[facet_of(state).index()] += weight * permille as f64 / 1000.0;
            }
        }
        shares
    }
}

fn bernoulli(rng: &mut ChaCha8Rng, permille: u32) -> bool {
    rng.random_range(0..PERMILLE) < permille
}

/// Geometric duration with the configured mean, capped at ten means.
fn segment_ticks(rng: &mut ChaCha8Rng, mean: u32) -> u64 {
    let mut ticks = 1u64;
    while ticks < 10 * mean as u64 && rng.random_range(0..mean) != 0 {
        ticks += 1;
    }
    ticks
}

fn categorical(rng: &mut ChaCha8Rng, table: &[(EngagementState, u32)]) -> EngagementState {
    let mut draw = rng.random_range(0..PERMILLE);
    for &(state, p) in table {
        if draw < p {
            return state;
        }
        draw -= p;
    }
    table.last().expect("non-empty state table").0
}

/// The VFOA label a topic maps to; unknown topics fall back to the generic
/// paintings target so generated labels always stay in vocabulary.
fn painting_label(topic: &str) -> String {
    match topic {
        "manray" | "warhol" | "arp" => format!("painting_{topic}"),
        _ => "paintings_other".to_string(),
    }
}

const AWAY_TARGETS: [&str; 3] = ["windows", "table", "unfocused"];
const VFOA_CHOICES: [&str; 9] = [
    "nao",
    "other_participant",
    "painting_manray",
    "painting_warhol",
    "painting_arp",
    "paintings_other",
    "windows",
    "table",
    "unfocused",
];

/// Robot speech plan: utterance segments plus the topic timeline they imply.
struct RobotScript {
    utterances: Vec<Segment>,
    /// (start_ms, topic) for every topical utterance, in time order.
    topics: Vec<(u64, String)>,
}

impl RobotScript {
    fn topic_at(&self, t_ms: u64) -> Option<&str> {
        self.topics
            .iter()
            .take_while(|(start, _)| *start <= t_ms)
            .last()
            .map(|(_, topic)| topic.as_str())
    }
}

fn informative_text(template: u32, topic: &str, keywords: &KeywordConfig) -> String {
    let p1 = &keywords.person1[0];
    let p2 = &keywords.person2[0];
    let group = &keywords.group[0];
    match template % 5 {
        0 => format!("now have a look at the {topic} over here"),
        1 => format!("{group} this {topic} is a remarkable piece"),
        2 => format!("{p1} you might enjoy the {topic}"),
        3 => format!("next to it hangs the {topic}"),
        _ => format!("{p2} come a little closer to the {topic}"),
    }
}

fn quiz_text(template: u32, topic: &str, keywords: &KeywordConfig) -> String {
    let p1 = &keywords.person1[0];
    let p2 = &keywords.person2[0];
    let group = &keywords.group[0];
    match template % 6 {
        0 => format!("{p1} which artist made the {topic}"),
        1 => format!("{p2} what do you think about the {topic}"),
        2 => format!("{group} who remembers the {topic}"),
        3 => format!("{group} and now you {p1} give us an answer"),
        4 => format!("{p2} and {group} else think about the {topic}"),
        _ => format!("time for a question about the {topic}"),
    }
}

fn generate_robot_script(config: &ScenarioConfig, rng: &mut ChaCha8Rng) -> RobotScript {
    let mut utterances = Vec::new();
    let mut topics = Vec::new();
    let mut phase_start = 0u64;
    let mut topic_idx = 0usize;
    let topic_count = config.keywords.topics.len();

    for phase in &config.phases {
        let phase_end = phase_start + phase.duration_ms;
        let mut t = phase_start;
        loop {
            let (gap_range, speech_range) = match phase.kind {
                PhaseKind::Informative => ((10u64, 40u64), (20u64, 60u64)),
                PhaseKind::Quiz => ((20, 60), (15, 40)),
            };
            let gap = rng.random_range(gap_range.0..=gap_range.1) * TICK_MS;
            t = (t + gap).min(phase_end);
            if t >= phase_end {
                break;
            }
            let duration = rng.random_range(speech_range.0..=speech_range.1) * TICK_MS;
            let end = (t + duration).min(phase_end);
            if end <= t {
                break;
            }
            let topic = config.keywords.topics[topic_idx % topic_count].clone();
            topic_idx += 1;
            let template = rng.random_range(0..1000);
            let text = match phase.kind {
                PhaseKind::Informative => informative_text(template, &topic, &config.keywords),
                PhaseKind::Quiz => quiz_text(template, &topic, &config.keywords),
            };
            // Every template above mentions its topic except quiz form 3.
            if text.contains(&topic) {
                topics.push((t, topic));
            }
            utterances.push(Segment::new(t, end, text).expect("valid utterance segment"));
            t = end;
        }
        phase_start = phase_end;
    }
    RobotScript { utterances, topics }
}

struct ParticipantTiers {
    states: Vec<Segment>,
    vfoa: Vec<Segment>,
    addressee: Vec<Segment>,
    speaking: Vec<Segment>,
    laughter: Vec<Segment>,
}

fn generate_participant(
    config: &ScenarioConfig,
    owner: Owner,
    script: &RobotScript,
    rng: &mut ChaCha8Rng,
) -> Result<ParticipantTiers> {
    let mut tiers = ParticipantTiers {
        states: Vec::new(),
        vfoa: Vec::new(),
        addressee: Vec::new(),
        speaking: Vec::new(),
        laughter: Vec::new(),
    };
    let mut phase_start = 0u64;
    for phase in &config.phases {
        let phase_end = phase_start + phase.duration_ms;
        let mut t = phase_start;
        while t < phase_end {
            let state = categorical(rng, &phase.state_permille);
            let ticks = segment_ticks(rng, config.mean_segment_ticks);
            let end = (t + ticks * TICK_MS).min(phase_end);
            tiers.states.push(Segment::new(t, end, state.code())?);

            let rule = config.rule_for(state)?;
            let vfoa_label = if bernoulli(rng, rule.gaze_on) {
                match rule.gaze {
                    GazeTarget::Robot => "nao".to_string(),
                    GazeTarget::OtherParticipant => "other_participant".to_string(),
                    GazeTarget::CurrentPainting => script
                        .topic_at(t)
                        .map(painting_label)
                        .unwrap_or_else(|| "nao".to_string()),
                    GazeTarget::RobotOrPainting => {
                        if bernoulli(rng, 500) {
                            "nao".to_string()
                        } else {
                            script
                                .topic_at(t)
                                .map(painting_label)
                                .unwrap_or_else(|| "nao".to_string())
                        }
                    }
                    GazeTarget::Away => {
                        AWAY_TARGETS[rng.random_range(0..AWAY_TARGETS.len())].to_string()
                    }
                }
            } else {
                VFOA_CHOICES[rng.random_range(0..VFOA_CHOICES.len())].to_string()
            };
            tiers.vfoa.push(Segment::new(t, end, vfoa_label)?);

            if bernoulli(rng, rule.speaking) {
                tiers.speaking.push(Segment::new(t, end, "speaking")?);
                let addressee = match rule.addressee {
                    SpeechTarget::Robot => ADDRESSEE_NAO,
                    SpeechTarget::Group => ADDRESSEE_GROUP,
                    SpeechTarget::OtherParticipant => match owner {
                        Owner::Participant1 => ADDRESSEE_PRIGHT,
                        _ => ADDRESSEE_PLEFT,
                    },
                };
                tiers.addressee.push(Segment::new(t, end, addressee)?);
            } else {
                tiers.addressee.push(Segment::new(t, end, SILENCE)?);
            }
            if bernoulli(rng, rule.laughter) {
                tiers.laughter.push(Segment::new(t, end, "laughter")?);
            }
            t = end;
        }
        phase_start = phase_end;
    }
    Ok(tiers)
}

/// Generates one interaction bundle with all required tiers for both
/// participants plus the robot utterance tier. Bit-identical for a fixed
/// config and seed.
pub fn generate_interaction(config: &ScenarioConfig) -> Result<InteractionBundle> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let script = generate_robot_script(config, &mut rng);
    let p1 = generate_participant(config, Owner::Participant1, &script, &mut rng)?;
    let p2 = generate_participant(config, Owner::Participant2, &script, &mut rng)?;

    let mut tiers = Vec::new();
    let mut push = |owner: Owner, channel: Channel, segments: Vec<Segment>| -> Result<()> {
        tiers.push(SegmentTier::new(ColumnKey::new(owner, channel), segments)?);
        Ok(())
    };
    for (owner, t) in [(Owner::Participant1, p1), (Owner::Participant2, p2)] {
        push(owner, Channel::Vfoa, t.vfoa)?;
        push(owner, Channel::Addressee, t.addressee)?;
        push(owner, Channel::Speaking, t.speaking)?;
        push(owner, Channel::Laughter, t.laughter)?;
        push(owner, Channel::EngagementState, t.states)?;
    }
    push(Owner::Robot, Channel::UtteranceText, script.utterances)?;

    // Frame rate is a discretization concern; bundles carry a video-typical
    // default that downstream callers may override.
    InteractionBundle::new(config.interaction_id.clone(), tiers, config.span_ms(), 25.0)
}

/// Generates `n` interactions with unique ids and per-interaction derived
/// seeds.
pub fn generate_corpus(
    n: usize,
    base: &ScenarioConfig,
    seed: u64,
) -> Result<Vec<InteractionBundle>> {
    if n == 0 {
        return Err(Error::InvalidConfig(
            "corpus needs at least one interaction".into(),
        ));
    }
    (0..n)
        .map(|i| {
            let mut config = base.clone();
            config.interaction_id = format!("int_{i:03}");
            config.seed = seed.wrapping_add((i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            generate_interaction(&config)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeline::{discretize, validate_bundle};

    fn tiny_config(seed: u64) -> ScenarioConfig {
        let mut config = ScenarioConfig::default_config(seed);
        config.phases[0].duration_ms = 30_000;
        config.phases[1].duration_ms = 20_000;
        config.interaction_id = "tiny".into();
        config
    }

    #[test]
    fn degenerate_distribution_yields_only_that_state() {
        let mut config = tiny_config(1);
        config.phases.remove(0);
        config.phases[0].state_permille = vec![(EngagementState::Responding, 1000)];
        let bundle = generate_interaction(&config).unwrap();
        let states = bundle
            .tier(ColumnKey::new(Owner::Participant1, Channel::EngagementState))
            .unwrap();
        assert!(states.segments().iter().all(|s| s.label == "ER"));
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let a = generate_interaction(&tiny_config(33)).unwrap();
        let b = generate_interaction(&tiny_config(33)).unwrap();
        for (ta, tb) in a.tiers.iter().zip(&b.tiers) {
            assert_eq!(ta, tb);
        }
    }

    #[test]
    fn different_seeds_diverge() {
        let a = generate_interaction(&tiny_config(1)).unwrap();
        let b = generate_interaction(&tiny_config(2)).unwrap();
        let ta = discretize(&a).unwrap();
        let tb = discretize(&b).unwrap();
        let key = ColumnKey::new(Owner::Participant1, Channel::EngagementState);
        let (ca, cb) = (ta.column(key).unwrap(), tb.column(key).unwrap());
        assert!(
            ca.iter().zip(cb).any(|(x, y)| x != y),
            "no divergent frame found"
        );
    }

    #[test]
    fn generated_bundles_validate_cleanly() {
        let bundle = generate_interaction(&tiny_config(7)).unwrap();
        let report = validate_bundle(&bundle);
        assert!(report.is_empty(), "findings: {:?}", report.findings);
    }

    #[test]
    fn state_and_observable_tiers_cover_the_full_span() {
        let config = tiny_config(11);
        let bundle = generate_interaction(&config).unwrap();
        for owner in [Owner::Participant1, Owner::Participant2] {
            for channel in [Channel::EngagementState, Channel::Vfoa, Channel::Addressee] {
                let tier = bundle.tier(ColumnKey::new(owner, channel)).unwrap();
                assert_eq!(tier.max_end_ms(), config.span_ms());
                // Gapless: each segment starts where the previous ended.
                let mut expected_start = 0;
                for segment in tier.segments() {
                    assert_eq!(segment.start_ms, expected_start);
                    expected_start = segment.end_ms;
                }
            }
        }
    }

    #[test]
    fn facet_shares_track_the_configured_distribution() {
        let config = ScenarioConfig::default_config(42); // 11 minutes
        let bundle = generate_interaction(&config).unwrap();
        let table = discretize(&bundle).unwrap();
        let expected = config.expected_facet_shares();
        for owner in [Owner::Participant1, Owner::Participant2] {
            let column = table
                .column(ColumnKey::new(owner, Channel::EngagementState))
                .unwrap();
            let mut counts = [0usize; Facet::COUNT];
            for label in column {
                let state = EngagementState::from_code(label).unwrap();
                counts[facet_of(state).index()] += 1;
            }
            for (f, &count) in counts.iter().enumerate() {
                let share = count as f64 / column.len() as f64;
                assert!(
                    (share - expected[f]).abs() < 0.05,
                    "{owner}: facet {f} share {share:.3} vs expected {:.3}",
                    expected[f]
                );
            }
        }
    }

    #[test]
    fn invalid_probabilities_are_rejected() {
        let mut config = tiny_config(1);
        config.phases[0].state_permille = vec![(EngagementState::Listening, 900)];
        assert!(matches!(
            generate_interaction(&config),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn corpus_has_unique_ids_and_respects_n() {
        let base = tiny_config(5);
        let corpus = generate_corpus(4, &base, 5).unwrap();
        assert_eq!(corpus.len(), 4);
        let ids: Vec<&str> = corpus.iter().map(|b| b.interaction_id.as_str()).collect();
        assert_eq!(ids, vec!["int_000", "int_001", "int_002", "int_003"]);
        assert!(generate_corpus(0, &base, 5).is_err());
    }
}
