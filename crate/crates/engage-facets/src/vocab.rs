//! Channel vocabularies: the fixed, ordered label sets used for validation
//! and one-hot encoding.

/// Reserved label for frames not covered by any segment of a channel. It is
/// also a regular addressee class, so the addressee vocabulary includes it.
pub const NO_LABEL: &str = "NoLabel";

/// Robot speech-activity labels.
pub const SPEECH: &str = "Speech";
pub const SILENCE: &str = "Silence";

/// Topic label for frames where no topic keyword applies.
pub const TOPIC_NONE: &str = "none";

/// VFOA targets referenced by relational features.
pub const VFOA_NAO: &str = "nao";
pub const VFOA_OTHER_PARTICIPANT: &str = "other_participant";

/// Participant addressee classes referenced by relational features.
pub const ADDRESSEE_NAO: &str = "Nao";
pub const ADDRESSEE_PRIGHT: &str = "PRight";
pub const ADDRESSEE_PLEFT: &str = "PLeft";
pub const ADDRESSEE_GROUP: &str = "Group";

/// An ordered set of labels for one channel. Label order is fixed and
/// defines one-hot column order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    labels: Vec<String>,
}

impl Vocabulary {
    /// Builds a vocabulary from an ordered label list. Duplicates are not
    /// allowed.
    pub fn new<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        for (i, l) in labels.iter().enumerate() {
            assert!(
                !labels[..i].contains(l),
                "duplicate vocabulary label '{l}'"
            );
        }
        Self { labels }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Position of `label`, or `None` when it is outside the vocabulary.
    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.index_of(label).is_some()
    }
}

/// Visual focus of attention targets (9 labels).
pub fn vfoa() -> Vocabulary {
    Vocabulary::new([
        VFOA_NAO,
        VFOA_OTHER_PARTICIPANT,
        "painting_manray",
        "painting_warhol",
        "painting_arp",
        "paintings_other",
        "windows",
        "table",
        "unfocused",
    ])
}

/// Participant addressee classes (6 labels). `NoLabel` is a regular class
/// here, not only the absence marker.
pub fn participant_addressee() -> Vocabulary {
    Vocabulary::new([
        NO_LABEL,
        ADDRESSEE_NAO,
        ADDRESSEE_GROUP,
        ADDRESSEE_PRIGHT,
        ADDRESSEE_PLEFT,
        SILENCE,
    ])
}

/// Robot addressee classes derived from its speech (9 labels).
pub fn robot_addressee() -> Vocabulary {
    Vocabulary::new([
        "Person1",
        "Person2",
        "GroupExplicit",
        "GroupPerson1",
        "GroupPerson2",
        "Person1Group",
        "Person2Group",
        "Group",
        SILENCE,
    ])
}

/// Robot speech activity (2 labels).
pub fn robot_activity() -> Vocabulary {
    Vocabulary::new([SPEECH, SILENCE])
}

/// The 8 fine-grained engagement state codes.
pub fn engagement_states() -> Vocabulary {
    Vocabulary::new(["EL", "EWF", "ETh", "EC", "ELP2", "ER", "EPR", "ENR"])
}

/// Binary speaking channel: a covering segment carries this label.
pub fn speaking() -> Vocabulary {
    Vocabulary::new(["speaking"])
}

/// Binary laughter channel: a covering segment carries this label.
pub fn laughter() -> Vocabulary {
    Vocabulary::new(["laughter"])
}
