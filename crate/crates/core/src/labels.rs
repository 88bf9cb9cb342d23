//! The five-slot semantic label of an event segment.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Participant filling an entity slot (subject, object, locative).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Entity {
    #[serde(rename = "performer")]
    Performer,
    O1,
    O2,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verb {
    Push,
    Pull,
    Slide,
    Roll,
    #[serde(rename = "None")]
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preposition {
    Toward,
    AwayFrom,
    Past,
    #[serde(rename = "None")]
    None,
}

macro_rules! vocabulary {
    ($ty:ident, [$($v:ident => $s:literal),+ $(,)?]) => {
        impl $ty {
            pub const ALL: &'static [$ty] = &[$($ty::$v),+];

            pub fn index(self) -> usize {
                self as usize
            }

            pub fn from_index(i: usize) -> Option<$ty> {
                Self::ALL.get(i).copied()
            }

            pub fn as_str(self) -> &'static str {
                match self {
                    $($ty::$v => $s),+
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($s => Ok($ty::$v),)+
                    other => Err(Error::InvalidInput(format!(
                        concat!("unknown ", stringify!($ty), " `{}`"),
                        other
                    ))),
                }
            }
        }
    };
}

vocabulary!(Entity, [Performer => "performer", O1 => "O1", O2 => "O2", None => "None"]);
vocabulary!(Verb, [Push => "push", Pull => "pull", Slide => "slide", Roll => "roll", None => "None"]);
vocabulary!(Preposition, [Toward => "toward", AwayFrom => "away_from", Past => "past", None => "None"]);

/// Slots in the order score vectors are laid out: locative, subject,
/// object, preposition, verb.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Locative,
    Subject,
    Object,
    Preposition,
    Verb,
}

impl Slot {
    pub const ALL: [Slot; 5] = [
        Slot::Locative,
        Slot::Subject,
        Slot::Object,
        Slot::Preposition,
        Slot::Verb,
    ];

    pub fn size(self) -> usize {
        match self {
            Slot::Locative | Slot::Subject | Slot::Object => Entity::ALL.len(),
            Slot::Preposition => Preposition::ALL.len(),
            Slot::Verb => Verb::ALL.len(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Slot::Locative => "locative",
            Slot::Subject => "subject",
            Slot::Object => "object",
            Slot::Preposition => "preposition",
            Slot::Verb => "verb",
        }
    }

    pub fn vocabulary(self) -> Vec<&'static str> {
        match self {
            Slot::Locative | Slot::Subject | Slot::Object => Entity::ALL.iter().map(|e| e.as_str()).collect(),
            Slot::Preposition => Preposition::ALL.iter().map(|p| p.as_str()).collect(),
            Slot::Verb => Verb::ALL.iter().map(|v| v.as_str()).collect(),
        }
    }

    /// Total length of the concatenated score vector.
    pub fn total_size() -> usize {
        Slot::ALL.iter().map(|s| s.size()).sum()
    }

    /// Offset of this slot inside the concatenated score vector.
    pub fn offset(self) -> usize {
        Slot::ALL.iter().take_while(|&&s| s != self).map(|s| s.size()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LabelTuple {
    pub subject: Entity,
    pub verb: Verb,
    pub object: Entity,
    pub preposition: Preposition,
    pub locative: Entity,
}

impl LabelTuple {
    pub const NONE: LabelTuple = LabelTuple {
        subject: Entity::None,
        verb: Verb::None,
        object: Entity::None,
        preposition: Preposition::None,
        locative: Entity::None,
    };

    pub fn index(&self, slot: Slot) -> usize {
        match slot {
            Slot::Locative => self.locative.index(),
            Slot::Subject => self.subject.index(),
            Slot::Object => self.object.index(),
            Slot::Preposition => self.preposition.index(),
            Slot::Verb => self.verb.index(),
        }
    }

    /// Indices in slot order (l, s, o, p, v).
    pub fn indices(&self) -> [usize; 5] {
        Slot::ALL.map(|s| self.index(s))
    }

    pub fn from_indices(idx: [usize; 5]) -> Option<LabelTuple> {
        Some(LabelTuple {
            locative: Entity::from_index(idx[0])?,
            subject: Entity::from_index(idx[1])?,
            object: Entity::from_index(idx[2])?,
            preposition: Preposition::from_index(idx[3])?,
            verb: Verb::from_index(idx[4])?,
        })
    }

    /// The structural constraints every well-formed description obeys:
    /// no entity fills two of subject/object/locative, a missing verb
    /// empties every slot, and locative and preposition are present together.
    pub fn satisfies_constraints(&self) -> bool {
        let ents = [self.subject, self.object, self.locative];
        for i in 0..3 {
            for j in i + 1..3 {
                if ents[i] != Entity::None && ents[i] == ents[j] {
                    return false;
                }
            }
        }
        if self.verb == Verb::None && *self != LabelTuple::NONE {
            return false;
        }
        (self.locative == Entity::None) == (self.preposition == Preposition::None)
    }
}

impl fmt::Display for LabelTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {}, {}, {})",
            self.subject, self.verb, self.object, self.preposition, self.locative
        )
    }
}
