//! Aggregation operators admitted by part-wise aggregation.
//!
//! The set is closed so that every partial aggregate fits in a bounded
//! number of payload words.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::sim::Word;

/// Commutative, associative operators over one payload word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AggOp {
    Min,
    Max,
    /// Wrapping sum, i.e. sum modulo 2^64.
    Sum,
    Or,
    And,
    /// Value contributed by the minimum-ID node.
    FirstById,
}

/// A partial aggregate. `id` only matters for [`AggOp::FirstById`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Item {
    pub word: Word,
    pub id: Word,
}

impl AggOp {
    pub const ALL: [AggOp; 6] = [
        AggOp::Min,
        AggOp::Max,
        AggOp::Sum,
        AggOp::Or,
        AggOp::And,
        AggOp::FirstById,
    ];

    pub fn identity(self) -> Item {
        let word = match self {
            AggOp::Min | AggOp::And => Word::MAX,
            AggOp::Max | AggOp::Sum | AggOp::Or | AggOp::FirstById => 0,
        };
        Item { word, id: Word::MAX }
    }

    /// Lifts a node's input value into an aggregate.
    pub fn lift(self, node: usize, word: Word) -> Item {
        Item {
            word,
            id: node as Word,
        }
    }

    pub fn combine(self, a: Item, b: Item) -> Item {
        match self {
            AggOp::Min => Item {
                word: a.word.min(b.word),
                id: a.id.min(b.id),
            },
            AggOp::Max => Item {
                word: a.word.max(b.word),
                id: a.id.min(b.id),
            },
            AggOp::Sum => Item {
                word: a.word.wrapping_add(b.word),
                id: a.id.min(b.id),
            },
            AggOp::Or => Item {
                word: a.word | b.word,
                id: a.id.min(b.id),
            },
            AggOp::And => Item {
                word: a.word & b.word,
                id: a.id.min(b.id),
            },
            AggOp::FirstById => {
                if b.id < a.id {
                    b
                } else {
                    a
                }
            }
        }
    }

    pub fn fold<I: IntoIterator<Item = Item>>(self, items: I) -> Item {
        items
            .into_iter()
            .fold(self.identity(), |acc, it| self.combine(acc, it))
    }

    /// Number of payload words an aggregate of this operator occupies.
    pub fn words(self) -> usize {
        match self {
            AggOp::FirstById => 2,
            _ => 1,
        }
    }

    pub fn encode(self, item: Item, out: &mut crate::sim::Payload) {
        out.push(item.word);
        if self == AggOp::FirstById {
            out.push(item.id);
        }
    }

    pub fn decode(self, words: &[Word]) -> Item {
        match self {
            AggOp::FirstById => Item {
                word: words[0],
                id: words[1],
            },
            _ => Item {
                word: words[0],
                id: Word::MAX,
            },
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AggOp::Min => "min",
            AggOp::Max => "max",
            AggOp::Sum => "sum",
            AggOp::Or => "or",
            AggOp::And => "and",
            AggOp::FirstById => "first-by-id",
        }
    }
}

impl fmt::Display for AggOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AggOp {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AggOp::ALL
            .into_iter()
            .find(|op| op.name() == s.trim())
            .ok_or_else(|| format!("unknown aggregation operator `{s}`"))
    }
}
