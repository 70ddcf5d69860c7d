//! Labels and small label sets.
//!
//! Labels are `1..=L`. Candidate sets are bitsets, which caps the supported
//! label count at 16 — plenty for the simulation harness and cheap to
//! intersect when learners aggregate candidates across rounds.

use serde::{Deserialize, Serialize};
use std::fmt;

/// A class label, `1..=L`.
pub type Label = u8;

/// Maximum label count representable by [`LabelSet`].
pub const MAX_LABELS: usize = 16;

/// A set of candidate labels over `1..=L`, stored as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabelSet(u16);

impl LabelSet {
    pub fn empty() -> Self {
        LabelSet(0)
    }

    /// The full set `{1, ..., l}`.
    pub fn full(l: usize) -> Self {
        assert!(l >= 1 && l <= MAX_LABELS, "label count {l} out of range");
        if l == MAX_LABELS {
            LabelSet(u16::MAX)
        } else {
            LabelSet((1u16 << l) - 1)
        }
    }

    pub fn singleton(y: Label) -> Self {
        let mut s = LabelSet::empty();
        s.insert(y);
        s
    }

    pub fn from_bits(bits: u16) -> Self {
        LabelSet(bits)
    }

    pub fn bits(self) -> u16 {
        self.0
    }

    pub fn contains(self, y: Label) -> bool {
        y >= 1 && y as usize <= MAX_LABELS && self.0 & (1 << (y - 1)) != 0
    }

    pub fn insert(&mut self, y: Label) {
        assert!(y >= 1 && y as usize <= MAX_LABELS);
        self.0 |= 1 << (y - 1);
    }

    pub fn remove(&mut self, y: Label) {
        if y >= 1 && y as usize <= MAX_LABELS {
            self.0 &= !(1 << (y - 1));
        }
    }

    pub fn intersect(self, other: LabelSet) -> LabelSet {
        LabelSet(self.0 & other.0)
    }

    pub fn union(self, other: LabelSet) -> LabelSet {
        LabelSet(self.0 | other.0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Smallest label in the set — the classifier reading of a candidate set.
    pub fn min_label(self) -> Option<Label> {
        if self.0 == 0 {
            None
        } else {
            Some(self.0.trailing_zeros() as Label + 1)
        }
    }

    pub fn iter(self) -> impl Iterator<Item = Label> {
        (1..=MAX_LABELS as Label).filter(move |&y| self.contains(y))
    }

    pub fn is_subset_of(self, other: LabelSet) -> bool {
        self.0 & !other.0 == 0
    }
}

impl fmt::Debug for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        let mut first = true;
        for y in self.iter() {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{y}")?;
            first = false;
        }
        write!(f, "}}")
    }
}
