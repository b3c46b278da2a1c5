use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{shape, Result};

/// A word over the alphabet `{1, ..., d}`. Letters are stored 1-based, the
/// empty word addresses the scalar slot.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<u32>);

impl Word {
    pub fn new(letters: impl Into<Vec<u32>>) -> Self {
        Word(letters.into())
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letter(letter: u32) -> Self {
        Word(vec![letter])
    }

    pub fn letters(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = Vec::with_capacity(self.len() + other.len());
        letters.extend_from_slice(&self.0);
        letters.extend_from_slice(&other.0);
        Word(letters)
    }

    pub fn push(&mut self, letter: u32) {
        self.0.push(letter);
    }

    pub fn reversed(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    /// Checks every letter lies in `1..=dim`.
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self.0.iter().find(|&&l| l == 0 || l as usize > dim) {
            Some(l) => Err(shape(format!("letter {l} outside alphabet 1..={dim}"))),
            None => Ok(()),
        }
    }

    /// Offset of this word inside its level under the word-lexicographic
    /// layout: `sum_j (i_j - 1) d^(k-j)`. Letters must already be validated.
    pub fn level_index(&self, dim: usize) -> usize {
        self.0
            .iter()
            .fold(0usize, |acc, &l| acc * dim + (l as usize - 1))
    }

    /// Inverse of [`Word::level_index`].
    pub fn from_level_index(mut index: usize, len: usize, dim: usize) -> Word {
        let mut letters = vec![0u32; len];
        for slot in letters.iter_mut().rev() {
            *slot = (index % dim) as u32 + 1;
            index /= dim;
        }
        Word(letters)
    }
}

impl From<Vec<u32>> for Word {
    fn from(v: Vec<u32>) -> Self {
        Word(v)
    }
}

impl From<&[u32]> for Word {
    fn from(v: &[u32]) -> Self {
        Word(v.to_vec())
    }
}

/// Formats as comma-separated letters, e.g. `1,2,2`; the empty word prints as
/// an empty string.
impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Word {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Word::empty());
        }
        s.split(',')
            .map(|p| {
                p.trim()
                    .parse::<u32>()
                    .map_err(|e| crate::error::invalid(format!("bad letter {p:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }
}
