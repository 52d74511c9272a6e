//! Nucleotide alphabet shared by every DNA-facing model.

use std::fmt;

use crate::error::{Error, Result};

/// One of `A, C, G, T`, indexed `0..4` in that order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Nucleotide {
    A = 0,
    C = 1,
    G = 2,
    T = 3,
}

impl Nucleotide {
    pub const ALL: [Nucleotide; 4] = [Nucleotide::A, Nucleotide::C, Nucleotide::G, Nucleotide::T];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// Upper- or lower-case `ACGT`.
    pub fn from_char(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'A' => Some(Nucleotide::A),
            'C' => Some(Nucleotide::C),
            'G' => Some(Nucleotide::G),
            'T' => Some(Nucleotide::T),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        ['A', 'C', 'G', 'T'][self.index()]
    }
}

impl fmt::Display for Nucleotide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Parse a strict `ACGT` string, reporting the first offending position.
pub fn parse_dna(s: &str) -> Result<Vec<Nucleotide>> {
    s.chars()
        .enumerate()
        .map(|(position, ch)| Nucleotide::from_char(ch).ok_or(Error::InvalidCharacter { ch, position }))
        .collect()
}

pub fn dna_to_string(seq: &[Nucleotide]) -> String {
    seq.iter().map(|n| n.as_char()).collect()
}
