//! FASTA records.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FastaRecord {
    pub name: String,
    pub sequence: String,
}

/// Parse FASTA. The name is the first word of the header; sequence lines
/// are concatenated with whitespace removed and letters upper-cased.
pub fn parse_fasta(text: &str) -> Result<Vec<FastaRecord>> {
    let mut records: Vec<FastaRecord> = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let trimmed = line.trim();
        if let Some(header) = trimmed.strip_prefix('>') {
            let name = header.split_whitespace().next().unwrap_or_default();
            if name.is_empty() {
                return Err(Error::parse(offset, "record without a name"));
            }
            records.push(FastaRecord {
                name: name.to_string(),
                sequence: String::new(),
            });
        } else if !trimmed.is_empty() && !trimmed.starts_with(';') {
            let record = records
                .last_mut()
                .ok_or_else(|| Error::parse(offset, "sequence data before the first header"))?;
            record
                .sequence
                .extend(trimmed.chars().filter(|c| !c.is_whitespace()).map(|c| c.to_ascii_uppercase()));
        }
        offset += line.len();
    }
    if records.is_empty() {
        return Err(Error::Empty("no FASTA records".into()));
    }
    Ok(records)
}

pub fn emit_fasta(records: &[FastaRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push('>');
        out.push_str(&r.name);
        out.push('\n');
        let bytes = r.sequence.as_bytes();
        for chunk in bytes.chunks(60) {
            out.push_str(std::str::from_utf8(chunk).expect("ASCII sequence"));
            out.push('\n');
        }
    }
    out
}

/// Equal-length records over `A, C, G, T, -, N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignedFasta {
    records: Vec<FastaRecord>,
}

impl AlignedFasta {
    pub fn new(records: Vec<FastaRecord>) -> Result<Self> {
        let Some(first) = records.first() else {
            return Err(Error::Empty("alignment without sequences".into()));
        };
        let len = first.sequence.len();
        let mut names = std::collections::HashSet::new();
        for r in &records {
            if !names.insert(r.name.as_str()) {
                return Err(Error::InvalidParameter(format!("sequence name {:?} appears twice", r.name)));
            }
            if r.sequence.len() != len {
                return Err(Error::DimensionMismatch {
                    what: format!("aligned length of {}", r.name),
                    expected: len,
                    found: r.sequence.len(),
                });
            }
            if let Some((position, ch)) = r
                .sequence
                .chars()
                .enumerate()
                .find(|(_, c)| !matches!(c, 'A' | 'C' | 'G' | 'T' | '-' | 'N'))
            {
                return Err(Error::InvalidCharacter { ch, position });
            }
        }
        Ok(Self { records })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::new(parse_fasta(text)?)
    }

    pub fn records(&self) -> &[FastaRecord] {
        &self.records
    }

    pub fn names(&self) -> Vec<&str> {
        self.records.iter().map(|r| r.name.as_str()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.records.iter().find(|r| r.name == name).map(|r| r.sequence.as_str())
    }

    pub fn width(&self) -> usize {
        self.records[0].sequence.len()
    }
}
