//! Distance matrices (square PHYLIP or JSON) and m-dissimilarity JSON.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::treespace::{DissimilarityMap, MDissimilarityMap};

const SYMMETRY_TOLERANCE: f64 = 1e-9;

#[derive(Serialize, Deserialize)]
struct DistanceJson {
    taxa: Vec<String>,
    matrix: Vec<Vec<f64>>,
}

fn build(taxa: Vec<String>, mut d: Vec<Vec<f64>>) -> Result<DissimilarityMap> {
    let n = taxa.len();
    for (i, row) in d.iter().enumerate() {
        if row.len() != n {
            return Err(Error::DimensionMismatch {
                what: format!("entries in the row for {}", taxa[i]),
                expected: n,
                found: row.len(),
            });
        }
    }
    for i in 0..n {
        if d[i][i].abs() > SYMMETRY_TOLERANCE {
            return Err(Error::InvalidMatrix(format!("diagonal entry for {} is {}", taxa[i], d[i][i])));
        }
        d[i][i] = 0.0;
        for j in 0..i {
            let (a, b) = (d[i][j], d[j][i]);
            if (a - b).abs() > SYMMETRY_TOLERANCE {
                return Err(Error::InvalidMatrix(format!(
                    "entries ({0}, {1}) = {a} and ({1}, {0}) = {b} differ",
                    taxa[i], taxa[j]
                )));
            }
            let mean = 0.5 * (a + b);
            d[i][j] = mean;
            d[j][i] = mean;
        }
    }
    DissimilarityMap::new(taxa, d)
}

fn parse_phylip(text: &str) -> Result<DissimilarityMap> {
    let mut tokens = text.split_whitespace().map(|t| {
        let offset = t.as_ptr() as usize - text.as_ptr() as usize;
        (offset, t)
    });
    let (offset, first) = tokens.next().ok_or_else(|| Error::parse(0, "empty distance matrix"))?;
    let n: usize = first
        .parse()
        .map_err(|_| Error::parse(offset, format!("expected the taxon count, found {first:?}")))?;
    let mut taxa = Vec::with_capacity(n);
    let mut d = Vec::with_capacity(n);
    for _ in 0..n {
        let (_, name) = tokens
            .next()
            .ok_or_else(|| Error::parse(text.len(), format!("expected {n} rows, found {}", taxa.len())))?;
        let mut row = Vec::with_capacity(n);
        for _ in 0..n {
            let (offset, tok) = tokens
                .next()
                .ok_or_else(|| Error::parse(text.len(), format!("row for {name} is short")))?;
            let v: f64 = tok
                .parse()
                .map_err(|_| Error::parse(offset, format!("invalid distance {tok:?}")))?;
            if !v.is_finite() {
                return Err(Error::parse(offset, format!("distance {tok} is not finite")));
            }
            row.push(v);
        }
        taxa.push(name.to_string());
        d.push(row);
    }
    if let Some((offset, tok)) = tokens.next() {
        return Err(Error::parse(offset, format!("unexpected {tok:?} after the last row")));
    }
    build(taxa, d)
}

/// Square PHYLIP (taxon count, then one named row per taxon) or JSON
/// `{"taxa": [...], "matrix": [[...]]}`.
pub fn parse_distance_matrix(text: &str) -> Result<DissimilarityMap> {
    if text.trim_start().starts_with('{') {
        let parsed: DistanceJson =
            serde_json::from_str(text).map_err(|e| Error::parse(e.column(), format!("line {}: {e}", e.line())))?;
        if parsed.matrix.len() != parsed.taxa.len() {
            return Err(Error::DimensionMismatch {
                what: "matrix rows".into(),
                expected: parsed.taxa.len(),
                found: parsed.matrix.len(),
            });
        }
        build(parsed.taxa, parsed.matrix)
    } else {
        parse_phylip(text)
    }
}

/// Square PHYLIP with shortest round-trip number formatting.
pub fn emit_phylip(d: &DissimilarityMap) -> String {
    let width = d.taxa().iter().map(|t| t.len()).max().unwrap_or(0);
    let mut out = format!("{}\n", d.len());
    for (i, t) in d.taxa().iter().enumerate() {
        out.push_str(&format!("{t:<width$}"));
        for j in 0..d.len() {
            out.push_str(&format!(" {}", d.get(i, j)));
        }
        out.push('\n');
    }
    out
}

pub fn emit_distance_json(d: &DissimilarityMap) -> String {
    serde_json::to_string_pretty(&DistanceJson {
        taxa: d.taxa().to_vec(),
        matrix: d.rows().to_vec(),
    })
    .expect("finite numbers serialize")
}

#[derive(Serialize, Deserialize)]
struct MEntry {
    taxa: Vec<String>,
    value: f64,
}

#[derive(Serialize, Deserialize)]
struct MJson {
    taxa: Vec<String>,
    m: usize,
    values: Vec<MEntry>,
}

/// `{"taxa": [...], "m": 3, "values": [{"taxa": [..], "value": x}, ...]}`
/// with one entry per m-subset.
pub fn parse_m_dissimilarity_json(text: &str) -> Result<MDissimilarityMap> {
    let parsed: MJson =
        serde_json::from_str(text).map_err(|e| Error::parse(e.column(), format!("line {}: {e}", e.line())))?;
    let entries: Vec<(Vec<String>, f64)> = parsed.values.into_iter().map(|e| (e.taxa, e.value)).collect();
    MDissimilarityMap::from_entries(parsed.taxa, parsed.m, &entries)
}

pub fn emit_m_dissimilarity_json(d: &MDissimilarityMap) -> String {
    let values = d
        .entries()
        .into_iter()
        .map(|(s, value)| MEntry {
            taxa: s.iter().map(|&i| d.taxa()[i].clone()).collect(),
            value,
        })
        .collect();
    serde_json::to_string_pretty(&MJson {
        taxa: d.taxa().to_vec(),
        m: d.m(),
        values,
    })
    .expect("finite numbers serialize")
}
