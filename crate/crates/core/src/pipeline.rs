//! From aligned sites (or a distance matrix) to the probability that a
//! motif is conserved unchanged across every taxon.
//!
//! Steps: corrected pairwise distances, a neighbor-joining tree, the
//! probability that one site shows the same letter in every taxon, and
//! that probability raised to the motif length and scaled by genome size.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::{all_same_probability, jc_distance};
use crate::formats::{emit_newick, AlignedFasta, FastaRecord};
use crate::treespace::{neighbor_join, DissimilarityMap};

pub const REPORT_VERSION: &str = "1.0";

/// The 42-base motif examined by default.
pub const DEFAULT_MOTIF: &str = "TTTAATTGAAAGAAGTTAATTGAATGAAAATGATCAACTAAG";

pub const DEFAULT_GENOME_LENGTH: f64 = 2.8e9;

fn is_base(b: u8) -> bool {
    matches!(b, b'A' | b'C' | b'G' | b'T')
}

/// `(n, k)`: columns where both taxa show a nucleotide, and how many of
/// those differ. Gap and `N` columns are dropped for this pair only.
pub fn pairwise_site_differences(a: &AlignedFasta, taxon1: &str, taxon2: &str) -> Result<(usize, usize)> {
    let s1 = a.get(taxon1).ok_or_else(|| Error::UnknownTaxon(taxon1.into()))?;
    let s2 = a.get(taxon2).ok_or_else(|| Error::UnknownTaxon(taxon2.into()))?;
    if s1.len() != s2.len() {
        return Err(Error::DimensionMismatch {
            what: format!("aligned length of {taxon2}"),
            expected: s1.len(),
            found: s2.len(),
        });
    }
    let (mut n, mut k) = (0, 0);
    for (x, y) in s1.bytes().zip(s2.bytes()) {
        if is_base(x) && is_base(y) {
            n += 1;
            k += usize::from(x != y);
        }
    }
    Ok((n, k))
}

/// Start positions of every occurrence of `motif`, overlaps included.
pub fn find_motif(sequence: &str, motif: &str) -> Vec<usize> {
    if motif.is_empty() || motif.len() > sequence.len() {
        return Vec::new();
    }
    let (s, m) = (sequence.as_bytes(), motif.as_bytes());
    (0..=s.len() - m.len()).filter(|&i| &s[i..i + m.len()] == m).collect()
}

#[derive(Debug, Clone)]
pub enum PipelineInput {
    Alignment(AlignedFasta),
    Distances(DissimilarityMap),
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub input: PipelineInput,
    pub motif: String,
    pub genome_length: f64,
    /// Sequences searched for the motif (for example genomic context).
    pub motif_targets: Vec<FastaRecord>,
}

impl PipelineConfig {
    pub fn new(input: PipelineInput) -> Self {
        Self {
            input,
            motif: DEFAULT_MOTIF.to_string(),
            genome_length: DEFAULT_GENOME_LENGTH,
            motif_targets: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PairwiseEntry {
    pub taxon1: String,
    pub taxon2: String,
    /// Site counts; absent when distances were given directly.
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MotifHit {
    pub taxon: String,
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PipelineReport {
    pub spec_version: String,
    pub gap_handling: String,
    pub pairwise: Vec<PairwiseEntry>,
    /// Unrooted neighbor-joining tree.
    pub newick: String,
    pub clamped_branches: usize,
    pub p_same: f64,
    pub p_any: f64,
    pub motif: String,
    pub motif_length: usize,
    /// `pAny` to the power of the motif length (42 by default).
    pub p42: f64,
    pub genome_length: f64,
    pub genome_scale: f64,
    pub log10_p_same: f64,
    pub log10_p_any: f64,
    pub log10_p42: f64,
    pub log10_genome_scale: f64,
    pub motif_hits: Vec<MotifHit>,
}

fn distances_from_alignment(a: &AlignedFasta) -> Result<(DissimilarityMap, Vec<PairwiseEntry>)> {
    let names: Vec<String> = a.names().iter().map(|s| s.to_string()).collect();
    let t = names.len();
    let mut d = vec![vec![0.0; t]; t];
    let mut entries = Vec::new();
    for i in 0..t {
        for j in i + 1..t {
            let (n, k) = pairwise_site_differences(a, &names[i], &names[j])?;
            let dist = jc_distance(n, k).map_err(|e| match e {
                Error::Saturated { n, k, .. } => Error::Saturated {
                    pair: format!("{} and {}", names[i], names[j]),
                    n,
                    k,
                },
                Error::Empty(_) => Error::Empty(format!("{} and {} share no unambiguous sites", names[i], names[j])),
                other => other,
            })?;
            d[i][j] = dist;
            d[j][i] = dist;
            entries.push(PairwiseEntry {
                taxon1: names[i].clone(),
                taxon2: names[j].clone(),
                n: Some(n),
                k: Some(k),
                distance: dist,
            });
        }
    }
    Ok((DissimilarityMap::new(names, d)?, entries))
}

pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineReport> {
    if !(config.genome_length > 0.0) || !config.genome_length.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "genome length must be positive, got {}",
            config.genome_length
        )));
    }
    if config.motif.is_empty() {
        return Err(Error::Empty("motif".into()));
    }
    let (delta, pairwise) = match &config.input {
        PipelineInput::Alignment(a) => distances_from_alignment(a)?,
        PipelineInput::Distances(d) => {
            let taxa = d.taxa();
            let mut entries = Vec::new();
            for i in 0..taxa.len() {
                for j in i + 1..taxa.len() {
                    entries.push(PairwiseEntry {
                        taxon1: taxa[i].clone(),
                        taxon2: taxa[j].clone(),
                        n: None,
                        k: None,
                        distance: d.get(i, j),
                    });
                }
            }
            (d.clone(), entries)
        }
    };
    let nj = neighbor_join(&delta)?;
    let same = all_same_probability(&nj.tree)?;
    let motif_length = config.motif.len();
    let ln_any = same.any.ln();
    let ln_p42 = motif_length as f64 * ln_any;
    let p42 = ln_p42.exp();
    let genome_scale = config.genome_length * p42;
    let motif = config.motif.to_ascii_uppercase();
    let mut motif_hits = Vec::new();
    let alignment_rows = match &config.input {
        PipelineInput::Alignment(a) => a.records().to_vec(),
        PipelineInput::Distances(_) => Vec::new(),
    };
    for r in config.motif_targets.iter().chain(&alignment_rows) {
        for position in find_motif(&r.sequence.to_ascii_uppercase(), &motif) {
            motif_hits.push(MotifHit {
                taxon: r.name.clone(),
                position,
            });
        }
    }
    let log10 = std::f64::consts::LOG10_E;
    Ok(PipelineReport {
        spec_version: REPORT_VERSION.into(),
        gap_handling: "pairwise".into(),
        pairwise,
        newick: emit_newick(&nj.tree),
        clamped_branches: nj.clamped,
        p_same: same.single,
        p_any: same.any,
        motif,
        motif_length,
        p42,
        genome_length: config.genome_length,
        genome_scale,
        log10_p_same: same.single.log10(),
        log10_p_any: ln_any * log10,
        log10_p42: ln_p42 * log10,
        log10_genome_scale: config.genome_length.log10() + ln_p42 * log10,
        motif_hits,
    })
}

impl PipelineReport {
    /// Human-readable summary.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("pairwise distances (gap and N columns dropped per pair)\n");
        for e in &self.pairwise {
            match (e.n, e.k) {
                (Some(n), Some(k)) => out.push_str(&format!(
                    "  {:<8} {:<8} n={n:<7} k={k:<7} d={:.6}\n",
                    e.taxon1, e.taxon2, e.distance
                )),
                _ => out.push_str(&format!("  {:<8} {:<8} d={:.6}\n", e.taxon1, e.taxon2, e.distance)),
            }
        }
        out.push_str(&format!("tree           {}\n", self.newick));
        if self.clamped_branches > 0 {
            out.push_str(&format!("warning        {} negative branch lengths set to 0\n", self.clamped_branches));
        }
        out.push_str(&format!("p(all A)       {:.6}  (log10 {:.4})\n", self.p_same, self.log10_p_same));
        out.push_str(&format!("p(all same)    {:.6}  (log10 {:.4})\n", self.p_any, self.log10_p_any));
        out.push_str(&format!(
            "p^{:<12}{:.4e}  (log10 {:.4})\n",
            self.motif_length, self.p42, self.log10_p42
        ));
        out.push_str(&format!(
            "x genome {:.3e}  {:.4e}  (log10 {:.4})\n",
            self.genome_length, self.genome_scale, self.log10_genome_scale
        ));
        out.push_str(&format!("motif hits     {}\n", self.motif_hits.len()));
        for h in &self.motif_hits {
            out.push_str(&format!("  {} @ {}\n", h.taxon, h.position));
        }
        out
    }
}
