//! Tree metrics and the combinatorics of tree space: metric and four-point
//! checks, splits, neighbor-joining, m-dissimilarity maps and their
//! generalized cherry picking.

mod mtree;
mod nj;

pub use mtree::{
    check_m_tree, generalized_neighbor_join, generalized_nj_cherry, gr36_residuals, m_dissimilarity,
    GeneralizedNjResult, GnjCherry, MDissimilarityMap, MTreeVerdict, MTreeViolation,
};
pub use nj::{neighbor_join, nj_q_table, NjResult};

use std::collections::{BTreeMap, HashSet};

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::semiring::TIE_TOLERANCE;
use crate::tree::PhyloTree;

/// Slack allowed by [`check_four_point`].
pub const FOUR_POINT_TOLERANCE: f64 = 1e-9;

fn slack(scale: f64) -> f64 {
    TIE_TOLERANCE * scale.abs().max(1.0)
}

/// Symmetric table with zero diagonal over labeled taxa.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMap {
    taxa: Vec<String>,
    d: Vec<Vec<f64>>,
}

impl DissimilarityMap {
    pub fn new(taxa: Vec<String>, d: Vec<Vec<f64>>) -> Result<Self> {
        let n = taxa.len();
        let mut seen = HashSet::new();
        if let Some(dup) = taxa.iter().find(|t| !seen.insert(t.as_str())) {
            return Err(Error::InvalidMatrix(format!("taxon {dup:?} appears twice")));
        }
        if d.len() != n {
            return Err(Error::DimensionMismatch {
                what: "distance rows".into(),
                expected: n,
                found: d.len(),
            });
        }
        for (i, row) in d.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    what: format!("entries in distance row {i}"),
                    expected: n,
                    found: row.len(),
                });
            }
            if let Some(j) = row.iter().position(|x| !x.is_finite()) {
                return Err(Error::InvalidMatrix(format!("entry ({}, {}) is not finite", taxa[i], taxa[j])));
            }
            if row[i] != 0.0 {
                return Err(Error::InvalidMatrix(format!("diagonal entry for {} is {}", taxa[i], row[i])));
            }
            for j in 0..i {
                if (row[j] - d[j][i]).abs() > slack(row[j]) {
                    return Err(Error::InvalidMatrix(format!(
                        "asymmetric entries for ({}, {}): {} vs {}",
                        taxa[i], taxa[j], row[j], d[j][i]
                    )));
                }
            }
        }
        Ok(Self { taxa, d })
    }

    pub fn from_fn(taxa: Vec<String>, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let n = taxa.len();
        let mut d = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let v = f(i, j);
                d[i][j] = v;
                d[j][i] = v;
            }
        }
        Self::new(taxa, d)
    }

    pub fn taxa(&self) -> &[String] {
        &self.taxa
    }

    pub fn len(&self) -> usize {
        self.taxa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taxa.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i][j]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.d
    }

    pub fn index_of(&self, taxon: &str) -> Option<usize> {
        self.taxa.iter().position(|t| t == taxon)
    }

    pub fn by_label(&self, a: &str, b: &str) -> Result<f64> {
        let i = self.index_of(a).ok_or_else(|| Error::UnknownTaxon(a.into()))?;
        let j = self.index_of(b).ok_or_else(|| Error::UnknownTaxon(b.into()))?;
        Ok(self.d[i][j])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricViolation {
    Negative { i: usize, j: usize },
    /// `d(x, z) > d(x, y) + d(y, z)`.
    Triangle { x: usize, y: usize, z: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MetricVerdict {
    pub is_metric: bool,
    /// The first violation in lexicographic order of indices.
    pub violation: Option<MetricViolation>,
}

pub fn check_metric(delta: &DissimilarityMap) -> MetricVerdict {
    let n = delta.len();
    let d = &delta.d;
    let mut violation = None;
    'scan: for i in 0..n {
        for j in i + 1..n {
            if d[i][j] < -slack(0.0) {
                violation = Some(MetricViolation::Negative { i, j });
                break 'scan;
            }
        }
    }
    if violation.is_none() {
        'tri: for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if x == y || y == z || x == z {
                        continue;
                    }
                    let bound = d[x][y] + d[y][z];
                    if d[x][z] > bound + slack(bound) {
                        violation = Some(MetricViolation::Triangle { x, y, z });
                        break 'tri;
                    }
                }
            }
        }
    }
    MetricVerdict {
        is_metric: violation.is_none(),
        violation,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FourPointVerdict {
    pub holds: bool,
    /// The lexicographically first failing quadruple, in increasing order.
    pub quadruple: Option<[usize; 4]>,
}

/// Does the largest of the three pairings `d(u,v)+d(x,y)`, `d(u,x)+d(v,y)`,
/// `d(u,y)+d(v,x)` tie with the middle one?
fn four_point_holds(d: &dyn Fn(usize, usize) -> f64, q: [usize; 4]) -> bool {
    let [u, v, x, y] = q;
    let mut s = [d(u, v) + d(x, y), d(u, x) + d(v, y), d(u, y) + d(v, x)];
    s.sort_by(f64::total_cmp);
    s[2] - s[1] <= FOUR_POINT_TOLERANCE
}

fn first_four_point_failure(n: usize, d: &dyn Fn(usize, usize) -> f64) -> Option<[usize; 4]> {
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for e in c + 1..n {
                    if !four_point_holds(d, [a, b, c, e]) {
                        return Some([a, b, c, e]);
                    }
                }
            }
        }
    }
    None
}

pub fn check_four_point(delta: &DissimilarityMap) -> FourPointVerdict {
    let quadruple = first_four_point_failure(delta.len(), &|i, j| delta.d[i][j]);
    FourPointVerdict {
        holds: quadruple.is_none(),
        quadruple,
    }
}

/// Path-length metric of a tree over its leaves, taxa in label order.
pub fn tree_metric(tree: &PhyloTree) -> Result<DissimilarityMap> {
    tree.validate()?;
    let ids: Vec<usize> = tree.leaf_by_label().into_values().collect();
    let taxa = tree.leaf_labels();
    let dist = tree.leaf_distances();
    DissimilarityMap::from_fn(taxa, |i, j| dist[&(ids[i], ids[j])])
}

/// A bipartition of a taxon set. Side A always holds the smallest label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Split {
    taxa: Vec<String>,
    in_a: Vec<bool>,
}

impl Split {
    /// `side` lists the taxa on one side; `taxa` the whole set.
    pub fn new(taxa: &[String], side: &[String]) -> Result<Self> {
        let mut all = taxa.to_vec();
        all.sort();
        all.dedup();
        if all.len() != taxa.len() {
            return Err(Error::InvalidParameter("split taxa must be distinct".into()));
        }
        let mut in_a = vec![false; all.len()];
        for t in side {
            let i = all
                .binary_search(t)
                .map_err(|_| Error::UnknownTaxon(t.clone()))?;
            in_a[i] = true;
        }
        Self::from_mask(all, in_a)
    }

    fn from_mask(taxa: Vec<String>, mut in_a: Vec<bool>) -> Result<Self> {
        let count = in_a.iter().filter(|&&b| b).count();
        if count == 0 || count == in_a.len() {
            return Err(Error::InvalidParameter("both sides of a split must be nonempty".into()));
        }
        if !in_a[0] {
            in_a.iter_mut().for_each(|b| *b = !*b);
        }
        Ok(Self { taxa, in_a })
    }

    pub fn taxa(&self) -> &[String] {
        &self.taxa
    }

    pub fn a(&self) -> Vec<&str> {
        self.side(true)
    }

    pub fn b(&self) -> Vec<&str> {
        self.side(false)
    }

    fn side(&self, which: bool) -> Vec<&str> {
        self.taxa
            .iter()
            .zip(&self.in_a)
            .filter(|(_, &b)| b == which)
            .map(|(t, _)| t.as_str())
            .collect()
    }

    /// One side is a single taxon.
    pub fn is_trivial(&self) -> bool {
        let count = self.in_a.iter().filter(|&&b| b).count();
        count == 1 || count + 1 == self.in_a.len()
    }
}

impl std::fmt::Display for Split {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{{}}}|{{{}}}", self.a().join(","), self.b().join(","))
    }
}

/// Compatible when one of `A∩A'`, `A∩B'`, `B∩A'`, `B∩B'` is empty.
pub fn splits_compatible(s1: &Split, s2: &Split) -> Result<bool> {
    if s1.taxa != s2.taxa {
        return Err(Error::TaxaMismatch);
    }
    let mut seen = [[false; 2]; 2];
    for (&x, &y) in s1.in_a.iter().zip(&s2.in_a) {
        seen[usize::from(x)][usize::from(y)] = true;
    }
    Ok(seen.iter().flatten().any(|&b| !b))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeSplits {
    /// Sorted; `lengths[i]` belongs to `splits[i]`.
    pub splits: Vec<Split>,
    pub lengths: Vec<f64>,
    /// Every internal vertex of the unrooted tree has degree three.
    pub binary: bool,
}

/// One split per edge of the unrooted tree.
pub fn splits_of_tree(tree: &PhyloTree) -> Result<TreeSplits> {
    tree.validate()?;
    let u = tree.unrooted();
    let taxa = u.leaf_labels();
    let rank: BTreeMap<&str, usize> = taxa.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
    let clades = u.clades();
    let mut pairs: Vec<(Split, f64)> = Vec::new();
    for (child, _, length) in u.edges() {
        let mut mask = vec![false; taxa.len()];
        for &leaf in &clades[child] {
            mask[rank[u.node(leaf).label.as_deref().unwrap_or_default()]] = true;
        }
        if let Ok(split) = Split::from_mask(taxa.clone(), mask) {
            pairs.push((split, length));
        }
    }
    pairs.sort_by(|a, b| a.0.cmp(&b.0));
    let (splits, lengths) = pairs.into_iter().unzip();
    Ok(TreeSplits {
        splits,
        lengths,
        binary: u.is_binary(),
    })
}

/// Same leaf set and same unrooted topology.
pub fn same_topology(a: &PhyloTree, b: &PhyloTree) -> Result<bool> {
    Ok(splits_of_tree(a)?.splits == splits_of_tree(b)?.splits)
}

/// Largest branch-length difference over matching splits, or `None` when
/// the topologies differ.
pub fn max_length_difference(a: &PhyloTree, b: &PhyloTree) -> Result<Option<f64>> {
    let (sa, sb) = (splits_of_tree(a)?, splits_of_tree(b)?);
    if sa.splits != sb.splits {
        return Ok(None);
    }
    Ok(Some(
        sa.lengths
            .iter()
            .zip(&sb.lengths)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max),
    ))
}

/// Number of binary unrooted trees on `n` labeled leaves: `(2n-5)!!`.
pub fn schroder_count(n: usize) -> Result<BigUint> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 taxa, got {n}")));
    }
    Ok((1..=2 * n - 5).step_by(2).map(BigUint::from).product())
}
