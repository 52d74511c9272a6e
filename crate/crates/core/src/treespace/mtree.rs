//! m-dissimilarity maps: values on m-element taxon subsets.

use std::collections::{BTreeMap, HashSet};

use super::nj::{agglomerate, argmin_pair, Builder};
use super::{check_four_point, check_metric, DissimilarityMap, MetricViolation};
use crate::error::{Error, Result};
use crate::tree::PhyloTree;

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// All `m`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if m > n {
        return out;
    }
    let mut c: Vec<usize> = (0..m).collect();
    loop {
        out.push(c.clone());
        let Some(i) = (0..m).rev().find(|&i| c[i] < n - m + i) else {
            return out;
        };
        c[i] += 1;
        for t in i + 1..m {
            c[t] = c[t - 1] + 1;
        }
    }
}

/// A symmetric function on `m`-element subsets of labeled taxa; zero
/// whenever the arguments repeat a taxon.
#[derive(Debug, Clone, PartialEq)]
pub struct MDissimilarityMap {
    taxa: Vec<String>,
    m: usize,
    /// Indexed by the colexicographic rank of the sorted subset.
    values: Vec<f64>,
}

impl MDissimilarityMap {
    pub fn from_fn(taxa: Vec<String>, m: usize, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let n = taxa.len();
        if m < 2 || m > n {
            return Err(Error::InvalidParameter(format!("subset size {m} is outside 2..={n}")));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = taxa.iter().find(|t| !seen.insert(t.as_str())) {
            return Err(Error::InvalidMatrix(format!("taxon {dup:?} appears twice")));
        }
        let mut map = Self {
            values: vec![0.0; binomial(n, m)],
            taxa,
            m,
        };
        for s in subsets(n, m) {
            let v = f(&s);
            if !v.is_finite() {
                return Err(Error::InvalidMatrix(format!("value for {:?} is not finite", map.names(&s))));
            }
            let r = map.rank(&s);
            map.values[r] = v;
        }
        Ok(map)
    }

    /// From `(taxa of the subset, value)` entries; every subset must appear
    /// exactly once.
    pub fn from_entries(taxa: Vec<String>, m: usize, entries: &[(Vec<String>, f64)]) -> Result<Self> {
        let index: BTreeMap<&str, usize> = taxa.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
        let mut given: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (names, value) in entries {
            let mut s = names
                .iter()
                .map(|t| index.get(t.as_str()).copied().ok_or_else(|| Error::UnknownTaxon(t.clone())))
                .collect::<Result<Vec<usize>>>()?;
            s.sort_unstable();
            s.dedup();
            if s.len() != m || names.len() != m {
                return Err(Error::InvalidMatrix(format!("entry {names:?} is not a set of {m} distinct taxa")));
            }
            if given.insert(s, *value).is_some() {
                return Err(Error::InvalidMatrix(format!("entry {names:?} given twice")));
            }
        }
        let expected = binomial(taxa.len(), m);
        if given.len() != expected {
            return Err(Error::DimensionMismatch {
                what: format!("{m}-subset entries"),
                expected,
                found: given.len(),
            });
        }
        Self::from_fn(taxa, m, |s| given[s])
    }

    pub fn from_dissimilarity(d: &DissimilarityMap) -> Result<Self> {
        Self::from_fn(d.taxa().to_vec(), 2, |s| d.get(s[0], s[1]))
    }

    fn rank(&self, sorted: &[usize]) -> usize {
        sorted.iter().enumerate().map(|(t, &c)| binomial(c, t + 1)).sum()
    }

    fn names(&self, s: &[usize]) -> Vec<&str> {
        s.iter().map(|&i| self.taxa[i].as_str()).collect()
    }

    pub fn taxa(&self) -> &[String] {
        &self.taxa
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of taxa.
    pub fn len(&self) -> usize {
        self.taxa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taxa.is_empty()
    }

    /// Value on the given taxa, in any order; zero if any repeat.
    pub fn get(&self, idx: &[usize]) -> f64 {
        let mut s = idx.to_vec();
        s.sort_unstable();
        if s.windows(2).any(|w| w[0] == w[1]) {
            return 0.0;
        }
        self.values[self.rank(&s)]
    }

    /// `(subset, value)` in lexicographic order of subsets.
    pub fn entries(&self) -> Vec<(Vec<usize>, f64)> {
        subsets(self.len(), self.m)
            .into_iter()
            .map(|s| {
                let v = self.values[self.rank(&s)];
                (s, v)
            })
            .collect()
    }

    /// `(i, j) -> value(i, j, Y)` on the taxa outside `y`, together with the
    /// original indices of those taxa.
    pub fn induced(&self, y: &[usize]) -> Result<(DissimilarityMap, Vec<usize>)> {
        if y.len() + 2 != self.m {
            return Err(Error::InvalidParameter(format!(
                "conditioning set must have {} taxa, got {}",
                self.m - 2,
                y.len()
            )));
        }
        let rest: Vec<usize> = (0..self.len()).filter(|i| !y.contains(i)).collect();
        let taxa = rest.iter().map(|&i| self.taxa[i].clone()).collect();
        let map = DissimilarityMap::from_fn(taxa, |a, b| {
            let mut idx = vec![rest[a], rest[b]];
            idx.extend_from_slice(y);
            self.get(&idx)
        })?;
        Ok((map, rest))
    }
}

/// Total branch length of the subtree spanned by each `m`-set of leaves.
pub fn m_dissimilarity(tree: &PhyloTree, m: usize) -> Result<MDissimilarityMap> {
    tree.validate()?;
    let taxa = tree.leaf_labels();
    let n = taxa.len();
    if m < 2 || m > n {
        return Err(Error::InvalidParameter(format!("subset size {m} is outside 2..={n}")));
    }
    let index: BTreeMap<usize, usize> = tree
        .leaf_by_label()
        .into_values()
        .enumerate()
        .map(|(i, leaf)| (leaf, i))
        .collect();
    let clades = tree.clades();
    // below[e][t]: taxon t lies under the edge above node e
    let edges: Vec<(f64, Vec<bool>)> = tree
        .edges()
        .map(|(child, _, length)| {
            let mut below = vec![false; n];
            for leaf in &clades[child] {
                below[index[leaf]] = true;
            }
            (length, below)
        })
        .collect();
    MDissimilarityMap::from_fn(taxa, m, |s| {
        edges
            .iter()
            .filter(|(_, below)| {
                let k = s.iter().filter(|&&t| below[t]).count();
                k > 0 && k < s.len()
            })
            .map(|e| e.0)
            .sum()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GnjCherry {
    /// Indices into the taxa, `pair.0 < pair.1`.
    pub pair: (usize, usize),
    /// Full table; the diagonal is zero.
    pub q: Vec<Vec<f64>>,
}

/// `Q(i,j) = (n-2)/(m-1) Σ δ(i,j,Y) - Σ δ(i,Y) - Σ δ(j,Y)`; the minimizing
/// pair (lexicographic on labels among ties).
pub fn generalized_nj_cherry(delta: &MDissimilarityMap) -> Result<GnjCherry> {
    let (n, m) = (delta.len(), delta.m);
    if n <= m {
        return Err(Error::InvalidParameter(format!("need more than {m} taxa, got {n}")));
    }
    let mut row = vec![0.0; n];
    let mut both = vec![vec![0.0; n]; n];
    for (s, v) in delta.entries() {
        for (a, &i) in s.iter().enumerate() {
            row[i] += v;
            for &j in &s[a + 1..] {
                both[i][j] += v;
                both[j][i] += v;
            }
        }
    }
    let coef = (n as f64 - 2.0) / (m as f64 - 1.0);
    let q: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { 0.0 } else { coef * both[i][j] - row[i] - row[j] })
                .collect()
        })
        .collect();
    let pair = argmin_pair(n, &|i, j| q[i][j], &|i| delta.taxa[i].clone());
    Ok(GnjCherry { pair, q })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedNjResult {
    pub tree: PhyloTree,
    /// Number of negative branch lengths that were set to zero.
    pub clamped: usize,
    /// Joined pairs in order, each cluster named by its smallest taxon.
    pub joins: Vec<(String, String)>,
}

/// Pairwise distances of the tree behind an exact 3-dissimilarity map on
/// `k >= 5` clusters.
fn pairwise_from_triples(delta: &MDissimilarityMap) -> Vec<Vec<f64>> {
    let k = delta.len();
    let kf = k as f64;
    let mut total = 0.0;
    let mut row = vec![0.0; k];
    let mut both = vec![vec![0.0; k]; k];
    for (s, v) in delta.entries() {
        total += v;
        for (a, &i) in s.iter().enumerate() {
            row[i] += v;
            for &j in &s[a + 1..] {
                both[i][j] += v;
                both[j][i] += v;
            }
        }
    }
    let sum_d = 2.0 * total / (kf - 2.0);
    let r: Vec<f64> = row.iter().map(|t| (2.0 * t - sum_d) / (kf - 3.0)).collect();
    (0..k)
        .map(|i| {
            (0..k)
                .map(|j| if i == j { 0.0 } else { (2.0 * both[i][j] - r[i] - r[j]) / (kf - 4.0) })
                .collect()
        })
        .collect()
}

/// Tree from a 3-dissimilarity map by repeated generalized cherry picking.
///
/// Joining `x, y` into `z` sets `δ(z,i,j) = (δ(x,i,j) + δ(y,i,j)) / 2`.
/// Branch lengths come from the pairwise distances implied by the current
/// map. Once four clusters remain, the last pairwise distances finish the
/// tree by ordinary neighbor-joining. With only four taxa to begin with the
/// internal edge cannot be determined and is set to zero.
pub fn generalized_neighbor_join(delta: &MDissimilarityMap) -> Result<GeneralizedNjResult> {
    if delta.m != 3 {
        return Err(Error::InvalidParameter(format!(
            "generalized neighbor-joining supports subset size 3, got {}",
            delta.m
        )));
    }
    let n = delta.len();
    if n < 4 {
        return Err(Error::InvalidParameter(format!("need at least 4 taxa, got {n}")));
    }
    let mut builder = Builder::new(&delta.taxa);
    let mut clamped = 0usize;
    let mut joins = Vec::new();
    let clamp = |x: f64, clamped: &mut usize| {
        if x < 0.0 {
            *clamped += 1;
            0.0
        } else {
            x
        }
    };

    if n == 4 {
        let GnjCherry { pair: (x, y), .. } = generalized_nj_cherry(delta)?;
        let spread: f64 = delta.values.iter().sum::<f64>() / 3.0;
        let pendant = |i: usize| {
            let others: Vec<usize> = (0..4).filter(|&t| t != i).collect();
            spread - delta.get(&others)
        };
        let (u, v) = {
            let rest: Vec<usize> = (0..4).filter(|&t| t != x && t != y).collect();
            (rest[0], rest[1])
        };
        let z = builder.node();
        let w = builder.node();
        for (hub, leaf) in [(z, x), (z, y), (w, u), (w, v)] {
            let l = clamp(pendant(leaf), &mut clamped);
            builder.edge(hub, leaf, l);
        }
        builder.edge(z, w, 0.0);
        joins.push((delta.taxa[x].clone(), delta.taxa[y].clone()));
        return Ok(GeneralizedNjResult {
            tree: builder.finish(z),
            clamped,
            joins,
        });
    }

    let mut current = delta.clone();
    let mut nodes: Vec<usize> = (0..n).collect();
    let mut offset = vec![0.0; n];
    loop {
        let k = current.len();
        let GnjCherry { pair: (x, y), .. } = generalized_nj_cherry(&current)?;
        let d = pairwise_from_triples(&current);
        let r: Vec<f64> = d.iter().map(|row| row.iter().sum()).collect();
        let lx = 0.5 * d[x][y] + (r[x] - r[y]) / (2.0 * (k as f64 - 2.0));
        let ly = d[x][y] - lx;
        let z = builder.node();
        builder.edge(z, nodes[x], clamp(lx - offset[x], &mut clamped));
        builder.edge(z, nodes[y], clamp(ly - offset[y], &mut clamped));
        joins.push((current.taxa[x].clone(), current.taxa[y].clone()));

        let rest: Vec<usize> = (0..k).filter(|&t| t != x && t != y).collect();
        let key = current.taxa[x].clone().min(current.taxa[y].clone());
        let mut keys: Vec<String> = rest.iter().map(|&t| current.taxa[t].clone()).collect();
        keys.push(key);
        let mut next_nodes: Vec<usize> = rest.iter().map(|&t| nodes[t]).collect();
        next_nodes.push(z);

        if k == 5 {
            // four clusters left: finish on the pairwise distances, measured
            // from z itself
            let mut pd: Vec<Vec<f64>> = rest.iter().map(|&a| rest.iter().map(|&b| d[a][b]).collect()).collect();
            let to_z: Vec<f64> = rest.iter().map(|&t| 0.5 * (d[x][t] + d[y][t] - d[x][y])).collect();
            for (row, dz) in pd.iter_mut().zip(&to_z) {
                row.push(*dz);
            }
            let mut last = to_z;
            last.push(0.0);
            pd.push(last);
            let mut offs: Vec<f64> = rest.iter().map(|&t| offset[t]).collect();
            offs.push(0.0);
            let center = agglomerate(&mut builder, next_nodes, keys, pd, offs, &mut clamped, &mut joins);
            return Ok(GeneralizedNjResult {
                tree: builder.finish(center),
                clamped,
                joins,
            });
        }

        let zi = k - 2;
        let next = MDissimilarityMap::from_fn(keys, 3, |s| {
            let map = |i: usize| if i == zi { None } else { Some(rest[i]) };
            match (map(s[0]), map(s[1]), map(s[2])) {
                (Some(a), Some(b), Some(c)) => current.get(&[a, b, c]),
                (Some(a), Some(b), None) => 0.5 * (current.get(&[x, a, b]) + current.get(&[y, a, b])),
                _ => unreachable!("z has the largest index"),
            }
        })?;
        let mut next_offset: Vec<f64> = rest.iter().map(|&t| offset[t]).collect();
        next_offset.push(0.5 * (lx + ly));
        current = next;
        nodes = next_nodes;
        offset = next_offset;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MTreeViolation {
    /// Indices refer to the full taxon list.
    Metric { y: Vec<usize>, violation: MetricViolation },
    FourPoint { y: Vec<usize>, quadruple: [usize; 4] },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MTreeVerdict {
    pub holds: bool,
    /// Fewer than `m + 2` taxa: no quadruple to test.
    pub vacuous: bool,
    pub violation: Option<MTreeViolation>,
}

/// Is every induced map `(i, j) -> δ(i, j, Y)` a tree metric?
pub fn check_m_tree(delta: &MDissimilarityMap) -> Result<MTreeVerdict> {
    let (n, m) = (delta.len(), delta.m);
    if n < m + 2 {
        return Ok(MTreeVerdict {
            holds: true,
            vacuous: true,
            violation: None,
        });
    }
    for y in subsets(n, m - 2) {
        let (induced, rest) = delta.induced(&y)?;
        if let Some(v) = check_metric(&induced).violation {
            let violation = match v {
                MetricViolation::Negative { i, j } => MetricViolation::Negative { i: rest[i], j: rest[j] },
                MetricViolation::Triangle { x, y, z } => MetricViolation::Triangle {
                    x: rest[x],
                    y: rest[y],
                    z: rest[z],
                },
            };
            return Ok(MTreeVerdict {
                holds: false,
                vacuous: false,
                violation: Some(MTreeViolation::Metric { y, violation }),
            });
        }
        if let Some(q) = check_four_point(&induced).quadruple {
            return Ok(MTreeVerdict {
                holds: false,
                vacuous: false,
                violation: Some(MTreeViolation::FourPoint {
                    y,
                    quadruple: q.map(|i| rest[i]),
                }),
            });
        }
    }
    Ok(MTreeVerdict {
        holds: true,
        vacuous: false,
        violation: None,
    })
}

/// The five linear relations cutting tree-derived 3-dissimilarity maps out
/// of the space of 3-trees on six taxa, as left minus right. Taxa are
/// numbered 1..6 in input order.
pub fn gr36_residuals(delta: &MDissimilarityMap) -> Result<[f64; 5]> {
    if delta.m != 3 || delta.len() != 6 {
        return Err(Error::DimensionMismatch {
            what: "taxa in a 3-dissimilarity map on six taxa".into(),
            expected: 6,
            found: if delta.m == 3 { delta.len() } else { 0 },
        });
    }
    const RELATIONS: [([u8; 12], [u8; 12]); 5] = [
        (*b"123145246356", *b"124135236456"),
        (*b"123145346256", *b"134125236456"),
        (*b"123245146356", *b"124235136456"),
        (*b"123345246156", *b"234135126456"),
        (*b"123345146256", *b"134235126456"),
    ];
    let side = |digits: &[u8; 12]| -> f64 {
        digits
            .chunks(3)
            .map(|t| delta.get(&[(t[0] - b'1') as usize, (t[1] - b'1') as usize, (t[2] - b'1') as usize]))
            .sum()
    };
    Ok(RELATIONS.map(|(lhs, rhs)| side(&lhs) - side(&rhs)))
}
