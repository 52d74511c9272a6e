//! Neighbor-joining.

use super::{slack, DissimilarityMap};
use crate::error::{Error, Result};
use crate::tree::PhyloTree;

#[derive(Debug, Clone, PartialEq)]
pub struct NjResult {
    pub tree: PhyloTree,
    /// Number of negative branch lengths that were set to zero.
    pub clamped: usize,
    /// Joined pairs in order, each cluster named by its smallest taxon.
    pub joins: Vec<(String, String)>,
}

/// `Q(i,j) = (n-2) d(i,j) - r_i - r_j` with `r_i` the row sum; the diagonal
/// is left at zero.
pub fn nj_q_table(delta: &DissimilarityMap) -> Vec<Vec<f64>> {
    let n = delta.len();
    let r: Vec<f64> = delta.rows().iter().map(|row| row.iter().sum()).collect();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        0.0
                    } else {
                        (n as f64 - 2.0) * delta.get(i, j) - r[i] - r[j]
                    }
                })
                .collect()
        })
        .collect()
}

/// Index pair minimizing `q` over `i < j`; near-ties go to the pair whose
/// sorted keys are lexicographically smaller.
pub(crate) fn argmin_pair(n: usize, q: &dyn Fn(usize, usize) -> f64, key: &dyn Fn(usize) -> String) -> (usize, usize) {
    let pair_key = |i: usize, j: usize| {
        let (a, b) = (key(i), key(j));
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    };
    let mut best = (0, 1);
    let mut best_q = q(0, 1);
    let mut best_key = pair_key(0, 1);
    for i in 0..n {
        for j in i + 1..n {
            if (i, j) == (0, 1) {
                continue;
            }
            let value = q(i, j);
            let tol = slack(best_q);
            let k = pair_key(i, j);
            if value < best_q - tol || (value <= best_q + tol && k < best_key) {
                best = (i, j);
                best_q = value;
                best_key = k;
            }
        }
    }
    best
}

fn clamp(length: f64, clamped: &mut usize) -> f64 {
    if length < 0.0 {
        *clamped += 1;
        0.0
    } else {
        length
    }
}

/// Vertices of the tree being built: taxa first, then joined nodes.
pub(crate) struct Builder {
    pub adj: Vec<Vec<(usize, f64)>>,
    pub labels: Vec<Option<String>>,
}

impl Builder {
    pub fn new(taxa: &[String]) -> Self {
        Self {
            adj: vec![Vec::new(); taxa.len()],
            labels: taxa.iter().map(|t| Some(t.clone())).collect(),
        }
    }

    pub fn node(&mut self) -> usize {
        self.adj.push(Vec::new());
        self.labels.push(None);
        self.adj.len() - 1
    }

    pub fn edge(&mut self, a: usize, b: usize, length: f64) {
        self.adj[a].push((b, length));
        self.adj[b].push((a, length));
    }

    pub fn finish(self, root: usize) -> PhyloTree {
        PhyloTree::from_adjacency(&self.adj, &self.labels, root)
    }
}

/// Finish a three-cluster reduction: the unique claw.
pub(crate) fn join_claw(
    builder: &mut Builder,
    nodes: [usize; 3],
    d: [[f64; 3]; 3],
    offset: [f64; 3],
    clamped: &mut usize,
) -> usize {
    let center = builder.node();
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let length = clamp(0.5 * (d[i][j] + d[i][k] - d[j][k]) - offset[i], clamped);
        builder.edge(center, nodes[i], length);
    }
    center
}

/// Pairwise-distance agglomeration on the current clusters. `offset[c]` is
/// subtracted from the pendant length assigned to cluster `c`.
pub(crate) fn agglomerate(
    builder: &mut Builder,
    mut nodes: Vec<usize>,
    mut keys: Vec<String>,
    mut d: Vec<Vec<f64>>,
    mut offset: Vec<f64>,
    clamped: &mut usize,
    joins: &mut Vec<(String, String)>,
) -> usize {
    while nodes.len() > 3 {
        let n = nodes.len();
        let r: Vec<f64> = d.iter().map(|row| row.iter().sum()).collect();
        let q = |i: usize, j: usize| (n as f64 - 2.0) * d[i][j] - r[i] - r[j];
        let (x, y) = argmin_pair(n, &q, &|i| keys[i].clone());
        let dxy = d[x][y];
        let lx = 0.5 * dxy + (r[x] - r[y]) / (2.0 * (n as f64 - 2.0));
        let ly = dxy - lx;
        let z = builder.node();
        builder.edge(z, nodes[x], clamp(lx - offset[x], clamped));
        builder.edge(z, nodes[y], clamp(ly - offset[y], clamped));
        joins.push((keys[x].clone(), keys[y].clone()));

        let new_row: Vec<f64> = (0..n).map(|k| 0.5 * (d[x][k] + d[y][k] - dxy)).collect();
        let key = keys[x].clone().min(keys[y].clone());
        // drop y (the larger index) first so x stays valid
        for v in [y, x] {
            nodes.remove(v);
            keys.remove(v);
            offset.remove(v);
            d.remove(v);
            for row in d.iter_mut() {
                row.remove(v);
            }
        }
        let mut row: Vec<f64> = (0..n).filter(|&k| k != x && k != y).map(|k| new_row[k]).collect();
        for (i, r) in d.iter_mut().enumerate() {
            r.push(row[i]);
        }
        row.push(0.0);
        d.push(row);
        nodes.push(z);
        keys.push(key);
        offset.push(0.0);
    }
    let mut m = [[0.0; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row.copy_from_slice(&d[i][..3]);
    }
    let offsets = [offset[0], offset[1], offset[2]];
    let center = join_claw(builder, [nodes[0], nodes[1], nodes[2]], m, offsets, clamped);
    center
}

/// Neighbor-joining with cherry lengths `d(x,y)/2 ± (r_x - r_y)/(2(n-2))`
/// and new distances `(d(x,k) + d(y,k) - d(x,y))/2`.
pub fn neighbor_join(delta: &DissimilarityMap) -> Result<NjResult> {
    let n = delta.len();
    if n < 3 {
        return Err(Error::InvalidParameter(format!("neighbor-joining needs at least 3 taxa, got {n}")));
    }
    let mut builder = Builder::new(delta.taxa());
    let mut clamped = 0;
    let mut joins = Vec::new();
    let center = agglomerate(
        &mut builder,
        (0..n).collect(),
        delta.taxa().to_vec(),
        delta.rows().to_vec(),
        vec![0.0; n],
        &mut clamped,
        &mut joins,
    );
    Ok(NjResult {
        tree: builder.finish(center),
        clamped,
        joins,
    })
}
