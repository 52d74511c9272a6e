//! Leaf-labeled phylogenetic trees with non-negative branch lengths.
//!
//! Trees are stored rooted (an arena of nodes with parent links) because
//! Newick is rooted syntax and likelihood recursions need an orientation.
//! Most consumers care only about the unrooted shape: [`PhyloTree::unrooted`]
//! suppresses degree-two vertices and [`PhyloTree::rerooted`] moves the root
//! onto any edge.

use std::collections::{BTreeMap, HashSet};

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub label: Option<String>,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Length of the edge to the parent; 0 for the root.
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhyloTree {
    nodes: Vec<Node>,
    root: usize,
}

impl PhyloTree {
    /// A lone root, to be grown with [`PhyloTree::add_child`].
    pub fn with_root(label: Option<String>) -> Self {
        Self {
            nodes: vec![Node {
                label,
                parent: None,
                children: Vec::new(),
                length: 0.0,
            }],
            root: 0,
        }
    }

    pub fn add_child(&mut self, parent: usize, label: Option<String>, length: f64) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node {
            label,
            parent: Some(parent),
            children: Vec::new(),
            length,
        });
        self.nodes[parent].children.push(id);
        id
    }

    pub fn set_node(&mut self, id: usize, label: Option<String>, length: f64) {
        self.nodes[id].label = label;
        self.nodes[id].length = length;
    }

    /// Leaves labeled, labels unique, lengths finite and non-negative.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for (id, node) in self.nodes.iter().enumerate() {
            if !(node.length >= 0.0) || !node.length.is_finite() {
                return Err(Error::InvalidTree(format!(
                    "branch length {} above node {id} is not a finite non-negative number",
                    node.length
                )));
            }
            if node.children.is_empty() {
                let label = node
                    .label
                    .as_ref()
                    .ok_or_else(|| Error::InvalidTree(format!("leaf {id} has no label")))?;
                if !seen.insert(label.as_str()) {
                    return Err(Error::InvalidTree(format!("duplicate leaf label {label:?}")));
                }
            }
        }
        let root = &self.nodes[self.root];
        if self.nodes.len() > 1 && root.children.is_empty() {
            return Err(Error::InvalidTree("root has no children".into()));
        }
        if root.label.is_some() && root.children.len() == 1 {
            return Err(Error::InvalidTree(format!(
                "leaf {:?} is the root; reroot at an internal vertex or on an edge",
                root.label.as_deref().unwrap_or_default()
            )));
        }
        Ok(())
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_leaf(&self, id: usize) -> bool {
        self.nodes[id].children.is_empty()
    }

    /// Nodes in preorder from the root.
    pub fn preorder(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            order.push(v);
            stack.extend(self.nodes[v].children.iter().rev());
        }
        order
    }

    /// Nodes with children before parents.
    pub fn postorder(&self) -> Vec<usize> {
        let mut order = self.preorder();
        order.reverse();
        order
    }

    /// Leaf ids in preorder.
    pub fn leaves(&self) -> Vec<usize> {
        self.preorder().into_iter().filter(|&v| self.is_leaf(v)).collect()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.children.is_empty()).count()
    }

    /// Leaf labels sorted alphabetically.
    pub fn leaf_labels(&self) -> Vec<String> {
        let mut labels: Vec<String> = self
            .leaves()
            .into_iter()
            .filter_map(|v| self.nodes[v].label.clone())
            .collect();
        labels.sort();
        labels
    }

    pub fn leaf_by_label(&self) -> BTreeMap<String, usize> {
        self.leaves()
            .into_iter()
            .filter_map(|v| self.nodes[v].label.clone().map(|l| (l, v)))
            .collect()
    }

    /// Non-root nodes paired with their parent: one entry per edge.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(id, n)| n.parent.map(|p| (id, p, n.length)))
    }

    pub fn total_length(&self) -> f64 {
        self.edges().map(|e| e.2).sum()
    }

    pub fn degree(&self, id: usize) -> usize {
        self.nodes[id].children.len() + usize::from(self.nodes[id].parent.is_some())
    }

    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for (child, parent, length) in self.edges() {
            adj[child].push((parent, length));
            adj[parent].push((child, length));
        }
        adj
    }

    /// Root an undirected tree at `root`. Children keep adjacency order.
    pub fn from_adjacency(adj: &[Vec<(usize, f64)>], labels: &[Option<String>], root: usize) -> Self {
        let mut tree = PhyloTree::with_root(labels[root].clone());
        let mut stack = vec![(root, usize::MAX, 0usize)];
        while let Some((v, from, id)) = stack.pop() {
            for &(w, length) in adj[v].iter().rev() {
                if w != from {
                    let child = tree.add_child(id, labels[w].clone(), length);
                    stack.push((w, v, child));
                }
            }
        }
        // restore adjacency order (children were pushed reversed)
        for node in &mut tree.nodes {
            node.children.reverse();
        }
        tree
    }

    fn labels(&self) -> Vec<Option<String>> {
        self.nodes.iter().map(|n| n.label.clone()).collect()
    }

    /// Same unrooted tree with the root on the edge above `child`, at
    /// distance `offset` from `child` (clamped to the edge).
    pub fn rerooted(&self, child: usize, offset: f64) -> Result<Self> {
        let parent = self.nodes[child]
            .parent
            .ok_or_else(|| Error::InvalidTree("the root has no edge above it".into()))?;
        let length = self.nodes[child].length;
        let offset = offset.clamp(0.0, length);
        let mut adj = self.adjacency();
        let mut labels = self.labels();
        let new = adj.len();
        adj[child].retain(|&(w, _)| w != parent);
        adj[parent].retain(|&(w, _)| w != child);
        adj[child].push((new, offset));
        adj[parent].push((new, length - offset));
        adj.push(vec![(child, offset), (parent, length - offset)]);
        labels.push(None);
        Ok(Self::from_adjacency(&adj, &labels, new))
    }

    /// Same tree rooted at node `id`.
    pub fn rooted_at_node(&self, id: usize) -> Self {
        Self::from_adjacency(&self.adjacency(), &self.labels(), id)
    }

    /// The unrooted form: every vertex of degree two (including a
    /// degree-two root) is suppressed and its two edges merged. The result
    /// is rooted at an internal vertex of degree at least three. Trees with
    /// fewer than three leaves are returned unchanged.
    pub fn unrooted(&self) -> Self {
        if self.leaf_count() < 3 {
            return self.clone();
        }
        let mut adj = self.adjacency();
        let labels = self.labels();
        let mut alive = vec![true; adj.len()];
        for v in 0..adj.len() {
            if adj[v].len() == 2 {
                let (a, la) = adj[v][0];
                let (b, lb) = adj[v][1];
                for (x, y) in [(a, b), (b, a)] {
                    for e in adj[x].iter_mut() {
                        if e.0 == v {
                            *e = (y, la + lb);
                        }
                    }
                }
                adj[v].clear();
                alive[v] = false;
            }
        }
        let root = (0..adj.len())
            .find(|&v| alive[v] && adj[v].len() >= 3)
            .or_else(|| (0..adj.len()).find(|&v| alive[v]))
            .unwrap_or(self.root);
        Self::from_adjacency(&adj, &labels, root)
    }

    /// All unrooted internal vertices have degree three.
    pub fn is_binary(&self) -> bool {
        let u = self.unrooted();
        let adj = u.adjacency();
        u.leaf_count() <= 2 || adj.iter().all(|a| a.len() == 1 || a.len() == 3)
    }

    /// Path length between every pair of leaves, keyed by leaf id.
    pub fn leaf_distances(&self) -> BTreeMap<(usize, usize), f64> {
        let adj = self.adjacency();
        let leaves = self.leaves();
        let mut out = BTreeMap::new();
        for &a in &leaves {
            let mut dist = vec![f64::NAN; adj.len()];
            dist[a] = 0.0;
            let mut stack = vec![a];
            while let Some(v) = stack.pop() {
                for &(w, l) in &adj[v] {
                    if dist[w].is_nan() {
                        dist[w] = dist[v] + l;
                        stack.push(w);
                    }
                }
            }
            for &b in &leaves {
                out.insert((a, b), dist[b]);
            }
        }
        out
    }

    /// Leaf ids below each node (inclusive), as sorted vectors.
    pub fn clades(&self) -> Vec<Vec<usize>> {
        let mut below: Vec<Vec<usize>> = vec![Vec::new(); self.nodes.len()];
        for v in self.postorder() {
            if self.is_leaf(v) {
                below[v] = vec![v];
            } else {
                let mut acc: Vec<usize> = self.nodes[v].children.iter().flat_map(|&c| below[c].clone()).collect();
                acc.sort_unstable();
                below[v] = acc;
            }
        }
        below
    }
}

/// A uniformly grown random binary unrooted tree (random edge insertion)
/// with branch lengths drawn from `[min_len, max_len)`, rooted at an
/// internal vertex.
pub fn random_binary_tree<R: Rng + ?Sized>(labels: &[String], min_len: f64, max_len: f64, rng: &mut R) -> PhyloTree {
    let n = labels.len();
    assert!(n >= 2, "need at least two taxa");
    let draw = |rng: &mut R| if max_len > min_len { rng.gen_range(min_len..max_len) } else { min_len };
    let mut node_labels: Vec<Option<String>> = labels.iter().map(|l| Some(l.clone())).collect();
    if n == 2 {
        let mut t = PhyloTree::with_root(None);
        t.add_child(0, Some(labels[0].clone()), draw(rng));
        t.add_child(0, Some(labels[1].clone()), draw(rng));
        return t;
    }
    // edges as (u, v); vertex ids: leaves 0..n, internal from n on
    let center = n;
    node_labels.push(None);
    let mut edges: Vec<(usize, usize)> = vec![(0, center), (1, center), (2, center)];
    for leaf in 3..n {
        let pick = rng.gen_range(0..edges.len());
        let (u, v) = edges.swap_remove(pick);
        let mid = node_labels.len();
        node_labels.push(None);
        edges.extend([(u, mid), (mid, v), (leaf, mid)]);
    }
    edges.sort_unstable();
    let mut adj = vec![Vec::new(); node_labels.len()];
    for (u, v) in edges {
        let l = draw(rng);
        adj[u].push((v, l));
        adj[v].push((u, l));
    }
    PhyloTree::from_adjacency(&adj, &node_labels, center)
}
