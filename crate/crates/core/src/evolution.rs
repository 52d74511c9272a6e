//! Continuous-time nucleotide substitution: rate matrices, the Jukes-Cantor
//! model on trees, the three-leaf claw invariant, distance correction and
//! sequence simulation.

use std::collections::BTreeMap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dna::Nucleotide;
use crate::error::{Error, Result};

fn param(msg: impl Into<String>) -> Error {
    Error::param(msg)
}
use crate::tree::PhyloTree;

pub type Mat4 = [[f64; 4]; 4];

pub const IDENTITY: Mat4 = [
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
];

pub fn mat_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// Gaussian elimination with partial pivoting. Near-saturated substitution
/// matrices have determinants far below the entry size, where cofactor
/// expansion loses every digit.
pub fn determinant(m: &Mat4) -> f64 {
    let mut a = *m;
    let mut det = 1.0;
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap_or(col);
        if a[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..4 {
            let f = a[r][col] / a[col][col];
            for c in col..4 {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    det
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateMatrix {
    q: Mat4,
}

impl RateMatrix {
    pub fn new(q: Mat4) -> Result<Self> {
        for (i, row) in q.iter().enumerate() {
            if row.iter().any(|x| !x.is_finite()) {
                return Err(param(format!("rate matrix row {i} has a non-finite entry")));
            }
            if (0..4).any(|j| j != i && row[j] < 0.0) {
                return Err(param(format!("rate matrix row {i} has a negative off-diagonal entry")));
            }
            let sum: f64 = row.iter().sum();
            if sum.abs() > 1e-12 {
                return Err(param(format!("rate matrix row {i} sums to {sum}, not 0")));
            }
            if row[i] >= 0.0 {
                return Err(param(format!("rate matrix row {i} is zero")));
            }
        }
        Ok(Self { q })
    }

    /// Jukes-Cantor rates: `alpha` off the diagonal, `-3 alpha` on it.
    pub fn jukes_cantor(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(param(format!("Jukes-Cantor rate must be positive, got {alpha}")));
        }
        let mut q = [[alpha; 4]; 4];
        for (i, row) in q.iter_mut().enumerate() {
            row[i] = -3.0 * alpha;
        }
        Self::new(q)
    }

    pub fn q(&self) -> &Mat4 {
        &self.q
    }

    /// `exp(Q t)` by scaling and squaring a truncated Taylor series.
    pub fn exp(&self, t: f64) -> Mat4 {
        let mut a = self.q;
        let norm = a
            .iter()
            .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
            * t.abs();
        let mut squarings = 0;
        let mut scale = t;
        let mut scaled_norm = norm;
        while scaled_norm > 0.5 {
            scale /= 2.0;
            scaled_norm /= 2.0;
            squarings += 1;
        }
        for row in a.iter_mut() {
            for x in row.iter_mut() {
                *x *= scale;
            }
        }
        let mut result = IDENTITY;
        let mut term = IDENTITY;
        for k in 1..40 {
            term = mat_mul(&term, &a);
            for row in term.iter_mut() {
                for x in row.iter_mut() {
                    *x /= k as f64;
                }
            }
            let mut biggest: f64 = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    result[i][j] += term[i][j];
                    biggest = biggest.max(term[i][j].abs());
                }
            }
            if biggest < 1e-13 * 1e-4 {
                break;
            }
        }
        for _ in 0..squarings {
            result = mat_mul(&result, &result);
        }
        result
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubstitutionMatrix {
    p: Mat4,
}

impl SubstitutionMatrix {
    pub fn new(p: Mat4) -> Result<Self> {
        for (i, row) in p.iter().enumerate() {
            if row.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
                return Err(param(format!("substitution matrix row {i} has an entry outside [0, inf)")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::NotNormalized(format!("substitution matrix row {i} sums to {sum}")));
            }
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> &Mat4 {
        &self.p
    }

    pub fn determinant(&self) -> f64 {
        determinant(&self.p)
    }
}

/// Closed-form Jukes-Cantor matrix `exp(Q t)` with rate `alpha`.
pub fn substitution_matrix(alpha: f64, t: f64) -> Result<SubstitutionMatrix> {
    if !(alpha >= 0.0) || !(t >= 0.0) || !(alpha * t).is_finite() {
        return Err(param(format!("rate and time must be non-negative, got alpha={alpha}, t={t}")));
    }
    let e = (-4.0 * alpha * t).exp();
    Ok(JcEdge::from_pi(0.25 * (1.0 - e)).matrix())
}

/// `-log(det P) / 4`: the expected number of substitutions per site.
pub fn branch_length_of(p: &SubstitutionMatrix) -> Result<f64> {
    let det = p.determinant();
    if !(det > 0.0) {
        return Err(param(format!(
            "substitution matrix has determinant {det}; branch length is undefined"
        )));
    }
    Ok((-0.25 * det.ln()).max(0.0))
}

/// Jukes-Cantor edge in `(theta, pi)` coordinates: `theta` is the chance of
/// keeping a letter, `pi` of turning into each particular other letter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JcEdge {
    pub theta: f64,
    pub pi: f64,
}

impl JcEdge {
    fn from_pi(pi: f64) -> Self {
        Self {
            theta: 1.0 - 3.0 * pi,
            pi,
        }
    }

    pub fn matrix(&self) -> SubstitutionMatrix {
        let mut p = [[self.pi; 4]; 4];
        for (i, row) in p.iter_mut().enumerate() {
            row[i] = self.theta;
        }
        SubstitutionMatrix { p }
    }

    pub fn transition(&self, from: usize, to: usize) -> f64 {
        if from == to {
            self.theta
        } else {
            self.pi
        }
    }
}

pub fn edge_params_from_length(b: f64) -> Result<JcEdge> {
    if !(b >= 0.0) {
        return Err(param(format!("branch length must be non-negative, got {b}")));
    }
    Ok(JcEdge::from_pi(-0.25 * (-4.0 * b / 3.0).exp_m1()))
}

/// Per-node partial likelihoods for a leaf pattern; `letter(leaf)` gives the
/// observed state at each leaf.
fn partials(tree: &PhyloTree, letter: &dyn Fn(usize) -> Result<Nucleotide>) -> Result<[f64; 4]> {
    let mut like = vec![[0.0f64; 4]; tree.len()];
    for v in tree.postorder() {
        let node = tree.node(v);
        if node.children.is_empty() {
            like[v][letter(v)?.index()] = 1.0;
            continue;
        }
        let mut acc = [1.0f64; 4];
        for &c in &node.children {
            let edge = edge_params_from_length(tree.node(c).length)?;
            let total: f64 = like[c].iter().sum();
            for (s, slot) in acc.iter_mut().enumerate() {
                *slot *= edge.pi * total + (edge.theta - edge.pi) * like[c][s];
            }
        }
        like[v] = acc;
    }
    Ok(like[tree.root()])
}

/// Probability of a leaf pattern under Jukes-Cantor with a uniform root.
pub fn pattern_probability(tree: &PhyloTree, pattern: &BTreeMap<String, Nucleotide>) -> Result<f64> {
    tree.validate()?;
    let root = partials(tree, &|leaf| {
        let label = tree.node(leaf).label.as_deref().unwrap_or_default();
        pattern
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownTaxon(format!("no letter given for leaf {label:?}")))
    })?;
    Ok(0.25 * root.iter().sum::<f64>())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllSame {
    /// All leaves show one particular letter.
    pub single: f64,
    /// All leaves agree, whichever letter it is.
    pub any: f64,
}

pub fn all_same_probability(tree: &PhyloTree) -> Result<AllSame> {
    tree.validate()?;
    let root = partials(tree, &|_| Ok(Nucleotide::A))?;
    let single = 0.25 * root.iter().sum::<f64>();
    Ok(AllSame {
        single,
        any: 4.0 * single,
    })
}

/// Fourier coordinates of the three-leaf claw and the residual of its
/// defining cubic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClawFourier {
    pub q111: f64,
    pub q110: f64,
    pub q101: f64,
    pub q011: f64,
    pub q000: f64,
    pub residual: f64,
}

/// `p123`: all three leaves agree; `pdis`: all distinct; `pij`: leaves `i`
/// and `j` agree and the third differs.
pub fn claw_fourier_invariant(p123: f64, pdis: f64, p12: f64, p13: f64, p23: f64) -> ClawFourier {
    let third = 1.0 / 3.0;
    let q111 = p123 + third * (pdis - p12 - p13 - p23);
    let q110 = p123 - third * (pdis + p13 + p23) + p12;
    let q101 = p123 - third * (pdis + p12 + p23) + p13;
    let q011 = p123 - third * (pdis + p12 + p13) + p23;
    let q000 = p123 + pdis + p12 + p13 + p23;
    ClawFourier {
        q111,
        q110,
        q101,
        q011,
        q000,
        residual: q000 * q111 * q111 - q011 * q101 * q110,
    }
}

/// Corrected distance `-3/4 log(1 - 4k / 3n)` for `k` differences in `n`
/// aligned sites.
pub fn jc_distance(n: usize, k: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Empty("no aligned sites".into()));
    }
    if k > n {
        return Err(param(format!("{k} differences in only {n} sites")));
    }
    if 4 * k as u128 >= 3 * n as u128 {
        return Err(Error::Saturated {
            pair: String::new(),
            n,
            k,
        });
    }
    Ok(-0.75 * (-4.0 * k as f64 / (3.0 * n as f64)).ln_1p())
}

fn uniform_draw(rng: &mut ChaCha8Rng, word: u128) -> f64 {
    rng.set_word_pos(word);
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Simulate `length` sites down the tree: uniform root letters, each edge a
/// Jukes-Cantor step. The draw for site `s` on the edge above node `v`
/// comes from its own position of a stream keyed by `(seed, v)`, so the
/// output does not depend on traversal order.
pub fn simulate_leaf_sequences(tree: &PhyloTree, length: usize, seed: u64) -> Result<BTreeMap<String, String>> {
    tree.validate()?;
    if length == 0 {
        return Err(Error::Empty("simulation length must be at least 1".into()));
    }
    let mut base = ChaCha8Rng::seed_from_u64(seed);
    let mut states: Vec<Vec<u8>> = vec![Vec::new(); tree.len()];
    for v in tree.preorder() {
        base.set_stream(v as u64);
        let mut rng = base.clone();
        let node = tree.node(v);
        states[v] = match node.parent {
            None => (0..length)
                .map(|s| (uniform_draw(&mut rng, 2 * s as u128) * 4.0) as u8 & 3)
                .collect(),
            Some(parent) => {
                let edge = edge_params_from_length(node.length)?;
                (0..length)
                    .map(|s| {
                        let from = states[parent][s];
                        let u = uniform_draw(&mut rng, 2 * s as u128);
                        if u < edge.theta {
                            from
                        } else {
                            // one of the three other letters, equally likely
                            let k = (((u - edge.theta) / (3.0 * edge.pi) * 3.0) as u8).min(2);
                            (from + 1 + k) & 3
                        }
                    })
                    .collect()
            }
        };
    }
    let mut out = BTreeMap::new();
    for v in tree.leaves() {
        let seq = states[v]
            .iter()
            .map(|&s| Nucleotide::ALL[s as usize].as_char())
            .collect();
        out.insert(tree.node(v).label.clone().unwrap_or_default(), seq);
    }
    Ok(out)
}
