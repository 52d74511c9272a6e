//! Pair hidden Markov model for aligning two DNA sequences.
//!
//! An alignment of `σ¹` (length `n`) and `σ²` (length `m`) is a word over
//! `{M, I, D}` with `#M + #D = n` and `#M + #I = m`: `M` consumes one letter
//! of each sequence, `I` one letter of `σ²` and `D` one letter of `σ¹`. The
//! model probability of the pair is the sum over all alignments of
//!
//! ```text
//! t_{a₁}(…) · Π_{i ≥ 2} s_{a_{i-1} a_i} · t_{a_i}(…)
//! ```
//!
//! with no initial transition and no stop state. The number of alignments
//! is the Delannoy number `D(n, m)`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::dna::{parse_dna, Nucleotide};
use crate::error::{Error, Result};
use crate::semiring::{
    at_least, log_weight, MaxPlus, Point, Probability, Semiring, WitnessPolygon, WitnessPolygonSemiring,
};

/// Default ceiling on [`enumerate_alignments`].
pub const ENUMERATION_CAP: usize = 1_000_000;

/// Alignment letters, ordered `D < I < M` for tie-breaking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AlignOp {
    D,
    I,
    M,
}

impl AlignOp {
    /// In `D < I < M` order.
    pub const ALL: [AlignOp; 3] = [AlignOp::D, AlignOp::I, AlignOp::M];

    /// Row/column of the transition table, which is laid out `M, I, D`.
    pub fn state_index(self) -> usize {
        match self {
            AlignOp::M => 0,
            AlignOp::I => 1,
            AlignOp::D => 2,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            AlignOp::M => 'M',
            AlignOp::I => 'I',
            AlignOp::D => 'D',
        }
    }

    /// Letters consumed from `(σ¹, σ²)`.
    fn advance(self) -> (usize, usize) {
        match self {
            AlignOp::M => (1, 1),
            AlignOp::I => (0, 1),
            AlignOp::D => (1, 0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Alignment(Vec<AlignOp>);

impl Alignment {
    pub fn new(ops: Vec<AlignOp>) -> Self {
        Self(ops)
    }

    pub fn ops(&self) -> &[AlignOp] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count(&self, op: AlignOp) -> usize {
        self.0.iter().filter(|&&o| o == op).count()
    }

    /// `#M + #D = n` and `#M + #I = m`.
    pub fn is_valid_for(&self, n: usize, m: usize) -> bool {
        let (mm, ii, dd) = (self.count(AlignOp::M), self.count(AlignOp::I), self.count(AlignOp::D));
        mm + dd == n && mm + ii == m
    }

    /// `(#mismatch, #I + #D)` for the given sequences.
    pub fn mismatch_indel(&self, s1: &[Nucleotide], s2: &[Nucleotide]) -> Point {
        let (mut i, mut j) = (0, 0);
        let (mut mis, mut indel) = (0, 0);
        for &op in &self.0 {
            if op == AlignOp::M && s1[i] != s2[j] {
                mis += 1;
            }
            if op != AlignOp::M {
                indel += 1;
            }
            let (di, dj) = op.advance();
            i += di;
            j += dj;
        }
        (mis, indel)
    }
}

impl fmt::Display for Alignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|op| write!(f, "{}", op.as_char()))
    }
}

impl FromStr for Alignment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .enumerate()
            .map(|(position, ch)| match ch {
                'M' => Ok(AlignOp::M),
                'I' => Ok(AlignOp::I),
                'D' => Ok(AlignOp::D),
                _ => Err(Error::InvalidCharacter { ch, position }),
            })
            .collect::<Result<Vec<_>>>()
            .map(Alignment)
    }
}

impl Serialize for Alignment {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Number of alignments of lengths `n` and `m`.
pub fn delannoy_count(n: usize, m: usize) -> BigUint {
    let mut prev: Vec<BigUint> = vec![BigUint::from(1u32); m + 1];
    for _ in 1..=n {
        let mut row = Vec::with_capacity(m + 1);
        row.push(BigUint::from(1u32));
        for j in 1..=m {
            let v = &prev[j] + &row[j - 1] + &prev[j - 1];
            row.push(v);
        }
        prev = row;
    }
    prev.swap_remove(m)
}

/// All alignments for lengths `(n, m)` in lexicographic order (`D < I < M`).
pub fn enumerate_alignments(n: usize, m: usize) -> Result<Vec<Alignment>> {
    enumerate_alignments_capped(n, m, ENUMERATION_CAP)
}

pub fn enumerate_alignments_capped(n: usize, m: usize, cap: usize) -> Result<Vec<Alignment>> {
    let count = delannoy_count(n, m);
    if count > BigUint::from(cap) {
        return Err(Error::EnumerationCap {
            count: count.to_string(),
            cap,
        });
    }
    fn walk(i: usize, j: usize, n: usize, m: usize, word: &mut Vec<AlignOp>, out: &mut Vec<Alignment>) {
        if i == n && j == m {
            out.push(Alignment(word.clone()));
            return;
        }
        for op in AlignOp::ALL {
            let (di, dj) = op.advance();
            if i + di <= n && j + dj <= m {
                word.push(op);
                walk(i + di, j + dj, n, m, word, out);
                word.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(0, 0, n, m, &mut Vec::with_capacity(n + m), &mut out);
    Ok(out)
}

/// The 9 + 16 + 4 + 4 = 33 pair-HMM parameters.
///
/// Transition rows and columns are ordered `M, I, D`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairHmmParams {
    #[serde(rename = "S")]
    pub transitions: [[f64; 3]; 3],
    #[serde(rename = "tM")]
    pub match_emission: [[f64; 4]; 4],
    #[serde(rename = "tI")]
    pub insert_emission: [f64; 4],
    #[serde(rename = "tD")]
    pub delete_emission: [f64; 4],
}

impl PairHmmParams {
    pub fn uniform(value: f64) -> Self {
        Self {
            transitions: [[value; 3]; 3],
            match_emission: [[value; 4]; 4],
            insert_emission: [value; 4],
            delete_emission: [value; 4],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = self
            .transitions
            .iter()
            .flatten()
            .chain(self.match_emission.iter().flatten())
            .chain(&self.insert_emission)
            .chain(&self.delete_emission);
        for &x in all {
            if !(x >= 0.0) || !x.is_finite() {
                return Err(Error::param("pair-HMM parameters must be finite and non-negative"));
            }
        }
        Ok(())
    }

    /// Transition rows and the three emission tables each sum to one.
    pub fn is_stochastic(&self) -> bool {
        let one = |s: f64| (s - 1.0).abs() <= 1e-9;
        self.transitions.iter().all(|row| one(row.iter().sum()))
            && one(self.match_emission.iter().flatten().sum())
            && one(self.insert_emission.iter().sum())
            && one(self.delete_emission.iter().sum())
    }

    pub fn log_params(&self) -> PairLogParams {
        let map3 = |r: &[f64; 3]| r.map(log_weight);
        let map4 = |r: &[f64; 4]| r.map(log_weight);
        PairLogParams {
            transitions: self.transitions.each_ref().map(map3),
            match_emission: self.match_emission.each_ref().map(map4),
            insert_emission: map4(&self.insert_emission),
            delete_emission: map4(&self.delete_emission),
        }
    }

    fn weights(&self) -> PairWeights<f64> {
        PairWeights {
            transitions: self.transitions,
            match_emission: self.match_emission,
            insert_emission: self.insert_emission,
            delete_emission: self.delete_emission,
        }
    }
}

/// Natural-log pair-HMM parameters (`-∞` for zero probabilities).
#[derive(Debug, Clone, PartialEq)]
pub struct PairLogParams {
    pub transitions: [[f64; 3]; 3],
    pub match_emission: [[f64; 4]; 4],
    pub insert_emission: [f64; 4],
    pub delete_emission: [f64; 4],
}

impl PairLogParams {
    /// The scoring-scheme specialization: all transitions 0, every indel
    /// `-gap`, a match `+1` and a mismatch `-mis`.
    pub fn from_scoring(scheme: &ScoringScheme) -> Self {
        let mut match_emission = [[-scheme.mis; 4]; 4];
        for (a, row) in match_emission.iter_mut().enumerate() {
            row[a] = 1.0;
        }
        Self {
            transitions: [[0.0; 3]; 3],
            match_emission,
            insert_emission: [-scheme.gap; 4],
            delete_emission: [-scheme.gap; 4],
        }
    }

    fn emission(&self, op: AlignOp, a: Option<Nucleotide>, b: Option<Nucleotide>) -> f64 {
        match op {
            AlignOp::M => self.match_emission[a.unwrap().index()][b.unwrap().index()],
            AlignOp::I => self.insert_emission[b.unwrap().index()],
            AlignOp::D => self.delete_emission[a.unwrap().index()],
        }
    }
}

/// Semiring weights for the generic alignment recursion.
#[derive(Debug, Clone)]
pub struct PairWeights<V> {
    pub transitions: [[V; 3]; 3],
    pub match_emission: [[V; 4]; 4],
    pub insert_emission: [V; 4],
    pub delete_emission: [V; 4],
}

/// Evaluate the alignment polynomial of `(s1, s2)` in any semiring.
///
/// Three layers (last letter `M`, `I` or `D`) over the `(n+1)×(m+1)` grid;
/// each path through the layers is one alignment and contributes the
/// ordered product of its weights.
pub fn pair_dp<S: Semiring>(semiring: &S, w: &PairWeights<S::Value>, s1: &[Nucleotide], s2: &[Nucleotide]) -> S::Value {
    let (n, m) = (s1.len(), s2.len());
    let width = m + 1;
    let mut layers: Vec<Vec<S::Value>> = vec![vec![semiring.zero(); (n + 1) * width]; 3];

    let entering = |layers: &Vec<Vec<S::Value>>, cell: usize, is_start: bool, to: AlignOp| -> S::Value {
        let mut acc = if is_start { semiring.one() } else { semiring.zero() };
        for from in AlignOp::ALL {
            let prev = &layers[from.state_index()][cell];
            let step = semiring.mul(prev, &w.transitions[from.state_index()][to.state_index()]);
            acc = semiring.add(&acc, &step);
        }
        acc
    };

    for i in 0..=n {
        for j in 0..=m {
            let cell = i * width + j;
            if i > 0 && j > 0 {
                let pred = (i - 1) * width + j - 1;
                let into = entering(&layers, pred, pred == 0, AlignOp::M);
                let emit = &w.match_emission[s1[i - 1].index()][s2[j - 1].index()];
                layers[AlignOp::M.state_index()][cell] = semiring.mul(&into, emit);
            }
            if j > 0 {
                let pred = i * width + j - 1;
                let into = entering(&layers, pred, pred == 0, AlignOp::I);
                layers[AlignOp::I.state_index()][cell] = semiring.mul(&into, &w.insert_emission[s2[j - 1].index()]);
            }
            if i > 0 {
                let pred = (i - 1) * width + j;
                let into = entering(&layers, pred, pred == 0, AlignOp::D);
                layers[AlignOp::D.state_index()][cell] = semiring.mul(&into, &w.delete_emission[s1[i - 1].index()]);
            }
        }
    }
    let last = n * width + m;
    semiring.sum(layers.iter().map(|layer| &layer[last]))
}

fn parse_pair(s1: &str, s2: &str) -> Result<(Vec<Nucleotide>, Vec<Nucleotide>)> {
    if s1.is_empty() || s2.is_empty() {
        return Err(Error::Empty("both sequences must be nonempty".into()));
    }
    Ok((parse_dna(s1)?, parse_dna(s2)?))
}

/// Model probability of the sequence pair, in `O(nm)`.
pub fn pair_probability(p: &PairHmmParams, s1: &str, s2: &str) -> Result<f64> {
    p.validate()?;
    let (a, b) = parse_pair(s1, s2)?;
    Ok(pair_dp(&Probability, &p.weights(), &a, &b))
}

/// Best log-score over all alignments without reconstructing one.
pub fn pair_max_log_score(logp: &PairLogParams, s1: &str, s2: &str) -> Result<f64> {
    let (a, b) = parse_pair(s1, s2)?;
    let w = PairWeights {
        transitions: logp.transitions,
        match_emission: logp.match_emission,
        insert_emission: logp.insert_emission,
        delete_emission: logp.delete_emission,
    };
    Ok(pair_dp(&MaxPlus, &w, &a, &b))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredAlignment {
    pub alignment: Alignment,
    pub score: f64,
}

/// Log of the monomial of one alignment.
pub fn alignment_log_score(logp: &PairLogParams, alignment: &Alignment, s1: &str, s2: &str) -> Result<f64> {
    let (a, b) = parse_pair(s1, s2)?;
    if !alignment.is_valid_for(a.len(), b.len()) {
        return Err(Error::param(format!(
            "{alignment} is not an alignment of lengths ({}, {})",
            a.len(),
            b.len()
        )));
    }
    let (mut i, mut j) = (0, 0);
    let mut score = 0.0;
    let mut prev: Option<AlignOp> = None;
    for &op in alignment.ops() {
        if let Some(p) = prev {
            score += logp.transitions[p.state_index()][op.state_index()];
        }
        score += logp.emission(op, a.get(i).copied(), b.get(j).copied());
        let (di, dj) = op.advance();
        i += di;
        j += dj;
        prev = Some(op);
    }
    Ok(score)
}

/// Lexicographically smallest optimal word of a max-plus recursion.
///
/// `weight(prev, op, i, j)` scores appending `op` when `(i, j)` letters are
/// consumed and the last letter was `prev` (`None` at the start).
fn lex_smallest_optimum<F>(n: usize, m: usize, states: usize, state_of: impl Fn(Option<AlignOp>) -> usize, weight: F) -> Option<ScoredAlignment>
where
    F: Fn(Option<AlignOp>, AlignOp, usize, usize) -> f64,
{
    let width = m + 1;
    let ninf = f64::NEG_INFINITY;
    let prev_ops = [None, Some(AlignOp::M), Some(AlignOp::I), Some(AlignOp::D)];
    // completion[state][cell]: best score of a suffix from `cell`
    let mut completion = vec![vec![ninf; (n + 1) * width]; states];
    for i in (0..=n).rev() {
        for j in (0..=m).rev() {
            let cell = i * width + j;
            for prev in prev_ops {
                let s = state_of(prev);
                if i == n && j == m {
                    completion[s][cell] = 0.0;
                    continue;
                }
                let mut best = ninf;
                for op in AlignOp::ALL {
                    let (di, dj) = op.advance();
                    if i + di > n || j + dj > m {
                        continue;
                    }
                    let next = completion[state_of(Some(op))][(i + di) * width + j + dj];
                    best = MaxPlus.add(&best, &MaxPlus.mul(&weight(prev, op, i, j), &next));
                }
                completion[s][cell] = best;
            }
        }
    }

    let optimum = completion[state_of(None)][0];
    if optimum == ninf {
        return None;
    }
    let (mut i, mut j) = (0, 0);
    let mut prev = None;
    let mut score = 0.0;
    let mut ops = Vec::with_capacity(n + m);
    while (i, j) != (n, m) {
        let chosen = AlignOp::ALL.into_iter().find_map(|op| {
            let (di, dj) = op.advance();
            if i + di > n || j + dj > m {
                return None;
            }
            let step = weight(prev, op, i, j);
            let candidate = MaxPlus.mul(&(score + step), &completion[state_of(Some(op))][(i + di) * width + j + dj]);
            (candidate > ninf && at_least(candidate, optimum)).then_some((op, step))
        })?;
        let (op, step) = chosen;
        score += step;
        let (di, dj) = op.advance();
        i += di;
        j += dj;
        prev = Some(op);
        ops.push(op);
    }
    Some(ScoredAlignment {
        alignment: Alignment(ops),
        score,
    })
}

/// Optimal alignment for log-parameters, ties broken lexicographically with
/// `D < I < M`.
pub fn viterbi_alignment_log(logp: &PairLogParams, s1: &str, s2: &str) -> Result<ScoredAlignment> {
    let (a, b) = parse_pair(s1, s2)?;
    let state_of = |op: Option<AlignOp>| op.map_or(3, AlignOp::state_index);
    let weight = |prev: Option<AlignOp>, op: AlignOp, i: usize, j: usize| {
        let trans = prev.map_or(0.0, |p| logp.transitions[p.state_index()][op.state_index()]);
        MaxPlus.mul(&trans, &logp.emission(op, a.get(i).copied(), b.get(j).copied()))
    };
    lex_smallest_optimum(a.len(), b.len(), 4, state_of, weight).ok_or(Error::NoFeasiblePath)
}

/// The explanation of `(s1, s2)`: the alignment whose monomial is largest.
pub fn viterbi_alignment(p: &PairHmmParams, s1: &str, s2: &str) -> Result<ScoredAlignment> {
    p.validate()?;
    viterbi_alignment_log(&p.log_params(), s1, s2)
}

/// Mismatch and indel penalties; a match scores `+1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoringScheme {
    pub mis: f64,
    pub gap: f64,
}

impl ScoringScheme {
    pub fn new(mis: f64, gap: f64) -> Result<Self> {
        if !(mis >= 0.0 && gap >= 0.0) || !mis.is_finite() || !gap.is_finite() {
            return Err(Error::param("mis and gap must be finite and non-negative"));
        }
        Ok(Self { mis, gap })
    }
}

/// Classic global alignment under `(+1, -mis, -gap)`, ties broken with
/// `D < I < M`.
pub fn score_alignment_basic(scheme: &ScoringScheme, s1: &str, s2: &str) -> Result<ScoredAlignment> {
    let scheme = ScoringScheme::new(scheme.mis, scheme.gap)?;
    let (a, b) = parse_pair(s1, s2)?;
    let weight = |_: Option<AlignOp>, op: AlignOp, i: usize, j: usize| match op {
        AlignOp::M if a[i] == b[j] => 1.0,
        AlignOp::M => -scheme.mis,
        _ => -scheme.gap,
    };
    let best = lex_smallest_optimum(a.len(), b.len(), 1, |_| 0, weight).ok_or(Error::NoFeasiblePath)?;
    debug_assert_eq!(
        Some(&best.alignment),
        viterbi_alignment_log(&PairLogParams::from_scoring(&scheme), s1, s2)
            .ok()
            .as_ref()
            .map(|v| &v.alignment)
    );
    Ok(best)
}

/// Parametric alignment polygon over `(#mismatch, #indel)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParametricPolygon {
    pub vertices: Vec<[i64; 2]>,
    /// Lexicographically smallest alignment attaining each vertex.
    pub witnesses: Vec<Alignment>,
}

impl ParametricPolygon {
    /// Vertex maximizing `#match - mis·#mismatch - gap·#indel`, which for
    /// fixed lengths is `(n+m)/2 - (1+mis)·x - (1/2+gap)·y`.
    pub fn optimal_vertex(&self, scheme: &ScoringScheme) -> usize {
        let cost = |v: &[i64; 2]| (1.0 + scheme.mis) * v[0] as f64 + (0.5 + scheme.gap) * v[1] as f64;
        (0..self.vertices.len())
            .min_by(|&a, &b| cost(&self.vertices[a]).total_cmp(&cost(&self.vertices[b])))
            .expect("polygon of a nonempty pair has vertices")
    }
}

/// Runs the alignment recursion in the polygon semiring: each `M` adds
/// `(isMismatch, 0)`, each `I` or `D` adds `(0, 1)`.
///
/// For fixed lengths `#match = (n + m - #indel)/2 - #mismatch`, so every
/// `(x, y)` class has a single match count and the polygon's normal fan
/// partitions the `(mis, gap)` plane by optimal alignment.
pub fn parametric_polygon(s1: &str, s2: &str) -> Result<ParametricPolygon> {
    let (a, b) = parse_pair(s1, s2)?;
    let one = WitnessPolygonSemiring.one();
    let mut match_emission: [[WitnessPolygon; 4]; 4] = Default::default();
    for (x, row) in match_emission.iter_mut().enumerate() {
        for (y, cell) in row.iter_mut().enumerate() {
            *cell = WitnessPolygon::point(((x != y) as i64, 0), "M");
        }
    }
    let weights = PairWeights {
        transitions: std::array::from_fn(|_| std::array::from_fn(|_| one.clone())),
        match_emission,
        insert_emission: std::array::from_fn(|_| WitnessPolygon::point((0, 1), "I")),
        delete_emission: std::array::from_fn(|_| WitnessPolygon::point((0, 1), "D")),
    };
    let poly = pair_dp(&WitnessPolygonSemiring, &weights, &a, &b);
    let witnesses = poly
        .witnesses()
        .iter()
        .map(|w| w.parse())
        .collect::<Result<Vec<Alignment>>>()?;
    Ok(ParametricPolygon {
        vertices: poly.vertices().iter().map(|&(x, y)| [x, y]).collect(),
        witnesses,
    })
}
