use crate::error::{Error, Result};

use super::{at_least, MaxPlus, Semiring};

/// A layered state graph: `initial[i]` weights the first state and
/// `steps[t][i][j]` weights moving from state `i` at position `t` to state
/// `j` at position `t + 1`. Emission weights are folded into these entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec<V> {
    initial: Vec<V>,
    steps: Vec<Vec<Vec<V>>>,
}

impl<V> ChainSpec<V> {
    pub fn new(initial: Vec<V>, steps: Vec<Vec<Vec<V>>>) -> Result<Self> {
        let k = initial.len();
        if k == 0 {
            return Err(Error::Empty("chain with no states".into()));
        }
        for step in &steps {
            if step.len() != k {
                return Err(Error::DimensionMismatch {
                    what: "chain step rows".into(),
                    expected: k,
                    found: step.len(),
                });
            }
            if let Some(row) = step.iter().find(|row| row.len() != k) {
                return Err(Error::DimensionMismatch {
                    what: "chain step columns".into(),
                    expected: k,
                    found: row.len(),
                });
            }
        }
        Ok(Self { initial, steps })
    }

    /// Number of positions along the chain.
    pub fn len(&self) -> usize {
        self.steps.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn states(&self) -> usize {
        self.initial.len()
    }

    pub fn initial(&self) -> &[V] {
        &self.initial
    }

    pub fn steps(&self) -> &[Vec<Vec<V>>] {
        &self.steps
    }
}

/// `⊕` over all state paths of the `⊗` of the path's weights, in
/// `O(len · states²)`.
pub fn evaluate_chain<S: Semiring>(semiring: &S, spec: &ChainSpec<S::Value>) -> S::Value {
    let k = spec.states();
    let mut acc = spec.initial.clone();
    for step in &spec.steps {
        acc = (0..k)
            .map(|j| {
                (0..k).fold(semiring.zero(), |sum, i| {
                    semiring.add(&sum, &semiring.mul(&acc[i], &step[i][j]))
                })
            })
            .collect();
    }
    semiring.sum(&acc)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TropicalPath {
    pub score: f64,
    pub path: Vec<usize>,
}

/// Max-plus evaluation with the arg-max path.
///
/// Among optimal paths the lexicographically smallest sequence of state
/// indices is returned. Returns `None` when every path scores `-∞`.
pub fn best_path(spec: &ChainSpec<f64>) -> Option<TropicalPath> {
    let s = MaxPlus;
    let k = spec.states();
    let n = spec.len();

    // completion[t][i]: best score of positions t+1.. given state i at t
    let mut completion = vec![vec![0.0; k]; n];
    for t in (0..n - 1).rev() {
        let step = &spec.steps[t];
        for i in 0..k {
            completion[t][i] = (0..k).fold(s.zero(), |best, j| {
                s.add(&best, &s.mul(&step[i][j], &completion[t + 1][j]))
            });
        }
    }
    let optimum = (0..k).fold(s.zero(), |best, i| {
        s.add(&best, &s.mul(&spec.initial[i], &completion[0][i]))
    });
    if optimum == f64::NEG_INFINITY {
        return None;
    }

    let pick = |prefix: f64, weights: &dyn Fn(usize) -> f64, rest: &[f64]| {
        (0..k).find(|&j| {
            let candidate = s.mul(&s.mul(&prefix, &weights(j)), &rest[j]);
            candidate > f64::NEG_INFINITY && at_least(candidate, optimum)
        })
    };

    let mut path = Vec::with_capacity(n);
    let first = pick(0.0, &|j| spec.initial[j], &completion[0])?;
    let mut score = spec.initial[first];
    path.push(first);
    for t in 0..n - 1 {
        let prev = path[t];
        let step = &spec.steps[t];
        let next = pick(score, &|j| step[prev][j], &completion[t + 1])?;
        score += step[prev][next];
        path.push(next);
    }
    Some(TropicalPath { score, path })
}
