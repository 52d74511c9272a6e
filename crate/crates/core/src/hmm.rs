//! Homogeneous hidden Markov models.
//!
//! A model has `k` hidden states, a `k×k` transition table `S` and a `k×l`
//! emission table `T`. The coordinate polynomial of an observation sums,
//! over all `kⁿ` hidden paths, the product of its transition and emission
//! parameters; the initial weight vector is either all ones (the bare
//! polynomial, [`InitMode::PaperExact`]) or a probability vector
//! ([`InitMode::Stochastic`]).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::semiring::{best_path, log_weight, ChainSpec};

const ROW_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitMode {
    /// Every first state has weight 1.
    PaperExact,
    /// The first state is drawn from `init`, which sums to 1.
    Stochastic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HmmParams {
    transitions: Vec<Vec<f64>>,
    emissions: Vec<Vec<f64>>,
    init: Vec<f64>,
    mode: InitMode,
    labels: Vec<String>,
}

fn check_stochastic_rows(name: &str, rows: &[Vec<f64>], width: usize) -> Result<()> {
    for (i, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(Error::DimensionMismatch {
                what: format!("{name} row {i}"),
                expected: width,
                found: row.len(),
            });
        }
        if row.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::param(format!("{name} row {i} has a negative or non-finite entry")));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > ROW_TOLERANCE {
            return Err(Error::NotNormalized(format!("{name} row {i} sums to {sum}")));
        }
    }
    Ok(())
}

/// Default state labels: zero-padded indices, so alphabetical order agrees
/// with index order.
fn default_labels(k: usize) -> Vec<String> {
    let width = (k.saturating_sub(1)).to_string().len();
    (0..k).map(|i| format!("{i:0width$}")).collect()
}

impl HmmParams {
    /// Paper-exact mode: all initial weights equal to 1.
    pub fn paper_exact(transitions: Vec<Vec<f64>>, emissions: Vec<Vec<f64>>) -> Result<Self> {
        let k = transitions.len();
        Self::new(transitions, emissions, vec![1.0; k], InitMode::PaperExact)
    }

    /// Stochastic mode with the uniform initial distribution.
    pub fn stochastic_uniform(transitions: Vec<Vec<f64>>, emissions: Vec<Vec<f64>>) -> Result<Self> {
        let k = transitions.len();
        Self::new(transitions, emissions, vec![1.0 / k as f64; k], InitMode::Stochastic)
    }

    pub fn new(
        transitions: Vec<Vec<f64>>,
        emissions: Vec<Vec<f64>>,
        init: Vec<f64>,
        mode: InitMode,
    ) -> Result<Self> {
        let k = transitions.len();
        if k == 0 {
            return Err(Error::Empty("HMM with no hidden states".into()));
        }
        if emissions.len() != k {
            return Err(Error::DimensionMismatch {
                what: "emission rows".into(),
                expected: k,
                found: emissions.len(),
            });
        }
        let l = emissions[0].len();
        if l == 0 {
            return Err(Error::Empty("HMM with an empty output alphabet".into()));
        }
        check_stochastic_rows("transition", &transitions, k)?;
        check_stochastic_rows("emission", &emissions, l)?;
        if init.len() != k {
            return Err(Error::DimensionMismatch {
                what: "initial weights".into(),
                expected: k,
                found: init.len(),
            });
        }
        if init.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::param("initial weights must be finite and non-negative"));
        }
        match mode {
            InitMode::PaperExact if init.iter().any(|&x| x != 1.0) => {
                return Err(Error::param("paper-exact mode requires all initial weights equal to 1"));
            }
            InitMode::Stochastic => {
                let sum: f64 = init.iter().sum();
                if (sum - 1.0).abs() > ROW_TOLERANCE {
                    return Err(Error::NotNormalized(format!("initial distribution sums to {sum}")));
                }
            }
            _ => {}
        }
        Ok(Self {
            transitions,
            emissions,
            init,
            mode,
            labels: default_labels(k),
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.states() {
            return Err(Error::DimensionMismatch {
                what: "state labels".into(),
                expected: self.states(),
                found: labels.len(),
            });
        }
        let mut sorted = labels.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != labels.len() {
            return Err(Error::param("state labels must be distinct"));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn states(&self) -> usize {
        self.transitions.len()
    }

    pub fn symbols(&self) -> usize {
        self.emissions[0].len()
    }

    pub fn transitions(&self) -> &[Vec<f64>] {
        &self.transitions
    }

    pub fn emissions(&self) -> &[Vec<f64>] {
        &self.emissions
    }

    pub fn init(&self) -> &[f64] {
        &self.init
    }

    pub fn mode(&self) -> InitMode {
        self.mode
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    fn check_observation(&self, sigma: &[usize]) -> Result<()> {
        if sigma.is_empty() {
            return Err(Error::Empty("observation sequence".into()));
        }
        let l = self.symbols();
        match sigma.iter().position(|&s| s >= l) {
            Some(position) => Err(Error::SymbolOutOfRange {
                symbol: sigma[position],
                position,
                alphabet: l,
            }),
            None => Ok(()),
        }
    }

    /// The chain whose path weights are the monomials of the coordinate
    /// polynomial of `sigma`, with states in index order.
    pub fn chain(&self, sigma: &[usize]) -> Result<ChainSpec<f64>> {
        self.check_observation(sigma)?;
        let order: Vec<usize> = (0..self.states()).collect();
        Ok(self.chain_in_order(sigma, &order, |x| x))
    }

    fn chain_in_order(&self, sigma: &[usize], order: &[usize], f: impl Fn(f64) -> f64) -> ChainSpec<f64> {
        let initial = order
            .iter()
            .map(|&i| f(self.init[i] * self.emissions[i][sigma[0]]))
            .collect();
        let steps = sigma[1..]
            .iter()
            .map(|&o| {
                order
                    .iter()
                    .map(|&i| order.iter().map(|&j| f(self.transitions[i][j] * self.emissions[j][o])).collect())
                    .collect()
            })
            .collect();
        ChainSpec::new(initial, steps).expect("dimensions follow from validated parameters")
    }
}

struct ScaledForward {
    /// Normalized forward vectors, one per position.
    alpha: Vec<Vec<f64>>,
    /// Per-position normalizers; their logs sum to the log-likelihood.
    scale: Vec<f64>,
}

fn scaled_forward(h: &HmmParams, sigma: &[usize]) -> Option<ScaledForward> {
    let k = h.states();
    let mut alpha: Vec<Vec<f64>> = Vec::with_capacity(sigma.len());
    let mut scale = Vec::with_capacity(sigma.len());
    let mut current: Vec<f64> = (0..k).map(|i| h.init[i] * h.emissions[i][sigma[0]]).collect();
    for t in 0..sigma.len() {
        if t > 0 {
            let prev = &alpha[t - 1];
            current = (0..k)
                .map(|j| {
                    let into: f64 = (0..k).map(|i| prev[i] * h.transitions[i][j]).sum();
                    into * h.emissions[j][sigma[t]]
                })
                .collect();
        }
        let c: f64 = current.iter().sum();
        if c == 0.0 {
            return None;
        }
        current.iter_mut().for_each(|x| *x /= c);
        scale.push(c);
        alpha.push(current.clone());
    }
    Some(ScaledForward { alpha, scale })
}

/// Natural log of the coordinate polynomial at `sigma`; `-∞` when every
/// path has weight zero.
pub fn forward_log_probability(h: &HmmParams, sigma: &[usize]) -> Result<f64> {
    h.check_observation(sigma)?;
    Ok(match scaled_forward(h, sigma) {
        Some(fw) => fw.scale.iter().map(|c| c.ln()).sum(),
        None => f64::NEG_INFINITY,
    })
}

/// Sum over all hidden paths of the path monomial, in `O(n·k²)`.
pub fn forward_probability(h: &HmmParams, sigma: &[usize]) -> Result<f64> {
    forward_log_probability(h, sigma).map(f64::exp)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Explanation {
    /// Hidden state indices.
    pub path: Vec<usize>,
    /// Labels of `path`.
    pub labels: Vec<String>,
    pub log_score: f64,
}

/// The hidden path whose monomial is largest. Ties go to the path that is
/// lexicographically smallest when states are compared by label.
pub fn viterbi_explanation(h: &HmmParams, sigma: &[usize]) -> Result<Explanation> {
    h.check_observation(sigma)?;
    let mut order: Vec<usize> = (0..h.states()).collect();
    order.sort_by(|&a, &b| h.labels[a].cmp(&h.labels[b]));
    let chain = h.chain_in_order(sigma, &order, log_weight);
    let best = best_path(&chain).ok_or(Error::NoFeasiblePath)?;
    let path: Vec<usize> = best.path.iter().map(|&p| order[p]).collect();
    Ok(Explanation {
        labels: path.iter().map(|&p| h.labels[p].clone()).collect(),
        path,
        log_score: best.score,
    })
}

/// Log of the monomial of one hidden path.
pub fn path_log_score(h: &HmmParams, sigma: &[usize], path: &[usize]) -> Result<f64> {
    h.check_observation(sigma)?;
    if path.len() != sigma.len() {
        return Err(Error::DimensionMismatch {
            what: "hidden path".into(),
            expected: sigma.len(),
            found: path.len(),
        });
    }
    let mut score = log_weight(h.init[path[0]]) + log_weight(h.emissions[path[0]][sigma[0]]);
    for t in 1..sigma.len() {
        score += log_weight(h.transitions[path[t - 1]][path[t]]) + log_weight(h.emissions[path[t]][sigma[t]]);
    }
    Ok(score)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub params: HmmParams,
    /// `log_likelihoods[i]` is the data log-likelihood after `i` updates;
    /// the last entry belongs to `params`.
    pub log_likelihoods: Vec<f64>,
    pub converged: bool,
}

impl TrainReport {
    pub fn iterations(&self) -> usize {
        self.log_likelihoods.len() - 1
    }
}

/// Expected counts under `h`, then the re-estimated parameters.
fn em_step(h: &HmmParams, data: &[Vec<usize>]) -> Result<(f64, HmmParams)> {
    let (k, l) = (h.states(), h.symbols());
    let mut init_acc = vec![0.0; k];
    let mut trans_acc = vec![vec![0.0; k]; k];
    let mut emit_acc = vec![vec![0.0; l]; k];
    let mut log_likelihood = 0.0;

    for sigma in data {
        let fw = scaled_forward(h, sigma).ok_or(Error::NoFeasiblePath)?;
        log_likelihood += fw.scale.iter().map(|c| c.ln()).sum::<f64>();
        let n = sigma.len();

        let mut beta = vec![vec![1.0; k]; n];
        for t in (0..n - 1).rev() {
            for i in 0..k {
                beta[t][i] = (0..k)
                    .map(|j| h.transitions[i][j] * h.emissions[j][sigma[t + 1]] * beta[t + 1][j])
                    .sum::<f64>()
                    / fw.scale[t + 1];
            }
        }
        for t in 0..n {
            for i in 0..k {
                let gamma = fw.alpha[t][i] * beta[t][i];
                emit_acc[i][sigma[t]] += gamma;
                if t == 0 {
                    init_acc[i] += gamma;
                }
            }
            if t + 1 < n {
                for i in 0..k {
                    for j in 0..k {
                        trans_acc[i][j] += fw.alpha[t][i]
                            * h.transitions[i][j]
                            * h.emissions[j][sigma[t + 1]]
                            * beta[t + 1][j]
                            / fw.scale[t + 1];
                    }
                }
            }
        }
    }

    let normalize = |acc: &[f64], old: &[f64]| -> Vec<f64> {
        let total: f64 = acc.iter().sum();
        if total > 0.0 {
            acc.iter().map(|x| x / total).collect()
        } else {
            old.to_vec()
        }
    };
    let transitions = (0..k).map(|i| normalize(&trans_acc[i], &h.transitions[i])).collect();
    let emissions = (0..k).map(|i| normalize(&emit_acc[i], &h.emissions[i])).collect();
    let init = normalize(&init_acc, &h.init);
    let next = HmmParams {
        transitions,
        emissions,
        init,
        mode: InitMode::Stochastic,
        labels: h.labels.clone(),
    };
    Ok((log_likelihood, next))
}

/// Baum-Welch (EM) training in stochastic mode.
///
/// Runs at most `max_iters` updates and stops early once an update improves
/// the log-likelihood by less than `tol`.
pub fn baum_welch_train(h0: &HmmParams, data: &[Vec<usize>], max_iters: usize, tol: f64) -> Result<TrainReport> {
    if h0.mode != InitMode::Stochastic {
        return Err(Error::param("Baum-Welch requires stochastic mode"));
    }
    if data.is_empty() {
        return Err(Error::Empty("training data".into()));
    }
    for sigma in data {
        h0.check_observation(sigma)?;
    }

    let mut params = h0.clone();
    let (mut ll, mut next) = em_step(&params, data)?;
    let mut log_likelihoods = vec![ll];
    let mut converged = false;
    for _ in 0..max_iters {
        params = next;
        let (ll_new, next_new) = em_step(&params, data)?;
        log_likelihoods.push(ll_new);
        next = next_new;
        if ll_new - ll < tol {
            converged = true;
            break;
        }
        ll = ll_new;
    }
    Ok(TrainReport {
        params,
        log_likelihoods,
        converged,
    })
}

/// Draw an observation of length `n` from a stochastic-mode model.
pub fn sample_observation<R: Rng + ?Sized>(h: &HmmParams, n: usize, rng: &mut R) -> Result<Vec<usize>> {
    if h.mode != InitMode::Stochastic {
        return Err(Error::param("sampling requires stochastic mode"));
    }
    let draw = |weights: &[f64], rng: &mut R| -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (i, w) in weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return i;
            }
        }
        weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
    };
    let mut out = Vec::with_capacity(n);
    let mut state = draw(&h.init, rng);
    for t in 0..n {
        if t > 0 {
            state = draw(&h.transitions[state], rng);
        }
        out.push(draw(&h.emissions[state], rng));
    }
    Ok(out)
}
