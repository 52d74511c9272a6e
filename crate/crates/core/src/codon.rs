//! Codon independence model.
//!
//! A coding sequence is read as `m` consecutive codons and summarized by the
//! 4×4×4 count table `u[I][J][K]`. The independence model says the first two
//! positions (jointly) are independent of the third, so the probability
//! table is `α[I][J] · β[K]`, equivalently the 16×4 flattening has rank one.

use serde::{Deserialize, Serialize};

use crate::dna::Nucleotide;
use crate::error::{Error, Result};

pub type CodonTable<T> = [[[T; 4]; 4]; 4];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodonCounts {
    counts: CodonTable<u64>,
    total: u64,
}

impl CodonCounts {
    pub fn from_table(counts: CodonTable<u64>) -> Self {
        let total = counts.iter().flatten().flatten().sum();
        Self { counts, total }
    }

    /// Count non-overlapping triplets read left to right.
    pub fn from_sequence(dna: &str) -> Result<Self> {
        let bases: Vec<char> = dna.chars().collect();
        if bases.len() % 3 != 0 {
            return Err(Error::param(format!(
                "sequence length {} is not a multiple of 3",
                bases.len()
            )));
        }
        let mut counts = [[[0u64; 4]; 4]; 4];
        let mut digits = [0usize; 3];
        for (c, codon) in bases.chunks(3).enumerate() {
            for (o, &ch) in codon.iter().enumerate() {
                digits[o] = Nucleotide::from_char(ch)
                    .ok_or(Error::InvalidCharacter {
                        ch,
                        position: 3 * c + o,
                    })?
                    .index();
            }
            counts[digits[0]][digits[1]][digits[2]] += 1;
        }
        Ok(Self::from_table(counts))
    }

    pub fn get(&self, codon: [Nucleotide; 3]) -> u64 {
        self.counts[codon[0].index()][codon[1].index()][codon[2].index()]
    }

    pub fn table(&self) -> &CodonTable<u64> {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn merge(&mut self, other: &CodonCounts) {
        for (i, j, k) in cells() {
            self.counts[i][j][k] += other.counts[i][j][k];
        }
        self.total += other.total;
    }

    fn require_data(&self) -> Result<f64> {
        if self.total == 0 {
            Err(Error::Empty("codon table with m = 0".into()))
        } else {
            Ok(self.total as f64)
        }
    }
}

fn cells() -> impl Iterator<Item = (usize, usize, usize)> {
    (0..4).flat_map(|i| (0..4).flat_map(move |j| (0..4).map(move |k| (i, j, k))))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndependenceParams {
    /// Distribution on the first two codon positions.
    pub alpha: [[f64; 4]; 4],
    /// Distribution on the third position.
    pub beta: [f64; 4],
}

impl IndependenceParams {
    pub fn probability(&self, i: usize, j: usize, k: usize) -> f64 {
        self.alpha[i][j] * self.beta[k]
    }

    pub fn table(&self) -> CodonTable<f64> {
        let mut p = [[[0.0; 4]; 4]; 4];
        for (i, j, k) in cells() {
            p[i][j][k] = self.probability(i, j, k);
        }
        p
    }
}

/// Closed-form maximum likelihood estimate: the two marginals of `u / m`.
pub fn independence_mle(u: &CodonCounts) -> Result<IndependenceParams> {
    let m = u.require_data()?;
    let mut alpha = [[0.0; 4]; 4];
    let mut beta = [0.0; 4];
    for (i, j, k) in cells() {
        let c = u.counts[i][j][k] as f64;
        alpha[i][j] += c;
        beta[k] += c;
    }
    alpha.iter_mut().flatten().for_each(|a| *a /= m);
    beta.iter_mut().for_each(|b| *b /= m);
    Ok(IndependenceParams { alpha, beta })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndependenceTest {
    pub g2: f64,
    pub chi2: f64,
    pub df: u32,
}

/// 63 free cells minus 15 + 3 free parameters.
pub const INDEPENDENCE_DF: u32 = 45;

/// Likelihood-ratio (G²) and Pearson (χ²) statistics against the fitted
/// independence model. Empty cells contribute nothing to G².
pub fn independence_test(u: &CodonCounts) -> Result<IndependenceTest> {
    let m = u.require_data()?;
    let fit = independence_mle(u)?;
    let (mut g2, mut chi2) = (0.0, 0.0);
    for (i, j, k) in cells() {
        let observed = u.counts[i][j][k] as f64;
        let expected = m * fit.probability(i, j, k);
        if observed > 0.0 {
            g2 += observed * (observed / expected).ln();
        }
        if expected > 0.0 {
            chi2 += (observed - expected).powi(2) / expected;
        }
    }
    Ok(IndependenceTest {
        g2: (2.0 * g2).max(0.0),
        chi2,
        df: INDEPENDENCE_DF,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegreDiagnostics {
    /// Largest absolute 2×2 minor of the 16×4 flattening.
    pub max_minor: f64,
    /// Singular values of the flattening, largest first.
    pub singular_values: [f64; 4],
}

impl SegreDiagnostics {
    pub fn sigma2(&self) -> f64 {
        self.singular_values[1]
    }
}

/// Distance of a codon distribution from the rank-one (Segre) model.
pub fn segre_residual(p: &CodonTable<f64>) -> Result<SegreDiagnostics> {
    let mut total = 0.0;
    for (i, j, k) in cells() {
        let v = p[i][j][k];
        if !(v >= 0.0) {
            return Err(Error::NotNormalized(format!(
                "entry ({i},{j},{k}) = {v} is negative or NaN"
            )));
        }
        total += v;
    }
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized(format!(
            "probability table sums to {total}, not 1"
        )));
    }

    let mut flat = [[0.0; 4]; 16];
    for (i, j, k) in cells() {
        flat[4 * i + j][k] = p[i][j][k];
    }

    let mut max_minor: f64 = 0.0;
    for r1 in 0..16 {
        for r2 in r1 + 1..16 {
            for c1 in 0..4 {
                for c2 in c1 + 1..4 {
                    let minor = flat[r1][c1] * flat[r2][c2] - flat[r1][c2] * flat[r2][c1];
                    max_minor = max_minor.max(minor.abs());
                }
            }
        }
    }

    Ok(SegreDiagnostics {
        max_minor,
        singular_values: singular_values(flat),
    })
}

/// Singular values of a 16×4 matrix by one-sided (Hestenes) Jacobi.
///
/// Each rotation diagonalizes a 2×2 block of the 4×4 Gram matrix `AᵀA`, but
/// the rotation is applied to the columns of `A` itself, which keeps tiny
/// singular values accurate to `ε·σ₁` instead of `√ε·σ₁`.
fn singular_values(mut a: [[f64; 4]; 16]) -> [f64; 4] {
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..4 {
            for q in p + 1..4 {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for row in a.iter() {
                    alpha += row[p] * row[p];
                    beta += row[q] * row[q];
                    gamma += row[p] * row[q];
                }
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for row in a.iter_mut() {
                    let (x, y) = (row[p], row[q]);
                    row[p] = c * x - s * y;
                    row[q] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv = [0.0; 4];
    for (c, s) in sv.iter_mut().enumerate() {
        *s = a.iter().map(|row| row[c] * row[c]).sum::<f64>().sqrt();
    }
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}
