//! Semirings and the shared chain evaluator.
//!
//! Likelihood evaluation, Viterbi decoding and parametric inference are the
//! same recursion read in different semirings. [`Probability`] is ordinary
//! `(+, ×)`, [`MaxPlus`] is `(max, +)` on natural-log weights, and the
//! polygon semirings in [`polygon`] use convex hull of the union as addition
//! and Minkowski sum as multiplication.

mod chain;
pub mod polygon;

use std::fmt::Debug;

pub use chain::{best_path, evaluate_chain, ChainSpec, TropicalPath};
pub use polygon::{LatticePolygon, Point, PolygonSemiring, WitnessPolygon, WitnessPolygonSemiring};

/// Relative slack under which two max-plus scores are treated as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// `a` is at least as good as `b` up to [`TIE_TOLERANCE`].
pub fn at_least(a: f64, b: f64) -> bool {
    if b == f64::NEG_INFINITY {
        return true;
    }
    a >= b - TIE_TOLERANCE * b.abs().max(1.0)
}

pub trait Semiring {
    type Value: Clone + Debug;

    fn zero(&self) -> Self::Value;
    fn one(&self) -> Self::Value;
    fn add(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn mul(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;

    fn sum<'a, I>(&self, values: I) -> Self::Value
    where
        I: IntoIterator<Item = &'a Self::Value>,
        Self::Value: 'a,
    {
        values.into_iter().fold(self.zero(), |acc, v| self.add(&acc, v))
    }
}

/// Non-negative reals under `(+, ×)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Probability;

impl Semiring for Probability {
    type Value = f64;

    fn zero(&self) -> f64 {
        0.0
    }
    fn one(&self) -> f64 {
        1.0
    }
    fn add(&self, a: &f64, b: &f64) -> f64 {
        a + b
    }
    fn mul(&self, a: &f64, b: &f64) -> f64 {
        a * b
    }
}

/// Reals with `-∞` under `(max, +)`. `-∞` absorbs under multiplication.
#[derive(Debug, Clone, Copy, Default)]
pub struct MaxPlus;

impl Semiring for MaxPlus {
    type Value = f64;

    fn zero(&self) -> f64 {
        f64::NEG_INFINITY
    }
    fn one(&self) -> f64 {
        0.0
    }
    fn add(&self, a: &f64, b: &f64) -> f64 {
        a.max(*b)
    }
    fn mul(&self, a: &f64, b: &f64) -> f64 {
        if *a == f64::NEG_INFINITY || *b == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            a + b
        }
    }
}

/// Natural log with `log 0 = -∞`.
pub fn log_weight(p: f64) -> f64 {
    if p == 0.0 {
        f64::NEG_INFINITY
    } else {
        p.ln()
    }
}
