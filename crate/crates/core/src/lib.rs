//! Phylogenomic inference on one dynamic-programming engine.
//!
//! The same chain and alignment recursions are evaluated over three
//! semirings: ordinary probability `(+, ×)`, max-plus `(max, +)` on
//! log-parameters, and two-dimensional lattice polygons (convex hull,
//! Minkowski sum). On top of that engine sit the codon independence model,
//! hidden Markov models, the pair HMM for sequence alignment, Jukes-Cantor
//! models on trees and distance-based tree reconstruction.

pub mod codon;
pub mod dna;
pub mod error;
pub mod evolution;
pub mod formats;
pub mod hmm;
pub mod pairhmm;
pub mod pipeline;
pub mod semiring;
pub mod tree;
pub mod treespace;

pub use error::{Error, Result};
