//! Text formats: Newick trees, distance matrices, FASTA and JSON model
//! files.

mod distance;
mod fasta;
mod models;
mod newick;

pub use distance::{emit_distance_json, emit_phylip, parse_distance_matrix, parse_m_dissimilarity_json, emit_m_dissimilarity_json};
pub use fasta::{emit_fasta, parse_fasta, AlignedFasta, FastaRecord};
pub use models::{emit_hmm_json, parse_hmm_json, parse_observations, parse_pair_hmm_json, HmmModel};
pub use newick::{emit_newick, parse_newick};
