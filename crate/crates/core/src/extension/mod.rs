//! Envelope extensions: non-singularization by pseudo-permutations, cycle covers
//! chained into a Hamiltonian cycle, and Cayley digraphs on `Z_n`.

mod cayley;
mod cycles;
mod dependency;
mod pseudo;
mod search;

use thiserror::Error;

pub use cayley::{
    cayley_adjacency, cayley_eigensystem, cayley_embedding, cayley_spectrum, CayleyEmbedding,
    ConnectionSet,
};
pub use cycles::{chain_cycles, find_cycle_cover, is_vertex_permutation, CycleCover, HamiltonianChain};
pub use dependency::{
    duplicate_rows, enumerate_dependency_lists, null_basis, removal_preserves_rank,
    DependencyEnumeration, DependencyKind, DependencyList, MAX_SUBSETS,
};
pub use pseudo::{
    nonsingular_extension, pseudo_permutations, EnvelopeExtension, Provenance, PseudoPermutation,
};
pub use search::{
    cayley_hint, search_admissible_extensions, Candidate, CayleyHint, Evaluation, ExtensionSearch,
    Outcome, SearchItem, SearchOptions,
};

use crate::graph::GraphError;
use crate::spectral::SpectralError;

#[derive(Debug, Error)]
pub enum ExtensionError {
    #[error("invalid dependency list: {0}")]
    InvalidDependencyList(String),
    #[error("invalid pseudo-permutation: {0}")]
    InvalidPseudoPermutation(String),
    #[error("row list has {rows} entries but column list has {cols}")]
    LengthMismatch { rows: usize, cols: usize },
    #[error("added edge {src} -> {dst} collides with an existing edge (multi-edges not allowed)")]
    MultiEdge { src: usize, dst: usize },
    #[error("extension is singular (rank {rank})")]
    SingularExtension { rank: usize },
    #[error("added-edge weight must be finite and non-zero, got {0}")]
    InvalidWeight(f64),
    #[error("no perfect matching: row {row} cannot be matched (matrix is singular)")]
    NoPerfectMatching { row: usize },
    #[error("invalid cycle: {0}")]
    InvalidCycle(String),
    #[error("invalid connection set: {0}")]
    InvalidConnectionSet(String),
    #[error("{count} subsets to test exceeds the enumeration limit")]
    TooManySubsets { count: u128 },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}
