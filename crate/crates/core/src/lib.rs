//! Admissible envelope extensions of directed graphs.
//!
//! Given any digraph, the [`extension`] module adds a minimal set of edges so the
//! adjacency matrix becomes non-singular, chains a cycle cover into a Hamiltonian
//! cycle and embeds the result in a Cayley digraph on `Z_n`. The [`spectral`]
//! module turns an admissible extension (diagonalizable, distinct non-zero
//! eigenvalues) into a graph Fourier transform, [`convolution`] provides the
//! induced convolution product, [`metrics`] the structural comparisons and
//! [`pipeline`] the end-to-end search, filtering and reporting driver.

pub mod graph;
pub mod linalg;

pub use graph::{Digraph, Edge, EdgeListFormat, GraphError, RankProfile, Signal};
pub mod dft;
pub mod spectral;
pub mod extension;
pub mod convolution;
pub mod metrics;
pub mod pipeline;
