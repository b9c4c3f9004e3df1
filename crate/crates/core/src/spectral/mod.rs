//! Eigendecomposition, admissibility, graph Fourier bases and the (delta, Delta)
//! compatibility indices.

mod basis;
mod eigen;
mod schur;
mod weighted_cycle;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use basis::{
    compare_bases, compatibility_indices, scale_basis, stability_norms, CompatibilityIndices,
    GftBasis,
};
pub use eigen::{
    eigendecompose, eigendecompose_real, is_admissible, spectral_order, spectrum_verdict,
    EigenSystem, Normalization,
};
pub use weighted_cycle::{weighted_cycle_adjacency, weighted_cycle_basis};

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("expected a square matrix, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("eigensolver did not converge (n = {n})")]
    NonConvergence { n: usize },
    #[error("eigenvector matrix is singular; the inverse does not exist")]
    SingularBasis,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Result of the admissibility test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Diagonalizable with distinct non-zero eigenvalues.
    Admissible,
    /// Non-singular and diagonalizable, but with a repeated eigenvalue.
    NonsingularOnly,
    /// Has a zero eigenvalue.
    Singular,
    /// Eigenvector matrix too ill-conditioned to count as diagonalizable.
    Defective,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Admissible => "admissible",
            Verdict::NonsingularOnly => "nonsingular_only",
            Verdict::Singular => "singular",
            Verdict::Defective => "defective",
        }
    }

    pub fn is_admissible(self) -> bool {
        self == Verdict::Admissible
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Thresholds for [`is_admissible`], relative to the spectral radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityTolerances {
    pub zero: f64,
    pub gap: f64,
    /// `cond(V)` above this marks the matrix as defective.
    pub defective_cond: f64,
}

impl Default for AdmissibilityTolerances {
    fn default() -> Self {
        Self {
            zero: 1e-10,
            gap: 1e-8,
            defective_cond: 1e12,
        }
    }
}
