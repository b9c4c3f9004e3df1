//! End-to-end driver: enumerate and score extensions, filter them against the
//! base graph, and write per-candidate scorecards plus plot-ready CSV files.

mod filter;
mod report;
mod repro;
mod run;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use filter::{apply_filters, FilterOutcome, FilterStatus, Targets};
pub use report::{emit_reports, ReportManifest};
pub use repro::{line_closure, LineClosureRow};
pub use run::{
    count_candidates, detect_duplicate_rows, load_scorecards, run_enumeration, CountSummary,
    RunSummary, AGGREGATE_CSV, AGGREGATE_HEADER, SCORECARD_DIR, SUMMARY_JSON,
};

use crate::extension::{ExtensionError, Provenance};
use crate::graph::{Edge, GraphError, Signal};
use crate::metrics::{MetricsError, Motif, PageRankOptions, StructuralReport};
use crate::spectral::{AdmissibilityTolerances, CompatibilityIndices, SpectralError, Verdict};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("no scorecards to filter")]
    EmptyInput,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Extension(#[from] ExtensionError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

impl PipelineError {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| Self::Io { path, source }
    }

    pub(crate) fn json(path: impl Into<PathBuf>) -> impl FnOnce(serde_json::Error) -> Self {
        let path = path.into();
        move |source| Self::Json { path, source }
    }

    /// True for failures of the numerics rather than of inputs or I/O.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Self::Spectral(_)
                | Self::Metrics(MetricsError::NonConvergence { .. })
                | Self::Extension(ExtensionError::Spectral(_))
        )
    }
}

/// Thresholds of the filter stack and the construction parameters it assumes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub tau_min: f64,
    pub cond_max: f64,
    /// Row lists must contain all of these rows.
    pub restrict_rows: Option<Vec<usize>>,
    pub allow_multi: bool,
    /// Weight of every added edge.
    pub weight: f64,
}

impl Default for FilterSpec {
    fn default() -> Self {
        Self {
            tau_min: 0.91,
            cond_max: 80.0,
            restrict_rows: None,
            allow_multi: false,
            weight: 1.0,
        }
    }
}

impl FilterSpec {
    /// Thresholds above 1 for tau are accepted here and simply select nothing.
    pub fn validate(&self) -> Result<(), PipelineError> {
        if !self.tau_min.is_finite() {
            return Err(PipelineError::Invalid(format!("tau_min must be finite, got {}", self.tau_min)));
        }
        if !(self.cond_max >= 1.0) {
            return Err(PipelineError::Invalid(format!("cond_max must be at least 1, got {}", self.cond_max)));
        }
        if !(self.weight.is_finite() && self.weight != 0.0) {
            return Err(PipelineError::Invalid(format!(
                "weight must be finite and non-zero, got {}",
                self.weight
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub filter: FilterSpec,
    pub tolerances: AdmissibilityTolerances,
    /// Worker threads; 0 uses one per core.
    pub jobs: usize,
    pub motifs: Vec<Motif>,
    pub pagerank: PageRankOptions,
    /// Reuse scorecards already on disk instead of re-evaluating.
    pub resume: bool,
    /// Stop after this many candidates in canonical order.
    pub limit: Option<usize>,
    pub cayley_hints: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            filter: FilterSpec::default(),
            tolerances: AdmissibilityTolerances::default(),
            jobs: 0,
            motifs: Motif::ALL.to_vec(),
            pagerank: PageRankOptions::default(),
            resume: false,
            limit: None,
            cayley_hints: true,
        }
    }
}

/// Cayley fallback for an extension that is not admissible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CayleySummary {
    pub residues: Vec<usize>,
    /// Chaining edges that were not already present.
    pub chain_added: Vec<[usize; 2]>,
    pub missing_edges: Vec<Edge>,
    pub cayley_verdict: Verdict,
}

/// Everything measured about one evaluated candidate. Spectral and structural
/// fields are filled for admissible extensions only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionScorecard {
    pub candidate_id: String,
    pub ordinal: usize,
    pub row_list: usize,
    pub col_list: usize,
    pub perm: usize,
    pub provenance: Provenance,
    pub verdict: Verdict,
    pub indices: Option<CompatibilityIndices>,
    pub cond: Option<f64>,
    /// `(||F V - I||, ||V F - I||)`.
    pub stability: Option<[f64; 2]>,
    pub tau: Option<f64>,
    pub structural: Option<StructuralReport>,
    /// `V lambda`, the impulse response of the shift itself.
    pub system_impulse: Option<Signal>,
    pub cayley: Option<CayleySummary>,
}

impl ExtensionScorecard {
    pub fn is_admissible(&self) -> bool {
        self.verdict.is_admissible()
    }
}
