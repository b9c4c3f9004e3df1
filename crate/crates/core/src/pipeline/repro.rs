use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::extension::{ExtensionSearch, Outcome, SearchOptions};
use crate::graph::Digraph;
use crate::spectral::{
    compatibility_indices, weighted_cycle_adjacency, weighted_cycle_basis, AdmissibilityTolerances,
    GftBasis, Verdict,
};

/// Indices and conditioning of the line digraph closed by an edge of weight `w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineClosureRow {
    pub weight: f64,
    pub verdict: Verdict,
    /// From the closed-form basis.
    pub delta: f64,
    pub big_delta: f64,
    pub cond: f64,
    /// From the numerical eigensolver.
    pub cond_numeric: f64,
    /// `w / sqrt(n)`.
    pub delta_formula: f64,
    /// `w`.
    pub big_delta_formula: f64,
    /// `max(w, 1/w)^((n-1)/n)`.
    pub cond_formula: f64,
}

impl LineClosureRow {
    /// Largest relative disagreement between measured and formula values.
    pub fn max_relative_error(&self) -> f64 {
        [
            (self.delta, self.delta_formula),
            (self.big_delta, self.big_delta_formula),
            (self.cond, self.cond_formula),
            (self.cond_numeric, self.cond_formula),
        ]
        .iter()
        .map(|&(got, want)| (got - want).abs() / want.abs())
        .fold(0.0, f64::max)
    }
}

/// Run the search on the line digraph for each weight and measure the unique
/// extension against its closed-form eigenbasis.
pub fn line_closure(
    n: usize,
    weights: &[f64],
    tol: &AdmissibilityTolerances,
) -> Result<Vec<LineClosureRow>, PipelineError> {
    let line = Arc::new(Digraph::line(n)?);
    weights
        .iter()
        .map(|&w| {
            let options = SearchOptions {
                weight: w,
                tolerances: *tol,
                cayley_hints: false,
                ..SearchOptions::default()
            };
            let search = ExtensionSearch::new(line.clone(), options)?;
            if search.total_inv() != 1 {
                return Err(PipelineError::Invalid(format!(
                    "expected a single candidate, found {}",
                    search.total_inv()
                )));
            }
            let item = search.iter().next().expect("one candidate");
            let ev = match item.outcome {
                Outcome::Evaluated(ev) => ev,
                other => {
                    return Err(PipelineError::Invalid(format!("line closure not evaluated: {other:?}")))
                }
            };
            if ev.extension.extended.adjacency() != weighted_cycle_adjacency(n, w) {
                return Err(PipelineError::Invalid("extension is not the closed cycle".into()));
            }
            let closed = weighted_cycle_basis(n, w)?;
            let idx = compatibility_indices(&ev.extension.perturbation(), closed.inverse())?;
            let numeric = GftBasis::new(ev.eigen.clone())?;
            let nf = n as f64;
            Ok(LineClosureRow {
                weight: w,
                verdict: ev.verdict,
                delta: idx.delta,
                big_delta: idx.big_delta,
                cond: closed.cond,
                cond_numeric: numeric.cond,
                delta_formula: w.abs() / nf.sqrt(),
                big_delta_formula: w.abs(),
                cond_formula: w.abs().max(1.0 / w.abs()).powf((nf - 1.0) / nf),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sixteen_vertices() {
        let rows = line_closure(16, &[1.0, 0.5, 0.01, 3.0], &AdmissibilityTolerances::default()).unwrap();
        for r in &rows {
            assert_eq!(r.verdict, Verdict::Admissible);
            assert!(r.max_relative_error() < 1e-9, "{r:?}");
        }
        assert!((rows[2].cond - 74.98942).abs() < 1e-3);
    }

    #[test]
    fn negative_weight_is_not_closed_form() {
        assert!(line_closure(8, &[-1.0], &AdmissibilityTolerances::default()).is_err());
    }
}
