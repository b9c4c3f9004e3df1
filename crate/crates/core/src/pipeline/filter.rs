use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{ExtensionScorecard, FilterSpec, PipelineError};
use crate::metrics::StructuralReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterStatus {
    Selected,
    NoCandidates,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterOutcome {
    pub status: FilterStatus,
    /// Admissible scorecards with a tau value.
    pub considered: usize,
    pub tau_passing: usize,
    /// Passing both thresholds, by descending tau.
    pub selected: Vec<ExtensionScorecard>,
    /// Highest tau among all considered scorecards.
    pub max_tau: Option<ExtensionScorecard>,
}

/// Descending tau; ties keep canonical order.
fn by_tau(a: &ExtensionScorecard, b: &ExtensionScorecard) -> Ordering {
    b.tau
        .unwrap_or(f64::NEG_INFINITY)
        .total_cmp(&a.tau.unwrap_or(f64::NEG_INFINITY))
        .then(a.ordinal.cmp(&b.ordinal))
}

/// Keep admissible scorecards with `tau >= tau_min` and `cond <= cond_max`.
pub fn apply_filters(
    scorecards: &[ExtensionScorecard],
    spec: &FilterSpec,
) -> Result<FilterOutcome, PipelineError> {
    if scorecards.is_empty() {
        return Err(PipelineError::EmptyInput);
    }
    spec.validate()?;
    let scored: Vec<&ExtensionScorecard> = scorecards
        .iter()
        .filter(|c| c.is_admissible() && c.tau.is_some())
        .collect();
    let tau_ok: Vec<&ExtensionScorecard> = scored
        .iter()
        .copied()
        .filter(|c| c.tau.is_some_and(|t| t >= spec.tau_min))
        .collect();
    let mut selected: Vec<ExtensionScorecard> = tau_ok
        .iter()
        .filter(|c| c.cond.is_some_and(|k| k <= spec.cond_max))
        .map(|&c| c.clone())
        .collect();
    selected.sort_by(by_tau);
    let max_tau = scored.iter().copied().min_by(|a, b| by_tau(a, b)).cloned();
    Ok(FilterOutcome {
        status: if selected.is_empty() {
            FilterStatus::NoCandidates
        } else {
            FilterStatus::Selected
        },
        considered: scored.len(),
        tau_passing: tau_ok.len(),
        selected,
        max_tau,
    })
}

/// The selected scorecards that best match the base graph by each criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Targets {
    /// Highest tau.
    pub pagerank: String,
    /// Smallest L1 distance between motif densities.
    pub motif: String,
    /// Smallest total difference in core and periphery counts.
    pub core: String,
}

fn nearest<F: Fn(&StructuralReport) -> f64>(selected: &[ExtensionScorecard], dist: F) -> String {
    selected
        .iter()
        .filter_map(|c| c.structural.as_ref().map(|s| (dist(s), c)))
        .min_by(|a, b| a.0.total_cmp(&b.0).then_with(|| by_tau(a.1, b.1)))
        .map(|(_, c)| c.candidate_id.clone())
        .unwrap_or_else(|| selected[0].candidate_id.clone())
}

impl FilterOutcome {
    /// `None` when nothing was selected.
    pub fn targets(&self, base: &StructuralReport) -> Option<Targets> {
        let first = self.selected.first()?;
        let motif = nearest(&self.selected, |s| {
            base.motif_densities
                .iter()
                .map(|(k, v)| s.motif_densities.get(k).map_or(f64::INFINITY, |x| (x - v).abs()))
                .sum()
        });
        let core = nearest(&self.selected, |s| {
            (s.core_count.abs_diff(base.core_count) + s.periphery_count.abs_diff(base.periphery_count))
                as f64
        });
        Some(Targets {
            pagerank: first.candidate_id.clone(),
            motif,
            core,
        })
    }

    /// Selected scorecards with the distinct targets first.
    pub fn report_order(&self, base: &StructuralReport) -> Vec<ExtensionScorecard> {
        let Some(t) = self.targets(base) else {
            return Vec::new();
        };
        let mut ids = vec![t.pagerank, t.motif, t.core];
        let mut seen = std::collections::HashSet::new();
        ids.retain(|id| seen.insert(id.clone()));
        let mut out: Vec<ExtensionScorecard> = ids
            .iter()
            .filter_map(|id| self.selected.iter().find(|c| &c.candidate_id == id).cloned())
            .collect();
        out.extend(self.selected.iter().filter(|c| !ids.contains(&c.candidate_id)).cloned());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::Provenance;
    use crate::spectral::Verdict;
    use std::collections::BTreeMap;

    fn card(ordinal: usize, tau: Option<f64>, cond: f64, verdict: Verdict) -> ExtensionScorecard {
        ExtensionScorecard {
            candidate_id: format!("c{ordinal}"),
            ordinal,
            row_list: 0,
            col_list: 0,
            perm: ordinal,
            provenance: Provenance {
                rows: vec![],
                cols: vec![],
                q: vec![],
                added: vec![],
            },
            verdict,
            indices: None,
            cond: Some(cond),
            stability: None,
            tau,
            structural: None,
            system_impulse: None,
            cayley: None,
        }
    }

    fn with_structure(mut c: ExtensionScorecard, core: usize, cyc: f64) -> ExtensionScorecard {
        c.structural = Some(report(core, cyc));
        c
    }

    fn report(core: usize, cyc: f64) -> StructuralReport {
        StructuralReport {
            pagerank: vec![],
            kendall_tau: None,
            motif_densities: BTreeMap::from([("3cycle".to_string(), cyc)]),
            core_count: core,
            periphery_count: 10 - core,
            local_clustering: vec![],
            mean_clustering: 0.0,
        }
    }

    #[test]
    fn thresholds_and_order() {
        let cards = vec![
            card(0, Some(0.95), 100.0, Verdict::Admissible),
            card(1, Some(0.92), 50.0, Verdict::Admissible),
            card(2, Some(0.80), 10.0, Verdict::Admissible),
            card(3, Some(0.93), 79.0, Verdict::Admissible),
            card(4, Some(0.99), 1.0, Verdict::NonsingularOnly),
            card(5, None, 1.0, Verdict::Admissible),
            card(6, Some(0.93), 20.0, Verdict::Admissible),
        ];
        let out = apply_filters(&cards, &FilterSpec::default()).unwrap();
        assert_eq!(out.status, FilterStatus::Selected);
        assert_eq!(out.considered, 5);
        assert_eq!(out.tau_passing, 4);
        let ids: Vec<_> = out.selected.iter().map(|c| c.ordinal).collect();
        assert_eq!(ids, vec![3, 6, 1]);
        assert_eq!(out.max_tau.unwrap().ordinal, 0);
    }

    #[test]
    fn impossible_threshold() {
        let cards = vec![card(0, Some(1.0), 1.0, Verdict::Admissible)];
        let spec = FilterSpec {
            tau_min: 1.01,
            ..FilterSpec::default()
        };
        let out = apply_filters(&cards, &spec).unwrap();
        assert_eq!(out.status, FilterStatus::NoCandidates);
        assert!(out.selected.is_empty());
        assert!(out.targets(&report(5, 0.0)).is_none());
    }

    #[test]
    fn single_passing_candidate_unchanged() {
        let cards = vec![card(0, Some(0.95), 3.0, Verdict::Admissible)];
        let out = apply_filters(&cards, &FilterSpec::default()).unwrap();
        assert_eq!(out.selected, cards);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(
            apply_filters(&[], &FilterSpec::default()),
            Err(PipelineError::EmptyInput)
        ));
    }

    #[test]
    fn targets_pick_nearest() {
        let cards = vec![
            with_structure(card(0, Some(0.99), 2.0, Verdict::Admissible), 9, 0.5),
            with_structure(card(1, Some(0.97), 2.0, Verdict::Admissible), 4, 0.1),
            with_structure(card(2, Some(0.95), 2.0, Verdict::Admissible), 5, 0.3),
        ];
        let out = apply_filters(&cards, &FilterSpec::default()).unwrap();
        let t = out.targets(&report(5, 0.12)).unwrap();
        assert_eq!((t.pagerank.as_str(), t.motif.as_str(), t.core.as_str()), ("c0", "c1", "c2"));
        let order: Vec<_> = out.report_order(&report(5, 0.12)).iter().map(|c| c.ordinal).collect();
        assert_eq!(order, vec![0, 1, 2]);
        let order: Vec<_> = out.report_order(&report(9, 0.5)).iter().map(|c| c.ordinal).collect();
        assert_eq!(order, vec![0, 1, 2]);
    }
}
