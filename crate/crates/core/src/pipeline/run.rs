use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::filter::apply_filters;
use super::{CayleySummary, ExtensionScorecard, FilterStatus, PipelineError, RunConfig};
use crate::extension::{
    duplicate_rows, nonsingular_extension, Candidate, CayleyHint, Evaluation, ExtensionError,
    ExtensionSearch, Outcome, SearchOptions,
};
use crate::graph::Digraph;
use crate::metrics::{pagerank, structural_report};
use crate::spectral::{compatibility_indices, GftBasis};

pub const SCORECARD_DIR: &str = "scorecards";
pub const AGGREGATE_CSV: &str = "scorecards.csv";
pub const SUMMARY_JSON: &str = "summary.json";
pub const AGGREGATE_HEADER: [&str; 17] = [
    "candidate_id",
    "rows",
    "cols",
    "perm",
    "added_edges",
    "admissible",
    "delta",
    "Delta",
    "cond",
    "stab_left",
    "stab_right",
    "tau",
    "core",
    "periphery",
    "mean_clustering",
    "motif_3cycle",
    "motif_ffl",
];

// Candidates handed to the worker pool at a time; results of a chunk are kept
// in canonical order.
const CHUNK: usize = 256;

/// Sizes of the candidate space, without evaluating anything.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountSummary {
    pub n: usize,
    pub rank: usize,
    pub nullity: usize,
    pub row_lists: usize,
    pub col_lists: usize,
    pub total_inv: u128,
    /// Zero rows (which every row list contains).
    pub mandatory_rows: Vec<usize>,
    /// Zero columns (which every column list contains).
    pub mandatory_cols: Vec<usize>,
    pub restrict_rows: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunSummary {
    pub n: usize,
    pub rank: usize,
    pub nullity: usize,
    pub row_lists: usize,
    pub col_lists: usize,
    pub total_inv: u128,
    /// Candidates visited (less than `total_inv` only under a limit).
    pub considered: usize,
    /// Candidates whose pattern hits an existing edge.
    pub multi_edge: usize,
    /// Of those, the ones that are non-singular once weights are summed.
    pub multi_edge_nonsingular: usize,
    pub singular: usize,
    pub eigen_failures: usize,
    pub failures: usize,
    /// All non-singular extensions, with or without multi-edges.
    pub nonsingular: usize,
    /// Candidates with a scorecard.
    pub evaluated: usize,
    pub verdicts: BTreeMap<String, usize>,
    pub admissible: usize,
    pub tau_passing: usize,
    /// Admissible candidates passing both thresholds.
    pub passing: usize,
    pub max_tau: Option<String>,
    pub best_selected: Option<String>,
    pub delta_range: Option<[f64; 2]>,
    pub big_delta_range: Option<[f64; 2]>,
    pub cond_range: Option<[f64; 2]>,
}

fn search_options(config: &RunConfig) -> SearchOptions {
    SearchOptions {
        restrict_rows: config.filter.restrict_rows.clone(),
        weight: config.filter.weight,
        allow_multi: config.filter.allow_multi,
        limit: config.limit,
        tolerances: config.tolerances,
        cayley_hints: config.cayley_hints,
    }
}

pub fn count_candidates(g: &Digraph, config: &RunConfig) -> Result<CountSummary, PipelineError> {
    config.filter.validate()?;
    let search = ExtensionSearch::new(Arc::new(g.clone()), search_options(config))?;
    let profile = search.profile();
    Ok(CountSummary {
        n: g.n(),
        rank: profile.rank,
        nullity: profile.nullity,
        row_lists: search.rows.len(),
        col_lists: search.cols.len(),
        total_inv: search.total_inv(),
        mandatory_rows: search.rows.mandatory.clone(),
        mandatory_cols: search.cols.mandatory.clone(),
        restrict_rows: config.filter.restrict_rows.clone(),
    })
}

/// Every vertex whose out-neighbourhood (with weights) repeats another's.
pub fn detect_duplicate_rows(g: &Digraph) -> Vec<usize> {
    let mut rows: Vec<usize> = duplicate_rows(&g.adjacency()).into_iter().flatten().collect();
    rows.sort_unstable();
    rows
}

enum Kind {
    MultiEdge { nonsingular: bool },
    Singular,
    EigenFailure,
    Failure,
    Evaluated,
}

struct Processed {
    kind: Kind,
    card: Option<ExtensionScorecard>,
}

fn cayley_summary(hint: &CayleyHint, extended: &Digraph) -> CayleySummary {
    CayleySummary {
        residues: hint.embedding.gamma.residues().collect(),
        chain_added: hint
            .chain
            .added
            .iter()
            .filter(|&&(s, d)| !extended.has_edge(s, d))
            .map(|&(s, d)| [s, d])
            .collect(),
        missing_edges: hint.missing_edges.clone(),
        cayley_verdict: hint.cayley_verdict,
    }
}

fn score(
    candidate: &Candidate,
    ev: &Evaluation,
    base_pagerank: &[f64],
    config: &RunConfig,
) -> Result<ExtensionScorecard, PipelineError> {
    let ext = &ev.extension;
    let mut card = ExtensionScorecard {
        candidate_id: ext.candidate_id(),
        ordinal: candidate.ordinal,
        row_list: candidate.row_list,
        col_list: candidate.col_list,
        perm: candidate.perm,
        provenance: ext.provenance.clone(),
        verdict: ev.verdict,
        indices: None,
        cond: None,
        stability: None,
        tau: None,
        structural: None,
        system_impulse: None,
        cayley: ev.cayley_hint.as_ref().map(|h| cayley_summary(h, &ext.extended)),
    };
    if !ev.verdict.is_admissible() {
        return Ok(card);
    }
    match GftBasis::new(ev.eigen.clone()) {
        Ok(basis) => {
            card.indices = Some(compatibility_indices(&ext.perturbation(), basis.inverse())?);
            card.cond = Some(basis.cond);
            card.stability = Some([basis.stability.0, basis.stability.1]);
            card.system_impulse = Some(basis.synthesize(basis.eigenvalues()));
        }
        Err(e) => log::warn!("{}: no inverse basis: {e}", card.candidate_id),
    }
    let report = structural_report(&ext.extended, Some(base_pagerank), &config.motifs, &config.pagerank)?;
    card.tau = report.kendall_tau;
    card.structural = Some(report);
    Ok(card)
}

fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), PipelineError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(PipelineError::io(&tmp))?;
    fs::rename(&tmp, path).map_err(PipelineError::io(path))
}

fn read_scorecard(path: &Path) -> Result<ExtensionScorecard, PipelineError> {
    let text = fs::read_to_string(path).map_err(PipelineError::io(path))?;
    serde_json::from_str(&text).map_err(PipelineError::json(path))
}

fn process(
    search: &ExtensionSearch,
    candidate: Candidate,
    base_pagerank: &[f64],
    config: &RunConfig,
    card_dir: &Path,
) -> Result<Processed, PipelineError> {
    if config.resume {
        let id = search.provenance(&candidate).candidate_id();
        let path = card_dir.join(format!("{id}.json"));
        if path.exists() {
            let card = read_scorecard(&path)?;
            if card.ordinal == candidate.ordinal {
                return Ok(Processed {
                    kind: Kind::Evaluated,
                    card: Some(card),
                });
            }
            log::warn!("{}: stale scorecard, re-evaluating", path.display());
        }
    }
    let item = search.evaluate(candidate);
    let kind = match &item.outcome {
        Outcome::MultiEdge { .. } => {
            let nonsingular = match nonsingular_extension(
                search.base.clone(),
                &search.rows.lists[item.candidate.row_list],
                &search.cols.lists[item.candidate.col_list],
                &item.candidate.q,
                search.options.weight,
                true,
            ) {
                Ok(_) => true,
                Err(ExtensionError::SingularExtension { .. }) => false,
                Err(e) => return Err(e.into()),
            };
            Kind::MultiEdge { nonsingular }
        }
        Outcome::Singular => Kind::Singular,
        Outcome::EigenFailure(msg) => {
            log::warn!("candidate {}: eigensolver failed: {msg}", item.candidate.ordinal);
            Kind::EigenFailure
        }
        Outcome::Failure(msg) => {
            log::warn!("candidate {}: {msg}", item.candidate.ordinal);
            Kind::Failure
        }
        Outcome::Evaluated(_) => Kind::Evaluated,
    };
    let card = match &item.outcome {
        Outcome::Evaluated(ev) => {
            let card = score(&item.candidate, ev, base_pagerank, config)?;
            let path = card_dir.join(format!("{}.json", card.candidate_id));
            let json = serde_json::to_vec(&card).map_err(PipelineError::json(&path))?;
            write_atomic(&path, &json)?;
            Some(card)
        }
        _ => None,
    };
    Ok(Processed { kind, card })
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub(crate) fn aggregate_row(card: &ExtensionScorecard) -> Vec<String> {
    let s = card.structural.as_ref();
    let motif = |name: &str| opt(s.and_then(|r| r.motif_densities.get(name).copied()));
    vec![
        card.candidate_id.clone(),
        join(&card.provenance.rows),
        join(&card.provenance.cols),
        card.perm.to_string(),
        join(card.provenance.added.iter().map(|e| format!("{}:{}", e.src, e.dst))),
        card.is_admissible().to_string(),
        opt(card.indices.map(|i| i.delta)),
        opt(card.indices.map(|i| i.big_delta)),
        opt(card.cond),
        opt(card.stability.map(|s| s[0])),
        opt(card.stability.map(|s| s[1])),
        opt(card.tau),
        opt(s.map(|r| r.core_count)),
        opt(s.map(|r| r.periphery_count)),
        opt(s.map(|r| r.mean_clustering)),
        motif("3cycle"),
        motif("ffl"),
    ]
}

fn write_aggregate(path: &Path, cards: &[ExtensionScorecard]) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(AGGREGATE_HEADER)?;
    for card in cards {
        w.write_record(aggregate_row(card))?;
    }
    w.flush().map_err(PipelineError::io(path))
}

fn range(values: impl Iterator<Item = f64>) -> Option<[f64; 2]> {
    values.fold(None, |acc, v| match acc {
        None => Some([v, v]),
        Some([lo, hi]) => Some([lo.min(v), hi.max(v)]),
    })
}

/// Evaluate every candidate, persist a scorecard per evaluated candidate under
/// `out_dir/scorecards/`, the aggregate CSV and a summary. Output is identical
/// for any worker count.
pub fn run_enumeration(
    g: &Digraph,
    config: &RunConfig,
    out_dir: &Path,
) -> Result<(RunSummary, Vec<ExtensionScorecard>), PipelineError> {
    config.filter.validate()?;
    let search = ExtensionSearch::new(Arc::new(g.clone()), search_options(config))?;
    let base_pagerank = pagerank(g, &config.pagerank)?;
    let card_dir = out_dir.join(SCORECARD_DIR);
    if !config.resume && card_dir.exists() {
        fs::remove_dir_all(&card_dir).map_err(PipelineError::io(&card_dir))?;
    }
    fs::create_dir_all(&card_dir).map_err(PipelineError::io(&card_dir))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| PipelineError::Invalid(format!("worker pool: {e}")))?;

    let profile = search.profile();
    let mut summary = RunSummary {
        n: g.n(),
        rank: profile.rank,
        nullity: profile.nullity,
        row_lists: search.rows.len(),
        col_lists: search.cols.len(),
        total_inv: search.total_inv(),
        ..RunSummary::default()
    };
    let mut cards = Vec::new();
    let mut candidates = search.candidates();
    loop {
        let chunk: Vec<Candidate> = candidates.by_ref().take(CHUNK).collect();
        if chunk.is_empty() {
            break;
        }
        let processed: Vec<Result<Processed, PipelineError>> = pool.install(|| {
            chunk
                .into_par_iter()
                .map(|c| process(&search, c, &base_pagerank, config, &card_dir))
                .collect()
        });
        for p in processed {
            let p = p?;
            summary.considered += 1;
            match p.kind {
                Kind::MultiEdge { nonsingular } => {
                    summary.multi_edge += 1;
                    summary.multi_edge_nonsingular += usize::from(nonsingular);
                }
                Kind::Singular => summary.singular += 1,
                Kind::EigenFailure => summary.eigen_failures += 1,
                Kind::Failure => summary.failures += 1,
                Kind::Evaluated => {}
            }
            if let Some(card) = p.card {
                *summary.verdicts.entry(card.verdict.as_str().to_string()).or_default() += 1;
                cards.push(card);
            }
        }
        log::debug!("{} of {} candidates processed", summary.considered, summary.total_inv);
    }

    summary.evaluated = cards.len();
    summary.admissible = cards.iter().filter(|c| c.is_admissible()).count();
    summary.nonsingular = cards
        .iter()
        .filter(|c| c.verdict != crate::spectral::Verdict::Singular)
        .count()
        + summary.eigen_failures
        + summary.multi_edge_nonsingular;
    summary.delta_range = range(cards.iter().filter_map(|c| c.indices.map(|i| i.delta)));
    summary.big_delta_range = range(cards.iter().filter_map(|c| c.indices.map(|i| i.big_delta)));
    summary.cond_range = range(cards.iter().filter_map(|c| c.cond));
    if summary.admissible > 0 {
        let filtered = apply_filters(&cards, &config.filter)?;
        summary.tau_passing = filtered.tau_passing;
        summary.passing = filtered.selected.len();
        summary.max_tau = filtered.max_tau.map(|c| c.candidate_id);
        if filtered.status == FilterStatus::Selected {
            summary.best_selected = filtered.selected.first().map(|c| c.candidate_id.clone());
        }
    }

    write_aggregate(&out_dir.join(AGGREGATE_CSV), &cards)?;
    let path = out_dir.join(SUMMARY_JSON);
    let json = serde_json::to_vec_pretty(&summary).map_err(PipelineError::json(&path))?;
    write_atomic(&path, &json)?;
    Ok((summary, cards))
}

/// Scorecards listed in the aggregate CSV of a previous run, in its order.
pub fn load_scorecards(out_dir: &Path) -> Result<Vec<ExtensionScorecard>, PipelineError> {
    let path = out_dir.join(AGGREGATE_CSV);
    let mut reader = csv::Reader::from_path(&path)?;
    let headers = reader.headers()?.clone();
    if headers.iter().ne(AGGREGATE_HEADER) {
        return Err(PipelineError::Invalid(format!(
            "{}: unexpected header {:?}",
            path.display(),
            headers.iter().collect::<Vec<_>>()
        )));
    }
    let mut cards = Vec::new();
    for record in reader.records() {
        let record = record?;
        let id = &record[0];
        cards.push(read_scorecard(&out_dir.join(SCORECARD_DIR).join(format!("{id}.json")))?);
    }
    Ok(cards)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Verdict;

    #[test]
    fn line_graph_run() {
        let dir = tempfile::tempdir().unwrap();
        let g = Digraph::line(6).unwrap();
        let (summary, cards) = run_enumeration(&g, &RunConfig::default(), dir.path()).unwrap();
        assert_eq!(summary.total_inv, 1);
        assert_eq!(summary.admissible, 1);
        assert_eq!(summary.nonsingular, 1);
        assert_eq!(cards.len(), 1);
        let card = &cards[0];
        assert_eq!(card.verdict, Verdict::Admissible);
        assert_eq!(card.provenance.added.len(), 1);
        assert_eq!((card.provenance.added[0].src, card.provenance.added[0].dst), (5, 0));
        // A cycle has a unitary eigenbasis.
        assert!((card.cond.unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(load_scorecards(dir.path()).unwrap(), cards);
    }

    #[test]
    fn counts_add_up() {
        let dir = tempfile::tempdir().unwrap();
        let g = Digraph::from_pairs(5, &[(0, 1), (1, 2), (2, 0), (0, 3), (3, 4), (1, 3)]).unwrap();
        let config = RunConfig {
            jobs: 2,
            ..RunConfig::default()
        };
        let count = count_candidates(&g, &config).unwrap();
        let (summary, cards) = run_enumeration(&g, &config, dir.path()).unwrap();
        assert_eq!(count.total_inv, summary.total_inv);
        assert_eq!(summary.considered as u128, summary.total_inv);
        assert_eq!(
            summary.considered,
            summary.multi_edge + summary.singular + summary.eigen_failures + summary.failures + summary.evaluated
        );
        assert_eq!(summary.verdicts.values().sum::<usize>(), cards.len());
        // Every pseudo-permutation extension is non-singular.
        assert_eq!(summary.singular, 0);
        assert_eq!(summary.multi_edge_nonsingular, summary.multi_edge);
        let files = fs::read_dir(dir.path().join(SCORECARD_DIR)).unwrap().count();
        assert_eq!(files, cards.len());
    }

    #[test]
    fn resume_reuses_scorecards() {
        let dir = tempfile::tempdir().unwrap();
        let g = Digraph::from_pairs(4, &[(0, 1), (1, 2), (2, 0), (0, 3)]).unwrap();
        let (first, cards) = run_enumeration(&g, &RunConfig::default(), dir.path()).unwrap();
        let csv_a = fs::read(dir.path().join(AGGREGATE_CSV)).unwrap();
        let resumed = RunConfig {
            resume: true,
            ..RunConfig::default()
        };
        let (second, again) = run_enumeration(&g, &resumed, dir.path()).unwrap();
        assert_eq!(first, second);
        assert_eq!(cards, again);
        assert_eq!(csv_a, fs::read(dir.path().join(AGGREGATE_CSV)).unwrap());
    }

    #[test]
    fn duplicate_rows_are_found() {
        let g = Digraph::from_pairs(4, &[(0, 2), (1, 2), (3, 0), (2, 3)]).unwrap();
        assert_eq!(detect_duplicate_rows(&g), vec![0, 1]);
    }

    #[test]
    fn empty_fields_for_inadmissible() {
        let dir = tempfile::tempdir().unwrap();
        let g = Digraph::from_pairs(2, &[(0, 0), (1, 1)]).unwrap();
        let (summary, cards) = run_enumeration(&g, &RunConfig::default(), dir.path()).unwrap();
        assert_eq!(summary.admissible, 0);
        assert_eq!(cards[0].verdict, Verdict::NonsingularOnly);
        assert!(cards[0].cayley.is_some());
        let row = aggregate_row(&cards[0]);
        assert_eq!(row[5], "false");
        assert!(row[6..].iter().all(|f| f.is_empty()));
    }
}
