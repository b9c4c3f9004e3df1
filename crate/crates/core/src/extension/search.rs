//! Lazy search over every `(row list, column list, pattern)` triple.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::cayley::{cayley_adjacency, cayley_embedding, cayley_spectrum, CayleyEmbedding};
use super::cycles::{chain_cycles, find_cycle_cover, CycleCover, HamiltonianChain};
use super::dependency::{enumerate_dependency_lists, DependencyEnumeration, DependencyKind};
use super::pseudo::{
    nonsingular_extension, pseudo_permutations, EnvelopeExtension, Provenance, PseudoPermutation,
};
use super::ExtensionError;
use crate::graph::{Digraph, Edge, RankProfile};
use crate::spectral::{
    eigendecompose_real, spectrum_verdict, AdmissibilityTolerances, EigenSystem, Verdict,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    /// Only row lists containing all of these rows are used.
    pub restrict_rows: Option<Vec<usize>>,
    pub weight: f64,
    pub allow_multi: bool,
    pub limit: Option<usize>,
    pub tolerances: AdmissibilityTolerances,
    /// Attach Cayley fallback guidance to extensions that are not admissible.
    pub cayley_hints: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            restrict_rows: None,
            weight: 1.0,
            allow_multi: false,
            limit: None,
            tolerances: AdmissibilityTolerances::default(),
            cayley_hints: true,
        }
    }
}

/// Position of a candidate in the canonical enumeration order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub ordinal: usize,
    pub row_list: usize,
    pub col_list: usize,
    pub perm: usize,
    pub q: PseudoPermutation,
}

/// Where additional edges could go when an extension is not admissible: a cycle
/// cover of the extension, its Hamiltonian chaining and the Cayley digraph that
/// contains the chained graph.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CayleyHint {
    pub cover: CycleCover,
    pub chain: HamiltonianChain,
    pub embedding: CayleyEmbedding,
    /// Edges (original labels) of the Cayley digraph missing from the extension.
    pub missing_edges: Vec<Edge>,
    /// Verdict of the Cayley digraph itself, from its closed-form spectrum.
    pub cayley_verdict: Verdict,
}

#[derive(Debug, Clone)]
pub enum Outcome {
    /// A pattern entry hit an existing edge and multi-edges are not allowed.
    MultiEdge { src: usize, dst: usize },
    /// The numerical rank check failed.
    Singular,
    /// Non-singular, but the eigensolver failed; counted, not fatal.
    EigenFailure(String),
    /// Any other construction error.
    Failure(String),
    Evaluated(Box<Evaluation>),
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub extension: EnvelopeExtension,
    pub eigen: EigenSystem,
    pub verdict: Verdict,
    pub cayley_hint: Option<CayleyHint>,
}

#[derive(Debug, Clone)]
pub struct SearchItem {
    pub candidate: Candidate,
    pub outcome: Outcome,
}

impl SearchItem {
    pub fn is_nonsingular(&self) -> bool {
        match &self.outcome {
            Outcome::Evaluated(e) => e.verdict != Verdict::Singular,
            Outcome::EigenFailure(_) => true,
            _ => false,
        }
    }

    pub fn is_admissible(&self) -> bool {
        matches!(&self.outcome, Outcome::Evaluated(e) if e.verdict.is_admissible())
    }
}

/// Dependency lists of a base graph and the candidate space they span.
#[derive(Debug, Clone)]
pub struct ExtensionSearch {
    pub base: Arc<Digraph>,
    pub options: SearchOptions,
    pub rows: DependencyEnumeration,
    pub cols: DependencyEnumeration,
}

impl ExtensionSearch {
    pub fn new(base: Arc<Digraph>, options: SearchOptions) -> Result<Self, ExtensionError> {
        if !(options.weight != 0.0 && options.weight.is_finite()) {
            return Err(ExtensionError::InvalidWeight(options.weight));
        }
        let a = base.adjacency();
        let rows = enumerate_dependency_lists(&a, DependencyKind::Row, options.restrict_rows.as_deref())?;
        let cols = enumerate_dependency_lists(&a, DependencyKind::Column, None)?;
        Ok(Self {
            base,
            options,
            rows,
            cols,
        })
    }

    pub fn profile(&self) -> RankProfile {
        self.rows.profile
    }

    pub fn nullity(&self) -> usize {
        self.rows.profile.nullity
    }

    /// `rows x cols x g!`, or 1 for a non-singular base (the base itself).
    pub fn total_inv(&self) -> u128 {
        let g = self.nullity();
        if g == 0 {
            return 1;
        }
        let fact: u128 = (1..=g as u128).product();
        self.rows.len() as u128 * self.cols.len() as u128 * fact
    }

    /// Candidates in canonical order: row list, then column list, then pattern.
    pub fn candidates(&self) -> impl Iterator<Item = Candidate> + '_ {
        let g = self.nullity();
        let base_only = (g == 0).then(|| Candidate {
            ordinal: 0,
            row_list: 0,
            col_list: 0,
            perm: 0,
            q: PseudoPermutation::new(Vec::new(), self.base.n()).expect("empty pattern"),
        });
        let triples = (g > 0)
            .then(|| {
                self.rows.lists.iter().enumerate().flat_map(move |(ri, r)| {
                    self.cols.lists.iter().enumerate().flat_map(move |(ci, c)| {
                        pseudo_permutations(r, c)
                            .expect("lists of equal length and matching kinds")
                            .into_iter()
                            .enumerate()
                            .map(move |(pi, q)| (ri, ci, pi, q))
                    })
                })
            })
            .into_iter()
            .flatten()
            .enumerate()
            .map(|(ordinal, (row_list, col_list, perm, q))| Candidate {
                ordinal,
                row_list,
                col_list,
                perm,
                q,
            });
        base_only
            .into_iter()
            .chain(triples)
            .take(self.options.limit.unwrap_or(usize::MAX))
    }

    /// Provenance of a candidate, available before it is evaluated.
    pub fn provenance(&self, candidate: &Candidate) -> Provenance {
        if self.nullity() == 0 {
            return EnvelopeExtension::identity(self.base.clone()).provenance;
        }
        Provenance {
            rows: self.rows.lists[candidate.row_list].indices().to_vec(),
            cols: self.cols.lists[candidate.col_list].indices().to_vec(),
            q: candidate.q.entries().iter().map(|&(r, c)| [r, c]).collect(),
            added: candidate.q.edges(self.options.weight),
        }
    }

    /// Build, check and classify one candidate. Pure; safe to call concurrently.
    pub fn evaluate(&self, candidate: Candidate) -> SearchItem {
        let extension = if self.nullity() == 0 {
            Ok(EnvelopeExtension::identity(self.base.clone()))
        } else {
            nonsingular_extension(
                self.base.clone(),
                &self.rows.lists[candidate.row_list],
                &self.cols.lists[candidate.col_list],
                &candidate.q,
                self.options.weight,
                self.options.allow_multi,
            )
        };
        let outcome = match extension {
            Err(ExtensionError::MultiEdge { src, dst }) => Outcome::MultiEdge { src, dst },
            Err(ExtensionError::SingularExtension { .. }) => Outcome::Singular,
            Err(e) => Outcome::Failure(e.to_string()),
            Ok(extension) => match eigendecompose_real(&extension.extended.adjacency()) {
                Err(e) => Outcome::EigenFailure(e.to_string()),
                Ok(eigen) => {
                    let verdict = eigen.verdict(&self.options.tolerances);
                    let cayley_hint = if self.options.cayley_hints && !verdict.is_admissible() {
                        cayley_hint(&extension.extended, self.options.weight, &self.options.tolerances)
                            .map_err(|e| log::warn!("no Cayley hint for {}: {e}", extension.candidate_id()))
                            .ok()
                    } else {
                        None
                    };
                    Outcome::Evaluated(Box::new(Evaluation {
                        extension,
                        eigen,
                        verdict,
                        cayley_hint,
                    }))
                }
            },
        };
        SearchItem { candidate, outcome }
    }

    /// Lazily evaluated stream over [`ExtensionSearch::candidates`].
    pub fn iter(&self) -> impl Iterator<Item = SearchItem> + '_ {
        self.candidates().map(move |c| self.evaluate(c))
    }
}

/// Entry point: enumerate the dependency lists of `base` and return the search.
pub fn search_admissible_extensions(
    base: Arc<Digraph>,
    options: SearchOptions,
) -> Result<ExtensionSearch, ExtensionError> {
    ExtensionSearch::new(base, options)
}

/// Cycle cover, Hamiltonian chaining and Cayley embedding of a non-singular graph.
pub fn cayley_hint(
    g: &Digraph,
    weight: f64,
    tol: &AdmissibilityTolerances,
) -> Result<CayleyHint, ExtensionError> {
    let cover = find_cycle_cover(&g.adjacency())?;
    let chain = chain_cycles(&cover);
    let red: Vec<Edge> = chain
        .added
        .iter()
        .filter(|&&(s, d)| !g.has_edge(s, d))
        .map(|&(s, d)| Edge::new(s, d, weight))
        .collect();
    let chained = g.with_added_edges(&red, false)?;
    let embedding = cayley_embedding(&chained, &chain.cycle)?;
    let mut inverse = vec![0; g.n()];
    for (v, &i) in embedding.relabeling.iter().enumerate() {
        inverse[i] = v;
    }
    let missing_edges = cayley_adjacency(&embedding.gamma)
        .edges()
        .iter()
        .map(|e| Edge::new(inverse[e.src], inverse[e.dst], weight))
        .filter(|e| !g.has_edge(e.src, e.dst))
        .collect();
    let spectrum = cayley_spectrum(&embedding.gamma);
    // The Cayley eigenbasis is unitary, so only the spectrum can disqualify it.
    let cayley_verdict = spectrum_verdict(&spectrum, tol);
    Ok(CayleyHint {
        cover,
        chain,
        embedding,
        missing_edges,
        cayley_verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::RMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn line_gives_single_cycle() {
        let base = Arc::new(Digraph::line(5).unwrap());
        let search = search_admissible_extensions(base, SearchOptions::default()).unwrap();
        assert_eq!(search.total_inv(), 1);
        let items: Vec<_> = search.iter().collect();
        assert_eq!(items.len(), 1);
        let Outcome::Evaluated(ev) = &items[0].outcome else {
            panic!("expected an evaluation");
        };
        assert_eq!(ev.verdict, Verdict::Admissible);
        assert_eq!(ev.extension.extended, Digraph::cycle(5).unwrap());
        assert!(ev.cayley_hint.is_none());
    }

    #[test]
    fn nonsingular_base_is_returned() {
        let base = Arc::new(Digraph::cycle(3).unwrap());
        let search = search_admissible_extensions(base.clone(), SearchOptions::default()).unwrap();
        let items: Vec<_> = search.iter().collect();
        assert_eq!(items.len(), 1);
        let Outcome::Evaluated(ev) = &items[0].outcome else {
            panic!("expected an evaluation");
        };
        assert_eq!(ev.verdict, Verdict::Admissible);
        assert!(ev.extension.added_edges.is_empty());
        assert_eq!(ev.extension.extended, *base);
    }

    #[test]
    fn hints_for_inadmissible() {
        // The identity is non-singular with a repeated eigenvalue.
        let base = Arc::new(Digraph::from_adjacency(&RMatrix::identity(4, 4)).unwrap());
        let search = search_admissible_extensions(base, SearchOptions::default()).unwrap();
        let item = search.iter().next().unwrap();
        let Outcome::Evaluated(ev) = &item.outcome else {
            panic!("expected an evaluation");
        };
        assert_eq!(ev.verdict, Verdict::NonsingularOnly);
        let hint = ev.cayley_hint.as_ref().unwrap();
        assert_eq!(hint.cover.len(), 4);
        assert_eq!(hint.chain.cycle, vec![0, 1, 2, 3]);
        let residues: Vec<usize> = hint.embedding.gamma.residues().collect();
        assert_eq!(residues, vec![0, 1]);
        assert_eq!(hint.missing_edges.len(), 4);
    }

    #[test]
    fn counts_match_total_inv() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut seen = 0;
        while seen < 30 {
            let n = rng.random_range(2..=7);
            let a = RMatrix::from_fn(n, n, |_, _| f64::from(rng.random_bool(0.3) as u8));
            let base = Arc::new(Digraph::from_adjacency(&a).unwrap());
            let opts = SearchOptions {
                allow_multi: true,
                cayley_hints: false,
                ..SearchOptions::default()
            };
            let search = search_admissible_extensions(base, opts).unwrap();
            if search.nullity() == 0 {
                continue;
            }
            let items: Vec<_> = search.iter().collect();
            assert_eq!(items.len() as u128, search.total_inv());
            assert!(items.iter().all(|i| i.is_nonsingular()));
            for (k, i) in items.iter().enumerate() {
                assert_eq!(i.candidate.ordinal, k);
                if let Outcome::Evaluated(ev) = &i.outcome {
                    assert_eq!(search.provenance(&i.candidate), ev.extension.provenance);
                }
            }
            seen += 1;
        }
    }

    #[test]
    fn limit_and_restriction() {
        let a = RMatrix::from_row_slice(3, 3, &[1., 1., 0., 1., 1., 0., 0., 0., 0.]);
        let base = Arc::new(Digraph::from_adjacency(&a).unwrap());
        let all = search_admissible_extensions(base.clone(), SearchOptions::default()).unwrap();
        assert_eq!(all.total_inv(), 2 * 2 * 2);
        let some = search_admissible_extensions(
            base.clone(),
            SearchOptions {
                restrict_rows: Some(vec![1]),
                limit: Some(3),
                ..SearchOptions::default()
            },
        )
        .unwrap();
        assert_eq!(some.total_inv(), 4);
        assert_eq!(some.candidates().count(), 3);
        assert!(some.candidates().all(|c| c.q.entries().iter().any(|e| e.0 == 1)));
        let multi = all
            .iter()
            .filter(|i| matches!(i.outcome, Outcome::MultiEdge { .. }))
            .count();
        assert!(multi > 0);
        assert!(search_admissible_extensions(
            base,
            SearchOptions {
                weight: 0.0,
                ..SearchOptions::default()
            }
        )
        .is_err());
    }
}
