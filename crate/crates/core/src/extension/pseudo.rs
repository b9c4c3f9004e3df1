//! Pseudo-permutations and the non-singular extension `A + w Q`.

use std::sync::Arc;

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::dependency::{DependencyKind, DependencyList};
use super::ExtensionError;
use crate::graph::{rank_profile, Digraph, Edge};
use crate::linalg::RMatrix;

/// Rank-`g` 0/1 pattern matching `g` rows to `g` columns one-to-one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PseudoPermutation {
    entries: Vec<(usize, usize)>,
    n: usize,
}

impl PseudoPermutation {
    /// Entries are sorted by row; rows and columns must each be distinct.
    pub fn new(mut entries: Vec<(usize, usize)>, n: usize) -> Result<Self, ExtensionError> {
        entries.sort_unstable();
        let bad = |msg: String| Err(ExtensionError::InvalidPseudoPermutation(msg));
        if let Some(&(r, c)) = entries.iter().find(|&&(r, c)| r >= n || c >= n) {
            return bad(format!("entry ({r}, {c}) out of range for n = {n}"));
        }
        if entries.iter().map(|e| e.0).duplicates().next().is_some()
            || entries.iter().map(|e| e.1).duplicates().next().is_some()
        {
            return bad(format!("repeated row or column in {entries:?}"));
        }
        Ok(Self { entries, n })
    }

    pub fn entries(&self) -> &[(usize, usize)] {
        &self.entries
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    pub fn edges(&self, weight: f64) -> Vec<Edge> {
        self.entries
            .iter()
            .map(|&(r, c)| Edge::new(r, c, weight))
            .collect()
    }

    /// Dense `n x n` matrix with `weight` at every entry.
    pub fn matrix(&self, weight: f64) -> RMatrix {
        let mut q = RMatrix::zeros(self.n, self.n);
        for &(r, c) in &self.entries {
            q[(r, c)] = weight;
        }
        q
    }
}

/// All `g!` bijections from the row list to the column list. Rows stay in
/// ascending order; the column assignments follow lexicographic order.
pub fn pseudo_permutations(
    rows: &DependencyList,
    cols: &DependencyList,
) -> Result<Vec<PseudoPermutation>, ExtensionError> {
    if rows.kind() != DependencyKind::Row || cols.kind() != DependencyKind::Column {
        return Err(ExtensionError::InvalidDependencyList(
            "expected a row list and a column list".into(),
        ));
    }
    if rows.len() != cols.len() || rows.n() != cols.n() {
        return Err(ExtensionError::LengthMismatch {
            rows: rows.len(),
            cols: cols.len(),
        });
    }
    let g = rows.len();
    Ok(cols
        .indices()
        .iter()
        .copied()
        .permutations(g)
        .map(|perm| PseudoPermutation {
            entries: rows.indices().iter().copied().zip(perm).collect(),
            n: rows.n(),
        })
        .collect())
}

/// Which dependency lists and pattern produced an extension, and what was added.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub q: Vec<[usize; 2]>,
    pub added: Vec<Edge>,
}

impl Provenance {
    /// Compact JSON `{"rows":[..],"cols":[..],"q":[[r,c],..],"added":[[s,d,w],..]}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("provenance serialization cannot fail")
    }

    /// First 16 hex digits of the SHA-256 of [`Provenance::to_json`].
    pub fn candidate_id(&self) -> String {
        let digest = Sha256::digest(self.to_json().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// A supergraph of `base` obtained by adding edges.
#[derive(Debug, Clone)]
pub struct EnvelopeExtension {
    pub base: Arc<Digraph>,
    pub added_edges: Vec<Edge>,
    pub extended: Digraph,
    pub provenance: Provenance,
}

impl EnvelopeExtension {
    /// The base graph itself, for inputs that need no edges.
    pub fn identity(base: Arc<Digraph>) -> Self {
        let extended = (*base).clone();
        Self {
            base,
            added_edges: Vec::new(),
            extended,
            provenance: Provenance {
                rows: Vec::new(),
                cols: Vec::new(),
                q: Vec::new(),
                added: Vec::new(),
            },
        }
    }

    /// `A_e - A`: the weights of the added edges as a dense matrix.
    pub fn perturbation(&self) -> RMatrix {
        let n = self.base.n();
        let mut q = RMatrix::zeros(n, n);
        for e in &self.added_edges {
            q[(e.src, e.dst)] += e.weight;
        }
        q
    }

    pub fn candidate_id(&self) -> String {
        self.provenance.candidate_id()
    }
}

/// `A + weight * Q`, checked to be non-singular.
///
/// An entry of `Q` landing on an existing edge is an error unless `allow_multi`
/// is set, in which case the weights are summed.
pub fn nonsingular_extension(
    base: Arc<Digraph>,
    rows: &DependencyList,
    cols: &DependencyList,
    q: &PseudoPermutation,
    weight: f64,
    allow_multi: bool,
) -> Result<EnvelopeExtension, ExtensionError> {
    if !(weight != 0.0 && weight.is_finite()) {
        return Err(ExtensionError::InvalidWeight(weight));
    }
    if q.n() != base.n() {
        return Err(ExtensionError::InvalidPseudoPermutation(format!(
            "pattern size {} does not match graph size {}",
            q.n(),
            base.n()
        )));
    }
    if !allow_multi {
        if let Some(&(src, dst)) = q.entries().iter().find(|&&(r, c)| base.has_edge(r, c)) {
            return Err(ExtensionError::MultiEdge { src, dst });
        }
    }
    let added = q.edges(weight);
    let extended = base.with_added_edges(&added, allow_multi)?;
    let profile = rank_profile(&extended.adjacency(), None)?;
    if profile.nullity != 0 {
        return Err(ExtensionError::SingularExtension {
            rank: profile.rank,
        });
    }
    let provenance = Provenance {
        rows: rows.indices().to_vec(),
        cols: cols.indices().to_vec(),
        q: q.entries().iter().map(|&(r, c)| [r, c]).collect(),
        added: added.clone(),
    };
    Ok(EnvelopeExtension {
        base,
        added_edges: added,
        extended,
        provenance,
    })
}
