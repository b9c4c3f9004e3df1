//! Cayley digraphs on `Z_n` and the embedding of a Hamiltonian digraph into one.

use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::cycles::is_vertex_permutation;
use super::ExtensionError;
use crate::dft;
use crate::graph::{Digraph, Edge};
use crate::spectral::{EigenSystem, Normalization};

/// Residues defining `Cay(Z_n, gamma)`: `m -> m + k (mod n)` for each `k`.
///
/// Residue 0 (a loop at every vertex) only arises from embedding a graph with
/// self-loops.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConnectionSet {
    n: usize,
    gamma: BTreeSet<usize>,
}

impl ConnectionSet {
    /// Residues are reduced mod `n`; the set must be non-empty and `n >= 1`.
    pub fn new(n: usize, residues: impl IntoIterator<Item = usize>) -> Result<Self, ExtensionError> {
        if n == 0 {
            return Err(ExtensionError::InvalidConnectionSet("modulus must be positive".into()));
        }
        let gamma: BTreeSet<usize> = residues.into_iter().map(|k| k % n).collect();
        if gamma.is_empty() {
            return Err(ExtensionError::InvalidConnectionSet("empty connection set".into()));
        }
        Ok(Self { n, gamma })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn residues(&self) -> impl Iterator<Item = usize> + '_ {
        self.gamma.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    pub fn contains(&self, k: usize) -> bool {
        self.gamma.contains(&(k % self.n))
    }
}

/// `A[m][(m + k) mod n] = 1` for every `k` in the set.
pub fn cayley_adjacency(gamma: &ConnectionSet) -> Digraph {
    let n = gamma.n();
    let edges = (0..n).flat_map(|m| gamma.residues().map(move |k| Edge::unit(m, (m + k) % n)));
    Digraph::new(n, edges).expect("cayley edges are in range and distinct")
}

/// `lambda_j = sum_{k in gamma} exp(2 pi i j k / n)`, indexed by `j`.
pub fn cayley_spectrum(gamma: &ConnectionSet) -> Vec<Complex64> {
    let n = gamma.n();
    (0..n)
        .map(|j| gamma.residues().map(|k| dft::root_of_unity(j * k, n, 1.0)).sum())
        .collect()
}

/// Closed-form eigensystem: the unitary inverse DFT diagonalizes every Cayley
/// digraph on `Z_n`. Eigenvalues are in harmonic order, not sorted.
pub fn cayley_eigensystem(gamma: &ConnectionSet) -> EigenSystem {
    EigenSystem {
        values: cayley_spectrum(gamma),
        vectors: dft::unitary_idft(gamma.n()),
        normalization: Normalization::ClosedForm,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CayleyEmbedding {
    /// Vertex `v` of the input becomes `relabeling[v]`.
    pub relabeling: Vec<usize>,
    pub gamma: ConnectionSet,
}

/// Relabel so that `ham` becomes `0 -> 1 -> ... -> n-1 -> 0`, then collect the
/// forward differences `(b - a) mod n` of all relabelled edges together with 1.
/// Containment of the relabelled graph in the Cayley digraph is verified.
pub fn cayley_embedding(g: &Digraph, ham: &[usize]) -> Result<CayleyEmbedding, ExtensionError> {
    let n = g.n();
    if n < 2 {
        return Err(ExtensionError::InvalidCycle("need at least two vertices".into()));
    }
    if !is_vertex_permutation(ham, n) {
        return Err(ExtensionError::InvalidCycle(format!(
            "{ham:?} does not visit every vertex exactly once"
        )));
    }
    for i in 0..n {
        let (a, b) = (ham[i], ham[(i + 1) % n]);
        if !g.has_edge(a, b) {
            return Err(ExtensionError::InvalidCycle(format!("missing cycle edge {a} -> {b}")));
        }
    }
    let mut relabeling = vec![0; n];
    for (i, &v) in ham.iter().enumerate() {
        relabeling[v] = i;
    }
    let diffs = g
        .edges()
        .iter()
        .map(|e| (relabeling[e.dst] + n - relabeling[e.src]) % n)
        .chain(std::iter::once(1));
    let gamma = ConnectionSet::new(n, diffs)?;
    let relabeled = g.relabeled(&relabeling)?;
    if !relabeled.is_subgraph_of(&cayley_adjacency(&gamma)) {
        return Err(ExtensionError::InvalidCycle(
            "relabelled graph is not contained in its Cayley digraph".into(),
        ));
    }
    Ok(CayleyEmbedding { relabeling, gamma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::to_complex;
    use crate::spectral::eigendecompose;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn embeddings() {
        let cyc = Digraph::cycle(6).unwrap();
        let e = cayley_embedding(&cyc, &[0, 1, 2, 3, 4, 5]).unwrap();
        assert_eq!(e.gamma.residues().collect::<Vec<_>>(), vec![1]);

        let g = cyc.with_added_edges(&[Edge::unit(0, 2)], false).unwrap();
        let e = cayley_embedding(&g, &[0, 1, 2, 3, 4, 5]).unwrap();
        assert_eq!(e.gamma.residues().collect::<Vec<_>>(), vec![1, 2]);

        let g = Digraph::cycle(5).unwrap().with_added_edges(&[Edge::unit(3, 1)], false).unwrap();
        let e = cayley_embedding(&g, &[0, 1, 2, 3, 4]).unwrap();
        assert_eq!(e.gamma.residues().collect::<Vec<_>>(), vec![1, 3]);
        let cay = cayley_adjacency(&e.gamma);
        assert!(cay.has_edge(3, 1) && cay.has_edge(0, 3));
        assert!(g.is_subgraph_of(&cay));
    }

    #[test]
    fn rejects_non_hamiltonian() {
        let g = Digraph::cycle(4).unwrap();
        assert!(cayley_embedding(&g, &[0, 2, 1, 3]).is_err());
        assert!(cayley_embedding(&g, &[0, 1, 2]).is_err());
        assert!(cayley_embedding(&g, &[0, 1, 1, 3]).is_err());
    }

    #[test]
    fn relabeled_cycle() {
        // 2 -> 0 -> 3 -> 1 -> 2 plus a chord 0 -> 1.
        let g = Digraph::from_pairs(4, &[(2, 0), (0, 3), (3, 1), (1, 2), (0, 1)]).unwrap();
        let e = cayley_embedding(&g, &[2, 0, 3, 1]).unwrap();
        assert_eq!(e.relabeling, vec![1, 3, 0, 2]);
        assert_eq!(e.gamma.residues().collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn adjacency_shapes() {
        let c4 = cayley_adjacency(&ConnectionSet::new(4, [1]).unwrap());
        assert_eq!(c4, Digraph::cycle(4).unwrap());
        let two = cayley_adjacency(&ConnectionSet::new(4, [1, 2]).unwrap());
        assert!(two.out_degrees().iter().all(|&d| d == 2));
        let full = cayley_adjacency(&ConnectionSet::new(5, 1..5).unwrap());
        assert_eq!(full.edge_count(), 20);
        assert!((0..5).all(|v| !full.has_edge(v, v)));
    }

    #[test]
    fn closed_form_spectra() {
        let s = cayley_spectrum(&ConnectionSet::new(4, [1]).unwrap());
        for (got, want) in s.iter().zip([c(1., 0.), c(0., 1.), c(-1., 0.), c(0., -1.)]) {
            assert!((got - want).norm() < 1e-14);
        }
        for n in 2..10 {
            let s = cayley_spectrum(&ConnectionSet::new(n, 1..n).unwrap());
            assert!((s[0] - c((n - 1) as f64, 0.)).norm() < 1e-12);
            assert!(s[1..].iter().all(|z| (z - c(-1., 0.)).norm() < 1e-12));
        }
        // Direct check: C times each DFT column equals the column scaled.
        let gamma = ConnectionSet::new(6, [1, 2]).unwrap();
        let sys = cayley_eigensystem(&gamma);
        let a = to_complex(&cayley_adjacency(&gamma).adjacency());
        assert!(sys.max_residual(&a) < 1e-13);
    }

    /// Greedy nearest matching is exact here because spectra are compared within
    /// a tolerance far below their separation; repeated values match either way.
    fn same_multiset(x: &[Complex64], y: &[Complex64], tol: f64) -> bool {
        let mut used = vec![false; y.len()];
        x.len() == y.len()
            && x.iter().all(|a| {
                let best = (0..y.len())
                    .filter(|&j| !used[j])
                    .min_by(|&i, &j| (a - y[i]).norm().total_cmp(&(a - y[j]).norm()));
                match best {
                    Some(j) if (a - y[j]).norm() <= tol => {
                        used[j] = true;
                        true
                    }
                    _ => false,
                }
            })
    }

    #[test]
    fn spectra_match_dense_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..40 {
            let n = rng.random_range(2..=32);
            let gamma = ConnectionSet::new(n, (1..n).filter(|_| rng.random_bool(0.3)).chain([1])).unwrap();
            let a = to_complex(&cayley_adjacency(&gamma).adjacency());
            let dense = eigendecompose(&a).unwrap();
            assert!(same_multiset(&cayley_spectrum(&gamma), &dense.values, 1e-8), "n={n}");
        }
    }
}
