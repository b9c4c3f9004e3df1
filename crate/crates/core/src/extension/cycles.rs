//! Cycle covers of non-singular supports and their chaining into one Hamiltonian cycle.

use serde::{Deserialize, Serialize};

use super::ExtensionError;
use crate::linalg::RMatrix;

/// A permutation supported on non-zero entries, with its orbit decomposition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleCover {
    sigma: Vec<usize>,
    cycles: Vec<Vec<usize>>,
}

impl CycleCover {
    /// Decompose a permutation. Each cycle starts at its smallest vertex and the
    /// cycles are ordered by that vertex.
    pub fn from_permutation(sigma: Vec<usize>) -> Result<Self, ExtensionError> {
        let n = sigma.len();
        let mut hit = vec![false; n];
        for &s in &sigma {
            if s >= n || std::mem::replace(&mut hit[s], true) {
                return Err(ExtensionError::InvalidCycle(format!(
                    "{sigma:?} is not a permutation"
                )));
            }
        }
        let mut seen = vec![false; n];
        let mut cycles = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut v = start;
            while !seen[v] {
                seen[v] = true;
                cycle.push(v);
                v = sigma[v];
            }
            cycles.push(cycle);
        }
        Ok(Self { sigma, cycles })
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn cycles(&self) -> &[Vec<usize>] {
        &self.cycles
    }

    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }
}

/// Perfect matching of rows to columns on the non-zero pattern of `a`.
///
/// Augmenting paths (Kuhn's algorithm); rows and candidate columns are scanned in
/// ascending order, so the result is deterministic.
pub fn find_cycle_cover(a: &RMatrix) -> Result<CycleCover, ExtensionError> {
    if !a.is_square() {
        return Err(ExtensionError::InvalidCycle(format!(
            "expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let n = a.nrows();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| a[(i, j)] != 0.0).collect())
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; n];
    let mut visited = vec![false; n];

    fn augment(
        row: usize,
        adj: &[Vec<usize>],
        owner: &mut [Option<usize>],
        visited: &mut [bool],
    ) -> bool {
        for &col in &adj[row] {
            if visited[col] {
                continue;
            }
            visited[col] = true;
            let free = match owner[col] {
                None => true,
                Some(other) => augment(other, adj, owner, visited),
            };
            if free {
                owner[col] = Some(row);
                return true;
            }
        }
        false
    }

    for row in 0..n {
        visited.iter_mut().for_each(|v| *v = false);
        if !augment(row, &adj, &mut owner, &mut visited) {
            return Err(ExtensionError::NoPerfectMatching { row });
        }
    }
    let mut sigma = vec![0; n];
    for (col, row) in owner.iter().enumerate() {
        sigma[row.expect("perfect matching")] = col;
    }
    CycleCover::from_permutation(sigma)
}

/// Result of joining the cycles of a cover into one Hamiltonian cycle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HamiltonianChain {
    /// Vertex sequence starting at vertex 0's cycle minimum; the closing edge
    /// back to the first vertex is implied.
    pub cycle: Vec<usize>,
    pub added: Vec<(usize, usize)>,
    pub removed: Vec<(usize, usize)>,
}

/// Cut each cycle at the edge leaving its smallest vertex `u_m` (to `v_m`) and
/// re-route `u_m -> v_{m+1}`, indices taken cyclically over the cycle order.
pub fn chain_cycles(cover: &CycleCover) -> HamiltonianChain {
    let cycles = cover.cycles();
    let sigma = cover.sigma();
    if cycles.len() <= 1 {
        return HamiltonianChain {
            cycle: cycles.first().cloned().unwrap_or_default(),
            added: Vec::new(),
            removed: Vec::new(),
        };
    }
    let k = cycles.len();
    let u: Vec<usize> = cycles.iter().map(|c| c[0]).collect();
    let v: Vec<usize> = u.iter().map(|&x| sigma[x]).collect();
    let removed: Vec<(usize, usize)> = (0..k).map(|m| (u[m], v[m])).collect();
    let added: Vec<(usize, usize)> = (0..k).map(|m| (u[m], v[(m + 1) % k])).collect();

    let n = sigma.len();
    let mut cycle = Vec::with_capacity(n);
    cycle.push(u[0]);
    for m in 1..=k {
        // Enter cycle m (mod k) at v and walk until its minimum vertex.
        let target = m % k;
        let mut x = v[target];
        loop {
            if x == u[target] {
                if target != 0 {
                    cycle.push(x);
                }
                break;
            }
            cycle.push(x);
            x = sigma[x];
        }
    }
    HamiltonianChain {
        cycle,
        added,
        removed,
    }
}

/// True when `seq` visits every vertex of `0..n` exactly once.
pub fn is_vertex_permutation(seq: &[usize], n: usize) -> bool {
    let mut seen = vec![false; n];
    seq.len() == n && seq.iter().all(|&v| v < n && !std::mem::replace(&mut seen[v], true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Digraph;
    use proptest::prelude::*;

    #[test]
    fn single_cycle() {
        let a = Digraph::cycle(5).unwrap().adjacency();
        let cover = find_cycle_cover(&a).unwrap();
        assert_eq!(cover.sigma(), &[1, 2, 3, 4, 0]);
        assert_eq!(cover.cycles(), &[vec![0, 1, 2, 3, 4]]);
        let chain = chain_cycles(&cover);
        assert_eq!(chain.cycle, vec![0, 1, 2, 3, 4]);
        assert!(chain.added.is_empty() && chain.removed.is_empty());
    }

    #[test]
    fn identity_gives_loops() {
        let cover = find_cycle_cover(&RMatrix::identity(3, 3)).unwrap();
        assert_eq!(cover.cycles(), &[vec![0], vec![1], vec![2]]);
        let chain = chain_cycles(&cover);
        assert_eq!(chain.cycle, vec![0, 1, 2]);
        assert_eq!(chain.added, vec![(0, 1), (1, 2), (2, 0)]);
        assert_eq!(chain.removed, vec![(0, 0), (1, 1), (2, 2)]);
    }

    #[test]
    fn two_triangles() {
        let g = Digraph::from_pairs(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]).unwrap();
        let cover = find_cycle_cover(&g.adjacency()).unwrap();
        assert_eq!(cover.cycles(), &[vec![0, 1, 2], vec![3, 4, 5]]);
        for (i, &s) in cover.sigma().iter().enumerate() {
            assert!(g.has_edge(i, s));
        }
    }

    #[test]
    fn two_swaps_chain() {
        let cover = CycleCover::from_permutation(vec![1, 0, 3, 2]).unwrap();
        let chain = chain_cycles(&cover);
        assert_eq!(chain.cycle, vec![0, 3, 2, 1]);
        assert_eq!(chain.removed, vec![(0, 1), (2, 3)]);
        assert_eq!(chain.added, vec![(0, 3), (2, 1)]);
    }

    #[test]
    fn three_cycles() {
        let cover = CycleCover::from_permutation(vec![2, 4, 0, 5, 6, 3, 1]).unwrap();
        assert_eq!(cover.len(), 3);
        let chain = chain_cycles(&cover);
        assert_eq!(chain.added.len(), 3);
        assert!(is_vertex_permutation(&chain.cycle, 7));
    }

    #[test]
    fn singular_support_fails() {
        let a = Digraph::line(4).unwrap().adjacency();
        assert!(matches!(find_cycle_cover(&a), Err(ExtensionError::NoPerfectMatching { .. })));
        assert!(CycleCover::from_permutation(vec![0, 0]).is_err());
    }

    proptest! {
        #[test]
        fn chain_is_hamiltonian(sigma in (1usize..=12).prop_flat_map(|n| Just((0..n).collect::<Vec<_>>()).prop_shuffle())) {
            let n = sigma.len();
            let cover = CycleCover::from_permutation(sigma.clone()).unwrap();
            let chain = chain_cycles(&cover);
            prop_assert!(is_vertex_permutation(&chain.cycle, n));
            prop_assert!(chain.added.len() <= cover.len());
            let mut edges: Vec<(usize, usize)> = (0..n).map(|i| (i, sigma[i])).collect();
            edges.retain(|e| !chain.removed.contains(e));
            edges.extend(chain.added.iter().copied());
            for i in 0..n {
                let e = (chain.cycle[i], chain.cycle[(i + 1) % n]);
                prop_assert!(edges.contains(&e), "missing {:?}", e);
            }
        }
    }
}
