//! Structural metrics used to compare an extension against its base graph.

use std::collections::BTreeMap;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Digraph;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("PageRank did not converge in {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("rankings have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least two items to rank, got {0}")]
    TooShort(usize),
    #[error("a ranking is constant; tau is undefined")]
    ConstantRanking,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PageRankOptions {
    pub damping: f64,
    /// L1 change between iterates at which iteration stops.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PageRankOptions {
    fn default() -> Self {
        Self {
            damping: 0.85,
            tol: 1e-12,
            max_iter: 1000,
        }
    }
}

/// Unweighted PageRank by power iteration. Vertices without out-edges spread
/// their mass uniformly over all vertices.
pub fn pagerank(g: &Digraph, opts: &PageRankOptions) -> Result<Vec<f64>, MetricsError> {
    let n = g.n();
    if n == 0 {
        return Err(MetricsError::InvalidParameter("empty graph".into()));
    }
    if !(0.0..=1.0).contains(&opts.damping) {
        return Err(MetricsError::InvalidParameter(format!("damping {}", opts.damping)));
    }
    let out = g.out_degrees();
    let nf = n as f64;
    let d = opts.damping;
    let mut pr = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..opts.max_iter {
        let dangling: f64 = (0..n).filter(|&v| out[v] == 0).map(|v| pr[v]).sum();
        let base = (1.0 - d) / nf + d * dangling / nf;
        next.iter_mut().for_each(|x| *x = base);
        for e in g.edges() {
            next[e.dst] += d * pr[e.src] / out[e.src] as f64;
        }
        residual = pr.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut pr, &mut next);
        if residual < opts.tol {
            let total: f64 = pr.iter().sum();
            pr.iter_mut().for_each(|x| *x /= total);
            return Ok(pr);
        }
    }
    Err(MetricsError::NonConvergence {
        iterations: opts.max_iter,
        residual,
    })
}

/// Values rounded to multiples of `quantum`, so float noise does not break ties.
pub fn quantize(values: &[f64], quantum: f64) -> Vec<f64> {
    values.iter().map(|v| (v / quantum).round() * quantum).collect()
}

/// Kendall's tau-b over all pairs.
pub fn kendall_tau(a: &[f64], b: &[f64]) -> Result<f64, MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::LengthMismatch(a.len(), b.len()));
    }
    let n = a.len();
    if n < 2 {
        return Err(MetricsError::TooShort(n));
    }
    let (mut concordant, mut discordant, mut ties_a, mut ties_b) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let da = a[i].total_cmp(&a[j]) as i64;
            let db = b[i].total_cmp(&b[j]) as i64;
            match (da, db) {
                (0, 0) => {
                    ties_a += 1;
                    ties_b += 1;
                }
                (0, _) => ties_a += 1,
                (_, 0) => ties_b += 1,
                _ if da == db => concordant += 1,
                _ => discordant += 1,
            }
        }
    }
    let pairs = (n * (n - 1) / 2) as i64;
    let denom = (((pairs - ties_a) * (pairs - ties_b)) as f64).sqrt();
    if denom == 0.0 {
        return Err(MetricsError::ConstantRanking);
    }
    Ok((concordant - discordant) as f64 / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Motif {
    /// `a -> b -> c -> a`.
    #[serde(rename = "3cycle")]
    Cycle3,
    /// `a -> b -> c` together with the shortcut `a -> c`.
    #[serde(rename = "ffl")]
    FeedForward,
}

impl Motif {
    pub const ALL: [Motif; 2] = [Motif::Cycle3, Motif::FeedForward];

    pub fn name(self) -> &'static str {
        match self {
            Motif::Cycle3 => "3cycle",
            Motif::FeedForward => "ffl",
        }
    }

    fn arcs(self) -> [(usize, usize); 3] {
        match self {
            Motif::Cycle3 => [(0, 1), (1, 2), (2, 0)],
            Motif::FeedForward => [(0, 1), (1, 2), (0, 2)],
        }
    }
}

impl FromStr for Motif {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "3cycle" | "cycle3" | "directed-3-cycle" => Ok(Motif::Cycle3),
            "ffl" | "feed-forward-loop" | "feedforward" => Ok(Motif::FeedForward),
            other => Err(format!("unknown motif {other:?} (expected 3cycle or ffl)")),
        }
    }
}

impl std::fmt::Display for Motif {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

// Arc bits of a vertex triple (x0, x1, x2).
const ARC_BITS: [(usize, usize); 6] = [(0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1)];

fn bit(a: usize, b: usize) -> u8 {
    1 << ARC_BITS.iter().position(|&p| p == (a, b)).expect("distinct local vertices")
}

/// For each motif and 6-bit triple code: (induced match, contains as subgraph).
fn motif_table() -> &'static [[(bool, bool); 64]; 2] {
    static TABLE: OnceLock<[[(bool, bool); 64]; 2]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let mut table = [[(false, false); 64]; 2];
        for (mi, motif) in Motif::ALL.iter().enumerate() {
            for p in &perms {
                let code = motif.arcs().iter().fold(0u8, |acc, &(a, b)| acc | bit(p[a], p[b]));
                for sup in 0..64u8 {
                    if sup & code == code {
                        table[mi][sup as usize].1 = true;
                    }
                }
                table[mi][code as usize].0 = true;
            }
        }
        table
    })
}

/// Number of vertex triples where `motif` occurs: as the exact induced pattern
/// when `induced`, otherwise as a (not necessarily induced) subgraph. Each vertex
/// set counts once; loops and weights are ignored.
pub fn motif_count(g: &Digraph, motif: Motif, induced: bool) -> u64 {
    let n = g.n();
    let mut adj = vec![false; n * n];
    for e in g.edges() {
        if e.src != e.dst {
            adj[e.src * n + e.dst] = true;
        }
    }
    let table = &motif_table()[Motif::ALL.iter().position(|&m| m == motif).expect("listed")];
    let mut count = 0;
    for x in 0..n {
        for y in x + 1..n {
            for z in y + 1..n {
                let v = [x, y, z];
                let code = ARC_BITS
                    .iter()
                    .enumerate()
                    .filter(|&(_, &(a, b))| adj[v[a] * n + v[b]])
                    .fold(0usize, |acc, (i, _)| acc | (1 << i));
                let (exact, contains) = table[code];
                if (induced && exact) || (!induced && contains) {
                    count += 1;
                }
            }
        }
    }
    count
}

/// Induced count divided by `C(n, 3)`.
pub fn motif_density(g: &Digraph, motif: Motif) -> f64 {
    let n = g.n() as u64;
    if n < 3 {
        return 0.0;
    }
    let placements = n * (n - 1) * (n - 2) / 6;
    motif_count(g, motif, true) as f64 / placements as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorePeriphery {
    pub core: usize,
    pub periphery: usize,
    pub scores: Vec<f64>,
}

/// `S_i = (k_i - <k>) / (k_i + <k>)` with `k_i` the total (in + out) degree;
/// core iff `S_i > 0`. All scores are 0 for an edgeless graph.
pub fn core_periphery_counts(g: &Digraph) -> CorePeriphery {
    let out = g.out_degrees();
    let inn = g.in_degrees();
    let k: Vec<f64> = out.iter().zip(&inn).map(|(a, b)| (a + b) as f64).collect();
    let mean = k.iter().sum::<f64>() / k.len().max(1) as f64;
    let scores: Vec<f64> = k
        .iter()
        .map(|&ki| if ki + mean == 0.0 { 0.0 } else { (ki - mean) / (ki + mean) })
        .collect();
    let core = scores.iter().filter(|&&s| s > 0.0).count();
    CorePeriphery {
        core,
        periphery: scores.len() - core,
        scores,
    }
}

/// Undirected neighbor sets without loops, sorted.
fn undirected_neighbors(g: &Digraph) -> Vec<Vec<usize>> {
    let mut nb = vec![Vec::new(); g.n()];
    for e in g.edges() {
        if e.src != e.dst {
            nb[e.src].push(e.dst);
            nb[e.dst].push(e.src);
        }
    }
    for list in &mut nb {
        list.sort_unstable();
        list.dedup();
    }
    nb
}

/// `C_i = 2 e_i / (k_i (k_i - 1))` on the underlying simple undirected graph;
/// 0 when `k_i < 2`.
pub fn local_clustering(g: &Digraph) -> Vec<f64> {
    let nb = undirected_neighbors(g);
    nb.iter()
        .map(|list| {
            let k = list.len();
            if k < 2 {
                return 0.0;
            }
            let mut links = 0usize;
            for (i, &u) in list.iter().enumerate() {
                for &w in &list[i + 1..] {
                    if nb[u].binary_search(&w).is_ok() {
                        links += 1;
                    }
                }
            }
            2.0 * links as f64 / (k * (k - 1)) as f64
        })
        .collect()
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// Structural summary of one graph, optionally ranked against a reference PageRank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuralReport {
    pub pagerank: Vec<f64>,
    /// `None` when either ranking is constant.
    pub kendall_tau: Option<f64>,
    pub motif_densities: BTreeMap<String, f64>,
    pub core_count: usize,
    pub periphery_count: usize,
    pub local_clustering: Vec<f64>,
    pub mean_clustering: f64,
}

/// PageRank ties closer than this are treated as equal before ranking.
pub const PAGERANK_QUANTUM: f64 = 1e-10;

pub fn structural_report(
    g: &Digraph,
    reference_pagerank: Option<&[f64]>,
    motifs: &[Motif],
    opts: &PageRankOptions,
) -> Result<StructuralReport, MetricsError> {
    let pr = pagerank(g, opts)?;
    let kendall_tau = match reference_pagerank {
        Some(reference) => match kendall_tau(
            &quantize(&pr, PAGERANK_QUANTUM),
            &quantize(reference, PAGERANK_QUANTUM),
        ) {
            Ok(t) => Some(t),
            Err(MetricsError::ConstantRanking) => None,
            Err(e) => return Err(e),
        },
        None => None,
    };
    let cp = core_periphery_counts(g);
    let clustering = local_clustering(g);
    Ok(StructuralReport {
        pagerank: pr,
        kendall_tau,
        motif_densities: motifs
            .iter()
            .map(|&m| (m.name().to_string(), motif_density(g, m)))
            .collect(),
        core_count: cp.core,
        periphery_count: cp.periphery,
        mean_clustering: mean(&clustering),
        local_clustering: clustering,
    })
}
