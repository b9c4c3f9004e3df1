//! Weighted directed graphs, graph signals and rank profiles.
//!
//! Orientation is fixed throughout the crate: `A[src][dst]` holds the weight of the
//! edge `src -> dst`, so row `r` lists the out-edges of vertex `r`.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, RMatrix};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: vertex index {index} out of range for n = {n}")]
    IndexOutOfRange { line: usize, index: usize, n: usize },
    #[error("line {line}: zero weight on edge {src} -> {dst}")]
    ZeroWeight { line: usize, src: usize, dst: usize },
    #[error("line {line}: duplicate edge {src} -> {dst}")]
    DuplicateEdge { line: usize, src: usize, dst: usize },
    #[error("graph must have at least one vertex")]
    Empty,
    #[error("expected a square matrix, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },
    #[error("signal length {got} does not match graph size {expected}")]
    SignalLength { expected: usize, got: usize },
    #[error("invalid signal: {0}")]
    Signal(String),
    #[error("{0} labels given for {1} vertices")]
    LabelCount(usize, usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = GraphError> = std::result::Result<T, E>;

/// A single weighted edge `src -> dst`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub weight: f64,
}

impl Edge {
    pub fn new(src: usize, dst: usize, weight: f64) -> Self {
        Self { src, dst, weight }
    }

    pub fn unit(src: usize, dst: usize) -> Self {
        Self::new(src, dst, 1.0)
    }
}

impl Serialize for Edge {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        (self.src, self.dst, self.weight).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Edge {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let (src, dst, weight) = <(usize, usize, f64)>::deserialize(d)?;
        Ok(Self { src, dst, weight })
    }
}

/// Edge-list file layouts accepted by [`load_edge_list`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdgeListFormat {
    /// Whitespace separated `src dst [weight]`, `#` comments.
    #[default]
    Plain,
    /// Header `src,dst,weight`.
    Csv,
    /// Canonical JSON `{"n": .., "edges": [[src, dst, w], ..]}`.
    Json,
}

impl FromStr for EdgeListFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "plain" | "txt" | "edges" => Ok(Self::Plain),
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown edge-list format `{other}`")),
        }
    }
}

impl EdgeListFormat {
    /// Guess the format from a file extension, defaulting to plain.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => Self::Csv,
            Some("json") => Self::Json,
            _ => Self::Plain,
        }
    }
}

/// Vertex-indexed weighted digraph. Immutable once built.
///
/// Edges are stored sorted by `(src, dst)` with at most one edge per pair and
/// non-zero weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DigraphRepr", into = "DigraphRepr")]
pub struct Digraph {
    n: usize,
    edges: Vec<Edge>,
    labels: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct DigraphRepr {
    n: usize,
    edges: Vec<Edge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl TryFrom<DigraphRepr> for Digraph {
    type Error = GraphError;

    fn try_from(r: DigraphRepr) -> Result<Self> {
        let g = Digraph::new(r.n, r.edges)?;
        match r.labels {
            Some(labels) => g.with_labels(labels),
            None => Ok(g),
        }
    }
}

impl From<Digraph> for DigraphRepr {
    fn from(g: Digraph) -> Self {
        Self {
            n: g.n,
            edges: g.edges,
            labels: g.labels,
        }
    }
}

impl Digraph {
    /// Build a digraph, validating indices, weights and uniqueness.
    ///
    /// The `line` reported in errors is the 1-based position in `edges`.
    pub fn new(n: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let numbered = edges.into_iter().enumerate().map(|(i, e)| (i + 1, e));
        Self::from_numbered(n, numbered)
    }

    fn from_numbered(n: usize, edges: impl IntoIterator<Item = (usize, Edge)>) -> Result<Self> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut map = BTreeMap::new();
        for (line, e) in edges {
            for index in [e.src, e.dst] {
                if index >= n {
                    return Err(GraphError::IndexOutOfRange { line, index, n });
                }
            }
            if e.weight == 0.0 || !e.weight.is_finite() {
                return Err(GraphError::ZeroWeight {
                    line,
                    src: e.src,
                    dst: e.dst,
                });
            }
            if map.insert((e.src, e.dst), e.weight).is_some() {
                return Err(GraphError::DuplicateEdge {
                    line,
                    src: e.src,
                    dst: e.dst,
                });
            }
        }
        let edges = map
            .into_iter()
            .map(|((src, dst), weight)| Edge { src, dst, weight })
            .collect();
        Ok(Self {
            n,
            edges,
            labels: None,
        })
    }

    /// Unweighted digraph from `(src, dst)` pairs.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        Self::new(n, pairs.iter().map(|&(s, d)| Edge::unit(s, d)))
    }

    /// Digraph whose edges are the non-zero entries of a square matrix.
    pub fn from_adjacency(a: &RMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(GraphError::NonSquare {
                rows: a.nrows(),
                cols: a.ncols(),
            });
        }
        let n = a.nrows();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if a[(i, j)] != 0.0 {
                    edges.push(Edge::new(i, j, a[(i, j)]));
                }
            }
        }
        Self::new(n, edges)
    }

    /// Directed line `0 -> 1 -> ... -> n-1`; its adjacency is the backward shift.
    pub fn line(n: usize) -> Result<Self> {
        Self::new(n, (1..n).map(|i| Edge::unit(i - 1, i)))
    }

    /// Directed cycle `0 -> 1 -> ... -> n-1 -> 0`.
    pub fn cycle(n: usize) -> Result<Self> {
        Self::new(n, (0..n).map(|i| Edge::unit(i, (i + 1) % n)))
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(GraphError::LabelCount(labels.len(), self.n));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    fn position(&self, src: usize, dst: usize) -> std::result::Result<usize, usize> {
        self.edges
            .binary_search_by(|e| (e.src, e.dst).cmp(&(src, dst)))
    }

    pub fn weight(&self, src: usize, dst: usize) -> Option<f64> {
        self.position(src, dst).ok().map(|i| self.edges[i].weight)
    }

    pub fn has_edge(&self, src: usize, dst: usize) -> bool {
        self.position(src, dst).is_ok()
    }

    /// Out-neighbours of `v` in ascending order.
    pub fn successors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        let start = self.edges.partition_point(|e| e.src < v);
        self.edges[start..]
            .iter()
            .take_while(move |e| e.src == v)
            .map(|e| e.dst)
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for e in &self.edges {
            d[e.src] += 1;
        }
        d
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for e in &self.edges {
            d[e.dst] += 1;
        }
        d
    }

    /// Dense adjacency view, `A[src][dst] = weight`.
    pub fn adjacency(&self) -> RMatrix {
        let mut a = RMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            a[(e.src, e.dst)] = e.weight;
        }
        a
    }

    /// Graph with extra edges. Colliding edges are an error unless `allow_multi`
    /// is set, in which case their weights are summed (a pair whose weights
    /// cancel is dropped).
    pub fn with_added_edges(&self, added: &[Edge], allow_multi: bool) -> Result<Self> {
        let mut map: BTreeMap<(usize, usize), f64> = self
            .edges
            .iter()
            .map(|e| ((e.src, e.dst), e.weight))
            .collect();
        for (i, e) in added.iter().enumerate() {
            let line = i + 1;
            for index in [e.src, e.dst] {
                if index >= self.n {
                    return Err(GraphError::IndexOutOfRange {
                        line,
                        index,
                        n: self.n,
                    });
                }
            }
            if e.weight == 0.0 {
                return Err(GraphError::ZeroWeight {
                    line,
                    src: e.src,
                    dst: e.dst,
                });
            }
            match map.get_mut(&(e.src, e.dst)) {
                Some(w) if allow_multi => *w += e.weight,
                Some(_) => {
                    return Err(GraphError::DuplicateEdge {
                        line,
                        src: e.src,
                        dst: e.dst,
                    })
                }
                None => {
                    map.insert((e.src, e.dst), e.weight);
                }
            }
        }
        let edges = map
            .into_iter()
            .filter(|&(_, w)| w != 0.0)
            .map(|((src, dst), weight)| Edge { src, dst, weight });
        let mut g = Self::new(self.n, edges)?;
        g.labels = self.labels.clone();
        Ok(g)
    }

    /// Vertices relabelled by `perm`: vertex `v` becomes `perm[v]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        assert_eq!(perm.len(), self.n, "permutation length must equal n");
        Self::new(
            self.n,
            self.edges
                .iter()
                .map(|e| Edge::new(perm[e.src], perm[e.dst], e.weight)),
        )
    }

    /// Every edge reversed; the adjacency matrix is transposed.
    pub fn reversed(&self) -> Self {
        let mut g = Self::new(self.n, self.edges.iter().map(|e| Edge::new(e.dst, e.src, e.weight)))
            .expect("reversal keeps edges distinct and in range");
        g.labels = self.labels.clone();
        g
    }

    /// True when every edge of `self` is also an edge of `other`.
    pub fn is_subgraph_of(&self, other: &Digraph) -> bool {
        self.n == other.n && self.edges.iter().all(|e| other.has_edge(e.src, e.dst))
    }

    /// Canonical JSON `{"n": .., "edges": [[src, dst, w], ..]}`, edges sorted.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("digraph serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Load an edge list, inferring `n` as one past the largest index unless the
/// plain file carries an `# n = <N>` directive (or JSON/CSV supply it).
pub fn load_edge_list(path: impl AsRef<Path>, format: EdgeListFormat) -> Result<Digraph> {
    let text = fs::read_to_string(path.as_ref())?;
    parse_edge_list(&text, format, None)
}

/// Like [`load_edge_list`] with a fixed vertex count; indices `>= n` are errors.
pub fn load_edge_list_sized(
    path: impl AsRef<Path>,
    format: EdgeListFormat,
    n: usize,
) -> Result<Digraph> {
    let text = fs::read_to_string(path.as_ref())?;
    parse_edge_list(&text, format, Some(n))
}

pub fn parse_edge_list(text: &str, format: EdgeListFormat, n: Option<usize>) -> Result<Digraph> {
    match format {
        EdgeListFormat::Plain => parse_plain(text, n),
        EdgeListFormat::Csv => parse_csv(text, n),
        EdgeListFormat::Json => {
            let g = Digraph::from_json(text)?;
            match n {
                Some(n) if n != g.n => Err(GraphError::Parse {
                    line: 1,
                    msg: format!("JSON declares n = {} but {n} was requested", g.n),
                }),
                _ => Ok(g),
            }
        }
    }
}

fn parse_index(tok: &str, line: usize, what: &str) -> Result<usize> {
    tok.parse::<usize>().map_err(|_| GraphError::Parse {
        line,
        msg: format!("invalid {what} index `{tok}`"),
    })
}

fn parse_weight(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>().map_err(|_| GraphError::Parse {
        line,
        msg: format!("invalid weight `{tok}`"),
    })
}

fn directive_n(comment: &str) -> Option<usize> {
    let body = comment.trim_start_matches('#').trim();
    let (key, value) = body.split_once(['=', ':'])?;
    matches!(key.trim(), "n" | "nodes" | "vertices")
        .then(|| value.trim().parse().ok())
        .flatten()
}

fn finish(records: Vec<(usize, Edge)>, declared: Option<usize>) -> Result<Digraph> {
    let n = match declared {
        Some(n) => n,
        None => records
            .iter()
            .map(|(_, e)| e.src.max(e.dst) + 1)
            .max()
            .unwrap_or(0),
    };
    Digraph::from_numbered(n, records)
}

fn parse_plain(text: &str, n: Option<usize>) -> Result<Digraph> {
    let mut declared = n;
    let mut records = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let (content, comment) = match raw.find('#') {
            Some(p) => (&raw[..p], Some(&raw[p..])),
            None => (raw, None),
        };
        if let Some(c) = comment {
            if declared.is_none() {
                declared = directive_n(c);
            }
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        match toks.len() {
            0 => continue,
            2 | 3 => {
                let src = parse_index(toks[0], line, "source")?;
                let dst = parse_index(toks[1], line, "destination")?;
                let weight = toks.get(2).map_or(Ok(1.0), |t| parse_weight(t, line))?;
                records.push((line, Edge { src, dst, weight }));
            }
            k => {
                return Err(GraphError::Parse {
                    line,
                    msg: format!("expected `src dst [weight]`, found {k} fields"),
                })
            }
        }
    }
    finish(records, declared)
}

fn parse_csv(text: &str, n: Option<usize>) -> Result<Digraph> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (Some(si), Some(di)) = (col("src"), col("dst")) else {
        return Err(GraphError::Parse {
            line: 1,
            msg: "CSV header must contain `src,dst[,weight]`".into(),
        });
    };
    let wi = col("weight");
    let mut records = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec?;
        let field = |k: usize| {
            rec.get(k).ok_or_else(|| GraphError::Parse {
                line,
                msg: "missing field".into(),
            })
        };
        let src = parse_index(field(si)?, line, "source")?;
        let dst = parse_index(field(di)?, line, "destination")?;
        let weight = match wi.and_then(|k| rec.get(k)) {
            Some(t) if !t.is_empty() => parse_weight(t, line)?,
            _ => 1.0,
        };
        records.push((line, Edge { src, dst, weight }));
    }
    finish(records, n)
}

/// Graph signal: one complex value per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal(pub Vec<Complex64>);

impl Signal {
    pub fn zeros(n: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![Complex64::new(1.0, 0.0); n])
    }

    /// Unit impulse `delta[k]`.
    pub fn impulse(n: usize, k: usize) -> Self {
        let mut s = Self::zeros(n);
        s.0[k] = Complex64::new(1.0, 0.0);
        s
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        linalg::vec_norm(&self.0)
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self(self.0.iter().map(|z| z * c).collect())
    }

    /// Euclidean distance to another signal of the same length.
    pub fn distance(&self, other: &Signal) -> f64 {
        assert_eq!(self.len(), other.len(), "signal lengths differ");
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn check_len(&self, n: usize) -> Result<()> {
        if self.len() == n {
            Ok(())
        } else {
            Err(GraphError::SignalLength {
                expected: n,
                got: self.len(),
            })
        }
    }

    /// Parse `delta:k`, `ones`, a JSON array of `[re, im]` pairs, or a
    /// comma-separated list of reals.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        let t = text.trim();
        let s = if let Some(k) = t.strip_prefix("delta:") {
            let k: usize = k
                .trim()
                .parse()
                .map_err(|_| GraphError::Signal(format!("bad impulse index in `{t}`")))?;
            if k >= n {
                return Err(GraphError::Signal(format!("impulse index {k} >= n = {n}")));
            }
            Self::impulse(n, k)
        } else if t == "ones" {
            Self::ones(n)
        } else if t.starts_with('[') {
            serde_json::from_str(t)?
        } else {
            let vals: std::result::Result<Vec<f64>, _> =
                t.split(',').map(|v| v.trim().parse::<f64>()).collect();
            Self::from_real(&vals.map_err(|e| GraphError::Signal(e.to_string()))?)
        };
        s.check_len(n)?;
        Ok(s)
    }
}

impl Serialize for Signal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter().map(|z| [z.re, z.im]))
    }
}

impl<'de> Deserialize<'de> for Signal {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(Self(
            pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect(),
        ))
    }
}

impl fmt::Display for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serde_json::to_string(self).map_err(|_| fmt::Error)?)
    }
}

/// Numerical rank and nullity of a square matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankProfile {
    pub rank: usize,
    pub nullity: usize,
    pub tolerance: f64,
}

impl RankProfile {
    pub fn n(&self) -> usize {
        self.rank + self.nullity
    }
}

/// Rank via singular values; the default threshold is `n * eps * sigma_max`.
pub fn rank_profile(a: &RMatrix, tol: Option<f64>) -> Result<RankProfile> {
    if !a.is_square() {
        return Err(GraphError::NonSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let n = a.nrows();
    let sv = linalg::singular_values(a);
    let smax = sv.first().copied().unwrap_or(0.0);
    let tolerance = tol.unwrap_or_else(|| linalg::default_rank_tol(n, n, smax));
    let rank = sv.iter().filter(|&&s| s > tolerance).count();
    Ok(RankProfile {
        rank,
        nullity: n - rank,
        tolerance,
    })
}
