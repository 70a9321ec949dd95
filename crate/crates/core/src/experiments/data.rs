use std::collections::BTreeSet;
use std::path::Path;

use rand::Rng;

use crate::rng::stream_rng;
use crate::{Error, Result};

/// Non-negative counts, optionally with a publicly known total.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    counts: Vec<i64>,
    public_total: Option<i64>,
}

impl Histogram {
    pub fn new(counts: Vec<i64>, public_total: Option<i64>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::Input("histogram has no columns".into()));
        }
        if let Some((i, c)) = counts.iter().enumerate().find(|(_, &c)| c < 0) {
            return Err(Error::Input(format!("column {i} has negative count {c}")));
        }
        if let Some(s) = public_total {
            let sum: i64 = counts.iter().sum();
            if sum != s {
                return Err(Error::Input(format!(
                    "declared total {s} does not match the column sum {sum}"
                )));
            }
        }
        Ok(Histogram {
            counts,
            public_total,
        })
    }

    /// Declares the column sum as public.
    pub fn with_public_total(self) -> Self {
        let s = self.counts.iter().sum();
        Histogram {
            public_total: Some(s),
            ..self
        }
    }

    pub fn counts(&self) -> &[i64] {
        &self.counts
    }

    pub fn public_total(&self) -> Option<i64> {
        self.public_total
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// A simple undirected graph on nodes `0..nodes`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeListGraph {
    nodes: usize,
    edges: Vec<(usize, usize)>,
    dropped_duplicates: usize,
    dropped_self_loops: usize,
}

impl EdgeListGraph {
    /// Builds the graph, dropping self-loops and repeated edges (in either
    /// orientation).
    pub fn from_edges(
        nodes: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut kept = Vec::new();
        let (mut dropped_duplicates, mut dropped_self_loops) = (0, 0);
        for (u, v) in edges {
            if u >= nodes || v >= nodes {
                return Err(Error::Input(format!(
                    "edge ({u}, {v}) outside {nodes} nodes"
                )));
            }
            if u == v {
                dropped_self_loops += 1;
                continue;
            }
            let key = (u.min(v), u.max(v));
            if seen.insert(key) {
                kept.push(key);
            } else {
                dropped_duplicates += 1;
            }
        }
        Ok(EdgeListGraph {
            nodes,
            edges: kept,
            dropped_duplicates,
            dropped_self_loops,
        })
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn dropped_duplicates(&self) -> usize {
        self.dropped_duplicates
    }

    pub fn dropped_self_loops(&self) -> usize {
        self.dropped_self_loops
    }

    pub fn degrees(&self) -> Vec<i64> {
        let mut d = vec![0i64; self.nodes];
        for &(u, v) in &self.edges {
            d[u] += 1;
            d[v] += 1;
        }
        d
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Non-empty lines that are not `#` comments, with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// One non-negative integer count per line; `#` lines are comments.
pub fn ingest_histogram(path: impl AsRef<Path>) -> Result<Histogram> {
    let path = path.as_ref();
    parse_histogram(&read(path)?, path)
}

/// [`ingest_histogram`] on text already in memory; `path` is only used in
/// error messages.
pub fn parse_histogram(text: &str, path: &Path) -> Result<Histogram> {
    let mut counts = Vec::new();
    for (line, l) in content_lines(text) {
        let v: i64 = l.parse().map_err(|_| {
            parse_error(
                path,
                line,
                format!("expected an integer count, found {l:?}"),
            )
        })?;
        if v < 0 {
            return Err(Error::Input(format!(
                "{}:{line}: negative count {v}",
                path.display()
            )));
        }
        counts.push(v);
    }
    if counts.is_empty() {
        return Err(Error::Input(format!("{}: no counts found", path.display())));
    }
    Histogram::new(counts, None)
}

/// Two whitespace-separated 0-indexed node ids per line; the node count is
/// one more than the largest id. Self-loops and duplicate edges are dropped
/// with a warning.
pub fn ingest_edge_list(path: impl AsRef<Path>) -> Result<EdgeListGraph> {
    let path = path.as_ref();
    parse_edge_list(&read(path)?, path)
}

pub fn parse_edge_list(text: &str, path: &Path) -> Result<EdgeListGraph> {
    let mut edges = Vec::new();
    let mut nodes = 0usize;
    for (line, l) in content_lines(text) {
        let ids: Vec<&str> = l.split_whitespace().collect();
        if ids.len() != 2 {
            return Err(parse_error(
                path,
                line,
                format!("expected two node ids, found {l:?}"),
            ));
        }
        let parse = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| parse_error(path, line, format!("invalid node id {s:?}")))
        };
        let (u, v) = (parse(ids[0])?, parse(ids[1])?);
        nodes = nodes.max(u + 1).max(v + 1);
        edges.push((u, v));
    }
    let g = EdgeListGraph::from_edges(nodes, edges)?;
    if g.dropped_duplicates > 0 || g.dropped_self_loops > 0 {
        log::warn!(
            "{}: dropped {} duplicate edge(s) and {} self-loop(s)",
            path.display(),
            g.dropped_duplicates,
            g.dropped_self_loops
        );
    }
    Ok(g)
}

/// `G(n, p_edge)` with every pair decided by stream 0 of `seed`.
pub fn erdos_renyi(n: usize, p_edge: f64, seed: u64) -> Result<EdgeListGraph> {
    if !(0.0..=1.0).contains(&p_edge) {
        return Err(Error::domain(format!(
            "edge probability must lie in [0, 1], got {p_edge}"
        )));
    }
    let mut rng = stream_rng(seed, 0);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p_edge) {
                edges.push((u, v));
            }
        }
    }
    EdgeListGraph::from_edges(n, edges)
}

/// `n` columns summing to `total` as evenly as possible (earlier columns get
/// the remainder), with the total public.
pub fn uniform_histogram(n: usize, total: i64) -> Result<Histogram> {
    if n == 0 || total < 0 {
        return Err(Error::domain(
            "uniform histogram needs n >= 1 and total >= 0",
        ));
    }
    let base = total / n as i64;
    let extra = (total % n as i64) as usize;
    let counts = (0..n).map(|i| base + i64::from(i < extra)).collect();
    Histogram::new(counts, Some(total))
}

/// Counts proportional to `i^(-exponent)` for `i = 1..=n`, rounded to sum
/// exactly to `total` by largest remainder (ties to the lower index), with the
/// total public.
pub fn zipf_histogram(n: usize, exponent: f64, total: i64) -> Result<Histogram> {
    if n == 0 || total < 0 || !exponent.is_finite() {
        return Err(Error::domain(
            "Zipf histogram needs n >= 1, total >= 0 and a finite exponent",
        ));
    }
    let weights: Vec<f64> = (1..=n).map(|i| (i as f64).powf(-exponent)).collect();
    let norm: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| w / norm * total as f64).collect();
    let mut counts: Vec<i64> = exact.iter().map(|v| v.floor() as i64).collect();
    let short = total - counts.iter().sum::<i64>();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(short.max(0) as usize) {
        counts[i] += 1;
    }
    Histogram::new(counts, Some(total))
}
