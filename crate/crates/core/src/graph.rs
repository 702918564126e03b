//! Undirected simple connected graphs, named topology generators and the
//! shortest-path helpers used by the resistance bound.

use std::collections::VecDeque;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rejection-sampling budget for connected Erdős–Rényi graphs.
pub const ER_MAX_ATTEMPTS: usize = 1000;

/// An undirected, simple, connected graph on nodes `0..n`.
///
/// Adjacency lists are sorted and symmetric. Construction rejects
/// self-loops, duplicate edges and disconnected inputs, so every `Graph`
/// value satisfies those invariants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    edge_count: usize,
}

impl Graph {
    /// Builds a graph from an edge list. Edges may be given in either
    /// orientation.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidSize(format!("need at least 2 nodes, got {n}")));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            for node in [u, v] {
                if node >= n {
                    return Err(Error::NodeOutOfRange { node, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for (u, nbrs) in adjacency.iter_mut().enumerate() {
            nbrs.sort_unstable();
            if let Some(w) = nbrs.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::DuplicateEdge(u.min(w[0]), u.max(w[0])));
            }
        }
        let g = Graph {
            adjacency,
            edge_count: edges.len(),
        };
        let components = g.component_count();
        if components != 1 {
            return Err(Error::Disconnected { components });
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adjacency[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adjacency[u].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n() && self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, nbrs)| nbrs.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    fn check_node(&self, node: usize) -> Result<()> {
        if node < self.n() {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange { node, n: self.n() })
        }
    }

    fn component_count(&self) -> usize {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut components = 0;
        let mut stack = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            components += 1;
            seen[s] = true;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for &v in &self.adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        components
    }

    /// Breadth-first shortest path from `x` to `y`, inclusive of both ends.
    ///
    /// Neighbors are scanned in increasing index order and the first
    /// discovery wins, so the returned path is reproducible.
    pub fn shortest_path(&self, x: usize, y: usize) -> Result<Vec<usize>> {
        self.check_node(x)?;
        self.check_node(y)?;
        let mut parent = vec![usize::MAX; self.n()];
        parent[x] = x;
        let mut queue = VecDeque::from([x]);
        while let Some(u) = queue.pop_front() {
            if u == y {
                break;
            }
            for &v in &self.adjacency[u] {
                if parent[v] == usize::MAX {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        let mut path = vec![y];
        let mut cur = y;
        while cur != x {
            cur = parent[cur];
            path.push(cur);
        }
        path.reverse();
        Ok(path)
    }

    /// Sum of node degrees along `path`. Consecutive nodes must be adjacent.
    pub fn path_degree_sum(&self, path: &[usize]) -> Result<usize> {
        for &u in path {
            self.check_node(u)?;
        }
        if let Some(w) = path.windows(2).find(|w| !self.has_edge(w[0], w[1])) {
            return Err(Error::NotAPath(w[0], w[1]));
        }
        Ok(path.iter().map(|&u| self.degree(u)).sum())
    }

    /// Serializes in the `N M` + `u v` edge-list format.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.n(), self.edge_count);
        for (u, v) in self.edges() {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }
}

/// Parses the edge-list text format: a header line `N M`, then `M` lines
/// `u v` with `0 <= u < v < N`. Blank lines are ignored.
pub fn load_edge_list(text: &str) -> Result<Graph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "missing header".into(),
    })?;
    let [n, m] = parse_pair(hline, header)?;

    let mut edges = Vec::with_capacity(m);
    for (line, body) in lines {
        let [u, v] = parse_pair(line, body)?;
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        if u > v {
            return Err(Error::Parse {
                line,
                msg: format!("expected u < v, got {u} {v}"),
            });
        }
        if v >= n {
            return Err(Error::Parse {
                line,
                msg: format!("node {v} out of range for N = {n}"),
            });
        }
        edges.push((u, v));
    }
    if edges.len() != m {
        return Err(Error::Parse {
            line: 1,
            msg: format!("header declares {m} edges, found {}", edges.len()),
        });
    }
    Graph::from_edges(n, &edges)
}

fn parse_pair(line: usize, body: &str) -> Result<[usize; 2]> {
    let mut it = body.split_whitespace();
    let mut next = || -> Result<usize> {
        let tok = it.next().ok_or_else(|| Error::Parse {
            line,
            msg: "expected two integers".into(),
        })?;
        tok.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("not a non-negative integer: {tok:?}"),
        })
    };
    let pair = [next()?, next()?];
    if it.next().is_some() {
        return Err(Error::Parse {
            line,
            msg: "trailing tokens".into(),
        });
    }
    Ok(pair)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyKind {
    Complete,
    Path,
    Cycle,
    Star,
    Grid,
    ErdosRenyi,
}

impl TopologyKind {
    pub const ALL: [TopologyKind; 6] = [
        TopologyKind::Complete,
        TopologyKind::Path,
        TopologyKind::Cycle,
        TopologyKind::Star,
        TopologyKind::Grid,
        TopologyKind::ErdosRenyi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TopologyKind::Complete => "complete",
            TopologyKind::Path => "path",
            TopologyKind::Cycle => "cycle",
            TopologyKind::Star => "star",
            TopologyKind::Grid => "grid",
            TopologyKind::ErdosRenyi => "erdos_renyi",
        }
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for TopologyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "complete" => Ok(TopologyKind::Complete),
            "path" | "line" => Ok(TopologyKind::Path),
            "cycle" | "ring" => Ok(TopologyKind::Cycle),
            "star" => Ok(TopologyKind::Star),
            "grid" => Ok(TopologyKind::Grid),
            "erdos_renyi" | "er" | "gnp" => Ok(TopologyKind::ErdosRenyi),
            other => Err(Error::InvalidArgument(format!("unknown topology {other:?}"))),
        }
    }
}

/// A fully parameterized topology. Center of the star is node 0; grid nodes
/// are numbered row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TopologySpec {
    Complete { n: usize },
    Path { n: usize },
    Cycle { n: usize },
    Star { n: usize },
    Grid { rows: usize, cols: usize },
    ErdosRenyi { n: usize, p: f64, seed: u64 },
}

impl TopologySpec {
    pub fn kind(&self) -> TopologyKind {
        match self {
            TopologySpec::Complete { .. } => TopologyKind::Complete,
            TopologySpec::Path { .. } => TopologyKind::Path,
            TopologySpec::Cycle { .. } => TopologyKind::Cycle,
            TopologySpec::Star { .. } => TopologyKind::Star,
            TopologySpec::Grid { .. } => TopologyKind::Grid,
            TopologySpec::ErdosRenyi { .. } => TopologyKind::ErdosRenyi,
        }
    }

    pub fn node_count(&self) -> usize {
        match *self {
            TopologySpec::Complete { n }
            | TopologySpec::Path { n }
            | TopologySpec::Cycle { n }
            | TopologySpec::Star { n }
            | TopologySpec::ErdosRenyi { n, .. } => n,
            TopologySpec::Grid { rows, cols } => rows * cols,
        }
    }

    pub fn build(&self) -> Result<Graph> {
        build_topology(self)
    }
}

impl fmt::Display for TopologySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TopologySpec::Grid { rows, cols } => write!(f, "grid:{rows}x{cols}"),
            TopologySpec::ErdosRenyi { n, p, seed } => write!(f, "erdos_renyi:{n}:{p}:{seed}"),
            other => write!(f, "{}:{}", other.kind(), other.node_count()),
        }
    }
}

impl std::str::FromStr for TopologySpec {
    type Err = Error;

    /// Accepts `complete:8`, `path:10`, `cycle:6`, `star:5`, `grid:3x4`,
    /// and `erdos_renyi:20:0.3[:seed]`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("malformed topology {s:?}"));
        let mut parts = s.split(':');
        let kind: TopologyKind = parts.next().ok_or_else(bad)?.parse()?;
        let rest: Vec<&str> = parts.collect();
        let int = |t: &str| t.parse::<usize>().map_err(|_| bad());
        let spec = match (kind, rest.as_slice()) {
            (TopologyKind::Complete, [n]) => TopologySpec::Complete { n: int(n)? },
            (TopologyKind::Path, [n]) => TopologySpec::Path { n: int(n)? },
            (TopologyKind::Cycle, [n]) => TopologySpec::Cycle { n: int(n)? },
            (TopologyKind::Star, [n]) => TopologySpec::Star { n: int(n)? },
            (TopologyKind::Grid, [dims]) => {
                let (r, c) = dims.split_once('x').ok_or_else(bad)?;
                TopologySpec::Grid {
                    rows: int(r)?,
                    cols: int(c)?,
                }
            }
            (TopologyKind::ErdosRenyi, [n, p, tail @ ..]) if tail.len() <= 1 => TopologySpec::ErdosRenyi {
                n: int(n)?,
                p: p.parse().map_err(|_| bad())?,
                seed: match tail {
                    [seed] => seed.parse().map_err(|_| bad())?,
                    _ => 0,
                },
            },
            _ => return Err(bad()),
        };
        Ok(spec)
    }
}

/// Builds the graph described by `spec`. Deterministic in `spec`.
pub fn build_topology(spec: &TopologySpec) -> Result<Graph> {
    let too_small = |min: usize, n: usize| {
        Err(Error::InvalidSize(format!(
            "{} needs at least {min} nodes, got {n}",
            spec.kind()
        )))
    };
    match *spec {
        TopologySpec::Complete { n } => {
            if n < 2 {
                return too_small(2, n);
            }
            let edges: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
            Graph::from_edges(n, &edges)
        }
        TopologySpec::Path { n } => {
            if n < 2 {
                return too_small(2, n);
            }
            let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
            Graph::from_edges(n, &edges)
        }
        TopologySpec::Cycle { n } => {
            if n < 3 {
                return too_small(3, n);
            }
            let mut edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
            edges.push((0, n - 1));
            Graph::from_edges(n, &edges)
        }
        TopologySpec::Star { n } => {
            if n < 2 {
                return too_small(2, n);
            }
            let edges: Vec<_> = (1..n).map(|v| (0, v)).collect();
            Graph::from_edges(n, &edges)
        }
        TopologySpec::Grid { rows, cols } => {
            if rows == 0 || cols == 0 || rows * cols < 2 {
                return Err(Error::InvalidSize(format!("grid {rows}x{cols} has fewer than 2 nodes")));
            }
            let id = |r: usize, c: usize| r * cols + c;
            let mut edges = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    if c + 1 < cols {
                        edges.push((id(r, c), id(r, c + 1)));
                    }
                    if r + 1 < rows {
                        edges.push((id(r, c), id(r + 1, c)));
                    }
                }
            }
            Graph::from_edges(rows * cols, &edges)
        }
        TopologySpec::ErdosRenyi { n, p, seed } => {
            if n < 2 {
                return too_small(2, n);
            }
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::InvalidProbability(p));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..ER_MAX_ATTEMPTS {
                let mut edges = Vec::new();
                for u in 0..n {
                    for v in u + 1..n {
                        if rng.gen_bool(p) {
                            edges.push((u, v));
                        }
                    }
                }
                match Graph::from_edges(n, &edges) {
                    Ok(g) => return Ok(g),
                    Err(Error::Disconnected { .. }) => continue,
                    Err(e) => return Err(e),
                }
            }
            Err(Error::ErdosRenyiDisconnected {
                n,
                p,
                attempts: ER_MAX_ATTEMPTS,
            })
        }
    }
}
