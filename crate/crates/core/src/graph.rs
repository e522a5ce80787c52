//! Undirected simple graphs, deterministic generators and distance layers
//! around the Byzantine set.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type NodeId = usize;

/// Largest node count accepted from files and generator parameters.
pub const MAX_NODES: usize = 1 << 20;

/// Immutable undirected simple graph on nodes `0..n`.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    /// Sorted, each pair stored once as `(u, v)` with `u < v`.
    edges: Vec<(NodeId, NodeId)>,
    adjacency: Vec<Vec<NodeId>>,
    max_degree: usize,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("m", &self.edges.len())
            .field("max_degree", &self.max_degree)
            .finish()
    }
}

impl Graph {
    /// Builds a graph from an edge list. Edge orientation is irrelevant;
    /// self-loops, duplicates and out-of-range endpoints are rejected.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (NodeId, NodeId)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Config(format!("edge {u}-{v} out of range for n={n}")));
            }
            if u == v {
                return Err(Error::Config(format!("self-loop on node {u}")));
            }
            let e = (u.min(v), u.max(v));
            if !set.insert(e) {
                return Err(Error::Config(format!("duplicate edge {}-{}", e.0, e.1)));
            }
        }
        Ok(Self::from_sorted_unique(n, set.into_iter().collect()))
    }

    fn from_sorted_unique(n: usize, edges: Vec<(NodeId, NodeId)>) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let max_degree = adjacency.iter().map(Vec::len).max().unwrap_or(0);
        Graph {
            n,
            edges,
            adjacency,
            max_degree,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.adjacency[u]
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.adjacency[u].len()
    }

    /// Δ, the maximum degree (0 for edgeless graphs).
    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn nodes(&self) -> std::ops::Range<NodeId> {
        0..self.n
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Plain-text form: `n m` followed by one `u v` line per edge.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.edges.len());
        for (u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    /// Parses the plain-text graph format written by [`Graph::to_text`].
    /// Blank lines and lines starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (hl, header) = lines.next().ok_or_else(|| Error::parse(1, "missing header"))?;
        let (n, m) = parse_pair(hl, header)?;
        if n > MAX_NODES {
            return Err(Error::parse(hl, format!("{n} nodes exceeds the limit of {MAX_NODES}")));
        }
        let mut edges = Vec::with_capacity(m.min(1 << 16));
        for (ln, line) in lines {
            let (u, v) = parse_pair(ln, line)?;
            if u >= n || v >= n {
                return Err(Error::parse(ln, format!("node out of range (n={n})")));
            }
            edges.push((ln, u, v));
        }
        if edges.len() != m {
            return Err(Error::parse(hl, format!("header declares {m} edges, found {}", edges.len())));
        }
        let mut set = BTreeSet::new();
        for (ln, u, v) in edges {
            if u == v {
                return Err(Error::parse(ln, "self-loop"));
            }
            if !set.insert((u.min(v), u.max(v))) {
                return Err(Error::parse(ln, "duplicate edge"));
            }
        }
        Ok(Self::from_sorted_unique(n, set.into_iter().collect()))
    }
}

fn parse_pair(line: usize, text: &str) -> Result<(usize, usize)> {
    let mut it = text.split_whitespace();
    let mut next = |what: &str| -> Result<usize> {
        it.next()
            .ok_or_else(|| Error::parse(line, format!("missing {what}")))?
            .parse::<usize>()
            .map_err(|e| Error::parse(line, format!("bad {what}: {e}")))
    };
    let a = next("first field")?;
    let b = next("second field")?;
    if it.next().is_some() {
        return Err(Error::parse(line, "expected exactly two integers"));
    }
    Ok((a, b))
}

/// Graph families the generator knows about.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphKind {
    /// Cycle on `n` nodes. `n = 1` is a single node and `n = 2` a single edge.
    Ring { n: usize },
    Path { n: usize },
    /// Center `0` joined to `leaves` leaves.
    Star { leaves: usize },
    Complete { n: usize },
    Grid { rows: usize, cols: usize },
    ErdosRenyi { n: usize, p: f64 },
    /// Random recursive tree: node `i > 0` attaches to a uniform earlier node.
    RandomTree { n: usize },
}

impl GraphKind {
    pub fn node_count(&self) -> usize {
        match *self {
            GraphKind::Ring { n }
            | GraphKind::Path { n }
            | GraphKind::Complete { n }
            | GraphKind::ErdosRenyi { n, .. }
            | GraphKind::RandomTree { n } => n,
            GraphKind::Star { leaves } => leaves.saturating_add(1),
            GraphKind::Grid { rows, cols } => rows.saturating_mul(cols),
        }
    }

    /// Whether generation consumes randomness.
    pub fn is_random(&self) -> bool {
        matches!(self, GraphKind::ErdosRenyi { .. } | GraphKind::RandomTree { .. })
    }

    /// Same family resized to roughly `n` nodes. Grids become the most
    /// square `rows x cols` factorisation of `n`.
    pub fn with_size(&self, n: usize) -> GraphKind {
        match *self {
            GraphKind::Ring { .. } => GraphKind::Ring { n },
            GraphKind::Path { .. } => GraphKind::Path { n },
            GraphKind::Star { .. } => GraphKind::Star {
                leaves: n.saturating_sub(1),
            },
            GraphKind::Complete { .. } => GraphKind::Complete { n },
            GraphKind::Grid { .. } => {
                let mut rows = (n as f64).sqrt() as usize;
                while rows > 1 && !n.is_multiple_of(rows) {
                    rows -= 1;
                }
                let rows = rows.max(1);
                GraphKind::Grid { rows, cols: n / rows }
            }
            GraphKind::ErdosRenyi { p, .. } => GraphKind::ErdosRenyi { n, p },
            GraphKind::RandomTree { .. } => GraphKind::RandomTree { n },
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            GraphKind::Ring { n }
            | GraphKind::Path { n }
            | GraphKind::Complete { n }
            | GraphKind::RandomTree { n } => n >= 1,
            GraphKind::Star { leaves } => leaves >= 1,
            GraphKind::Grid { rows, cols } => rows >= 1 && cols >= 1,
            GraphKind::ErdosRenyi { n, p } => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Config(format!("erdos_renyi probability {p} not in [0,1]")));
                }
                n >= 1
            }
        };
        if self.node_count() > MAX_NODES {
            return Err(Error::Config(format!("{self}: more than {MAX_NODES} nodes")));
        }
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("{self}: sizes must be at least 1")))
        }
    }
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GraphKind::Ring { n } => write!(f, "ring({n})"),
            GraphKind::Path { n } => write!(f, "path({n})"),
            GraphKind::Star { leaves } => write!(f, "star({leaves})"),
            GraphKind::Complete { n } => write!(f, "complete({n})"),
            GraphKind::Grid { rows, cols } => write!(f, "grid({rows},{cols})"),
            GraphKind::ErdosRenyi { n, p } => write!(f, "erdos_renyi({n},{p})"),
            GraphKind::RandomTree { n } => write!(f, "random_tree({n})"),
        }
    }
}

impl std::str::FromStr for GraphKind {
    type Err = Error;

    /// The `Display` form, e.g. `ring(16)`, `grid(4,8)`, `erdos_renyi(32,0.3)`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = crate::adversary::split_call(s)?;
        let args: Vec<&str> = arg.map(|a| a.split(',').map(str::trim).collect()).unwrap_or_default();
        let int = |a: &str| -> Result<usize> {
            a.parse()
                .map_err(|e| Error::Config(format!("bad size `{a}` in `{s}`: {e}")))
        };
        let kind = match (name, args.as_slice()) {
            ("ring", [n]) => GraphKind::Ring { n: int(n)? },
            ("path", [n]) => GraphKind::Path { n: int(n)? },
            ("star", [l]) => GraphKind::Star { leaves: int(l)? },
            ("complete", [n]) => GraphKind::Complete { n: int(n)? },
            ("grid", [r, c]) => GraphKind::Grid {
                rows: int(r)?,
                cols: int(c)?,
            },
            ("erdos_renyi", [n, p]) => GraphKind::ErdosRenyi {
                n: int(n)?,
                p: p
                    .parse()
                    .map_err(|e| Error::Config(format!("bad probability `{p}`: {e}")))?,
            },
            ("random_tree", [n]) => GraphKind::RandomTree { n: int(n)? },
            _ => return Err(Error::Config(format!("unknown graph `{s}`"))),
        };
        kind.validate()?;
        Ok(kind)
    }
}

/// Generates a graph; output depends only on `(kind, seed)`.
pub fn generate_graph(kind: GraphKind, seed: u64) -> Result<Graph> {
    kind.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    match kind {
        GraphKind::Ring { n } => {
            if n == 2 {
                edges.push((0, 1));
            } else if n >= 3 {
                edges.extend((0..n).map(|i| (i, (i + 1) % n)));
            }
        }
        GraphKind::Path { n } => edges.extend((1..n).map(|i| (i - 1, i))),
        GraphKind::Star { leaves } => edges.extend((1..=leaves).map(|i| (0, i))),
        GraphKind::Complete { n } => {
            for u in 0..n {
                edges.extend((u + 1..n).map(|v| (u, v)));
            }
        }
        GraphKind::Grid { rows, cols } => {
            for r in 0..rows {
                for c in 0..cols {
                    let u = r * cols + c;
                    if c + 1 < cols {
                        edges.push((u, u + 1));
                    }
                    if r + 1 < rows {
                        edges.push((u, u + cols));
                    }
                }
            }
        }
        GraphKind::ErdosRenyi { n, p } => {
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen::<f64>() < p {
                        edges.push((u, v));
                    }
                }
            }
        }
        GraphKind::RandomTree { n } => {
            edges.extend((1..n).map(|v| (rng.gen_range(0..v), v)));
        }
    }
    Graph::from_edges(kind.node_count(), edges)
}

/// The set `B` of Byzantine nodes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ByzantineSet {
    members: BTreeSet<NodeId>,
}

impl ByzantineSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(g: &Graph, members: impl IntoIterator<Item = NodeId>) -> Result<Self> {
        let members: BTreeSet<_> = members.into_iter().collect();
        if let Some(&bad) = members.iter().find(|&&u| u >= g.n()) {
            return Err(Error::Config(format!("byzantine node {bad} out of range for n={}", g.n())));
        }
        Ok(ByzantineSet { members })
    }

    pub fn contains(&self, u: NodeId) -> bool {
        self.members.contains(&u)
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.members.iter().copied()
    }
}

/// Multi-source BFS distance to the Byzantine set. `None` is the infinite
/// distance: unreachable nodes, or every node when `b` is empty.
pub fn distance_to_set(g: &Graph, b: &ByzantineSet) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.n()];
    let mut queue = VecDeque::new();
    for u in b.iter() {
        dist[u] = Some(0);
        queue.push_back(u);
    }
    while let Some(u) = queue.pop_front() {
        let d = dist[u].unwrap_or(0) + 1;
        for &v in g.neighbors(u) {
            if dist[v].is_none() {
                dist[v] = Some(d);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Membership mask of `V_i`: nodes at distance strictly greater than `i`
/// from `B`.
pub fn v_level_mask(g: &Graph, b: &ByzantineSet, i: usize) -> Vec<bool> {
    distance_to_set(g, b)
        .into_iter()
        .map(|d| d.is_none_or(|d| d > i))
        .collect()
}

/// `V_i` as a sorted node list.
pub fn v_level(g: &Graph, b: &ByzantineSet, i: usize) -> Vec<NodeId> {
    v_level_mask(g, b, i)
        .into_iter()
        .enumerate()
        .filter_map(|(u, inside)| inside.then_some(u))
        .collect()
}
