//! Finite simple undirected graphs, validated trees and skeleton extraction.
//!
//! Vertices are dense `0..n` indices. Edges are stored normalized as `(u, v)`
//! with `u < v` and sorted lexicographically, so two graphs with the same edge
//! set compare equal and serialize identically.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vertex = usize;

/// Why a graph failed to be a tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NotATree {
    /// The graph has no vertices.
    Empty,
    /// The edge closes a cycle.
    Cycle(Vertex, Vertex),
    /// The vertex cannot be reached from vertex 0.
    Unreachable(Vertex),
}

impl fmt::Display for NotATree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NotATree::Empty => write!(f, "graph has no vertices"),
            NotATree::Cycle(u, v) => write!(f, "edge {{{u}, {v}}} closes a cycle"),
            NotATree::Unreachable(v) => write!(f, "vertex {v} is unreachable from vertex 0"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("endpoint {vertex} out of range for a graph on {n} vertices")]
    EndpointOutOfRange { vertex: Vertex, n: usize },
    #[error("loop at vertex {0}")]
    Loop(Vertex),
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(Vertex, Vertex),
    #[error("edge {{{0}, {1}}} is not present")]
    MissingEdge(Vertex, Vertex),
    #[error("graph has no vertices")]
    Empty,
    #[error("graph is disconnected: vertex {0} is unreachable from vertex 0")]
    Disconnected(Vertex),
    #[error("not a tree: {0}")]
    NotATree(NotATree),
    #[error("skeleton extraction needs at least 3 vertices, tree has {0}")]
    TooSmall(usize),
}

/// Errors from the edge-list text format. Line numbers are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("missing header line \"n m\"")]
    MissingHeader,
    #[error("malformed header at line {line}: expected \"n m\"")]
    MalformedHeader { line: usize },
    #[error("malformed edge at line {line}: expected \"u v\"")]
    MalformedEdge { line: usize },
    #[error("endpoint {vertex} out of range at line {line}")]
    EndpointOutOfRange { line: usize, vertex: Vertex },
    #[error("loop at line {line}")]
    Loop { line: usize },
    #[error("duplicate edge at line {line}")]
    DuplicateEdge { line: usize },
    #[error("header declares {expected} edges but {found} were given")]
    EdgeCount { expected: usize, found: usize },
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    n: usize,
    edges: Vec<(Vertex, Vertex)>,
}

/// A finite simple undirected graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr", into = "GraphRepr")]
pub struct Graph {
    n: usize,
    edges: Vec<(Vertex, Vertex)>,
    adj: Vec<Vec<Vertex>>,
}

impl TryFrom<GraphRepr> for Graph {
    type Error = GraphError;

    fn try_from(repr: GraphRepr) -> Result<Self, Self::Error> {
        Graph::new(repr.n, repr.edges)
    }
}

impl From<Graph> for GraphRepr {
    fn from(g: Graph) -> Self {
        GraphRepr { n: g.n, edges: g.edges }
    }
}

impl Graph {
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (Vertex, Vertex)>,
    ) -> Result<Self, GraphError> {
        let mut normalized = Vec::new();
        for (u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(GraphError::EndpointOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(GraphError::Loop(u));
            }
            normalized.push((u.min(v), u.max(v)));
        }
        normalized.sort_unstable();
        if let Some(w) = normalized.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateEdge(w[0].0, w[0].1));
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &normalized {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Graph {
            n,
            edges: normalized,
            adj,
        })
    }

    /// Graph on `n` vertices without edges.
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    /// Path with `k` edges on vertices `0..=k`.
    pub fn path(k: usize) -> Self {
        Graph::new(k + 1, (0..k).map(|i| (i, i + 1))).expect("path is simple")
    }

    /// Star with `k` edges, centre 0.
    pub fn star(k: usize) -> Self {
        Graph::new(k + 1, (1..=k).map(|i| (0, i))).expect("star is simple")
    }

    /// Cycle on `n >= 3` vertices.
    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "cycle needs at least 3 vertices");
        Graph::new(n, (0..n).map(|i| (i, (i + 1) % n))).expect("cycle is simple")
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        Graph::new(n, edges).expect("complete graph is simple")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    /// Neighbours of `v` in ascending order.
    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adj[v]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        u < self.n && self.adj[u].binary_search(&v).is_ok()
    }

    /// `Some(d)` if every vertex has degree `d`.
    pub fn regular_degree(&self) -> Option<usize> {
        let d = self.adj.first().map(Vec::len)?;
        self.adj.iter().all(|a| a.len() == d).then_some(d)
    }

    /// Breadth-first order from `root`, neighbours visited ascending.
    /// Returns `(order, parent)`; unreachable vertices are absent from `order`.
    pub fn bfs(&self, root: Vertex) -> (Vec<Vertex>, Vec<Option<Vertex>>) {
        let mut parent = vec![None; self.n];
        let mut seen = vec![false; self.n];
        let mut order = Vec::with_capacity(self.n);
        let mut queue = VecDeque::from([root]);
        seen[root] = true;
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &w in &self.adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(u);
                    queue.push_back(w);
                }
            }
        }
        (order, parent)
    }

    pub fn is_connected(&self) -> bool {
        self.n == 0 || self.bfs(0).0.len() == self.n
    }

    /// Vertex sets of the connected components, each sorted, ordered by
    /// smallest member.
    pub fn components(&self) -> Vec<Vec<Vertex>> {
        let mut comp = vec![usize::MAX; self.n];
        let mut out: Vec<Vec<Vertex>> = Vec::new();
        for s in 0..self.n {
            if comp[s] != usize::MAX {
                continue;
            }
            let (mut members, _) = self.bfs(s);
            for &v in &members {
                comp[v] = out.len();
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    /// Subgraph induced on `keep`, relabelled so that `keep[i]` becomes `i`.
    pub fn induced(&self, keep: &[Vertex]) -> Graph {
        let mut index = vec![usize::MAX; self.n];
        for (i, &v) in keep.iter().enumerate() {
            index[v] = i;
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(u, v)| index[u] != usize::MAX && index[v] != usize::MAX)
            .map(|&(u, v)| (index[u], index[v]));
        Graph::new(keep.len(), edges).expect("induced subgraph of a simple graph is simple")
    }

    /// Copy of the graph without edge `{u, v}`.
    pub fn remove_edge(&self, u: Vertex, v: Vertex) -> Result<Graph, GraphError> {
        let e = (u.min(v), u.max(v));
        if !self.has_edge(u, v) {
            return Err(GraphError::MissingEdge(e.0, e.1));
        }
        Graph::new(self.n, self.edges.iter().copied().filter(|&f| f != e))
    }

    /// Deterministic spanning tree: breadth-first from vertex 0 with
    /// neighbours in ascending order.
    pub fn spanning_tree(&self) -> Result<Tree, GraphError> {
        if self.n == 0 {
            return Err(GraphError::Empty);
        }
        let (order, parent) = self.bfs(0);
        if order.len() < self.n {
            let missing = (0..self.n).find(|v| parent[*v].is_none() && *v != 0);
            return Err(GraphError::Disconnected(missing.expect("some vertex unreached")));
        }
        let edges = order.iter().filter_map(|&v| parent[v].map(|p| (p, v)));
        Tree::try_from(Graph::new(self.n, edges)?)
    }

    /// Edge-list text: header `n m`, then one `u v` per line, sorted.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.edges.len());
        for (u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} [", self.n)?;
        for (i, (u, v)) in self.edges.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{u}-{v}")?;
        }
        write!(f, "]")
    }
}

/// Parses the edge-list format. Blank lines and lines starting with `#` are
/// skipped; the header `n m` must be followed by exactly `m` edge lines.
pub fn parse_graph(text: &str) -> Result<Graph, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (header_line, header) = lines.next().ok_or(ParseError::MissingHeader)?;
    let (n, m) = parse_pair(header).ok_or(ParseError::MalformedHeader { line: header_line })?;

    let mut seen = std::collections::HashSet::new();
    let mut edges = Vec::with_capacity(m);
    for (line, text) in lines {
        let (u, v) = parse_pair(text).ok_or(ParseError::MalformedEdge { line })?;
        for vertex in [u, v] {
            if vertex >= n {
                return Err(ParseError::EndpointOutOfRange { line, vertex });
            }
        }
        if u == v {
            return Err(ParseError::Loop { line });
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(ParseError::DuplicateEdge { line });
        }
        edges.push((u, v));
    }
    if edges.len() != m {
        return Err(ParseError::EdgeCount {
            expected: m,
            found: edges.len(),
        });
    }
    Ok(Graph::new(n, edges).expect("validated while parsing"))
}

fn parse_pair(line: &str) -> Option<(usize, usize)> {
    let mut it = line.split_whitespace();
    let a = it.next()?.parse().ok()?;
    let b = it.next()?.parse().ok()?;
    it.next().is_none().then_some((a, b))
}

impl FromStr for Graph {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_graph(s)
    }
}

/// A validated tree with its leaves precomputed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Graph", into = "Graph")]
pub struct Tree {
    graph: Graph,
    leaves: Vec<Vertex>,
    is_star: bool,
}

impl TryFrom<Graph> for Tree {
    type Error = GraphError;

    fn try_from(graph: Graph) -> Result<Self, Self::Error> {
        as_tree(graph)
    }
}

impl From<Tree> for Graph {
    fn from(t: Tree) -> Self {
        t.graph
    }
}

/// Validates that `g` is connected with `n - 1` edges.
pub fn as_tree(graph: Graph) -> Result<Tree, GraphError> {
    let n = graph.n();
    if n == 0 {
        return Err(GraphError::NotATree(NotATree::Empty));
    }
    // union-find; the first edge joining a component to itself witnesses a cycle
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(u, v) in graph.edges() {
        let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
        if ru == rv {
            return Err(GraphError::NotATree(NotATree::Cycle(u, v)));
        }
        parent[ru] = rv;
    }
    let root = find(&mut parent, 0);
    if let Some(v) = (1..n).find(|&v| find(&mut parent, v) != root) {
        return Err(GraphError::NotATree(NotATree::Unreachable(v)));
    }
    let leaves: Vec<Vertex> = (0..n).filter(|&v| graph.degree(v) == 1).collect();
    let is_star = n <= 2 || (0..n).any(|v| graph.degree(v) == n - 1);
    Ok(Tree {
        graph,
        leaves,
        is_star,
    })
}

impl Tree {
    pub fn path(k: usize) -> Tree {
        as_tree(Graph::path(k)).expect("path is a tree")
    }

    pub fn star(k: usize) -> Tree {
        as_tree(Graph::star(k)).expect("star is a tree")
    }

    /// Tree where vertex `i + 1` hangs off `parents[i]`; every parent must be
    /// an earlier vertex.
    pub fn from_parents(parents: &[Vertex]) -> Result<Tree, GraphError> {
        let n = parents.len() + 1;
        let edges = parents.iter().enumerate().map(|(i, &p)| (p, i + 1));
        as_tree(Graph::new(n, edges)?)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    /// Number of edges.
    pub fn k(&self) -> usize {
        self.graph.n() - 1
    }

    /// Degree-1 vertices, ascending.
    pub fn leaves(&self) -> &[Vertex] {
        &self.leaves
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_leaf(&self, v: Vertex) -> bool {
        self.graph.degree(v) == 1
    }

    pub fn is_star(&self) -> bool {
        self.is_star
    }

    pub fn skeleton_info(&self) -> Result<SkeletonInfo, GraphError> {
        skeleton_info(self)
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.graph.fmt(f)
    }
}

/// The tree with every leaf removed, plus how many leaves hung off each
/// surviving vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkeletonInfo {
    /// The skeleton, relabelled densely; skeleton vertex `i` is `vertices[i]`.
    pub skeleton: Tree,
    pub vertices: Vec<Vertex>,
    /// Leaves of the original tree adjacent to each skeleton vertex, keyed by
    /// original vertex id.
    pub attachment: BTreeMap<Vertex, usize>,
    /// Leaves of the skeleton as original ids, ascending. A single-vertex
    /// skeleton (a star) lists its centre.
    pub skeleton_leaves: Vec<Vertex>,
}

pub fn skeleton_info(t: &Tree) -> Result<SkeletonInfo, GraphError> {
    if t.n() < 3 {
        return Err(GraphError::TooSmall(t.n()));
    }
    let g = t.graph();
    let vertices: Vec<Vertex> = (0..t.n()).filter(|&v| !t.is_leaf(v)).collect();
    let skeleton = as_tree(g.induced(&vertices)).expect("removing leaves keeps a tree");
    let attachment = vertices
        .iter()
        .map(|&v| (v, g.neighbors(v).iter().filter(|&&w| t.is_leaf(w)).count()))
        .collect();
    let skeleton_leaves = if skeleton.n() == 1 {
        vertices.clone()
    } else {
        skeleton.leaves().iter().map(|&i| vertices[i]).collect()
    };
    Ok(SkeletonInfo {
        skeleton,
        vertices,
        attachment,
        skeleton_leaves,
    })
}
