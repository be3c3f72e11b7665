//! Free-tree enumeration and the empirical homomorphism order on trees.
//!
//! A finite image suite can only refute `t' >= t` (by exhibiting an image
//! where `t'` has fewer homomorphisms). Pairs that survive every image are
//! reported as *consistent with respect to the suite*, never as proven.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{as_tree, Graph, Tree, Vertex};
use crate::hom::{hom_tree, HomCount};

pub const RELATION_SCHEMA: &str = "homtree.relation.v1";
pub const MAX_ENUMERATION_K: usize = 12;
pub const MAX_CLASS_CHECK_K: usize = 9;
pub const MAX_EXHAUSTIVE_SUITE_N: usize = 7;
pub const MAX_RANDOM_SUITE_N: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrderError {
    #[error("k = {k} is outside the supported range {min}..={max}")]
    KOutOfRange { k: usize, min: usize, max: usize },
    #[error("trees have different edge counts ({0} and {1})")]
    MixedK(usize, usize),
    #[error("invalid suite: {0}")]
    Suite(String),
}

/// Canonical parenthesis code of a tree rooted at `root`: each vertex is
/// `(` followed by its children's codes in sorted order and `)`.
fn rooted_code(t: &Tree, root: Vertex) -> String {
    let (order, parent) = t.graph().bfs(root);
    let mut children: Vec<Vec<String>> = vec![Vec::new(); t.n()];
    for &v in order.iter().rev() {
        let mut kids = std::mem::take(&mut children[v]);
        kids.sort_unstable();
        let code = format!("({})", kids.concat());
        match parent[v] {
            Some(p) => children[p].push(code),
            None => return code,
        }
    }
    unreachable!("root is visited")
}

/// Vertices whose removal leaves components of size at most `n / 2`.
pub fn centroids(t: &Tree) -> Vec<Vertex> {
    let n = t.n();
    let (order, parent) = t.graph().bfs(0);
    let mut size = vec![1usize; n];
    for &v in order.iter().rev() {
        if let Some(p) = parent[v] {
            size[p] += size[v];
        }
    }
    (0..n)
        .filter(|&v| {
            let largest_child = t
                .graph()
                .neighbors(v)
                .iter()
                .filter(|&&w| parent[w] == Some(v))
                .map(|&w| size[w])
                .max()
                .unwrap_or(0);
            largest_child.max(n - size[v]) * 2 <= n
        })
        .collect()
}

/// Isomorphism-invariant code: the smaller rooted code over the (one or two)
/// centroids.
pub fn canonical_code(t: &Tree) -> String {
    centroids(t)
        .into_iter()
        .map(|c| rooted_code(t, c))
        .min()
        .expect("every tree has a centroid")
}

/// Rebuilds a tree from a parenthesis code; vertices are numbered in
/// preorder.
pub fn tree_from_code(code: &str) -> Option<Tree> {
    let mut stack: Vec<Vertex> = Vec::new();
    let mut edges = Vec::new();
    let mut n = 0;
    for (i, ch) in code.chars().enumerate() {
        match ch {
            '(' => {
                if stack.is_empty() && i > 0 {
                    return None;
                }
                if let Some(&p) = stack.last() {
                    edges.push((p, n));
                }
                stack.push(n);
                n += 1;
            }
            ')' => {
                stack.pop()?;
            }
            _ => return None,
        }
    }
    if !stack.is_empty() || n == 0 {
        return None;
    }
    as_tree(Graph::new(n, edges).ok()?).ok()
}

/// One isomorphism class of trees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalTree {
    pub code: String,
    pub k: usize,
    pub leaf_count: usize,
    /// Representative built from `code`.
    pub tree: Tree,
}

impl CanonicalTree {
    pub fn new(t: &Tree) -> Self {
        let code = canonical_code(t);
        let tree = tree_from_code(&code).expect("canonical code decodes");
        CanonicalTree {
            k: tree.k(),
            leaf_count: tree.leaf_count(),
            code,
            tree,
        }
    }
}

/// Every tree with `k` edges up to isomorphism, sorted by code.
pub fn enumerate_free_trees(k: usize) -> Result<Vec<CanonicalTree>, OrderError> {
    if !(1..=MAX_ENUMERATION_K).contains(&k) {
        return Err(OrderError::KOutOfRange { k, min: 1, max: MAX_ENUMERATION_K });
    }
    // every tree arises from a tree with one edge fewer by hanging a leaf
    let mut level: BTreeSet<String> = BTreeSet::from(["()".to_string()]);
    for _ in 0..k {
        level = level
            .par_iter()
            .flat_map_iter(|code| {
                let t = tree_from_code(code).expect("stored codes decode");
                let n = t.n();
                (0..n).map(move |v| {
                    let edges = t.graph().edges().iter().copied().chain([(v, n)]);
                    let grown = as_tree(Graph::new(n + 1, edges).expect("simple")).expect("tree");
                    canonical_code(&grown)
                })
            })
            .collect::<BTreeSet<_>>();
    }
    Ok(level
        .into_iter()
        .map(|code| {
            let tree = tree_from_code(&code).expect("stored codes decode");
            CanonicalTree {
                k,
                leaf_count: tree.leaf_count(),
                code,
                tree,
            }
        })
        .collect())
}

pub fn filter_by_leaves(trees: &[CanonicalTree], leaves: usize) -> Vec<CanonicalTree> {
    trees.iter().filter(|t| t.leaf_count == leaves).cloned().collect()
}

/// Canonical form of a small graph (`n <= 11`): the smallest upper-triangle
/// adjacency bitmask over all relabellings that respect a degree-based vertex
/// invariant.
pub fn graph_canonical_form(g: &Graph) -> u64 {
    let n = g.n();
    assert!(n <= 11, "graph canonical form supports at most 11 vertices");
    let deg = g.degrees();
    let invariant = |v: Vertex| {
        let mut nd: Vec<usize> = g.neighbors(v).iter().map(|&w| deg[w]).collect();
        nd.sort_unstable();
        (deg[v], nd)
    };
    let mut by_inv: Vec<(_, Vertex)> = (0..n).map(|v| (invariant(v), v)).collect();
    by_inv.sort();
    // class id of each sorted position
    let mut class_of_pos = vec![0usize; n];
    for i in 1..n {
        class_of_pos[i] = class_of_pos[i - 1] + usize::from(by_inv[i].0 != by_inv[i - 1].0);
    }
    let class_of_vertex: BTreeMap<Vertex, usize> =
        by_inv.iter().enumerate().map(|(i, (_, v))| (*v, class_of_pos[i])).collect();

    let pair_bit = |a: usize, b: usize| -> u64 {
        let (a, b) = (a.min(b), a.max(b));
        // index of (a, b) in row-major upper-triangle order
        let idx = a * (2 * n - a - 1) / 2 + (b - a - 1);
        1u64 << (n * (n - 1) / 2 - 1 - idx)
    };

    struct Search<'a> {
        g: &'a Graph,
        class_of_pos: Vec<usize>,
        class_of_vertex: BTreeMap<Vertex, usize>,
        label: Vec<usize>,
        used: Vec<bool>,
        best: u64,
    }
    fn go(s: &mut Search<'_>, pos: usize, bits: u64, pair_bit: &dyn Fn(usize, usize) -> u64) {
        let n = s.g.n();
        if pos == n {
            s.best = s.best.min(bits);
            return;
        }
        for v in 0..n {
            if s.used[v] || s.class_of_vertex[&v] != s.class_of_pos[pos] {
                continue;
            }
            let mut next = bits;
            for &w in s.g.neighbors(v) {
                if s.used[w] {
                    next |= pair_bit(s.label[w], pos);
                }
            }
            s.used[v] = true;
            s.label[v] = pos;
            go(s, pos + 1, next, pair_bit);
            s.used[v] = false;
        }
    }
    let mut search = Search {
        g,
        class_of_pos,
        class_of_vertex,
        label: vec![0; n],
        used: vec![false; n],
        best: u64::MAX,
    };
    go(&mut search, 0, 0, &pair_bit);
    search.best
}

fn graph_from_form(n: usize, bits: u64) -> Graph {
    let total = n * (n - 1) / 2;
    let mut edges = Vec::new();
    let mut idx = 0;
    for a in 0..n {
        for b in a + 1..n {
            if bits >> (total - 1 - idx) & 1 == 1 {
                edges.push((a, b));
            }
            idx += 1;
        }
    }
    Graph::new(n, edges).expect("simple")
}

/// Which image graphs to test against.
#[derive(Debug, Clone, PartialEq)]
pub enum SuiteSpec {
    /// Every connected graph with at most `max_n` vertices, up to isomorphism.
    AllConnected { max_n: usize },
    /// `count` Erdős–Rényi graphs `G(n, p)` from a seeded generator.
    Random { count: usize, n: usize, p: f64, seed: u64 },
}

impl SuiteSpec {
    /// Parses `all:N` or `random:count,n,p`; random suites need a seed.
    pub fn parse(text: &str, seed: Option<u64>) -> Result<Self, OrderError> {
        let bad = |msg: &str| OrderError::Suite(format!("{msg} in {text:?}"));
        if let Some(rest) = text.strip_prefix("all:") {
            let max_n = rest.parse().map_err(|_| bad("bad vertex bound"))?;
            return Ok(SuiteSpec::AllConnected { max_n });
        }
        if let Some(rest) = text.strip_prefix("random:") {
            let parts: Vec<&str> = rest.split(',').collect();
            let [count, n, p] = parts[..] else {
                return Err(bad("expected random:count,n,p"));
            };
            let seed = seed.ok_or_else(|| OrderError::Suite("random suites need a seed".into()))?;
            return Ok(SuiteSpec::Random {
                count: count.parse().map_err(|_| bad("bad count"))?,
                n: n.parse().map_err(|_| bad("bad vertex count"))?,
                p: p.parse().map_err(|_| bad("bad edge probability"))?,
                seed,
            });
        }
        Err(bad("expected all:N or random:count,n,p"))
    }
}

/// Every connected graph on exactly `n` vertices, up to isomorphism, sorted
/// by edge count then canonical form.
pub fn connected_graphs(n: usize) -> Vec<Graph> {
    let mut forms: BTreeSet<(usize, u64)> = BTreeSet::new();
    if n == 1 {
        forms.insert((0, 0));
    } else if n > 1 {
        // removing a non-cut vertex leaves a connected graph, so extending
        // every smaller connected graph by one vertex reaches them all
        let smaller = connected_graphs(n - 1);
        forms = smaller
            .par_iter()
            .flat_map_iter(|g| {
                (1u32..1 << (n - 1)).map(move |mask| {
                    let extra = (0..n - 1).filter(|i| mask >> i & 1 == 1).map(|i| (i, n - 1));
                    let grown = Graph::new(n, g.edges().iter().copied().chain(extra)).expect("simple");
                    (grown.edge_count(), graph_canonical_form(&grown))
                })
            })
            .collect();
    }
    forms.into_iter().map(|(_, bits)| graph_from_form(n, bits)).collect()
}

pub fn image_suite(spec: &SuiteSpec) -> Result<Vec<Graph>, OrderError> {
    match *spec {
        SuiteSpec::AllConnected { max_n } => {
            if !(1..=MAX_EXHAUSTIVE_SUITE_N).contains(&max_n) {
                return Err(OrderError::Suite(format!(
                    "exhaustive suites support 1..={MAX_EXHAUSTIVE_SUITE_N} vertices, got {max_n}"
                )));
            }
            Ok((1..=max_n).flat_map(connected_graphs).collect())
        }
        SuiteSpec::Random { count, n, p, seed } => {
            if !(1..=MAX_RANDOM_SUITE_N).contains(&n) {
                return Err(OrderError::Suite(format!(
                    "random suites support 1..={MAX_RANDOM_SUITE_N} vertices, got {n}"
                )));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(OrderError::Suite(format!("edge probability {p} outside [0, 1]")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok((0..count)
                .map(|_| {
                    let mut edges = Vec::new();
                    for u in 0..n {
                        for v in u + 1..n {
                            if rng.random_bool(p) {
                                edges.push((u, v));
                            }
                        }
                    }
                    Graph::new(n, edges).expect("simple")
                })
                .collect())
        }
    }
}

/// Label of suite graph `i` in witnesses and exports.
pub fn graph_id(i: usize) -> String {
    format!("H{i}")
}

/// Outcome of comparing `t'` against `t` over the suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dominance {
    /// `hom(t', h) >= hom(t, h)` for every suite image.
    Consistent,
    /// First suite image with `hom(t', h) < hom(t, h)`.
    Refuted { witness: usize },
}

impl Dominance {
    pub fn is_consistent(self) -> bool {
        self == Dominance::Consistent
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderRelation {
    pub k: usize,
    pub trees: Vec<CanonicalTree>,
    pub suite: Vec<Graph>,
    /// `counts[i][j] = hom(trees[i], suite[j])`.
    pub counts: Vec<Vec<HomCount>>,
    /// `dominates[i][j]`: does `trees[i]` dominate `trees[j]`?
    pub dominates: Vec<Vec<Dominance>>,
}

pub fn empirical_order(trees: &[CanonicalTree], suite: &[Graph]) -> Result<OrderRelation, OrderError> {
    let k = trees.first().map_or(0, |t| t.k);
    if let Some(t) = trees.iter().find(|t| t.k != k) {
        return Err(OrderError::MixedK(k, t.k));
    }
    let counts: Vec<Vec<HomCount>> = trees
        .par_iter()
        .map(|t| suite.iter().map(|h| hom_tree(&t.tree, h)).collect())
        .collect();
    let dominates = counts
        .iter()
        .map(|upper| {
            counts
                .iter()
                .map(|lower| {
                    match upper.iter().zip(lower).position(|(a, b)| a < b) {
                        Some(witness) => Dominance::Refuted { witness },
                        None => Dominance::Consistent,
                    }
                })
                .collect()
        })
        .collect();
    Ok(OrderRelation {
        k,
        trees: trees.to_vec(),
        suite: suite.to_vec(),
        counts,
        dominates,
    })
}

#[derive(Serialize)]
struct RelationDoc<'a> {
    schema: &'a str,
    k: usize,
    note: &'a str,
    trees: Vec<RelationRow>,
    suite: Vec<SuiteEntry<'a>>,
}

#[derive(Serialize)]
struct RelationRow {
    code: String,
    leaves: usize,
    /// Entry `j`: `≥` if this tree is consistent-dominant over tree `j`.
    entries: Vec<String>,
}

#[derive(Serialize)]
struct SuiteEntry<'a> {
    id: String,
    graph: &'a Graph,
}

impl OrderRelation {
    /// Indices of trees with no refutation against any other tree.
    pub fn unrefuted_maxima(&self) -> Vec<usize> {
        (0..self.trees.len())
            .filter(|&i| self.dominates[i].iter().all(|d| d.is_consistent()))
            .collect()
    }

    /// Index of the star, if present.
    pub fn star_index(&self) -> Option<usize> {
        self.trees.iter().position(|t| t.tree.is_star())
    }

    pub fn to_toml(&self) -> String {
        let doc = RelationDoc {
            schema: RELATION_SCHEMA,
            k: self.k,
            note: "entries are relative to the listed suite: ≥ means no suite graph refutes it",
            trees: self
                .trees
                .iter()
                .zip(&self.dominates)
                .map(|(t, row)| RelationRow {
                    code: t.code.clone(),
                    leaves: t.leaf_count,
                    entries: row
                        .iter()
                        .map(|d| match d {
                            Dominance::Consistent => "≥".to_string(),
                            Dominance::Refuted { witness } => format!("witness:{}", graph_id(*witness)),
                        })
                        .collect(),
                })
                .collect(),
            suite: self
                .suite
                .iter()
                .enumerate()
                .map(|(i, graph)| SuiteEntry { id: graph_id(i), graph })
                .collect(),
        };
        toml::to_string(&doc).expect("relation serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassMaxViolation {
    pub graph: usize,
    pub leaves: usize,
    pub max: HomCount,
    pub next_leaves: usize,
    pub next_max: HomCount,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassMaxReport {
    pub k: usize,
    pub suite_size: usize,
    /// Per suite graph: `(leaf count, max count in that class)`, ascending.
    pub maxima: Vec<Vec<(usize, HomCount)>>,
    pub violations: Vec<ClassMaxViolation>,
}

impl ClassMaxReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that the largest count among trees with `l` leaves never exceeds
/// the largest among trees with `l + 1` leaves.
pub fn class_max_check(k: usize, suite: &[Graph]) -> Result<ClassMaxReport, OrderError> {
    if !(1..=MAX_CLASS_CHECK_K).contains(&k) {
        return Err(OrderError::KOutOfRange { k, min: 1, max: MAX_CLASS_CHECK_K });
    }
    let trees = enumerate_free_trees(k)?;
    let maxima: Vec<Vec<(usize, HomCount)>> = suite
        .par_iter()
        .map(|h| {
            let mut by_class: BTreeMap<usize, HomCount> = BTreeMap::new();
            for t in &trees {
                let c = hom_tree(&t.tree, h);
                let slot = by_class.entry(t.leaf_count).or_default();
                if c > *slot {
                    *slot = c;
                }
            }
            by_class.into_iter().collect()
        })
        .collect();
    let mut violations = Vec::new();
    for (graph, row) in maxima.iter().enumerate() {
        for w in row.windows(2) {
            if w[0].1 > w[1].1 {
                violations.push(ClassMaxViolation {
                    graph,
                    leaves: w[0].0,
                    max: w[0].1.clone(),
                    next_leaves: w[1].0,
                    next_max: w[1].1.clone(),
                });
            }
        }
    }
    Ok(ClassMaxReport {
        k,
        suite_size: suite.len(),
        maxima,
        violations,
    })
}

/// Node of a Hasse diagram: trees whose counts agree on the whole suite.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HasseNode {
    pub members: Vec<usize>,
    pub codes: Vec<String>,
    pub leaf_counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HasseDiagram {
    pub nodes: Vec<HasseNode>,
    /// `(lower, upper)` node pairs of the covering relation.
    pub arcs: Vec<(usize, usize)>,
}

pub fn hasse(rel: &OrderRelation) -> HasseDiagram {
    let m = rel.trees.len();
    let dom = |i: usize, j: usize| rel.dominates[i][j].is_consistent();

    let mut node_of = vec![usize::MAX; m];
    let mut nodes: Vec<HasseNode> = Vec::new();
    for i in 0..m {
        if node_of[i] != usize::MAX {
            continue;
        }
        let members: Vec<usize> = (i..m).filter(|&j| node_of[j] == usize::MAX && dom(i, j) && dom(j, i)).collect();
        for &j in &members {
            node_of[j] = nodes.len();
        }
        nodes.push(HasseNode {
            codes: members.iter().map(|&j| rel.trees[j].code.clone()).collect(),
            leaf_counts: members.iter().map(|&j| rel.trees[j].leaf_count).collect(),
            members,
        });
    }

    // strict order between classes, via representatives
    let rep: Vec<usize> = nodes.iter().map(|n| n.members[0]).collect();
    let above = |x: usize, y: usize| x != y && dom(rep[y], rep[x]);
    let count = nodes.len();
    let mut arcs = Vec::new();
    for x in 0..count {
        for y in 0..count {
            if above(x, y) && !(0..count).any(|z| above(x, z) && above(z, y)) {
                arcs.push((x, y));
            }
        }
    }
    HasseDiagram { nodes, arcs }
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering, lower trees at the bottom.
pub fn dot_export(d: &HasseDiagram) -> String {
    let mut out = String::from("digraph hasse {\n  rankdir=BT;\n  node [shape=box];\n");
    for (i, node) in d.nodes.iter().enumerate() {
        let label = node
            .codes
            .iter()
            .zip(&node.leaf_counts)
            .map(|(c, l)| format!("{} leaves={l}", dot_escape(c)))
            .collect::<Vec<_>>()
            .join("\\n");
        let _ = writeln!(out, "  n{i} [label=\"{label}\"];");
    }
    for (a, b) in &d.arcs {
        let _ = writeln!(out, "  n{a} -> n{b};");
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_codes() {
        assert_eq!(canonical_code(&Tree::path(1)), "(())");
        assert_eq!(canonical_code(&Tree::star(3)), "(()()())");
        // path relabelled
        let p = as_tree(Graph::new(4, [(2, 0), (0, 3), (3, 1)]).unwrap()).unwrap();
        assert_eq!(canonical_code(&p), canonical_code(&Tree::path(3)));
        assert_ne!(canonical_code(&Tree::path(3)), canonical_code(&Tree::star(3)));
        assert_eq!(centroids(&Tree::path(3)), vec![1, 2]);
        assert_eq!(centroids(&Tree::path(4)), vec![2]);
    }

    #[test]
    fn code_roundtrip() {
        for t in enumerate_free_trees(6).unwrap() {
            assert_eq!(canonical_code(&t.tree), t.code);
        }
        assert!(tree_from_code("(()").is_none());
        assert!(tree_from_code("()()").is_none());
        assert!(tree_from_code("(x)").is_none());
    }

    #[test]
    fn enumeration_counts() {
        let counts: Vec<usize> = (1..=10).map(|k| enumerate_free_trees(k).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 3, 6, 11, 23, 47, 106, 235]);
        assert!(enumerate_free_trees(0).is_err());
        assert!(enumerate_free_trees(13).is_err());
    }

    #[test]
    fn enumeration_small_cases() {
        let three = enumerate_free_trees(3).unwrap();
        assert_eq!(three.len(), 2);
        let codes: BTreeSet<_> = three.iter().map(|t| t.code.clone()).collect();
        assert!(codes.contains(&canonical_code(&Tree::path(3))));
        assert!(codes.contains(&canonical_code(&Tree::star(3))));
        assert_eq!(enumerate_free_trees(1).unwrap()[0].tree.graph(), &Graph::path(1));
        let sorted: Vec<_> = three.iter().map(|t| t.code.clone()).collect();
        let mut check = sorted.clone();
        check.sort();
        assert_eq!(sorted, check);
    }

    #[test]
    fn leaf_filter() {
        let three = enumerate_free_trees(3).unwrap();
        let stars = filter_by_leaves(&three, 3);
        assert_eq!(stars.len(), 1);
        assert!(stars[0].tree.is_star());
        for k in 2..=8 {
            let top = filter_by_leaves(&enumerate_free_trees(k).unwrap(), k);
            assert_eq!(top.len(), 1);
            assert!(top[0].tree.is_star());
        }
        let brooms = filter_by_leaves(&enumerate_free_trees(5).unwrap(), 4);
        let codes: BTreeSet<_> = brooms.iter().map(|t| t.code.clone()).collect();
        let expected: BTreeSet<_> = [(3, 1), (2, 2)]
            .iter()
            .map(|&(a, b)| canonical_code(&crate::sidorenko::broom(5, a, b).unwrap().tree))
            .collect();
        assert_eq!(codes, expected);
    }

    #[test]
    fn connected_graph_counts() {
        let counts: Vec<usize> = (1..=6).map(|n| connected_graphs(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 6, 21, 112]);
        let suite = image_suite(&SuiteSpec::AllConnected { max_n: 3 }).unwrap();
        let expected = [Graph::empty(1), Graph::path(1), Graph::path(2), Graph::complete(3)];
        assert_eq!(suite.len(), expected.len());
        for (got, want) in suite.iter().zip(&expected) {
            assert_eq!(got.n(), want.n());
            assert_eq!(graph_canonical_form(got), graph_canonical_form(want));
        }
        assert_eq!(image_suite(&SuiteSpec::AllConnected { max_n: 1 }).unwrap(), vec![Graph::empty(1)]);
        assert!(image_suite(&SuiteSpec::AllConnected { max_n: 8 }).is_err());
    }

    #[test]
    fn canonical_form_is_invariant() {
        let c5 = Graph::cycle(5);
        let relabelled = Graph::new(5, [(0, 2), (2, 4), (4, 1), (1, 3), (3, 0)]).unwrap();
        assert_eq!(graph_canonical_form(&c5), graph_canonical_form(&relabelled));
        assert_ne!(graph_canonical_form(&c5), graph_canonical_form(&Graph::path(4)));
    }

    #[test]
    fn random_suite_is_reproducible() {
        let spec = SuiteSpec::parse("random:5,6,0.4", Some(7)).unwrap();
        assert_eq!(image_suite(&spec).unwrap(), image_suite(&spec).unwrap());
        let other = SuiteSpec::parse("random:5,6,0.4", Some(8)).unwrap();
        assert_ne!(image_suite(&spec).unwrap(), image_suite(&other).unwrap());
        assert!(SuiteSpec::parse("random:5,6,0.4", None).is_err());
        assert!(SuiteSpec::parse("bogus", None).is_err());
        assert_eq!(SuiteSpec::parse("all:4", None).unwrap(), SuiteSpec::AllConnected { max_n: 4 });
        assert!(image_suite(&SuiteSpec::Random { count: 1, n: 3, p: 1.5, seed: 0 }).is_err());
    }

    #[test]
    fn order_for_three_edges() {
        let trees = enumerate_free_trees(3).unwrap();
        let suite = image_suite(&SuiteSpec::AllConnected { max_n: 4 }).unwrap();
        let rel = empirical_order(&trees, &suite).unwrap();
        let star = rel.star_index().unwrap();
        let path = 1 - star;
        assert!(rel.dominates[star][path].is_consistent());
        let Dominance::Refuted { witness } = rel.dominates[path][star] else {
            panic!("path cannot dominate the star");
        };
        assert!(rel.counts[path][witness] < rel.counts[star][witness]);
        assert!(rel.dominates[path][path].is_consistent());
        assert_eq!(rel.unrefuted_maxima(), vec![star]);

        let d = hasse(&rel);
        assert_eq!(d.nodes.len(), 2);
        assert_eq!(d.arcs, vec![(node_index(&d, path), node_index(&d, star))]);
    }

    fn node_index(d: &HasseDiagram, member: usize) -> usize {
        d.nodes.iter().position(|n| n.members.contains(&member)).unwrap()
    }

    #[test]
    fn regular_suite_collapses() {
        let trees = enumerate_free_trees(5).unwrap();
        let rel = empirical_order(&trees, &[Graph::cycle(4), Graph::complete(4)]).unwrap();
        let d = hasse(&rel);
        assert_eq!(d.nodes.len(), 1);
        assert_eq!(d.nodes[0].members.len(), 6);
        assert!(d.arcs.is_empty());
    }

    #[test]
    fn single_tree_and_mixed_k() {
        let trees = enumerate_free_trees(1).unwrap();
        let d = hasse(&empirical_order(&trees, &[Graph::path(2)]).unwrap());
        assert_eq!(d.nodes.len(), 1);
        assert!(d.arcs.is_empty());

        let mut mixed = enumerate_free_trees(2).unwrap();
        mixed.extend(enumerate_free_trees(3).unwrap());
        assert_eq!(empirical_order(&mixed, &[]).unwrap_err(), OrderError::MixedK(2, 3));
    }

    #[test]
    fn dot_output() {
        let empty = HasseDiagram { nodes: vec![], arcs: vec![] };
        assert_eq!(dot_export(&empty), "digraph hasse {\n  rankdir=BT;\n  node [shape=box];\n}\n");
        let trees = enumerate_free_trees(3).unwrap();
        let d = hasse(&empirical_order(&trees, &[Graph::path(2)]).unwrap());
        let dot = dot_export(&d);
        assert_eq!(dot.matches("->").count(), 1);
        assert!(dot.contains("leaves=3"));
    }

    #[test]
    fn class_max_small() {
        let suite = image_suite(&SuiteSpec::AllConnected { max_n: 4 }).unwrap();
        let rep = class_max_check(3, &suite).unwrap();
        assert!(rep.passed());
        for row in &rep.maxima {
            assert_eq!(row.iter().map(|(l, _)| *l).collect::<Vec<_>>(), vec![2, 3]);
        }
        let regular = class_max_check(6, &[Graph::cycle(5)]).unwrap();
        assert!(regular.maxima[0].iter().all(|(_, c)| *c == 5 * 64));
        assert!(class_max_check(10, &suite).is_err());
    }
}
