//! Cross-checks of the library against small independent reference
//! implementations that only use the public graph accessors.

use std::collections::{BTreeMap, BTreeSet};

use homtree::graph::{Graph, Tree};
use homtree::hom::{hom_tree, star_count};
use homtree::order::{
    canonical_code, connected_graphs, empirical_order, enumerate_free_trees, graph_canonical_form,
    hasse, image_suite, SuiteSpec,
};
use homtree::sidorenko::{transform_chain, PairStrategy, TransformCertificate, CERTIFICATE_TOLERANCE};
use proptest::prelude::*;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn isomorphic(a: &Graph, b: &Graph, perms: &[Vec<usize>]) -> bool {
    if a.n() != b.n() || a.edge_count() != b.edge_count() {
        return false;
    }
    let mut da = a.degrees();
    let mut db = b.degrees();
    da.sort_unstable();
    db.sort_unstable();
    if da != db {
        return false;
    }
    perms
        .iter()
        .any(|p| a.edges().iter().all(|&(u, v)| b.has_edge(p[u], p[v])))
}

/// Rooted encoding; minimised over every root, so it ignores centroids.
fn rooted_code(g: &Graph, v: usize, parent: Option<usize>) -> String {
    let mut kids: Vec<String> = g
        .neighbors(v)
        .iter()
        .filter(|&&w| Some(w) != parent)
        .map(|&w| rooted_code(g, w, Some(v)))
        .collect();
    kids.sort();
    format!("[{}]", kids.concat())
}

fn all_roots_code(t: &Tree) -> String {
    (0..t.n()).map(|r| rooted_code(t.graph(), r, None)).min().unwrap()
}

/// Every tree on `k + 1` labelled vertices where vertex `i` hangs off some
/// smaller vertex. Each free tree appears at least once.
fn recursive_trees(k: usize) -> Vec<Tree> {
    let mut out = Vec::new();
    let mut parents = vec![0usize; k];
    loop {
        out.push(Tree::from_parents(&parents).unwrap());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if parents[i] < i {
                parents[i] += 1;
                break;
            }
            parents[i] = 0;
        }
    }
}

fn brute_hom(g: &Graph, h: &Graph) -> u64 {
    let n = g.n();
    let mut phi = vec![0usize; n];
    let mut count = 0;
    if h.n() == 0 {
        return u64::from(n == 0);
    }
    loop {
        if g.edges().iter().all(|&(u, v)| h.has_edge(phi[u], phi[v])) {
            count += 1;
        }
        let mut i = 0;
        loop {
            if i == n {
                return count;
            }
            phi[i] += 1;
            if phi[i] < h.n() {
                break;
            }
            phi[i] = 0;
            i += 1;
        }
    }
}

#[test]
fn free_tree_counts_match_labelled_enumeration() {
    for k in 1..=8 {
        let distinct: BTreeSet<String> = recursive_trees(k).iter().map(all_roots_code).collect();
        let trees = enumerate_free_trees(k).unwrap();
        assert_eq!(trees.len(), distinct.len(), "k = {k}");
        let ours: BTreeSet<String> = trees.iter().map(|t| all_roots_code(&t.tree)).collect();
        assert_eq!(ours, distinct, "k = {k}");
    }
}

#[test]
fn canonical_codes_agree_with_isomorphism() {
    for k in 1..=6 {
        let perms = permutations(k + 1);
        let trees = recursive_trees(k);
        // sample labelled trees against each other
        let sample: Vec<&Tree> = trees.iter().step_by((trees.len() / 40).max(1)).collect();
        for a in &sample {
            for b in &sample {
                assert_eq!(
                    canonical_code(a) == canonical_code(b),
                    isomorphic(a.graph(), b.graph(), &perms),
                    "{a:?} vs {b:?}"
                );
            }
        }
    }
}

#[test]
fn connected_graph_classes_match_isomorphism() {
    for n in 1..=5 {
        let perms = permutations(n);
        let graphs = connected_graphs(n);
        for (i, a) in graphs.iter().enumerate() {
            assert!(a.is_connected());
            for b in &graphs[i + 1..] {
                assert!(!isomorphic(a, b, &perms));
            }
        }
        // every labelled connected graph lands in one of the classes
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        let forms: BTreeSet<u64> = graphs.iter().map(graph_canonical_form).collect();
        for mask in 0u32..(1 << pairs.len()) {
            let edges: Vec<_> = pairs
                .iter()
                .enumerate()
                .filter(|(b, _)| mask >> b & 1 == 1)
                .map(|(_, &e)| e)
                .collect();
            let g = Graph::new(n, edges).unwrap();
            if g.is_connected() {
                assert!(forms.contains(&graph_canonical_form(&g)));
            }
        }
    }
}

#[test]
fn hasse_reachability_is_the_relation() {
    let suite = image_suite(&SuiteSpec::AllConnected { max_n: 4 }).unwrap();
    for k in 3..=6 {
        let trees = enumerate_free_trees(k).unwrap();
        let rel = empirical_order(&trees, &suite).unwrap();
        let d = hasse(&rel);
        let m = d.nodes.len();
        let mut reach = vec![vec![false; m]; m];
        for (i, row) in reach.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(lo, hi) in &d.arcs {
            reach[lo][hi] = true;
        }
        for z in 0..m {
            for x in 0..m {
                for y in 0..m {
                    if reach[x][z] && reach[z][y] {
                        reach[x][y] = true;
                    }
                }
            }
        }
        let node_of: BTreeMap<usize, usize> = d
            .nodes
            .iter()
            .enumerate()
            .flat_map(|(x, node)| node.members.iter().map(move |&i| (i, x)))
            .collect();
        for i in 0..trees.len() {
            for j in 0..trees.len() {
                let dominated = rel.counts[i].iter().zip(&rel.counts[j]).all(|(a, b)| a <= b);
                assert_eq!(reach[node_of[&i]][node_of[&j]], dominated, "k = {k}, {i} vs {j}");
            }
        }
    }
}

fn arb_tree(max_k: usize) -> impl Strategy<Value = Tree> {
    (1..=max_k)
        .prop_flat_map(|k| (0..k).map(|i| 0..=i).collect::<Vec<_>>())
        .prop_map(|parents| Tree::from_parents(&parents).unwrap())
}

fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        proptest::collection::vec(any::<bool>(), pairs.len()).prop_map(move |keep| {
            let edges: Vec<_> = pairs.iter().zip(keep).filter(|(_, k)| *k).map(|(&e, _)| e).collect();
            Graph::new(n, edges).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tree_counts_match_reference(t in arb_tree(6), h in arb_graph(5)) {
        prop_assert_eq!(hom_tree(&t, &h), brute_hom(t.graph(), &h));
    }

    #[test]
    fn chains_end_at_the_star_and_survive_a_roundtrip(
        t in arb_tree(8),
        h in arb_graph(5),
        best in any::<bool>(),
    ) {
        let strategy = if best { PairStrategy::BestPair } else { PairStrategy::FirstPair };
        let cert = transform_chain(&t, &h, strategy).unwrap();
        prop_assert!(cert.end.is_star());
        prop_assert_eq!(cert.steps.len(), if t.is_star() { 0 } else { t.k() - t.leaf_count() });
        for w in cert.steps.windows(2) {
            prop_assert!(w[0].hom_after <= w[1].hom_after);
        }
        if let Some(last) = cert.steps.last() {
            prop_assert_eq!(&last.hom_after, &star_count(t.k(), &h));
        }
        let text = cert.to_toml();
        prop_assert!(text.starts_with("schema = \"homtree.certificate.v1\"\n"));
        let back = TransformCertificate::from_toml(&text).unwrap();
        prop_assert_eq!(&back, &cert);
        prop_assert!(back.check(CERTIFICATE_TOLERANCE).is_empty());
    }
}

#[test]
fn tampered_counts_are_caught() {
    let h = Graph::path(3);
    let cert = transform_chain(&Tree::path(5), &h, PairStrategy::FirstPair).unwrap();
    assert!(!cert.steps.is_empty());
    let mut bad = cert.clone();
    bad.steps[0].hom_after = bad.steps[0].hom_before.clone();
    bad.steps[0].hom_before = (bad.steps[0].hom_before.value() + 1u32).into();
    assert!(!bad.check(CERTIFICATE_TOLERANCE).is_empty());
    let mut bad = cert;
    bad.star_count = 1u64.into();
    assert!(!bad.check(CERTIFICATE_TOLERANCE).is_empty());
}
