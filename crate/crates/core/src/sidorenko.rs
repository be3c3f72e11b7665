//! Leaf migration: turning any tree into the star without ever losing
//! homomorphisms.
//!
//! One step picks two leaves `b1`, `b2` of the skeleton (the tree with its
//! leaves removed), strips the `d1` and `d2` leaves hanging off them, and hangs
//! all `d1 + d2` back onto whichever of the two carries the larger moment
//!
//! ```text
//! M_i = sum_u P[f(b_i) = u] * deg(u)^(d1 + d2)
//! ```
//!
//! under a uniform homomorphism of the stripped tree. The result has one more
//! leaf and at least as many homomorphisms; iterating ends at the star.
//!
//! Every load-bearing relation of a step is checked in exact integer
//! arithmetic. The Hölder and AM-GM bounds are reported as `f64` for
//! inspection only.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{as_tree, Graph, GraphError, Tree, Vertex};
use crate::hom::{
    distribution_from_table, hom_count, hom_tree, pinned_pair, pinned_single, star_count,
    HomCount, HomError, PairDistribution, PinnedPairTable,
};
use crate::hoffman::{rel_le, DEFAULT_RELATIVE_TOLERANCE};

pub const CERTIFICATE_SCHEMA: &str = "homtree.certificate.v1";

/// Number of points in the default `phi` grid.
pub const DEFAULT_GRID_POINTS: usize = 101;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SidorenkoError {
    #[error("tree is already a star")]
    AlreadyStar,
    #[error("vertex {0} is not a leaf of the skeleton")]
    NotSkeletonLeaf(Vertex),
    #[error("the two designated skeleton leaves must differ (both are {0})")]
    SamePins(Vertex),
    #[error("the stripped tree has no homomorphisms into the image")]
    ZeroBase,
    #[error("broom needs d1, d2 >= 1 and d1 + d2 = k - 1 (got k={k}, d1={d1}, d2={d2})")]
    BroomParameters { k: usize, d1: usize, d2: usize },
    #[error("skeleton is not a single edge between the two designated vertices")]
    NotBroom,
    #[error("broom chains need k >= 3, got {0}")]
    BroomTooSmall(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Hom(#[from] HomError),
}

/// How the two skeleton leaves are chosen when there are more than two.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairStrategy {
    /// The two smallest vertex ids.
    #[default]
    FirstPair,
    /// The pair whose step yields the most homomorphisms, ties by ids.
    BestPair,
}

impl FromStr for PairStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "first-pair" => Ok(PairStrategy::FirstPair),
            "best-pair" => Ok(PairStrategy::BestPair),
            other => Err(format!("unknown strategy {other:?} (expected first-pair or best-pair)")),
        }
    }
}

impl fmt::Display for PairStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PairStrategy::FirstPair => "first-pair",
            PairStrategy::BestPair => "best-pair",
        })
    }
}

/// `T(b1, b2)`: the tree with the leaves at two skeleton leaves removed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pruned {
    pub tree: Tree,
    /// Pruned vertex `i` is vertex `vertices[i]` of the original tree.
    pub vertices: Vec<Vertex>,
    /// Designated vertices as pruned ids.
    pub b1: Vertex,
    pub b2: Vertex,
    /// Removed leaves (original ids) at `b1` and `b2`.
    pub leaves1: Vec<Vertex>,
    pub leaves2: Vec<Vertex>,
}

impl Pruned {
    pub fn d1(&self) -> usize {
        self.leaves1.len()
    }

    pub fn d2(&self) -> usize {
        self.leaves2.len()
    }
}

pub fn prune(t: &Tree, b1: Vertex, b2: Vertex) -> Result<Pruned, SidorenkoError> {
    if b1 == b2 {
        return Err(SidorenkoError::SamePins(b1));
    }
    if t.is_star() {
        return Err(SidorenkoError::AlreadyStar);
    }
    let info = t.skeleton_info()?;
    for b in [b1, b2] {
        if !info.skeleton_leaves.contains(&b) {
            return Err(SidorenkoError::NotSkeletonLeaf(b));
        }
    }
    let g = t.graph();
    let leaves_at = |b: Vertex| -> Vec<Vertex> {
        g.neighbors(b).iter().copied().filter(|&w| t.is_leaf(w)).collect()
    };
    let (leaves1, leaves2) = (leaves_at(b1), leaves_at(b2));
    let vertices: Vec<Vertex> = (0..t.n())
        .filter(|v| !leaves1.contains(v) && !leaves2.contains(v))
        .collect();
    let index = |v: Vertex| vertices.binary_search(&v).expect("designated vertex survives");
    let tree = as_tree(g.induced(&vertices))?;
    Ok(Pruned {
        b1: index(b1),
        b2: index(b2),
        tree,
        vertices,
        leaves1,
        leaves2,
    })
}

fn deg_pows(h: &Graph, e: usize) -> Vec<BigUint> {
    let e = u32::try_from(e).expect("exponent fits in u32");
    h.degrees().iter().map(|&d| BigUint::from(d).pow(e)).collect()
}

/// Right-hand side of the decomposition over the pair table:
/// `sum_{u,v} table[u][v] * deg(u)^d1 * deg(v)^d2`.
fn decomposition_sum(table: &PinnedPairTable, h: &Graph, d1: usize, d2: usize) -> BigUint {
    let (p1, p2) = (deg_pows(h, d1), deg_pows(h, d2));
    let mut total = BigUint::zero();
    for (u, row) in table.counts.iter().enumerate() {
        for (v, c) in row.iter().enumerate() {
            if !c.is_zero() {
                total += c * &p1[u] * &p2[v];
            }
        }
    }
    total
}

/// Exact moments `M_1`, `M_2` of `deg^(d1+d2)` under the marginals.
fn moments(dist: &PairDistribution, h: &Graph, exponent: usize) -> (BigRational, BigRational) {
    let pows: Vec<BigRational> = deg_pows(h, exponent)
        .into_iter()
        .map(|p| BigRational::from_integer(BigInt::from(p)))
        .collect();
    let dot = |m: &[BigRational]| -> BigRational { m.iter().zip(&pows).map(|(a, b)| a * b).sum() };
    (dot(&dist.p1), dot(&dist.p2))
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Both sides of the decomposition identity for one designated pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecompositionReport {
    /// `#hom(t, h)`.
    pub lhs: HomCount,
    /// Sum over the pinned pair table of the stripped tree, weighted by
    /// `deg(u)^d1 * deg(v)^d2`.
    pub rhs: HomCount,
    pub holds: bool,
}

pub fn verify_decomposition(
    t: &Tree,
    b1: Vertex,
    b2: Vertex,
    h: &Graph,
) -> Result<DecompositionReport, SidorenkoError> {
    let pruned = prune(t, b1, b2)?;
    let table = pinned_pair(&pruned.tree, pruned.b1, pruned.b2, h)?;
    let lhs = hom_tree(t, h);
    let rhs = HomCount::from(decomposition_sum(&table, h, pruned.d1(), pruned.d2()));
    Ok(DecompositionReport {
        holds: lhs == rhs,
        lhs,
        rhs,
    })
}

struct Bounds {
    base: HomCount,
    m1: BigRational,
    m2: BigRational,
    d1: usize,
    d2: usize,
}

impl Bounds {
    fn compute(t: &Tree, b1: Vertex, b2: Vertex, h: &Graph) -> Result<Self, SidorenkoError> {
        let pruned = prune(t, b1, b2)?;
        let table = pinned_pair(&pruned.tree, pruned.b1, pruned.b2, h)?;
        let dist = distribution_from_table(&table).map_err(|_| SidorenkoError::ZeroBase)?;
        let (m1, m2) = moments(&dist, h, pruned.d1() + pruned.d2());
        Ok(Bounds {
            base: dist.total,
            m1,
            m2,
            d1: pruned.d1(),
            d2: pruned.d2(),
        })
    }

    fn holder(&self) -> f64 {
        holder_value(&self.base, &self.m1, &self.m2, self.d1, self.d2)
    }

    fn amgm(&self) -> f64 {
        let larger = if self.m1 >= self.m2 { &self.m1 } else { &self.m2 };
        self.base.to_f64() * ratio_to_f64(larger)
    }
}

fn holder_value(base: &HomCount, m1: &BigRational, m2: &BigRational, d1: usize, d2: usize) -> f64 {
    let total = (d1 + d2) as f64;
    let (a, b) = (d1 as f64 / total, d2 as f64 / total);
    let (m1, m2) = (ratio_to_f64(m1), ratio_to_f64(m2));
    base.to_f64() * (a * m1.ln() + b * m2.ln()).exp()
}

/// `hom(T(b1,b2)) * M_1^(d1/(d1+d2)) * M_2^(d2/(d1+d2))`.
pub fn holder_bound(t: &Tree, b1: Vertex, b2: Vertex, h: &Graph) -> Result<f64, SidorenkoError> {
    Ok(Bounds::compute(t, b1, b2, h)?.holder())
}

/// `hom(T(b1,b2)) * max(M_1, M_2)`, the weighted AM-GM bound. It coincides
/// with the count of the tree that receives all leaves at the better vertex.
pub fn amgm_bound(t: &Tree, b1: Vertex, b2: Vertex, h: &Graph) -> Result<f64, SidorenkoError> {
    Ok(Bounds::compute(t, b1, b2, h)?.amgm())
}

/// Record of one leaf-migration step.
///
/// After the direction rule, `b1` is always the vertex that receives the
/// leaves. Vertex ids of `after` coincide with those of `before`: the moved
/// leaves keep their ids and only their attachment point changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformStep {
    pub b1: Vertex,
    pub b2: Vertex,
    pub d1: usize,
    pub d2: usize,
    /// Whether the direction rule reversed the initially designated order.
    pub swapped: bool,
    pub leaves_before: usize,
    pub leaves_after: usize,
    pub hom_before: HomCount,
    pub hom_after: HomCount,
    /// `#hom(T(b1, b2), h)`.
    pub hom_pruned: HomCount,
    /// Decomposition of `hom_before` over the pinned pair table.
    pub decomposition_value: HomCount,
    /// `hom_pruned * M_1` and `hom_pruned * M_2`: the counts obtained by
    /// attaching all `d1 + d2` leaves at `b1` resp. `b2`.
    pub moment_sum_b1: HomCount,
    pub moment_sum_b2: HomCount,
    /// `sum_u pinned_single(T(b1,b2), b1)[u] * deg(u)^(d1+d2)`.
    pub forkoff_value: HomCount,
    pub decomposition_ok: bool,
    pub forkoff_ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holder_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amgm_bound: Option<f64>,
    /// Vertex `i` of `T(b1, b2)` is vertex `pruned_vertices[i]` of `before`.
    pub pruned_vertices: Vec<Vertex>,
    /// Leaves re-hung from `b2` onto `b1`.
    pub moved_leaves: Vec<Vertex>,
    pub before: Tree,
    pub after: Tree,
}

/// Performs one step on the designated pair `(x, y)`, given in the order the
/// direction rule starts from.
pub fn step_for_pair(t: &Tree, x: Vertex, y: Vertex, h: &Graph) -> Result<TransformStep, SidorenkoError> {
    let pruned = prune(t, x, y)?;
    let table = pinned_pair(&pruned.tree, pruned.b1, pruned.b2, h)?;
    let hom_before = hom_tree(t, h);
    let decomposition_value = HomCount::from(decomposition_sum(&table, h, pruned.d1(), pruned.d2()));
    let exponent = pruned.d1() + pruned.d2();

    let (exact, swapped) = match distribution_from_table(&table) {
        Ok(dist) => {
            let (m1, m2) = moments(&dist, h, exponent);
            let swapped = m2 > m1;
            (Some((dist.total, m1, m2)), swapped)
        }
        Err(_) => (None, false),
    };

    let (b1, b2, pb1, d1, d2, moved) = if swapped {
        (y, x, pruned.b2, pruned.d2(), pruned.d1(), pruned.leaves1.clone())
    } else {
        (x, y, pruned.b1, pruned.d1(), pruned.d2(), pruned.leaves2.clone())
    };

    let edges = t.graph().edges().iter().map(|&(u, v)| {
        if moved.contains(&u) {
            (u, b1)
        } else if moved.contains(&v) {
            (b1, v)
        } else {
            (u, v)
        }
    });
    let after = as_tree(Graph::new(t.n(), edges)?)?;
    let hom_after = hom_tree(&after, h);

    let single = pinned_single(&pruned.tree, pb1, h)?;
    let pows = deg_pows(h, exponent);
    let forkoff_value = HomCount::from(
        single
            .counts
            .iter()
            .zip(&pows)
            .map(|(c, p)| c * p)
            .sum::<BigUint>(),
    );

    let (hom_pruned, moment_sum_b1, moment_sum_b2, holder_bound, amgm_bound) = match exact {
        Some((base, m1, m2)) => {
            let (m1, m2) = if swapped { (m2, m1) } else { (m1, m2) };
            let to_count = |m: &BigRational| {
                let scaled = m * BigRational::from_integer(BigInt::from(base.value().clone()));
                debug_assert!(scaled.is_integer());
                HomCount::from(scaled.to_integer().to_biguint().expect("nonnegative"))
            };
            let (s1, s2) = (to_count(&m1), to_count(&m2));
            let holder = holder_value(&base, &m1, &m2, d1, d2);
            let amgm = s1.to_f64();
            (base, s1, s2, Some(holder), Some(amgm))
        }
        None => (HomCount::zero(), HomCount::zero(), HomCount::zero(), None, None),
    };

    Ok(TransformStep {
        b1,
        b2,
        d1,
        d2,
        swapped,
        leaves_before: t.leaf_count(),
        leaves_after: after.leaf_count(),
        decomposition_ok: decomposition_value == hom_before,
        forkoff_ok: forkoff_value == hom_after && moment_sum_b1 == forkoff_value,
        hom_before,
        hom_after,
        hom_pruned,
        decomposition_value,
        moment_sum_b1,
        moment_sum_b2,
        forkoff_value,
        holder_bound,
        amgm_bound,
        pruned_vertices: pruned.vertices,
        moved_leaves: moved,
        before: t.clone(),
        after,
    })
}

/// One leaf-migration step on a non-star tree.
pub fn transform_step(t: &Tree, h: &Graph, strategy: PairStrategy) -> Result<TransformStep, SidorenkoError> {
    if t.is_star() {
        return Err(SidorenkoError::AlreadyStar);
    }
    let leaves = t.skeleton_info()?.skeleton_leaves;
    match strategy {
        PairStrategy::FirstPair => step_for_pair(t, leaves[0], leaves[1], h),
        PairStrategy::BestPair => {
            let mut best: Option<TransformStep> = None;
            for (i, &x) in leaves.iter().enumerate() {
                for &y in &leaves[i + 1..] {
                    let step = step_for_pair(t, x, y, h)?;
                    if best.as_ref().is_none_or(|b| step.hom_after > b.hom_after) {
                        best = Some(step);
                    }
                }
            }
            Ok(best.expect("a non-star tree has at least two skeleton leaves"))
        }
    }
}

/// Problems found when re-checking a step or certificate.
pub type Issues = Vec<String>;

impl TransformStep {
    /// Checks the recorded fields against each other without recomputing
    /// counts. Float bounds are compared with relative tolerance `tol`.
    pub fn invariant_issues(&self, tol: f64) -> Issues {
        let mut issues = Vec::new();
        let mut require = |ok: bool, msg: &str| {
            if !ok {
                issues.push(msg.to_string());
            }
        };
        require(self.hom_before <= self.hom_after, "hom_before exceeds hom_after");
        require(self.after.k() == self.before.k(), "edge count changed");
        require(self.leaves_before == self.before.leaf_count(), "leaves_before mismatch");
        require(self.leaves_after == self.after.leaf_count(), "leaves_after mismatch");
        require(self.leaves_after == self.leaves_before + 1, "leaf count did not grow by one");
        require(self.decomposition_ok, "decomposition flagged as failing");
        require(self.decomposition_value == self.hom_before, "decomposition value differs from hom_before");
        require(self.forkoff_ok, "forkoff identity flagged as failing");
        require(self.forkoff_value == self.hom_after, "forkoff value differs from hom_after");
        require(self.moment_sum_b1 == self.forkoff_value, "moment sum at b1 differs from forkoff value");
        require(self.moment_sum_b1 >= self.moment_sum_b2, "direction rule violated: M2 > M1");
        require(self.d1 >= 1 && self.d2 >= 1, "designated skeleton leaves must carry leaves");
        require(self.moved_leaves.len() == self.d2, "moved leaf count differs from d2");
        match (self.holder_bound, self.amgm_bound) {
            (Some(holder), Some(amgm)) => {
                let before = self.hom_before.to_f64();
                require(rel_le(before, holder, tol), "hom_before exceeds the Hölder bound");
                require(rel_le(holder, amgm, tol), "Hölder bound exceeds the AM-GM bound");
                require(
                    rel_le(amgm, self.hom_after.to_f64(), tol) && rel_le(self.hom_after.to_f64(), amgm, tol),
                    "AM-GM bound differs from hom_after",
                );
            }
            (None, None) => require(self.hom_pruned.is_zero(), "bounds missing for a nonzero base"),
            _ => require(false, "only one of the float bounds is present"),
        }
        issues
    }
}

/// A full chain from a tree to the star, with the image it was computed for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformCertificate {
    pub schema: String,
    pub strategy: PairStrategy,
    pub k: usize,
    pub star_count: HomCount,
    pub image: Graph,
    pub start: Tree,
    pub end: Tree,
    #[serde(default)]
    pub steps: Vec<TransformStep>,
}

pub fn transform_chain(
    t: &Tree,
    h: &Graph,
    strategy: PairStrategy,
) -> Result<TransformCertificate, SidorenkoError> {
    let mut steps = Vec::new();
    let mut current = t.clone();
    while !current.is_star() {
        let step = transform_step(&current, h, strategy)?;
        current = step.after.clone();
        steps.push(step);
    }
    Ok(TransformCertificate {
        schema: CERTIFICATE_SCHEMA.to_string(),
        strategy,
        k: t.k(),
        star_count: star_count(t.k(), h),
        image: h.clone(),
        start: t.clone(),
        end: current,
        steps,
    })
}

impl TransformCertificate {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("certificate serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// Full re-verification: chain structure, recorded invariants, and every
    /// count recomputed from scratch. Empty means the certificate is sound.
    pub fn check(&self, tol: f64) -> Issues {
        let mut issues = Vec::new();
        if self.schema != CERTIFICATE_SCHEMA {
            issues.push(format!("unknown schema {:?}", self.schema));
        }
        if self.k != self.start.k() {
            issues.push("k differs from the start tree".into());
        }
        if !self.end.is_star() {
            issues.push("end tree is not a star".into());
        }
        let expected_steps = if self.start.is_star() {
            0
        } else {
            self.k - self.start.leaf_count()
        };
        if self.steps.len() != expected_steps {
            issues.push(format!(
                "chain has {} steps, expected {expected_steps}",
                self.steps.len()
            ));
        }
        if self.star_count != star_count(self.k, &self.image) {
            issues.push("star count is wrong".into());
        }
        let mut current = &self.start;
        for (i, step) in self.steps.iter().enumerate() {
            if &step.before != current {
                issues.push(format!("step {i}: does not continue the chain"));
            }
            issues.extend(step.invariant_issues(tol).into_iter().map(|m| format!("step {i}: {m}")));
            let (x, y) = if step.swapped { (step.b2, step.b1) } else { (step.b1, step.b2) };
            match step_for_pair(&step.before, x, y, &self.image) {
                Ok(replayed) => {
                    if !steps_match(&replayed, step, tol) {
                        issues.push(format!("step {i}: recorded values differ from recomputation"));
                    }
                }
                Err(e) => issues.push(format!("step {i}: cannot replay: {e}")),
            }
            current = &step.after;
        }
        if current != &self.end {
            issues.push("end tree does not match the last step".into());
        }
        let last = self.steps.last().map_or_else(|| hom_tree(&self.start, &self.image), |s| s.hom_after.clone());
        if last != self.star_count {
            issues.push("final count differs from the star count".into());
        }
        issues
    }
}

fn steps_match(a: &TransformStep, b: &TransformStep, tol: f64) -> bool {
    let close = |x: Option<f64>, y: Option<f64>| match (x, y) {
        (Some(x), Some(y)) => rel_le(x, y, tol) && rel_le(y, x, tol),
        (None, None) => true,
        _ => false,
    };
    let mut a = a.clone();
    let mut b = b.clone();
    let floats_ok = close(a.holder_bound, b.holder_bound) && close(a.amgm_bound, b.amgm_bound);
    a.holder_bound = None;
    a.amgm_bound = None;
    b.holder_bound = None;
    b.amgm_bound = None;
    floats_ok && a == b
}

/// Broom `B(d1, d2)`: edge `0-1` with `d1` leaves at 0 and `d2` leaves at 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Broom {
    pub k: usize,
    pub d1: usize,
    pub d2: usize,
    pub tree: Tree,
}

pub fn broom(k: usize, d1: usize, d2: usize) -> Result<Broom, SidorenkoError> {
    if d1 == 0 || d2 == 0 || d1 + d2 + 1 != k {
        return Err(SidorenkoError::BroomParameters { k, d1, d2 });
    }
    let edges = std::iter::once((0, 1))
        .chain((0..d1).map(|i| (0, 2 + i)))
        .chain((0..d2).map(|i| (1, 2 + d1 + i)));
    let tree = as_tree(Graph::new(k + 1, edges)?)?;
    Ok(Broom { k, d1, d2, tree })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BroomEntry {
    pub d1: usize,
    pub d2: usize,
    pub count: HomCount,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BroomChainReport {
    pub k: usize,
    /// Ordered by increasing `d1 - d2`, balanced split first.
    pub entries: Vec<BroomEntry>,
    pub star_count: HomCount,
    pub monotone: bool,
    pub top_below_star: bool,
}

impl BroomChainReport {
    pub fn passed(&self) -> bool {
        self.monotone && self.top_below_star
    }
}

pub fn broom_chain_check(k: usize, h: &Graph) -> Result<BroomChainReport, SidorenkoError> {
    if k < 3 {
        return Err(SidorenkoError::BroomTooSmall(k));
    }
    let entries: Vec<BroomEntry> = (1..=(k - 1) / 2)
        .rev()
        .map(|d2| {
            let d1 = k - 1 - d2;
            let b = broom(k, d1, d2)?;
            Ok(BroomEntry { d1, d2, count: hom_tree(&b.tree, h) })
        })
        .collect::<Result<_, SidorenkoError>>()?;
    let star = star_count(k, h);
    let monotone = entries.windows(2).all(|w| w[0].count <= w[1].count);
    let top_below_star = entries.last().is_none_or(|e| e.count <= star);
    Ok(BroomChainReport {
        k,
        entries,
        star_count: star,
        monotone,
        top_below_star,
    })
}

/// `phi(p) = E[exp(p g(U) + (1 - p) g(V))]` with `g = (d1 + d2) ln deg`,
/// sampled on a grid, for a broom with designated vertices `b1`, `b2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiProfile {
    pub d1: usize,
    pub d2: usize,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// `max |phi(p) - phi(1 - p)|` over the grid.
    pub symmetry_defect: f64,
    /// Grid point with the smallest value.
    pub argmin: f64,
    pub phi_half: f64,
    /// Smallest scaled second difference; equals the plain second difference
    /// on a uniform grid.
    pub min_second_difference: f64,
    pub max_value: f64,
    pub phi_at_endpoints: (f64, f64),
    /// `phi(d1 / (d1 + d2))`, which equals `hom(broom) / hom(edge)`.
    pub phi_at_split: f64,
    pub count_ratio: f64,
}

impl PhiProfile {
    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.symmetry_defect <= tol * self.max_value
    }

    pub fn is_convex(&self, tol: f64) -> bool {
        self.min_second_difference >= -tol * self.max_value
    }

    pub fn min_at_half(&self, tol: f64) -> bool {
        self.values.iter().all(|&v| self.phi_half <= v + tol * self.max_value)
    }

    pub fn max_at_endpoint(&self, tol: f64) -> bool {
        let end = self.phi_at_endpoints.0.max(self.phi_at_endpoints.1);
        rel_le(self.max_value, end, tol)
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.is_symmetric(tol) && self.is_convex(tol) && self.min_at_half(tol) && self.max_at_endpoint(tol)
    }
}

/// `points` equally spaced values covering `[0, 1]`.
pub fn uniform_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.5],
        _ => (0..points).map(|i| i as f64 / (points - 1) as f64).collect(),
    }
}

pub fn phi_profile(
    t: &Tree,
    b1: Vertex,
    b2: Vertex,
    h: &Graph,
    grid: &[f64],
) -> Result<PhiProfile, SidorenkoError> {
    let info = t.skeleton_info()?;
    if info.skeleton.n() != 2 || !(info.vertices == [b1, b2] || info.vertices == [b2, b1]) {
        return Err(SidorenkoError::NotBroom);
    }
    let pruned = prune(t, b1, b2)?;
    let table = pinned_pair(&pruned.tree, pruned.b1, pruned.b2, h)?;
    let dist = distribution_from_table(&table).map_err(|_| SidorenkoError::ZeroBase)?;
    let (d1, d2) = (pruned.d1(), pruned.d2());
    let exponent = (d1 + d2) as f64;
    let g: Vec<f64> = h.degrees().iter().map(|&d| exponent * (d as f64).ln()).collect();
    let support: Vec<(f64, f64, f64)> = dist
        .p
        .iter()
        .map(|(&(u, v), p)| (ratio_to_f64(p), g[u], g[v]))
        .collect();
    let phi = |p: f64| -> f64 {
        support
            .iter()
            .map(|&(w, gu, gv)| w * (p * gu + (1.0 - p) * gv).exp())
            .sum()
    };

    let values: Vec<f64> = grid.iter().map(|&p| phi(p)).collect();
    let symmetry_defect = grid
        .iter()
        .zip(&values)
        .map(|(&p, &v)| (v - phi(1.0 - p)).abs())
        .fold(0.0, f64::max);
    let (argmin, _) = grid
        .iter()
        .zip(&values)
        .fold((f64::NAN, f64::INFINITY), |acc, (&p, &v)| if v < acc.1 { (p, v) } else { acc });
    let min_second_difference = (1..grid.len().saturating_sub(1))
        .map(|i| {
            let (a, b, c) = (grid[i - 1], grid[i], grid[i + 1]);
            let lambda = (c - b) / (c - a);
            2.0 * (lambda * values[i - 1] + (1.0 - lambda) * values[i + 1] - values[i])
        })
        .fold(f64::INFINITY, f64::min);
    let max_value = values.iter().copied().fold(0.0, f64::max);
    let count_ratio = hom_tree(t, h).to_f64() / dist.total.to_f64();

    Ok(PhiProfile {
        d1,
        d2,
        grid: grid.to_vec(),
        symmetry_defect,
        argmin,
        phi_half: phi(0.5),
        min_second_difference,
        max_value,
        phi_at_endpoints: (phi(0.0), phi(1.0)),
        phi_at_split: phi(d1 as f64 / exponent),
        count_ratio,
        values,
    })
}

/// Spanning-tree reduction of a connected source graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Reduction {
    pub tree: Tree,
    pub hom_graph: HomCount,
    pub hom_tree: HomCount,
}

impl Reduction {
    pub fn holds(&self) -> bool {
        self.hom_graph <= self.hom_tree
    }
}

pub fn reduce_to_tree(g: &Graph, h: &Graph, guard: u64) -> Result<Reduction, SidorenkoError> {
    let tree = g.spanning_tree()?;
    let hom_graph = hom_count(g, h, guard)?;
    Ok(Reduction {
        hom_tree: hom_tree(&tree, h),
        tree,
        hom_graph,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremReport {
    pub k: usize,
    pub hom_source: HomCount,
    pub star_count: HomCount,
    pub holds: bool,
    pub equality: bool,
    pub reduction: Reduction,
    pub certificate: TransformCertificate,
}

/// Checks `hom(g, h) <= sum_v deg(v)^k` for a connected `g` on `k + 1`
/// vertices and attaches the spanning-tree chain that witnesses it.
pub fn verify_theorem(
    g: &Graph,
    h: &Graph,
    strategy: PairStrategy,
    guard: u64,
) -> Result<TheoremReport, SidorenkoError> {
    let reduction = reduce_to_tree(g, h, guard)?;
    let certificate = transform_chain(&reduction.tree, h, strategy)?;
    let k = g.n() - 1;
    let star = star_count(k, h);
    Ok(TheoremReport {
        k,
        holds: reduction.hom_graph <= star,
        equality: reduction.hom_graph == star,
        hom_source: reduction.hom_graph.clone(),
        star_count: star,
        reduction,
        certificate,
    })
}

/// Default tolerance for certificate checks.
pub const CERTIFICATE_TOLERANCE: f64 = DEFAULT_RELATIVE_TOLERANCE;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hom::{hom_bruteforce, DEFAULT_GUARD};

    fn p2() -> Graph {
        Graph::path(2)
    }

    #[test]
    fn path_three_becomes_star() {
        let step = transform_step(&Tree::path(3), &p2(), PairStrategy::FirstPair).unwrap();
        assert_eq!(step.hom_before, 8);
        assert_eq!(step.hom_after, 10);
        assert!(step.after.is_star());
        assert!(step.invariant_issues(1e-9).is_empty(), "{:?}", step.invariant_issues(1e-9));
        assert_eq!(hom_bruteforce(step.after.graph(), &p2()).unwrap(), 10);
    }

    #[test]
    fn star_has_no_step() {
        assert_eq!(
            transform_step(&Tree::star(4), &p2(), PairStrategy::FirstPair).unwrap_err(),
            SidorenkoError::AlreadyStar
        );
        let cert = transform_chain(&Tree::star(4), &p2(), PairStrategy::FirstPair).unwrap();
        assert!(cert.steps.is_empty());
        assert!(cert.check(1e-9).is_empty());
    }

    #[test]
    fn balanced_broom_step() {
        let b = broom(5, 2, 2).unwrap();
        assert_eq!(hom_tree(&b.tree, &p2()), 16);
        let step = transform_step(&b.tree, &p2(), PairStrategy::FirstPair).unwrap();
        assert_eq!(step.leaves_after, 5);
        assert!(step.hom_after >= HomCount::from(16));
        assert_eq!(step.hom_after, 34);
    }

    #[test]
    fn regular_image_keeps_counts() {
        let h = Graph::cycle(4);
        for parents in [vec![0, 1, 2, 3, 4], vec![0, 1, 1, 3, 3, 0], vec![0, 1, 2, 2, 4, 5, 6, 0]] {
            let t = Tree::from_parents(&parents).unwrap();
            let expected = HomCount::from(4 * 2u64.pow(t.k() as u32));
            let cert = transform_chain(&t, &h, PairStrategy::FirstPair).unwrap();
            for s in &cert.steps {
                assert_eq!(s.hom_before, expected);
                assert_eq!(s.hom_after, expected);
            }
            assert_eq!(cert.star_count, expected);
            assert!(cert.check(1e-9).is_empty());
        }
    }

    #[test]
    fn decomposition_examples() {
        let b = broom(6, 3, 2).unwrap();
        for h in [p2(), Graph::complete(4), Graph::star(3)] {
            let rep = verify_decomposition(&b.tree, 0, 1, &h).unwrap();
            assert!(rep.holds);
            // broom closed form over ordered edges of h
            let deg = h.degrees();
            let closed: u64 = h
                .edges()
                .iter()
                .flat_map(|&(u, v)| [(u, v), (v, u)])
                .map(|(u, v)| (deg[u] as u64).pow(3) * (deg[v] as u64).pow(2))
                .sum();
            assert_eq!(rep.lhs, closed);
        }
        let p4 = Tree::path(4);
        let rep = verify_decomposition(&p4, 1, 3, &p2()).unwrap();
        assert!(rep.holds);
        assert_eq!(rep.lhs, hom_bruteforce(p4.graph(), &p2()).unwrap());
        assert_eq!(rep.lhs, 12);
        let rep = verify_decomposition(&p4, 1, 3, &Graph::empty(3)).unwrap();
        assert_eq!((rep.lhs.clone(), rep.rhs.clone()), (HomCount::zero(), HomCount::zero()));
        assert_eq!(
            verify_decomposition(&p4, 1, 2, &p2()).unwrap_err(),
            SidorenkoError::NotSkeletonLeaf(2)
        );
    }

    #[test]
    fn bounds_for_path_three() {
        let t = Tree::path(3);
        let holder = holder_bound(&t, 1, 2, &p2()).unwrap();
        assert!((8.0..=10.0).contains(&holder), "{holder}");
        assert_eq!(amgm_bound(&t, 1, 2, &p2()).unwrap(), 10.0);
        assert_eq!(
            holder_bound(&t, 1, 2, &Graph::empty(2)).unwrap_err(),
            SidorenkoError::ZeroBase
        );
    }

    #[test]
    fn symmetric_bounds_coincide() {
        // balanced broom with a symmetric distribution on the central edge
        let b = broom(5, 2, 2).unwrap();
        for h in [p2(), Graph::complete(4)] {
            let holder = holder_bound(&b.tree, 0, 1, &h).unwrap();
            let amgm = amgm_bound(&b.tree, 0, 1, &h).unwrap();
            assert!((holder - amgm).abs() <= 1e-9 * amgm, "{holder} vs {amgm}");
        }
    }

    #[test]
    fn regular_amgm_equals_count() {
        let t = Tree::from_parents(&[0, 1, 2, 2, 0]).unwrap();
        let h = Graph::complete(4);
        let amgm = amgm_bound(&t, 0, 2, &h).unwrap();
        assert_eq!(amgm, hom_tree(&t, &h).to_f64());
    }

    #[test]
    fn chain_of_path_four() {
        let cert = transform_chain(&Tree::path(4), &p2(), PairStrategy::FirstPair).unwrap();
        assert_eq!(cert.steps.len(), 2);
        assert_eq!(cert.star_count, 18);
        assert_eq!(cert.steps[1].hom_after, 18);
        assert!(cert.check(1e-9).is_empty(), "{:?}", cert.check(1e-9));
    }

    #[test]
    fn zero_image_is_structural() {
        let cert = transform_chain(&Tree::path(5), &Graph::empty(3), PairStrategy::FirstPair).unwrap();
        assert_eq!(cert.steps.len(), 3);
        for s in &cert.steps {
            assert!(s.hom_after.is_zero());
            assert!(s.holder_bound.is_none());
        }
        assert!(cert.check(1e-9).is_empty(), "{:?}", cert.check(1e-9));
    }

    #[test]
    fn best_pair_is_at_least_first_pair() {
        // spider with three legs of length 2: skeleton has three leaves
        let t = Tree::from_parents(&[0, 1, 0, 3, 0, 5]).unwrap();
        let h = Graph::new(5, [(0, 1), (1, 2), (2, 3), (1, 3), (3, 4)]).unwrap();
        let first = transform_step(&t, &h, PairStrategy::FirstPair).unwrap();
        let best = transform_step(&t, &h, PairStrategy::BestPair).unwrap();
        assert!(best.hom_after >= first.hom_after);
        assert!(best.invariant_issues(1e-9).is_empty());
    }

    #[test]
    fn certificate_roundtrip_and_tamper() {
        let h = Graph::new(5, [(0, 1), (1, 2), (2, 3), (1, 3), (3, 4)]).unwrap();
        let t = Tree::path(6);
        let cert = transform_chain(&t, &h, PairStrategy::FirstPair).unwrap();
        let text = cert.to_toml();
        assert!(text.starts_with(&format!("schema = \"{CERTIFICATE_SCHEMA}\"")), "{text}");
        let back = TransformCertificate::from_toml(&text).unwrap();
        assert_eq!(back.steps.len(), cert.steps.len());
        assert!(back.check(1e-9).is_empty(), "{:?}", back.check(1e-9));

        let mut bad = back.clone();
        bad.steps[0].hom_after = HomCount::from(1);
        assert!(!bad.check(1e-9).is_empty());
        let mut bad = back;
        bad.star_count = HomCount::from(0);
        assert!(!bad.check(1e-9).is_empty());
    }

    #[test]
    fn broom_constructor() {
        assert_eq!(broom(3, 1, 1).unwrap().tree.graph().edges(), &[(0, 1), (0, 2), (1, 3)]);
        assert!(crate::order::canonical_code(&broom(3, 1, 1).unwrap().tree)
            == crate::order::canonical_code(&Tree::path(3)));
        let t = broom(6, 4, 1).unwrap().tree;
        // a star on five edges with one leaf extended
        assert_eq!(t.leaf_count(), 5);
        assert_eq!(t.graph().degree(0), 5);
        assert!(broom(5, 3, 2).is_err());
        assert!(broom(5, 4, 0).is_err());
        assert_eq!(hom_tree(&broom(5, 2, 2).unwrap().tree, &p2()), 16);
    }

    #[test]
    fn broom_chain_examples() {
        let rep = broom_chain_check(5, &p2()).unwrap();
        let counts: Vec<_> = rep.entries.iter().map(|e| (e.d1, e.d2, e.count.clone())).collect();
        assert_eq!(counts, vec![(2, 2, 16u64.into()), (3, 1, 20u64.into())]);
        assert_eq!(rep.star_count, 34);
        assert!(rep.passed());

        let rep = broom_chain_check(3, &Graph::complete(5)).unwrap();
        assert_eq!(rep.entries.len(), 1);
        assert!(rep.passed());

        let rep = broom_chain_check(7, &Graph::cycle(6)).unwrap();
        assert!(rep.entries.iter().all(|e| e.count == 6 * 2u64.pow(7)));
        assert_eq!(broom_chain_check(2, &p2()).unwrap_err(), SidorenkoError::BroomTooSmall(2));
    }

    #[test]
    fn phi_profile_properties() {
        let b = broom(6, 3, 2).unwrap();
        let grid = uniform_grid(DEFAULT_GRID_POINTS);
        let prof = phi_profile(&b.tree, 0, 1, &p2(), &grid).unwrap();
        assert!(prof.passed(1e-9), "{prof:?}");
        assert!((prof.argmin - 0.5).abs() < 1e-12);
        assert!((prof.phi_at_split - prof.count_ratio).abs() <= 1e-12 * prof.count_ratio);

        let flat = phi_profile(&b.tree, 0, 1, &Graph::cycle(5), &grid).unwrap();
        let first = flat.values[0];
        assert!(flat.values.iter().all(|v| (v - first).abs() <= 1e-12 * first));

        assert_eq!(
            phi_profile(&Tree::path(4), 1, 3, &p2(), &grid).unwrap_err(),
            SidorenkoError::NotBroom
        );
        assert_eq!(
            phi_profile(&b.tree, 0, 1, &Graph::empty(2), &grid).unwrap_err(),
            SidorenkoError::ZeroBase
        );
    }

    #[test]
    fn reduction_examples() {
        let tri = Graph::complete(3);
        let r = reduce_to_tree(&tri, &p2(), DEFAULT_GUARD).unwrap();
        assert_eq!(r.hom_graph, 0);
        assert_eq!(r.hom_tree, 6);
        assert!(r.holds());

        let c4 = Graph::cycle(4);
        let r = reduce_to_tree(&c4, &c4, DEFAULT_GUARD).unwrap();
        assert_eq!(r.hom_tree, 32);
        assert_eq!(r.hom_graph, hom_bruteforce(&c4, &c4).unwrap());
        assert!(r.holds());

        let tree = Graph::path(4);
        let r = reduce_to_tree(&tree, &c4, DEFAULT_GUARD).unwrap();
        assert_eq!(r.hom_graph, r.hom_tree);
        assert!(reduce_to_tree(&Graph::empty(2), &c4, DEFAULT_GUARD).is_err());
    }

    #[test]
    fn theorem_examples() {
        let rep = verify_theorem(&Graph::complete(4), &Graph::complete(3), PairStrategy::FirstPair, DEFAULT_GUARD).unwrap();
        assert_eq!(rep.hom_source, 0);
        assert_eq!(rep.star_count, 24);
        assert!(rep.holds);

        let rep = verify_theorem(&Graph::star(4), &p2(), PairStrategy::FirstPair, DEFAULT_GUARD).unwrap();
        assert!(rep.equality);

        let rep = verify_theorem(&Graph::cycle(5), &p2(), PairStrategy::FirstPair, DEFAULT_GUARD).unwrap();
        assert_eq!(rep.hom_source, 0);
        assert_eq!(rep.star_count, 18);
        assert!(rep.certificate.check(1e-9).is_empty());
    }
}
