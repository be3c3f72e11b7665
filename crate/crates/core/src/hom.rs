//! Exact homomorphism counting.
//!
//! Tree counts come from a bottom-up message-passing program: rooting the
//! source tree, the message of a vertex `v` at image vertex `x` is the number
//! of homomorphisms of the subtree below `v` that send `v` to `x`, and
//!
//! ```text
//! m_v(x) = prod over children c of  sum over y ~ x in H of m_c(y)
//! ```
//!
//! Pinning a vertex zeroes its message outside the pinned image. Pair tables
//! run one pinned program per image vertex of the second pin, which costs
//! `O(|V(T)| * |E(H)| * |V(H)|)` big-integer operations.
//!
//! The brute-force enumerator exists as an independent oracle and for the
//! small non-tree sources handled by [`hom_count`].

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::graph::{Graph, Tree, Vertex};
use crate::hoffman::SymmetricMatrix;

/// Default cap on the number of candidate maps the brute-force oracle may
/// enumerate.
pub const DEFAULT_GUARD: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HomError {
    #[error("brute force would enumerate {maps} maps, above the guard of {guard}")]
    GuardExceeded { maps: String, guard: u64 },
    #[error("vertex {0} is not a vertex of the source tree")]
    InvalidPin(Vertex),
    #[error("pinned vertices must be distinct (both are {0})")]
    SamePins(Vertex),
    #[error("no homomorphism exists, so the pair distribution is undefined")]
    ZeroTotal,
}

/// An exact, nonnegative homomorphism count.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HomCount(BigUint);

impl HomCount {
    pub fn zero() -> Self {
        HomCount(BigUint::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn into_inner(self) -> BigUint {
        self.0
    }

    /// Nearest `f64`; `inf` if the count exceeds the float range.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::INFINITY)
    }
}

impl From<u64> for HomCount {
    fn from(v: u64) -> Self {
        HomCount(BigUint::from(v))
    }
}

impl From<BigUint> for HomCount {
    fn from(v: BigUint) -> Self {
        HomCount(v)
    }
}

impl PartialEq<u64> for HomCount {
    fn eq(&self, other: &u64) -> bool {
        self.0 == BigUint::from(*other)
    }
}

impl fmt::Display for HomCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl std::str::FromStr for HomCount {
    type Err = num_bigint::ParseBigIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse().map(HomCount)
    }
}

// Counts travel as decimal strings so no consumer ever rounds them.
impl Serialize for HomCount {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0.to_str_radix(10))
    }
}

impl<'de> Deserialize<'de> for HomCount {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Counts by image of one pinned source vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PinnedTable {
    pub pin: Vertex,
    /// `counts[u]` = homomorphisms sending the pin to `u`.
    pub counts: Vec<BigUint>,
}

impl PinnedTable {
    pub fn total(&self) -> BigUint {
        self.counts.iter().sum()
    }
}

/// Counts by images of two pinned source vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PinnedPairTable {
    pub pins: (Vertex, Vertex),
    /// `counts[u][v]` = homomorphisms sending the pins to `(u, v)`.
    pub counts: Vec<Vec<BigUint>>,
}

impl PinnedPairTable {
    pub fn get(&self, u: Vertex, v: Vertex) -> &BigUint {
        &self.counts[u][v]
    }

    pub fn total(&self) -> BigUint {
        self.counts.iter().flatten().sum()
    }

    /// Marginal over the second pin: counts by image of the first.
    pub fn row_sums(&self) -> Vec<BigUint> {
        self.counts.iter().map(|row| row.iter().sum()).collect()
    }

    /// Marginal over the first pin: counts by image of the second.
    pub fn col_sums(&self) -> Vec<BigUint> {
        let n = self.counts.len();
        (0..n)
            .map(|v| self.counts.iter().map(|row| &row[v]).sum())
            .collect()
    }
}

/// Law of `(f(b1), f(b2))` under a uniformly random homomorphism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairDistribution {
    pub pins: (Vertex, Vertex),
    pub total: HomCount,
    /// Nonzero probabilities only; the key set is the support.
    pub p: BTreeMap<(Vertex, Vertex), BigRational>,
    pub p1: Vec<BigRational>,
    pub p2: Vec<BigRational>,
}

impl PairDistribution {
    pub fn prob(&self, u: Vertex, v: Vertex) -> BigRational {
        self.p.get(&(u, v)).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.p.keys().copied()
    }
}

/// Enumerates every map `V(g) -> V(h)` with the default guard.
pub fn hom_bruteforce(g: &Graph, h: &Graph) -> Result<HomCount, HomError> {
    hom_bruteforce_with_guard(g, h, DEFAULT_GUARD)
}

pub fn hom_bruteforce_with_guard(g: &Graph, h: &Graph, guard: u64) -> Result<HomCount, HomError> {
    let (ng, nh) = (g.n(), h.n());
    let maps = u32::try_from(ng)
        .ok()
        .and_then(|e| (nh as u128).checked_pow(e));
    match maps {
        Some(m) if m <= guard as u128 => {}
        _ => {
            let maps = maps.map_or_else(|| format!("{nh}^{ng}"), |m| m.to_string());
            return Err(HomError::GuardExceeded { maps, guard });
        }
    }
    if ng == 0 {
        return Ok(HomCount::from(1));
    }
    if nh == 0 {
        return Ok(HomCount::zero());
    }
    let mut adjacent = vec![false; nh * nh];
    for &(u, v) in h.edges() {
        adjacent[u * nh + v] = true;
        adjacent[v * nh + u] = true;
    }
    let mut f = vec![0usize; ng];
    let mut count = 0u64;
    loop {
        if g.edges().iter().all(|&(u, v)| adjacent[f[u] * nh + f[v]]) {
            count += 1;
        }
        // odometer step
        let mut i = 0;
        loop {
            if i == ng {
                return Ok(HomCount::from(count));
            }
            f[i] += 1;
            if f[i] < nh {
                break;
            }
            f[i] = 0;
            i += 1;
        }
    }
}

/// Message of `root` in the tree program, optionally pinning one vertex to
/// one image.
fn root_message(
    t: &Tree,
    root: Vertex,
    h: &Graph,
    pin: Option<(Vertex, Vertex)>,
) -> Vec<BigUint> {
    let nh = h.n();
    let (order, parent) = t.graph().bfs(root);
    let mut acc: Vec<Vec<BigUint>> = vec![Vec::new(); t.n()];
    for &v in order.iter().rev() {
        let mut msg = std::mem::take(&mut acc[v]);
        if msg.is_empty() {
            msg = vec![BigUint::one(); nh];
        }
        if let Some((pv, image)) = pin {
            if pv == v {
                for (x, m) in msg.iter_mut().enumerate() {
                    if x != image {
                        m.set_zero();
                    }
                }
            }
        }
        let Some(p) = parent[v] else {
            return msg;
        };
        if acc[p].is_empty() {
            acc[p] = vec![BigUint::one(); nh];
        }
        for x in 0..nh {
            let agg: BigUint = h.neighbors(x).iter().map(|&y| &msg[y]).sum();
            acc[p][x] *= agg;
        }
    }
    unreachable!("the root is the first vertex in BFS order")
}

/// Exact `#hom(t, h)` via the tree program rooted at vertex 0.
pub fn hom_tree(t: &Tree, h: &Graph) -> HomCount {
    HomCount(root_message(t, 0, h, None).into_iter().sum())
}

pub fn pinned_single(t: &Tree, b: Vertex, h: &Graph) -> Result<PinnedTable, HomError> {
    if b >= t.n() {
        return Err(HomError::InvalidPin(b));
    }
    Ok(PinnedTable {
        pin: b,
        counts: root_message(t, b, h, None),
    })
}

pub fn pinned_pair(t: &Tree, b1: Vertex, b2: Vertex, h: &Graph) -> Result<PinnedPairTable, HomError> {
    for b in [b1, b2] {
        if b >= t.n() {
            return Err(HomError::InvalidPin(b));
        }
    }
    if b1 == b2 {
        return Err(HomError::SamePins(b1));
    }
    let nh = h.n();
    let mut counts = vec![vec![BigUint::zero(); nh]; nh];
    for v in 0..nh {
        let column = root_message(t, b1, h, Some((b2, v)));
        for (u, c) in column.into_iter().enumerate() {
            counts[u][v] = c;
        }
    }
    Ok(PinnedPairTable {
        pins: (b1, b2),
        counts,
    })
}

pub fn pair_distribution(
    t: &Tree,
    b1: Vertex,
    b2: Vertex,
    h: &Graph,
) -> Result<PairDistribution, HomError> {
    let table = pinned_pair(t, b1, b2, h)?;
    distribution_from_table(&table)
}

/// Normalizes a pinned pair table into exact probabilities.
pub fn distribution_from_table(table: &PinnedPairTable) -> Result<PairDistribution, HomError> {
    let total = table.total();
    if total.is_zero() {
        return Err(HomError::ZeroTotal);
    }
    let denom = BigInt::from(total.clone());
    let ratio = |c: &BigUint| BigRational::new(BigInt::from(c.clone()), denom.clone());
    let mut p = BTreeMap::new();
    for (u, row) in table.counts.iter().enumerate() {
        for (v, c) in row.iter().enumerate() {
            if !c.is_zero() {
                p.insert((u, v), ratio(c));
            }
        }
    }
    Ok(PairDistribution {
        pins: table.pins,
        total: HomCount(total),
        p,
        p1: table.row_sums().iter().map(ratio).collect(),
        p2: table.col_sums().iter().map(ratio).collect(),
    })
}

/// `sum over v of deg(v)^k`, the homomorphism count of the `k`-edge star.
pub fn star_count(k: usize, h: &Graph) -> HomCount {
    let k = u32::try_from(k).expect("star size fits in u32");
    HomCount(
        (0..h.n())
            .map(|v| BigUint::from(h.degree(v)).pow(k))
            .sum(),
    )
}

/// `#hom(g, h)` for any source: the tree program on tree components, brute
/// force (under `guard`) on the rest, multiplied over components.
pub fn hom_count(g: &Graph, h: &Graph, guard: u64) -> Result<HomCount, HomError> {
    let mut product = BigUint::one();
    for comp in g.components() {
        let sub = g.induced(&comp);
        let count = match crate::graph::as_tree(sub.clone()) {
            Ok(t) => hom_tree(&t, h),
            Err(_) => hom_bruteforce_with_guard(&sub, h, guard)?,
        };
        product *= count.0;
        if product.is_zero() {
            break;
        }
    }
    Ok(HomCount(product))
}

/// Weighted count: each map contributes the product of `a[f(u)][f(v)]` over
/// tree edges. Same program as [`hom_tree`] over `f64`.
pub fn weighted_hom_tree(t: &Tree, a: &SymmetricMatrix) -> f64 {
    let n = a.n();
    let (order, parent) = t.graph().bfs(0);
    let mut acc: Vec<Option<Vec<f64>>> = vec![None; t.n()];
    for &v in order.iter().rev() {
        let msg = acc[v].take().unwrap_or_else(|| vec![1.0; n]);
        let Some(p) = parent[v] else {
            return msg.iter().sum();
        };
        let target = acc[p].get_or_insert_with(|| vec![1.0; n]);
        for (x, slot) in target.iter_mut().enumerate() {
            let agg: f64 = a.row(x).iter().zip(&msg).map(|(w, m)| w * m).sum();
            *slot *= agg;
        }
    }
    unreachable!("the root is the first vertex in BFS order")
}
