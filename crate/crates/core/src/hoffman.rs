//! The matrix form of star extremality: for symmetric nonnegative `A`,
//!
//! ```text
//! sum_{i,j} (A^k)_{ij}  <=  sum_i (sum_j A_{ij})^k
//! ```
//!
//! The left side is the weighted homomorphism count of the `k`-edge path, the
//! right side that of the `k`-edge star. Strictly positive entries are not
//! required; nonnegative matrices (adjacency matrices included) are accepted.

use serde::Serialize;
use thiserror::Error;

use crate::graph::{Graph, Tree};
use crate::hom::weighted_hom_tree;

/// Largest `|a_ij - a_ji|` accepted before symmetrizing.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Default relative tolerance for float comparisons.
pub const DEFAULT_RELATIVE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixError {
    #[error("row {row} has {len} entries, expected {n}")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("entry ({i}, {j}) = {value} is negative or not finite")]
    BadEntry { i: usize, j: usize, value: f64 },
    #[error("entries ({i}, {j}) and ({j}, {i}) differ by {diff}")]
    Asymmetric { i: usize, j: usize, diff: f64 },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Symmetric matrix with nonnegative finite entries, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl SymmetricMatrix {
    /// Validates and symmetrizes `rows` (each pair is replaced by its mean).
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, MatrixError> {
        let n = rows.len();
        for (row, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(MatrixError::NotSquare { row, len: r.len(), n });
            }
            for (j, &value) in r.iter().enumerate() {
                if !value.is_finite() || value < 0.0 {
                    return Err(MatrixError::BadEntry { i: row, j, value });
                }
            }
        }
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let diff = (rows[i][j] - rows[j][i]).abs();
                if diff > SYMMETRY_TOLERANCE {
                    return Err(MatrixError::Asymmetric { i, j, diff });
                }
                entries[i * n + j] = if i == j {
                    rows[i][j]
                } else {
                    0.5 * (rows[i][j] + rows[j][i])
                };
            }
        }
        Ok(SymmetricMatrix { n, entries })
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        SymmetricMatrix { n, entries }
    }

    /// 0/1 adjacency matrix of `g`.
    pub fn adjacency(g: &Graph) -> Self {
        let n = g.n();
        let mut entries = vec![0.0; n * n];
        for &(u, v) in g.edges() {
            entries[u * n + v] = 1.0;
            entries[v * n + u] = 1.0;
        }
        SymmetricMatrix { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).iter().sum()).collect()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Parses `n` followed by `n` rows of `n` whitespace-separated decimals.
/// Blank lines and `#` comments are skipped.
pub fn parse_matrix(text: &str) -> Result<SymmetricMatrix, MatrixError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (line, header) = lines.next().ok_or(MatrixError::Parse {
        line: 0,
        msg: "missing dimension line".into(),
    })?;
    let n: usize = header.parse().map_err(|_| MatrixError::Parse {
        line,
        msg: format!("expected a dimension, got {header:?}"),
    })?;
    let mut rows = Vec::with_capacity(n);
    for (line, text) in lines {
        let row = text
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>().map_err(|_| MatrixError::Parse {
                    line,
                    msg: format!("bad number {tok:?}"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    if rows.len() != n {
        return Err(MatrixError::Parse {
            line: 0,
            msg: format!("expected {n} rows, found {}", rows.len()),
        });
    }
    SymmetricMatrix::new(rows)
}

/// `1^T A^k 1` by repeated matrix-vector products.
pub fn walk_sum(a: &SymmetricMatrix, k: usize) -> f64 {
    let mut v = vec![1.0; a.n()];
    for _ in 0..k {
        v = a.apply(&v);
    }
    v.iter().sum()
}

/// `sum_i (row sum_i)^k`.
pub fn row_power_sum(a: &SymmetricMatrix, k: usize) -> f64 {
    let k = i32::try_from(k).expect("exponent fits in i32");
    a.row_sums().iter().map(|r| r.powi(k)).sum()
}

/// `|x - y| <= tol * max(|x|, |y|)`.
pub fn rel_close(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol * x.abs().max(y.abs())
}

/// `x <= y` up to relative slack `tol`.
pub fn rel_le(x: f64, y: f64, tol: f64) -> bool {
    x <= y + tol * x.abs().max(y.abs())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HoffmanReport {
    pub n: usize,
    pub k: usize,
    pub walk_sum: f64,
    pub row_power_sum: f64,
    pub weighted_path: f64,
    pub weighted_star: f64,
    pub tolerance: f64,
    /// `walk_sum <= row_power_sum` within tolerance.
    pub inequality_holds: bool,
    /// `walk_sum` matches the weighted path count.
    pub path_agrees: bool,
    /// `row_power_sum` matches the weighted star count.
    pub star_agrees: bool,
}

impl HoffmanReport {
    pub fn passed(&self) -> bool {
        self.inequality_holds && self.path_agrees && self.star_agrees
    }
}

pub fn hoffman_check(a: &SymmetricMatrix, k: usize) -> HoffmanReport {
    hoffman_check_with_tolerance(a, k, DEFAULT_RELATIVE_TOLERANCE)
}

pub fn hoffman_check_with_tolerance(a: &SymmetricMatrix, k: usize, tolerance: f64) -> HoffmanReport {
    let walk = walk_sum(a, k);
    let rows = row_power_sum(a, k);
    let weighted_path = weighted_hom_tree(&Tree::path(k), a);
    let weighted_star = weighted_hom_tree(&Tree::star(k), a);
    HoffmanReport {
        n: a.n(),
        k,
        walk_sum: walk,
        row_power_sum: rows,
        weighted_path,
        weighted_star,
        tolerance,
        inequality_holds: rel_le(walk, rows, tolerance),
        path_agrees: rel_close(walk, weighted_path, tolerance),
        star_agrees: rel_close(rows, weighted_star, tolerance),
    }
}
