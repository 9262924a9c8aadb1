//! Edge counts and cuts in the hypercube graph `Q_n`, whose vertices are the
//! words of F_2^n and whose edges join words at Hamming distance one.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::gf2::PointSet;
use crate::numerals::psi;

/// Largest cube dimension for edge counting.
pub const MAX_CUBE_DIM: u32 = 20;

/// Largest cube dimension for the exhaustive subset scans.
pub const MAX_EXHAUSTIVE_CUBE_DIM: u32 = 4;

fn check_cube(n: u32, set: &PointSet) -> Result<()> {
    if n > MAX_CUBE_DIM {
        return Err(Error::DimensionTooLarge {
            n,
            max: MAX_CUBE_DIM,
        });
    }
    if set.ambient_dim() != n {
        return Err(Error::DimensionMismatch {
            left: n,
            right: set.ambient_dim(),
        });
    }
    Ok(())
}

/// `e(T)`, the number of edges with both ends in `T`.
pub fn induced_edges(n: u32, set: &PointSet) -> Result<u64> {
    check_cube(n, set)?;
    Ok(set
        .iter()
        .map(|p| {
            (0..n)
                .filter(|&i| p >> i & 1 == 0 && set.contains(p | 1 << i))
                .count() as u64
        })
        .sum())
}

/// `e(T, T̄) = n|T| - 2e(T)`.
pub fn crossing_edges(n: u32, set: &PointSet) -> Result<u64> {
    Ok(u64::from(n) * set.len() as u64 - 2 * induced_edges(n, set)?)
}

/// A cut `A ∪ Ā` of `Q_n` with its edge counts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CubeCut {
    pub n: u32,
    pub side_a: PointSet,
    pub crossing_edges: u64,
    pub internal_edges_a: u64,
}

impl CubeCut {
    pub fn new(side_a: PointSet) -> Result<CubeCut> {
        let n = side_a.ambient_dim();
        let internal_edges_a = induced_edges(n, &side_a)?;
        let crossing_edges = u64::from(n) * side_a.len() as u64 - 2 * internal_edges_a;
        Ok(CubeCut {
            n,
            side_a,
            crossing_edges,
            internal_edges_a,
        })
    }
}

/// `n t - 2Ψ(t)`, the fewest edges leaving a `t`-vertex set of `Q_n`.
pub fn min_cut_size(n: u32, t: u64) -> Result<u128> {
    if n == 0 || n > 63 || t == 0 || t >= 1u64 << n {
        return Err(invalid(format!(
            "need 1 <= t <= 2^n - 1, got n = {n}, t = {t}"
        )));
    }
    Ok(u128::from(n) * u128::from(t) - 2 * psi(t)?)
}

/// `2^d (n - d)`, a lower bound on the cut when both sides have at least
/// `2^d` vertices.
pub fn cut_lower_bound(n: u32, d: u32) -> Result<u64> {
    if d >= n || n > 63 {
        return Err(invalid(format!(
            "need 0 <= d <= n - 1, got n = {n}, d = {d}"
        )));
    }
    Ok((1u64 << d) * u64::from(n - d))
}

/// Outcome of [`multi_cube_cut_check`]. Each violated precondition is listed
/// in `violations`; `bound_holds` compares the counts regardless.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MultiCubeCut {
    pub crossing_edges: u64,
    pub bound: u64,
    pub violations: Vec<String>,
    pub bound_holds: bool,
}

impl MultiCubeCut {
    /// Preconditions met and the bound holds.
    pub fn verified(&self) -> bool {
        self.violations.is_empty() && self.bound_holds
    }
}

/// Cuts `k` disjoint copies of `Q_n` with `A_i = parts[i]` and compares the
/// crossing edges against `2^d (n - d)`. Requires each `A_i` nonempty with
/// `|A_i| <= 2^(n-1)`, `Σ |A_i| >= 2^d` and `d <= n - 2`.
pub fn multi_cube_cut_check(n: u32, k: usize, d: u32, parts: &[PointSet]) -> Result<MultiCubeCut> {
    let mut violations = Vec::new();
    if parts.len() != k {
        violations.push(format!("expected {k} parts, got {}", parts.len()));
    }
    if n < 2 || d > n - 2 {
        violations.push(format!("need d <= n - 2, got n = {n}, d = {d}"));
    }
    let half = 1u64 << n.saturating_sub(1);
    let mut total = 0u64;
    let mut crossing = 0u64;
    for (i, part) in parts.iter().enumerate() {
        let size = part.len() as u64;
        if size == 0 {
            violations.push(format!("part {i} is empty"));
        }
        if size > half {
            violations.push(format!("part {i} has {size} > 2^(n-1) vertices"));
        }
        total += size;
        crossing += crossing_edges(n, part)?;
    }
    if n > 0 && d < 64 && total < 1u64 << d {
        violations.push(format!("the parts hold {total} < 2^d vertices"));
    }
    let bound = if d < n { cut_lower_bound(n, d)? } else { 0 };
    Ok(MultiCubeCut {
        crossing_edges: crossing,
        bound,
        violations,
        bound_holds: crossing >= bound,
    })
}

/// Extremes over all subsets of `Q_n` by size `t`: the fewest crossing
/// edges and the most induced edges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CubeExtremes {
    pub n: u32,
    pub min_crossing: Vec<u64>,
    pub max_induced: Vec<u64>,
}

/// Scans every subset of `Q_n` for `n <= 4`.
pub fn exhaustive_cube_extremes(n: u32) -> Result<CubeExtremes> {
    if n > MAX_EXHAUSTIVE_CUBE_DIM {
        return Err(Error::DimensionTooLarge {
            n,
            max: MAX_EXHAUSTIVE_CUBE_DIM,
        });
    }
    let size = 1usize << n;
    let mut min_crossing = vec![u64::MAX; size + 1];
    let mut max_induced = vec![0u64; size + 1];
    for mask in 0u64..1 << size {
        let t = mask.count_ones() as usize;
        let induced: u64 = (0..n)
            .map(|i| {
                // pairs (p, p + e_i) with bit i of p clear, both in the set
                let stride = 1u32 << i;
                (0..size as u32)
                    .filter(|&p| {
                        p & stride == 0 && mask >> p & 1 == 1 && mask >> (p | stride) & 1 == 1
                    })
                    .count() as u64
            })
            .sum();
        let crossing = u64::from(n) * t as u64 - 2 * induced;
        min_crossing[t] = min_crossing[t].min(crossing);
        max_induced[t] = max_induced[t].max(induced);
    }
    Ok(CubeExtremes {
        n,
        min_crossing,
        max_induced,
    })
}
