//! Profiles, the forcing relation `[n, m] -> [k, t]`, spectra, flat
//! statistics, additive energy and a constructive full-flat finder.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::gf2::{
    echelon, enumerate_k_flats, push_coset_counts, quotient_by, rank, reduce, scan_cosets,
    walsh_hadamard, Combinations, Flat, Point, PointSet,
};
use crate::orbit;

/// Largest ambient dimension for plain exhaustive forcing searches.
pub const MAX_FORCES_DIM: u32 = 4;

/// Largest ambient dimension reachable with orbit pruning.
pub const MAX_PRUNED_DIM: u32 = 5;

/// The set of intersection sizes of a point set with all k-flats.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Profile {
    pub k: u32,
    pub sizes: BTreeSet<u32>,
}

impl Profile {
    pub fn contains(&self, t: u32) -> bool {
        self.sizes.contains(&t)
    }
}

/// Every value of `|H ∩ S|` as `H` ranges over the k-flats.
pub fn profile(set: &PointSet, k: u32) -> Result<Profile> {
    let words = ((1usize << k) + 1).div_ceil(64);
    let bits = scan_cosets(
        set,
        k,
        || vec![0u64; words],
        |acc, view| {
            if view.empty_cosets() > 0 {
                acc[0] |= 1;
            }
            for (_, c) in view.meeting() {
                acc[c as usize / 64] |= 1 << (c % 64);
            }
        },
        |mut a, b| {
            a.iter_mut().zip(&b).for_each(|(x, y)| *x |= y);
            a
        },
    )?;
    let sizes = (0..=1u32 << k)
        .filter(|&t| bits[t as usize / 64] >> (t % 64) & 1 == 1)
        .collect();
    Ok(Profile { k, sizes })
}

/// Search switches for [`forces`] and [`spectrum`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchOptions {
    /// Visit one set per AGL(n, 2)-orbit (required for n = 5).
    pub orbit_pruning: bool,
}

/// Outcome of a forcing query. `witness` is an m-set avoiding `[k, t]`
/// whenever `forced` is false.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Forcing {
    pub forced: bool,
    pub witness: Option<PointSet>,
}

fn check_search(n: u32, m: u64, k: u32, opts: SearchOptions) -> Result<()> {
    let max = if opts.orbit_pruning {
        MAX_PRUNED_DIM
    } else {
        MAX_FORCES_DIM
    };
    if n > max {
        if n <= MAX_PRUNED_DIM {
            return Err(invalid(format!(
                "exhaustive search at n = {n} needs orbit pruning"
            )));
        }
        return Err(Error::DimensionTooLarge { n, max });
    }
    if k > n {
        return Err(invalid(format!(
            "flat dimension {k} exceeds ambient dimension {n}"
        )));
    }
    if m > 1u64 << n {
        return Err(invalid(format!("m = {m} exceeds 2^{n}")));
    }
    Ok(())
}

/// All k-flats of F_2^n (n <= 5) as point masks.
fn flat_masks(n: u32, k: u32) -> Result<Vec<u64>> {
    Ok(enumerate_k_flats(n, k)?
        .map(|f| f.points().fold(0u64, |acc, p| acc | 1 << p))
        .collect())
}

fn avoids(set: u64, flats: &[u64], t: u32) -> bool {
    flats.iter().all(|&f| (set & f).count_ones() != t)
}

fn mask_to_set(n: u32, mask: u64) -> PointSet {
    PointSet::from_words_unchecked(n, (0..64u32).filter(|&i| mask >> i & 1 == 1))
}

/// Whether every m-subset of F_2^n has a k-flat meeting it in exactly `t`
/// points. Only sets containing the zero point are searched (the relation is
/// translation invariant); the first avoiding set in colex order is returned
/// as the witness.
pub fn forces(n: u32, m: u64, k: u32, t: u32, opts: SearchOptions) -> Result<Forcing> {
    check_search(n, m, k, opts)?;
    let flats = flat_masks(n, k)?;
    let witness = if m == 0 {
        avoids(0, &flats, t).then_some(0)
    } else if opts.orbit_pruning {
        pruned_witness(n, m, k, &flats, t)
    } else {
        plain_witness(n, m as u32, &flats, t)
    };
    Ok(Forcing {
        forced: witness.is_none(),
        witness: witness.map(|w| mask_to_set(n, w)),
    })
}

fn plain_witness(n: u32, m: u32, flats: &[u64], t: u32) -> Option<u64> {
    let rest = m - 1;
    if rest == 0 {
        return avoids(1, flats, t).then_some(1);
    }
    // shard by the largest point; the inner sets come from 1..max
    (rest..1u32 << n).into_par_iter().find_map_first(|max| {
        Combinations::new(max - 1, rest - 1).find_map(|c| {
            let mask = c.iter().fold(1u64 | 1 << max, |acc, &x| acc | 1 << (x + 1));
            avoids(mask, flats, t).then_some(mask)
        })
    })
}

fn full_mask(n: u32) -> u64 {
    u64::MAX >> (64 - (1u32 << n))
}

/// Orbit representatives only go up to half the space: a set avoids `t` iff
/// its complement avoids `2^k - t`.
fn pruned_witness(n: u32, m: u64, k: u32, flats: &[u64], t: u32) -> Option<u64> {
    let full = 1u64 << n;
    if t > 1 << k {
        return Some(full_mask(n) >> (full - m));
    }
    if 2 * m > full {
        let tc = (1 << k) - t;
        return pruned_witness(n, full - m, k, flats, tc).map(|w| !w & full_mask(n));
    }
    if m == 0 {
        return avoids(0, flats, t).then_some(0);
    }
    let mut found = None;
    orbit::for_each_canonical_set(n, m as usize, |set| {
        if found.is_some() {
            return false;
        }
        if set.len() as u64 == m {
            let mask = set.iter().fold(0u64, |acc, &x| acc | 1 << x);
            if avoids(mask, flats, t) {
                found = Some(mask);
            }
        }
        true
    });
    found
}

/// How a spectrum was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exhaustive,
    ClosedForm,
}

/// The set of forcing sizes `Sp(n; k, t)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Spectrum {
    pub n: u32,
    pub k: u32,
    pub t: u32,
    pub members: BTreeSet<u64>,
    /// `|members| / 2^n`.
    pub density: f64,
    pub method: Method,
}

impl Spectrum {
    fn new(n: u32, k: u32, t: u32, members: BTreeSet<u64>, method: Method) -> Self {
        let density = members.len() as f64 / (1u64 << n) as f64;
        Spectrum {
            n,
            k,
            t,
            members,
            density,
            method,
        }
    }

    pub fn contains(&self, m: u64) -> bool {
        self.members.contains(&m)
    }

    /// `{2^n - m : m ∈ Sp}`, the spectrum for `2^k - t` by complementation.
    pub fn dual(&self) -> Spectrum {
        let full = 1u64 << self.n;
        let members = self.members.iter().map(|&m| full - m).collect();
        Spectrum::new(self.n, self.k, (1 << self.k) - self.t, members, self.method)
    }
}

/// `{m : forces(n, m, k, t)}` by exhaustive search.
pub fn spectrum(n: u32, k: u32, t: u32, opts: SearchOptions) -> Result<Spectrum> {
    check_search(n, 0, k, opts)?;
    let flats = flat_masks(n, k)?;
    let full = 1u64 << n;
    let members = if opts.orbit_pruning {
        pruned_members(n, k, &flats, t)
    } else {
        let mut members = BTreeSet::new();
        for m in 0..=full {
            if forces(n, m, k, t, opts)?.forced {
                members.insert(m);
            }
        }
        members
    };
    Ok(Spectrum::new(n, k, t, members, Method::Exhaustive))
}

fn pruned_members(n: u32, k: u32, flats: &[u64], t: u32) -> BTreeSet<u64> {
    let full = 1u64 << n;
    if t > 1 << k {
        return BTreeSet::new();
    }
    let tc = (1 << k) - t;
    let half = (full / 2) as usize;
    // avoidable[i][s]: some s-set avoids [t] (i = 0) or [2^k - t] (i = 1)
    let mut avoidable = [vec![false; half + 1], vec![false; half + 1]];
    avoidable[0][0] = avoids(0, flats, t);
    avoidable[1][0] = avoids(0, flats, tc);
    orbit::for_each_canonical_set(n, half.max(1), |set| {
        let size = set.len();
        if size > half {
            return false;
        }
        let mask = set.iter().fold(0u64, |acc, &x| acc | 1 << x);
        for (slots, target) in avoidable.iter_mut().zip([t, tc]) {
            if !slots[size] {
                slots[size] = avoids(mask, flats, target);
            }
        }
        true
    });
    (0..=full)
        .filter(|&m| {
            if m as usize <= half {
                !avoidable[0][m as usize]
            } else {
                !avoidable[1][(full - m) as usize]
            }
        })
        .collect()
}

/// The known closed forms for `(k, t)` in `{(1,0), (1,1), (1,2), (2,1),
/// (2,2), (2,3), (3,4)}`; `None` for every other pair, for `k > n`, and for
/// `n > 24`.
pub fn closed_form_spectrum(n: u32, k: u32, t: u32) -> Option<Spectrum> {
    if k > n || n > crate::gf2::MAX_SET_DIM {
        return None;
    }
    let full = 1u64 << n;
    let powers: BTreeSet<u64> = (0..=n).map(|d| 1u64 << d).collect();
    let range = |lo: u64, hi: u64| -> BTreeSet<u64> {
        if lo > hi {
            BTreeSet::new()
        } else {
            (lo..=hi).collect()
        }
    };
    let members: BTreeSet<u64> = match (k, t) {
        (1, 0) => range(0, full - 2),
        (1, 1) => range(1, full - 1),
        (1, 2) => range(2, full),
        (2, 1) => (0..full)
            .filter(|m| !powers.contains(&(full - m)))
            .collect(),
        (2, 2) => range(2, full - 2),
        (2, 3) => (1..=full).filter(|m| !powers.contains(m)).collect(),
        (3, 4) => range(4, full - 4),
        _ => return None,
    };
    Some(Spectrum::new(n, k, t, members, Method::ClosedForm))
}

/// Outcome of a Sidon test; `witness` is a 2-flat inside `S` when it fails.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SidonCheck {
    pub sidon: bool,
    pub witness: Option<Flat>,
}

/// Whether all pairwise sums of `S` are distinct. Two pairs sharing a sum in
/// F_2^n are disjoint, so a repeated sum is exactly a 2-flat inside `S`.
pub fn is_sidon(set: &PointSet) -> Result<SidonCheck> {
    let n = set.ambient_dim();
    let points = set.words();
    let mut first = vec![0u32; set.space_size()];
    for (i, &a) in points.iter().enumerate() {
        for &b in &points[i + 1..] {
            let v = (a ^ b) as usize;
            if first[v] != 0 {
                let c = first[v] - 1;
                let flat = Flat::affine_hull(n, &[a, b, c, c ^ v as u32])?;
                return Ok(SidonCheck {
                    sidon: false,
                    witness: Some(flat),
                });
            }
            first[v] = a + 1;
        }
    }
    Ok(SidonCheck {
        sidon: true,
        witness: None,
    })
}

/// `p_v`, the number of unordered pairs of `S` with difference `v`, for
/// every nonzero `v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffCounts {
    n: u32,
    m: u64,
    counts: Vec<u64>,
}

impl DiffCounts {
    pub fn ambient_dim(&self) -> u32 {
        self.n
    }

    /// `p_v`; zero for `v = 0`.
    pub fn get(&self, v: u32) -> u64 {
        self.counts[v as usize]
    }

    /// `(v, p_v)` over the nonzero differences with `p_v > 0`.
    pub fn iter(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, &p)| p > 0)
            .map(|(v, &p)| (v as u32, p))
    }

    /// `Σ p_v`, always `C(m, 2)`.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn sum_of_squares(&self) -> u128 {
        self.counts
            .iter()
            .map(|&p| u128::from(p) * u128::from(p))
            .sum()
    }
}

/// The difference table of `S`, by pair enumeration for sparse sets and by
/// autocorrelation through two Walsh–Hadamard transforms for dense ones.
pub fn diff_counts(set: &PointSet) -> DiffCounts {
    let n = set.ambient_dim();
    let m = set.len() as u64;
    let size = set.space_size();
    let pair_cost = m * m / 2;
    let transform_cost = 2 * size as u64 * u64::from(n.max(1));
    let counts = if pair_cost <= transform_cost {
        let points = set.words();
        let mut counts = vec![0u64; size];
        for (i, &a) in points.iter().enumerate() {
            for &b in &points[i + 1..] {
                counts[(a ^ b) as usize] += 1;
            }
        }
        counts
    } else {
        let mut f = vec![0i64; size];
        for p in set.iter() {
            f[p as usize] = 1;
        }
        walsh_hadamard(&mut f);
        f.iter_mut().for_each(|w| *w *= *w);
        walsh_hadamard(&mut f);
        // f[v] / 2^n counts ordered pairs with difference v
        let mut counts: Vec<u64> = f.iter().map(|&c| (c >> n) as u64 / 2).collect();
        counts[0] = 0;
        counts
    };
    DiffCounts { n, m, counts }
}

/// `E(S)`, the number of quadruples in `S^4` with `u1 + u2 = u3 + u4`,
/// computed as `m^2 + 4 Σ p_v^2`.
pub fn additive_energy(set: &PointSet) -> u128 {
    let m = set.len() as u128;
    m * m + 4 * diff_counts(set).sum_of_squares()
}

/// `F_{2,3}(S) = (m^3 - E(S)) / 6`.
pub fn f23_from_energy(set: &PointSet) -> u128 {
    let m = set.len() as u128;
    (m * m * m - additive_energy(set)) / 6
}

/// `F_{d,t}(S)` for every `t` in `0..=2^d`: the number of d-flats meeting `S`
/// in exactly `t` points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FlatStatistics {
    pub d: u32,
    pub counts: Vec<u64>,
}

impl FlatStatistics {
    pub fn get(&self, t: u32) -> u64 {
        self.counts.get(t as usize).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

pub fn flat_statistics(set: &PointSet, d: u32) -> Result<FlatStatistics> {
    let len = (1usize << d) + 1;
    let counts = scan_cosets(
        set,
        d,
        || vec![0u64; len],
        |acc, view| {
            acc[0] += view.empty_cosets();
            for (_, c) in view.meeting() {
                acc[c as usize] += 1;
            }
        },
        |mut a, b| {
            a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
            a
        },
    )?;
    Ok(FlatStatistics { d, counts })
}

/// `F_{d,t}(S; v_1, ..., v_d)`: for each `t`, the number of cosets of
/// `<v_1, ..., v_d>` meeting `S` in exactly `t` points.
pub fn direction_statistics(set: &PointSet, directions: &[u32]) -> Result<FlatStatistics> {
    let n = set.ambient_dim();
    for &v in directions {
        Point::new(n, v.into())?;
    }
    if rank(directions) != directions.len() {
        return Err(Error::DependentVectors);
    }
    let d = directions.len() as u32;
    let basis = echelon(directions.iter().copied());
    let mut per_coset = vec![0u32; set.space_size()];
    for p in set.iter() {
        per_coset[reduce(p, &basis) as usize] += 1;
    }
    let mut counts = vec![0u64; (1usize << d) + 1];
    let mut touched = 0u64;
    for &c in per_coset.iter().filter(|&&c| c > 0) {
        counts[c as usize] += 1;
        touched += 1;
    }
    counts[0] = (1u64 << (n - d)) - touched;
    Ok(FlatStatistics { d, counts })
}

/// `r_a(d) = min_k |a - k d|`.
pub fn least_absolute_residue(a: i64, d: i64) -> Result<u64> {
    if d <= 0 {
        return Err(invalid(format!("modulus must be positive, got {d}")));
    }
    let r = a.rem_euclid(d) as u64;
    Ok(r.min(d as u64 - r))
}

/// The most frequent nonzero difference `v` of `S` with its count `p_v`,
/// ties going to the smallest `v`.
pub fn most_frequent_difference(set: &PointSet) -> Result<(u32, u64)> {
    if set.len() < 2 {
        return Err(invalid("a difference needs at least two points"));
    }
    let diffs = diff_counts(set);
    let (v, p) = diffs
        .counts
        .iter()
        .enumerate()
        .skip(1)
        .fold(
            (0usize, 0u64),
            |best, (v, &p)| if p > best.1 { (v, p) } else { best },
        );
    Ok((v as u32, p))
}

/// Looks for a k-flat entirely inside `S`: pick the most frequent difference
/// `v`, pass to the quotient by `<v>` keeping the cosets fully inside `S`,
/// find a (k-1)-flat there and lift it. Returns `None` when the recursion
/// runs out of points. Success is guaranteed once
/// `|S| >= 5/2 * 2^(n (1 - 1/2^(k-1)))`.
pub fn find_full_flat(set: &PointSet, k: u32) -> Option<Flat> {
    let n = set.ambient_dim();
    if k > n {
        return None;
    }
    let mut points = set.iter();
    match k {
        0 => points
            .next()
            .map(|p| Flat::from_canonical(n, Vec::new(), p)),
        1 => {
            let a = points.next()?;
            let b = points.next()?;
            Some(Flat::new(n, &[a ^ b], a).expect("distinct points"))
        }
        _ => {
            let (v, _) = most_frequent_difference(set).ok()?;
            let q = quotient_by(n, Point::new(n, v.into()).expect("in range")).expect("nonzero");
            let doubled = push_coset_counts(set, &q, 2).expect("dimensions agree");
            let inner = find_full_flat(&doubled, k - 1)?;
            Some(q.lift(&inner).expect("dimensions agree"))
        }
    }
}

/// The constant `C_k` with `|S| >= C_k 2^(n (1 - 1/2^(k-1)))` sufficient for
/// a full k-flat: `C_1 = 2`, `C_k = sqrt(C_{k-1}) 2^(1/2^(k-1)) +
/// 2^(-k (1 - 1/2^(k-1)))`.
pub fn full_flat_constant(k: u32) -> Result<f64> {
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    let mut c = 2.0f64;
    for j in 2..=k {
        let inv = 0.5f64.powi(j as i32 - 1);
        c = c.sqrt() * 2f64.powf(inv) + 2f64.powf(-(j as f64) * (1.0 - inv));
    }
    Ok(c)
}

/// `5/2 * 2^(n (1 - 1/2^(k-1)))`, a uniform bound on `C_k 2^(...)`.
pub fn full_flat_threshold(n: u32, k: u32) -> Result<f64> {
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    Ok(2.5 * 2f64.powf(f64::from(n) * (1.0 - 0.5f64.powi(k as i32 - 1))))
}

/// Evaluation of the energy bound `E(S) <= m^3 - m^(2 + α - ε)` under its
/// residue premise, for `m ∈ [2^k, 2^(k+1))`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyBoundReport {
    pub m: u64,
    pub k: u32,
    pub b: u32,
    /// `r_{2^b}(m)`.
    pub residue: u64,
    /// `2^(α k)`.
    pub residue_threshold: f64,
    pub premise_holds: bool,
    pub energy: u128,
    pub cube: u128,
    /// `m^3 - m^(2 + α - ε)`.
    pub bound: f64,
    pub conclusion_holds: bool,
    /// `E(S) <= m^3`, which always holds.
    pub weak_bound_holds: bool,
}

pub fn energy_bound_check(set: &PointSet, alpha: f64, eps: f64) -> Result<EnergyBoundReport> {
    if !(0.5..1.0).contains(&alpha) || !(eps > 0.0 && alpha + eps < 1.0) {
        return Err(invalid(format!(
            "need 1/2 <= α < 1, ε > 0 and α + ε < 1 (α = {alpha}, ε = {eps})"
        )));
    }
    let m = set.len() as u64;
    if m == 0 {
        return Err(invalid("the energy bound needs a nonempty set"));
    }
    let k = 63 - m.leading_zeros();
    let b = ((alpha + eps) * f64::from(k)).ceil() as u32;
    let residue = least_absolute_residue(m as i64, 1i64 << b)?;
    let residue_threshold = 2f64.powf(alpha * f64::from(k));
    let energy = additive_energy(set);
    let cube = u128::from(m).pow(3);
    let bound = cube as f64 - (m as f64).powf(2.0 + alpha - eps);
    Ok(EnergyBoundReport {
        m,
        k,
        b,
        residue,
        residue_threshold,
        premise_holds: residue as f64 >= residue_threshold,
        energy,
        cube,
        bound,
        conclusion_holds: energy as f64 <= bound,
        weak_bound_holds: energy <= cube,
    })
}

/// Evaluation of the implication: if `d < b`, `r_{2^(b+1)}(m) >= 2^d` and at
/// least `2^b` differences have `p_v >= c`, then
/// `(b + 1)(m - 2c) >= 2^d (b + 1 - d)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RichDifferenceReport {
    pub m: u64,
    pub rich_differences: u64,
    pub residue: u64,
    pub premise_holds: bool,
    pub lhs: i128,
    pub rhs: i128,
    pub conclusion_holds: bool,
}

pub fn rich_difference_check(
    set: &PointSet,
    b: u32,
    c: u64,
    d: u32,
) -> Result<RichDifferenceReport> {
    if d == 0 || c == 0 || d >= b || b > 60 {
        return Err(invalid(format!(
            "need 1 <= d < b <= 60 and c >= 1 (b = {b}, c = {c}, d = {d})"
        )));
    }
    let m = set.len() as u64;
    let diffs = diff_counts(set);
    let rich_differences = diffs.iter().filter(|&(_, p)| p >= c).count() as u64;
    let residue = least_absolute_residue(m as i64, 1i64 << (b + 1))?;
    let premise_holds = m >= 1 && residue >= 1 << d && rich_differences >= 1 << b;
    let lhs = i128::from(b + 1) * (i128::from(m) - 2 * i128::from(c));
    let rhs = (1i128 << d) * i128::from(b + 1 - d);
    Ok(RichDifferenceReport {
        m,
        rich_differences,
        residue,
        premise_holds,
        lhs,
        rhs,
        conclusion_holds: lhs >= rhs,
    })
}

/// Both sides of `Σ h_i^2 <= α' M^2 + (N - α' M) M_1` for a nonnegative
/// sequence with `h_i <= M`, at most `α'` entries above `M_1`, and
/// `0 < M_1 < M`. Inputs violating these conditions are rejected.
pub fn sum_of_squares_bound(
    h: &[f64],
    alpha_prime: usize,
    big_m: f64,
    m1: f64,
) -> Result<(f64, f64)> {
    if !(0.0 < m1 && m1 < big_m) {
        return Err(invalid(format!("need 0 < M1 < M (M1 = {m1}, M = {big_m})")));
    }
    if alpha_prime > h.len() {
        return Err(invalid("α' exceeds the sequence length"));
    }
    if h.iter().any(|&x| !(0.0..=big_m).contains(&x)) {
        return Err(invalid("entries must lie in [0, M]"));
    }
    if h.iter().filter(|&&x| x > m1).count() > alpha_prime {
        return Err(invalid("more than α' entries exceed M1"));
    }
    let n: f64 = h.iter().sum();
    let lhs = h.iter().map(|x| x * x).sum();
    let a = alpha_prime as f64;
    Ok((lhs, a * big_m * big_m + (n - a * big_m) * m1))
}
