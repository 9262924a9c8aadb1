//! Linear algebra and enumeration over F_2^n.
//!
//! Points are `n`-bit words with coordinate `x_i` stored in bit `i`. A
//! [`PointSet`] is an occupancy bitmap over all `2^n` words, and a [`Flat`]
//! is an affine subspace kept in a canonical form so that structural
//! equality coincides with set equality.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest ambient dimension a [`PointSet`] may have (a 16 MiB bitmap).
pub const MAX_SET_DIM: u32 = 24;

/// Largest ambient dimension for exhaustive scans over k-flats with `k <= 3`.
pub const MAX_SCAN_DIM: u32 = 14;

/// Largest ambient dimension for exhaustive scans over k-flats with `k >= 4`.
pub const MAX_SCAN_DIM_HIGH_K: u32 = 10;

/// Rejects `(n, k)` pairs whose full k-flat enumeration is beyond the cap.
pub fn check_scan_cap(n: u32, k: u32) -> Result<()> {
    if k > n {
        return Err(invalid(format!(
            "flat dimension {k} exceeds ambient dimension {n}"
        )));
    }
    // hyperplanes and the whole space stay cheap at any n up to the main cap
    let cap = if k <= 3 || k + 1 >= n {
        MAX_SCAN_DIM
    } else {
        MAX_SCAN_DIM_HIGH_K
    };
    if n > cap {
        return Err(Error::EnumerationCap { n, k });
    }
    Ok(())
}

fn check_set_dim(n: u32) -> Result<()> {
    if n > MAX_SET_DIM {
        Err(Error::DimensionTooLarge {
            n,
            max: MAX_SET_DIM,
        })
    } else {
        Ok(())
    }
}

#[inline]
fn check_word(n: u32, word: u64) -> Result<u32> {
    if n < 32 && word >> n != 0 || word > u64::from(u32::MAX) {
        Err(Error::PointOutOfRange { word, n })
    } else {
        Ok(word as u32)
    }
}

#[inline]
pub(crate) fn pivot_of(v: u32) -> u32 {
    debug_assert!(v != 0);
    31 - v.leading_zeros()
}

/// An element of F_2^n.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    word: u32,
    dim: u32,
}

impl Point {
    pub fn new(n: u32, word: u64) -> Result<Self> {
        check_set_dim(n)?;
        Ok(Self {
            word: check_word(n, word)?,
            dim: n,
        })
    }

    pub fn zero(n: u32) -> Self {
        Self { word: 0, dim: n }
    }

    pub fn word(self) -> u32 {
        self.word
    }

    pub fn ambient_dim(self) -> u32 {
        self.dim
    }

    /// Coordinate `x_i`.
    pub fn coord(self, i: u32) -> bool {
        self.word >> i & 1 == 1
    }

    pub fn is_zero(self) -> bool {
        self.word == 0
    }

    pub fn weight(self) -> u32 {
        self.word.count_ones()
    }

    pub fn dot(self, other: Point) -> bool {
        (self.word & other.word).count_ones() & 1 == 1
    }
}

impl std::ops::Add for Point {
    type Output = Point;

    fn add(self, rhs: Point) -> Point {
        debug_assert_eq!(self.dim, rhs.dim);
        Point {
            word: self.word ^ rhs.word,
            dim: self.dim,
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dim == 0 {
            return write!(f, "()");
        }
        write!(f, "{:0width$b}", self.word, width = self.dim as usize)
    }
}

/// A subset of F_2^n stored as a `2^n`-bit occupancy vector.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PointSet {
    n: u32,
    bits: Vec<u64>,
    len: usize,
}

impl PointSet {
    /// The empty subset of F_2^n.
    pub fn empty(n: u32) -> Result<Self> {
        check_set_dim(n)?;
        let words = (1usize << n).div_ceil(64);
        Ok(Self {
            n,
            bits: vec![0; words],
            len: 0,
        })
    }

    /// All of F_2^n.
    pub fn full(n: u32) -> Result<Self> {
        let mut s = Self::empty(n)?;
        let size = 1usize << n;
        for (i, w) in s.bits.iter_mut().enumerate() {
            let lo = i * 64;
            let take = (size - lo).min(64);
            *w = if take == 64 {
                u64::MAX
            } else {
                (1u64 << take) - 1
            };
        }
        s.len = size;
        Ok(s)
    }

    /// Builds a set from point words, rejecting out-of-range or repeated entries.
    pub fn from_points<I>(n: u32, points: I) -> Result<Self>
    where
        I: IntoIterator,
        I::Item: Into<u64>,
    {
        let mut s = Self::empty(n)?;
        for p in points {
            let w = check_word(n, p.into())?;
            if !s.insert(w) {
                return Err(Error::DuplicatePoint(w));
            }
        }
        Ok(s)
    }

    /// Builds a set from words known to be in range; repeats are merged.
    pub(crate) fn from_words_unchecked(n: u32, words: impl IntoIterator<Item = u32>) -> Self {
        let mut s = Self::empty(n).expect("dimension checked by caller");
        for w in words {
            s.insert(w);
        }
        s
    }

    /// Interprets the low `2^n` bits of `mask` as an occupancy vector (n <= 6).
    pub fn from_mask(n: u32, mask: u64) -> Result<Self> {
        if n > 6 {
            return Err(invalid("mask form is limited to n <= 6"));
        }
        let mut s = Self::empty(n)?;
        let size = 1u32 << n;
        let mask = if size == 64 {
            mask
        } else {
            mask & ((1u64 << size) - 1)
        };
        s.bits[0] = mask;
        s.len = mask.count_ones() as usize;
        Ok(s)
    }

    /// The occupancy vector as a single word (n <= 6).
    pub fn to_mask(&self) -> Option<u64> {
        (self.n <= 6).then(|| self.bits[0])
    }

    pub fn ambient_dim(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of points of the ambient space, `2^n`.
    pub fn space_size(&self) -> usize {
        1usize << self.n
    }

    #[inline]
    pub fn contains(&self, word: u32) -> bool {
        let w = word as usize;
        w < self.space_size() && self.bits[w >> 6] >> (w & 63) & 1 == 1
    }

    /// Inserts a point; returns `false` if it was already present.
    ///
    /// Panics if `word` does not fit in `n` bits.
    pub fn insert(&mut self, word: u32) -> bool {
        let w = word as usize;
        assert!(w < self.space_size(), "point {word} outside F_2^{}", self.n);
        let slot = &mut self.bits[w >> 6];
        let bit = 1u64 << (w & 63);
        if *slot & bit != 0 {
            return false;
        }
        *slot |= bit;
        self.len += 1;
        true
    }

    /// Removes a point; returns `false` if it was absent.
    pub fn remove(&mut self, word: u32) -> bool {
        if !self.contains(word) {
            return false;
        }
        let w = word as usize;
        self.bits[w >> 6] &= !(1u64 << (w & 63));
        self.len -= 1;
        true
    }

    /// Points in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.bits.iter().enumerate().flat_map(|(i, &w)| {
            let base = (i as u32) << 6;
            BitIter(w).map(move |b| base + b)
        })
    }

    pub fn words(&self) -> Vec<u32> {
        self.iter().collect()
    }

    pub fn complement(&self) -> PointSet {
        let mut out = PointSet::full(self.n).expect("same dimension");
        for (o, &w) in out.bits.iter_mut().zip(&self.bits) {
            *o &= !w;
        }
        out.len = self.space_size() - self.len;
        out
    }

    fn check_same(&self, other: &PointSet) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    fn zip_with(&self, other: &PointSet, f: impl Fn(u64, u64) -> u64) -> Result<PointSet> {
        self.check_same(other)?;
        let bits: Vec<u64> = self
            .bits
            .iter()
            .zip(&other.bits)
            .map(|(&a, &b)| f(a, b))
            .collect();
        let len = bits.iter().map(|w| w.count_ones() as usize).sum();
        Ok(PointSet {
            n: self.n,
            bits,
            len,
        })
    }

    pub fn union(&self, other: &PointSet) -> Result<PointSet> {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &PointSet) -> Result<PointSet> {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &PointSet) -> Result<PointSet> {
        self.zip_with(other, |a, b| a & !b)
    }

    pub fn intersection_len(&self, other: &PointSet) -> Result<usize> {
        self.check_same(other)?;
        Ok(self
            .bits
            .iter()
            .zip(&other.bits)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum())
    }

    pub fn is_subset(&self, other: &PointSet) -> Result<bool> {
        self.check_same(other)?;
        Ok(self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0))
    }

    pub fn is_disjoint(&self, other: &PointSet) -> Result<bool> {
        Ok(self.intersection_len(other)? == 0)
    }

    /// The translate `w + S`.
    pub fn translate(&self, w: u32) -> Result<PointSet> {
        check_word(self.n, w.into())?;
        Ok(PointSet::from_words_unchecked(
            self.n,
            self.iter().map(|p| p ^ w),
        ))
    }

    pub fn to_json(&self) -> PointSetJson {
        PointSetJson {
            n: self.n,
            points: self.words(),
        }
    }

    pub fn from_json(json: &PointSetJson) -> Result<PointSet> {
        PointSet::from_points(json.n, json.points.iter().copied())
    }

    /// Parses the `{"n": .., "points": [..]}` file format.
    pub fn from_json_str(text: &str) -> Result<PointSet> {
        let json: PointSetJson =
            serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        PointSet::from_json(&json)
    }
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PointSet(n={}, ", self.n)?;
        f.debug_set().entries(self.iter()).finish()?;
        write!(f, ")")
    }
}

impl Serialize for PointSet {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PointSet {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let json = PointSetJson::deserialize(deserializer)?;
        PointSet::from_json(&json).map_err(serde::de::Error::custom)
    }
}

/// Wire form of a [`PointSet`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointSetJson {
    pub n: u32,
    pub points: Vec<u32>,
}

struct BitIter(u64);

impl Iterator for BitIter {
    type Item = u32;

    #[inline]
    fn next(&mut self) -> Option<u32> {
        if self.0 == 0 {
            return None;
        }
        let b = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(b)
    }
}

/// Reduced row-echelon form of the span of `vectors`, sorted by descending pivot.
pub fn echelon(vectors: impl IntoIterator<Item = u32>) -> Vec<u32> {
    let mut by_pivot = [0u32; 32];
    for v in vectors {
        let mut x = v;
        while x != 0 {
            let p = pivot_of(x) as usize;
            if by_pivot[p] == 0 {
                by_pivot[p] = x;
                break;
            }
            x ^= by_pivot[p];
        }
    }
    for p in (0..32).rev() {
        let b = by_pivot[p];
        if b == 0 {
            continue;
        }
        for v in &mut by_pivot[p + 1..] {
            if *v >> p & 1 == 1 {
                *v ^= b;
            }
        }
    }
    by_pivot.iter().rev().copied().filter(|&v| v != 0).collect()
}

/// Reduces `word` modulo the span of an echelon basis: the result has zero
/// bits in every pivot position and is the canonical coset representative.
#[inline]
pub fn reduce(word: u32, basis: &[u32]) -> u32 {
    let mut x = word;
    for &b in basis {
        if x >> pivot_of(b) & 1 == 1 {
            x ^= b;
        }
    }
    x
}

/// Rank of a family of vectors over F_2.
pub fn rank(vectors: &[u32]) -> usize {
    echelon(vectors.iter().copied()).len()
}

/// An affine subspace of F_2^n in canonical form.
///
/// The basis is in reduced row-echelon form sorted by descending pivot, and the
/// offset is reduced modulo the basis span (zero in every pivot coordinate).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Flat {
    n: u32,
    basis: Vec<u32>,
    offset: u32,
}

impl Flat {
    /// The flat `offset + span(generators)`; the generators must be independent.
    pub fn new(n: u32, generators: &[u32], offset: u32) -> Result<Flat> {
        let flat = Flat::span(n, generators, offset)?;
        if flat.basis.len() != generators.len() {
            return Err(Error::DependentVectors);
        }
        Ok(flat)
    }

    /// The flat `offset + span(generators)` for arbitrary generators.
    pub fn span(n: u32, generators: &[u32], offset: u32) -> Result<Flat> {
        check_set_dim(n)?;
        for &g in generators {
            check_word(n, g.into())?;
        }
        check_word(n, offset.into())?;
        let basis = echelon(generators.iter().copied());
        let offset = reduce(offset, &basis);
        Ok(Flat { n, basis, offset })
    }

    /// The smallest flat containing all `points` (which must be nonempty).
    pub fn affine_hull(n: u32, points: &[u32]) -> Result<Flat> {
        let (&first, rest) = points
            .split_first()
            .ok_or_else(|| invalid("affine hull of no points"))?;
        let dirs: Vec<u32> = rest.iter().map(|&p| p ^ first).collect();
        Flat::span(n, &dirs, first)
    }

    pub(crate) fn from_canonical(n: u32, basis: Vec<u32>, offset: u32) -> Flat {
        debug_assert_eq!(reduce(offset, &basis), offset);
        Flat { n, basis, offset }
    }

    pub fn ambient_dim(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> u32 {
        self.basis.len() as u32
    }

    pub fn basis(&self) -> &[u32] {
        &self.basis
    }

    pub fn offset(&self) -> u32 {
        self.offset
    }

    pub fn is_linear(&self) -> bool {
        self.offset == 0
    }

    /// Number of points, `2^dim`.
    pub fn size(&self) -> u64 {
        1u64 << self.dim()
    }

    pub fn pivots(&self) -> impl Iterator<Item = u32> + '_ {
        self.basis.iter().map(|&b| pivot_of(b))
    }

    pub fn contains(&self, word: u32) -> bool {
        (self.n >= 32 || word >> self.n == 0) && reduce(word, &self.basis) == self.offset
    }

    /// All points of the flat (not sorted).
    pub fn points(&self) -> impl Iterator<Item = u32> + '_ {
        (0u64..self.size()).map(move |i| {
            self.basis
                .iter()
                .enumerate()
                .filter(|(j, _)| i >> j & 1 == 1)
                .fold(self.offset, |acc, (_, &b)| acc ^ b)
        })
    }

    pub fn to_point_set(&self) -> PointSet {
        PointSet::from_words_unchecked(self.n, self.points())
    }

    /// The parallel flat `w + self`.
    pub fn translate(&self, w: u32) -> Flat {
        Flat {
            n: self.n,
            basis: self.basis.clone(),
            offset: reduce(self.offset ^ w, &self.basis),
        }
    }

    pub fn is_subflat_of(&self, other: &Flat) -> bool {
        other.contains(self.offset) && self.basis.iter().all(|&b| reduce(b, &other.basis) == 0)
    }
}

impl fmt::Display for Flat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.n as usize;
        write!(f, "{:0w$b} + <", self.offset)?;
        for (i, b) in self.basis.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{b:0w$b}")?;
        }
        write!(f, ">")
    }
}

/// k-subsets of `0..n` in colexicographic order.
#[derive(Clone, Debug)]
pub struct Combinations {
    n: u32,
    current: Vec<u32>,
    done: bool,
}

impl Combinations {
    pub fn new(n: u32, k: u32) -> Self {
        Combinations {
            n,
            current: (0..k).collect(),
            done: k > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        let k = self.current.len();
        let mut i = 0;
        loop {
            if i == k {
                self.done = true;
                break;
            }
            let limit = if i + 1 < k {
                self.current[i + 1]
            } else {
                self.n
            };
            if self.current[i] + 1 < limit {
                self.current[i] += 1;
                for (j, c) in self.current[..i].iter_mut().enumerate() {
                    *c = j as u32;
                }
                break;
            }
            i += 1;
        }
        Some(out)
    }
}

/// Scatters the low bits of `bits` into `positions` (ascending significance).
#[inline]
fn deposit(bits: u64, positions: &[u32]) -> u32 {
    positions
        .iter()
        .enumerate()
        .fold(0u32, |acc, (i, &p)| acc | (((bits >> i) & 1) as u32) << p)
}

/// A pivot pattern of an echelon basis and the free columns of each row.
#[derive(Clone, Debug)]
pub struct PivotPattern {
    /// Pivot columns, descending.
    pivots: Vec<u32>,
    free: Vec<Vec<u32>>,
    free_total: u32,
}

impl PivotPattern {
    fn new(n: u32, mut pivots: Vec<u32>) -> Self {
        pivots.sort_unstable_by(|a, b| b.cmp(a));
        let free: Vec<Vec<u32>> = pivots
            .iter()
            .map(|&p| (0..p).filter(|c| !pivots.contains(c)).collect())
            .collect();
        debug_assert!(pivots.iter().all(|&p| p < n));
        let free_total = free.iter().map(|f| f.len() as u32).sum();
        PivotPattern {
            pivots,
            free,
            free_total,
        }
    }

    /// Number of subspaces with this pivot pattern.
    pub fn count(&self) -> u64 {
        1u64 << self.free_total
    }

    /// Visits every echelon basis with this pivot pattern.
    pub fn for_each_basis(&self, mut f: impl FnMut(&[u32])) {
        let mut basis = vec![0u32; self.pivots.len()];
        for mask in 0..self.count() {
            let mut shift = 0;
            for (i, (&p, free)) in self.pivots.iter().zip(&self.free).enumerate() {
                basis[i] = 1 << p | deposit(mask >> shift, free);
                shift += free.len();
            }
            f(&basis);
        }
    }

    fn basis_at(&self, mask: u64) -> Vec<u32> {
        let mut shift = 0;
        self.pivots
            .iter()
            .zip(&self.free)
            .map(|(&p, free)| {
                let b = 1 << p | deposit(mask >> shift, free);
                shift += free.len();
                b
            })
            .collect()
    }
}

/// The pivot patterns of all k-dimensional linear subspaces of F_2^n.
pub fn pivot_patterns(n: u32, k: u32) -> Vec<PivotPattern> {
    Combinations::new(n, k)
        .map(|c| PivotPattern::new(n, c))
        .collect()
}

/// Visits every k-dimensional linear subspace of F_2^n as an echelon basis.
pub fn for_each_subspace(n: u32, k: u32, mut f: impl FnMut(&[u32])) {
    for pattern in pivot_patterns(n, k) {
        pattern.for_each_basis(&mut f);
    }
}

/// Streams every k-flat of F_2^n exactly once, in canonical form.
pub fn enumerate_k_flats(n: u32, k: u32) -> Result<FlatIter> {
    check_scan_cap(n, k)?;
    Ok(FlatIter::new(n, k))
}

/// Iterator behind [`enumerate_k_flats`].
pub struct FlatIter {
    n: u32,
    patterns: std::vec::IntoIter<PivotPattern>,
    pattern: Option<PivotPattern>,
    mask: u64,
    basis: Vec<u32>,
    nonpivots: Vec<u32>,
    offset_index: u64,
}

impl FlatIter {
    fn new(n: u32, k: u32) -> Self {
        let mut it = FlatIter {
            n,
            patterns: pivot_patterns(n, k).into_iter(),
            pattern: None,
            mask: 0,
            basis: Vec::new(),
            nonpivots: Vec::new(),
            offset_index: 0,
        };
        it.advance_pattern();
        it
    }

    fn advance_pattern(&mut self) {
        self.pattern = self.patterns.next();
        self.mask = 0;
        if let Some(p) = &self.pattern {
            self.nonpivots = (0..self.n).filter(|c| !p.pivots.contains(c)).collect();
            self.basis = p.basis_at(0);
            self.offset_index = 0;
        }
    }
}

impl Iterator for FlatIter {
    type Item = Flat;

    fn next(&mut self) -> Option<Flat> {
        loop {
            let pattern = self.pattern.as_ref()?;
            if self.offset_index < 1u64 << self.nonpivots.len() {
                let offset = deposit(self.offset_index, &self.nonpivots);
                self.offset_index += 1;
                return Some(Flat::from_canonical(self.n, self.basis.clone(), offset));
            }
            self.mask += 1;
            if self.mask < pattern.count() {
                self.basis = pattern.basis_at(self.mask);
                self.offset_index = 0;
            } else {
                self.advance_pattern();
            }
        }
    }
}

/// The cosets of one linear subspace, restricted to those meeting a point set.
pub struct CosetView<'a> {
    pub basis: &'a [u32],
    reps: &'a [u32],
    counts: &'a [u32],
    cosets: u64,
}

impl CosetView<'_> {
    /// `(representative, |coset ∩ S|)` for each coset meeting `S`.
    pub fn meeting(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.reps.iter().map(move |&r| (r, self.counts[r as usize]))
    }

    /// Number of cosets disjoint from `S`.
    pub fn empty_cosets(&self) -> u64 {
        self.cosets - self.reps.len() as u64
    }

    pub fn total_cosets(&self) -> u64 {
        self.cosets
    }

    /// The flat `rep + span(basis)`.
    pub fn flat(&self, n: u32, rep: u32) -> Flat {
        Flat::from_canonical(n, self.basis.to_vec(), rep)
    }
}

/// Folds over every k-dimensional direction, presenting the intersection
/// counts of all its cosets with `set`. Directions are sharded by pivot
/// pattern across the rayon pool; `merge` must be associative and is applied
/// in enumeration order, so order-sensitive folds stay deterministic.
pub fn scan_cosets<R, I, V, M>(set: &PointSet, k: u32, init: I, visit: V, merge: M) -> Result<R>
where
    R: Send,
    I: Fn() -> R + Sync + Send,
    V: Fn(&mut R, &CosetView<'_>) + Sync + Send,
    M: Fn(R, R) -> R + Sync + Send,
{
    let n = set.ambient_dim();
    check_scan_cap(n, k)?;
    let points = set.words();
    let cosets = 1u64 << (n - k);
    let result = pivot_patterns(n, k)
        .into_par_iter()
        .map(|pattern| {
            let mut acc = init();
            let mut counts = vec![0u32; 1usize << n];
            let mut reps = Vec::with_capacity(points.len());
            pattern.for_each_basis(|basis| {
                for &p in &points {
                    let r = reduce(p, basis);
                    let c = &mut counts[r as usize];
                    if *c == 0 {
                        reps.push(r);
                    }
                    *c += 1;
                }
                visit(
                    &mut acc,
                    &CosetView {
                        basis,
                        reps: &reps,
                        counts: &counts,
                        cosets,
                    },
                );
                for &r in &reps {
                    counts[r as usize] = 0;
                }
                reps.clear();
            });
            acc
        })
        .reduce(&init, &merge);
    Ok(result)
}

/// `|S ∩ H|`.
pub fn intersection_size(set: &PointSet, flat: &Flat) -> Result<u64> {
    if set.ambient_dim() != flat.ambient_dim() {
        return Err(Error::DimensionMismatch {
            left: set.ambient_dim(),
            right: flat.ambient_dim(),
        });
    }
    if (set.len() as u64) < flat.size() {
        Ok(set.iter().filter(|&p| flat.contains(p)).count() as u64)
    } else {
        Ok(flat.points().filter(|&p| set.contains(p)).count() as u64)
    }
}

/// In-place Walsh–Hadamard transform over F_2^n (length must be a power of two).
pub fn walsh_hadamard(values: &mut [i64]) {
    let len = values.len();
    debug_assert!(len.is_power_of_two());
    let mut h = 1;
    while h < len {
        for block in values.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

/// A linear hyperplane `{x : a·x = 0}` together with its intersection count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BalancedHyperplane {
    pub normal: u32,
    pub hyperplane: Flat,
    pub intersection: u64,
}

/// The linear hyperplane whose intersection with `S` is closest to `|S|/2`,
/// ties broken by the smallest normal word. All `2^n - 1` normals are scored
/// at once through a Walsh–Hadamard transform of the indicator of `S`.
pub fn balanced_hyperplane(set: &PointSet) -> Result<BalancedHyperplane> {
    let n = set.ambient_dim();
    if n == 0 {
        return Err(invalid("F_2^0 has no hyperplanes"));
    }
    let mut spectrum = vec![0i64; set.space_size()];
    for p in set.iter() {
        spectrum[p as usize] = 1;
    }
    walsh_hadamard(&mut spectrum);
    let (normal, _) = spectrum
        .iter()
        .enumerate()
        .skip(1)
        .min_by_key(|&(a, w)| (w.unsigned_abs(), a))
        .expect("n >= 1 leaves a nonzero normal");
    let m = set.len() as i64;
    let intersection = ((m + spectrum[normal]) / 2) as u64;
    let normal = normal as u32;
    Ok(BalancedHyperplane {
        normal,
        hyperplane: kernel_hyperplane(n, normal),
        intersection,
    })
}

/// The linear hyperplane orthogonal to the nonzero `normal`.
pub fn kernel_hyperplane(n: u32, normal: u32) -> Flat {
    let q = pivot_of(normal);
    let gens: Vec<u32> = (0..n)
        .filter(|&i| i != q)
        .map(|i| {
            if normal >> i & 1 == 1 {
                1 << i | 1 << q
            } else {
                1 << i
            }
        })
        .collect();
    Flat::span(n, &gens, 0).expect("generators fit in n bits")
}

/// The linear map F_2^n -> F_2^n / <d> ≅ F_2^{n-1}.
///
/// `{d}` is extended to a basis greedily with the standard basis vectors in
/// index order; the only vector rejected is `e_p` for `p` the highest set bit
/// of `d`, so projecting amounts to clearing bit `p` (adding `d` if needed)
/// and deleting that coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientMap {
    n: u32,
    kernel: u32,
    pivot: u32,
}

/// The quotient of F_2^n by the line spanned by a nonzero `d`.
pub fn quotient_by(n: u32, d: Point) -> Result<QuotientMap> {
    if d.ambient_dim() != n {
        return Err(Error::DimensionMismatch {
            left: n,
            right: d.ambient_dim(),
        });
    }
    if d.is_zero() {
        return Err(invalid("cannot factor by the zero vector"));
    }
    Ok(QuotientMap {
        n,
        kernel: d.word(),
        pivot: pivot_of(d.word()),
    })
}

impl QuotientMap {
    pub fn source_dim(&self) -> u32 {
        self.n
    }

    pub fn target_dim(&self) -> u32 {
        self.n - 1
    }

    pub fn kernel(&self) -> u32 {
        self.kernel
    }

    #[inline]
    pub fn project(&self, x: u32) -> u32 {
        let p = self.pivot;
        let x = if x >> p & 1 == 1 { x ^ self.kernel } else { x };
        (x >> (p + 1)) << p | (x & ((1 << p) - 1))
    }

    /// A linear section: `project(section(y)) == y`.
    #[inline]
    pub fn section(&self, y: u32) -> u32 {
        let p = self.pivot;
        (y >> p) << (p + 1) | (y & ((1 << p) - 1))
    }

    /// The two points of F_2^n over `y`.
    pub fn fiber(&self, y: u32) -> [u32; 2] {
        let x = self.section(y);
        [x, x ^ self.kernel]
    }

    /// The projection as `n - 1` row words; row `j` gives output coordinate `j`.
    pub fn projection_rows(&self) -> Vec<u32> {
        let images: Vec<u32> = (0..self.n).map(|i| self.project(1 << i)).collect();
        (0..self.n - 1)
            .map(|j| {
                images
                    .iter()
                    .enumerate()
                    .fold(0u32, |row, (i, &img)| row | (img >> j & 1) << i)
            })
            .collect()
    }

    /// Pulls a flat of the quotient back to F_2^n (dimension grows by one).
    pub fn lift(&self, flat: &Flat) -> Result<Flat> {
        if flat.ambient_dim() != self.n - 1 {
            return Err(Error::DimensionMismatch {
                left: self.n - 1,
                right: flat.ambient_dim(),
            });
        }
        let mut gens: Vec<u32> = flat.basis().iter().map(|&b| self.section(b)).collect();
        gens.push(self.kernel);
        Flat::new(self.n, &gens, self.section(flat.offset()))
    }
}

/// The quotient points whose fiber meets `S` in exactly `t` points.
pub fn push_coset_counts(set: &PointSet, q: &QuotientMap, t: u32) -> Result<PointSet> {
    if t > 2 {
        return Err(invalid(format!(
            "a fiber has two points; t = {t} is impossible"
        )));
    }
    if set.ambient_dim() != q.n {
        return Err(Error::DimensionMismatch {
            left: set.ambient_dim(),
            right: q.n,
        });
    }
    let target = q.target_dim();
    let mut out = PointSet::empty(target)?;
    for y in 0..1u32 << target {
        let [a, b] = q.fiber(y);
        if set.contains(a) as u32 + set.contains(b) as u32 == t {
            out.insert(y);
        }
    }
    Ok(out)
}

/// Number of k-dimensional subspaces of F_q^n.
pub fn gaussian_binomial(n: u32, k: u32, q: u64) -> Result<BigUint> {
    if k > n {
        return Err(invalid(format!("k = {k} exceeds n = {n}")));
    }
    if q < 2 {
        return Err(invalid(format!("q = {q} must be at least 2")));
    }
    let q = BigUint::from(q);
    let one = BigUint::one();
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..k {
        num *= q.pow(n - i) - &one;
        den *= q.pow(k - i) - &one;
    }
    debug_assert!((&num % &den).is_zero());
    Ok(num / den)
}

/// Number of k-flats of AG(n, q).
pub fn count_k_flats(n: u32, k: u32, q: u64) -> Result<BigUint> {
    let subspaces = gaussian_binomial(n, k, q)?;
    Ok(BigUint::from(q).pow(n - k) * subspaces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn gaussian_binomial_examples() {
        assert_eq!(gaussian_binomial(2, 1, 2).unwrap(), big(3));
        assert_eq!(gaussian_binomial(4, 2, 2).unwrap(), big(35));
        for n in 0..8 {
            assert_eq!(gaussian_binomial(n, 0, 3).unwrap(), big(1));
        }
        assert!(gaussian_binomial(2, 3, 2).is_err());
        assert!(gaussian_binomial(3, 1, 1).is_err());
    }

    #[test]
    fn count_k_flats_examples() {
        assert_eq!(count_k_flats(3, 2, 2).unwrap(), big(14));
        assert_eq!(count_k_flats(4, 2, 2).unwrap(), big(140));
        for n in 1..6 {
            assert_eq!(count_k_flats(n, n, 5).unwrap(), big(1));
        }
        // 12 lines of AG(2,3)
        assert_eq!(count_k_flats(2, 1, 3).unwrap(), big(12));
    }

    #[test]
    fn flat_enumeration_matches_counts_without_duplicates() {
        for n in 0..=4 {
            for k in 0..=n {
                let flats: Vec<Flat> = enumerate_k_flats(n, k).unwrap().collect();
                let unique: HashSet<&Flat> = flats.iter().collect();
                assert_eq!(unique.len(), flats.len(), "duplicate flat at n={n} k={k}");
                assert_eq!(big(flats.len() as u64), count_k_flats(n, k, 2).unwrap());
                // structural equality must coincide with point-set equality
                let sets: HashSet<Vec<u32>> = flats
                    .iter()
                    .map(|f| {
                        let mut pts: Vec<u32> = f.points().collect();
                        pts.sort_unstable();
                        pts
                    })
                    .collect();
                assert_eq!(sets.len(), flats.len());
            }
        }
        assert_eq!(enumerate_k_flats(2, 1).unwrap().count(), 6);
        assert_eq!(enumerate_k_flats(3, 0).unwrap().count(), 8);
        assert_eq!(enumerate_k_flats(3, 2).unwrap().count(), 14);
    }

    #[test]
    fn flats_are_affinely_closed() {
        for k in 0..=4 {
            for flat in enumerate_k_flats(4, k).unwrap() {
                let pts: Vec<u32> = flat.points().collect();
                assert_eq!(pts.len() as u64, 1 << k);
                assert_eq!(pts.iter().collect::<HashSet<_>>().len(), pts.len());
                for &p in &pts {
                    for &q in &pts {
                        for &r in &pts {
                            assert!(flat.contains(p ^ q ^ r));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        assert!(enumerate_k_flats(15, 2).is_err());
        assert!(enumerate_k_flats(11, 4).is_err());
        assert!(enumerate_k_flats(14, 3).is_ok());
        assert!(enumerate_k_flats(10, 5).is_ok());
        assert!(enumerate_k_flats(3, 4).is_err());
    }

    #[test]
    fn canonical_form_is_generator_independent() {
        let a = Flat::new(3, &[0b001, 0b010], 0b111).unwrap();
        let b = Flat::new(3, &[0b011, 0b001], 0b100).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.offset(), 0b100);
        assert_eq!(a.basis(), &[0b010, 0b001]);
        assert_eq!(
            Flat::new(3, &[0b011, 0b011], 0),
            Err(Error::DependentVectors)
        );
        let hull = Flat::affine_hull(3, &[0b110, 0b111, 0b100]).unwrap();
        assert_eq!(hull, a);
    }

    #[test]
    fn intersection_size_examples() {
        let full = PointSet::full(3).unwrap();
        let empty = PointSet::empty(3).unwrap();
        for flat in enumerate_k_flats(3, 2).unwrap() {
            assert_eq!(intersection_size(&full, &flat).unwrap(), 4);
            assert_eq!(intersection_size(&empty, &flat).unwrap(), 0);
        }
        let s = PointSet::from_points(3, [0b000u32, 0b001, 0b010]).unwrap();
        let h = Flat::new(3, &[0b001, 0b010], 0).unwrap();
        assert_eq!(intersection_size(&s, &h).unwrap(), 3);
        let other = Flat::new(4, &[1], 0).unwrap();
        assert!(intersection_size(&s, &other).is_err());
    }

    #[test]
    fn complement_counts_add_up() {
        let s = PointSet::from_points(4, [0u32, 3, 5, 6, 9, 15]).unwrap();
        let c = s.complement();
        assert_eq!(c.len(), 10);
        for k in 0..=4 {
            for flat in enumerate_k_flats(4, k).unwrap() {
                let a = intersection_size(&s, &flat).unwrap();
                let b = intersection_size(&c, &flat).unwrap();
                assert_eq!(a + b, 1 << k);
            }
        }
    }

    #[test]
    fn balanced_hyperplane_examples() {
        let full = PointSet::full(4).unwrap();
        let bh = balanced_hyperplane(&full).unwrap();
        assert_eq!(bh.intersection, 8);
        assert_eq!(bh.normal, 1);

        let empty = PointSet::empty(3).unwrap();
        assert_eq!(balanced_hyperplane(&empty).unwrap().intersection, 0);

        // m = 5: the window is [2.5 - 1.118, 2.5 + 1.118], so 3 points (or 2).
        let s = PointSet::from_points(3, [0b000u32, 0b001, 0b010, 0b011, 0b100]).unwrap();
        let bh = balanced_hyperplane(&s).unwrap();
        // exhaustive over the 7 normals
        let mut best = None;
        for a in 1u32..8 {
            let c = s.iter().filter(|&x| (x & a).count_ones() % 2 == 0).count() as i64;
            let score = (2 * c - 5).abs();
            if best.is_none_or(|(bs, _, _)| score < bs) {
                best = Some((score, a, c));
            }
        }
        let (_, a, c) = best.unwrap();
        assert_eq!(bh.normal, a);
        assert_eq!(bh.intersection as i64, c);
        assert_eq!(
            intersection_size(&s, &bh.hyperplane).unwrap(),
            bh.intersection
        );
        assert_eq!(bh.hyperplane.dim(), 2);
        assert!(bh.hyperplane.is_linear());
        // x_2 = 0 (normal 100) would give 4 points, outside the window
        assert_ne!(bh.normal, 0b100);
    }

    #[test]
    fn quotient_examples() {
        let q = quotient_by(2, Point::new(2, 0b01).unwrap()).unwrap();
        assert_eq!(q.project(0b00), q.project(0b01));
        assert_eq!(q.project(0b10), q.project(0b11));
        assert_ne!(q.project(0b00), q.project(0b10));

        let q = quotient_by(3, Point::new(3, 0b110).unwrap()).unwrap();
        assert_eq!(q.project(0b110), 0);
        assert_eq!(q.projection_rows().len(), 2);

        let q = quotient_by(3, Point::new(3, 0b001).unwrap()).unwrap();
        let mut fibers: Vec<[u32; 2]> = (0..4).map(|y| q.fiber(y)).collect();
        fibers.sort();
        assert_eq!(fibers, vec![[0, 1], [2, 3], [4, 5], [6, 7]]);

        assert!(quotient_by(3, Point::zero(3)).is_err());
    }

    #[test]
    fn quotient_rows_agree_with_projection() {
        for d in 1u32..32 {
            let q = quotient_by(5, Point::new(5, d.into()).unwrap()).unwrap();
            let rows = q.projection_rows();
            for x in 0u32..32 {
                let via_rows = rows
                    .iter()
                    .enumerate()
                    .fold(0u32, |acc, (j, &r)| acc | ((r & x).count_ones() & 1) << j);
                assert_eq!(via_rows, q.project(x));
            }
            for y in 0u32..16 {
                assert_eq!(q.project(q.section(y)), y);
            }
            // fibers partition the space into pairs
            let mut seen: Vec<u32> = (0..16).flat_map(|y| q.fiber(y)).collect();
            seen.sort_unstable();
            assert_eq!(seen, (0..32).collect::<Vec<_>>());
        }
    }

    #[test]
    fn push_coset_counts_examples() {
        let q = quotient_by(3, Point::new(3, 0b001).unwrap()).unwrap();
        let full = PointSet::full(3).unwrap();
        assert_eq!(push_coset_counts(&full, &q, 2).unwrap().len(), 4);
        let empty = PointSet::empty(3).unwrap();
        assert_eq!(push_coset_counts(&empty, &q, 0).unwrap().len(), 4);
        let s = PointSet::from_points(3, [0b000u32, 0b001, 0b110]).unwrap();
        let doubled = push_coset_counts(&s, &q, 2).unwrap();
        assert_eq!(doubled.words(), vec![q.project(0)]);
        assert_eq!(push_coset_counts(&s, &q, 1).unwrap().len(), 1);
        assert!(push_coset_counts(&s, &q, 3).is_err());
    }

    #[test]
    fn lifting_a_quotient_flat() {
        let q = quotient_by(4, Point::new(4, 0b0110).unwrap()).unwrap();
        let line = Flat::new(3, &[0b101], 0b010).unwrap();
        let lifted = q.lift(&line).unwrap();
        assert_eq!(lifted.dim(), 2);
        for p in lifted.points() {
            assert!(line.contains(q.project(p)));
        }
    }

    #[test]
    fn point_set_json_rejects_bad_input() {
        let s = PointSet::from_json_str(r#"{"n": 3, "points": [0, 5, 7]}"#).unwrap();
        assert_eq!(s.words(), vec![0, 5, 7]);
        assert_eq!(
            PointSet::from_json_str(r#"{"n": 3, "points": [0, 8]}"#),
            Err(Error::PointOutOfRange { word: 8, n: 3 })
        );
        assert_eq!(
            PointSet::from_json_str(r#"{"n": 3, "points": [1, 1]}"#),
            Err(Error::DuplicatePoint(1))
        );
        assert!(PointSet::from_json_str(r#"{"n": 3}"#).is_err());
        assert!(PointSet::empty(25).is_err());
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(text, r#"{"n":3,"points":[0,5,7]}"#);
    }

    #[test]
    fn combinations_are_colex() {
        let all: Vec<Vec<u32>> = Combinations::new(4, 2).collect();
        assert_eq!(
            all,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![1, 2],
                vec![0, 3],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        assert_eq!(Combinations::new(3, 0).count(), 1);
        assert_eq!(Combinations::new(2, 3).count(), 0);
    }

    #[test]
    fn scan_cosets_visits_every_flat() {
        let s = PointSet::from_points(4, [1u32, 2, 4, 8, 15]).unwrap();
        for k in 0..=4 {
            let (flats, total) = scan_cosets(
                &s,
                k,
                || (0u64, 0u64),
                |acc, view| {
                    acc.0 += view.total_cosets();
                    acc.1 += view.meeting().map(|(_, c)| u64::from(c)).sum::<u64>();
                },
                |a, b| (a.0 + b.0, a.1 + b.1),
            )
            .unwrap();
            assert_eq!(big(flats), count_k_flats(4, k, 2).unwrap());
            // each direction partitions S
            assert_eq!(big(total), gaussian_binomial(4, k, 2).unwrap() * 5u32);
        }
    }
}
