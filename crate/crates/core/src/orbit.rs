//! Orbit pruning for exhaustive subset searches under the affine group
//! AGL(n, 2).
//!
//! A set is *canonical* when its sorted point list is lexicographically
//! minimal among all its affine images. Removing the largest point of a
//! canonical set leaves a canonical set, so canonical sets form a tree rooted
//! at `{0}` that can be generated by augmenting with larger points only.

/// Incremental coordinates with respect to a growing list of independent
/// preimages: after `push(u)` as the j-th vector, `coords(v)` returns the
/// word whose bit `i` is the coefficient of the i-th pushed vector.
#[derive(Clone)]
struct Coordinates {
    by_pivot: [(u32, u32); 32],
    len: u32,
}

impl Coordinates {
    fn new() -> Self {
        Coordinates {
            by_pivot: [(0, 0); 32],
            len: 0,
        }
    }

    /// `Some(coords)` when `v` lies in the span.
    fn coords(&self, v: u32) -> Option<u32> {
        let mut x = v;
        let mut c = 0u32;
        while x != 0 {
            let p = 31 - x.leading_zeros();
            let (b, bc) = self.by_pivot[p as usize];
            if b == 0 {
                return None;
            }
            x ^= b;
            c ^= bc;
        }
        Some(c)
    }

    fn push(&mut self, u: u32) {
        let mut x = u;
        let mut c = 1u32 << self.len;
        while x != 0 {
            let p = (31 - x.leading_zeros()) as usize;
            let (b, bc) = self.by_pivot[p];
            if b == 0 {
                self.by_pivot[p] = (x, c);
                self.len += 1;
                return;
            }
            x ^= b;
            c ^= bc;
        }
        panic!("pushed a dependent vector");
    }
}

enum Verdict {
    Smaller,
    NotSmaller,
}

/// Searches linear maps sending `t` (which contains 0) to a sorted image
/// lexicographically below `target`.
fn linear_image_below(t: &[u32], target: &[u32]) -> bool {
    let mut prefix = Vec::with_capacity(t.len());
    prefix.push(0u32);
    matches!(
        descend(t, target, &Coordinates::new(), &mut prefix),
        Verdict::Smaller
    )
}

fn descend(t: &[u32], target: &[u32], coords: &Coordinates, prefix: &mut Vec<u32>) -> Verdict {
    // prefix holds the sorted images of t ∩ span, all below 2^level
    let level = coords.len;
    for (i, &p) in prefix.iter().enumerate() {
        match p.cmp(&target[i]) {
            std::cmp::Ordering::Less => return Verdict::Smaller,
            std::cmp::Ordering::Greater => return Verdict::NotSmaller,
            std::cmp::Ordering::Equal => {}
        }
    }
    if prefix.len() == t.len() {
        return Verdict::NotSmaller;
    }
    // every remaining image is at least 2^level
    if target[prefix.len()] < 1 << level {
        return Verdict::NotSmaller;
    }
    let base = prefix.len();
    for &u in t {
        if coords.coords(u).is_some() {
            continue;
        }
        let mut next = coords.clone();
        next.push(u);
        let mut block: Vec<u32> = t
            .iter()
            .filter(|&&x| coords.coords(x).is_none())
            .filter_map(|&x| next.coords(x))
            .collect();
        block.sort_unstable();
        prefix.extend_from_slice(&block);
        let verdict = descend(t, target, &next, prefix);
        prefix.truncate(base);
        if let Verdict::Smaller = verdict {
            return Verdict::Smaller;
        }
    }
    Verdict::NotSmaller
}

/// Whether the ascending point list `set` is the lexicographically smallest
/// sorted image of itself under AGL(n, 2).
pub fn is_canonical(set: &[u32]) -> bool {
    debug_assert!(set.windows(2).all(|w| w[0] < w[1]));
    if set.is_empty() {
        return true;
    }
    if set[0] != 0 {
        return false;
    }
    let mut shifted = Vec::with_capacity(set.len());
    for &s0 in set {
        shifted.clear();
        shifted.extend(set.iter().map(|&x| x ^ s0));
        if linear_image_below(&shifted, set) {
            return false;
        }
    }
    true
}

/// Visits one representative of every AGL(n, 2)-orbit of nonempty subsets of
/// F_2^n, in depth-first order. The visitor receives the ascending point list
/// and returns `false` to skip the subtree below that set.
pub fn for_each_canonical_set(n: u32, max_size: usize, mut visit: impl FnMut(&[u32]) -> bool) {
    let mut set = vec![0u32];
    grow(1u32 << n, max_size, &mut set, &mut visit);
}

fn grow(space: u32, max_size: usize, set: &mut Vec<u32>, visit: &mut impl FnMut(&[u32]) -> bool) {
    if !visit(set) || set.len() >= max_size {
        return;
    }
    let last = *set.last().expect("nonempty");
    for x in last + 1..space {
        set.push(x);
        if is_canonical(set) {
            grow(space, max_size, set, visit);
        }
        set.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    /// Brute-force AGL(n,2) canonical form for n <= 3.
    fn brute_canonical(n: u32, set: &[u32]) -> Vec<u32> {
        let size = 1u32 << n;
        let mut best: Option<Vec<u32>> = None;
        // all invertible matrices as images of the standard basis
        let cols: Vec<Vec<u32>> = (0..n).map(|_| (1..size).collect()).collect();
        let mut choice = vec![0usize; n as usize];
        loop {
            let images: Vec<u32> = choice.iter().zip(&cols).map(|(&c, col)| col[c]).collect();
            if crate::gf2::rank(&images) == n as usize {
                for shift in 0..size {
                    let mut img: Vec<u32> = set
                        .iter()
                        .map(|&x| {
                            (0..n)
                                .filter(|&i| x >> i & 1 == 1)
                                .fold(shift, |acc, i| acc ^ images[i as usize])
                        })
                        .collect();
                    img.sort_unstable();
                    if best.as_ref().is_none_or(|b| img < *b) {
                        best = Some(img);
                    }
                }
            }
            let mut i = 0;
            loop {
                if i == n as usize {
                    return best.expect("group is nonempty");
                }
                choice[i] += 1;
                if choice[i] < cols[i].len() {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn canonical_test_matches_brute_force() {
        for n in 1..=3u32 {
            let size = 1u32 << n;
            for mask in 1u32..(1 << size) {
                let set: Vec<u32> = (0..size).filter(|&x| mask >> x & 1 == 1).collect();
                let canon = brute_canonical(n, &set);
                assert_eq!(is_canonical(&set), canon == set, "n={n} set={set:?}");
            }
        }
    }

    #[test]
    fn orbit_counts_in_small_dimensions() {
        // orbit representatives reached by the tree equal the distinct brute-force canonical forms
        for n in 1..=3u32 {
            let size = 1u32 << n;
            let brute: BTreeSet<Vec<u32>> = (1u32..(1 << size))
                .map(|mask| {
                    let set: Vec<u32> = (0..size).filter(|&x| mask >> x & 1 == 1).collect();
                    brute_canonical(n, &set)
                })
                .collect();
            let mut tree = BTreeSet::new();
            for_each_canonical_set(n, size as usize, |s| {
                tree.insert(s.to_vec());
                true
            });
            assert_eq!(tree, brute);
        }
    }

    #[test]
    fn affine_images_share_a_representative() {
        // the 4-point sets of F_2^3 fall into two orbits: planes and non-planes
        let mut reps = Vec::new();
        for_each_canonical_set(3, 4, |s| {
            if s.len() == 4 {
                reps.push(s.to_vec());
            }
            true
        });
        assert_eq!(reps, vec![vec![0, 1, 2, 3], vec![0, 1, 2, 4]]);
    }
}
