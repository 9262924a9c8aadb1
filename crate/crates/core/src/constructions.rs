//! Lexicographic sets, random subspace evasive sets and their combinations.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`) seeded with
//! `seed_from_u64`, so every construction replicates bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::Profile;
use crate::error::{invalid, Error, Result};
use crate::gf2::{
    check_scan_cap, pivot_patterns, reduce, scan_cosets, Flat, PointSet, MAX_SET_DIM,
};
use crate::numerals::supp;

/// `L_m`: the points whose word, read as a binary number, is below `m`.
pub fn lexicographic(n: u32, m: u64) -> Result<PointSet> {
    check_lex(n, m)?;
    Ok(PointSet::from_words_unchecked(n, 0..m as u32))
}

fn check_lex(n: u32, m: u64) -> Result<()> {
    if n > MAX_SET_DIM {
        return Err(Error::DimensionTooLarge {
            n,
            max: MAX_SET_DIM,
        });
    }
    if m > 1u64 << n {
        return Err(invalid(format!("m = {m} exceeds 2^{n}")));
    }
    Ok(())
}

/// `L_m` as a disjoint union of flats, one of dimension `d` for each
/// `d ∈ supp(m)`, largest first.
pub fn lexicographic_flats(n: u32, m: u64) -> Result<Vec<Flat>> {
    check_lex(n, m)?;
    let mut dims = supp(m);
    dims.reverse();
    dims.into_iter()
        .map(|d| {
            let offset = (m >> (d + 1) << (d + 1)) as u32;
            let gens: Vec<u32> = (0..d).map(|i| 1 << i).collect();
            Flat::new(n, &gens, offset)
        })
        .collect()
}

/// `pf(L_m, k)` for every `m` in `0..=2^n`, from one incremental pass per
/// k-dimensional direction that adds the points `0, 1, 2, ...` in order.
pub fn lexicographic_profiles(n: u32, k: u32) -> Result<Vec<Profile>> {
    check_scan_cap(n, k)?;
    let full = 1usize << n;
    let words = ((1usize << k) + 1).div_ceil(64);
    let blank = || vec![0u64; (full + 1) * words];
    let bits = pivot_patterns(n, k)
        .into_par_iter()
        .map(|pattern| {
            let mut acc = blank();
            let mut counts = vec![0u32; full];
            let mut hist = vec![0u64; (1 << k) + 1];
            let mut live = vec![0u64; words];
            pattern.for_each_basis(|basis| {
                counts.iter_mut().for_each(|c| *c = 0);
                hist.iter_mut().for_each(|h| *h = 0);
                live.iter_mut().for_each(|w| *w = 0);
                hist[0] = 1 << (n - k);
                live[0] = 1;
                acc[..words]
                    .iter_mut()
                    .zip(&live)
                    .for_each(|(a, l)| *a |= l);
                for x in 0..full as u32 {
                    let c = &mut counts[reduce(x, basis) as usize];
                    let old = *c as usize;
                    *c += 1;
                    hist[old] -= 1;
                    if hist[old] == 0 {
                        live[old / 64] &= !(1 << (old % 64));
                    }
                    hist[old + 1] += 1;
                    live[(old + 1) / 64] |= 1 << ((old + 1) % 64);
                    let row = &mut acc[(x as usize + 1) * words..(x as usize + 2) * words];
                    row.iter_mut().zip(&live).for_each(|(a, l)| *a |= l);
                }
            });
            acc
        })
        .reduce(blank, |mut a, b| {
            a.iter_mut().zip(&b).for_each(|(x, y)| *x |= y);
            a
        });
    Ok(bits
        .chunks(words)
        .map(|row| Profile {
            k,
            sizes: (0..=1u32 << k)
                .filter(|&t| row[t as usize / 64] >> (t % 64) & 1 == 1)
                .collect(),
        })
        .collect())
}

fn ln_binomial(n: f64, r: u64) -> f64 {
    (0..r)
        .map(|i| (n - i as f64).ln() - (i as f64 + 1.0).ln())
        .sum()
}

fn is_prime_power(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let p = (2..=q)
        .find(|d| q.is_multiple_of(*d))
        .expect("q >= 2 has a divisor");
    let mut r = q;
    while r.is_multiple_of(p) {
        r /= p;
    }
    r == 1
}

/// `c/(c+1) · 2^(k(k+1)/c) · (2 e^γ (c+1) C(q^k, c+1))^(-1/c)` with
/// `γ = 2/3` for `q = 2` and `γ = 1/(q-2)` otherwise. Requires
/// `k + 1 <= c <= q^k - 1`; the binomial vanishes beyond that range.
pub fn k_constant(k: u32, c: u32, q: u64) -> Result<f64> {
    if k == 0 || c <= k {
        return Err(invalid(format!(
            "need c >= k + 1 >= 2, got k = {k}, c = {c}"
        )));
    }
    if !is_prime_power(q) {
        return Err(invalid(format!("q = {q} is not a prime power")));
    }
    let qk = (q as f64).powi(k as i32);
    if f64::from(c) + 1.0 > qk {
        return Err(invalid(format!("c + 1 = {} exceeds q^k = {qk}", c + 1)));
    }
    let gamma = if q == 2 {
        2.0 / 3.0
    } else {
        1.0 / (q - 2) as f64
    };
    let c = f64::from(c);
    let k = f64::from(k);
    let ln_inner = 2f64.ln() + gamma + (c + 1.0).ln() + ln_binomial(qk, c as u64 + 1);
    Ok(c / (c + 1.0) * 2f64.powf(k * (k + 1.0) / c) * (-ln_inner / c).exp())
}

/// The sample size `m* = floor(K (c+1)/c · 2^(n (1 - k/c)))` over F_2,
/// capped at `2^n`.
pub fn sample_size(n: u32, k: u32, c: u32) -> Result<u64> {
    let kc = k_constant(k, c, 2)?;
    let m = kc * f64::from(c + 1) / f64::from(c)
        * 2f64.powf(f64::from(n) * (1.0 - f64::from(k) / f64::from(c)));
    Ok((m.floor() as u64).min(1u64 << n))
}

/// `(c/(c+1)) m* - 1`, the expected size after alteration.
pub fn expected_evasive_size(n: u32, k: u32, c: u32) -> Result<f64> {
    Ok(f64::from(c) / f64::from(c + 1) * sample_size(n, k, c)? as f64 - 1.0)
}

/// Parameters of [`evasive_random`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EvasiveParams {
    pub n: u32,
    pub k: u32,
    pub c: u32,
    pub seed: u64,
    /// Number of sampling attempts; the generator stream continues across them.
    pub retries: u32,
}

impl EvasiveParams {
    pub fn new(n: u32, k: u32, c: u32, seed: u64) -> Self {
        EvasiveParams {
            n,
            k,
            c,
            seed,
            retries: 1,
        }
    }
}

/// Result of [`evasive_random`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvasiveOutcome {
    pub set: PointSet,
    /// `m*`, the number of points sampled per attempt.
    pub sampled: u64,
    /// `(c/(c+1)) m* - 1`.
    pub floor: f64,
    pub attempts: u32,
    /// Whether the returned set reached `floor`.
    pub met_floor: bool,
}

/// Certificate from [`is_evasive`]; `witness` is the first k-flat (in
/// enumeration order) holding more than `c` points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EvasiveCertificate {
    pub evasive: bool,
    pub witness: Option<Flat>,
    pub max_intersection: u32,
}

/// Whether every k-flat meets `S` in at most `c` points.
pub fn is_evasive(set: &PointSet, k: u32, c: u32) -> Result<EvasiveCertificate> {
    let n = set.ambient_dim();
    let (witness, max) = scan_cosets(
        set,
        k,
        || (None, 0u32),
        |acc: &mut (Option<Flat>, u32), view| {
            for (rep, count) in view.meeting() {
                acc.1 = acc.1.max(count);
                if count > c && acc.0.is_none() {
                    acc.0 = Some(view.flat(n, rep));
                }
            }
        },
        |a, b| (a.0.or(b.0), a.1.max(b.1)),
    )?;
    Ok(EvasiveCertificate {
        evasive: witness.is_none(),
        witness,
        max_intersection: max,
    })
}

fn check_evasive_params(n: u32, k: u32, c: u32) -> Result<()> {
    if n <= k {
        return Err(invalid(format!("need n > k, got n = {n}, k = {k}")));
    }
    check_scan_cap(n, k)?;
    k_constant(k, c, 2).map(|_| ())
}

/// Draws `m` distinct words of `0..2^n` by a partial Fisher–Yates shuffle.
fn sample_points(rng: &mut ChaCha8Rng, n: u32, m: usize) -> Vec<u32> {
    let mut pool: Vec<u32> = (0..1u32 << n).collect();
    for i in 0..m {
        let j = rng.gen_range(i..pool.len());
        pool.swap(i, j);
    }
    pool.truncate(m);
    pool
}

/// Removes points until no k-flat holds more than `c` points of the set:
/// repeatedly delete the point covered by the most violating flats, ties
/// going to the smallest word. Removals never create violations, so the
/// violating flats are collected by a single scan.
pub fn alter_to_evasive(set: &PointSet, k: u32, c: u32) -> Result<PointSet> {
    let n = set.ambient_dim();
    let mut flats: Vec<Vec<u32>> = scan_cosets(
        set,
        k,
        Vec::new,
        |acc: &mut Vec<Vec<u32>>, view| {
            for (rep, count) in view.meeting() {
                if count > c {
                    let flat = view.flat(n, rep);
                    acc.push(flat.points().filter(|&p| set.contains(p)).collect());
                }
            }
        },
        |mut a, mut b| {
            a.append(&mut b);
            a
        },
    )?;
    let mut cover = vec![0u32; set.space_size()];
    let mut through: Vec<Vec<usize>> = vec![Vec::new(); set.space_size()];
    for (i, pts) in flats.iter().enumerate() {
        for &p in pts {
            cover[p as usize] += 1;
            through[p as usize].push(i);
        }
    }
    let mut live: Vec<bool> = vec![true; flats.len()];
    let mut out = set.clone();
    loop {
        let best = out
            .iter()
            .filter(|&p| cover[p as usize] > 0)
            .max_by_key(|&p| (cover[p as usize], std::cmp::Reverse(p)));
        let Some(p) = best else { break };
        out.remove(p);
        for &i in &through[p as usize] {
            if !live[i] {
                continue;
            }
            flats[i].retain(|&x| x != p);
            cover[p as usize] -= 1;
            if flats[i].len() as u32 <= c {
                live[i] = false;
                for &x in &flats[i] {
                    cover[x as usize] -= 1;
                }
            }
        }
    }
    Ok(out)
}

/// A random (k, c)-evasive set: sample `m*` points, then alter. Each
/// attempt that misses the expected size `(c/(c+1)) m* - 1` is retried up to
/// `retries` times in total; the largest set found is returned either way.
pub fn evasive_random(params: &EvasiveParams) -> Result<EvasiveOutcome> {
    let EvasiveParams {
        n,
        k,
        c,
        seed,
        retries,
    } = *params;
    check_evasive_params(n, k, c)?;
    let sampled = sample_size(n, k, c)?;
    let floor = expected_evasive_size(n, k, c)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<PointSet> = None;
    let mut attempts = 0;
    for _ in 0..retries.max(1) {
        attempts += 1;
        let raw = PointSet::from_words_unchecked(n, sample_points(&mut rng, n, sampled as usize));
        let set = alter_to_evasive(&raw, k, c)?;
        if best.as_ref().is_none_or(|b| set.len() > b.len()) {
            best = Some(set);
        }
        if best.as_ref().expect("just set").len() as f64 >= floor {
            break;
        }
    }
    let set = best.expect("at least one attempt");
    let met_floor = set.len() as f64 >= floor;
    Ok(EvasiveOutcome {
        set,
        sampled,
        floor,
        attempts,
        met_floor,
    })
}

/// How the evasive part is combined with the lexicographic base.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CombineMode {
    Union,
    Difference,
}

/// A translate `w + L_m` combined with an evasive set `S_1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CombinedSet {
    pub base_size: u64,
    pub translate: u32,
    pub base: PointSet,
    /// The full evasive set `S_1`.
    pub evasive: EvasiveOutcome,
    /// `S_1 \ base` for a union, `S_1 ∩ base` for a difference.
    pub evasive_part: PointSet,
    pub mode: CombineMode,
    pub result: PointSet,
}

/// Overlap `|S_1 ∩ (w + L_m)|` for every translate `w`.
fn overlaps(evasive: &PointSet, m: u64) -> Vec<u64> {
    let points = evasive.words();
    (0..evasive.space_size() as u32)
        .into_par_iter()
        .map(|w| points.iter().filter(|&&s| u64::from(s ^ w) < m).count() as u64)
        .collect()
}

fn combine(n: u32, m: u64, k: u32, c: u32, seed: u64, mode: CombineMode) -> Result<CombinedSet> {
    check_lex(n, m)?;
    let evasive = evasive_random(&EvasiveParams::new(n, k, c, seed))?;
    let counts = overlaps(&evasive.set, m);
    // all translates are tried; ties go to the smallest w
    let pick = counts.iter().enumerate();
    let (w, _) = match mode {
        CombineMode::Union => pick.min_by_key(|&(w, &o)| (o, w)),
        CombineMode::Difference => pick.max_by_key(|&(w, &o)| (o, std::cmp::Reverse(w))),
    }
    .expect("nonempty space");
    let translate = w as u32;
    let base = lexicographic(n, m)?.translate(translate)?;
    let (evasive_part, result) = match mode {
        CombineMode::Union => {
            let part = evasive.set.difference(&base)?;
            let result = base.union(&part)?;
            (part, result)
        }
        CombineMode::Difference => (
            evasive.set.intersection(&base)?,
            base.difference(&evasive.set)?,
        ),
    };
    Ok(CombinedSet {
        base_size: m,
        translate,
        base,
        evasive,
        evasive_part,
        mode,
        result,
    })
}

/// `(w + L_m) ∪ S_1` for the translate `w` overlapping the random evasive
/// set `S_1` least.
pub fn combine_union(n: u32, m: u64, k: u32, c: u32, seed: u64) -> Result<CombinedSet> {
    combine(n, m, k, c, seed, CombineMode::Union)
}

/// `(w + L_m) \ S_1` for the translate `w` overlapping `S_1` most.
pub fn combine_difference(n: u32, m: u64, k: u32, c: u32, seed: u64) -> Result<CombinedSet> {
    combine(n, m, k, c, seed, CombineMode::Difference)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::profile;
    use crate::numerals::{s2, s2_star};
    use std::collections::BTreeSet;

    fn binom(n: u64, k: u64) -> u64 {
        crate::numerals::binomial(n, k).try_into().unwrap()
    }

    #[test]
    fn lexicographic_examples() {
        assert!(lexicographic(3, 0).unwrap().is_empty());
        assert_eq!(lexicographic(3, 8).unwrap(), PointSet::full(3).unwrap());
        let l4 = lexicographic(3, 4).unwrap();
        assert_eq!(l4.words(), vec![0, 1, 2, 3]);
        assert!(l4.iter().all(|p| p >> 2 & 1 == 0));
        assert!(lexicographic(3, 9).is_err());
    }

    #[test]
    fn lexicographic_decomposes_into_flats() {
        for n in 0..=7u32 {
            for m in 0..=1u64 << n {
                let flats = lexicographic_flats(n, m).unwrap();
                let dims: Vec<u32> = flats.iter().map(|f| f.dim()).collect();
                let mut expected = supp(m);
                expected.reverse();
                assert_eq!(dims, expected);
                let mut union = PointSet::empty(n).unwrap();
                for f in &flats {
                    for p in f.points() {
                        assert!(union.insert(p), "flats overlap");
                    }
                }
                assert_eq!(union, lexicographic(n, m).unwrap());
            }
        }
    }

    #[test]
    fn incremental_profiles_match_direct_scan() {
        for n in 1..=5u32 {
            for k in 0..=n {
                let all = lexicographic_profiles(n, k).unwrap();
                assert_eq!(all.len(), (1 << n) + 1);
                for (m, p) in all.iter().enumerate() {
                    assert_eq!(
                        p,
                        &profile(&lexicographic(n, m as u64).unwrap(), k).unwrap(),
                        "n={n} k={k} m={m}"
                    );
                }
            }
        }
    }

    #[test]
    fn lexicographic_avoids_heavier_digit_sums() {
        for n in 1..=6u32 {
            for k in 0..=n {
                for (m, p) in lexicographic_profiles(n, k).unwrap().iter().enumerate() {
                    for &t in &p.sizes {
                        assert!(s2(t.into()) <= s2(m as u64), "n={n} k={k} m={m} t={t}");
                        assert!(
                            s2_star(t.into()) <= s2_star(m as i64),
                            "n={n} k={k} m={m} t={t}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn lexicographic_profile_size_bound() {
        for n in 1..=6u32 {
            for k in 0..=n {
                for (m, p) in lexicographic_profiles(n, k).unwrap().iter().enumerate() {
                    let s = u64::from(s2(m as u64));
                    let bound = 1 + (0..=s).map(|j| binom(k.into(), j)).sum::<u64>();
                    assert!(p.sizes.len() as u64 <= bound, "n={n} k={k} m={m}");
                }
            }
        }
    }

    #[test]
    fn k_constant_examples() {
        let direct = 0.75 * 4.0 * (8.0 * (2.0f64 / 3.0).exp()).powf(-1.0 / 3.0);
        let k = k_constant(2, 3, 2).unwrap();
        assert!((k - direct).abs() < 1e-12);
        assert!((k - 1.20).abs() < 0.01);
        assert!(k_constant(1, 2, 2).is_err());
        assert!(k_constant(2, 2, 2).is_err());
        assert!(k_constant(2, 4, 2).is_err());
        assert!(k_constant(2, 3, 6).is_err());
        // q > 2 swaps the exponential and the binomial
        let q3 = 0.75 * 4.0 * (2.0 * 1f64.exp() * 4.0 * 126.0f64).powf(-1.0 / 3.0);
        assert!((k_constant(2, 3, 3).unwrap() - q3).abs() < 1e-12);
        // the sampled set never exceeds the space
        for n in 3..=40 {
            let m = k_constant(2, 3, 2).unwrap() * 2f64.powf(n as f64 * (1.0 - 2.0 / 3.0));
            assert!(m <= 2f64.powi(n));
        }
    }

    #[test]
    fn sample_sizes() {
        assert_eq!(sample_size(10, 2, 3).unwrap(), 16);
        let floor = expected_evasive_size(10, 2, 3).unwrap();
        assert!((floor - 11.0).abs() < 1e-12);
    }

    #[test]
    fn is_evasive_examples() {
        let small = PointSet::from_points(5, [1u64, 2, 3]).unwrap();
        assert!(is_evasive(&small, 2, 3).unwrap().evasive);
        let plane = Flat::new(5, &[3, 12], 16).unwrap();
        let cert = is_evasive(&plane.to_point_set(), 2, 3).unwrap();
        assert!(!cert.evasive);
        assert_eq!(cert.witness.unwrap(), plane);
        assert_eq!(cert.max_intersection, 4);
        let bose = crate::field::bose_set(8).unwrap();
        assert!(is_evasive(&bose, 2, 3).unwrap().evasive);
        assert!(is_evasive(&PointSet::empty(15).unwrap(), 2, 3).is_err());
    }

    #[test]
    fn alteration_reaches_evasive_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let n = rng.gen_range(4..=8);
            let m = rng.gen_range(0..=1usize << n);
            let raw = PointSet::from_words_unchecked(n, sample_points(&mut rng, n, m));
            let (k, c) = (2, 3);
            let out = alter_to_evasive(&raw, k, c).unwrap();
            assert!(out.is_subset(&raw).unwrap());
            assert!(is_evasive(&out, k, c).unwrap().evasive);
        }
    }

    #[test]
    fn evasive_random_is_certified_and_reproducible() {
        let m_star = sample_sizes_of(10, 2, 3);
        for seed in 0..10 {
            let p = EvasiveParams::new(10, 2, 3, seed);
            let out = evasive_random(&p).unwrap();
            assert!(is_evasive(&out.set, 2, 3).unwrap().evasive);
            assert!(!out.set.is_empty() && out.set.len() as u64 <= m_star);
            assert_eq!(out.sampled, m_star);
            assert_eq!(evasive_random(&p).unwrap(), out);
        }
        for (n, k, c) in [(8, 2, 3), (9, 3, 4), (8, 3, 5)] {
            let out = evasive_random(&EvasiveParams {
                n,
                k,
                c,
                seed: 7,
                retries: 3,
            })
            .unwrap();
            assert!(is_evasive(&out.set, k, c).unwrap().evasive);
            assert!(out.attempts <= 3);
        }
        assert!(evasive_random(&EvasiveParams::new(2, 2, 3, 0)).is_err());
        assert!(evasive_random(&EvasiveParams::new(10, 2, 2, 0)).is_err());
    }

    fn sample_sizes_of(n: u32, k: u32, c: u32) -> u64 {
        sample_size(n, k, c).unwrap()
    }

    fn sumset(a: &BTreeSet<u32>, c: u32) -> BTreeSet<u32> {
        a.iter()
            .flat_map(|&x| (0..=c).map(move |j| x + j))
            .collect()
    }

    #[test]
    fn union_combination() {
        let (k, c) = (2, 3);
        for (n, m) in [(8, 100), (8, 37), (7, 64), (6, 5)] {
            let comb = combine_union(n, m, k, c, 3).unwrap();
            let s1 = &comb.evasive.set;
            assert!(comb.evasive_part.is_disjoint(&comb.base).unwrap());
            assert_eq!(comb.result.len() as u64, m + comb.evasive_part.len() as u64);
            assert_eq!(
                comb.base,
                lexicographic(n, m)
                    .unwrap()
                    .translate(comb.translate)
                    .unwrap()
            );
            // averaging: some translate keeps at least a (2^n - m)/2^n share
            let full = 1u64 << n;
            assert!(comb.evasive_part.len() as u64 * full >= s1.len() as u64 * (full - m));
            let pf = profile(&comb.result, k).unwrap();
            let allowed = sumset(&profile(&comb.base, k).unwrap().sizes, c);
            assert!(pf.sizes.is_subset(&allowed));
        }
        let comb = combine_union(8, 0, 2, 3, 9).unwrap();
        assert_eq!(comb.result, comb.evasive.set);
    }

    #[test]
    fn difference_combination() {
        let (k, c) = (2, 3);
        for (n, m) in [(8, 100), (8, 200), (7, 96), (6, 33)] {
            let comb = combine_difference(n, m, k, c, 4).unwrap();
            let s1 = &comb.evasive.set;
            assert!(comb.evasive_part.is_subset(&comb.base).unwrap());
            assert!(comb.result.is_subset(&comb.base).unwrap());
            assert_eq!(comb.result.len() as u64, m - comb.evasive_part.len() as u64);
            let full = 1u64 << n;
            assert!(comb.evasive_part.len() as u64 * full >= s1.len() as u64 * m);
            let pf = profile(&comb.result, k).unwrap();
            let base = profile(&comb.base, k).unwrap().sizes;
            for t in pf.sizes {
                assert!((0..=c).any(|j| base.contains(&(t + j))), "t={t}");
            }
        }
        let comb = combine_difference(6, 64, 2, 3, 1).unwrap();
        assert_eq!(comb.result, comb.evasive.set.complement());
    }
}
