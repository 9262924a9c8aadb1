//! Self-check suites exercising each module against brute-force oracles at
//! desk scale. Every suite is deterministic.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{
    additive_energy, closed_form_spectrum, direction_statistics, f23_from_energy, flat_statistics,
    is_sidon, profile, spectrum, SearchOptions,
};
use crate::constructions::{lexicographic, lexicographic_profiles};
use crate::error::{invalid, Error, Result};
use crate::field::bose_set;
use crate::gf2::{enumerate_k_flats, PointSet};
use crate::hypercube::{
    crossing_edges, cut_lower_bound, exhaustive_cube_extremes, induced_edges, min_cut_size,
};
use crate::numerals::{
    binomial, missing_count_binary, psi, s2, s2_star, takagi_identity_holds, to_csd,
};

/// Seed for the random instances inside the suites.
pub const SUITE_SEED: u64 = 0x5EED;

/// The closed-form `(k, t)` pairs checked by the small-spectra suite.
pub const CLOSED_FORM_PAIRS: [(u32, u32); 7] =
    [(1, 0), (1, 1), (1, 2), (2, 1), (2, 2), (2, 3), (3, 4)];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    SmallSpectra,
    Profiles,
    Energy,
    Cube,
    Numerals,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 6] = [
        "small-spectra",
        "profiles",
        "energy",
        "cube",
        "numerals",
        "all",
    ];
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Suite> {
        Ok(match s {
            "small-spectra" => Suite::SmallSpectra,
            "profiles" => Suite::Profiles,
            "energy" => Suite::Energy,
            "cube" => Suite::Cube,
            "numerals" => Suite::Numerals,
            "all" => Suite::All,
            _ => return Err(invalid(format!("unknown suite {s:?}"))),
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = [
            Suite::SmallSpectra,
            Suite::Profiles,
            Suite::Energy,
            Suite::Cube,
            Suite::Numerals,
            Suite::All,
        ]
        .iter()
        .position(|s| s == self)
        .expect("listed");
        f.write_str(Suite::NAMES[i])
    }
}

pub fn run_suite(suite: Suite) -> Result<Vec<Check>> {
    match suite {
        Suite::SmallSpectra => small_spectra(),
        Suite::Profiles => profiles(),
        Suite::Energy => energy(),
        Suite::Cube => cube(),
        Suite::Numerals => numerals(),
        Suite::All => {
            let mut all = Vec::new();
            for s in [
                Suite::SmallSpectra,
                Suite::Profiles,
                Suite::Energy,
                Suite::Cube,
                Suite::Numerals,
            ] {
                all.extend(run_suite(s)?);
            }
            Ok(all)
        }
    }
}

fn small_spectra() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let opts = SearchOptions::default();
    for n in 3..=4 {
        for (k, t) in CLOSED_FORM_PAIRS {
            let got = spectrum(n, k, t, opts)?;
            let want = closed_form_spectrum(n, k, t).expect("listed pair");
            checks.push(Check::new(
                format!("spectrum n={n} k={k} t={t} matches closed form"),
                got.members == want.members,
                format!("{} members", got.members.len()),
            ));
        }
    }
    for n in 1..=4u32 {
        let mut ok = true;
        for k in 0..=n.min(3) {
            for t in 0..=1u32 << k {
                let a = spectrum(n, k, t, opts)?;
                let b = spectrum(n, k, (1 << k) - t, opts)?;
                ok &= a.dual().members == b.members;
            }
        }
        checks.push(Check::new(
            format!("spectrum duality n={n}"),
            ok,
            "all k <= 3, all t",
        ));
    }
    let sp = spectrum(4, 2, 3, opts)?;
    let missing = (0..=16u64).filter(|m| !sp.contains(*m)).count() as u64;
    let formula = missing_count_binary(4, 2, 3)?;
    checks.push(Check::new(
        "missing sizes of Sp(4;2,3) match the digit-sum count",
        formula == missing.into() && missing == 6,
        format!("{missing} missing, formula {formula}"),
    ));
    Ok(checks)
}

fn profiles() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for n in 1..=6u32 {
        let mut binary = 0u64;
        let mut signed = 0u64;
        let mut oversized = 0u64;
        for k in 0..=n {
            for (m, p) in lexicographic_profiles(n, k)?.iter().enumerate() {
                let m = m as u64;
                let bound = (0..=u64::from(s2(m)))
                    .map(|j| binomial(k.into(), j))
                    .sum::<num_bigint::BigUint>()
                    + 1u32;
                if num_bigint::BigUint::from(p.sizes.len()) > bound {
                    oversized += 1;
                }
                for &t in &p.sizes {
                    binary += u64::from(s2(t.into()) > s2(m));
                    signed += u64::from(s2_star(t.into()) > s2_star(m as i64));
                }
            }
        }
        checks.push(Check::new(
            format!("lexicographic sets avoid heavier binary weights n={n}"),
            binary == 0,
            format!("{binary} violations"),
        ));
        checks.push(Check::new(
            format!("lexicographic sets avoid heavier CSD weights n={n}"),
            signed == 0,
            format!("{signed} violations"),
        ));
        checks.push(Check::new(
            format!("lexicographic profile size bound n={n}"),
            oversized == 0,
            format!("{oversized} violations"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED);
    let mut dual_ok = true;
    let mut union_ok = true;
    for _ in 0..40 {
        let n = rng.gen_range(2..=7);
        let a = random_set(&mut rng, n);
        let b = random_set(&mut rng, n).difference(&a)?;
        let u = a.union(&b)?;
        for k in 1..=n.min(3) {
            let pa = profile(&a, k)?;
            let pc = profile(&a.complement(), k)?;
            dual_ok &= pa.sizes.iter().all(|&t| pc.contains((1 << k) - t));
            let pb = profile(&b, k)?;
            let pu = profile(&u, k)?;
            union_ok &= pu
                .sizes
                .iter()
                .all(|&t| pa.sizes.iter().any(|&x| x <= t && pb.contains(t - x)));
        }
    }
    checks.push(Check::new(
        "profile complement duality",
        dual_ok,
        "40 seeded sets, n <= 7",
    ));
    checks.push(Check::new(
        "profile of a disjoint union lies in the sumset",
        union_ok,
        "40 seeded pairs",
    ));
    Ok(checks)
}

fn random_set(rng: &mut ChaCha8Rng, n: u32) -> PointSet {
    let density: f64 = rng.gen();
    PointSet::from_words_unchecked(n, (0..1u32 << n).filter(|_| rng.gen_bool(density)))
}

fn brute_energy(set: &PointSet) -> u128 {
    let p = set.words();
    let mut e = 0u128;
    for &a in &p {
        for &b in &p {
            for &c in &p {
                e += u128::from(set.contains(a ^ b ^ c));
            }
        }
    }
    e
}

fn energy() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let mut bad = 0;
    for mask in 0u64..1 << 16 {
        let s = PointSet::from_mask(4, mask)?;
        bad += u32::from(additive_energy(&s) != brute_energy(&s));
    }
    checks.push(Check::new(
        "energy formula equals quadruple count, all subsets n=4",
        bad == 0,
        format!("{bad} mismatches"),
    ));
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED);
    let (mut energy_bad, mut f23_bad, mut triple_bad, mut weak_bad) = (0, 0, 0, 0);
    for _ in 0..50 {
        let s = random_set(&mut rng, 6);
        let e = additive_energy(&s);
        energy_bad += u32::from(e != brute_energy(&s));
        let m = s.len() as u128;
        weak_bad += u32::from(e > m * m * m);
        let direct = flat_statistics(&s, 2)?.get(3);
        f23_bad += u32::from(f23_from_energy(&s) != u128::from(direct));
        let mut sum = 0u64;
        for v in 1..64 {
            let st = direction_statistics(&s, &[v])?;
            sum += st.get(2) * st.get(1);
        }
        triple_bad += u32::from(3 * direct != sum);
    }
    checks.push(Check::new(
        "energy formula equals quadruple count, random n=6",
        energy_bad == 0,
        format!("{energy_bad} mismatches"),
    ));
    checks.push(Check::new(
        "F_{2,3} from energy equals direct count",
        f23_bad == 0,
        format!("{f23_bad} mismatches"),
    ));
    checks.push(Check::new(
        "3 F_{2,3} equals the line-pair sum",
        triple_bad == 0,
        format!("{triple_bad} mismatches"),
    ));
    checks.push(Check::new(
        "E(S) <= m^3",
        weak_bad == 0,
        format!("{weak_bad} violations"),
    ));
    let mut flat_bad = 0;
    for n in 1..=5u32 {
        for k in 0..=n {
            for f in enumerate_k_flats(n, k)? {
                let s = f.to_point_set();
                flat_bad += u32::from(additive_energy(&s) != (s.len() as u128).pow(3));
            }
        }
    }
    checks.push(Check::new(
        "flats attain E = m^3",
        flat_bad == 0,
        format!("{flat_bad} mismatches"),
    ));
    for n in (2..=12).step_by(2) {
        let b = bose_set(n)?;
        let sidon = is_sidon(&b)?.sidon;
        checks.push(Check::new(
            format!("Bose set n={n} is Sidon"),
            sidon,
            format!("{} points", b.len()),
        ));
    }
    Ok(checks)
}

fn cube() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for n in 1..=4u32 {
        let ex = exhaustive_cube_extremes(n)?;
        let mut hart = true;
        let mut cuts = true;
        for t in 1..1u64 << n {
            hart &= u128::from(ex.max_induced[t as usize]) == psi(t)?;
            cuts &= u128::from(ex.min_crossing[t as usize]) == min_cut_size(n, t)?;
        }
        checks.push(Check::new(
            format!("max induced edges equal Psi(t), n={n}"),
            hart,
            "all subsets",
        ));
        checks.push(Check::new(
            format!("min crossing edges equal nt - 2Psi(t), n={n}"),
            cuts,
            "all subsets",
        ));
        let mut bound = true;
        for d in 0..n {
            for t in 1u64 << d..=(1u64 << n) - (1 << d) {
                bound &= ex.min_crossing[t as usize] >= cut_lower_bound(n, d)?;
            }
        }
        checks.push(Check::new(
            format!("cut lower bound 2^d(n-d), n={n}"),
            bound,
            "all subsets",
        ));
    }
    let mut tight = true;
    for n in 1..=10u32 {
        for t in 1..=1u64 << n {
            let l = lexicographic(n, t)?;
            tight &= u128::from(induced_edges(n, &l)?) == psi(t)?;
            if t < 1 << n {
                tight &= u128::from(crossing_edges(n, &l)?) == min_cut_size(n, t)?;
            }
        }
    }
    checks.push(Check::new(
        "lexicographic sets attain Psi(t), n <= 10",
        tight,
        "all t",
    ));
    Ok(checks)
}

fn numerals() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let mut csd_ok = true;
    for m in -(1i64 << 16)..=1 << 16 {
        let c = to_csd(m);
        csd_ok &= c.evaluate() == i128::from(m) && c.is_non_adjacent();
        csd_ok &= c.nonzero_count() <= s2(m.unsigned_abs());
    }
    checks.push(Check::new(
        "CSD digits evaluate back, are non-adjacent and no heavier than binary",
        csd_ok,
        "|m| <= 2^16",
    ));
    let mut naive = 0u128;
    let mut psi_ok = true;
    for t in 1..=1u64 << 14 {
        naive += u128::from(s2(t - 1));
        psi_ok &= psi(t)? == naive;
    }
    checks.push(Check::new(
        "Psi equals the prefix digit sum",
        psi_ok,
        "t <= 2^14",
    ));
    let mut takagi = true;
    for t in 1..=1u64 << 12 {
        takagi &= takagi_identity_holds(t)?;
    }
    checks.push(Check::new(
        "Takagi identity 2Psi(t) = td + 2^d(2x - tau(x))",
        takagi,
        "t <= 2^12",
    ));
    let mut sub = true;
    for a in 0..300i64 {
        for b in 0..300i64 {
            sub &= s2((a + b) as u64) <= s2(a as u64) + s2(b as u64);
            sub &= s2_star(a + b) <= s2_star(a) + s2_star(b);
        }
    }
    checks.push(Check::new(
        "digit sums are subadditive",
        sub,
        "0 <= a, b < 300",
    ));
    Ok(checks)
}
