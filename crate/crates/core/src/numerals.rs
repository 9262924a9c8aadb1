//! Binary digit statistics, the canonical signed-digit (non-adjacent) form,
//! the prefix digit sum Ψ, the Takagi function at dyadic points, and the
//! counts of spectrum values excluded by digit arguments.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{invalid, Result};

/// Binary digit sum `s_2(m)`.
pub fn s2(m: u64) -> u32 {
    m.count_ones()
}

/// Positions of the 1-bits of `m`, ascending.
pub fn supp(m: u64) -> Vec<u32> {
    (0..64).filter(|&i| m >> i & 1 == 1).collect()
}

/// A canonical signed-digit representation, least-significant digit first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CsdDigits {
    digits: Vec<i8>,
    value: i64,
}

impl CsdDigits {
    pub fn digits(&self) -> &[i8] {
        &self.digits
    }

    pub fn value(&self) -> i64 {
        self.value
    }

    pub fn nonzero_count(&self) -> u32 {
        self.digits.iter().filter(|&&d| d != 0).count() as u32
    }

    /// `Σ digits[i]·2^i`, recomputed from the digits.
    pub fn evaluate(&self) -> i128 {
        self.digits
            .iter()
            .rev()
            .fold(0i128, |acc, &d| 2 * acc + i128::from(d))
    }

    pub fn is_non_adjacent(&self) -> bool {
        self.digits.windows(2).all(|w| w[0] == 0 || w[1] == 0)
    }
}

impl fmt::Display for CsdDigits {
    /// Most significant digit first, with `ī` for −1.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.digits.is_empty() {
            return write!(f, "0");
        }
        for &d in self.digits.iter().rev() {
            let c = match d {
                1 => '1',
                -1 => 'ī',
                _ => '0',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// The canonical signed-digit form of `m` (negative values supported).
pub fn to_csd(m: i64) -> CsdDigits {
    let mut digits = Vec::new();
    let mut x = i128::from(m);
    while x != 0 {
        let d = if x & 1 == 1 { 2 - x.rem_euclid(4) } else { 0 };
        digits.push(d as i8);
        x = (x - d) / 2;
    }
    CsdDigits { digits, value: m }
}

/// Number of nonzero CSD digits, `s_2*(m)`.
pub fn s2_star(m: i64) -> u32 {
    to_csd(m).nonzero_count()
}

/// `Ψ(t) = Σ_{i<t} s_2(i)`, by counting the ones contributed by each bit position.
pub fn psi(t: u64) -> Result<u128> {
    if t == 0 {
        return Err(invalid("Ψ is defined for t >= 1"));
    }
    let t = u128::from(t);
    let mut total = 0u128;
    for j in 0..64 {
        let period = 1u128 << (j + 1);
        let half = 1u128 << j;
        if half >= t {
            break;
        }
        total += (t / period) * half + (t % period).saturating_sub(half);
    }
    Ok(total)
}

/// A dyadic rational `numerator / 2^exponent` in lowest terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DyadicRational {
    numerator: BigInt,
    exponent: u32,
}

impl DyadicRational {
    pub fn new(numerator: impl Into<BigInt>, exponent: u32) -> Self {
        let mut numerator = numerator.into();
        let mut exponent = exponent;
        if numerator.is_zero() {
            exponent = 0;
        }
        while exponent > 0 && (&numerator & BigInt::one()).is_zero() {
            numerator >>= 1;
            exponent -= 1;
        }
        DyadicRational {
            numerator,
            exponent,
        }
    }

    pub fn integer(v: impl Into<BigInt>) -> Self {
        DyadicRational::new(v, 0)
    }

    pub fn zero() -> Self {
        DyadicRational::integer(0)
    }

    pub fn numerator(&self) -> &BigInt {
        &self.numerator
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn is_integer(&self) -> bool {
        self.exponent == 0
    }

    fn aligned(&self, other: &Self) -> (BigInt, BigInt, u32) {
        let e = self.exponent.max(other.exponent);
        (
            &self.numerator << (e - self.exponent),
            &other.numerator << (e - other.exponent),
            e,
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a, b, e) = self.aligned(other);
        DyadicRational::new(a + b, e)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let (a, b, e) = self.aligned(other);
        DyadicRational::new(a - b, e)
    }

    pub fn mul(&self, other: &Self) -> Self {
        DyadicRational::new(
            &self.numerator * &other.numerator,
            self.exponent + other.exponent,
        )
    }

    /// Multiplies by `2^k`.
    pub fn shl(&self, k: u32) -> Self {
        if k <= self.exponent {
            DyadicRational::new(self.numerator.clone(), self.exponent - k)
        } else {
            DyadicRational::new(&self.numerator << (k - self.exponent), 0)
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.numerator.to_f64().unwrap_or(f64::NAN) / 2f64.powi(self.exponent as i32)
    }
}

impl PartialOrd for DyadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DyadicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }
}

impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent == 0 {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "{}/2^{}", self.numerator, self.exponent)
        }
    }
}

/// The Takagi function `τ(x) = Σ_j 2^{-j}·dist(2^j x, ℤ)` at a dyadic `x ∈ [0, 1]`,
/// exactly. Terms with `j >= exponent(x)` vanish.
pub fn takagi_dyadic(x: &DyadicRational) -> Result<DyadicRational> {
    if x.numerator.is_negative() || *x > DyadicRational::integer(1) {
        return Err(invalid(format!("τ is evaluated on [0, 1], got {x}")));
    }
    let e = x.exponent;
    if e == 0 {
        return Ok(DyadicRational::zero());
    }
    let modulus = BigInt::one() << e;
    let a = x.numerator.clone();
    // each term is min(r, 2^e - r) / 2^(e+j); accumulate over 2^(2e-1)
    let mut acc = BigInt::zero();
    for j in 0..e {
        let r = (&a << j) % &modulus;
        let dist = std::cmp::min(r.clone(), &modulus - &r);
        acc += dist << (e - 1 - j);
    }
    Ok(DyadicRational::new(acc, 2 * e - 1))
}

/// Right-hand side of `2Ψ(t) = t·d + 2^d(2x − τ(x))` with `t = 2^d(1 + x)`.
pub fn takagi_psi_rhs(t: u64) -> Result<DyadicRational> {
    if t == 0 {
        return Err(invalid("t must be positive"));
    }
    let d = 63 - t.leading_zeros();
    let base = 1u64 << d;
    let x = DyadicRational::new(BigInt::from(t - base), d);
    let tau = takagi_dyadic(&x)?;
    let two_x_minus_tau = x.shl(1).sub(&tau);
    Ok(DyadicRational::integer(BigInt::from(t) * d).add(&two_x_minus_tau.shl(d)))
}

/// Whether `2Ψ(t)` equals the Takagi expression exactly.
pub fn takagi_identity_holds(t: u64) -> Result<bool> {
    let lhs = DyadicRational::integer(BigInt::from(2 * psi(t)?));
    Ok(lhs == takagi_psi_rhs(t)?)
}

/// Binomial coefficient `C(n, k)` (zero when `k > n`).
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

fn check_missing_range(n: u32, k: u32, t: u64, k_within_n: bool) -> Result<()> {
    if k_within_n && k > n || k >= 64 {
        return Err(invalid(format!("need k <= n, got k = {k}, n = {n}")));
    }
    if t == 0 || t >= 1u64 << k {
        return Err(invalid(format!("need 0 < t < 2^k, got t = {t}, k = {k}")));
    }
    Ok(())
}

/// `1 + Σ_{i=0}^{s_2(t)-1} C(n, i)`: a lower bound on the number of sizes
/// missing from the (n; k, t)-spectrum. `k` is only used for validation.
pub fn missing_count_binary(n: u32, k: u32, t: u64) -> Result<BigUint> {
    check_missing_range(n, k, t, true)?;
    let s = u64::from(s2(t));
    Ok((0..s).fold(BigUint::one(), |acc, i| acc + binomial(n.into(), i)))
}

/// The signed-digit analogue of [`missing_count_binary`]:
/// `n + 2 + ½·Σ_{i=2}^{s_2*(t)-1} [C(n+1-i, i)·2^i + C(n+1-i, i-1)·2^{i-1}]`.
///
/// The expression counts `m = 0` together with every `m ∈ [1, 2^n]` whose CSD
/// form has fewer nonzero digits than that of `t`; that reading needs
/// `s_2*(t) >= 2`. For powers of two the formula is still evaluated as
/// written (giving `n + 2`) although only `m = 0` is then excluded.
pub fn missing_count_csd(n: u32, k: u32, t: u64) -> Result<BigUint> {
    check_missing_range(n, k, t, false)?;
    let s = i64::from(s2_star(t as i64));
    let n = i64::from(n);
    let mut bracket = BigUint::zero();
    for i in 2..s {
        let top = n + 1 - i;
        if top < 0 {
            continue;
        }
        let top = top as u64;
        let i = i as u64;
        bracket += (binomial(top, i) << i) + (binomial(top, i - 1) << (i - 1));
    }
    debug_assert!((&bracket % 2u32).is_zero());
    Ok(BigUint::from((n + 2) as u64) + (bracket >> 1))
}

/// Default truncation for [`euler_phi_half`].
pub const DEFAULT_PHI_TERMS: u32 = 64;

/// Partial product `∏_{k=1}^{terms} (1 − 2^{-k})`, approaching φ(1/2) ≈ 0.2888.
pub fn euler_phi_half(terms: u32) -> f64 {
    (1..=terms).fold(1.0, |acc, k| acc * (1.0 - 0.5f64.powi(k as i32)))
}
