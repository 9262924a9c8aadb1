//! GF(2^e) in a polynomial basis, enough to build the Bose Sidon sets
//! `{(x, x^3)}`.

use crate::error::{invalid, Error, Result};
use crate::gf2::{PointSet, MAX_SET_DIM};

/// Largest extension degree supported.
pub const MAX_DEGREE: u32 = 16;

/// Carry-less product of two polynomials over F_2.
pub fn clmul(a: u64, b: u64) -> u64 {
    let mut acc = 0u64;
    let mut a = a;
    let mut b = b;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        a <<= 1;
        b >>= 1;
    }
    acc
}

fn degree(p: u64) -> i32 {
    63 - p.leading_zeros() as i32
}

/// Remainder of polynomial division `a mod m` over F_2 (`m != 0`).
pub fn poly_rem(mut a: u64, m: u64) -> u64 {
    let dm = degree(m);
    while a != 0 && degree(a) >= dm {
        a ^= m << (degree(a) - dm);
    }
    a
}

/// The lexicographically smallest irreducible polynomial of degree `e`, as a
/// word whose bit `i` is the coefficient of `x^i`.
pub fn smallest_irreducible(e: u32) -> Result<u32> {
    if !(1..=MAX_DEGREE).contains(&e) {
        return Err(invalid(format!("degree {e} outside 1..={MAX_DEGREE}")));
    }
    // Sieve: irreducibles of each degree d <= e/2, built bottom-up.
    let mut small: Vec<u64> = Vec::new();
    let half = e / 2;
    for d in 1..=half {
        for cand in 1u64 << d..1u64 << (d + 1) {
            if small
                .iter()
                .take_while(|&&f| 2 * degree(f) <= d as i32)
                .all(|&f| poly_rem(cand, f) != 0)
            {
                small.push(cand);
            }
        }
    }
    (1u64 << e..1u64 << (e + 1))
        .find(|&cand| small.iter().all(|&f| poly_rem(cand, f) != 0))
        .map(|p| p as u32)
        .ok_or_else(|| invalid(format!("no irreducible polynomial of degree {e}")))
}

/// GF(2^e) with a fixed irreducible modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Field {
    degree: u32,
    modulus: u32,
}

impl Field {
    /// GF(2^e) modulo [`smallest_irreducible`]`(e)`.
    pub fn new(e: u32) -> Result<Field> {
        Ok(Field {
            degree: e,
            modulus: smallest_irreducible(e)?,
        })
    }

    /// GF(2^e) modulo a caller-supplied polynomial, checked for irreducibility.
    pub fn with_modulus(e: u32, modulus: u32) -> Result<Field> {
        if !(1..=MAX_DEGREE).contains(&e) || degree(modulus.into()) != e as i32 {
            return Err(invalid(format!(
                "{modulus:#b} is not a degree-{e} polynomial"
            )));
        }
        let irreducible = (1..=e / 2)
            .all(|d| (1u64 << d..1u64 << (d + 1)).all(|f| poly_rem(modulus.into(), f) != 0));
        if !irreducible {
            return Err(invalid(format!("{modulus:#b} is reducible")));
        }
        Ok(Field { degree: e, modulus })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn order(&self) -> u64 {
        1u64 << self.degree
    }

    pub fn element(&self, poly: u32) -> Result<FieldElement> {
        if u64::from(poly) >= self.order() {
            return Err(invalid(format!("{poly:#b} has degree >= {}", self.degree)));
        }
        Ok(FieldElement { poly, field: *self })
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement {
            poly: 0,
            field: *self,
        }
    }

    pub fn one(&self) -> FieldElement {
        FieldElement {
            poly: 1,
            field: *self,
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.order()).map(move |p| FieldElement {
            poly: p as u32,
            field: *self,
        })
    }

    #[inline]
    fn mul_raw(&self, a: u32, b: u32) -> u32 {
        poly_rem(clmul(a.into(), b.into()), self.modulus.into()) as u32
    }
}

/// An element of GF(2^e).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FieldElement {
    poly: u32,
    field: Field,
}

impl FieldElement {
    pub fn poly(&self) -> u32 {
        self.poly
    }

    pub fn field(&self) -> Field {
        self.field
    }

    fn check(&self, other: &FieldElement) -> Result<()> {
        if self.field != other.field {
            return Err(Error::ModulusMismatch(
                self.field.modulus,
                other.field.modulus,
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &FieldElement) -> Result<FieldElement> {
        self.check(other)?;
        Ok(FieldElement {
            poly: self.poly ^ other.poly,
            field: self.field,
        })
    }

    pub fn mul(&self, other: &FieldElement) -> Result<FieldElement> {
        self.check(other)?;
        Ok(FieldElement {
            poly: self.field.mul_raw(self.poly, other.poly),
            field: self.field,
        })
    }

    pub fn pow(&self, mut exp: u64) -> FieldElement {
        let mut base = self.poly;
        let mut acc = 1u32;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.field.mul_raw(acc, base);
            }
            base = self.field.mul_raw(base, base);
            exp >>= 1;
        }
        FieldElement {
            poly: acc,
            field: self.field,
        }
    }

    /// Multiplicative inverse via `a^(2^e - 2)`; `None` for zero.
    pub fn inverse(&self) -> Option<FieldElement> {
        (self.poly != 0).then(|| self.pow(self.field.order() - 2))
    }

    pub fn is_zero(&self) -> bool {
        self.poly == 0
    }
}

/// `field_mul` on raw elements.
pub fn field_mul(a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
    a.mul(b)
}

/// The Bose set `{(x, x^3) : x ∈ GF(2^(n/2))}` in F_2^n, with `x` in the high
/// half of each word and `x^3` in the low half.
pub fn bose_set(n: u32) -> Result<PointSet> {
    if n % 2 == 1 || n == 0 {
        return Err(invalid(format!(
            "the Bose construction needs a positive even n, got {n}"
        )));
    }
    if n > MAX_SET_DIM {
        return Err(Error::DimensionTooLarge {
            n,
            max: MAX_SET_DIM,
        });
    }
    let e = n / 2;
    let field = Field::new(e)?;
    let mut set = PointSet::empty(n)?;
    for x in field.elements() {
        let cube = x.pow(3).poly();
        set.insert(x.poly() << e | cube);
    }
    debug_assert_eq!(set.len() as u64, field.order());
    Ok(set)
}
