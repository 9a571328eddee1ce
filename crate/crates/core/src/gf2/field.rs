use std::fmt;
use std::ops::{Add, Mul};

use crate::error::{NmcError, Result};

/// Largest supported extension degree.
pub const MAX_DEGREE: u32 = 16;

/// The field GF(2^m) defined by an irreducible modulus of degree `m`.
///
/// The modulus is stored with its leading term, e.g. `0b1011` for
/// `x^3 + x + 1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct BinaryField {
    degree: u32,
    modulus: u32,
}

impl BinaryField {
    /// GF(2^m) with the lexicographically smallest irreducible modulus of
    /// degree `m` (`x^3+x+1` for m = 3, `x^4+x+1` for m = 4).
    pub fn new(degree: u32) -> Result<Self> {
        if degree == 0 || degree > MAX_DEGREE {
            return Err(NmcError::InvalidParams(format!(
                "field degree {degree} outside 1..={MAX_DEGREE}"
            )));
        }
        let lo = 1u32 << degree;
        let modulus = (lo..lo << 1)
            .find(|&p| is_irreducible(p))
            .expect("an irreducible polynomial exists for every degree");
        Ok(Self { degree, modulus })
    }

    pub fn with_modulus(modulus: u32) -> Result<Self> {
        if modulus < 2 {
            return Err(NmcError::InvalidParams(
                "modulus must have degree >= 1".into(),
            ));
        }
        let degree = 31 - modulus.leading_zeros();
        if degree > MAX_DEGREE {
            return Err(NmcError::InvalidParams(format!(
                "field degree {degree} outside 1..={MAX_DEGREE}"
            )));
        }
        if !is_irreducible(modulus) {
            return Err(NmcError::InvalidParams(format!(
                "{modulus:#b} is reducible"
            )));
        }
        Ok(Self { degree, modulus })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn order(&self) -> u32 {
        1 << self.degree
    }

    pub fn elem(&self, value: u32) -> Result<FieldElem> {
        if value >= self.order() {
            return Err(NmcError::InvalidParams(format!(
                "{value} is not an element of GF(2^{})",
                self.degree
            )));
        }
        Ok(FieldElem {
            value,
            field: *self,
        })
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem {
            value: 0,
            field: *self,
        }
    }

    pub fn one(&self) -> FieldElem {
        FieldElem {
            value: 1,
            field: *self,
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElem> + '_ {
        (0..self.order()).map(move |value| FieldElem {
            value,
            field: *self,
        })
    }

    pub(crate) fn mul_raw(&self, a: u32, b: u32) -> u32 {
        let mut acc = 0u32;
        let mut a = a;
        let mut b = b;
        let top = 1u32 << self.degree;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a <<= 1;
            if a & top != 0 {
                a ^= self.modulus;
            }
        }
        acc
    }
}

impl fmt::Debug for BinaryField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{}) mod {:#b}", self.degree, self.modulus)
    }
}

/// Trial division by every polynomial of degree 1..=deg/2.
fn is_irreducible(p: u32) -> bool {
    let deg = 31 - p.leading_zeros();
    if deg == 0 {
        return false;
    }
    (2u32..(1 << (deg / 2 + 1))).all(|q| poly_rem(p, q) != 0)
}

fn poly_rem(mut a: u32, b: u32) -> u32 {
    let db = 31 - b.leading_zeros();
    while a != 0 && 31 - a.leading_zeros() >= db {
        a ^= b << (31 - a.leading_zeros() - db);
    }
    a
}

/// An element of GF(2^m), tagged with its field.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElem {
    value: u32,
    field: BinaryField,
}

impl FieldElem {
    pub(crate) fn from_raw(field: BinaryField, value: u32) -> Self {
        debug_assert!(value < field.order());
        Self { value, field }
    }

    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn field(&self) -> BinaryField {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            return Err(NmcError::ModulusMismatch {
                left: self.field.modulus,
                right: other.field.modulus,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self {
            value: self.value ^ other.value,
            field: self.field,
        })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self {
            value: self.field.mul_raw(self.value, other.value),
            field: self.field,
        })
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = *self;
        let mut acc = self.field.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via `a^(2^m - 2)`; `None` for zero.
    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        Some(self.pow(u64::from(self.field.order()) - 2))
    }
}

/// Panics if the operands come from different fields; use
/// [`FieldElem::try_add`] to get an error instead.
impl Add for FieldElem {
    type Output = FieldElem;

    fn add(self, rhs: Self) -> Self {
        self.try_add(&rhs).expect("field mismatch")
    }
}

/// Panics if the operands come from different fields; use
/// [`FieldElem::try_mul`] to get an error instead.
impl Mul for FieldElem {
    type Output = FieldElem;

    fn mul(self, rhs: Self) -> Self {
        self.try_mul(&rhs).expect("field mismatch")
    }
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:0width$b}",
            self.value,
            width = self.field.degree as usize
        )
    }
}
