//! Coefficient fields: exact rationals and word-sized prime fields.
//!
//! Polynomials and series are generic over a `FieldCtx`, a small runtime
//! descriptor that knows how to do arithmetic on its element type. The two
//! implementations are `QField` (arbitrary-precision rationals) and
//! `PrimeField` (integers mod p for a prime p < 2^62, kept in a machine
//! word). Carrying the descriptor at runtime lets a prime modulus be chosen
//! per trial without infecting every type with a const parameter.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Arithmetic context for a coefficient field.
///
/// Invariant: elements are only combined under the context that created
/// them. `MultiPoly` checks this and reports mixed-field usage errors.
pub trait FieldCtx: Clone + PartialEq + std::fmt::Debug {
    type Elem: Clone + PartialEq + std::fmt::Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    /// None exactly when `a` is zero.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    // `self` here is the target of the conversion, not its subject; the
    // context is what knows how to build an element
    #[allow(clippy::wrong_self_convention)]
    fn from_i64(&self, n: i64) -> Self::Elem;
    /// Reduce an exact rational into this field. Fails for `PrimeField`
    /// when the denominator is divisible by the modulus.
    #[allow(clippy::wrong_self_convention)]
    fn from_rational(&self, q: &BigRational) -> Result<Self::Elem>;
    /// Short human-readable name used in error messages.
    fn describe(&self) -> String;
}

/// The field of rational numbers.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct QField;

impl FieldCtx for QField {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn inv(&self, a: &BigRational) -> Option<BigRational> {
        if a.is_zero() {
            None
        } else {
            Some(a.recip())
        }
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn from_i64(&self, n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }
    fn from_rational(&self, q: &BigRational) -> Result<BigRational> {
        Ok(q.clone())
    }
    fn describe(&self) -> String {
        "Q".into()
    }
}

/// Integers mod p for a prime p < 2^62. Elements are canonical residues.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    /// Invariant: `p` is prime and below 2^62 so that sums of two residues
    /// never overflow u64 and products fit in u128.
    pub fn new(p: u64) -> Result<Self> {
        if !(2..(1u64 << 62)).contains(&p) {
            return Err(Error::usage(format!("modulus {p} out of range")));
        }
        Ok(PrimeField { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn reduce_bigint(&self, n: &BigInt) -> u64 {
        let m = n % BigInt::from(self.p);
        let m = if m.is_negative() { m + BigInt::from(self.p) } else { m };
        let (_, digits) = m.to_u64_digits();
        digits.first().copied().unwrap_or(0)
    }

    pub fn pow(&self, mut b: u64, mut e: u64) -> u64 {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            b = self.mul(&b, &b);
            e >>= 1;
        }
        acc
    }
}

impl FieldCtx for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.p
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 * *b as u128) % self.p as u128) as u64
    }
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - a
        }
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        if *a == 0 {
            return None;
        }
        // Fermat: a^(p-2) mod p.
        Some(self.pow(*a, self.p - 2))
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn from_i64(&self, n: i64) -> u64 {
        let m = n.rem_euclid(self.p as i64);
        m as u64
    }
    fn from_rational(&self, q: &BigRational) -> Result<u64> {
        let num = self.reduce_bigint(q.numer());
        let den = self.reduce_bigint(q.denom());
        let dinv = self.inv(&den).ok_or_else(|| {
            Error::usage(format!("denominator of {q} vanishes mod {}", self.p))
        })?;
        Ok(self.mul(&num, &dinv))
    }
    fn describe(&self) -> String {
        format!("F_{}", self.p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_basics() {
        let f = PrimeField::new(97).unwrap();
        assert_eq!(f.add(&90, &10), 3);
        assert_eq!(f.mul(&96, &96), 1);
        assert_eq!(f.inv(&3).unwrap(), 65); // 3 * 65 = 195 = 2*97 + 1
        assert_eq!(f.inv(&0), None);
        assert_eq!(f.from_i64(-1), 96);
    }

    #[test]
    fn rational_reduction_mod_p() {
        let f = PrimeField::new(101).unwrap();
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let r = f.from_rational(&half).unwrap();
        assert_eq!(f.mul(&r, &2), 1);
    }

    #[test]
    fn modulus_range_checked() {
        assert!(PrimeField::new(1).is_err());
        assert!(PrimeField::new(1u64 << 62).is_err());
    }
}
