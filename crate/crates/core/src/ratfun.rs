//! Rational functions as reduced fractions of polynomials.
//!
//! Kept in lowest terms with a unit-normalized denominator, so structural
//! equality is semantic equality. The right-hand sides of a model live
//! here between parsing and the clearing of denominators.

use crate::error::{Error, Result};
use crate::poly::{gcd, QPoly};
use crate::vartable::VarTable;

#[derive(Clone, PartialEq, Debug)]
pub struct RatFun {
    num: QPoly,
    den: QPoly,
}

impl RatFun {
    pub fn new(num: QPoly, den: QPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::usage("division by the zero polynomial"));
        }
        let mut num = num;
        let mut den = den;
        if !num.is_zero() {
            let g = gcd(&num, &den)?;
            if !g.is_constant() {
                num = num.exact_div(&g)?.expect("gcd divides");
                den = den.exact_div(&g)?.expect("gcd divides");
            }
        }
        // Pin the unit to the denominator; the fraction is then canonical.
        let unit = den.trailing().map(|(_, c)| c.clone()).expect("nonzero denominator");
        let inv = unit.recip();
        num = num.scale(&inv);
        den = den.scale(&inv);
        if num.is_zero() {
            den = QPoly::from_int(1).with_table_id(den.table_id());
        }
        Ok(RatFun { num, den })
    }

    pub fn from_poly(p: QPoly) -> Self {
        let one = QPoly::from_int(1).with_table_id(p.table_id());
        RatFun { num: p, den: one }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_poly(QPoly::from_int(n))
    }

    pub fn num(&self) -> &QPoly {
        &self.num
    }

    pub fn den(&self) -> &QPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_poly(&self) -> bool {
        self.den.is_constant()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let num = self.num.mul(&other.den)?.add(&other.num.mul(&self.den)?)?;
        Self::new(num, self.den.mul(&other.den)?)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let num = self.num.mul(&other.den)?.sub(&other.num.mul(&self.den)?)?;
        Self::new(num, self.den.mul(&other.den)?)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        Self::new(self.num.mul(&other.num)?, self.den.mul(&other.den)?)
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        if other.is_zero() {
            return Err(Error::usage("division by the zero polynomial"));
        }
        Self::new(self.num.mul(&other.den)?, self.den.mul(&other.num)?)
    }

    pub fn neg(&self) -> Self {
        RatFun { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn pow(&self, e: u32) -> Result<Self> {
        Ok(RatFun { num: self.num.pow(e)?, den: self.den.pow(e)? })
    }

    pub fn display(&self, table: &VarTable) -> String {
        if self.is_poly() {
            return self.num.display_q(table);
        }
        let num = if self.num.num_terms() > 1 {
            format!("({})", self.num.display_q(table))
        } else {
            self.num.display_q(table)
        };
        let den = if self.den.num_terms() > 1 {
            format!("({})", self.den.display_q(table))
        } else {
            self.den.display_q(table)
        };
        format!("{num}/{den}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::QField;
    use crate::poly::MultiPoly;
    use crate::vartable::VarKind;

    fn setup() -> (VarTable, QPoly, QPoly) {
        let mut t = VarTable::new();
        let x = t.add("x", VarKind::State).unwrap();
        let y = t.add("y", VarKind::State).unwrap();
        (t.clone(), MultiPoly::var(QField, x).with_table(&t), MultiPoly::var(QField, y).with_table(&t))
    }

    #[test]
    fn fractions_reduce() {
        let (_t, x, y) = setup();
        // (x^2 - y^2) / (x - y) = x + y.
        let num = x.mul(&x).unwrap().sub(&y.mul(&y).unwrap()).unwrap();
        let den = x.sub(&y).unwrap();
        let r = RatFun::new(num, den).unwrap();
        assert!(r.is_poly());
        assert_eq!(r.num(), &x.add(&y).unwrap());
    }

    #[test]
    fn arithmetic_matches_school_rules() {
        let (_t, x, y) = setup();
        let a = RatFun::new(QPoly::from_int(1), x.clone()).unwrap();
        let b = RatFun::new(QPoly::from_int(1), y.clone()).unwrap();
        let s = a.add(&b).unwrap();
        // 1/x + 1/y = (x + y)/(x y).
        assert_eq!(s.num(), &x.add(&y).unwrap());
        assert_eq!(s.den(), &x.mul(&y).unwrap());
        let p = a.mul(&b).unwrap();
        assert_eq!(p.den(), &x.mul(&y).unwrap());
        let d = a.div(&b).unwrap();
        assert_eq!(d.num(), &y);
        assert_eq!(d.den(), &x);
    }

    #[test]
    fn zero_denominator_rejected() {
        let (_t, x, _y) = setup();
        assert!(RatFun::new(x.clone(), QPoly::zero(QField)).is_err());
        let a = RatFun::from_poly(x);
        assert!(a.div(&RatFun::from_int(0)).is_err());
    }

    #[test]
    fn canonical_form_is_stable() {
        let (_t, x, y) = setup();
        // 2x / 2y and x/y normalize identically.
        let two = num_rational::BigRational::from_integer(2.into());
        let a = RatFun::new(x.scale(&two), y.scale(&two)).unwrap();
        let b = RatFun::new(x.clone(), y.clone()).unwrap();
        assert_eq!(a, b);
    }
}
