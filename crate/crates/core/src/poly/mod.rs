//! Sparse multivariate polynomials over a runtime coefficient field.
//!
//! Terms live in a `BTreeMap` keyed by monomial under grevlex, so iteration
//! runs from the smallest term to the largest and the map never stores zero
//! coefficients. A polynomial remembers which `VarTable` its variable
//! indices refer to (id 0 means "anonymous", used by table-free algebra);
//! mixing tables or fields is a usage error, not a silent wrong answer.

mod gcd;
mod resultant;
mod sqfree;
pub mod univar;

pub use gcd::{content_wrt, gcd, gcd_list, primitive_part_wrt};
pub use resultant::{
    bareiss_determinant, discriminant, resultant, resultant_factored, sylvester_matrix,
};
pub use sqfree::{split_factors, squarefree_factorization, squarefree_part, SqfreeFactor};

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::coeff::{FieldCtx, PrimeField, QField};
use crate::error::{Error, Result};
use crate::mono::Mono;
use crate::vartable::VarTable;

#[derive(Clone, Debug)]
pub struct MultiPoly<F: FieldCtx> {
    field: F,
    table_id: u32,
    terms: BTreeMap<Mono, F::Elem>,
}

/// Equality is algebraic: same field, same terms. The table tag is
/// compatibility metadata and an untagged polynomial can equal a tagged
/// one.
impl<F: FieldCtx> PartialEq for MultiPoly<F> {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.terms == other.terms
    }
}

impl<F: FieldCtx> Eq for MultiPoly<F> where F::Elem: Eq {}

pub type QPoly = MultiPoly<QField>;
pub type FpPoly = MultiPoly<PrimeField>;

impl<F: FieldCtx> MultiPoly<F> {
    pub fn zero(field: F) -> Self {
        MultiPoly { field, table_id: 0, terms: BTreeMap::new() }
    }

    pub fn constant(field: F, c: F::Elem) -> Self {
        let mut p = Self::zero(field);
        if !p.field.is_zero(&c) {
            p.terms.insert(Mono::one(), c);
        }
        p
    }

    pub fn from_i64(field: F, n: i64) -> Self {
        let c = field.from_i64(n);
        Self::constant(field, c)
    }

    pub fn var(field: F, idx: usize) -> Self {
        let one = field.one();
        let mut p = Self::zero(field);
        p.terms.insert(Mono::var(idx), one);
        p
    }

    pub fn monomial(field: F, m: Mono, c: F::Elem) -> Self {
        let mut p = Self::zero(field);
        if !p.field.is_zero(&c) {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn from_terms(field: F, terms: impl IntoIterator<Item = (Mono, F::Elem)>) -> Self {
        let mut p = Self::zero(field);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    /// Tag this polynomial as belonging to `table`.
    pub fn with_table(mut self, table: &VarTable) -> Self {
        self.table_id = table.id();
        self
    }

    pub(crate) fn with_table_id(mut self, id: u32) -> Self {
        self.table_id = id;
        self
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn table_id(&self) -> u32 {
        self.table_id
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.len() <= 1 && self.terms.keys().all(Mono::is_one)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &F::Elem)> {
        self.terms.iter()
    }

    pub fn constant_term(&self) -> F::Elem {
        self.terms.get(&Mono::one()).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn coeff_of(&self, m: &Mono) -> F::Elem {
        self.terms.get(m).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Mono::total_degree).max().unwrap_or(0)
    }

    pub fn deg(&self, var: usize) -> u32 {
        self.terms.keys().map(|m| m.deg(var)).max().unwrap_or(0)
    }

    pub fn contains_var(&self, var: usize) -> bool {
        self.terms.keys().any(|m| m.deg(var) > 0)
    }

    /// Indices of all variables that actually occur.
    pub fn support(&self) -> Vec<usize> {
        let mut seen = std::collections::BTreeSet::new();
        for m in self.terms.keys() {
            seen.extend(m.vars());
        }
        seen.into_iter().collect()
    }

    /// Largest term under grevlex.
    pub fn leading(&self) -> Option<(&Mono, &F::Elem)> {
        self.terms.iter().next_back()
    }

    /// Smallest term under grevlex; this is the normalization pivot.
    pub fn trailing(&self) -> Option<(&Mono, &F::Elem)> {
        self.terms.iter().next()
    }

    fn add_term(&mut self, m: Mono, c: F::Elem) {
        if self.field.is_zero(&c) {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = self.field.add(e.get(), &c);
                if self.field.is_zero(&s) {
                    e.remove();
                } else {
                    e.insert(s);
                }
            }
        }
    }

    fn check_compat(&self, other: &Self) -> Result<u32> {
        if self.field != other.field {
            return Err(Error::usage(format!(
                "mixed coefficient fields: {} vs {}",
                self.field.describe(),
                other.field.describe()
            )));
        }
        match (self.table_id, other.table_id) {
            (0, t) | (t, 0) => Ok(t),
            (a, b) if a == b => Ok(a),
            (a, b) => Err(Error::usage(format!("mixed variable tables: {a} vs {b}"))),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let table_id = self.check_compat(other)?;
        let mut out = self.clone();
        out.table_id = table_id;
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let table_id = self.check_compat(other)?;
        let mut out = self.clone();
        out.table_id = table_id;
        for (m, c) in &other.terms {
            out.add_term(m.clone(), self.field.neg(c));
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = self.field.neg(c);
        }
        out
    }

    pub fn scale(&self, c: &F::Elem) -> Self {
        if self.field.is_zero(c) {
            return Self::zero(self.field.clone());
        }
        let mut out = Self::zero(self.field.clone());
        out.table_id = self.table_id;
        for (m, a) in &self.terms {
            out.add_term(m.clone(), self.field.mul(a, c));
        }
        out
    }

    pub fn mul_mono(&self, m: &Mono) -> Self {
        let mut out = Self::zero(self.field.clone());
        out.table_id = self.table_id;
        for (mm, c) in &self.terms {
            out.terms.insert(mm.mul(m), c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let table_id = self.check_compat(other)?;
        let mut out = Self::zero(self.field.clone());
        out.table_id = table_id;
        // Iterate the smaller operand on the outside.
        let (small, big) =
            if self.terms.len() <= other.terms.len() { (self, other) } else { (other, self) };
        for (m1, c1) in &small.terms {
            for (m2, c2) in &big.terms {
                out.add_term(m1.mul(m2), self.field.mul(c1, c2));
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Result<Self> {
        let mut base = self.clone();
        let mut acc = Self::constant(self.field.clone(), self.field.one());
        acc.table_id = self.table_id;
        let mut e = e;
        loop {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = base.mul(&base)?;
        }
        Ok(acc)
    }

    /// Divide by the coefficient of the smallest grevlex term, making that
    /// coefficient one. The zero polynomial is returned unchanged.
    pub fn normalize_unit(&self) -> Self {
        match self.trailing() {
            None => self.clone(),
            Some((_, c)) => {
                let inv = self.field.inv(c).expect("nonzero trailing coefficient");
                self.scale(&inv)
            }
        }
    }

    /// Exact division; `None` when `other` does not divide `self`.
    pub fn exact_div(&self, other: &Self) -> Result<Option<Self>> {
        self.check_compat(other)?;
        if other.is_zero() {
            return Err(Error::usage("division by zero polynomial"));
        }
        let (lm, lc) = other.leading().expect("nonzero divisor");
        let lc_inv = self.field.inv(lc).expect("field coefficient");
        let mut rem = self.clone();
        let mut quo = Self::zero(self.field.clone());
        quo.table_id = self.table_id.max(other.table_id);
        while let Some((rm, rc)) = rem.leading() {
            if !lm.divides(rm) {
                return Ok(None);
            }
            let qm = lm.div_into(rm);
            let qc = self.field.mul(rc, &lc_inv);
            let t = Self::monomial(self.field.clone(), qm, qc);
            rem = rem.sub(&t.mul(other)?)?;
            quo = quo.add(&t)?;
        }
        Ok(Some(quo))
    }

    pub fn divides(&self, other: &Self) -> bool {
        matches!(other.exact_div(self), Ok(Some(_)))
    }

    /// Partial derivative with respect to one variable.
    pub fn derivative(&self, var: usize) -> Self {
        let mut out = Self::zero(self.field.clone());
        out.table_id = self.table_id;
        for (m, c) in &self.terms {
            let e = m.deg(var);
            if e == 0 {
                continue;
            }
            let nm = m.with_deg(var, e - 1);
            let nc = self.field.mul(c, &self.field.from_i64(e as i64));
            out.add_term(nm, nc);
        }
        out
    }

    /// Coefficients grouped by the power of `var`, ascending, gaps omitted.
    /// The returned polynomials do not contain `var`.
    pub fn coeffs_wrt(&self, var: usize) -> Vec<(u32, Self)> {
        let mut groups: BTreeMap<u32, Self> = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.deg(var);
            let rest = m.with_deg(var, 0);
            groups
                .entry(e)
                .or_insert_with(|| {
                    let mut z = Self::zero(self.field.clone());
                    z.table_id = self.table_id;
                    z
                })
                .add_term(rest, c.clone());
        }
        groups.into_iter().collect()
    }

    /// Leading coefficient with respect to `var` (polynomial in the rest).
    pub fn lc_wrt(&self, var: usize) -> Self {
        self.coeffs_wrt(var).pop().map(|(_, c)| c).unwrap_or_else(|| Self::zero(self.field.clone()))
    }

    /// Replace `var` by a polynomial, via Horner evaluation.
    pub fn substitute(&self, var: usize, value: &Self) -> Result<Self> {
        let coeffs = self.coeffs_wrt(var);
        if coeffs.is_empty() {
            return Ok(self.clone());
        }
        let mut degs: Vec<u32> = coeffs.iter().map(|(d, _)| *d).collect();
        let mut parts: Vec<Self> = coeffs.into_iter().map(|(_, c)| c).collect();
        // Horner over the (ascending) list of present powers.
        let mut acc = parts.pop().unwrap();
        let mut last_deg = degs.pop().unwrap();
        while let Some(part) = parts.pop() {
            let d = degs.pop().unwrap();
            acc = acc.mul(&value.pow(last_deg - d)?)?.add(&part)?;
            last_deg = d;
        }
        acc = acc.mul(&value.pow(last_deg)?)?;
        Ok(acc)
    }

    /// Cleared substitution of `var := num/den`: returns `den^d * self` with
    /// the substitution applied, `d` the degree of `self` in `var`.
    pub fn substitute_rational(&self, var: usize, num: &Self, den: &Self) -> Result<Self> {
        let d = self.deg(var);
        if d == 0 {
            return Ok(self.clone());
        }
        let coeffs = self.coeffs_wrt(var);
        let mut dense: Vec<Self> = (0..=d)
            .map(|_| {
                let mut z = Self::zero(self.field.clone());
                z.table_id = self.table_id;
                z
            })
            .collect();
        for (e, c) in coeffs {
            dense[e as usize] = c;
        }
        // sum_k c_k num^k den^(d-k), Horner from the top.
        let mut acc = dense.pop().unwrap();
        let mut den_pow = Self::constant(self.field.clone(), self.field.one());
        while let Some(c) = dense.pop() {
            den_pow = den_pow.mul(den)?;
            acc = acc.mul(num)?.add(&c.mul(&den_pow)?)?;
        }
        Ok(acc)
    }

    /// Evaluate at a point given by variable index. Missing entries are an
    /// error; extra entries are ignored.
    pub fn eval(&self, point: &[F::Elem]) -> Result<F::Elem> {
        let mut acc = self.field.zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for v in m.vars() {
                let x = point
                    .get(v)
                    .ok_or_else(|| Error::usage(format!("evaluation point missing variable {v}")))?;
                let mut p = self.field.one();
                let mut b = x.clone();
                let mut e = m.deg(v);
                while e > 0 {
                    if e & 1 == 1 {
                        p = self.field.mul(&p, &b);
                    }
                    b = self.field.mul(&b, &b);
                    e >>= 1;
                }
                t = self.field.mul(&t, &p);
            }
            acc = self.field.add(&acc, &t);
        }
        Ok(acc)
    }

    /// Evaluate every variable except `keep`, producing a univariate
    /// polynomial in `keep` represented as dense coefficients.
    pub fn eval_except(&self, keep: usize, point: &[F::Elem]) -> Result<Vec<F::Elem>> {
        let d = self.deg(keep) as usize;
        let mut out = vec![self.field.zero(); d + 1];
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for v in m.vars() {
                if v == keep {
                    continue;
                }
                let x = point
                    .get(v)
                    .ok_or_else(|| Error::usage(format!("evaluation point missing variable {v}")))?;
                for _ in 0..m.deg(v) {
                    t = self.field.mul(&t, x);
                }
            }
            let k = m.deg(keep) as usize;
            out[k] = self.field.add(&out[k], &t);
        }
        while out.len() > 1 && self.field.is_zero(out.last().unwrap()) {
            out.pop();
        }
        Ok(out)
    }

    /// Rebuild with variable indices renamed through `f` (injective on the
    /// variables present); the result is untagged.
    pub fn remap_vars(&self, f: impl Fn(usize) -> usize) -> Self {
        let mut out = Self::zero(self.field.clone());
        for (m, c) in &self.terms {
            out.add_term(m.remap(&f), c.clone());
        }
        out
    }

    /// Map coefficients into another field.
    pub fn map_field<G: FieldCtx>(
        &self,
        target: &G,
        f: impl Fn(&F::Elem) -> Result<G::Elem>,
    ) -> Result<MultiPoly<G>> {
        let mut out = MultiPoly::zero(target.clone());
        out.table_id = self.table_id;
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c)?);
        }
        Ok(out)
    }

    /// Render with explicit `*` and `^`, terms from the smallest grevlex
    /// term upward. This is the canonical printing used everywhere.
    pub fn display(&self, table: &VarTable, fmt_coeff: impl Fn(&F::Elem) -> String) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let cs = fmt_coeff(c);
            let (neg, mag) = match cs.strip_prefix('-') {
                Some(rest) => (true, rest.to_string()),
                None => (false, cs),
            };
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono_str: Vec<String> = m
                .vars()
                .map(|v| {
                    let e = m.deg(v);
                    let name = table.display_name(v);
                    if e == 1 {
                        name
                    } else {
                        format!("{name}^{e}")
                    }
                })
                .collect();
            if mono_str.is_empty() {
                out.push_str(&mag);
            } else if mag == "1" {
                out.push_str(&mono_str.join("*"));
            } else {
                out.push_str(&mag);
                out.push('*');
                out.push_str(&mono_str.join("*"));
            }
        }
        out
    }
}

impl QPoly {
    /// Shorthand constant builder for rationals.
    pub fn from_int(n: i64) -> Self {
        Self::from_i64(QField, n)
    }

    pub fn display_q(&self, table: &VarTable) -> String {
        self.display(table, |c| {
            if c.is_integer() {
                c.numer().to_string()
            } else {
                format!("{}/{}", c.numer(), c.denom())
            }
        })
    }

    /// Clear denominators and divide by the integer content, preserving the
    /// sign of the leading coefficient. Keeps coefficient growth in check
    /// during resultant and gcd cascades.
    pub fn primitive_scalar(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut den_lcm = BigInt::one();
        for c in self.terms.values() {
            den_lcm = den_lcm.lcm(c.denom());
        }
        let mut num_gcd = BigInt::zero();
        for c in self.terms.values() {
            let n = c.numer() * &den_lcm / c.denom();
            num_gcd = num_gcd.gcd(&n);
        }
        if num_gcd.is_zero() {
            return self.clone();
        }
        if self.leading().map(|(_, c)| c.is_negative()).unwrap_or(false) {
            num_gcd = -num_gcd;
        }
        let factor = BigRational::new(den_lcm, num_gcd);
        self.scale(&factor)
    }

    /// Reduce into a prime field; errors if a denominator vanishes mod p.
    pub fn to_prime_field(&self, fp: &PrimeField) -> Result<FpPoly> {
        self.map_field(fp, |c| fp.from_rational(c))
    }
}

/// Differential derivative: each variable steps to its successor.
///
/// Callers must have grown the table first (see `ensure_lie_ready`);
/// parameters differentiate to zero.
pub fn lie_derivative<F: FieldCtx>(p: &MultiPoly<F>, table: &VarTable) -> Result<MultiPoly<F>> {
    let mut out = MultiPoly::zero(p.field().clone());
    let mut out_set = false;
    for v in p.support() {
        if table.kind(v) == crate::vartable::VarKind::Parameter {
            continue;
        }
        let succ = table.successor(v).ok_or_else(|| {
            Error::usage(format!("variable {} has no successor in the table", table.display_name(v)))
        })?;
        let term = p.derivative(v).mul(&MultiPoly::var(p.field().clone(), succ))?;
        out = if out_set { out.add(&term)? } else { term };
        out_set = true;
    }
    Ok(out.with_table(table))
}

/// Grow the table so that `lie_derivative(p, table)` will succeed.
pub fn ensure_lie_ready<F: FieldCtx>(p: &MultiPoly<F>, table: &mut VarTable) -> Result<()> {
    for v in p.support() {
        if table.kind(v) != crate::vartable::VarKind::Parameter {
            table.ensure_successor(v)?;
        }
    }
    Ok(())
}

/// Re-index a polynomial from one extension of a variable table into
/// another extension of the same base table, matching variables by base
/// index and derivative order and growing `to` where a derivative is
/// missing.
///
/// Two computations that branch from a shared model extend their table
/// clones independently, so the indices of high derivatives diverge even
/// though the clones report the same table id. Results from one branch
/// must come through here before they can be used alongside the other's.
pub fn rebase<F: FieldCtx>(
    p: &MultiPoly<F>,
    from: &VarTable,
    to: &mut VarTable,
) -> Result<MultiPoly<F>> {
    let mut map = BTreeMap::new();
    for v in p.support() {
        let base = from.base(v);
        if base >= to.len() || to.order(base) != 0 || from.base_name(v) != to.base_name(base) {
            return Err(Error::usage(
                "polynomial can only be rebased between extensions of one base table",
            ));
        }
        let mut w = base;
        for _ in 0..from.order(v) {
            w = to.ensure_successor(w)?;
        }
        map.insert(v, w);
    }
    Ok(p.remap_vars(|v| map.get(&v).copied().unwrap_or(v)).with_table(to))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vartable::VarKind;

    fn xy_table() -> (VarTable, usize, usize) {
        let mut t = VarTable::new();
        let x = t.add("x", VarKind::State).unwrap();
        let y = t.add("y", VarKind::State).unwrap();
        (t, x, y)
    }

    fn qp(table: &VarTable) -> QPoly {
        QPoly::zero(QField).with_table(table)
    }

    #[test]
    fn arithmetic_round_trip() {
        let (t, x, y) = xy_table();
        let px = QPoly::var(QField, x).with_table(&t);
        let py = QPoly::var(QField, y).with_table(&t);
        let s = px.add(&py).unwrap();
        let p = s.mul(&s).unwrap(); // (x+y)^2
        let expanded = px
            .mul(&px)
            .unwrap()
            .add(&px.mul(&py).unwrap().scale(&BigRational::from_integer(2.into())))
            .unwrap()
            .add(&py.mul(&py).unwrap())
            .unwrap();
        assert_eq!(p, expanded);
        assert_eq!(p.sub(&expanded).unwrap(), qp(&t));
    }

    #[test]
    fn exact_division() {
        let (t, x, y) = xy_table();
        let px = QPoly::var(QField, x).with_table(&t);
        let py = QPoly::var(QField, y).with_table(&t);
        let sum = px.add(&py).unwrap();
        let diff = px.sub(&py).unwrap();
        let prod = sum.mul(&diff).unwrap();
        assert_eq!(prod.exact_div(&sum).unwrap().unwrap(), diff);
        assert!(prod.exact_div(&px.add(&QPoly::from_int(1)).unwrap()).unwrap().is_none());
    }

    #[test]
    fn normalize_unit_divides_by_smallest_term() {
        // 2y'' + 2mu^2 y normalizes to y'' + mu^2 y: the smallest grevlex
        // term is y'' (degree 1 beats degree 3).
        let mut t = VarTable::new();
        let mu = t.add("mu", VarKind::Parameter).unwrap();
        let y = t.add("y", VarKind::Output).unwrap();
        let y1 = t.ensure_successor(y).unwrap();
        let y2 = t.ensure_successor(y1).unwrap();
        let mup = QPoly::var(QField, mu).with_table(&t);
        let yp = QPoly::var(QField, y).with_table(&t);
        let y2p = QPoly::var(QField, y2).with_table(&t);
        let two = BigRational::from_integer(2.into());
        let p = y2p.scale(&two).add(&mup.mul(&mup).unwrap().mul(&yp).unwrap().scale(&two)).unwrap();
        let n = p.normalize_unit();
        let expected = y2p.add(&mup.mul(&mup).unwrap().mul(&yp).unwrap()).unwrap();
        assert_eq!(n, expected);
        // Single-term case: -x normalizes to x.
        let mx = QPoly::var(QField, y).with_table(&t).neg();
        assert_eq!(mx.normalize_unit(), QPoly::var(QField, y).with_table(&t));
        // Idempotent.
        assert_eq!(n.normalize_unit(), n);
    }

    #[test]
    fn mixed_tables_rejected() {
        let (t1, x1, _) = xy_table();
        let (t2, x2, _) = xy_table();
        let a = QPoly::var(QField, x1).with_table(&t1);
        let b = QPoly::var(QField, x2).with_table(&t2);
        assert!(a.add(&b).is_err());
    }

    #[test]
    fn lie_derivative_of_product() {
        // (x*y)' = x'y + xy' with successors in the table.
        let (mut t, x, y) = xy_table();
        let xs = t.ensure_successor(x).unwrap();
        let ys = t.ensure_successor(y).unwrap();
        let px = QPoly::var(QField, x).with_table(&t);
        let py = QPoly::var(QField, y).with_table(&t);
        let pxs = QPoly::var(QField, xs).with_table(&t);
        let pys = QPoly::var(QField, ys).with_table(&t);
        let prod = px.mul(&py).unwrap();
        let lie = lie_derivative(&prod, &t).unwrap();
        let expected = pxs.mul(&py).unwrap().add(&px.mul(&pys).unwrap()).unwrap();
        assert_eq!(lie, expected);
    }

    #[test]
    fn lie_requires_successor() {
        let (t, x, _) = xy_table();
        let px = QPoly::var(QField, x).with_table(&t);
        assert!(lie_derivative(&px, &t).is_err());
    }

    #[test]
    fn display_ascending_grevlex() {
        let mut t = VarTable::new();
        let y = t.add("y", VarKind::Output).unwrap();
        let y1 = t.ensure_successor(y).unwrap();
        let py = QPoly::var(QField, y).with_table(&t);
        let py1 = QPoly::var(QField, y1).with_table(&t);
        let p = py1.sub(&py.scale(&BigRational::from_integer(2.into()))).unwrap();
        assert_eq!(p.display_q(&t), "y' - 2*y");
    }

    #[test]
    fn substitute_rational_clears_denominators() {
        // p = x^2 + 1 under x := y/z gives y^2 + z^2 after clearing z^2.
        let (t, x, y) = xy_table();
        let px = QPoly::var(QField, x).with_table(&t);
        let py = QPoly::var(QField, y).with_table(&t);
        let p = px.mul(&px).unwrap().add(&QPoly::from_int(1)).unwrap();
        let cleared = p.substitute_rational(x, &py, &px).unwrap();
        // Here den = x itself: x^2 * ((y/x)^2 + 1) = y^2 + x^2.
        let expected = py.mul(&py).unwrap().add(&px.mul(&px).unwrap()).unwrap();
        assert_eq!(cleared, expected);
    }

    #[test]
    fn primitive_scalar_clears_content() {
        let (t, x, y) = xy_table();
        let px = QPoly::var(QField, x).with_table(&t);
        let py = QPoly::var(QField, y).with_table(&t);
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let p = px.scale(&half).add(&py.scale(&BigRational::from_integer(3.into()))).unwrap();
        let prim = p.primitive_scalar();
        let expected = px.add(&py.scale(&BigRational::from_integer(6.into()))).unwrap();
        assert_eq!(prim, expected);
    }
}
