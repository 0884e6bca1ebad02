//! Multivariate gcd over the rationals.
//!
//! The workhorse is a subresultant pseudo-remainder sequence in a chosen
//! main variable, with contents handled recursively. Before paying for a
//! PRS we run a cheap sound filter: specialize every other variable at a
//! point modulo a fixed large prime and take a univariate gcd there. When
//! the leading coefficient survives the specialization, the modular gcd
//! degree bounds the true one from above, so degree zero proves the
//! primitive parts coprime. The filter can only say "coprime", never a
//! wrong factor.

use rand::Rng;

use super::univar::FpDense;
use super::{MultiPoly, QPoly};
use crate::coeff::{FieldCtx, PrimeField, QField};
use crate::error::Result;
use crate::rngutil;

/// Fixed specialization prime for the coprimality filter (Mersenne, 61 bits).
const FILTER_PRIME: u64 = (1u64 << 61) - 1;

/// Content of `p` with respect to `var`: the gcd of its coefficients.
pub fn content_wrt(p: &QPoly, var: usize) -> Result<QPoly> {
    let coeffs: Vec<QPoly> = p.coeffs_wrt(var).into_iter().map(|(_, c)| c).collect();
    gcd_list(&coeffs)
}

/// `p` divided by its content with respect to `var`.
pub fn primitive_part_wrt(p: &QPoly, var: usize) -> Result<QPoly> {
    let c = content_wrt(p, var)?;
    if c.is_constant() {
        return Ok(p.clone());
    }
    Ok(p.exact_div(&c)?.expect("content divides"))
}

/// Gcd of a list, folding pairwise. Empty list gives zero.
pub fn gcd_list(polys: &[QPoly]) -> Result<QPoly> {
    let mut acc: Option<QPoly> = None;
    for p in polys {
        acc = Some(match acc {
            None => p.normalize_unit(),
            Some(g) => gcd(&g, p)?,
        });
        if let Some(g) = &acc {
            if g.is_constant() && !g.is_zero() {
                return Ok(g.clone());
            }
        }
    }
    Ok(acc.unwrap_or_else(|| QPoly::zero(QField)))
}

/// Gcd of two polynomials, normalized so the smallest grevlex term has
/// coefficient one.
pub fn gcd(a: &QPoly, b: &QPoly) -> Result<QPoly> {
    if a.is_zero() {
        return Ok(b.normalize_unit());
    }
    if b.is_zero() {
        return Ok(a.normalize_unit());
    }
    // Split off the monomial content first; what remains is divisible by
    // no single variable, so the monomial parts contribute independently.
    let ma = a.terms.keys().cloned().reduce(|x, y| x.gcd(&y)).expect("nonzero");
    let mb = b.terms.keys().cloned().reduce(|x, y| x.gcd(&y)).expect("nonzero");
    let m = ma.gcd(&mb);
    let one_q = QField.one();
    let a = a
        .exact_div(&QPoly::monomial(QField, ma, one_q.clone()))?
        .expect("monomial content divides");
    let b = b
        .exact_div(&QPoly::monomial(QField, mb, one_q.clone()))?
        .expect("monomial content divides");
    let mono =
        QPoly::monomial(QField, m, one_q).with_table_id(a.table_id.max(b.table_id));

    if a.is_constant() || b.is_constant() {
        return Ok(mono.normalize_unit());
    }
    let common: Vec<usize> = {
        let sa = a.support();
        let sb = b.support();
        sa.into_iter().filter(|v| sb.contains(v)).collect()
    };
    if common.is_empty() {
        return Ok(mono.normalize_unit());
    }
    // Main variable: smallest worst-case degree keeps the PRS short.
    let v = *common
        .iter()
        .min_by_key(|&&v| a.deg(v).min(b.deg(v)))
        .expect("nonempty");

    let ca = content_wrt(&a, v)?;
    let cb = content_wrt(&b, v)?;
    let pa = if ca.is_constant() { a.clone() } else { a.exact_div(&ca)?.expect("content divides") };
    let pb = if cb.is_constant() { b.clone() } else { b.exact_div(&cb)?.expect("content divides") };
    let cc = gcd(&ca, &cb)?;

    if filter_says_coprime(&pa, &pb, v) {
        return mono.mul(&cc).map(|g| g.normalize_unit());
    }

    let tail = subresultant_prs(pa.clone(), pb.clone(), v);
    let g = if tail.deg(v) == 0 {
        // Coprime primitive parts; only the content survives.
        cc
    } else {
        let gp = primitive_part_wrt(&tail.primitive_scalar(), v)?;
        debug_assert!(gp.divides(&pa) && gp.divides(&pb), "PRS result must divide both inputs");
        gp.mul(&cc)?
    };
    mono.mul(&g).map(|g| g.normalize_unit())
}

/// Specialize all variables but `v` at a point modulo a fixed prime and
/// test the univariate gcd there. `true` is a proof of coprimality.
fn filter_says_coprime(a: &QPoly, b: &QPoly, v: usize) -> bool {
    let fp = match PrimeField::new(FILTER_PRIME) {
        Ok(f) => f,
        Err(_) => return false,
    };
    let (fa, fb) = match (a.to_prime_field(&fp), b.to_prime_field(&fp)) {
        (Ok(x), Ok(y)) => (x, y),
        _ => return false,
    };
    let nvars = a.support().iter().chain(b.support().iter()).copied().max().unwrap_or(0) + 1;
    // The point sequence is fixed; determinism matters more than entropy
    // here, and a failed attempt just falls through to the PRS.
    let mut rng = rngutil::stream(0x676364, "gcd-filter");
    for _ in 0..3 {
        let point: Vec<u64> = (0..nvars).map(|_| rng.gen_range(1..FILTER_PRIME)).collect();
        let da = match fa.eval_except(v, &point) {
            Ok(c) => c,
            Err(_) => return false,
        };
        let db = match fb.eval_except(v, &point) {
            Ok(c) => c,
            Err(_) => return false,
        };
        // The specialization must preserve at least one leading degree,
        // otherwise the modular gcd bound does not apply.
        let keeps_a = da.len() == a.deg(v) as usize + 1;
        let keeps_b = db.len() == b.deg(v) as usize + 1;
        if !(keeps_a || keeps_b) {
            continue;
        }
        let ga = FpDense::new(fp.modulus(), da);
        let gb = FpDense::new(fp.modulus(), db);
        match ga.gcd(&gb).degree() {
            Some(0) => return true,
            _ => continue,
        }
    }
    false
}

/// Last nonzero member of the subresultant remainder sequence of `a`, `b`
/// in the variable `v`. Inputs are assumed primitive with respect to `v`.
fn subresultant_prs(mut a: QPoly, mut b: QPoly, v: usize) -> QPoly {
    if a.deg(v) < b.deg(v) {
        std::mem::swap(&mut a, &mut b);
    }
    let one = QPoly::from_int(1);
    let mut g = one.clone();
    let mut h = one;
    loop {
        let d = a.deg(v) - b.deg(v);
        let r = pseudo_rem(&a, &b, v);
        if r.is_zero() {
            return b;
        }
        if r.deg(v) == 0 {
            return r;
        }
        a = b;
        let divisor = g.mul(&h.pow(d).expect("pow")).expect("mul");
        b = r.exact_div(&divisor).expect("div").expect("subresultant division is exact");
        g = a.lc_wrt(v);
        h = match d {
            0 => h,
            1 => g.clone(),
            _ => g
                .pow(d)
                .expect("pow")
                .exact_div(&h.pow(d - 1).expect("pow"))
                .expect("div")
                .expect("subresultant h update is exact"),
        };
    }
}

/// Pseudo-remainder: `lc(b)^(deg a - deg b + 1) * a mod b` in `v`.
fn pseudo_rem(a: &QPoly, b: &QPoly, v: usize) -> QPoly {
    let db = b.deg(v);
    let lb = b.lc_wrt(v);
    let mut r = a.clone();
    let mut pending = a.deg(v) as i64 - db as i64 + 1;
    while !r.is_zero() && r.deg(v) >= db {
        let dr = r.deg(v);
        let lr = r.lc_wrt(v);
        let shift = MultiPoly::monomial(QField, crate::mono::Mono::var_pow(v, dr - db), QField.one());
        r = lb
            .mul(&r)
            .expect("mul")
            .sub(&lr.mul(&shift).expect("mul").mul(b).expect("mul"))
            .expect("sub");
        pending -= 1;
    }
    let mut k = pending;
    while k > 0 {
        r = lb.mul(&r).expect("mul");
        k -= 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vartable::{VarKind, VarTable};

    fn vars3() -> (VarTable, QPoly, QPoly, QPoly) {
        let mut t = VarTable::new();
        let x = t.add("x", VarKind::State).unwrap();
        let y = t.add("y", VarKind::State).unwrap();
        let z = t.add("z", VarKind::State).unwrap();
        (
            t.clone(),
            QPoly::var(QField, x).with_table(&t),
            QPoly::var(QField, y).with_table(&t),
            QPoly::var(QField, z).with_table(&t),
        )
    }

    #[test]
    fn gcd_recovers_planted_factor() {
        let (_t, x, y, z) = vars3();
        // common = x + y*z + 2
        let common = x.add(&y.mul(&z).unwrap()).unwrap().add(&QPoly::from_int(2)).unwrap();
        let a = common.mul(&x.add(&QPoly::from_int(1)).unwrap()).unwrap();
        let b = common.mul(&y.sub(&z).unwrap()).unwrap();
        let g = gcd(&a, &b).unwrap();
        assert_eq!(g, common.normalize_unit());
    }

    #[test]
    fn gcd_of_coprime_is_constant() {
        let (_t, x, y, _z) = vars3();
        let a = x.mul(&x).unwrap().add(&QPoly::from_int(1)).unwrap();
        let b = y.add(&QPoly::from_int(3)).unwrap();
        let g = gcd(&a, &b).unwrap();
        assert!(g.is_constant() && !g.is_zero());
    }

    #[test]
    fn gcd_handles_monomial_content() {
        let (_t, x, y, _z) = vars3();
        let a = x.pow(3).unwrap().mul(&y).unwrap();
        let b = x.mul(&y.pow(2).unwrap()).unwrap();
        let g = gcd(&a, &b).unwrap();
        assert_eq!(g, x.mul(&y).unwrap());
    }

    #[test]
    fn gcd_with_multiplicity() {
        let (_t, x, y, _z) = vars3();
        let f = x.add(&y).unwrap();
        let a = f.pow(3).unwrap();
        let b = f.pow(2).unwrap().mul(&x.sub(&y).unwrap()).unwrap();
        let g = gcd(&a, &b).unwrap();
        assert_eq!(g, f.pow(2).unwrap().normalize_unit());
    }

    #[test]
    fn content_and_primitive_part() {
        let (_t, x, y, z) = vars3();
        // p = (y+z) * (x^2 + x) viewed in x: content y+z.
        let c = y.add(&z).unwrap();
        let p = c.mul(&x.pow(2).unwrap().add(&x).unwrap()).unwrap();
        let got = content_wrt(&p, 0).unwrap();
        assert_eq!(got, c.normalize_unit());
        let pp = primitive_part_wrt(&p, 0).unwrap();
        assert_eq!(gcd(&pp, &got).unwrap(), QPoly::from_int(1));
    }
}
