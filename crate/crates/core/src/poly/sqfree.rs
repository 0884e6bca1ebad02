//! Squarefree decomposition and aggressive factor splitting.
//!
//! Elimination works on pools of factors, and every stage gets cheaper
//! when the pool entries are smaller. `squarefree_factorization` is Yun's
//! method (characteristic zero) applied per variable with contents handled
//! recursively. `split_factors` goes further and keeps breaking factors
//! with whatever cheap structure it can find: monomial and per-variable
//! contents, true univariate factorization over the rationals, homogeneous
//! bivariate dehomogenization, and quadratic patterns whose discriminant
//! turns out to be a perfect square. The result is not guaranteed to be
//! irreducible, just never a product we know how to take apart.


use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::gcd::{content_wrt, gcd};
use super::univar::{dense_to_qpoly, factor_squarefree_q, qpoly_to_dense};
use super::QPoly;
use crate::coeff::{FieldCtx, QField};
use crate::error::Result;
use crate::mono::Mono;

#[derive(Clone, Debug)]
pub struct SqfreeFactor {
    pub factor: QPoly,
    pub multiplicity: u32,
}

/// Squarefree decomposition: pairwise coprime non-constant factors with
/// multiplicities whose product reproduces the input up to a rational
/// constant. Factors are unit-normalized.
pub fn squarefree_factorization(f: &QPoly) -> Result<Vec<SqfreeFactor>> {
    let mut out = Vec::new();
    if f.is_zero() || f.is_constant() {
        return Ok(out);
    }
    // Monomial content: each variable becomes its own factor.
    let common = f
        .terms()
        .map(|(m, _)| m.clone())
        .reduce(|a, b| a.gcd(&b))
        .expect("nonzero polynomial");
    let mut rest = f.clone();
    if !common.is_one() {
        rest = rest
            .exact_div(&QPoly::monomial(QField, common.clone(), QField.one()).with_table_id(f.table_id()))?
            .expect("monomial content divides");
        for v in common.vars() {
            out.push(SqfreeFactor {
                factor: QPoly::var(QField, v).with_table_id(f.table_id()),
                multiplicity: common.deg(v),
            });
        }
    }
    if rest.is_constant() {
        return Ok(out);
    }
    let v = *rest.support().first().expect("non-constant polynomial");
    let content = content_wrt(&rest, v)?;
    let pp = if content.is_constant() {
        rest.clone()
    } else {
        rest.exact_div(&content)?.expect("content divides")
    };
    out.extend(yun(&pp, v)?);
    if !content.is_constant() {
        out.extend(squarefree_factorization(&content)?);
    }
    Ok(out)
}

/// Yun's squarefree decomposition of a polynomial primitive in `v`.
fn yun(f: &QPoly, v: usize) -> Result<Vec<SqfreeFactor>> {
    let mut out = Vec::new();
    let fd = f.derivative(v);
    let g = gcd(f, &fd)?;
    if g.is_constant() {
        out.push(SqfreeFactor { factor: f.normalize_unit(), multiplicity: 1 });
        return Ok(out);
    }
    let mut w = f.exact_div(&g)?.expect("gcd divides");
    let y = fd.exact_div(&g)?.expect("gcd divides derivative");
    let mut z = y.sub(&w.derivative(v))?;
    let mut i = 1u32;
    while !w.is_constant() {
        let h = gcd(&w, &z)?;
        if !h.is_constant() {
            out.push(SqfreeFactor { factor: h.normalize_unit(), multiplicity: i });
        }
        w = w.exact_div(&h)?.expect("Yun division");
        let ynext = z.exact_div(&h)?.expect("Yun division");
        z = ynext.sub(&w.derivative(v))?;
        i += 1;
    }
    Ok(out)
}

/// Product of the distinct squarefree factors, unit-normalized.
pub fn squarefree_part(f: &QPoly) -> Result<QPoly> {
    let mut acc = QPoly::from_int(1).with_table_id(f.table_id());
    for sf in squarefree_factorization(f)? {
        acc = acc.mul(&sf.factor)?;
    }
    Ok(acc.normalize_unit())
}

/// Break a polynomial into as many (pairwise coprime, squarefree,
/// unit-normalized) pieces as the cheap structural splits can find.
/// Constants disappear; the product of the pieces has the same radical as
/// the input.
pub fn split_factors(f: &QPoly) -> Result<Vec<QPoly>> {
    let mut queue: Vec<QPoly> =
        squarefree_factorization(f)?.into_iter().map(|sf| sf.factor).collect();
    let mut done: Vec<QPoly> = Vec::new();
    while let Some(g) = queue.pop() {
        let g = g.normalize_unit();
        if g.is_constant() {
            continue;
        }
        if done.contains(&g) || queue.contains(&g) {
            continue;
        }
        match try_split(&g)? {
            Some(pieces) => queue.extend(pieces),
            None => done.push(g),
        }
    }
    Ok(done)
}

/// One round of splitting; `None` means no structure found.
fn try_split(g: &QPoly) -> Result<Option<Vec<QPoly>>> {
    // A lone linear term is already irreducible; without this early out the
    // monomial-content branch would hand the variable back unchanged and
    // the cascade in `split_factors` would never drain its queue.
    if g.num_terms() == 1 && g.total_degree() == 1 {
        return Ok(None);
    }
    // Monomial content.
    let common =
        g.terms().map(|(m, _)| m.clone()).reduce(|a, b| a.gcd(&b)).expect("nonzero");
    if !common.is_one() {
        let rest = g
            .exact_div(&QPoly::monomial(QField, common.clone(), QField.one()).with_table_id(g.table_id()))?
            .expect("monomial divides");
        let mut pieces: Vec<QPoly> = common
            .vars()
            .map(|v| QPoly::var(QField, v).with_table_id(g.table_id()))
            .collect();
        pieces.push(rest);
        return Ok(Some(pieces));
    }
    let support = g.support();
    // Per-variable content.
    for &v in &support {
        let c = content_wrt(g, v)?;
        if !c.is_constant() {
            let pp = g.exact_div(&c)?.expect("content divides");
            return Ok(Some(vec![c, pp]));
        }
    }
    // Univariate over the rationals.
    if support.len() == 1 {
        if let Some(dense) = qpoly_to_dense(g, support[0]) {
            let factors = factor_squarefree_q(&dense);
            if factors.len() > 1 {
                return Ok(Some(
                    factors
                        .iter()
                        .map(|c| dense_to_qpoly(c, support[0]).with_table_id(g.table_id()))
                        .collect(),
                ));
            }
            return Ok(None);
        }
    }
    // Homogeneous in exactly two variables: dehomogenize and factor.
    if support.len() == 2 {
        let d = g.total_degree();
        if g.terms().all(|(m, _)| m.total_degree() == d) && d >= 2 {
            let (a, b) = (support[0], support[1]);
            // g(a, 1) as a univariate in a.
            let one = QPoly::from_int(1);
            let deh = g.substitute(b, &one)?;
            if let Some(dense) = qpoly_to_dense(&deh, a) {
                let factors = factor_squarefree_q(&dense);
                if factors.len() > 1 {
                    let mut pieces = Vec::new();
                    for fc in &factors {
                        let fd = fc.len() as u32 - 1;
                        let poly = QPoly::from_terms(
                            QField,
                            fc.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| {
                                let m = Mono::var_pow(a, i as u32)
                                    .mul(&Mono::var_pow(b, fd - i as u32));
                                (m, c.clone())
                            }),
                        )
                        .with_table_id(g.table_id());
                        pieces.push(poly);
                    }
                    return Ok(Some(pieces));
                }
            }
        }
    }
    // Quadratic pattern A v^(2d) + B v^d + C with a perfect square
    // discriminant splits over the rationals of the remaining variables.
    for &v in &support {
        if let Some(pieces) = try_quadratic_split(g, v)? {
            return Ok(Some(pieces));
        }
    }
    Ok(None)
}

fn try_quadratic_split(g: &QPoly, v: usize) -> Result<Option<Vec<QPoly>>> {
    let deg = g.deg(v);
    if deg < 2 || !deg.is_multiple_of(2) {
        return Ok(None);
    }
    let d = deg / 2;
    let coeffs = g.coeffs_wrt(v);
    let mut a = None;
    let mut b = None;
    let mut c = None;
    for (e, p) in coeffs {
        match e {
            0 => c = Some(p),
            e if e == d => b = Some(p),
            e if e == deg => a = Some(p),
            _ => return Ok(None),
        }
    }
    let (a, c) = match (a, c) {
        (Some(a), Some(c)) => (a, c),
        _ => return Ok(None),
    };
    let zero = QPoly::zero(QField).with_table_id(g.table_id());
    let b = b.unwrap_or(zero);
    // Discriminant B^2 - 4AC must be a square in the remaining variables.
    let four = QPoly::from_int(4);
    let disc = b.mul(&b)?.sub(&a.mul(&c)?.mul(&four)?)?;
    let sigma = match poly_sqrt(&disc)? {
        Some(s) => s,
        None => return Ok(None),
    };
    // 4A g = (2A v^d + B - sigma)(2A v^d + B + sigma); gcd against g
    // isolates the genuine factor even when A shares content with them.
    let vd = QPoly::monomial(QField, Mono::var_pow(v, d), QField.one()).with_table_id(g.table_id());
    let two = QPoly::from_int(2);
    let base = a.mul(&two)?.mul(&vd)?.add(&b)?;
    for cand in [base.sub(&sigma)?, base.add(&sigma)?] {
        if cand.is_zero() || cand.is_constant() {
            continue;
        }
        let w = gcd(g, &cand)?;
        if !w.is_constant() && w.normalize_unit() != g.normalize_unit() {
            let rest = g.exact_div(&w)?.expect("gcd divides");
            return Ok(Some(vec![w, rest]));
        }
    }
    Ok(None)
}

/// Exact polynomial square root over the rationals, if one exists.
fn poly_sqrt(p: &QPoly) -> Result<Option<QPoly>> {
    if p.is_zero() {
        return Ok(Some(p.clone()));
    }
    if p.is_constant() {
        return Ok(rational_sqrt(&p.constant_term()).map(|r| {
            QPoly::constant(QField, r).with_table_id(p.table_id())
        }));
    }
    let facs = squarefree_factorization(p)?;
    let mut root = QPoly::from_int(1).with_table_id(p.table_id());
    for sf in &facs {
        if sf.multiplicity % 2 != 0 {
            return Ok(None);
        }
        root = root.mul(&sf.factor.pow(sf.multiplicity / 2)?)?;
    }
    // The decomposition is only up to a rational unit; recover it and
    // check that it is a square too.
    let square = root.mul(&root)?;
    let ratio = p.exact_div(&square)?;
    match ratio {
        Some(r) if r.is_constant() => match rational_sqrt(&r.constant_term()) {
            Some(s) => Ok(Some(root.scale(&s))),
            None => Ok(None),
        },
        _ => Ok(None),
    }
}

fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let sn = r.numer().sqrt();
    let sd = r.denom().sqrt();
    if &(&sn * &sn) == r.numer() && &(&sd * &sd) == r.denom() {
        Some(BigRational::new(sn, sd))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vartable::{VarKind, VarTable};

    fn setup() -> (VarTable, QPoly, QPoly, QPoly) {
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

    fn contains_factor(list: &[QPoly], f: &QPoly) -> bool {
        let n = f.normalize_unit();
        list.iter().any(|g| g.normalize_unit() == n)
    }

    #[test]
    fn yun_recovers_multiplicities() {
        let (_t, x, y, _z) = setup();
        let a = x.add(&y).unwrap();
        let b = x.sub(&QPoly::from_int(1)).unwrap();
        let f = a.pow(3).unwrap().mul(&b).unwrap();
        let facs = squarefree_factorization(&f).unwrap();
        assert_eq!(facs.len(), 2);
        let find = |mult| {
            facs.iter().find(|s| s.multiplicity == mult).map(|s| s.factor.clone()).unwrap()
        };
        assert_eq!(find(3), a.normalize_unit());
        assert_eq!(find(1), b.normalize_unit());
    }

    #[test]
    fn squarefree_part_strips_powers() {
        let (_t, x, y, _z) = setup();
        let f = x.pow(2).unwrap().mul(&y).unwrap().mul(&x.add(&y).unwrap().pow(2).unwrap()).unwrap();
        let part = squarefree_part(&f).unwrap();
        let expected = x.mul(&y).unwrap().mul(&x.add(&y).unwrap()).unwrap().normalize_unit();
        assert_eq!(part, expected);
    }

    #[test]
    fn split_pulls_contents_apart() {
        // (1 + x^2) * (2y - 1 - x^2) has a content split w.r.t. y.
        let (_t, x, y, _z) = setup();
        let c = QPoly::from_int(1).add(&x.pow(2).unwrap()).unwrap();
        let rest = y
            .scale(&BigRational::from_integer(2.into()))
            .sub(&QPoly::from_int(1))
            .unwrap()
            .sub(&x.pow(2).unwrap())
            .unwrap();
        let f = c.mul(&rest).unwrap();
        let pieces = split_factors(&f).unwrap();
        assert_eq!(pieces.len(), 2);
        assert!(contains_factor(&pieces, &c));
        assert!(contains_factor(&pieces, &rest));
    }

    #[test]
    fn split_factors_univariate() {
        let (_t, x, _y, _z) = setup();
        // x^4 - 1 over Q.
        let f = x.pow(4).unwrap().sub(&QPoly::from_int(1)).unwrap();
        let pieces = split_factors(&f).unwrap();
        assert_eq!(pieces.len(), 3);
        assert!(contains_factor(&pieces, &x.sub(&QPoly::from_int(1)).unwrap()));
        assert!(contains_factor(&pieces, &x.add(&QPoly::from_int(1)).unwrap()));
        assert!(contains_factor(&pieces, &x.pow(2).unwrap().add(&QPoly::from_int(1)).unwrap()));
    }

    #[test]
    fn split_homogeneous_bivariate() {
        let (_t, x, y, _z) = setup();
        // x^2 - y^2 is homogeneous; splits into x - y and x + y.
        let f = x.pow(2).unwrap().sub(&y.pow(2).unwrap()).unwrap();
        let pieces = split_factors(&f).unwrap();
        assert_eq!(pieces.len(), 2);
        assert!(contains_factor(&pieces, &x.sub(&y).unwrap()));
        assert!(contains_factor(&pieces, &x.add(&y).unwrap()));
    }

    #[test]
    fn split_quadratic_with_square_discriminant() {
        // (y^2 x^2 - 1)(x^2 - 1) = y^2 x^4 - (y^2 + 1) x^2 + 1; the outer
        // discriminant (y^2 - 1)^2 is a perfect square, and the cascade
        // then finishes each half off.
        let (_t, x, y, _z) = setup();
        let f1 = y.pow(2).unwrap().mul(&x.pow(2).unwrap()).unwrap().sub(&QPoly::from_int(1)).unwrap();
        let f2 = x.pow(2).unwrap().sub(&QPoly::from_int(1)).unwrap();
        let f = f1.mul(&f2).unwrap();
        let pieces = split_factors(&f).unwrap();
        assert_eq!(pieces.len(), 4, "pieces: {pieces:?}");
        let xy = x.mul(&y).unwrap();
        assert!(contains_factor(&pieces, &x.sub(&QPoly::from_int(1)).unwrap()));
        assert!(contains_factor(&pieces, &x.add(&QPoly::from_int(1)).unwrap()));
        assert!(contains_factor(&pieces, &xy.sub(&QPoly::from_int(1)).unwrap()));
        assert!(contains_factor(&pieces, &xy.add(&QPoly::from_int(1)).unwrap()));
    }

    #[test]
    fn split_keeps_irreducible_whole() {
        let (_t, x, y, _z) = setup();
        // x^2 + y^2 + 1 has no rational split.
        let f = x.pow(2).unwrap().add(&y.pow(2).unwrap()).unwrap().add(&QPoly::from_int(1)).unwrap();
        let pieces = split_factors(&f).unwrap();
        assert_eq!(pieces.len(), 1);
        assert_eq!(pieces[0], f.normalize_unit());
    }

    #[test]
    fn monomial_content_multiplicities() {
        let (_t, x, y, _z) = setup();
        let f = x.pow(3).unwrap().mul(&y).unwrap().mul(&x.add(&y).unwrap()).unwrap();
        let facs = squarefree_factorization(&f).unwrap();
        let x_entry = facs.iter().find(|s| s.factor == x.normalize_unit()).unwrap();
        assert_eq!(x_entry.multiplicity, 3);
        let y_entry = facs.iter().find(|s| s.factor == y.normalize_unit()).unwrap();
        assert_eq!(y_entry.multiplicity, 1);
    }
}
