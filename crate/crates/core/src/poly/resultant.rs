//! Resultants via the Sylvester matrix and fraction-free elimination.
//!
//! The determinant is computed with Bareiss two-step elimination, which
//! stays in the polynomial ring (every division is exact). Before
//! eliminating we pull the gcd out of each row and then each column; those
//! cofactors multiply the determinant and come back to the caller
//! separately, because downstream consumers want the resultant as a pile
//! of factors rather than one expanded polynomial.

use super::gcd::gcd_list;
use super::QPoly;
use crate::coeff::QField;
use crate::error::{Error, Result};

/// Sylvester matrix of `f` and `g` with respect to `v`. Both must have
/// positive degree in `v`.
pub fn sylvester_matrix(f: &QPoly, g: &QPoly, v: usize) -> Result<Vec<Vec<QPoly>>> {
    let m = f.deg(v) as usize;
    let n = g.deg(v) as usize;
    if m == 0 || n == 0 {
        return Err(Error::usage("Sylvester matrix needs positive degrees in the variable"));
    }
    let zero = || QPoly::zero(QField).with_table_id(f.table_id().max(g.table_id()));
    let mut fc = vec![zero(); m + 1];
    for (e, c) in f.coeffs_wrt(v) {
        fc[e as usize] = c;
    }
    let mut gc = vec![zero(); n + 1];
    for (e, c) in g.coeffs_wrt(v) {
        gc[e as usize] = c;
    }
    let size = m + n;
    let mut mat = vec![vec![zero(); size]; size];
    for row in 0..n {
        for (k, c) in fc.iter().enumerate() {
            // coefficient of v^(m-k) sits at column row + k when listing
            // from the leading coefficient down.
            mat[row][row + m - k] = c.clone();
        }
    }
    for row in 0..m {
        for (k, c) in gc.iter().enumerate() {
            mat[n + row][row + n - k] = c.clone();
        }
    }
    Ok(mat)
}

/// Determinant of a square polynomial matrix, fraction-free.
pub fn bareiss_determinant(mut mat: Vec<Vec<QPoly>>) -> Result<QPoly> {
    let n = mat.len();
    if n == 0 {
        return Ok(QPoly::from_int(1));
    }
    let mut sign = false;
    let mut prev = QPoly::from_int(1);
    for k in 0..n - 1 {
        if mat[k][k].is_zero() {
            let swap = (k + 1..n).find(|&r| !mat[r][k].is_zero());
            match swap {
                Some(r) => {
                    mat.swap(k, r);
                    sign = !sign;
                }
                None => return Ok(QPoly::zero(QField)),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t1 = mat[k][k].mul(&mat[i][j])?;
                let t2 = mat[i][k].mul(&mat[k][j])?;
                let num = t1.sub(&t2)?;
                mat[i][j] = num
                    .exact_div(&prev)?
                    .ok_or_else(|| Error::internal("fraction-free elimination division failed"))?;
            }
            mat[i][k] = QPoly::zero(QField);
        }
        prev = mat[k][k].clone();
    }
    let det = mat[n - 1][n - 1].clone();
    Ok(if sign { det.neg() } else { det })
}

/// Divide each row, then each column, by the gcd of its entries. Returns
/// the extracted factors; the determinant of the reduced matrix times the
/// product of these factors is the original determinant.
fn extract_line_gcds(mat: &mut [Vec<QPoly>]) -> Result<Vec<QPoly>> {
    let n = mat.len();
    let mut out = Vec::new();
    for row in mat.iter_mut() {
        let g = gcd_list(row)?;
        if !g.is_constant() && !g.is_zero() {
            for e in row.iter_mut() {
                if !e.is_zero() {
                    *e = e.exact_div(&g)?.expect("row gcd divides");
                }
            }
            out.push(g);
        }
    }
    for j in 0..n {
        let col: Vec<QPoly> = mat.iter().map(|r| r[j].clone()).collect();
        let g = gcd_list(&col)?;
        if !g.is_constant() && !g.is_zero() {
            for row in mat.iter_mut() {
                if !row[j].is_zero() {
                    row[j] = row[j].exact_div(&g)?.expect("column gcd divides");
                }
            }
            out.push(g);
        }
    }
    Ok(out)
}

/// Resultant split into a reduced determinant and extracted line factors;
/// the product of all parts is exactly `resultant(f, g, v)`.
pub fn resultant_factored(f: &QPoly, g: &QPoly, v: usize) -> Result<(QPoly, Vec<QPoly>)> {
    let m = f.deg(v);
    let n = g.deg(v);
    if f.is_zero() || g.is_zero() {
        return Ok((QPoly::zero(QField), vec![]));
    }
    if m == 0 {
        return Ok((f.pow(n)?, vec![]));
    }
    if n == 0 {
        return Ok((g.pow(m)?, vec![]));
    }
    let mut mat = sylvester_matrix(f, g, v)?;
    let extracted = extract_line_gcds(&mut mat)?;
    let det = bareiss_determinant(mat)?;
    Ok((det, extracted))
}

/// The resultant of `f` and `g` with respect to `v`, sign included.
pub fn resultant(f: &QPoly, g: &QPoly, v: usize) -> Result<QPoly> {
    let (core, extracted) = resultant_factored(f, g, v)?;
    let mut acc = core;
    for e in &extracted {
        acc = acc.mul(e)?;
    }
    Ok(acc)
}

/// Discriminant with respect to `v`: the resultant with the derivative,
/// divided by the leading coefficient, with the classical sign.
pub fn discriminant(f: &QPoly, v: usize) -> Result<QPoly> {
    let m = f.deg(v);
    if m == 0 {
        return Err(Error::usage("discriminant of a constant in the variable"));
    }
    let res = resultant(f, &f.derivative(v), v)?;
    let lc = f.lc_wrt(v);
    let q = res
        .exact_div(&lc)?
        .ok_or_else(|| Error::internal("leading coefficient must divide the resultant"))?;
    // (-1)^(m(m-1)/2)
    if (m as u64 * (m as u64 - 1) / 2) % 2 == 1 {
        Ok(q.neg())
    } else {
        Ok(q)
    }
}
