//! Dense univariate polynomial arithmetic and factorization.
//!
//! Two layers live here. `FpDense` is classic dense arithmetic over a word
//! sized prime field, with distinct-degree and equal-degree splitting for
//! factoring squarefree polynomials mod p. On top of that sits rational
//! factorization in the Zassenhaus style: reduce mod a good small prime,
//! factor there, Hensel lift the factors to a modulus past the Mignotte
//! bound, and recombine subsets until the integer factors emerge.
//!
//! Degrees in this codebase stay modest (characteristic polynomials and
//! content polynomials of elimination intermediates), so subset
//! recombination is not the bottleneck it can be in the large.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha20Rng;

use super::QPoly;
use crate::coeff::QField;
use crate::error::{Error, Result};
use crate::mono::Mono;
use crate::rngutil;

/// Dense univariate polynomial over F_p, lowest coefficient first, no
/// trailing zeros (the zero polynomial has an empty vector).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FpDense {
    p: u64,
    c: Vec<u64>,
}

impl FpDense {
    pub fn new(p: u64, mut coeffs: Vec<u64>) -> Self {
        for x in coeffs.iter_mut() {
            *x %= p;
        }
        let mut f = FpDense { p, c: coeffs };
        f.trim();
        f
    }

    pub fn zero(p: u64) -> Self {
        FpDense { p, c: vec![] }
    }

    pub fn constant(p: u64, a: u64) -> Self {
        Self::new(p, vec![a])
    }

    pub fn x(p: u64) -> Self {
        Self::new(p, vec![0, 1])
    }

    fn trim(&mut self) {
        while self.c.last() == Some(&0) {
            self.c.pop();
        }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn lc(&self) -> u64 {
        *self.c.last().unwrap_or(&0)
    }

    fn addm(&self, a: u64, b: u64) -> u64 {
        let s = a + b; // p < 2^62 keeps this from overflowing
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    fn subm(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    fn mulm(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }

    fn invm(&self, a: u64) -> u64 {
        // Fermat, p prime.
        let mut acc = 1u64;
        let mut b = a % self.p;
        let mut e = self.p - 2;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mulm(acc, b);
            }
            b = self.mulm(b, b);
            e >>= 1;
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p);
        let n = self.c.len().max(other.c.len());
        let mut c = vec![0u64; n];
        for (i, v) in c.iter_mut().enumerate() {
            let a = self.c.get(i).copied().unwrap_or(0);
            let b = other.c.get(i).copied().unwrap_or(0);
            *v = self.addm(a, b);
        }
        let mut f = FpDense { p: self.p, c };
        f.trim();
        f
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p);
        let n = self.c.len().max(other.c.len());
        let mut c = vec![0u64; n];
        for (i, v) in c.iter_mut().enumerate() {
            let a = self.c.get(i).copied().unwrap_or(0);
            let b = other.c.get(i).copied().unwrap_or(0);
            *v = self.subm(a, b);
        }
        let mut f = FpDense { p: self.p, c };
        f.trim();
        f
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p);
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.p);
        }
        let mut c = vec![0u64; self.c.len() + other.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.c.iter().enumerate() {
                c[i + j] = self.addm(c[i + j], self.mulm(a, b));
            }
        }
        let mut f = FpDense { p: self.p, c };
        f.trim();
        f
    }

    pub fn mul_scalar(&self, s: u64) -> Self {
        let c = self.c.iter().map(|&a| self.mulm(a, s)).collect();
        let mut f = FpDense { p: self.p, c };
        f.trim();
        f
    }

    pub fn make_monic(&self) -> Self {
        match self.degree() {
            None => self.clone(),
            Some(_) => self.mul_scalar(self.invm(self.lc())),
        }
    }

    /// Division with remainder; the divisor must be nonzero.
    pub fn divmod(&self, div: &Self) -> (Self, Self) {
        assert!(!div.is_zero(), "division by zero polynomial");
        let dd = div.degree().unwrap();
        if self.degree().is_none_or(|d| d < dd) {
            return (Self::zero(self.p), self.clone());
        }
        let lcinv = self.invm(div.lc());
        let mut rem = self.c.clone();
        let dq = rem.len() - 1 - dd;
        let mut quo = vec![0u64; dq + 1];
        for k in (0..=dq).rev() {
            let coef = self.mulm(rem[k + dd], lcinv);
            quo[k] = coef;
            if coef != 0 {
                for (i, &dc) in div.c.iter().enumerate() {
                    rem[k + i] = self.subm(rem[k + i], self.mulm(coef, dc));
                }
            }
        }
        rem.truncate(dd);
        let mut r = FpDense { p: self.p, c: rem };
        r.trim();
        let mut q = FpDense { p: self.p, c: quo };
        q.trim();
        (q, r)
    }

    pub fn rem(&self, div: &Self) -> Self {
        self.divmod(div).1
    }

    /// Monic gcd via Euclid.
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.make_monic()
    }

    /// Extended Euclid: returns `(g, s, t)` with `s*self + t*other = g`,
    /// `g` monic.
    pub fn extended_gcd(&self, other: &Self) -> (Self, Self, Self) {
        let (mut r0, mut r1) = (self.clone(), other.clone());
        let (mut s0, mut s1) = (Self::constant(self.p, 1), Self::zero(self.p));
        let (mut t0, mut t1) = (Self::zero(self.p), Self::constant(self.p, 1));
        while !r1.is_zero() {
            let (q, r) = r0.divmod(&r1);
            r0 = r1;
            r1 = r;
            let ns = s0.sub(&q.mul(&s1));
            s0 = s1;
            s1 = ns;
            let nt = t0.sub(&q.mul(&t1));
            t0 = t1;
            t1 = nt;
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let inv = self.invm(r0.lc());
        (r0.mul_scalar(inv), s0.mul_scalar(inv), t0.mul_scalar(inv))
    }

    pub fn derivative(&self) -> Self {
        if self.c.len() <= 1 {
            return Self::zero(self.p);
        }
        let c = self
            .c
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &a)| self.mulm(a, (i as u64) % self.p))
            .collect();
        let mut f = FpDense { p: self.p, c };
        f.trim();
        f
    }

    pub fn is_squarefree(&self) -> bool {
        match self.degree() {
            None | Some(0) => true,
            _ => self.gcd(&self.derivative()).degree() == Some(0),
        }
    }

    /// `self^e mod modulus`, with a big-integer exponent.
    pub fn pow_mod(&self, e: &BigUint, modulus: &Self) -> Self {
        let mut acc = Self::constant(self.p, 1);
        let mut base = self.rem(modulus);
        let bits = e.bits();
        for i in 0..bits {
            if e.bit(i) {
                acc = acc.mul(&base).rem(modulus);
            }
            if i + 1 < bits {
                base = base.mul(&base).rem(modulus);
            }
        }
        acc
    }

    pub fn eval(&self, x: u64) -> u64 {
        let mut acc = 0u64;
        for &a in self.c.iter().rev() {
            acc = self.addm(self.mulm(acc, x), a);
        }
        acc
    }

    /// Irreducible factors of a monic squarefree polynomial, in no
    /// particular order. Distinct-degree splitting first, then equal-degree
    /// splitting per block.
    pub fn factor_squarefree_monic(&self, rng: &mut ChaCha20Rng) -> Vec<Self> {
        let mut out = Vec::new();
        let mut f = self.clone();
        if f.degree().is_none_or(|d| d == 0) {
            return out;
        }
        let x = Self::x(self.p);
        let mut h = x.clone();
        let p_big = BigUint::from(self.p);
        let mut d = 0usize;
        while f.degree().unwrap() >= 2 * (d + 1) {
            d += 1;
            h = h.pow_mod(&p_big, &f);
            let g = h.sub(&x).gcd(&f);
            if g.degree().is_some_and(|dg| dg > 0) {
                out.extend(equal_degree_split(&g, d, rng));
                let (q, r) = f.divmod(&g);
                debug_assert!(r.is_zero());
                f = q;
                h = h.rem(&f);
            }
        }
        if f.degree().unwrap_or(0) >= 1 {
            out.push(f.make_monic());
        }
        out
    }
}

/// Split a product of irreducible factors all of degree `d` (Cantor and
/// Zassenhaus probabilistic splitting, odd characteristic).
fn equal_degree_split(g: &FpDense, d: usize, rng: &mut ChaCha20Rng) -> Vec<FpDense> {
    let deg = g.degree().unwrap();
    if deg == d {
        return vec![g.make_monic()];
    }
    let p = g.modulus();
    debug_assert!(p % 2 == 1, "equal-degree splitting needs odd characteristic");
    let exp = (BigUint::from(p).pow(d as u32) - BigUint::one()) / BigUint::from(2u32);
    loop {
        let a = FpDense::new(p, (0..deg).map(|_| rng.gen_range(0..p)).collect());
        if a.degree().is_none_or(|da| da == 0) {
            continue;
        }
        let g1 = a.gcd(g);
        if g1.degree().is_some_and(|dg| dg > 0 && dg < deg) {
            let (rest, r) = g.divmod(&g1);
            debug_assert!(r.is_zero());
            let mut out = equal_degree_split(&g1, d, rng);
            out.extend(equal_degree_split(&rest, d, rng));
            return out;
        }
        let b = a.pow_mod(&exp, g);
        let g2 = b.sub(&FpDense::constant(p, 1)).gcd(g);
        if g2.degree().is_some_and(|dg| dg > 0 && dg < deg) {
            let (rest, r) = g.divmod(&g2);
            debug_assert!(r.is_zero());
            let mut out = equal_degree_split(&g2, d, rng);
            out.extend(equal_degree_split(&rest, d, rng));
            return out;
        }
    }
}

// ---------------------------------------------------------------------------
// Integer polynomials modulo a big power of a prime (for Hensel lifting).

type ZPoly = Vec<BigInt>;

fn z_trim(v: &mut ZPoly) {
    while v.last().is_some_and(Zero::is_zero) {
        v.pop();
    }
}

fn z_deg(v: &ZPoly) -> Option<usize> {
    v.len().checked_sub(1)
}

fn zm_reduce(v: &ZPoly, m: &BigInt) -> ZPoly {
    let mut out: ZPoly = v.iter().map(|c| c.mod_floor(m)).collect();
    z_trim(&mut out);
    out
}

fn zm_add(a: &ZPoly, b: &ZPoly, m: &BigInt) -> ZPoly {
    let n = a.len().max(b.len());
    let zero = BigInt::zero();
    let mut out: ZPoly = (0..n)
        .map(|i| (a.get(i).unwrap_or(&zero) + b.get(i).unwrap_or(&zero)).mod_floor(m))
        .collect();
    z_trim(&mut out);
    out
}

fn zm_sub(a: &ZPoly, b: &ZPoly, m: &BigInt) -> ZPoly {
    let n = a.len().max(b.len());
    let zero = BigInt::zero();
    let mut out: ZPoly = (0..n)
        .map(|i| (a.get(i).unwrap_or(&zero) - b.get(i).unwrap_or(&zero)).mod_floor(m))
        .collect();
    z_trim(&mut out);
    out
}

fn zm_mul(a: &ZPoly, b: &ZPoly, m: &BigInt) -> ZPoly {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    for c in out.iter_mut() {
        *c = c.mod_floor(m);
    }
    z_trim(&mut out);
    out
}

/// Division with remainder by a monic divisor, coefficients mod `m`.
fn zm_divmod_monic(a: &ZPoly, h: &ZPoly, m: &BigInt) -> (ZPoly, ZPoly) {
    let dh = z_deg(h).expect("monic divisor is nonzero");
    debug_assert!(h[dh].is_one(), "divisor must be monic");
    if z_deg(a).is_none_or(|da| da < dh) {
        return (vec![], a.clone());
    }
    let mut rem = a.clone();
    let dq = rem.len() - 1 - dh;
    let mut quo = vec![BigInt::zero(); dq + 1];
    for k in (0..=dq).rev() {
        let coef = rem[k + dh].mod_floor(m);
        if !coef.is_zero() {
            for (i, hc) in h.iter().enumerate() {
                let v = (&rem[k + i] - &coef * hc).mod_floor(m);
                rem[k + i] = v;
            }
        }
        quo[k] = coef;
    }
    rem.truncate(dh);
    for c in rem.iter_mut() {
        *c = c.mod_floor(m);
    }
    z_trim(&mut rem);
    z_trim(&mut quo);
    (quo, rem)
}

/// Map residues into the symmetric range `(-m/2, m/2]`.
fn zm_symmetric(a: &ZPoly, m: &BigInt) -> ZPoly {
    let half = m / 2;
    let mut out: ZPoly = a
        .iter()
        .map(|c| {
            let r = c.mod_floor(m);
            if r > half {
                r - m
            } else {
                r
            }
        })
        .collect();
    z_trim(&mut out);
    out
}

fn fp_to_zpoly(f: &FpDense) -> ZPoly {
    f.coeffs().iter().map(|&c| BigInt::from(c)).collect()
}

/// One quadratic Hensel step: from factorization and Bezout data mod `m`
/// to the same data mod `m^2`. `h` must be monic; all inputs reduced mod
/// `m`, outputs reduced mod `m^2`.
#[allow(clippy::too_many_arguments)]
fn hensel_step(
    m: &BigInt,
    f: &ZPoly,
    g: &ZPoly,
    h: &ZPoly,
    s: &ZPoly,
    t: &ZPoly,
) -> (ZPoly, ZPoly, ZPoly, ZPoly) {
    let m2 = m * m;
    let e = zm_sub(&zm_reduce(f, &m2), &zm_mul(g, h, &m2), &m2);
    let (q, r) = zm_divmod_monic(&zm_mul(s, &e, &m2), h, &m2);
    let g1 = zm_add(&zm_add(g, &zm_mul(t, &e, &m2), &m2), &zm_mul(&q, g, &m2), &m2);
    let h1 = zm_add(h, &r, &m2);
    let one = vec![BigInt::one()];
    let b = zm_sub(
        &zm_add(&zm_mul(s, &g1, &m2), &zm_mul(t, &h1, &m2), &m2),
        &one,
        &m2,
    );
    let (c, d) = zm_divmod_monic(&zm_mul(s, &b, &m2), &h1, &m2);
    let s1 = zm_sub(s, &d, &m2);
    let t1 = zm_sub(&zm_sub(t, &zm_mul(t, &b, &m2), &m2), &zm_mul(&c, &g1, &m2), &m2);
    (g1, h1, s1, t1)
}

/// Lift the factorization `f = prod(factors) mod p` (all monic) to mod
/// `target_modulus` (which must be a 2-power tower over p), returning the
/// lifted factors with coefficients in `[0, target)`.
fn hensel_lift_tree(p: u64, f: &ZPoly, factors: &[FpDense], target: &BigInt) -> Vec<ZPoly> {
    if factors.len() == 1 {
        return vec![zm_reduce(f, target)];
    }
    let (left, right) = factors.split_at(factors.len() / 2);
    let g0 = left.iter().fold(FpDense::constant(p, 1), |acc, x| acc.mul(x));
    let h0 = right.iter().fold(FpDense::constant(p, 1), |acc, x| acc.mul(x));
    let (gg, s0, t0) = g0.extended_gcd(&h0);
    debug_assert_eq!(gg.degree(), Some(0), "factor halves must be coprime");

    let mut m = BigInt::from(p);
    let mut g = fp_to_zpoly(&g0);
    let mut h = fp_to_zpoly(&h0);
    let mut s = fp_to_zpoly(&s0);
    let mut t = fp_to_zpoly(&t0);
    while &m < target {
        let (g1, h1, s1, t1) = hensel_step(&m, f, &g, &h, &s, &t);
        g = g1;
        h = h1;
        s = s1;
        t = t1;
        m = &m * &m;
    }
    let mut out = hensel_lift_tree(p, &g, left, target);
    out.extend(hensel_lift_tree(p, &h, right, target));
    out
}

// ---------------------------------------------------------------------------
// Factorization over the integers and rationals.

/// One-norm of an integer polynomial.
fn z_norm1(f: &ZPoly) -> BigInt {
    f.iter().map(|c| c.abs()).sum()
}

fn z_divmod_monic_exact(f: &ZPoly, g: &ZPoly) -> Option<ZPoly> {
    let dg = z_deg(g)?;
    if !g[dg].is_one() {
        return None;
    }
    let df = z_deg(f)?;
    if df < dg {
        return None;
    }
    let mut rem = f.clone();
    let dq = df - dg;
    let mut quo = vec![BigInt::zero(); dq + 1];
    for k in (0..=dq).rev() {
        let coef = rem[k + dg].clone();
        if !coef.is_zero() {
            for (i, gc) in g.iter().enumerate() {
                let v = &rem[k + i] - &coef * gc;
                rem[k + i] = v;
            }
        }
        quo[k] = coef;
    }
    rem.truncate(dg);
    z_trim(&mut rem);
    if rem.is_empty() {
        Some(quo)
    } else {
        None
    }
}

/// Factor a monic squarefree integer polynomial into monic irreducible
/// integer factors.
fn zassenhaus_monic(f: &ZPoly) -> Vec<ZPoly> {
    let n = match z_deg(f) {
        None | Some(0) => return vec![],
        Some(1) => return vec![f.clone()],
        Some(n) => n,
    };
    debug_assert!(f[n].is_one());

    // Factor coefficient bound: 2^n times the one-norm covers the Mignotte
    // bound for monic factors; the lift must pass twice that so symmetric
    // residues identify integer coefficients uniquely.
    let bound: BigInt = (BigInt::one() << n) * z_norm1(f);
    let target: BigInt = (&bound << 1) + 1;

    // Pick a prime with a squarefree reduction, preferring one that splits
    // into few factors to keep recombination small.
    let mut rng = rngutil::stream(0x5a_41_53, "zassenhaus");
    let mut best: Option<(u64, Vec<FpDense>)> = None;
    let mut tried = 0u32;
    let mut p = 1u64;
    while tried < 4 {
        p += 2;
        assert!(p < 100_000, "no squarefree reduction found; input was not squarefree");
        if !rngutil::is_prime_u64(p) {
            continue;
        }
        let fp = FpDense::new(p, f.iter().map(|c| c.mod_floor(&BigInt::from(p)).try_into().unwrap()).collect());
        if fp.degree() != Some(n) || !fp.is_squarefree() {
            continue;
        }
        tried += 1;
        let facs = fp.make_monic().factor_squarefree_monic(&mut rng);
        if best.as_ref().is_none_or(|(_, b)| facs.len() < b.len()) {
            best = Some((p, facs));
        }
        if best.as_ref().is_some_and(|(_, b)| b.len() == 1) {
            break;
        }
    }
    let (p, modular) = best.expect("a squarefree prime always exists for a squarefree poly");
    if modular.len() == 1 {
        return vec![f.clone()];
    }

    // Round the modulus up to a 2-power tower over p.
    let mut big_m = BigInt::from(p);
    while big_m < target {
        big_m = &big_m * &big_m;
    }
    let mut pool = hensel_lift_tree(p, &zm_reduce(f, &big_m), &modular, &big_m);

    let mut out = Vec::new();
    let mut rem_f = f.clone();
    let mut k = 1usize;
    while 2 * k <= pool.len() {
        let mut found: Option<(ZPoly, Vec<usize>)> = None;
        let mut idx: Vec<usize> = (0..k).collect();
        'subsets: loop {
            let prod = idx
                .iter()
                .fold(vec![BigInt::one()], |acc, &i| zm_mul(&acc, &pool[i], &big_m));
            let cand = zm_symmetric(&prod, &big_m);
            if z_norm1(&cand) <= bound {
                if let Some(q) = z_divmod_monic_exact(&rem_f, &cand) {
                    found = Some((cand, idx.clone()));
                    rem_f = q;
                    break 'subsets;
                }
            }
            // Advance to the next k-subset of 0..pool.len().
            let npool = pool.len();
            let mut i = k;
            loop {
                if i == 0 {
                    break 'subsets;
                }
                i -= 1;
                if idx[i] != i + npool - k {
                    idx[i] += 1;
                    for j in i + 1..k {
                        idx[j] = idx[j - 1] + 1;
                    }
                    break;
                }
            }
        }
        match found {
            Some((cand, used)) => {
                out.push(cand);
                for &i in used.iter().rev() {
                    pool.remove(i);
                }
            }
            None => k += 1,
        }
    }
    if z_deg(&rem_f).unwrap_or(0) >= 1 {
        out.push(rem_f);
    }
    out
}

/// Factor a squarefree integer polynomial (any leading coefficient) into
/// primitive irreducible integer factors with positive leading
/// coefficients. The product of the factors equals the input up to a
/// rational constant.
pub fn factor_squarefree_z(f: &[BigInt]) -> Vec<Vec<BigInt>> {
    let mut f = f.to_vec();
    z_trim(&mut f);
    let n = match z_deg(&f) {
        None | Some(0) => return vec![],
        Some(n) => n,
    };
    // Primitive part.
    let content = f.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    if !content.is_one() {
        for c in f.iter_mut() {
            *c /= &content;
        }
    }
    let lc = f[n].clone();
    if lc.is_one() {
        return zassenhaus_monic(&f);
    }
    // Monic transform: g(y) = lc^(n-1) f(y / lc) is monic with integer
    // coefficients; factors map back through y = lc x.
    let mut g = vec![BigInt::zero(); n + 1];
    g[n] = BigInt::one();
    let mut pow = BigInt::one(); // lc^(n-1-i) for the current i
    for i in (0..n).rev() {
        g[i] = &f[i] * &pow;
        pow *= &lc;
    }
    let monic_factors = zassenhaus_monic(&g);
    monic_factors
        .into_iter()
        .map(|gf| {
            // Substitute y = lc * x and take the primitive part.
            let mut back: ZPoly = gf
                .iter()
                .enumerate()
                .map(|(i, c)| c * lc.pow(i as u32))
                .collect();
            z_trim(&mut back);
            let cont = back.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
            if !cont.is_zero() && !cont.is_one() {
                for c in back.iter_mut() {
                    *c /= &cont;
                }
            }
            if back.last().is_some_and(Signed::is_negative) {
                for c in back.iter_mut() {
                    *c = -c.clone();
                }
            }
            back
        })
        .collect()
}

/// Dense rational gcd via Euclid with monic normalization; small degrees
/// only, used to detect repeated factors before irreducibility testing.
fn q_gcd_dense(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    fn trim(v: &mut Vec<BigRational>) {
        while v.last().is_some_and(Zero::is_zero) {
            v.pop();
        }
    }
    let mut r0 = a.to_vec();
    let mut r1 = b.to_vec();
    trim(&mut r0);
    trim(&mut r1);
    while !r1.is_empty() {
        let d1 = r1.len() - 1;
        let lc1 = r1[d1].clone();
        while r0.len() >= r1.len() {
            let d0 = r0.len() - 1;
            let coef = &r0[d0] / &lc1;
            let shift = d0 - d1;
            for i in 0..=d1 {
                let v = &r0[shift + i] - &coef * &r1[i];
                r0[shift + i] = v;
            }
            trim(&mut r0);
        }
        std::mem::swap(&mut r0, &mut r1);
    }
    if let Some(lc) = r0.last().cloned() {
        for c in r0.iter_mut() {
            *c = &*c / &lc;
        }
    }
    r0
}

/// Convert a polynomial that involves at most the variable `var` into a
/// dense coefficient vector. `None` when another variable occurs.
pub fn qpoly_to_dense(p: &QPoly, var: usize) -> Option<Vec<BigRational>> {
    let mut out = vec![BigRational::zero(); p.deg(var) as usize + 1];
    for (m, c) in p.terms() {
        let e = m.deg(var);
        if m.total_degree() != e {
            return None;
        }
        out[e as usize] = c.clone();
    }
    while out.len() > 1 && out.last().is_some_and(Zero::is_zero) {
        out.pop();
    }
    Some(out)
}

pub fn dense_to_qpoly(coeffs: &[BigRational], var: usize) -> QPoly {
    QPoly::from_terms(
        QField,
        coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (Mono::var_pow(var, i as u32), c.clone())),
    )
}

fn dense_q_to_z(coeffs: &[BigRational]) -> ZPoly {
    let mut den = BigInt::one();
    for c in coeffs {
        den = den.lcm(c.denom());
    }
    coeffs.iter().map(|c| c.numer() * &den / c.denom()).collect()
}

/// Irreducible factors over the rationals of a squarefree univariate
/// polynomial given densely; factors are primitive over the integers.
pub fn factor_squarefree_q(coeffs: &[BigRational]) -> Vec<Vec<BigRational>> {
    let z = dense_q_to_z(coeffs);
    factor_squarefree_z(&z)
        .into_iter()
        .map(|f| f.into_iter().map(BigRational::from_integer).collect())
        .collect()
}

/// Irreducibility over the rationals for an arbitrary dense univariate
/// polynomial. Constants are not irreducible; repeated factors make a
/// polynomial of degree at least two reducible.
pub fn is_irreducible_q(coeffs: &[BigRational]) -> Result<bool> {
    let mut c = coeffs.to_vec();
    while c.last().is_some_and(Zero::is_zero) {
        c.pop();
    }
    match c.len() {
        0 | 1 => Ok(false),
        2 => Ok(true),
        _ => {
            let deriv: Vec<BigRational> = c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, a)| a * BigRational::from_integer(i.into()))
                .collect();
            let g = q_gcd_dense(&c, &deriv);
            if g.len() > 1 {
                return Ok(false);
            }
            if g.is_empty() {
                return Err(Error::internal("gcd of a nonzero polynomial vanished"));
            }
            Ok(factor_squarefree_q(&c).len() == 1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zp(v: &[i64]) -> ZPoly {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn fp_divmod_round_trip() {
        let p = 10007;
        let a = FpDense::new(p, vec![3, 1, 4, 1, 5]);
        let b = FpDense::new(p, vec![2, 7, 1]);
        let (q, r) = a.divmod(&b);
        let back = q.mul(&b).add(&r);
        assert_eq!(back, a);
        assert!(r.degree().unwrap_or(0) < b.degree().unwrap());
    }

    #[test]
    fn fp_gcd_of_planted_product() {
        let p = 101;
        let g = FpDense::new(p, vec![1, 1]); // x + 1
        let a = g.mul(&FpDense::new(p, vec![3, 0, 1]));
        let b = g.mul(&FpDense::new(p, vec![5, 1]));
        assert_eq!(a.gcd(&b), g.make_monic());
    }

    #[test]
    fn fp_factor_splits_x4_minus_1() {
        let p = 5;
        let f = FpDense::new(p, vec![p - 1, 0, 0, 0, 1]); // x^4 - 1
        let mut rng = rngutil::stream(1, "test");
        let facs = f.factor_squarefree_monic(&mut rng);
        assert_eq!(facs.len(), 4);
        let prod = facs.iter().fold(FpDense::constant(p, 1), |a, b| a.mul(b));
        assert_eq!(prod, f);
    }

    #[test]
    fn zassenhaus_x4_minus_1() {
        let f = zp(&[-1, 0, 0, 0, 1]);
        let facs = zassenhaus_monic(&f);
        assert_eq!(facs.len(), 3);
        assert!(facs.contains(&zp(&[-1, 1])));
        assert!(facs.contains(&zp(&[1, 1])));
        assert!(facs.contains(&zp(&[1, 0, 1])));
    }

    #[test]
    fn zassenhaus_needs_recombination() {
        // (x^2 - 2)(x^2 - 3): irreducible quadratics that split or pair up
        // differently mod every prime, so subsets must be recombined.
        let f = zp(&[6, 0, -5, 0, 1]);
        let mut facs = zassenhaus_monic(&f);
        facs.sort_by(|a, b| format!("{a:?}").cmp(&format!("{b:?}")));
        assert_eq!(facs.len(), 2);
        assert!(facs.contains(&zp(&[-2, 0, 1])));
        assert!(facs.contains(&zp(&[-3, 0, 1])));
    }

    #[test]
    fn zassenhaus_irreducible_stays_whole() {
        // x^4 + 1 is irreducible over Q but splits mod every prime.
        let f = zp(&[1, 0, 0, 0, 1]);
        let facs = zassenhaus_monic(&f);
        assert_eq!(facs, vec![f]);
    }

    #[test]
    fn nonmonic_factors_map_back() {
        // 2x^2 - 2 = 2(x-1)(x+1); primitive factors returned.
        let f = zp(&[-2, 0, 2]);
        let mut facs = factor_squarefree_z(&f);
        facs.sort_by(|a, b| format!("{a:?}").cmp(&format!("{b:?}")));
        assert_eq!(facs.len(), 2);
        assert!(facs.contains(&zp(&[-1, 1])));
        assert!(facs.contains(&zp(&[1, 1])));
        // 3x^2 + 5x + 2 = (3x + 2)(x + 1).
        let g = zp(&[2, 5, 3]);
        let gfacs = factor_squarefree_z(&g);
        assert_eq!(gfacs.len(), 2);
        assert!(gfacs.contains(&zp(&[2, 3])));
        assert!(gfacs.contains(&zp(&[1, 1])));
    }

    #[test]
    fn irreducibility_judgments() {
        let q = |v: &[i64]| -> Vec<BigRational> {
            v.iter().map(|&x| BigRational::from_integer(x.into())).collect()
        };
        assert!(is_irreducible_q(&q(&[1, 0, 1])).unwrap()); // x^2 + 1
        assert!(!is_irreducible_q(&q(&[-1, 0, 1])).unwrap()); // x^2 - 1
        assert!(!is_irreducible_q(&q(&[1, 2, 1])).unwrap()); // (x+1)^2
        assert!(is_irreducible_q(&q(&[3, 1])).unwrap()); // x + 3
        assert!(!is_irreducible_q(&q(&[7])).unwrap()); // constant
        // Degree 6 with a cubic pair: (x^3 - 2)(x^3 - 3).
        assert!(!is_irreducible_q(&q(&[6, 0, 0, -5, 0, 0, 1])).unwrap());
        assert!(is_irreducible_q(&q(&[-2, 0, 0, 1])).unwrap()); // x^3 - 2
    }

    #[test]
    fn hensel_lift_reconstructs_factors() {
        // f = (x - 1)(x + 3) = x^2 + 2x - 3 lifted from mod 5 to mod 5^4.
        let f = zp(&[-3, 2, 1]);
        let p = 5u64;
        let f1 = FpDense::new(p, vec![4, 1]); // x - 1
        let f2 = FpDense::new(p, vec![3, 1]); // x + 3
        let target = BigInt::from(5u64.pow(4));
        let lifted = hensel_lift_tree(p, &zm_reduce(&f, &target), &[f1, f2], &target);
        let m = BigInt::from(5u64.pow(4));
        let prod = zm_mul(&lifted[0], &lifted[1], &m);
        assert_eq!(prod, zm_reduce(&f, &m));
        let sym: Vec<ZPoly> = lifted.iter().map(|g| zm_symmetric(g, &m)).collect();
        assert!(sym.contains(&zp(&[-1, 1])));
        assert!(sym.contains(&zp(&[3, 1])));
    }
}
