//! Monomials as exponent vectors with graded reverse lexicographic order.
//!
//! Exponent vectors are stored with trailing zeros trimmed, which makes a
//! monomial's identity independent of how many variables the table has grown
//! to since it was created. Grevlex comparison treats missing entries as
//! zero, so growing the table never reorders existing monomials.

use std::cmp::Ordering;

/// A power product of variables, indexed by `VarTable` position.
///
/// Invariant: the exponent vector never ends in a zero.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Mono(Vec<u32>);

impl Mono {
    pub fn one() -> Self {
        Mono(Vec::new())
    }

    pub fn var(idx: usize) -> Self {
        Self::var_pow(idx, 1)
    }

    pub fn var_pow(idx: usize, e: u32) -> Self {
        if e == 0 {
            return Mono::one();
        }
        let mut v = vec![0; idx + 1];
        v[idx] = e;
        Mono(v)
    }

    pub fn from_exponents(mut v: Vec<u32>) -> Self {
        while v.last() == Some(&0) {
            v.pop();
        }
        Mono(v)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn deg(&self, var: usize) -> u32 {
        self.0.get(var).copied().unwrap_or(0)
    }

    /// Largest variable index with nonzero exponent, if any.
    pub fn max_var(&self) -> Option<usize> {
        if self.0.is_empty() {
            None
        } else {
            Some(self.0.len() - 1)
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, e)| **e > 0).map(|(i, _)| i)
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        let n = self.0.len().max(other.0.len());
        let mut v = Vec::with_capacity(n);
        for i in 0..n {
            v.push(self.deg(i) + other.deg(i));
        }
        Mono(v)
    }

    pub fn divides(&self, other: &Mono) -> bool {
        self.0.iter().enumerate().all(|(i, e)| *e <= other.deg(i))
    }

    /// other / self, assuming divisibility.
    pub fn div_into(&self, other: &Mono) -> Mono {
        debug_assert!(self.divides(other));
        let mut v: Vec<u32> = (0..other.0.len()).map(|i| other.deg(i) - self.deg(i)).collect();
        while v.last() == Some(&0) {
            v.pop();
        }
        Mono(v)
    }

    pub fn lcm(&self, other: &Mono) -> Mono {
        let n = self.0.len().max(other.0.len());
        Mono::from_exponents((0..n).map(|i| self.deg(i).max(other.deg(i))).collect())
    }

    pub fn gcd(&self, other: &Mono) -> Mono {
        let n = self.0.len().min(other.0.len());
        Mono::from_exponents((0..n).map(|i| self.deg(i).min(other.deg(i))).collect())
    }

    pub fn pow(&self, e: u32) -> Mono {
        Mono::from_exponents(self.0.iter().map(|x| x * e).collect())
    }

    /// True when the two power products share no variable.
    pub fn coprime(&self, other: &Mono) -> bool {
        let n = self.0.len().min(other.0.len());
        (0..n).all(|i| self.deg(i) == 0 || other.deg(i) == 0)
    }

    /// Rebuild with every variable index sent through `f`; the map must be
    /// injective on the variables present.
    pub fn remap(&self, f: impl Fn(usize) -> usize) -> Mono {
        let mut out = Mono::one();
        for v in self.vars() {
            out = out.mul(&Mono::var_pow(f(v), self.deg(v)));
        }
        out
    }

    /// Exponent of `var` set to `e`, other entries kept.
    pub fn with_deg(&self, var: usize, e: u32) -> Mono {
        let mut v = self.0.clone();
        if v.len() <= var {
            v.resize(var + 1, 0);
        }
        v[var] = e;
        Mono::from_exponents(v)
    }

    /// Grevlex: compare by total degree, then reverse lexicographically
    /// (the monomial with the larger exponent at the last differing
    /// position is the smaller one).
    pub fn cmp_grevlex(&self, other: &Mono) -> Ordering {
        match self.total_degree().cmp(&other.total_degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        let n = self.0.len().max(other.0.len());
        for i in (0..n).rev() {
            let a = self.deg(i);
            let b = other.deg(i);
            match a.cmp(&b) {
                Ordering::Equal => continue,
                // Larger exponent later in the vector means smaller monomial.
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
            }
        }
        Ordering::Equal
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_grevlex(other)
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trailing_zeros_trimmed() {
        let a = Mono::from_exponents(vec![1, 0, 0]);
        let b = Mono::var(0);
        assert_eq!(a, b);
    }

    #[test]
    fn grevlex_degree_first() {
        let x = Mono::var(0);
        let xy = Mono::var(0).mul(&Mono::var(1));
        assert!(x < xy);
    }

    #[test]
    fn grevlex_tie_break() {
        // Same total degree: the variable appearing later in the table is
        // the smaller monomial, so y < x for table order [x, y].
        let x = Mono::var(0);
        let y = Mono::var(1);
        assert!(y < x);
        // x^2 y < x y^2 under grevlex (y^2 has more weight at the end).
        let x2y = Mono::from_exponents(vec![2, 1]);
        let xy2 = Mono::from_exponents(vec![1, 2]);
        assert!(xy2 < x2y);
    }

    #[test]
    fn padding_stable_under_growth() {
        // A comparison must not change when monomials are viewed in a
        // larger table.
        let a = Mono::from_exponents(vec![2, 1]);
        let b = Mono::from_exponents(vec![1, 2]);
        let ord = a.cmp(&b);
        let a2 = Mono::from_exponents(vec![2, 1, 0, 0]);
        let b2 = Mono::from_exponents(vec![1, 2, 0, 0]);
        assert_eq!(ord, a2.cmp(&b2));
    }

    #[test]
    fn division_and_lcm() {
        let x2y = Mono::from_exponents(vec![2, 1]);
        let xy = Mono::from_exponents(vec![1, 1]);
        assert!(xy.divides(&x2y));
        assert_eq!(xy.div_into(&x2y), Mono::var(0));
        assert_eq!(xy.lcm(&Mono::var_pow(1, 3)), Mono::from_exponents(vec![1, 3]));
    }
}
