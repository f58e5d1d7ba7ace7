//! Sparse multivariate Laurent polynomials over the rationals.
//!
//! One type serves three roles: numerators in `X, Y_1, …, Y_m`, rational
//! functions in `Y` after `X` has been specialised, and polynomials in the
//! topological variables `s_1, …, s_m`. Terms live in a `BTreeMap`, so
//! iteration order and therefore printing are deterministic.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::arith::rpow;

pub type Monomial = Vec<i64>;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Laurent {
    nvars: usize,
    terms: BTreeMap<Monomial, BigRational>,
}

/// Order in which terms are printed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TermOrder {
    /// Total degree ascending, ties broken lexicographically ascending.
    Ascending,
    /// Total degree descending, ties broken lexicographically descending.
    Descending,
}

fn degree(m: &[i64]) -> i64 {
    m.iter().sum()
}

impl Laurent {
    pub fn zero(nvars: usize) -> Self {
        Laurent { nvars, terms: BTreeMap::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, BigRational::one())
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        Self::monomial(vec![0; nvars], c)
    }

    pub fn from_int(nvars: usize, c: i64) -> Self {
        Self::constant(nvars, BigRational::from_integer(BigInt::from(c)))
    }

    pub fn monomial(exps: Monomial, c: BigRational) -> Self {
        let mut p = Laurent::zero(exps.len());
        p.add_term(exps, c);
        p
    }

    /// The variable with index `i` raised to `e`.
    pub fn var(nvars: usize, i: usize, e: i64) -> Self {
        let mut exps = vec![0; nvars];
        exps[i] = e;
        Self::monomial(exps, BigRational::one())
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: &[i64]) -> BigRational {
        self.terms.get(exps).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn add_term(&mut self, exps: Monomial, c: BigRational) {
        debug_assert_eq!(exps.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            alloc::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            alloc::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// `Some(c)` when the polynomial is the constant `c` (including zero).
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (e, c) = self.terms.iter().next()?;
                e.iter().all(|&x| x == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn as_monomial(&self) -> Option<(&Monomial, &BigRational)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    pub fn is_polynomial(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&x| x >= 0))
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Laurent::zero(self.nvars);
        }
        Laurent {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, a)| (e.clone(), a * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, exps: &[i64], c: &BigRational) -> Self {
        if c.is_zero() {
            return Laurent::zero(self.nvars);
        }
        Laurent {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, a)| (e.iter().zip(exps).map(|(x, y)| x + y).collect(), a * c))
                .collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Laurent::one(self.nvars);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Rewrites every monomial; colliding images are summed.
    pub fn map_monomials(&self, f: impl Fn(&[i64]) -> Monomial) -> Self {
        self.map_monomials_into(self.nvars, f)
    }

    /// As [`Laurent::map_monomials`], with images in `nvars` variables.
    pub fn map_monomials_into(&self, nvars: usize, f: impl Fn(&[i64]) -> Monomial) -> Self {
        let mut out = Laurent::zero(nvars);
        for (e, c) in &self.terms {
            out.add_term(f(e), c.clone());
        }
        out
    }

    /// Inverts every variable: `p(x_1^{-1}, …, x_n^{-1})`.
    pub fn invert_vars(&self) -> Self {
        self.map_monomials(|e| e.iter().map(|x| -x).collect())
    }

    /// Substitutes the rational `value` for variable `i`, removing it.
    pub fn specialize(&self, i: usize, value: &BigRational) -> Self {
        let mut out = Laurent::zero(self.nvars - 1);
        for (e, c) in &self.terms {
            let mut rest = e.clone();
            let k = rest.remove(i);
            out.add_term(rest, c * rpow(value, k));
        }
        out
    }

    /// Inserts a new variable with exponent zero at index `i`.
    pub fn insert_var(&self, i: usize) -> Self {
        let mut out = Laurent::zero(self.nvars + 1);
        for (e, c) in &self.terms {
            let mut ext = e.clone();
            ext.insert(i, 0);
            out.add_term(ext, c.clone());
        }
        out
    }

    pub fn eval(&self, point: &[BigRational]) -> BigRational {
        let mut acc = BigRational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &k) in point.iter().zip(e) {
                if k != 0 {
                    t *= rpow(x, k);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn max_exponent(&self, i: usize) -> i64 {
        self.terms.keys().map(|e| e[i]).max().unwrap_or(0)
    }

    pub fn min_exponent(&self, i: usize) -> i64 {
        self.terms.keys().map(|e| e[i]).min().unwrap_or(0)
    }

    /// Componentwise minimum of all exponent vectors (zero vector when empty).
    pub fn min_exponents(&self) -> Monomial {
        let mut m = vec![0; self.nvars];
        let mut first = true;
        for e in self.terms.keys() {
            if first {
                m.clone_from(e);
                first = false;
            } else {
                for (a, b) in m.iter_mut().zip(e) {
                    *a = (*a).min(*b);
                }
            }
        }
        m
    }

    /// Variables that occur with a nonzero exponent.
    pub fn support(&self) -> Vec<usize> {
        (0..self.nvars)
            .filter(|&i| self.terms.keys().any(|e| e[i] != 0))
            .collect()
    }

    /// Terms in printing order.
    pub fn sorted_terms(&self, order: TermOrder) -> Vec<(&Monomial, &BigRational)> {
        let mut ts: Vec<_> = self.terms.iter().collect();
        ts.sort_by(|a, b| {
            let o = degree(a.0).cmp(&degree(b.0)).then_with(|| a.0.cmp(b.0));
            match order {
                TermOrder::Ascending => o,
                TermOrder::Descending => o.reverse(),
            }
        });
        ts
    }

    /// Leading coefficient with respect to `order` (the first printed term).
    pub fn leading(&self, order: TermOrder) -> Option<(&Monomial, &BigRational)> {
        self.sorted_terms(order).first().copied()
    }

    pub fn display<'a>(&'a self, names: &'a [String], order: TermOrder) -> LaurentDisplay<'a> {
        LaurentDisplay { poly: self, names, order }
    }
}

pub struct LaurentDisplay<'a> {
    poly: &'a Laurent,
    names: &'a [String],
    order: TermOrder,
}

pub(crate) fn fmt_monomial(f: &mut fmt::Formatter<'_>, exps: &[i64], names: &[String]) -> fmt::Result {
    let mut first = true;
    for (i, &k) in exps.iter().enumerate() {
        if k == 0 {
            continue;
        }
        if !first {
            f.write_str("*")?;
        }
        first = false;
        f.write_str(&names[i])?;
        if k != 1 {
            write!(f, "^{}", k)?;
        }
    }
    Ok(())
}

impl fmt::Display for LaurentDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return f.write_str("0");
        }
        for (idx, (e, c)) in self.poly.sorted_terms(self.order).into_iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            match (idx == 0, neg) {
                (true, true) => f.write_str("-")?,
                (true, false) => {}
                (false, true) => f.write_str(" - ")?,
                (false, false) => f.write_str(" + ")?,
            }
            let is_const = e.iter().all(|&x| x == 0);
            if is_const {
                write!(f, "{}", mag)?;
            } else {
                if !mag.is_one() {
                    write!(f, "{}*", mag)?;
                }
                fmt_monomial(f, e, self.names)?;
            }
        }
        Ok(())
    }
}

impl<'a> Add<&'a Laurent> for &'a Laurent {
    type Output = Laurent;
    fn add(self, rhs: &Laurent) -> Laurent {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a Laurent> for &'a Laurent {
    type Output = Laurent;
    fn sub(self, rhs: &Laurent) -> Laurent {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }
}

impl<'a> Mul<&'a Laurent> for &'a Laurent {
    type Output = Laurent;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: &Laurent) -> Laurent {
        let mut out = Laurent::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                out.add_term(e1.iter().zip(e2).map(|(a, b)| a + b).collect(), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Laurent {
    type Output = Laurent;
    fn neg(self) -> Laurent {
        self.scale(&-BigRational::one())
    }
}

impl Add for Laurent {
    type Output = Laurent;
    fn add(self, rhs: Laurent) -> Laurent {
        &self + &rhs
    }
}

impl Sub for Laurent {
    type Output = Laurent;
    fn sub(self, rhs: Laurent) -> Laurent {
        &self - &rhs
    }
}

impl Mul for Laurent {
    type Output = Laurent;
    fn mul(self, rhs: Laurent) -> Laurent {
        &self * &rhs
    }
}

impl Neg for Laurent {
    type Output = Laurent;
    fn neg(self) -> Laurent {
        -&self
    }
}

/// Univariate helpers on polynomials in a single variable `idx` (all other
/// exponents zero), used for cancellation.
pub(crate) mod univariate {
    use super::*;

    /// Dense ascending coefficients, or `None` if the polynomial involves
    /// variables other than `idx` or negative exponents.
    pub(crate) fn dense(p: &Laurent, idx: usize) -> Option<Vec<BigRational>> {
        let mut deg = 0usize;
        for e in p.terms.keys() {
            for (i, &k) in e.iter().enumerate() {
                if (i != idx && k != 0) || k < 0 {
                    return None;
                }
            }
            deg = deg.max(e[idx] as usize);
        }
        let mut v = vec![BigRational::zero(); deg + 1];
        for (e, c) in &p.terms {
            v[e[idx] as usize] = c.clone();
        }
        Some(v)
    }

    pub(crate) fn sparse(v: &[BigRational], nvars: usize, idx: usize) -> Laurent {
        let mut p = Laurent::zero(nvars);
        for (k, c) in v.iter().enumerate() {
            let mut e = vec![0; nvars];
            e[idx] = k as i64;
            p.add_term(e, c.clone());
        }
        p
    }

    fn trim(v: &mut Vec<BigRational>) {
        while v.last().is_some_and(|c| c.is_zero()) {
            v.pop();
        }
    }

    /// Quotient and remainder; `b` must be nonzero.
    pub(crate) fn divrem(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
        let mut r: Vec<BigRational> = a.to_vec();
        trim(&mut r);
        let mut bb = b.to_vec();
        trim(&mut bb);
        let db = bb.len() - 1;
        let lead = bb[db].clone();
        if r.len() < bb.len() {
            return (Vec::new(), r);
        }
        let mut q = vec![BigRational::zero(); r.len() - db];
        while r.len() >= bb.len() {
            let shift = r.len() - bb.len();
            let c = r.last().cloned().unwrap_or_default() / &lead;
            for (i, bc) in bb.iter().enumerate() {
                r[shift + i] -= &c * bc;
            }
            q[shift] = c;
            r.pop();
            trim(&mut r);
        }
        (q, r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::ratio;
    use alloc::string::ToString;

    fn names() -> Vec<String> {
        ["X", "Y1"].iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn arithmetic_cancels_terms() {
        let x = Laurent::var(2, 0, 1);
        let y = Laurent::var(2, 1, 1);
        let one = Laurent::one(2);
        let a = &one - &y;
        let b = &one + &y;
        let prod = &a * &b;
        assert_eq!(prod, &one - &y.pow(2));
        assert!((&x - &x).is_zero());
    }

    #[test]
    fn printing_is_degree_then_lex() {
        let y = Laurent::var(2, 1, 1);
        let p = &Laurent::one(2) - &y.scale(&ratio(25, 1));
        assert_eq!(p.display(&names(), TermOrder::Ascending).to_string(), "1 - 25*Y1");
        let q = &Laurent::var(2, 0, -1) + &Laurent::monomial(vec![2, 1], ratio(-1, 5));
        assert_eq!(q.display(&names(), TermOrder::Ascending).to_string(), "X^-1 - 1/5*X^2*Y1");
        assert_eq!(q.display(&names(), TermOrder::Descending).to_string(), "-1/5*X^2*Y1 + X^-1");
    }

    #[test]
    fn specialize_and_invert() {
        // (1 - X*Y)(X = 5) = 1 - 5Y
        let p = &Laurent::one(2) - &Laurent::monomial(vec![1, 1], ratio(1, 1));
        let s = p.specialize(0, &ratio(5, 1));
        assert_eq!(s, &Laurent::one(1) - &Laurent::monomial(vec![1], ratio(5, 1)));
        assert_eq!(p.invert_vars().invert_vars(), p);
    }

    #[test]
    fn univariate_division() {
        use univariate::*;
        // (s-1)s = (s-1)·s + 0 and s^2 + 1 = (s-1)(s+1) + 2
        let a = [ratio(0, 1), ratio(-1, 1), ratio(1, 1)];
        let b = [ratio(-1, 1), ratio(1, 1)];
        assert_eq!(divrem(&a, &b), (vec![ratio(0, 1), ratio(1, 1)], vec![]));
        let c = [ratio(1, 1), ratio(0, 1), ratio(1, 1)];
        assert_eq!(divrem(&c, &b), (vec![ratio(1, 1), ratio(1, 1)], vec![ratio(2, 1)]));
    }
}
