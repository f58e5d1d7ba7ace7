//! Expansion of `W(X, X^{-s_1}, …, X^{-s_m})` around `X = 1`.
//!
//! A monomial `X^a Y^b` becomes `X^e` with `e = a - Σ b_j s_j`, and
//! `X^e = Σ_d binom(e, d) (X - 1)^d`. A cyclotomic factor `1 - X^e` starts
//! with `-e (X - 1)`, so `W` lies in the ring `M` exactly when the numerator
//! series vanishes to order at least the number of denominator factors.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::rpow;
use crate::poly::{fmt_monomial, Laurent, TermOrder};
use crate::ratfun::{CycloFactor, CycloRational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MringError {
    /// The expansion has a pole at `X = 1`; `gap` is negative.
    NotInM { gap: i64 },
}

impl fmt::Display for MringError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MringError::NotInM { gap } => write!(f, "not in M: valuation gap {}", gap),
        }
    }
}

impl core::error::Error for MringError {}

fn s_names(m: usize) -> Vec<String> {
    (1..=m).map(|j| alloc::format!("s{}", j)).collect()
}

/// `e = a - b_1 s_1 - … - b_m s_m`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineForm {
    pub a: i64,
    pub b: Vec<i64>,
}

impl AffineForm {
    pub fn new(a: i64, b: Vec<i64>) -> Self {
        AffineForm { a, b }
    }

    pub fn of_factor(f: &CycloFactor) -> Self {
        AffineForm { a: f.a, b: f.b.clone() }
    }

    pub fn to_poly(&self) -> PolyS {
        let m = self.b.len();
        let mut p = Laurent::from_int(m, self.a);
        for (j, &bj) in self.b.iter().enumerate() {
            p.add_term(unit(m, j), BigRational::from_integer(BigInt::from(-bj)));
        }
        PolyS(p)
    }
}

fn unit(m: usize, j: usize) -> Vec<i64> {
    let mut e = vec![0; m];
    e[j] = 1;
    e
}

/// A polynomial in `s_1, …, s_m` with rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PolyS(Laurent);

impl PolyS {
    pub fn zero(m: usize) -> Self {
        PolyS(Laurent::zero(m))
    }

    pub fn one(m: usize) -> Self {
        PolyS(Laurent::one(m))
    }

    pub fn constant(m: usize, c: BigRational) -> Self {
        PolyS(Laurent::constant(m, c))
    }

    /// `s_{j+1}`.
    pub fn var(m: usize, j: usize) -> Self {
        PolyS(Laurent::var(m, j, 1))
    }

    /// Fails when `p` has negative exponents.
    pub fn from_laurent(p: Laurent) -> Option<Self> {
        p.is_polynomial().then_some(PolyS(p))
    }

    pub fn as_laurent(&self) -> &Laurent {
        &self.0
    }

    pub fn m(&self) -> usize {
        self.0.nvars()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        PolyS(&self.0 + &o.0)
    }

    pub fn sub(&self, o: &Self) -> Self {
        PolyS(&self.0 - &o.0)
    }

    pub fn mul(&self, o: &Self) -> Self {
        PolyS(&self.0 * &o.0)
    }

    pub fn neg(&self) -> Self {
        PolyS(-&self.0)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        PolyS(self.0.scale(c))
    }

    pub fn eval(&self, s: &[BigRational]) -> BigRational {
        self.0.eval(s)
    }
}

impl fmt::Display for PolyS {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.display(&s_names(self.m()), TermOrder::Descending))
    }
}

/// `e(e-1)…(e-d+1)/d!` as a polynomial in `s`.
pub fn binom_poly(e: &AffineForm, d: u32) -> PolyS {
    let m = e.b.len();
    let base = e.to_poly();
    let mut acc = PolyS::one(m);
    let mut fact = BigInt::one();
    for k in 0..d {
        let shifted = base.sub(&PolyS::constant(m, BigRational::from_integer(BigInt::from(k))));
        acc = acc.mul(&shifted);
        fact *= BigInt::from(k + 1);
    }
    acc.scale(&BigRational::new(BigInt::one(), fact))
}

/// Coefficients of `(X-1)^0 … (X-1)^T`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesX1 {
    coeffs: Vec<PolyS>,
}

impl SeriesX1 {
    pub fn zero(m: usize, order: usize) -> Self {
        SeriesX1 { coeffs: vec![PolyS::zero(m); order + 1] }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[PolyS] {
        &self.coeffs
    }

    pub fn coeff(&self, d: usize) -> &PolyS {
        &self.coeffs[d]
    }

    /// Index of the first nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        let t = self.order().min(o.order());
        SeriesX1 { coeffs: (0..=t).map(|d| self.coeffs[d].add(&o.coeffs[d])).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let t = self.order().min(o.order());
        let m = self.coeffs[0].m();
        let mut out = vec![PolyS::zero(m); t + 1];
        for i in 0..=t {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..=(t - i) {
                out[i + j] = out[i + j].add(&self.coeffs[i].mul(&o.coeffs[j]));
            }
        }
        SeriesX1 { coeffs: out }
    }
}

/// Expansion of `g(X, X^{-s_1}, …)` to order `T`.
pub fn numerator_series(g: &Laurent, order: usize) -> SeriesX1 {
    let m = g.nvars() - 1;
    let mut out = SeriesX1::zero(m, order);
    for (e, c) in g.terms() {
        let form = AffineForm::new(e[0], e[1..].to_vec());
        for d in 0..=order {
            let term = binom_poly(&form, d as u32).scale(c);
            out.coeffs[d] = out.coeffs[d].add(&term);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Membership {
    pub in_m: bool,
    /// Numerator valuation minus the number of denominator factors, capped at 1.
    pub gap: i64,
}

pub fn check_membership(w: &CycloRational) -> Membership {
    let t = w.den_size() as usize;
    let series = numerator_series(w.numerator(), t);
    membership_of(&series, t)
}

fn membership_of(series: &SeriesX1, t: usize) -> Membership {
    let v = series.valuation().unwrap_or(t + 1) as i64;
    let gap = (v - t as i64).min(1);
    Membership { in_m: gap >= 0, gap }
}

/// `W(X, X^{-s}) mod (X - 1)`.
pub fn red(w: &CycloRational) -> Result<RatS, MringError> {
    let m = w.m();
    let t = w.den_size() as usize;
    let series = numerator_series(w.numerator(), t);
    let mem = membership_of(&series, t);
    if !mem.in_m {
        return Err(MringError::NotInM { gap: mem.gap });
    }
    if mem.gap > 0 {
        return Ok(RatS::zero(m));
    }
    let mut out = RatS::from_poly(series.coeff(t).clone());
    for (f, &e) in w.denominator() {
        let lead = AffineForm::of_factor(f).to_poly().neg();
        for _ in 0..e {
            out = out.div_linear(&lead);
        }
    }
    Ok(out)
}

/// A linear form `c_1 s_1 + … + c_m s_m + c_0` normalised so that its first
/// nonzero `c_j` (`j ≥ 1`) is 1. Stored as `[c_1, …, c_m, c_0]`.
type LinKey = Vec<BigRational>;

/// A rational function in `s` whose denominator is a product of linear forms,
/// kept fully cancelled: numerator and denominator share no factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatS {
    num: PolyS,
    den: BTreeMap<LinKey, u32>,
}

impl RatS {
    pub fn zero(m: usize) -> Self {
        RatS { num: PolyS::zero(m), den: BTreeMap::new() }
    }

    pub fn one(m: usize) -> Self {
        Self::from_poly(PolyS::one(m))
    }

    pub fn from_poly(p: PolyS) -> Self {
        RatS { num: p, den: BTreeMap::new() }
    }

    pub fn m(&self) -> usize {
        self.num.m()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn numerator(&self) -> &PolyS {
        &self.num
    }

    /// The expanded denominator (monic in the normalisation above).
    pub fn denominator(&self) -> PolyS {
        let m = self.m();
        let mut acc = PolyS::one(m);
        for (k, &e) in &self.den {
            for _ in 0..e {
                acc = acc.mul(&lin_poly(k));
            }
        }
        acc
    }

    /// `1/∏(s_1 - i)` style: divides by an arbitrary polynomial of degree ≤ 1.
    pub fn div_linear(&self, l: &PolyS) -> Self {
        let m = self.m();
        let key = lin_key(l, m);
        match key {
            LinOrConst::Const(c) => {
                assert!(!c.is_zero(), "division by zero");
                RatS { num: self.num.scale(&(BigRational::one() / c)), den: self.den.clone() }
            }
            LinOrConst::Lin(scale, key) => {
                let mut out = RatS { num: self.num.scale(&(BigRational::one() / scale)), den: self.den.clone() };
                *out.den.entry(key).or_insert(0) += 1;
                out.cancel()
            }
        }
    }

    fn cancel(mut self) -> Self {
        if self.num.is_zero() {
            self.den.clear();
            return self;
        }
        let keys: Vec<LinKey> = self.den.keys().cloned().collect();
        for k in keys {
            while self.den.get(&k).copied().unwrap_or(0) > 0 {
                match div_exact_linear(&self.num.0, &k) {
                    Some(q) => {
                        self.num = PolyS(q);
                        let e = self.den.get_mut(&k).expect("present");
                        *e -= 1;
                        if *e == 0 {
                            self.den.remove(&k);
                        }
                    }
                    None => break,
                }
            }
        }
        self
    }

    fn lift(&self, target: &BTreeMap<LinKey, u32>) -> PolyS {
        let mut acc = self.num.clone();
        for (k, &e) in target {
            let have = self.den.get(k).copied().unwrap_or(0);
            for _ in have..e {
                acc = acc.mul(&lin_poly(k));
            }
        }
        acc
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut den = self.den.clone();
        for (k, &e) in &o.den {
            let slot = den.entry(k.clone()).or_insert(0);
            *slot = (*slot).max(e);
        }
        let num = self.lift(&den).add(&o.lift(&den));
        RatS { num, den }.cancel()
    }

    pub fn neg(&self) -> Self {
        RatS { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut den = self.den.clone();
        for (k, &e) in &o.den {
            *den.entry(k.clone()).or_insert(0) += e;
        }
        RatS { num: self.num.mul(&o.num), den }.cancel()
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        RatS { num: self.num.scale(c), den: self.den.clone() }.cancel()
    }

    /// Value at `s`, `None` at a pole.
    pub fn eval(&self, s: &[BigRational]) -> Option<BigRational> {
        let mut d = BigRational::one();
        for (k, &e) in &self.den {
            d *= rpow(&lin_poly(k).eval(s), e as i64);
        }
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(s) / d)
    }
}

enum LinOrConst {
    Const(BigRational),
    Lin(BigRational, LinKey),
}

fn lin_key(l: &PolyS, m: usize) -> LinOrConst {
    let mut key = vec![BigRational::zero(); m + 1];
    for (e, c) in l.0.terms() {
        match e.iter().position(|&x| x != 0) {
            None => key[m] = c.clone(),
            Some(j) => {
                assert!(e[j] == 1 && e.iter().filter(|&&x| x != 0).count() == 1, "not a linear form");
                key[j] = c.clone();
            }
        }
    }
    match key[..m].iter().find(|c| !c.is_zero()).cloned() {
        None => LinOrConst::Const(key[m].clone()),
        Some(lead) => {
            let inv = BigRational::one() / &lead;
            LinOrConst::Lin(lead, key.iter().map(|c| c * &inv).collect())
        }
    }
}

fn lin_poly(k: &LinKey) -> PolyS {
    let m = k.len() - 1;
    let mut p = Laurent::constant(m, k[m].clone());
    for j in 0..m {
        p.add_term(unit(m, j), k[j].clone());
    }
    PolyS(p)
}

/// Exact quotient by a normalised linear form, if it divides.
fn div_exact_linear(p: &Laurent, k: &LinKey) -> Option<Laurent> {
    let m = k.len() - 1;
    let j = k[..m].iter().position(|c| !c.is_zero())?;
    let lin = lin_poly(k).0;
    let mut r = p.clone();
    let mut q = Laurent::zero(m);
    while !r.is_zero() {
        let (e, c) = r.terms().max_by_key(|(e, _)| e[j]).map(|(e, c)| (e.clone(), c.clone()))?;
        if e[j] == 0 {
            return None;
        }
        let mut qe = e;
        qe[j] -= 1;
        let t = Laurent::monomial(qe, c);
        r = &r - &(&t * &lin);
        q = &q + &t;
    }
    Some(q)
}

impl fmt::Display for RatS {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = self.m();
        let names = s_names(m);
        if self.den.is_empty() || self.num.is_zero() {
            return write!(f, "{}", self.num);
        }
        if self.num.0.len() > 1 {
            write!(f, "({})", self.num)?;
        } else {
            write!(f, "{}", self.num)?;
        }
        f.write_str("/")?;
        let facs: Vec<(&LinKey, &u32)> = self.den.iter().rev().collect();
        let simple = |k: &LinKey| k[m].is_zero() && k[..m].iter().filter(|c| !c.is_zero()).count() == 1;
        let single = facs.len() == 1 && (*facs[0].1 == 1 || simple(facs[0].0));
        if !single {
            f.write_str("(")?;
        }
        for (i, (k, &e)) in facs.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            if simple(k) {
                let j = k[..m].iter().position(|c| !c.is_zero()).unwrap_or(0);
                let mut exps = vec![0; m];
                exps[j] = e as i64;
                fmt_monomial(f, &exps, &names)?;
            } else {
                write!(f, "({})", lin_poly(k))?;
                if e > 1 {
                    write!(f, "^{}", e)?;
                }
            }
        }
        if !single {
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::ratio;
    use crate::poly::univariate;
    use crate::ratfun::tests::{arb_cyclo, w};
    use proptest::prelude::*;

    fn s() -> PolyS {
        PolyS::var(1, 0)
    }

    fn c(n: i64) -> PolyS {
        PolyS::constant(1, ratio(n, 1))
    }

    /// `1/∏_{i<d}(s - i)`.
    fn falling(d: i64) -> RatS {
        (0..d).fold(RatS::one(1), |acc, i| acc.div_linear(&s().sub(&c(i))))
    }

    #[test]
    fn binomials() {
        let e = AffineForm::new(0, vec![1]);
        let want = s().mul(&s().add(&c(1))).scale(&ratio(1, 2));
        assert_eq!(binom_poly(&e, 2), want);
        assert_eq!(binom_poly(&e, 0), c(1));
        assert_eq!(binom_poly(&AffineForm::new(2, vec![1]), 1), c(2).sub(&s()));
    }

    #[test]
    fn numerator_series_examples() {
        let g = w("1 - X^-1").numerator().clone();
        let ser = numerator_series(&g, 2);
        assert_eq!(ser.coeffs(), &[c(0), c(1), c(-1)]);
        let g = w("1 - Y1").numerator().clone();
        assert_eq!(numerator_series(&g, 1).coeffs(), &[c(0), s()]);
        assert_eq!(numerator_series(&w("1").numerator().clone(), 3).coeffs(), &[c(1), c(0), c(0), c(0)]);
    }

    #[test]
    fn membership_examples() {
        assert_eq!(check_membership(&w("1/(1 - Y1)")), Membership { in_m: false, gap: -1 });
        assert_eq!(check_membership(&w("(1 - X^-1)^2/((1 - Y1)*(1 - X*Y1))")), Membership { in_m: true, gap: 0 });
        assert_eq!(check_membership(&w("(1 - Y1)/(1 - X*Y1)")), Membership { in_m: true, gap: 0 });
        assert_eq!(check_membership(&w("(1 - Y1)^2/(1 - X*Y1)")), Membership { in_m: true, gap: 1 });
        assert_eq!(red(&w("1/(1 - Y1)")), Err(MringError::NotInM { gap: -1 }));
    }

    #[test]
    fn red_examples() {
        let h = red(&w("(1 - Y1)/(1 - X*Y1)")).unwrap();
        assert_eq!(h, RatS::from_poly(s()).div_linear(&s().sub(&c(1))));
        assert_eq!(h.to_string(), "s1/(s1 - 1)");
        assert_eq!(red(&w("(1 - X^-1)/(1 - Y1)")).unwrap().to_string(), "1/s1");
        for d in 1..=5 {
            let den: Vec<String> = (0..d).map(|i| alloc::format!("(1 - X^{}*Y1)", i)).collect();
            let src = alloc::format!("(1 - X^-1)^{}/({})", d, den.join("*"));
            assert_eq!(red(&w(&src)).unwrap(), falling(d));
        }
        assert_eq!(falling(3).to_string(), "1/(s1*(s1 - 1)*(s1 - 2))");
        assert_eq!(red(&w("(1 - Y1)^2/(1 - X*Y1)")).unwrap(), RatS::zero(1));
        assert_eq!(RatS::one(1).div_linear(&s()).div_linear(&s()).to_string(), "1/s1^2");
        let two = CycloRational::parse("(1 - Y1)*(1 - X*Y2)/((1 - X*Y1)*(1 - Y1*Y2))", 2).unwrap();
        let r = red(&two).unwrap();
        assert_eq!(r.to_string(), "(s1*s2 - s1)/((s1 + s2)*(s1 - 1))");
        let pt = [ratio(3, 1), ratio(5, 1)];
        // s1(s2 - 1) / ((s1 - 1)(s1 + s2))
        assert_eq!(r.eval(&pt), Some(ratio(3 * 4, 2 * 8)));
    }

    #[test]
    fn rat_s_is_cancelled() {
        let a = RatS::from_poly(s().mul(&s().sub(&c(1)))).div_linear(&s().sub(&c(1)));
        assert_eq!(a, RatS::from_poly(s()));
        let b = RatS::one(1).div_linear(&s().scale(&ratio(-3, 1)));
        assert_eq!(b.to_string(), "-1/3/s1");
        assert_eq!(b.add(&b.neg()), RatS::zero(1));
    }

    /// `lim_{X→1}` of `W(X, X^{-σ})` for integer `σ`, by stripping factors of
    /// `X - 1` from numerator and denominator polynomials.
    fn limit_at_one(wr: &CycloRational, sigma: i64) -> Option<BigRational> {
        let num = wr.numerator().map_monomials_into(1, |e| vec![e[0] - sigma * e[1]]);
        let den = wr.den_laurent().map_monomials_into(1, |e| vec![e[0] - sigma * e[1]]);
        let shift = num.min_exponent(0).min(den.min_exponent(0)).min(0);
        let to_dense = |p: &Laurent| univariate::dense(&p.mul_monomial(&[-shift], &ratio(1, 1)), 0).unwrap();
        let (mut n, mut d) = (to_dense(&num), to_dense(&den));
        let xm1 = [ratio(-1, 1), ratio(1, 1)];
        let strip = |p: &mut Vec<BigRational>| {
            let mut v = 0;
            while p.iter().any(|c| !c.is_zero()) {
                let (q, r) = univariate::divrem(p, &xm1);
                if !r.is_empty() {
                    break;
                }
                *p = q;
                v += 1;
            }
            v
        };
        if d.iter().all(|c| c.is_zero()) {
            return None;
        }
        if n.iter().all(|c| c.is_zero()) {
            return Some(BigRational::zero());
        }
        let (vn, vd) = (strip(&mut n), strip(&mut d));
        if vn < vd {
            return None;
        }
        if vn > vd {
            return Some(BigRational::zero());
        }
        let at1 = |p: &[BigRational]| p.iter().fold(BigRational::zero(), |a, c| a + c);
        Some(at1(&n) / at1(&d))
    }

    fn arb_member() -> impl Strategy<Value = CycloRational> {
        // multiply by (1 - X^-1)^k to push the valuation up to the factor count
        arb_cyclo(1).prop_map(|w0| {
            let k = w0.den_size();
            w0.mul(&w("1 - X^-1").pow(k))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]
        #[test]
        fn red_is_multiplicative_and_additive(a in arb_member(), b in arb_member()) {
            let (ra, rb) = (red(&a).unwrap(), red(&b).unwrap());
            prop_assert_eq!(red(&a.mul(&b)).unwrap(), ra.mul(&rb));
            prop_assert_eq!(red(&a.add(&b)).unwrap(), ra.add(&rb));
        }

        #[test]
        fn red_matches_limit_at_integer_points(a in arb_member(), sigma in -3i64..=6) {
            let r = red(&a).unwrap();
            // a factor with e(σ) = 0 makes the substitution undefined
            prop_assume!(a.denominator().keys().all(|f| f.a - f.b[0] * sigma != 0));
            if let Some(v) = r.eval(&[ratio(sigma, 1)]) {
                prop_assert_eq!(limit_at_one(&a, sigma), Some(v));
            }
        }

        #[test]
        fn red_is_representation_independent(a in arb_member(), fa in -2i64..=2, fb in -2i64..=2) {
            prop_assume!(fa != 0 || fb != 0);
            let f = CycloRational::inverse_factor(CycloFactor::new(fa, vec![fb]).unwrap());
            let twisted = a.mul(&f).mul_laurent(&f.den_laurent());
            prop_assert!(twisted.equal(&a));
            prop_assert_eq!(red(&twisted).unwrap(), red(&a).unwrap());
        }
    }
}
