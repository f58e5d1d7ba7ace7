//! Rational functions in `X, Y_1, …, Y_m` whose denominators are products of
//! cyclotomic factors `1 - X^a Y^b`, and their specialisations `X = p^f`.
//!
//! W-grammar: any expression in `X`, `Y1 … Ym` built from integers, `+ - *`,
//! `^` and `/`, where every divisor is a product of monomials and binomials
//! of the shape `c·M·(1 - X^a Y^b)`. A bare `Y` stands for `Y1` when `m = 1`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::rpow;
use crate::parse::{invert_monomial, parse_expr, Expr, ExprKind, ParseError};
use crate::poly::{fmt_monomial, univariate, Laurent, TermOrder};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RatError {
    Parse(ParseError),
    /// A factor `1 - X^0 Y^0`, identically zero.
    DegenerateFactor { offset: usize },
    /// A divisor that is not a product of cyclotomic factors and monomials.
    NotCyclotomic { offset: usize },
    ArityMismatch { left: usize, right: usize },
}

impl fmt::Display for RatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RatError::Parse(e) => write!(f, "parse error {}", e),
            RatError::DegenerateFactor { offset } => {
                write!(f, "at offset {}: degenerate factor 1 - X^0*Y^0", offset)
            }
            RatError::NotCyclotomic { offset } => {
                write!(f, "at offset {}: divisor is not a product of factors 1 - X^a*Y^b", offset)
            }
            RatError::ArityMismatch { left, right } => {
                write!(f, "rational functions in {} and {} Y variables", left, right)
            }
        }
    }
}

impl core::error::Error for RatError {}

impl From<ParseError> for RatError {
    fn from(e: ParseError) -> Self {
        RatError::Parse(e)
    }
}

impl RatError {
    pub fn offset(&self) -> Option<usize> {
        match self {
            RatError::Parse(e) => Some(e.offset),
            RatError::DegenerateFactor { offset } | RatError::NotCyclotomic { offset } => Some(*offset),
            RatError::ArityMismatch { .. } => None,
        }
    }
}

/// `1 - X^a Y_1^{b_1} ⋯ Y_m^{b_m}` with `(a, b) ≠ 0`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CycloFactor {
    pub a: i64,
    pub b: Vec<i64>,
}

impl CycloFactor {
    pub fn new(a: i64, b: Vec<i64>) -> Result<Self, RatError> {
        if a == 0 && b.iter().all(|&x| x == 0) {
            return Err(RatError::DegenerateFactor { offset: 0 });
        }
        Ok(CycloFactor { a, b })
    }

    /// Exponent vector over `(X, Y_1, …, Y_m)`.
    pub fn exponents(&self) -> Vec<i64> {
        let mut e = Vec::with_capacity(self.b.len() + 1);
        e.push(self.a);
        e.extend_from_slice(&self.b);
        e
    }

    pub fn as_laurent(&self) -> Laurent {
        let n = self.b.len() + 1;
        &Laurent::one(n) - &Laurent::monomial(self.exponents(), BigRational::one())
    }
}

pub(crate) fn var_names(m: usize) -> Vec<String> {
    let mut v = vec!["X".to_string()];
    v.extend((1..=m).map(|j| format!("Y{}", j)));
    v
}

pub(crate) fn y_names(m: usize) -> Vec<String> {
    (1..=m).map(|j| format!("Y{}", j)).collect()
}

/// `num / ∏ (1 - X^a Y^b)^e`, numerator a Laurent polynomial in
/// `(X, Y_1, …, Y_m)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CycloRational {
    m: usize,
    num: Laurent,
    den: BTreeMap<CycloFactor, u32>,
}

impl CycloRational {
    pub fn new(num: Laurent, den: BTreeMap<CycloFactor, u32>) -> Self {
        let m = num.nvars() - 1;
        let den = den.into_iter().filter(|(_, e)| *e > 0).collect();
        CycloRational { m, num, den }
    }

    pub fn from_laurent(num: Laurent) -> Self {
        Self::new(num, BTreeMap::new())
    }

    pub fn zero(m: usize) -> Self {
        Self::from_laurent(Laurent::zero(m + 1))
    }

    pub fn one(m: usize) -> Self {
        Self::from_laurent(Laurent::one(m + 1))
    }

    pub fn constant(m: usize, c: BigRational) -> Self {
        Self::from_laurent(Laurent::constant(m + 1, c))
    }

    /// `X^a Y^b` with coefficient `c`.
    pub fn monomial(a: i64, b: Vec<i64>, c: BigRational) -> Self {
        let mut e = vec![a];
        e.extend(b);
        Self::from_laurent(Laurent::monomial(e, c))
    }

    /// `1 / (1 - X^a Y^b)`.
    pub fn inverse_factor(f: CycloFactor) -> Self {
        let m = f.b.len();
        let mut den = BTreeMap::new();
        den.insert(f, 1);
        CycloRational { m, num: Laurent::one(m + 1), den }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn numerator(&self) -> &Laurent {
        &self.num
    }

    pub fn denominator(&self) -> &BTreeMap<CycloFactor, u32> {
        &self.den
    }

    /// Number of denominator factors counted with multiplicity.
    pub fn den_size(&self) -> u32 {
        self.den.values().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// The product of the denominator factors as a Laurent polynomial.
    pub fn den_laurent(&self) -> Laurent {
        let mut acc = Laurent::one(self.m + 1);
        for (f, &e) in &self.den {
            acc = &acc * &f.as_laurent().pow(e);
        }
        acc
    }

    fn extra_factors(&self, target: &BTreeMap<CycloFactor, u32>) -> Laurent {
        let mut acc = Laurent::one(self.m + 1);
        for (f, &e) in target {
            let have = self.den.get(f).copied().unwrap_or(0);
            if e > have {
                acc = &acc * &f.as_laurent().pow(e - have);
            }
        }
        acc
    }

    /// Sum over the least common multiple of the two denominators.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.m, other.m, "arity mismatch");
        let mut den = self.den.clone();
        for (f, &e) in &other.den {
            let slot = den.entry(f.clone()).or_insert(0);
            *slot = (*slot).max(e);
        }
        let n1 = &self.num * &self.extra_factors(&den);
        let n2 = &other.num * &other.extra_factors(&den);
        CycloRational { m: self.m, num: &n1 + &n2, den }
    }

    /// Sum over the union (multiset sum) of the two denominators.
    pub fn add_union(&self, other: &Self) -> Self {
        assert_eq!(self.m, other.m, "arity mismatch");
        let mut den = self.den.clone();
        for (f, &e) in &other.den {
            *den.entry(f.clone()).or_insert(0) += e;
        }
        let n1 = &self.num * &other.den_laurent();
        let n2 = &other.num * &self.den_laurent();
        CycloRational { m: self.m, num: &n1 + &n2, den }
    }

    pub fn neg(&self) -> Self {
        CycloRational { m: self.m, num: -&self.num, den: self.den.clone() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.m, other.m, "arity mismatch");
        let mut den = self.den.clone();
        for (f, &e) in &other.den {
            *den.entry(f.clone()).or_insert(0) += e;
        }
        CycloRational { m: self.m, num: &self.num * &other.num, den }
    }

    pub fn mul_laurent(&self, p: &Laurent) -> Self {
        CycloRational { m: self.m, num: &self.num * p, den: self.den.clone() }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        CycloRational { m: self.m, num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(self.m), |acc, _| acc.mul(self))
    }

    /// `W(X^{-1}, Y_1^{-1}, …)`, using
    /// `1/(1 - X^{-a}Y^{-b}) = -X^a Y^b / (1 - X^a Y^b)`.
    pub fn invert_vars(&self) -> Self {
        let mut num = self.num.invert_vars();
        for (f, &e) in &self.den {
            let mono = Laurent::monomial(f.exponents(), -BigRational::one());
            num = &num * &mono.pow(e);
        }
        CycloRational { m: self.m, num, den: self.den.clone() }
    }

    /// Equality as rational functions, by cross-multiplication.
    pub fn equal(&self, other: &Self) -> bool {
        if self.m != other.m {
            return false;
        }
        let mut den = self.den.clone();
        for (f, &e) in &other.den {
            let slot = den.entry(f.clone()).or_insert(0);
            *slot = (*slot).max(e);
        }
        &self.num * &self.extra_factors(&den) == &other.num * &other.extra_factors(&den)
    }

    /// Specialises `X = p^f`.
    pub fn substitute(&self, p: u64, f: i64) -> YRational {
        let x = rpow(&BigRational::from_integer(BigInt::from(p)), f);
        self.substitute_x(&x)
    }

    /// Specialises `X = x`; `x` must not be a root of unity.
    pub fn substitute_x(&self, x: &BigRational) -> YRational {
        let num = self.num.specialize(0, x);
        let mut out = YRational::from_laurent(num);
        for (fac, &e) in &self.den {
            let c = rpow(x, fac.a);
            for _ in 0..e {
                out = out.div_factor(YFactor { c: c.clone(), b: fac.b.clone() });
            }
        }
        out
    }

    /// Value at a point, `None` at a pole.
    pub fn eval(&self, x: &BigRational, ys: &[BigRational]) -> Option<BigRational> {
        let mut pt = vec![x.clone()];
        pt.extend_from_slice(ys);
        let mut den = BigRational::one();
        for (f, &e) in &self.den {
            let v = BigRational::one() - Laurent::monomial(f.exponents(), BigRational::one()).eval(&pt);
            den *= rpow(&v, e as i64);
        }
        if den.is_zero() {
            return None;
        }
        Some(self.num.eval(&pt) / den)
    }

    /// Parses the W-grammar with `m` Y variables.
    pub fn parse(src: &str, m: usize) -> Result<Self, RatError> {
        let expr = parse_expr(src)?;
        interpret(&expr, m)
    }

    pub fn display(&self) -> CycloDisplay<'_> {
        CycloDisplay { w: self }
    }
}

impl fmt::Display for CycloRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = var_names(self.m);
        let factors: Vec<(Vec<i64>, BigRational, u32)> =
            self.den.iter().map(|(fac, &e)| (fac.exponents(), BigRational::one(), e)).collect();
        write_fraction(f, &self.num, &names, &factors)
    }
}

pub struct CycloDisplay<'a> {
    w: &'a CycloRational,
}

impl fmt::Display for CycloDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self.w, f)
    }
}

/// `num/(1 - c1*M1)^e1*…` in the shared output format.
fn write_fraction(
    f: &mut fmt::Formatter<'_>,
    num: &Laurent,
    names: &[String],
    factors: &[(Vec<i64>, BigRational, u32)],
) -> fmt::Result {
    if factors.is_empty() || num.is_zero() {
        return write!(f, "{}", num.display(names, TermOrder::Ascending));
    }
    if num.len() > 1 {
        write!(f, "({})", num.display(names, TermOrder::Ascending))?;
    } else {
        write!(f, "{}", num.display(names, TermOrder::Ascending))?;
    }
    f.write_str("/")?;
    let single = factors.len() == 1;
    if !single {
        f.write_str("(")?;
    }
    for (i, (exps, c, e)) in factors.iter().enumerate() {
        if i > 0 {
            f.write_str("*")?;
        }
        f.write_str("(1 - ")?;
        if !c.is_one() {
            write!(f, "{}", c)?;
            if exps.iter().any(|&x| x != 0) {
                f.write_str("*")?;
            }
        }
        fmt_monomial(f, exps, names)?;
        f.write_str(")")?;
        if *e > 1 {
            write!(f, "^{}", e)?;
        }
    }
    if !single {
        f.write_str(")")?;
    }
    Ok(())
}

fn interpret(expr: &Expr, m: usize) -> Result<CycloRational, RatError> {
    let n = m + 1;
    let resolve = |name: &str| -> Option<usize> {
        if name == "X" {
            return Some(0);
        }
        if name == "Y" && m == 1 {
            return Some(1);
        }
        let j: usize = name.strip_prefix('Y')?.parse().ok()?;
        (1..=m).contains(&j).then_some(j)
    };
    Ok(match &expr.kind {
        ExprKind::Num(_) | ExprKind::Var(_) => CycloRational::from_laurent(expr.to_laurent(n, &resolve)?),
        ExprKind::Add(a, b) => interpret(a, m)?.add(&interpret(b, m)?),
        ExprKind::Sub(a, b) => interpret(a, m)?.sub(&interpret(b, m)?),
        ExprKind::Mul(a, b) => interpret(a, m)?.mul(&interpret(b, m)?),
        ExprKind::Neg(a) => interpret(a, m)?.neg(),
        ExprKind::Pow(a, k) if *k >= 0 => interpret(a, m)?.pow(*k as u32),
        ExprKind::Pow(..) | ExprKind::Div(..) => {
            let (num, den, k) = match &expr.kind {
                ExprKind::Div(a, b) => (interpret(a, m)?, &**b, 1),
                ExprKind::Pow(a, k) => (CycloRational::one(m), &**a, k.unsigned_abs() as u32),
                _ => unreachable!(),
            };
            let (mono, factors) = divisor(den, m, &resolve)?;
            let mono = mono.pow(k);
            let factors: Vec<(CycloFactor, u32)> = factors.into_iter().map(|(f, e)| (f, e * k)).collect();
            let mut out = num.mul_laurent(&mono);
            for (fac, e) in factors {
                let mut d = BTreeMap::new();
                d.insert(fac, e);
                out = out.mul(&CycloRational { m, num: Laurent::one(n), den: d });
            }
            out
        }
    })
}

/// Reads a divisor as `c·M·∏(1 - X^a Y^b)^e`; returns `1/(c·M)` and the factors.
type Divisor = (Laurent, Vec<(CycloFactor, u32)>);

fn divisor(expr: &Expr, m: usize, resolve: &dyn Fn(&str) -> Option<usize>) -> Result<Divisor, RatError> {
    let n = m + 1;
    match &expr.kind {
        ExprKind::Mul(a, b) => {
            let (ma, mut fa) = divisor(a, m, resolve)?;
            let (mb, fb) = divisor(b, m, resolve)?;
            fa.extend(fb);
            Ok((&ma * &mb, fa))
        }
        ExprKind::Pow(a, k) => {
            let (ma, fa) = divisor(a, m, resolve)?;
            if *k >= 0 {
                let k = *k as u32;
                Ok((ma.pow(k), fa.into_iter().map(|(f, e)| (f, e * k)).collect()))
            } else if fa.is_empty() {
                // dividing by M^-k multiplies by M^k
                let inv = invert_monomial(&ma).ok_or(RatError::NotCyclotomic { offset: expr.pos })?;
                Ok((inv.pow(k.unsigned_abs() as u32), Vec::new()))
            } else {
                Err(RatError::NotCyclotomic { offset: expr.pos })
            }
        }
        _ => {
            let p = expr.to_laurent(n, resolve)?;
            let at = leftmost(expr);
            if p.is_zero() {
                return Err(RatError::DegenerateFactor { offset: at });
            }
            if let Some(inv) = invert_monomial(&p) {
                return Ok((inv, Vec::new()));
            }
            if p.len() != 2 {
                return Err(RatError::NotCyclotomic { offset: at });
            }
            // u + v = u (1 - X^a Y^b) with X^a Y^b = -v/u; u is the constant
            // term when present, else the first term in ascending order
            let ts = p.sorted_terms(TermOrder::Ascending);
            let (ue, uc) = ts[0];
            let (ve, vc) = ts[1];
            if (-vc / uc) != BigRational::one() {
                return Err(RatError::NotCyclotomic { offset: at });
            }
            let exps: Vec<i64> = ve.iter().zip(ue).map(|(v, u)| v - u).collect();
            let fac = CycloFactor::new(exps[0], exps[1..].to_vec()).map_err(|_| RatError::DegenerateFactor { offset: at })?;
            let inv_u = Laurent::monomial(ue.iter().map(|x| -x).collect(), BigRational::one() / uc);
            Ok((inv_u, vec![(fac, 1)]))
        }
    }
}

fn leftmost(e: &Expr) -> usize {
    match &e.kind {
        ExprKind::Num(_) | ExprKind::Var(_) => e.pos,
        ExprKind::Add(a, b) | ExprKind::Sub(a, b) | ExprKind::Mul(a, b) | ExprKind::Div(a, b) => {
            e.pos.min(leftmost(a)).min(leftmost(b))
        }
        ExprKind::Neg(a) | ExprKind::Pow(a, _) => e.pos.min(leftmost(a)),
    }
}

/// `1 - c·Y^b`, oriented so that the first nonzero entry of `b` is positive.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YFactor {
    pub c: BigRational,
    pub b: Vec<i64>,
}

impl YFactor {
    pub fn as_laurent(&self) -> Laurent {
        &Laurent::one(self.b.len()) - &Laurent::monomial(self.b.clone(), self.c.clone())
    }
}

/// A rational function in `Y_1, …, Y_m` with denominator a product of
/// factors `1 - c·Y^b`, `b ≠ 0`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YRational {
    num: Laurent,
    den: BTreeMap<YFactor, u32>,
}

impl YRational {
    pub fn from_laurent(num: Laurent) -> Self {
        YRational { num, den: BTreeMap::new() }
    }

    pub fn zero(m: usize) -> Self {
        Self::from_laurent(Laurent::zero(m))
    }

    pub fn constant(m: usize, c: BigRational) -> Self {
        Self::from_laurent(Laurent::constant(m, c))
    }

    pub fn m(&self) -> usize {
        self.num.nvars()
    }

    pub fn numerator(&self) -> &Laurent {
        &self.num
    }

    pub fn denominator(&self) -> &BTreeMap<YFactor, u32> {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// The value when the function is a constant.
    pub fn as_constant(&self) -> Option<BigRational> {
        if self.num.is_zero() {
            return Some(BigRational::zero());
        }
        if self.den.is_empty() {
            self.num.as_constant()
        } else {
            None
        }
    }

    /// Divides by `1 - c·Y^b`, normalising the orientation. `b = 0` with
    /// `c ≠ 1` folds into the numerator.
    pub fn div_factor(&self, fac: YFactor) -> Self {
        let m = self.m();
        if fac.b.iter().all(|&x| x == 0) {
            let s = BigRational::one() - &fac.c;
            assert!(!s.is_zero(), "division by zero constant factor");
            return YRational { num: self.num.scale(&(BigRational::one() / s)), den: self.den.clone() };
        }
        let mut num = self.num.clone();
        let first = fac.b.iter().copied().find(|&x| x != 0).unwrap_or(0);
        let fac = if first < 0 {
            // 1/(1 - cY^b) = -c^{-1} Y^{-b} / (1 - c^{-1} Y^{-b})
            let neg_b: Vec<i64> = fac.b.iter().map(|x| -x).collect();
            let cinv = BigRational::one() / &fac.c;
            num = num.mul_monomial(&neg_b, &-&cinv);
            YFactor { c: cinv, b: neg_b }
        } else {
            fac
        };
        debug_assert_eq!(num.nvars(), m);
        let mut den = self.den.clone();
        *den.entry(fac).or_insert(0) += 1;
        YRational { num, den }.cancel()
    }

    /// Removes denominator factors dividing the numerator (one variable only).
    fn cancel(mut self) -> Self {
        if self.m() != 1 {
            return self;
        }
        let shift = self.num.min_exponent(0).min(0);
        let shifted = self.num.mul_monomial(&[-shift], &BigRational::one());
        let Some(mut dense) = univariate::dense(&shifted, 0) else {
            return self;
        };
        let facs: Vec<YFactor> = self.den.keys().cloned().collect();
        for fac in facs {
            let fd = univariate::dense(&fac.as_laurent(), 0).unwrap_or_default();
            loop {
                if dense.iter().all(|c| c.is_zero()) || self.den.get(&fac).copied().unwrap_or(0) == 0 {
                    break;
                }
                let (q, r) = univariate::divrem(&dense, &fd);
                if !r.is_empty() {
                    break;
                }
                dense = q;
                let e = self.den.get_mut(&fac).expect("factor present");
                *e -= 1;
                if *e == 0 {
                    self.den.remove(&fac);
                }
            }
        }
        let num = univariate::sparse(&dense, 1, 0).mul_monomial(&[shift], &BigRational::one());
        self.num = num;
        self
    }

    pub fn den_laurent(&self) -> Laurent {
        let mut acc = Laurent::one(self.m());
        for (f, &e) in &self.den {
            acc = &acc * &f.as_laurent().pow(e);
        }
        acc
    }

    fn extra_factors(&self, target: &BTreeMap<YFactor, u32>) -> Laurent {
        let mut acc = Laurent::one(self.m());
        for (f, &e) in target {
            let have = self.den.get(f).copied().unwrap_or(0);
            if e > have {
                acc = &acc * &f.as_laurent().pow(e - have);
            }
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut den = self.den.clone();
        for (f, &e) in &other.den {
            let slot = den.entry(f.clone()).or_insert(0);
            *slot = (*slot).max(e);
        }
        let n1 = &self.num * &self.extra_factors(&den);
        let n2 = &other.num * &other.extra_factors(&den);
        let num = &n1 + &n2;
        if num.is_zero() {
            return YRational::zero(self.m());
        }
        YRational { num, den }.cancel()
    }

    pub fn neg(&self) -> Self {
        YRational { num: -&self.num, den: self.den.clone() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut den = self.den.clone();
        for (f, &e) in &other.den {
            *den.entry(f.clone()).or_insert(0) += e;
        }
        let num = &self.num * &other.num;
        if num.is_zero() {
            return YRational::zero(self.m());
        }
        YRational { num, den }.cancel()
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return YRational::zero(self.m());
        }
        YRational { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn mul_monomial(&self, exps: &[i64], c: &BigRational) -> Self {
        if c.is_zero() {
            return YRational::zero(self.m());
        }
        YRational { num: self.num.mul_monomial(exps, c), den: self.den.clone() }.cancel()
    }

    /// `Y_j ↦ Y_j^{-1}` for every `j`.
    pub fn invert_y(&self) -> Self {
        let mut out = YRational::from_laurent(self.num.invert_vars());
        for (f, &e) in &self.den {
            let flipped: Vec<i64> = f.b.iter().map(|x| -x).collect();
            for _ in 0..e {
                out = out.div_factor(YFactor { c: f.c.clone(), b: flipped.clone() });
            }
        }
        out
    }

    /// Equality as rational functions.
    pub fn equal(&self, other: &Self) -> bool {
        if self.m() != other.m() {
            return false;
        }
        let mut den = self.den.clone();
        for (f, &e) in &other.den {
            let slot = den.entry(f.clone()).or_insert(0);
            *slot = (*slot).max(e);
        }
        &self.num * &self.extra_factors(&den) == &other.num * &other.extra_factors(&den)
    }

    /// Value at a point, `None` at a pole.
    pub fn eval(&self, ys: &[BigRational]) -> Option<BigRational> {
        let mut den = BigRational::one();
        for (f, &e) in &self.den {
            let v = f.as_laurent().eval(ys);
            den *= rpow(&v, e as i64);
        }
        if den.is_zero() {
            return None;
        }
        Some(self.num.eval(ys) / den)
    }

    /// Power-series coefficients of `Y^0 … Y^kmax` (one variable, numerator
    /// without negative powers).
    pub fn series(&self, kmax: usize) -> Option<Vec<BigRational>> {
        if self.m() != 1 || !self.num.is_polynomial() {
            return None;
        }
        let mut coeffs = vec![BigRational::zero(); kmax + 1];
        for (e, c) in self.num.terms() {
            if (e[0] as usize) <= kmax {
                coeffs[e[0] as usize] = c.clone();
            }
        }
        for (f, &mult) in &self.den {
            let b = f.b[0] as usize;
            for _ in 0..mult {
                // multiply by Σ c^n Y^{bn}: out[k] = in[k] + c·out[k-b]
                for k in b..=kmax {
                    let prev = &coeffs[k - b] * &f.c;
                    coeffs[k] += prev;
                }
            }
        }
        Some(coeffs)
    }
}

impl fmt::Display for YRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = y_names(self.m());
        let factors: Vec<(Vec<i64>, BigRational, u32)> =
            self.den.iter().map(|(fac, &e)| (fac.b.clone(), fac.c.clone(), e)).collect();
        write_fraction(f, &self.num, &names, &factors)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::arith::ratio;
    use proptest::prelude::*;

    pub(crate) fn w(s: &str) -> CycloRational {
        CycloRational::parse(s, 1).unwrap()
    }

    #[test]
    fn parse_and_print() {
        let h = w("(1 - Y1) / (1 - X*Y1)");
        assert_eq!(h.den_size(), 1);
        assert_eq!(h.to_string(), "(1 - Y1)/(1 - X*Y1)");
        let a3 = w("1 / ((1 - Y1)*(1 - X*Y1)*(1 - X^2*Y1))");
        assert_eq!(a3.to_string(), "1/((1 - Y1)*(1 - X*Y1)*(1 - X^2*Y1))");
        let sq = w("(1 - X^-1)^2/(1 - Y1)^2");
        assert_eq!(sq.to_string(), "(X^-2 - 2*X^-1 + 1)/(1 - Y1)^2");
        assert_eq!(w("X - 1").to_string(), "-1 + X");
        let e = CycloRational::parse("1 / (1 - X^0*Y1^0)", 1).unwrap_err();
        assert!(matches!(e, RatError::DegenerateFactor { .. }), "{:?}", e);
        assert_eq!(e.offset(), Some(5));
        assert!(matches!(CycloRational::parse("1 / (1 - 2*Y1)", 1), Err(RatError::NotCyclotomic { .. })));
        assert!(matches!(CycloRational::parse("1 / (1 - Y2)", 1), Err(RatError::Parse(_))));
    }

    #[test]
    fn binomial_divisors_are_normalised() {
        // X - 1 = -(1 - X); 1/(X*Y - 1) = -1/(1 - X*Y)
        assert!(w("1/(X - 1)").equal(&w("-1/(1 - X)")));
        assert!(w("Y/(Y - X*Y^2)").equal(&w("1/(1 - X*Y)")));
        assert!(w("1/(2*X^2)").equal(&w("X^-2/2")));
    }

    #[test]
    fn substitution_examples() {
        let h = w("(1 - Y1)/(1 - X*Y1)");
        assert_eq!(h.substitute(5, 1).to_string(), "(1 - Y1)/(1 - 5*Y1)");
        assert_eq!(h.substitute(5, -1).to_string(), "(1 - Y1)/(1 - 1/5*Y1)");
        let a2 = w("1/((1 - Y1)*(1 - X*Y1))");
        assert_eq!(a2.substitute(3, 2).to_string(), "1/((1 - Y1)*(1 - 9*Y1))");
    }

    #[test]
    fn inversion_examples() {
        let h = w("(1 - Y1)/(1 - X*Y1)");
        assert!(h.invert_vars().equal(&w("X*(1 - Y1)/(1 - X*Y1)")));
        let a2 = w("1/((1 - Y1)*(1 - X*Y1))");
        assert!(a2.invert_vars().equal(&w("X*Y1^2/((1 - Y1)*(1 - X*Y1))")));
        assert!(CycloRational::one(1).invert_vars().equal(&CycloRational::one(1)));
    }

    #[test]
    fn equality_ignores_common_factors() {
        let a = w("(1 - Y1)/(1 - X*Y1)");
        assert!(a.equal(&w("((1 - Y1)*(1 - X^2*Y1))/((1 - X*Y1)*(1 - X^2*Y1))")));
        assert!(!a.equal(&w("(1 - Y1)/(1 - X^2*Y1)")));
    }

    #[test]
    fn y_rational_cancellation_and_series() {
        let r = w("((1 - Y1)*(1 - X^2*Y1))/((1 - X*Y1)*(1 - X^2*Y1))").substitute(5, 1);
        assert_eq!(r.to_string(), "(1 - Y1)/(1 - 5*Y1)");
        let a2 = w("1/((1 - Y1)*(1 - X*Y1))").substitute(3, 1);
        let s = a2.series(3).unwrap();
        assert_eq!(s, [ratio(1, 1), ratio(4, 1), ratio(13, 1), ratio(40, 1)]);
        // negative orientation flips into the numerator
        let inv = r.invert_y();
        assert!(inv.equal(&w("(1 - Y1)/(1 - X*Y1)").invert_vars().substitute(5, -1)));
        assert_eq!(w("1/(1 - X)").substitute(3, 1).to_string(), "-1/2");
    }

    /// Random cyclotomic rational function in one or two Y variables.
    pub(crate) fn arb_cyclo(m: usize) -> impl Strategy<Value = CycloRational> {
        let exps = proptest::collection::vec(-2i64..=2, m + 1);
        let term = (-3i64..=3, exps.clone());
        let num = proptest::collection::vec(term, 1..4);
        let fac = (exps, 1u32..=2);
        let den = proptest::collection::vec(fac, 0..3);
        (num, den).prop_map(move |(ts, fs)| {
            let mut n = Laurent::zero(m + 1);
            for (c, e) in ts {
                n.add_term(e, ratio(c, 1));
            }
            let mut d = BTreeMap::new();
            for (e, k) in fs {
                if let Ok(f) = CycloFactor::new(e[0], e[1..].to_vec()) {
                    *d.entry(f).or_insert(0) += k;
                }
            }
            CycloRational::new(n, d)
        })
    }

    fn grid_points() -> Vec<(u64, i64)> {
        vec![(2, 1), (3, 1), (5, 2), (2, -1), (3, -2)]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]
        #[test]
        fn invert_vars_is_an_involution(a in arb_cyclo(1), b in arb_cyclo(2)) {
            prop_assert!(a.invert_vars().invert_vars().equal(&a));
            prop_assert!(b.invert_vars().invert_vars().equal(&b));
        }

        #[test]
        fn printing_round_trips(a in arb_cyclo(1), b in arb_cyclo(2)) {
            prop_assert!(CycloRational::parse(&a.to_string(), 1).unwrap().equal(&a));
            prop_assert!(CycloRational::parse(&b.to_string(), 2).unwrap().equal(&b));
        }

        #[test]
        fn substitution_is_a_homomorphism(a in arb_cyclo(1), b in arb_cyclo(1)) {
            for (p, f) in grid_points() {
                let (sa, sb) = (a.substitute(p, f), b.substitute(p, f));
                prop_assert!(a.mul(&b).substitute(p, f).equal(&sa.mul(&sb)));
                prop_assert!(a.add(&b).substitute(p, f).equal(&sa.add(&sb)));
                prop_assert!(a.add_union(&b).substitute(p, f).equal(&sa.add(&sb)));
            }
        }

        #[test]
        fn inversion_matches_negative_substitution(a in arb_cyclo(1), b in arb_cyclo(2)) {
            for (p, f) in grid_points() {
                prop_assert!(a.invert_vars().substitute(p, f).equal(&a.substitute(p, -f).invert_y()));
                prop_assert!(b.invert_vars().substitute(p, f).equal(&b.substitute(p, -f).invert_y()));
            }
        }

        #[test]
        fn equality_agrees_with_evaluation(a in arb_cyclo(1), b in arb_cyclo(1)) {
            let pts = [(ratio(2, 1), ratio(3, 7)), (ratio(5, 3), ratio(-2, 1)), (ratio(7, 1), ratio(1, 11))];
            let mut same = true;
            for (x, y) in &pts {
                if let (Some(u), Some(v)) = (a.eval(x, core::slice::from_ref(y)), b.eval(x, core::slice::from_ref(y))) { same &= u == v }
            }
            if a.equal(&b) {
                prop_assert!(same);
            }
            prop_assert!(a.equal(&a.add(&b).sub(&b)));
        }
    }
}
