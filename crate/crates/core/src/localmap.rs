//! Local maps of Denef type: formulas `Σ [V_i · W_i]` and their evaluation.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::arith::{is_prime, rpow};
use crate::geom::{ConstructibleSet, GeomError};
use crate::memo::Memo;
use crate::mring::{self, RatS};
use crate::poly::Laurent;
use crate::ratfun::{CycloRational, YRational};
use crate::weil::{self, FitOptions, SpectralTerm, WeilError, WeilModel};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LocalMapError {
    MixedArity { term: usize, expected: usize, found: usize },
    ExcludedPrime(u64),
    NotPrime(u64),
    ZeroDegree,
    Geom(GeomError),
    /// Weil-model failure for the set of term `term`.
    Weil { term: usize, err: WeilError },
    NotInM { term: usize, gap: i64 },
    PoleAt(Vec<BigRational>),
}

impl fmt::Display for LocalMapError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LocalMapError::MixedArity { term, expected, found } => {
                write!(f, "term {} has {} Y variables, expected {}", term + 1, found, expected)
            }
            LocalMapError::ExcludedPrime(p) => write!(f, "prime {} is excluded", p),
            LocalMapError::NotPrime(p) => write!(f, "{} is not prime", p),
            LocalMapError::ZeroDegree => f.write_str("extension degree must be nonzero"),
            LocalMapError::Geom(e) => write!(f, "{}", e),
            LocalMapError::Weil { term, err } => write!(f, "term {}: {}", term + 1, err),
            LocalMapError::NotInM { term, gap } => {
                write!(f, "term {}: W is not in M (valuation gap {})", term + 1, gap)
            }
            LocalMapError::PoleAt(s) => {
                f.write_str("pole at s = (")?;
                for (i, x) in s.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{}", x)?;
                }
                f.write_str(")")
            }
        }
    }
}

impl core::error::Error for LocalMapError {}

impl From<GeomError> for LocalMapError {
    fn from(e: GeomError) -> Self {
        LocalMapError::Geom(e)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub set: ConstructibleSet,
    pub w: CycloRational,
}

impl Term {
    pub fn new(set: ConstructibleSet, w: CycloRational) -> Self {
        Term { set, w }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalMapFormula {
    m: usize,
    terms: Vec<Term>,
    excluded: BTreeSet<u64>,
}

impl LocalMapFormula {
    pub fn new(terms: Vec<Term>, m: usize, excluded: impl IntoIterator<Item = u64>) -> Result<Self, LocalMapError> {
        for (i, t) in terms.iter().enumerate() {
            if t.w.m() != m {
                return Err(LocalMapError::MixedArity { term: i, expected: m, found: t.w.m() });
            }
        }
        Ok(LocalMapFormula { m, terms, excluded: excluded.into_iter().collect() })
    }

    /// The one-term formula `[point · w]`.
    pub fn single(w: CycloRational) -> Self {
        let m = w.m();
        LocalMapFormula { m, terms: vec![Term::new(ConstructibleSet::point(), w)], excluded: BTreeSet::new() }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn excluded_primes(&self) -> &BTreeSet<u64> {
        &self.excluded
    }

    pub fn is_excluded(&self, p: u64) -> bool {
        self.excluded.contains(&p)
    }

    /// Pointwise sum: concatenated terms, united exclusions.
    pub fn sum(&self, other: &Self) -> Result<Self, LocalMapError> {
        if self.m != other.m {
            return Err(LocalMapError::MixedArity { term: self.terms.len(), expected: self.m, found: other.m });
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(LocalMapFormula { m: self.m, terms, excluded: self.excluded.union(&other.excluded).copied().collect() })
    }

    /// Multiplies every `W_i` by `c`.
    pub fn scale(&self, c: &BigRational) -> Self {
        let terms = self.terms.iter().map(|t| Term::new(t.set.clone(), t.w.scale(c))).collect();
        LocalMapFormula { m: self.m, terms, excluded: self.excluded.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvaluatorOptions {
    pub fit: FitOptions,
    /// Sample primes for Euler characteristics and uniformity.
    pub sample_primes: Vec<u64>,
}

impl Default for EvaluatorOptions {
    fn default() -> Self {
        EvaluatorOptions { fit: FitOptions::default(), sample_primes: vec![5, 7, 11, 13] }
    }
}

/// Result of [`Evaluator::uniformize`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Uniformity {
    /// A single representative together with the count polynomial per term.
    Uniform { w: CycloRational, counts: Vec<Vec<SpectralTerm>> },
    Absent { term: usize, reason: WeilError },
}

impl Uniformity {
    pub fn representative(&self) -> Option<&CycloRational> {
        match self {
            Uniformity::Uniform { w, .. } => Some(w),
            Uniformity::Absent { .. } => None,
        }
    }

    /// The pair of primes whose counts disagree, if that is why.
    pub fn witness(&self) -> Option<(u64, u64)> {
        match self {
            Uniformity::Absent { reason: WeilError::NonUniformCount { first, second }, .. } => Some((*first, *second)),
            _ => None,
        }
    }
}

/// Value of `Ẑ(p, f)(s)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HatValue {
    Exact(BigRational),
    /// The true value lies in `[lo, hi]`.
    Interval { lo: BigRational, hi: BigRational },
}

impl HatValue {
    pub fn contains(&self, x: &BigRational) -> bool {
        match self {
            HatValue::Exact(v) => v == x,
            HatValue::Interval { lo, hi } => lo <= x && x <= hi,
        }
    }

    pub fn width(&self) -> BigRational {
        match self {
            HatValue::Exact(_) => BigRational::zero(),
            HatValue::Interval { lo, hi } => hi - lo,
        }
    }
}

/// Evaluates formulas, caching one Weil model per `(set, p)`.
pub struct Evaluator {
    opts: EvaluatorOptions,
    models: Memo<(ConstructibleSet, u64), Result<WeilModel, WeilError>>,
}

impl Default for Evaluator {
    fn default() -> Self {
        Self::new(EvaluatorOptions::default())
    }
}

impl Evaluator {
    pub fn new(opts: EvaluatorOptions) -> Self {
        Evaluator { opts, models: Memo::new() }
    }

    pub fn options(&self) -> &EvaluatorOptions {
        &self.opts
    }

    /// Number of cached Weil models.
    pub fn cached_models(&self) -> usize {
        self.models.len()
    }

    fn check_prime(&self, f: &LocalMapFormula, p: u64) -> Result<(), LocalMapError> {
        if !is_prime(p) {
            return Err(LocalMapError::NotPrime(p));
        }
        if f.is_excluded(p) {
            return Err(LocalMapError::ExcludedPrime(p));
        }
        Ok(())
    }

    /// `Σ |V_i(F_{p^f})| · W_i(p^f, Y)`.
    pub fn evaluate(&self, formula: &LocalMapFormula, p: u64, f: u32) -> Result<YRational, LocalMapError> {
        self.check_prime(formula, p)?;
        if f == 0 {
            return Err(LocalMapError::ZeroDegree);
        }
        let mut acc = YRational::zero(formula.m);
        for t in &formula.terms {
            let n = t.set.count_points_with(p, f, &self.opts.fit.count)?;
            if n == 0 {
                continue;
            }
            let c = BigRational::from_integer(BigInt::from(n));
            acc = acc.add(&t.w.substitute(p, f as i64).scale(&c));
        }
        Ok(acc)
    }

    pub fn model(&self, set: &ConstructibleSet, p: u64) -> Result<WeilModel, WeilError> {
        let key = (set.clone(), p);
        if let Some(m) = self.models.get(&key) {
            return m;
        }
        let m = weil::fit_set(set, p, &self.opts.fit);
        self.models.insert(key, m.clone());
        m
    }

    /// `Z_*(p, f)`: for `f < 0` the counts come from the Weil model and `Y`
    /// is replaced by `Y^{-1}`.
    pub fn evaluate_star(&self, formula: &LocalMapFormula, p: u64, f: i64) -> Result<YRational, LocalMapError> {
        if f > 0 {
            return self.evaluate(formula, p, f as u32);
        }
        self.check_prime(formula, p)?;
        if f == 0 {
            return Err(LocalMapError::ZeroDegree);
        }
        let mut acc = YRational::zero(formula.m);
        for (i, t) in formula.terms.iter().enumerate() {
            let n = self
                .model(&t.set, p)
                .and_then(|m| m.extend_count(f))
                .map_err(|err| LocalMapError::Weil { term: i, err })?;
            if n.is_zero() {
                continue;
            }
            acc = acc.add(&t.w.substitute(p, f).invert_y().scale(&n));
        }
        Ok(acc)
    }

    fn sample_primes(&self, formula: &LocalMapFormula) -> Vec<u64> {
        self.opts.sample_primes.iter().copied().filter(|p| !formula.is_excluded(*p)).collect()
    }

    /// `Σ χ(V_i) · red W_i`.
    pub fn topological(&self, formula: &LocalMapFormula) -> Result<RatS, LocalMapError> {
        let mut reds = Vec::with_capacity(formula.terms.len());
        for (i, t) in formula.terms.iter().enumerate() {
            match mring::red(&t.w) {
                Ok(r) => reds.push(r),
                Err(mring::MringError::NotInM { gap }) => return Err(LocalMapError::NotInM { term: i, gap }),
            }
        }
        let primes = self.sample_primes(formula);
        let mut acc = RatS::zero(formula.m);
        for (i, (t, r)) in formula.terms.iter().zip(reds).enumerate() {
            let chi = weil::euler_characteristic(&t.set, &primes, &self.opts.fit)
                .map_err(|err| LocalMapError::Weil { term: i, err })?;
            if chi != 0 {
                acc = acc.add(&r.scale(&BigRational::from_integer(BigInt::from(chi))));
            }
        }
        Ok(acc)
    }

    /// Replaces each count by its uniform polynomial in `X` and sums.
    pub fn uniformize(&self, formula: &LocalMapFormula, primes: &[u64]) -> Uniformity {
        let primes: Vec<u64> = primes.iter().copied().filter(|p| !formula.is_excluded(*p)).collect();
        let n = formula.m + 1;
        let mut acc = CycloRational::zero(formula.m);
        let mut counts = Vec::with_capacity(formula.terms.len());
        for (i, t) in formula.terms.iter().enumerate() {
            let terms = match weil::uniform_polynomial(&t.set, &primes, &self.opts.fit) {
                Ok(ts) => ts,
                Err(reason) => return Uniformity::Absent { term: i, reason },
            };
            let mut poly = Laurent::zero(n);
            for st in &terms {
                let mut e = vec![0; n];
                e[0] = st.j as i64;
                poly.add_term(e, BigRational::from_integer(BigInt::from(st.m)));
            }
            if !poly.is_zero() {
                acc = acc.add(&t.w.mul_laurent(&poly));
            }
            counts.push(terms);
        }
        Uniformity::Uniform { w: acc, counts }
    }

    /// `Z(p, f)` at `Y_j = p^{-f s_j}`. Integer `s` gives an exact value;
    /// otherwise an interval of width at most `2^-bits` is returned.
    pub fn numeric_hat_eval(
        &self,
        formula: &LocalMapFormula,
        p: u64,
        f: u32,
        s: &[BigRational],
        bits: u32,
    ) -> Result<HatValue, LocalMapError> {
        assert_eq!(s.len(), formula.m, "one exponent per Y variable");
        let z = self.evaluate(formula, p, f)?;
        let pole = || LocalMapError::PoleAt(s.to_vec());
        let base = BigRational::from_integer(BigInt::from(p));
        if s.iter().all(|x| x.is_integer()) {
            let ys: Vec<BigRational> = s.iter().map(|x| rpow(&base, -(f as i64) * to_small(x))).collect();
            return z.eval(&ys).map(HatValue::Exact).ok_or_else(pole);
        }
        let target = BigRational::new(BigInt::one(), BigInt::one() << bits as usize);
        let mut work = bits + 16;
        let mut last = None;
        for _ in 0..8 {
            let ys: Vec<Iv> = s.iter().map(|x| root_interval(p, f, x, work)).collect();
            match eval_interval(&z, &ys) {
                Some(v) => {
                    let w = &v.hi - &v.lo;
                    last = Some(v);
                    if w <= target {
                        break;
                    }
                }
                None => last = None,
            }
            work *= 2;
        }
        let v = last.ok_or_else(pole)?;
        Ok(HatValue::Interval { lo: v.lo, hi: v.hi })
    }
}

fn to_small(x: &BigRational) -> i64 {
    i64::try_from(x.to_integer()).expect("exponent fits in i64")
}

#[derive(Clone, Debug)]
struct Iv {
    lo: BigRational,
    hi: BigRational,
}

impl Iv {
    fn point(x: BigRational) -> Self {
        Iv { lo: x.clone(), hi: x }
    }

    fn add(&self, o: &Iv) -> Iv {
        Iv { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi }
    }

    fn mul(&self, o: &Iv) -> Iv {
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let lo = c.iter().min().cloned().unwrap_or_default();
        let hi = c.iter().max().cloned().unwrap_or_default();
        Iv { lo, hi }
    }

    fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    fn recip(&self) -> Option<Iv> {
        if self.contains_zero() {
            return None;
        }
        Some(Iv { lo: BigRational::one() / &self.hi, hi: BigRational::one() / &self.lo })
    }

    /// `x^k` for an interval of positive numbers.
    fn pow_pos(&self, k: i64) -> Iv {
        if k >= 0 {
            Iv { lo: rpow(&self.lo, k), hi: rpow(&self.hi, k) }
        } else {
            Iv { lo: rpow(&self.hi, k), hi: rpow(&self.lo, k) }
        }
    }
}

/// Bracket of `p^{-f s}` of width about `2^-bits` (relative to its size).
fn root_interval(p: u64, f: u32, s: &BigRational, bits: u32) -> Iv {
    // y^den = p^{-f·num}
    let num = s.numer() * BigInt::from(f);
    let den = s.denom().clone();
    let k = i64::try_from(den).expect("small denominator");
    let e = i64::try_from(-num).expect("small numerator");
    let base = BigRational::from_integer(BigInt::from(p));
    let target = rpow(&base, e);
    if k == 1 {
        return Iv::point(target);
    }
    let lo_exp = e.div_euclid(k);
    let mut lo = rpow(&base, lo_exp);
    let mut hi = rpow(&base, lo_exp + 1);
    for _ in 0..(bits + 8 * (lo_exp.unsigned_abs() as u32 + 1)) {
        let mid: BigRational = (&lo + &hi) / BigRational::from_integer(BigInt::from(2));
        let v = rpow(&mid, k);
        if v == target {
            return Iv::point(mid);
        }
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Iv { lo, hi }
}

fn eval_laurent_interval(p: &Laurent, ys: &[Iv]) -> Iv {
    let mut acc = Iv::point(BigRational::zero());
    for (e, c) in p.terms() {
        let mut t = Iv::point(c.clone());
        for (y, &k) in ys.iter().zip(e.iter()) {
            if k != 0 {
                t = t.mul(&y.pow_pos(k));
            }
        }
        acc = acc.add(&t);
    }
    acc
}

fn eval_interval(z: &YRational, ys: &[Iv]) -> Option<Iv> {
    let mut v = eval_laurent_interval(z.numerator(), ys);
    for (fac, &e) in z.denominator() {
        let d = eval_laurent_interval(&fac.as_laurent(), ys).recip()?;
        for _ in 0..e {
            v = v.mul(&d);
        }
    }
    Some(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::ratio;
    use crate::ratfun::tests::w;

    fn heis() -> LocalMapFormula {
        LocalMapFormula::single(w("(1 - Y1)/(1 - X*Y1)"))
    }

    fn circle() -> ConstructibleSet {
        ConstructibleSet::parse("vars x,y; eq x^2 + y^2 - 1").unwrap()
    }

    #[test]
    fn formulas_validate_arity() {
        let two = CycloRational::parse("1/(1 - Y1*Y2)", 2).unwrap();
        let bad = LocalMapFormula::new(vec![Term::new(ConstructibleSet::point(), w("Y1")), Term::new(ConstructibleSet::point(), two)], 1, []);
        assert_eq!(bad, Err(LocalMapError::MixedArity { term: 1, expected: 1, found: 2 }));
        let f = heis().sum(&LocalMapFormula::new(vec![Term::new(ConstructibleSet::affine(1), w("1"))], 1, [3]).unwrap()).unwrap();
        assert_eq!(f.terms().len(), 2);
        assert!(f.is_excluded(3));
    }

    #[test]
    fn evaluate_examples() {
        let ev = Evaluator::default();
        assert_eq!(ev.evaluate(&heis(), 5, 1).unwrap().to_string(), "(1 - Y1)/(1 - 5*Y1)");
        assert_eq!(ev.evaluate(&heis(), 5, 2).unwrap().to_string(), "(1 - Y1)/(1 - 25*Y1)");
        let t = LocalMapFormula::new(vec![Term::new(ConstructibleSet::torus(1), w("1/(1 - X*Y1)"))], 1, []).unwrap();
        assert_eq!(ev.evaluate(&t, 3, 1).unwrap().to_string(), "2/(1 - 3*Y1)");
        let ex = LocalMapFormula::new(heis().terms().to_vec(), 1, [5]).unwrap();
        assert_eq!(ev.evaluate(&ex, 5, 1), Err(LocalMapError::ExcludedPrime(5)));
        assert_eq!(ev.evaluate(&heis(), 6, 1), Err(LocalMapError::NotPrime(6)));
    }

    #[test]
    fn evaluate_star_examples() {
        let ev = Evaluator::default();
        for p in [2u64, 3, 5, 7] {
            let pr = ratio(p as i64, 1);
            let lhs = ev.evaluate_star(&heis(), p, -1).unwrap();
            assert!(lhs.equal(&ev.evaluate(&heis(), p, 1).unwrap().scale(&pr)));
            let a2 = LocalMapFormula::single(w("1/((1 - Y1)*(1 - X*Y1))"));
            let lhs = ev.evaluate_star(&a2, p, -1).unwrap();
            assert!(lhs.equal(&ev.evaluate(&a2, p, 1).unwrap().mul_monomial(&[2], &pr)));
            for f in 1..=3 {
                assert_eq!(ev.evaluate_star(&heis(), p, f).unwrap(), ev.evaluate(&heis(), p, f as u32).unwrap());
            }
        }
        let t = LocalMapFormula::new(vec![Term::new(ConstructibleSet::torus(1), w("1"))], 1, []).unwrap();
        assert_eq!(ev.evaluate_star(&t, 3, -2).unwrap().as_constant(), Some(ratio(-8, 9)));
        assert!(ev.cached_models() >= 5);
    }

    #[test]
    fn topological_examples() {
        let ev = Evaluator::default();
        assert_eq!(ev.topological(&heis()).unwrap().to_string(), "s1/(s1 - 1)");
        let d3 = LocalMapFormula::single(w("(1 - X^-1)^3/((1 - Y1)*(1 - X*Y1)*(1 - X^2*Y1))"));
        assert_eq!(ev.topological(&d3).unwrap().to_string(), "1/(s1*(s1 - 1)*(s1 - 2))");
        let t = LocalMapFormula::new(vec![Term::new(ConstructibleSet::torus(1), w("(1 - Y1)/(1 - X*Y1)"))], 1, []).unwrap();
        assert!(ev.topological(&t).unwrap().is_zero());
        let bad = LocalMapFormula::single(w("1/(1 - Y1)"));
        assert_eq!(ev.topological(&bad), Err(LocalMapError::NotInM { term: 0, gap: -1 }));
        let c = LocalMapFormula::new(vec![Term::new(circle(), w("(1 - Y1)/(1 - X*Y1)"))], 1, []).unwrap();
        assert!(matches!(ev.topological(&c), Err(LocalMapError::Weil { term: 0, err: WeilError::NonUniformCount { .. } })));
        let c = LocalMapFormula::new(vec![Term::new(circle().with_chi(Some(0)), w("(1 - Y1)/(1 - X*Y1)"))], 1, []).unwrap();
        assert!(ev.topological(&c).unwrap().is_zero());
    }

    #[test]
    fn uniformize_examples() {
        let ev = Evaluator::default();
        let primes = [5, 7, 11];
        let a = LocalMapFormula::new(vec![Term::new(ConstructibleSet::affine(1), w("(1 - Y1)/(1 - X*Y1)"))], 1, []).unwrap();
        let u = ev.uniformize(&a, &primes);
        assert!(u.representative().unwrap().equal(&w("X*(1 - Y1)/(1 - X*Y1)")));
        let t = LocalMapFormula::new(vec![Term::new(ConstructibleSet::torus(1), w("1/(1 - X*Y1)"))], 1, []).unwrap();
        assert!(ev.uniformize(&t, &primes).representative().unwrap().equal(&w("(X - 1)/(1 - X*Y1)")));
        let c = LocalMapFormula::new(vec![Term::new(circle(), w("1/(1 - X*Y1)"))], 1, []).unwrap();
        let u = ev.uniformize(&c, &[5, 7]);
        assert_eq!(u.representative(), None);
        assert_eq!(u.witness(), Some((5, 7)));
    }

    #[test]
    fn hat_values() {
        let ev = Evaluator::default();
        assert_eq!(ev.numeric_hat_eval(&heis(), 5, 1, &[ratio(2, 1)], 64), Ok(HatValue::Exact(ratio(6, 5))));
        let a1 = LocalMapFormula::single(w("1/(1 - Y1)"));
        assert_eq!(ev.numeric_hat_eval(&a1, 3, 1, &[ratio(1, 1)], 64), Ok(HatValue::Exact(ratio(3, 2))));
        assert_eq!(ev.numeric_hat_eval(&a1, 3, 1, &[ratio(0, 1)], 64), Err(LocalMapError::PoleAt(vec![ratio(0, 1)])));
        // Y = 4^{-1/2} = 1/2
        let v = ev.numeric_hat_eval(&a1, 2, 2, &[ratio(1, 2)], 64).unwrap();
        assert!(v.contains(&ratio(2, 1)));
        // Y = 2^{-1/2}: 1/(1 - Y) = 2 + √2
        let v = ev.numeric_hat_eval(&a1, 2, 1, &[ratio(1, 2)], 80).unwrap();
        let bound = BigRational::new(BigInt::one(), BigInt::one() << 80usize);
        assert!(v.width() <= bound);
        let HatValue::Interval { lo, hi } = v else { panic!("expected interval") };
        // (x - 2)^2 = 2 at the true value
        let g = |x: &BigRational| (x - ratio(2, 1)) * (x - ratio(2, 1)) - ratio(2, 1);
        assert!(!g(&lo).is_positive() && !g(&hi).is_negative());
    }
}
