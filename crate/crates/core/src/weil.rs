//! Minimal linear recurrences behind point-count sequences.
//!
//! Counts `N_f = |V(F_{q^f})|` satisfy `N_f = Σ m_i α_i^f`, hence a linear
//! recurrence whose characteristic roots are the `α_i`. The recurrence is
//! found with Berlekamp-Massey over `Q` and run backwards to define `N_f`
//! for `f ≤ 0`. When every root is a power `q^j` the count is a polynomial
//! in `q^f` and its coefficients `m_i` are recovered exactly.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{is_prime, rpow};
use crate::geom::{ConstructibleSet, CountOptions, GeomError};

pub const DEFAULT_SLACK: usize = 4;
pub const DEFAULT_DEPTH: u32 = 12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WeilError {
    /// The recurrence fitted on a prefix does not predict the withheld
    /// terms, or too few counts were available.
    Unstable { counts: usize },
    ZeroEigenvalue,
    /// Spectral data at `first` differs from the counts at `second`.
    NonUniformCount { first: u64, second: u64 },
    NotPolynomialCount { prime: u64 },
    NoPrimes,
    Geom(GeomError),
}

impl fmt::Display for WeilError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeilError::Unstable { counts } => {
                write!(f, "no stable recurrence found from {} counts", counts)
            }
            WeilError::ZeroEigenvalue => f.write_str("minimal recurrence has a zero characteristic root"),
            WeilError::NonUniformCount { first, second } => {
                write!(f, "point counts are not uniform: primes {} and {} disagree", first, second)
            }
            WeilError::NotPolynomialCount { prime } => {
                write!(f, "point count at p = {} is not a polynomial in q", prime)
            }
            WeilError::NoPrimes => f.write_str("no sample primes"),
            WeilError::Geom(e) => write!(f, "{}", e),
        }
    }
}

impl core::error::Error for WeilError {}

impl From<GeomError> for WeilError {
    fn from(e: GeomError) -> Self {
        WeilError::Geom(e)
    }
}

/// `m · q^{j f}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpectralTerm {
    pub m: i64,
    pub j: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeilModel {
    q: BigRational,
    counts: Vec<BigRational>,
    rec: Vec<BigRational>,
    spectral: Option<Vec<SpectralTerm>>,
}

/// Berlekamp-Massey over `Q`. Returns `c` with
/// `s_n = c_1 s_{n-1} + … + c_L s_{n-L}` for `L ≤ n < len`.
pub fn berlekamp_massey(s: &[BigRational]) -> Vec<BigRational> {
    let zero = BigRational::zero();
    let mut c: Vec<BigRational> = vec![BigRational::one()];
    let mut b: Vec<BigRational> = vec![BigRational::one()];
    let mut l = 0usize;
    let mut shift = 1usize;
    let mut last = BigRational::one();
    for n in 0..s.len() {
        let mut d = s[n].clone();
        for i in 1..=l.min(c.len() - 1) {
            d += &c[i] * &s[n - i];
        }
        if d.is_zero() {
            shift += 1;
            continue;
        }
        let coef = &d / &last;
        let prev = c.clone();
        if c.len() < b.len() + shift {
            c.resize(b.len() + shift, zero.clone());
        }
        for (i, bi) in b.iter().enumerate() {
            c[i + shift] -= &coef * bi;
        }
        if 2 * l <= n {
            l = n + 1 - l;
            b = prev;
            last = d;
            shift = 1;
        } else {
            shift += 1;
        }
    }
    c.resize(l + 1, zero);
    c[1..].iter().map(|x| -x).collect()
}

fn predicts(rec: &[BigRational], counts: &[BigRational]) -> bool {
    let u = rec.len();
    (u..counts.len()).all(|k| {
        let mut acc = BigRational::zero();
        for (j, c) in rec.iter().enumerate() {
            acc += c * &counts[k - 1 - j];
        }
        acc == counts[k]
    })
}

impl WeilModel {
    /// Fits the minimal recurrence on all but the last `slack` counts and
    /// checks it against the full sequence. `counts[0]` is `N_1`. The
    /// withheld terms are the only confirmation; no bound `2u ≤ L - slack`
    /// is imposed.
    pub fn fit(q: u64, counts: &[BigRational], slack: usize) -> Result<Self, WeilError> {
        let n = counts.len().saturating_sub(slack);
        if n == 0 {
            return Err(WeilError::Unstable { counts: counts.len() });
        }
        let rec = berlekamp_massey(&counts[..n]);
        if !predicts(&rec, counts) {
            return Err(WeilError::Unstable { counts: counts.len() });
        }
        Self::from_recurrence(q, counts, rec)
    }

    /// Builds a model from a known recurrence, which must reproduce
    /// `counts`.
    pub fn from_recurrence(q: u64, counts: &[BigRational], rec: Vec<BigRational>) -> Result<Self, WeilError> {
        if rec.last().is_some_and(|c| c.is_zero()) {
            return Err(WeilError::ZeroEigenvalue);
        }
        if counts.len() < rec.len() || !predicts(&rec, counts) {
            return Err(WeilError::Unstable { counts: counts.len() });
        }
        let mut model = WeilModel {
            q: BigRational::from_integer(BigInt::from(q)),
            counts: counts.to_vec(),
            rec,
            spectral: None,
        };
        model.spectral = model.find_spectral();
        Ok(model)
    }

    pub fn q(&self) -> &BigRational {
        &self.q
    }

    pub fn counts(&self) -> &[BigRational] {
        &self.counts
    }

    pub fn recurrence(&self) -> &[BigRational] {
        &self.rec
    }

    pub fn order(&self) -> usize {
        self.rec.len()
    }

    /// `N_f = Σ m_i q^{j_i f}` with `j` descending, when every
    /// characteristic root is a nonnegative power of `q`.
    pub fn polynomial_count(&self) -> Option<&[SpectralTerm]> {
        self.spectral.as_deref()
    }

    /// Count at any integer `f`, running the recurrence forward or
    /// backward from the supplied window.
    pub fn extend_count(&self, f: i64) -> Result<BigRational, WeilError> {
        let u = self.rec.len();
        if u == 0 {
            return Ok(BigRational::zero());
        }
        let len = self.counts.len() as i64;
        if (1..=len).contains(&f) {
            return Ok(self.counts[(f - 1) as usize].clone());
        }
        if f > len {
            let mut window: Vec<BigRational> = self.counts[self.counts.len() - u..].to_vec();
            for _ in len..f {
                let mut next = BigRational::zero();
                for (j, c) in self.rec.iter().enumerate() {
                    next += c * &window[u - 1 - j];
                }
                window.remove(0);
                window.push(next);
            }
            return Ok(window[u - 1].clone());
        }
        let cu = &self.rec[u - 1];
        if cu.is_zero() {
            return Err(WeilError::ZeroEigenvalue);
        }
        // window holds N_{k-u+1} … N_k; step down to N_{k-u}
        let mut window: Vec<BigRational> = self.counts[..u].to_vec();
        let mut lowest = 1i64;
        while lowest > f {
            let k = window.len() - 1;
            let mut acc = window[k].clone();
            for j in 1..u {
                acc -= &self.rec[j - 1] * &window[k - j];
            }
            window.pop();
            window.insert(0, acc / cu);
            lowest -= 1;
        }
        Ok(window[0].clone())
    }

    fn find_spectral(&self) -> Option<Vec<SpectralTerm>> {
        let u = self.rec.len();
        if u == 0 {
            return Some(Vec::new());
        }
        if self.q.abs() <= BigRational::one() {
            return None;
        }
        // characteristic polynomial T^u - c_1 T^{u-1} - … - c_u
        let charpoly = |t: &BigRational| {
            let mut acc = BigRational::one();
            for c in &self.rec {
                acc = acc * t - c;
            }
            acc
        };
        // Cauchy bound on the roots
        let bound = self.rec.iter().map(|c| c.abs()).fold(BigRational::zero(), |a, b| if b > a { b } else { a })
            + BigRational::one();
        let mut js = Vec::new();
        let mut power = BigRational::one();
        let mut j = 0u32;
        while power <= bound {
            if charpoly(&power).is_zero() {
                js.push(j);
            }
            power *= &self.q;
            j += 1;
        }
        if js.len() != u {
            return None;
        }
        // m from the Vandermonde system N_f = Σ m_i q^{j_i f}, f = 1..u
        let rows: Vec<Vec<BigRational>> = (1..=u as i64)
            .map(|f| js.iter().map(|&j| rpow(&self.q, j as i64 * f)).collect())
            .collect();
        let ms = solve(rows, self.counts[..u].to_vec())?;
        let mut terms = Vec::with_capacity(u);
        for (m, &j) in ms.iter().zip(&js) {
            if !m.is_integer() || m.is_zero() {
                return None;
            }
            terms.push(SpectralTerm { m: m.to_integer().to_i64()?, j });
        }
        terms.sort_by_key(|t| core::cmp::Reverse(t.j));
        let ok = self.counts.iter().enumerate().all(|(i, n)| eval_spectral(&terms, &self.q, i as i64 + 1) == *n);
        ok.then_some(terms)
    }
}

/// `Σ m_i q^{j_i f}`.
pub fn eval_spectral(terms: &[SpectralTerm], q: &BigRational, f: i64) -> BigRational {
    terms
        .iter()
        .map(|t| BigRational::from_integer(BigInt::from(t.m)) * rpow(q, t.j as i64 * f))
        .fold(BigRational::zero(), |a, b| a + b)
}

/// Gaussian elimination over `Q`; `None` if singular.
fn solve(mut a: Vec<Vec<BigRational>>, mut b: Vec<BigRational>) -> Option<Vec<BigRational>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let factor = &a[r][col] / &a[col][col];
                for k in col..n {
                    let v = &factor * &a[col][k];
                    a[r][k] -= v;
                }
                let v = &factor * &b[col];
                b[r] -= v;
            }
        }
    }
    Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FitOptions {
    /// Largest `f` for which a count is computed.
    pub depth: u32,
    pub slack: usize,
    pub count: CountOptions,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { depth: DEFAULT_DEPTH, slack: DEFAULT_SLACK, count: CountOptions::default() }
    }
}

/// Computes counts `f = 1, 2, …` until a recurrence is confirmed with the
/// requested slack, or `depth` is reached.
pub fn fit_set(set: &ConstructibleSet, p: u64, opts: &FitOptions) -> Result<WeilModel, WeilError> {
    let mut counts: Vec<BigRational> = Vec::new();
    let mut last_err = WeilError::Unstable { counts: 0 };
    for f in 1..=opts.depth {
        let n = set.count_points_with(p, f, &opts.count)?;
        counts.push(BigRational::from_integer(BigInt::from(n)));
        if counts.len() < opts.slack + 1 {
            continue;
        }
        match WeilModel::fit(p, &counts, opts.slack) {
            Ok(m) => return Ok(m),
            Err(WeilError::Unstable { .. }) => last_err = WeilError::Unstable { counts: counts.len() },
            Err(e) => {
                // a zero root may still disappear with more data
                last_err = e;
            }
        }
    }
    Err(last_err)
}

/// Primes in increasing order, skipping `excluded`.
pub fn default_primes(n: usize, excluded: &[u64]) -> Vec<u64> {
    (2u64..).filter(|&p| is_prime(p) && !excluded.contains(&p)).take(n).collect()
}

/// The common spectral decomposition of the counts at all `primes`.
///
/// Primes are processed in order. The first prime with a spectral fit
/// becomes the reference; every other prime must reproduce its counts.
pub fn uniform_polynomial(
    set: &ConstructibleSet,
    primes: &[u64],
    opts: &FitOptions,
) -> Result<Vec<SpectralTerm>, WeilError> {
    let mut reference: Option<(u64, Vec<SpectralTerm>)> = None;
    let mut lacking: Option<u64> = None;
    for &p in primes {
        match &reference {
            Some((p0, terms)) => {
                let needed = (2 * terms.len() + opts.slack).max(1) as u32;
                let qp = BigRational::from_integer(BigInt::from(p));
                for f in 1..=needed.min(opts.depth.max(1)) {
                    let n = match set.count_points_with(p, f, &opts.count) {
                        Ok(n) => n,
                        // enough counts to pin down the coefficients plus one check
                        Err(GeomError::BudgetExceeded { .. }) if f as usize > terms.len() + 1 => break,
                        Err(e) => return Err(e.into()),
                    };
                    if BigRational::from_integer(BigInt::from(n)) != eval_spectral(terms, &qp, f as i64) {
                        return Err(WeilError::NonUniformCount { first: *p0, second: p });
                    }
                }
            }
            None => {
                let model = fit_set(set, p, opts)?;
                match model.polynomial_count() {
                    Some(terms) => {
                        if let Some(p0) = lacking {
                            return Err(WeilError::NonUniformCount { first: p0, second: p });
                        }
                        reference = Some((p, terms.to_vec()));
                    }
                    None => {
                        lacking.get_or_insert(p);
                    }
                }
            }
        }
    }
    match (reference, lacking) {
        (Some((_, terms)), _) => Ok(terms),
        (None, Some(p)) => Err(WeilError::NotPolynomialCount { prime: p }),
        (None, None) => Err(WeilError::NoPrimes),
    }
}

/// `user_chi` if present, else `Σ m_i` of the uniform spectral form.
pub fn euler_characteristic(set: &ConstructibleSet, primes: &[u64], opts: &FitOptions) -> Result<i64, WeilError> {
    if let Some(chi) = set.user_chi() {
        return Ok(chi);
    }
    let terms = uniform_polynomial(set, primes, opts)?;
    Ok(terms.iter().map(|t| t.m).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::ratio;
    use proptest::prelude::*;

    fn ints(v: &[i64]) -> Vec<BigRational> {
        v.iter().map(|&x| ratio(x, 1)).collect()
    }

    #[test]
    fn torus_recurrence() {
        let m = WeilModel::fit(3, &ints(&[2, 8, 26, 80, 242, 728, 2186, 6560]), 4).unwrap();
        assert_eq!(m.recurrence(), &ints(&[4, -3])[..]);
        assert_eq!(m.extend_count(-1).unwrap(), ratio(-2, 3));
        assert_eq!(m.polynomial_count().unwrap(), &[SpectralTerm { m: 1, j: 1 }, SpectralTerm { m: -1, j: 0 }]);
    }

    #[test]
    fn short_sequences() {
        let m = WeilModel::fit(5, &ints(&[1, 1, 1, 1, 1]), 4).unwrap();
        assert_eq!(m.recurrence(), &ints(&[1])[..]);
        let m = WeilModel::fit(2, &ints(&[4, 16, 64, 256, 1024, 4096]), 4).unwrap();
        assert_eq!(m.recurrence(), &ints(&[4])[..]);
        assert_eq!(m.extend_count(-1).unwrap(), ratio(1, 4));
        assert!(matches!(WeilModel::fit(3, &ints(&[2, 8, 26, 80, 242]), 4), Err(WeilError::Unstable { .. })));
    }

    #[test]
    fn non_power_roots_have_no_spectral_form() {
        let m = WeilModel::fit(2, &ints(&[0, 4, 0, 8, 0, 16, 0, 32]), 4).unwrap();
        assert_eq!(m.recurrence(), &ints(&[0, 2])[..]);
        assert!(m.polynomial_count().is_none());
        // q^f - (-1)^f at q = 7
        let c: Vec<i64> = (1..=8).map(|f| 7i64.pow(f) - (-1i64).pow(f)).collect();
        let m = WeilModel::fit(7, &ints(&c), 4).unwrap();
        assert_eq!(m.order(), 2);
        assert!(m.polynomial_count().is_none());
        assert_eq!(m.extend_count(-1).unwrap(), ratio(1, 7) + ratio(1, 1));
    }

    #[test]
    fn zero_eigenvalue_is_rejected() {
        let r = WeilModel::from_recurrence(2, &ints(&[1, 0, 0, 0]), ints(&[0]));
        assert_eq!(r, Err(WeilError::ZeroEigenvalue));
    }

    #[test]
    fn torus_two_backward() {
        let c: Vec<i64> = (1..=10).map(|f| (2i64.pow(f) - 1).pow(2)).collect();
        let m = WeilModel::fit(2, &ints(&c), 4).unwrap();
        assert_eq!(m.extend_count(-1).unwrap(), ratio(1, 4));
        assert_eq!(m.extend_count(0).unwrap(), ratio(0, 1));
        assert_eq!(m.extend_count(12).unwrap(), ratio((4096 - 1) * (4096 - 1), 1));
    }

    #[test]
    fn euler_characteristics() {
        let opts = FitOptions::default();
        let primes = default_primes(6, &[]);
        assert_eq!(euler_characteristic(&ConstructibleSet::affine(3), &primes, &opts), Ok(1));
        assert_eq!(euler_characteristic(&ConstructibleSet::torus(1), &primes, &opts), Ok(0));
        assert_eq!(euler_characteristic(&ConstructibleSet::torus(2), &primes, &opts), Ok(0));
        let circle = ConstructibleSet::parse("vars x,y; eq x^2 + y^2 - 1").unwrap();
        assert_eq!(
            euler_characteristic(&circle, &[5, 7, 11, 13], &opts),
            Err(WeilError::NonUniformCount { first: 5, second: 7 })
        );
        assert_eq!(
            euler_characteristic(&circle, &[7, 5], &opts),
            Err(WeilError::NonUniformCount { first: 7, second: 5 })
        );
        assert_eq!(euler_characteristic(&circle, &[3, 7], &opts), Err(WeilError::NotPolynomialCount { prime: 3 }));
        assert_eq!(euler_characteristic(&circle.clone().with_chi(Some(0)), &[5, 7], &opts), Ok(0));
        let small = FitOptions { count: CountOptions { budget: 2_000_000, ..CountOptions::default() }, ..FitOptions::default() };
        let spectral = uniform_polynomial(&circle, &[5, 13, 17], &small).unwrap();
        assert_eq!(spectral, [SpectralTerm { m: 1, j: 1 }, SpectralTerm { m: -1, j: 0 }]);
    }

    #[test]
    fn circle_counts_at_two() {
        let circle = ConstructibleSet::parse("vars x,y; eq x^2 + y^2 - 1").unwrap();
        let m = fit_set(&circle, 2, &FitOptions::default()).unwrap();
        assert_eq!(m.polynomial_count().unwrap(), &[SpectralTerm { m: 1, j: 1 }]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]
        #[test]
        fn spectral_lists_are_recovered(
            raw in proptest::collection::btree_map(0u32..=4, -5i64..=5, 1..4),
            qi in 0usize..3,
        ) {
            let q = [2u64, 3, 5][qi];
            let mut terms: Vec<SpectralTerm> =
                raw.into_iter().filter(|&(_, m)| m != 0).map(|(j, m)| SpectralTerm { m, j }).collect();
            prop_assume!(!terms.is_empty());
            terms.sort_by_key(|t| core::cmp::Reverse(t.j));
            let qr = ratio(q as i64, 1);
            let counts: Vec<BigRational> = (1..=2 * terms.len() as i64 + 4).map(|f| eval_spectral(&terms, &qr, f)).collect();
            let m = WeilModel::fit(q, &counts, 4).unwrap();
            prop_assert_eq!(m.polynomial_count().unwrap(), &terms[..]);
            for f in 1..=counts.len() as i64 {
                prop_assert_eq!(&m.extend_count(f).unwrap(), &counts[f as usize - 1]);
            }
            for f in 1..=3i64 {
                prop_assert_eq!(m.extend_count(-f).unwrap(), eval_spectral(&terms, &qr, -f));
            }
            // backward values regenerate N_1 through the forward recurrence
            let u = m.order() as i64;
            let back: Vec<BigRational> = (0..u).map(|i| m.extend_count(1 - u + i).unwrap()).collect();
            let mut next = BigRational::zero();
            for (j, c) in m.recurrence().iter().enumerate() {
                next += c * &back[back.len() - 1 - j];
            }
            prop_assert_eq!(&next, &counts[0]);
        }
    }
}
