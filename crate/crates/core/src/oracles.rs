//! Brute-force ground truth: sublattice enumeration for subalgebra, ideal
//! and submodule zeta functions, truncated monomial Igusa integrals, and a
//! catalog of closed formulas.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::{int_pow, is_prime};
use crate::geom::{ConstructibleSet, DEFAULT_BUDGET};
use crate::localmap::{LocalMapFormula, Term};
use crate::poly::Laurent;
use crate::ratfun::{CycloFactor, CycloRational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleError {
    BudgetExceeded { needed: u128, budget: u64 },
    Shape(String),
    NotPrime(u64),
    UnknownName(String),
    MultipleGenerators,
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::BudgetExceeded { needed, budget } => {
                write!(f, "enumeration needs {} lattices, budget is {}", needed, budget)
            }
            OracleError::Shape(m) => f.write_str(m),
            OracleError::NotPrime(p) => write!(f, "{} is not prime", p),
            OracleError::UnknownName(n) => write!(f, "unknown catalog entry '{}'", n),
            OracleError::MultipleGenerators => f.write_str("expected a single ideal with a single generator"),
        }
    }
}

impl core::error::Error for OracleError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosureMode {
    Subalgebra,
    /// Two-sided ideals.
    Ideal,
    /// Submodules for the matrices in `gens` together with the identity.
    Submodule,
}

/// A product on `Z^d` given by structure constants, possibly with a set of
/// acting matrices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraPresentation {
    d: usize,
    /// `consts[i][j]` holds the coordinates of `e_i · e_j`.
    consts: Vec<Vec<Vec<i64>>>,
    mode: ClosureMode,
    /// `d × d` matrices acting on column vectors.
    gens: Vec<Vec<Vec<i64>>>,
}

impl AlgebraPresentation {
    pub fn new(
        d: usize,
        consts: Vec<Vec<Vec<i64>>>,
        mode: ClosureMode,
        gens: Vec<Vec<Vec<i64>>>,
    ) -> Result<Self, OracleError> {
        let square = |t: &Vec<Vec<Vec<i64>>>| t.len() == d && t.iter().all(|r| r.len() == d && r.iter().all(|c| c.len() == d));
        if d == 0 || !square(&consts) {
            return Err(OracleError::Shape(format!("structure constants must be {d}×{d}×{d}")));
        }
        if gens.iter().any(|g| g.len() != d || g.iter().any(|r| r.len() != d)) {
            return Err(OracleError::Shape(format!("generators must be {d}×{d} matrices")));
        }
        Ok(AlgebraPresentation { d, consts, mode, gens })
    }

    /// `Z^d` with the zero product.
    pub fn abelian(d: usize, mode: ClosureMode) -> Self {
        AlgebraPresentation { d, consts: vec![vec![vec![0; d]; d]; d], mode, gens: Vec::new() }
    }

    /// The Heisenberg Lie ring: `[e1, e2] = e3 = -[e2, e1]`.
    pub fn heisenberg(mode: ClosureMode) -> Self {
        let mut a = Self::abelian(3, mode);
        a.consts[0][1] = vec![0, 0, 1];
        a.consts[1][0] = vec![0, 0, -1];
        a
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn mode(&self) -> ClosureMode {
        self.mode
    }

    pub fn with_mode(mut self, mode: ClosureMode) -> Self {
        self.mode = mode;
        self
    }

    fn product(&self, u: &[i128], v: &[i128]) -> Vec<i128> {
        let mut out = vec![0i128; self.d];
        for (i, &ui) in u.iter().enumerate() {
            if ui == 0 {
                continue;
            }
            for (j, &vj) in v.iter().enumerate() {
                if vj == 0 {
                    continue;
                }
                for (k, &c) in self.consts[i][j].iter().enumerate() {
                    out[k] += ui * vj * c as i128;
                }
            }
        }
        out
    }

    fn closed(&self, basis: &[Vec<i128>]) -> bool {
        let d = self.d;
        match self.mode {
            ClosureMode::Subalgebra => {
                (0..d).all(|i| (0..d).all(|j| contains(basis, self.product(&basis[i], &basis[j]))))
            }
            ClosureMode::Ideal => (0..d).all(|i| {
                (0..d).all(|j| {
                    let mut e = vec![0i128; d];
                    e[j] = 1;
                    contains(basis, self.product(&basis[i], &e)) && contains(basis, self.product(&e, &basis[i]))
                })
            }),
            ClosureMode::Submodule => self.gens.iter().all(|g| {
                basis.iter().all(|b| {
                    let v: Vec<i128> = g.iter().map(|row| row.iter().zip(b).map(|(&x, &y)| x as i128 * y).sum()).collect();
                    contains(basis, v)
                })
            }),
        }
    }
}

/// Membership of `v` in the row span of an upper-triangular basis.
fn contains(basis: &[Vec<i128>], mut v: Vec<i128>) -> bool {
    for (i, row) in basis.iter().enumerate() {
        if v[i] % row[i] != 0 {
            return false;
        }
        let x = v[i] / row[i];
        if x != 0 {
            for (vj, rj) in v.iter_mut().zip(row).skip(i) {
                *vj -= x * rj;
            }
        }
    }
    true
}

/// Compositions of `k` into `d` nonnegative parts.
fn compositions(k: u32, d: usize) -> Vec<Vec<u32>> {
    if d == 1 {
        return vec![vec![k]];
    }
    let mut out = Vec::new();
    for first in 0..=k {
        for mut rest in compositions(k - first, d - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Number of Hermite normal forms of index `p^k` in `Z^d`.
pub fn hnf_count(d: usize, p: u64, k: u32) -> u128 {
    compositions(k, d)
        .iter()
        .map(|a| a.iter().enumerate().map(|(j, &aj)| (p as u128).pow(aj * j as u32)).product::<u128>())
        .sum()
}

/// Counts closed HNF lattices with diagonal exponents `a`.
fn count_type(alg: &AlgebraPresentation, p: u64, a: &[u32]) -> u64 {
    let d = alg.d;
    let diag: Vec<i128> = a.iter().map(|&x| (p as i128).pow(x)).collect();
    // free entries (i, j), i < j, each in [0, diag[j])
    let slots: Vec<(usize, usize)> = (0..d).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
    let mut basis: Vec<Vec<i128>> = (0..d)
        .map(|i| {
            let mut r = vec![0i128; d];
            r[i] = diag[i];
            r
        })
        .collect();
    let mut count = 0u64;
    loop {
        if alg.closed(&basis) {
            count += 1;
        }
        // odometer over the free entries
        let mut pos = 0;
        loop {
            if pos == slots.len() {
                return count;
            }
            let (i, j) = slots[pos];
            basis[i][j] += 1;
            if basis[i][j] < diag[j] {
                break;
            }
            basis[i][j] = 0;
            pos += 1;
        }
    }
}

/// `c_k` = number of closed sublattices of index `p^k`, `k = 0 … kmax`.
pub fn subzeta_coeffs(alg: &AlgebraPresentation, p: u64, kmax: u32) -> Result<Vec<u64>, OracleError> {
    subzeta_coeffs_with(alg, p, kmax, DEFAULT_BUDGET)
}

pub fn subzeta_coeffs_with(alg: &AlgebraPresentation, p: u64, kmax: u32, budget: u64) -> Result<Vec<u64>, OracleError> {
    if !is_prime(p) {
        return Err(OracleError::NotPrime(p));
    }
    let needed: u128 = (0..=kmax).map(|k| hnf_count(alg.d, p, k)).sum();
    if needed > budget as u128 {
        return Err(OracleError::BudgetExceeded { needed, budget });
    }
    let mut out = Vec::with_capacity(kmax as usize + 1);
    for k in 0..=kmax {
        let types = compositions(k, alg.d);
        #[cfg(feature = "std")]
        let c: u64 = {
            use rayon::prelude::*;
            types.par_iter().map(|a| count_type(alg, p, a)).sum()
        };
        #[cfg(not(feature = "std"))]
        let c: u64 = types.iter().map(|a| count_type(alg, p, a)).sum();
        out.push(c);
    }
    Ok(out)
}

/// Monomial ideals `a_1, …, a_m` in `n` variables, each given by generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialIdealSet {
    n: usize,
    ideals: Vec<Vec<Vec<u32>>>,
}

impl MonomialIdealSet {
    pub fn new(n: usize, ideals: Vec<Vec<Vec<u32>>>) -> Result<Self, OracleError> {
        if ideals.is_empty() || ideals.iter().any(|g| g.is_empty()) {
            return Err(OracleError::Shape("every ideal needs a generator".into()));
        }
        if ideals.iter().flatten().any(|e| e.len() != n) {
            return Err(OracleError::Shape(format!("exponent vectors must have length {n}")));
        }
        Ok(MonomialIdealSet { n, ideals })
    }

    /// The principal ideal `(x_1^{e_1} ⋯ x_n^{e_n})`.
    pub fn principal(e: Vec<u32>) -> Self {
        MonomialIdealSet { n: e.len(), ideals: vec![vec![e]] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ideals(&self) -> &[Vec<Vec<u32>>] {
        &self.ideals
    }
}

/// The integral `∫ ∏ ||a_j(x)||^{s_j} dμ` over the valuation box `{0…B}^n`,
/// together with a bound on the omitted part.
pub fn igusa_truncated(
    ideals: &MonomialIdealSet,
    q: u64,
    s: &[u32],
    b: u32,
) -> Result<(BigRational, BigRational), OracleError> {
    if s.len() != ideals.ideals.len() {
        return Err(OracleError::Shape(format!("need {} exponents s_j", ideals.ideals.len())));
    }
    if q < 2 || b < 1 {
        return Err(OracleError::Shape("need q ≥ 2 and B ≥ 1".into()));
    }
    let n = ideals.n;
    let qi = BigInt::from(q);
    // weight of v as an integer exponent of 1/q
    let exponent = |v: &[u32]| -> u64 {
        let mut e: u64 = v.iter().map(|&x| x as u64).sum();
        for (gens, &sj) in ideals.ideals.iter().zip(s) {
            let w = gens
                .iter()
                .map(|g| g.iter().zip(v).map(|(&a, &x)| a as u64 * x as u64).sum::<u64>())
                .min()
                .unwrap_or(0);
            e += sj as u64 * w;
        }
        e
    };
    // Σ q^{-e(v)} over the box, grouped by exponent
    let per_first = |first: u32| -> BigRational {
        let mut v = vec![0u32; n];
        if n > 0 {
            v[0] = first;
        }
        let mut acc = BigRational::zero();
        loop {
            acc += BigRational::new(BigInt::one(), qi.pow(exponent(&v) as u32));
            let mut pos = 1;
            loop {
                if pos >= n {
                    return acc;
                }
                v[pos] += 1;
                if v[pos] <= b {
                    break;
                }
                v[pos] = 0;
                pos += 1;
            }
        }
    };
    let firsts: Vec<u32> = if n == 0 { vec![0] } else { (0..=b).collect() };
    #[cfg(feature = "std")]
    let parts: Vec<BigRational> = {
        use rayon::prelude::*;
        firsts.par_iter().map(|&x| per_first(x)).collect()
    };
    #[cfg(not(feature = "std"))]
    let parts: Vec<BigRational> = firsts.iter().map(|&x| per_first(x)).collect();
    let sum = parts.into_iter().fold(BigRational::zero(), |a, x| a + x);
    let qr = BigRational::from_integer(qi);
    let measure = (BigRational::one() - BigRational::one() / &qr).pow(n as i32);
    let value = sum * measure;
    let tail = BigRational::from_integer(BigInt::from(n)) * int_pow(q, -(b as i64 + 1));
    Ok((value, tail))
}

/// Closed form of the integral for a principal monomial ideal, with `Y`
/// standing for `q^{-s}`: `∏ (1 - X^{-1})/(1 - X^{-1} Y^{e_i})`. The scaled
/// variant omits the factors `1 - X^{-1}`.
pub fn igusa_principal_exact(ideals: &MonomialIdealSet, scaled: bool) -> Result<CycloRational, OracleError> {
    if ideals.ideals.len() != 1 || ideals.ideals[0].len() != 1 {
        return Err(OracleError::MultipleGenerators);
    }
    let one_minus = &Laurent::one(2) - &Laurent::var(2, 0, -1);
    let mut w = CycloRational::one(1);
    for &e in &ideals.ideals[0][0] {
        if e == 0 && !scaled {
            continue;
        }
        let f = CycloFactor::new(-1, vec![e as i64]).expect("a = -1");
        w = w.mul(&CycloRational::inverse_factor(f));
        if !scaled {
            w = w.mul_laurent(&one_minus);
        }
    }
    Ok(w)
}

/// Catalog names accepted by [`catalog`].
pub const CATALOG_NAMES: [&str; 3] = ["heisenberg_twist_irr", "abelian_sub(d)", "abelian_sub_corrected(d)"];

pub fn catalog(name: &str) -> Result<LocalMapFormula, OracleError> {
    let name = name.trim();
    let unknown = || OracleError::UnknownName(name.to_string());
    if name == "heisenberg_twist_irr" {
        let w = CycloRational::parse("(1 - Y1)/(1 - X*Y1)", 1).expect("valid");
        return Ok(LocalMapFormula::single(w));
    }
    let (base, corrected) = if let Some(r) = name.strip_prefix("abelian_sub_corrected(") {
        (r, true)
    } else if let Some(r) = name.strip_prefix("abelian_sub(") {
        (r, false)
    } else {
        return Err(unknown());
    };
    let d: u32 = base.strip_suffix(')').and_then(|x| x.trim().parse().ok()).ok_or_else(unknown)?;
    if d == 0 || d > 64 {
        return Err(unknown());
    }
    let mut w = CycloRational::one(1);
    for i in 0..d {
        w = w.mul(&CycloRational::inverse_factor(CycloFactor::new(i as i64, vec![1]).expect("b = 1")));
    }
    if corrected {
        let one_minus = &Laurent::one(2) - &Laurent::var(2, 0, -1);
        w = w.mul_laurent(&one_minus.pow(d));
    }
    Ok(LocalMapFormula::new(vec![Term::new(ConstructibleSet::point(), w)], 1, []).expect("m = 1"))
}
