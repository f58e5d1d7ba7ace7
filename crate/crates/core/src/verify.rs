//! Grid checks for equivalence, uniformity and functional equations.
//!
//! Every comparison is an exact identity of rational functions in `Y`. A
//! grid pass is evidence only; when both sides admit uniform representatives
//! the report additionally carries a symbolic certificate.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::arith::{int_pow, is_prime};
use crate::geom::{GeomError, DEFAULT_BUDGET};
use crate::localmap::{Evaluator, LocalMapError, LocalMapFormula};
use crate::poly::Laurent;
use crate::ratfun::{CycloRational, YRational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid {
    pub primes: Vec<u64>,
    pub f_range: Vec<u32>,
    pub budget: u64,
}

impl Default for Grid {
    fn default() -> Self {
        Grid { primes: primes_below(50), f_range: vec![1, 2, 3], budget: DEFAULT_BUDGET }
    }
}

pub fn primes_below(n: u64) -> Vec<u64> {
    (2..n).filter(|&p| is_prime(p)).collect()
}

impl Grid {
    pub fn new(primes: Vec<u64>, f_range: Vec<u32>) -> Self {
        Grid { primes, f_range, budget: DEFAULT_BUDGET }
    }

    /// Grid points `(p, f)` in lexicographic order, skipping excluded primes.
    pub fn points(&self, excluded: &dyn Fn(u64) -> bool) -> Vec<(u64, u32)> {
        let mut primes: Vec<u64> = self.primes.iter().copied().filter(|&p| !excluded(p)).collect();
        primes.sort_unstable();
        primes.dedup();
        let mut fs = self.f_range.clone();
        fs.sort_unstable();
        fs.dedup();
        primes.iter().flat_map(|&p| fs.iter().map(move |&f| (p, f))).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Certificate {
    /// Grid comparisons only.
    Grid,
    /// The uniform representatives satisfy the identity exactly.
    Symbolic,
}

/// A grid point where the two sides differ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub p: u64,
    pub f: u32,
    pub lhs: YRational,
    pub rhs: YRational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub verdict: Verdict,
    pub certificate: Certificate,
    /// Sorted by `(p, f)`.
    pub witnesses: Vec<Witness>,
    pub notes: Vec<String>,
    pub checked: usize,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn first_witness(&self) -> Option<(u64, u32)> {
        self.witnesses.first().map(|w| (w.p, w.f))
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.verdict, self.certificate) {
            (Verdict::Pass, Certificate::Symbolic) => f.write_str("PASS (symbolic certificate)")?,
            (Verdict::Pass, Certificate::Grid) => write!(f, "PASS (grid, {} points)", self.checked)?,
            (Verdict::Fail, _) => f.write_str("FAIL")?,
            (Verdict::Inconclusive, _) => f.write_str("INCONCLUSIVE")?,
        }
        for w in &self.witnesses {
            write!(f, "\nwitness p={} f={}: {} != {}", w.p, w.f, w.lhs, w.rhs)?;
        }
        for n in &self.notes {
            write!(f, "\nnote: {}", n)?;
        }
        Ok(())
    }
}

#[cfg(feature = "std")]
trait MaybeSync: Sync {}
#[cfg(feature = "std")]
impl<T: Sync + ?Sized> MaybeSync for T {}
#[cfg(not(feature = "std"))]
trait MaybeSync {}
#[cfg(not(feature = "std"))]
impl<T: ?Sized> MaybeSync for T {}

enum Outcome {
    Equal,
    Differ(Witness),
    Skipped(String),
}

/// Runs `cmp` at every grid point (in parallel with `std`) and assembles a
/// report with sorted witnesses.
fn run_grid<F>(points: &[(u64, u32)], cmp: F) -> Result<Report, LocalMapError>
where
    F: Fn(u64, u32) -> Result<(YRational, YRational), LocalMapError> + MaybeSync,
{
    let one = |&(p, f): &(u64, u32)| -> Result<Outcome, LocalMapError> {
        match cmp(p, f) {
            Ok((lhs, rhs)) if lhs.equal(&rhs) => Ok(Outcome::Equal),
            Ok((lhs, rhs)) => Ok(Outcome::Differ(Witness { p, f, lhs, rhs })),
            Err(LocalMapError::Geom(GeomError::BudgetExceeded { .. })) => {
                Ok(Outcome::Skipped(format!("p={} f={} skipped: counting budget exceeded", p, f)))
            }
            Err(e) => Err(e),
        }
    };
    #[cfg(feature = "std")]
    let outcomes: Vec<Result<Outcome, LocalMapError>> = {
        use rayon::prelude::*;
        points.par_iter().map(one).collect()
    };
    #[cfg(not(feature = "std"))]
    let outcomes: Vec<Result<Outcome, LocalMapError>> = points.iter().map(one).collect();

    let mut report =
        Report { verdict: Verdict::Pass, certificate: Certificate::Grid, witnesses: Vec::new(), notes: Vec::new(), checked: 0 };
    for o in outcomes {
        match o? {
            Outcome::Equal => report.checked += 1,
            Outcome::Differ(w) => {
                report.checked += 1;
                report.witnesses.push(w);
            }
            Outcome::Skipped(n) => report.notes.push(n),
        }
    }
    report.verdict = if !report.witnesses.is_empty() {
        Verdict::Fail
    } else if report.checked == 0 {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    Ok(report)
}

fn with_budget(ev: &Evaluator, grid: &Grid) -> Evaluator {
    let mut opts = ev.options().clone();
    opts.fit.count.budget = grid.budget;
    Evaluator::new(opts)
}

/// Uniform representative over the grid primes, if every term has one.
fn representative(ev: &Evaluator, f: &LocalMapFormula, grid: &Grid) -> Option<CycloRational> {
    ev.uniformize(f, &grid.primes).representative().cloned()
}

/// Compares `evaluate(f1)` and `evaluate(f2)` on the grid.
pub fn equiv_check(
    ev: &Evaluator,
    f1: &LocalMapFormula,
    f2: &LocalMapFormula,
    grid: &Grid,
) -> Result<Report, LocalMapError> {
    if f1.m() != f2.m() {
        return Err(LocalMapError::MixedArity { term: 0, expected: f1.m(), found: f2.m() });
    }
    let ev = with_budget(ev, grid);
    let points = grid.points(&|p| f1.is_excluded(p) || f2.is_excluded(p));
    let mut report = run_grid(&points, |p, f| Ok((ev.evaluate(f1, p, f)?, ev.evaluate(f2, p, f)?)))?;
    if report.verdict == Verdict::Pass {
        match (representative(&ev, f1, grid), representative(&ev, f2, grid)) {
            (Some(a), Some(b)) if a.equal(&b) => report.certificate = Certificate::Symbolic,
            (Some(_), Some(_)) => report.notes.push("uniform representatives differ".into()),
            _ => report.notes.push("no uniform representative; grid evidence only".into()),
        }
    }
    Ok(report)
}

/// Compares `evaluate(f)` with `w(p^f, Y)` on the grid.
pub fn uniform_check(
    ev: &Evaluator,
    formula: &LocalMapFormula,
    w: &CycloRational,
    grid: &Grid,
) -> Result<Report, LocalMapError> {
    let mut target = LocalMapFormula::single(w.clone());
    if w.m() != formula.m() {
        return Err(LocalMapError::MixedArity { term: 0, expected: formula.m(), found: w.m() });
    }
    target = LocalMapFormula::new(target.terms().to_vec(), formula.m(), formula.excluded_primes().iter().copied())?;
    equiv_check(ev, formula, &target, grid)
}

/// Checks `Z_*(p, -f) = ε · p^{a f} · Y^b · Z(p, f)` on the grid and, for a
/// uniform representative `W`, `W(X^{-1}, Y^{-1}) = ε X^a Y^b W`.
pub fn funeq_check(
    ev: &Evaluator,
    formula: &LocalMapFormula,
    eps: i64,
    xexp: i64,
    yexp: &[i64],
    grid: &Grid,
) -> Result<Report, LocalMapError> {
    assert!(eps == 1 || eps == -1, "sign must be ±1");
    if yexp.len() != formula.m() {
        return Err(LocalMapError::MixedArity { term: 0, expected: formula.m(), found: yexp.len() });
    }
    let ev = with_budget(ev, grid);
    let points = grid.points(&|p| formula.is_excluded(p));
    let epsr = BigRational::from_integer(BigInt::from(eps));
    let mut report = run_grid(&points, |p, f| {
        let lhs = ev.evaluate_star(formula, p, -(f as i64))?;
        let c = &epsr * int_pow(p, xexp * f as i64);
        let rhs = ev.evaluate(formula, p, f)?.mul_monomial(yexp, &c);
        Ok((lhs, rhs))
    })?;
    if report.verdict == Verdict::Pass {
        match representative(&ev, formula, grid) {
            Some(w) => {
                let mut e = vec![xexp];
                e.extend_from_slice(yexp);
                let rhs = w.mul_laurent(&Laurent::monomial(e, epsr));
                if w.invert_vars().equal(&rhs) {
                    report.certificate = Certificate::Symbolic;
                } else {
                    report.notes.push("symbolic identity fails for the uniform representative".into());
                }
            }
            None => report.notes.push("no uniform representative; grid evidence only".into()),
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::ConstructibleSet;
    use crate::localmap::Term;
    use crate::ratfun::tests::w;

    fn heis() -> LocalMapFormula {
        LocalMapFormula::single(w("(1 - Y1)/(1 - X*Y1)"))
    }

    fn small() -> Grid {
        Grid::new(vec![2, 3, 5, 7, 11], vec![1, 2])
    }

    #[test]
    fn default_grid() {
        let g = Grid::default();
        assert_eq!(g.primes.len(), 15);
        assert_eq!(g.points(&|p| p == 2)[0], (3, 1));
    }

    #[test]
    fn equivalences() {
        let ev = Evaluator::default();
        let wa = w("(1 - Y1)/(1 - X*Y1)");
        let a = LocalMapFormula::new(vec![Term::new(ConstructibleSet::affine(1), wa.clone())], 1, []).unwrap();
        let b = LocalMapFormula::single(w("X*(1 - Y1)/(1 - X*Y1)"));
        let r = equiv_check(&ev, &a, &b, &small()).unwrap();
        assert_eq!((r.verdict, r.certificate), (Verdict::Pass, Certificate::Symbolic));
        let red = LocalMapFormula::single(w("(1 - Y1)*(1 - X^2*Y1)/((1 - X*Y1)*(1 - X^2*Y1))"));
        let r = equiv_check(&ev, &heis(), &red, &small()).unwrap();
        assert_eq!(r.certificate, Certificate::Symbolic);
        let circle = ConstructibleSet::parse("vars x,y; eq x^2 + y^2 - 1").unwrap();
        let c = LocalMapFormula::new(vec![Term::new(circle, w("1"))], 1, []).unwrap();
        let r = equiv_check(&ev, &c, &LocalMapFormula::single(w("X - 1")), &small()).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        // p = 2 has one point fewer than q - 1 + 2; p = 3 is the first p ≡ 3 mod 4
        assert_eq!(r.first_witness(), Some((2, 1)));
        assert!(r.witnesses.iter().any(|w| w.p == 3));
        assert!(r.witnesses.iter().all(|w| w.p % 4 != 1));
        assert!(r.to_string().starts_with("FAIL\nwitness p=2 f=1"));
    }

    #[test]
    fn uniform_checks() {
        let ev = Evaluator::default();
        let r = uniform_check(&ev, &heis(), &w("(1 - Y1)/(1 - X*Y1)"), &small()).unwrap();
        assert_eq!(r.to_string(), "PASS (symbolic certificate)");
        let r = uniform_check(&ev, &heis(), &w("(1 - Y1)/(1 - X^2*Y1)"), &small()).unwrap();
        assert_eq!(r.first_witness(), Some((2, 1)));
    }

    #[test]
    fn functional_equations() {
        let ev = Evaluator::default();
        // W(X^{-1}, Y^{-1}) = X·W, no power of Y
        let r = funeq_check(&ev, &heis(), 1, 1, &[0], &small()).unwrap();
        assert_eq!((r.verdict, r.certificate), (Verdict::Pass, Certificate::Symbolic));
        let r = funeq_check(&ev, &heis(), 1, 1, &[1], &small()).unwrap();
        assert_eq!(r.first_witness(), Some((2, 1)));
        let r = funeq_check(&ev, &heis(), -1, 1, &[0], &small()).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.first_witness(), Some((2, 1)));
        let a3 = LocalMapFormula::single(w("1/((1 - Y1)*(1 - X*Y1)*(1 - X^2*Y1))"));
        let r = funeq_check(&ev, &a3, -1, 3, &[3], &small()).unwrap();
        assert_eq!(r.certificate, Certificate::Symbolic);
    }

    #[test]
    fn budget_is_reported() {
        let ev = Evaluator::default();
        let big = ConstructibleSet::parse("vars x,y,z,w; eq x*y*z*w + x^3 + y^3 + z^2*w - 1").unwrap();
        let f = LocalMapFormula::new(vec![Term::new(big, w("1"))], 1, []).unwrap();
        let grid = Grid { primes: vec![47], f_range: vec![3], budget: 1000 };
        let r = equiv_check(&ev, &f, &f, &grid).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert_eq!(r.notes.len(), 1);
    }
}
