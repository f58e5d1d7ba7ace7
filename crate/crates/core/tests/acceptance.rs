//! End-to-end acceptance checks. Each check prints one status line and
//! asserts its runtime limit; the checks run one at a time so the timings
//! are not distorted by each other.

use std::io::Write;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zk_core::mring::{check_membership, red};
use zk_core::oracles::{catalog, igusa_principal_exact, igusa_truncated, subzeta_coeffs};
use zk_core::verify::{equiv_check, funeq_check, Grid};
use zk_core::weil::{euler_characteristic, fit_set, FitOptions};
use zk_core::{
    AlgebraPresentation, BigInt, BigRational, Certificate, ClosureMode, ConstructibleSet, CycloFactor, CycloRational,
    Evaluator, Laurent, LocalMapFormula, MonomialIdealSet, Term, Uniformity, Verdict, WeilError,
};

static SERIAL: Mutex<()> = Mutex::new(());

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn q_pow(p: u64, e: i64) -> BigRational {
    let base = BigRational::from_integer(BigInt::from(p));
    if e >= 0 {
        base.pow(e as i32)
    } else {
        BigRational::one() / base.pow((-e) as i32)
    }
}

/// Runs `body` under the lock, prints the status line and enforces `limit`.
fn criterion(n: u32, title: &str, limit: Duration, body: impl FnOnce() -> Result<(), String>) {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let result = body();
    let elapsed = start.elapsed();
    let status = match (&result, elapsed <= limit) {
        (Ok(()), true) => "PASS".to_string(),
        (Ok(()), false) => format!("FAIL (took {:.2?}, limit {:?})", elapsed, limit),
        (Err(e), _) => format!("FAIL ({})", e),
    };
    let _ = writeln!(std::io::stderr(), "criterion {:>2} {:<34} {:>9.2?}  {}", n, title, elapsed, status);
    assert!(result.is_ok(), "criterion {}: {}", n, result.unwrap_err());
    assert!(elapsed <= limit, "criterion {} took {:?}, limit {:?}", n, elapsed, limit);
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

#[test]
fn c01_heisenberg_base_extension() {
    criterion(1, "Heisenberg base extension", Duration::from_secs(1), || {
        let f = catalog("heisenberg_twist_irr").unwrap();
        let ev = Evaluator::default();
        for p in Grid::default().primes {
            for fdeg in 1..=3u32 {
                let z = ev.evaluate(&f, p, fdeg).map_err(|e| e.to_string())?;
                let q = q_pow(p, fdeg as i64);
                // (1 - Y)/(1 - qY) = 1 + Σ_{k≥1} q^{k-1}(q - 1) Y^k
                let mut want = vec![BigRational::one()];
                for k in 1..=6 {
                    want.push(q.pow(k - 1) * (&q - BigRational::one()));
                }
                ensure(z.series(6).as_deref() == Some(&want[..]), || format!("p={} f={}: {}", p, fdeg, z))?;
                let y = r(2, 3);
                let closed = (BigRational::one() - &y) / (BigRational::one() - &q * &y);
                ensure(z.eval(&[y]) == Some(closed), || format!("p={} f={} value", p, fdeg))?;
            }
        }
        Ok(())
    });
}

#[test]
fn c02_abelian_functional_equation() {
    criterion(2, "abelian functional equation", Duration::from_secs(5), || {
        let ev = Evaluator::default();
        for d in 1..=5i64 {
            let f = catalog(&format!("abelian_sub({})", d)).unwrap();
            let eps = if d % 2 == 0 { 1 } else { -1 };
            let rep = funeq_check(&ev, &f, eps, d * (d - 1) / 2, &[d], &Grid::default()).map_err(|e| e.to_string())?;
            ensure(rep.verdict == Verdict::Pass && rep.certificate == Certificate::Symbolic, || {
                format!("d={}: {}", d, rep)
            })?;
        }
        Ok(())
    });
}

fn heisenberg_funeq(yexp: i64) -> Result<(), String> {
    let ev = Evaluator::default();
    let f = catalog("heisenberg_twist_irr").unwrap();
    let rep = funeq_check(&ev, &f, 1, 1, &[yexp], &Grid::default()).map_err(|e| e.to_string())?;
    ensure(rep.verdict == Verdict::Pass && rep.certificate == Certificate::Symbolic, || {
        format!("eps=+1 xexp=1 yexp={}: {}", yexp, rep.to_string().lines().take(2).collect::<Vec<_>>().join("; "))
    })?;
    let neg = funeq_check(&ev, &f, -1, 1, &[yexp], &Grid::default()).map_err(|e| e.to_string())?;
    ensure(neg.verdict == Verdict::Fail && neg.first_witness() == Some((2, 1)), || {
        format!("negated sign: {:?} {:?}", neg.verdict, neg.first_witness())
    })
}

/// Checked exactly as stated, with `Y^1`. `W(X^{-1}, Y^{-1}) = X·W` for
/// `W = (1 - Y)/(1 - XY)`, so this fails at `(2, 1)`; run it with
/// `--include-ignored` to see the failure.
#[test]
#[ignore = "fails: the Heisenberg identity carries Y^0, not Y^1"]
fn c03_heisenberg_functional_equation() {
    criterion(3, "Heisenberg functional equation", Duration::from_secs(5), || heisenberg_funeq(1));
}

#[test]
fn c03_heisenberg_functional_equation_y0() {
    criterion(3, "Heisenberg funeq with Y^0", Duration::from_secs(5), || heisenberg_funeq(0));
}

#[test]
fn c04_topological_reduction() {
    criterion(4, "topological reduction", Duration::from_secs(1), || {
        let samples = [r(7, 2), r(-5, 3), r(11, 1), r(1, 9)];
        for d in 1..=5i64 {
            let f = catalog(&format!("abelian_sub_corrected({})", d)).unwrap();
            let red_w = red(&f.terms()[0].w).map_err(|e| e.to_string())?;
            for s in &samples {
                let want = BigRational::one() / (0..d).fold(BigRational::one(), |acc, i| acc * (s - r(i, 1)));
                ensure(red_w.eval(std::slice::from_ref(s)) == Some(want), || format!("d={} s={}: {}", d, s, red_w))?;
            }
            let topo = Evaluator::default().topological(&f).map_err(|e| e.to_string())?;
            ensure(topo == red_w, || format!("d={}: topo {} vs red {}", d, topo, red_w))?;
        }
        let topo = Evaluator::default().topological(&catalog("heisenberg_twist_irr").unwrap()).map_err(|e| e.to_string())?;
        for s in &samples {
            ensure(topo.eval(std::slice::from_ref(s)) == Some(s / (s - BigRational::one())), || topo.to_string())?;
        }
        ensure(topo.to_string() == "s1/(s1 - 1)", || topo.to_string())
    });
}

#[test]
fn c05_oracle_agreement() {
    criterion(5, "lattice oracle agreement", Duration::from_secs(60), || {
        let ev = Evaluator::default();
        for d in 1..=3usize {
            let f = catalog(&format!("abelian_sub({})", d)).unwrap();
            let alg = AlgebraPresentation::abelian(d, ClosureMode::Subalgebra);
            for p in [2u64, 3, 5] {
                let oracle = subzeta_coeffs(&alg, p, 4).map_err(|e| e.to_string())?;
                let series = ev.evaluate(&f, p, 1).map_err(|e| e.to_string())?.series(4).unwrap();
                let oracle: Vec<BigRational> = oracle.iter().map(|&c| BigRational::from_integer(c.into())).collect();
                ensure(oracle == series, || format!("d={} p={}: {:?} vs {:?}", d, p, oracle, series))?;
            }
        }
        Ok(())
    });
}

#[test]
fn c06_weil_extension() {
    criterion(6, "Weil extension to negative f", Duration::from_secs(5), || {
        for n in 1..=2usize {
            for p in [2u64, 3, 5] {
                let model = fit_set(&ConstructibleSet::torus(n), p, &FitOptions::default()).map_err(|e| e.to_string())?;
                for f in -3..=-1i64 {
                    let want = (q_pow(p, f) - BigRational::one()).pow(n as i32);
                    let got = model.extend_count(f).map_err(|e| e.to_string())?;
                    ensure(got == want, || format!("torus({}) p={} f={}: {} vs {}", n, p, f, got, want))?;
                }
                // run the recurrence forward from the window f = 1-L, …, 0
                let rec = model.recurrence();
                let l = rec.len() as i64;
                let mut window: Vec<BigRational> =
                    (1 - l..=0).map(|f| model.extend_count(f)).collect::<Result<_, WeilError>>().map_err(|e| e.to_string())?;
                let next = rec.iter().zip(window.iter().rev()).fold(BigRational::zero(), |acc, (c, s)| acc + c * s);
                window.push(next.clone());
                ensure(next == model.counts()[0], || format!("torus({}) p={}: N1 {} vs {}", n, p, next, model.counts()[0]))?;
            }
        }
        Ok(())
    });
}

#[test]
fn c07_non_uniformity_detection() {
    criterion(7, "non-uniformity detection", Duration::from_secs(5), || {
        let circle = ConstructibleSet::parse("vars x,y; eq x^2 + y^2 - 1").unwrap();
        let primes = [5u64, 7, 11, 13];
        let pair = match euler_characteristic(&circle, &primes, &FitOptions::default()) {
            Err(WeilError::NonUniformCount { first, second }) => (first, second),
            other => return Err(format!("expected NonUniformCount, got {:?}", other)),
        };
        ensure(pair.0 % 4 != pair.1 % 4, || format!("witness {:?} within one residue class", pair))?;
        let f = LocalMapFormula::new(vec![Term::new(circle, CycloRational::one(1))], 1, []).unwrap();
        match Evaluator::default().uniformize(&f, &primes) {
            u @ Uniformity::Absent { .. } => ensure(u.witness() == Some(pair), || format!("{:?}", u.witness())),
            Uniformity::Uniform { w, .. } => Err(format!("unexpectedly uniform: {}", w)),
        }
    });
}

#[test]
fn c08_igusa_oracle() {
    criterion(8, "Igusa oracle", Duration::from_secs(10), || {
        let (v, t) = igusa_truncated(&MonomialIdealSet::principal(vec![2]), 3, &[1], 20).map_err(|e| e.to_string())?;
        ensure(t <= q_pow(3, -21) && (&v - r(9, 13)).abs() <= q_pow(3, -21), || format!("(x^2): {}", v))?;
        let (v, t) = igusa_truncated(&MonomialIdealSet::principal(vec![2, 1]), 3, &[2], 12).map_err(|e| e.to_string())?;
        let bound = q_pow(3, -13) * r(2, 1);
        ensure(t <= bound && (&v - r(729, 1573)).abs() <= bound, || format!("(x1^2 x2): {}", v))?;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..10 {
            let n = rng.gen_range(1..=3usize);
            let e: Vec<u32> = (0..n).map(|_| rng.gen_range(0..=3)).collect();
            let q = [2u64, 3, 5][rng.gen_range(0..3)];
            let s = rng.gen_range(0..=3u32);
            let set = MonomialIdealSet::principal(e.clone());
            let (v, tail) = igusa_truncated(&set, q, &[s], 8).map_err(|e| e.to_string())?;
            let w = igusa_principal_exact(&set, false).map_err(|e| e.to_string())?;
            let exact = w.eval(&q_pow(q, 1), &[q_pow(q, -(s as i64))]).ok_or("pole")?;
            ensure((&v - &exact).abs() <= tail, || format!("e={:?} q={} s={}: {} vs {}", e, q, s, v, exact))?;
        }
        Ok(())
    });
}

fn random_laurent(rng: &mut ChaCha8Rng, m: usize, terms: usize) -> Laurent {
    let mut p = Laurent::zero(m + 1);
    for _ in 0..terms {
        let mut e = vec![rng.gen_range(-2..=2i64)];
        e.extend((0..m).map(|_| rng.gen_range(0..=2i64)));
        p.add_term(e, r(rng.gen_range(-4..=4), 1));
    }
    p
}

fn random_factor(rng: &mut ChaCha8Rng, m: usize) -> CycloFactor {
    loop {
        let a = rng.gen_range(-1..=3i64);
        let b: Vec<i64> = (0..m).map(|_| rng.gen_range(0..=2)).collect();
        if let Ok(f) = CycloFactor::new(a, b) {
            return f;
        }
    }
}

fn random_cyclo(rng: &mut ChaCha8Rng, m: usize) -> CycloRational {
    let terms = rng.gen_range(1..=4);
    let mut w = CycloRational::from_laurent(random_laurent(rng, m, terms));
    for _ in 0..rng.gen_range(0..=3) {
        w = w.mul(&CycloRational::inverse_factor(random_factor(rng, m)));
    }
    w
}

#[test]
fn c09_equivalence_rigidity() {
    criterion(9, "equivalence rigidity", Duration::from_secs(10), || {
        let ev = Evaluator::default();
        let grid = Grid::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let x = Laurent::var(2, 0, 1);
        let affine = |w: &CycloRational| LocalMapFormula::new(vec![Term::new(ConstructibleSet::affine(1), w.clone())], 1, []);
        for i in 0..20 {
            let w = random_cyclo(&mut rng, 1);
            let lhs = affine(&w).unwrap();
            let rhs = LocalMapFormula::single(w.mul_laurent(&x));
            let rep = equiv_check(&ev, &lhs, &rhs, &grid).map_err(|e| e.to_string())?;
            ensure(rep.verdict == Verdict::Pass && rep.certificate == Certificate::Symbolic, || {
                format!("sample {} W={}: {}", i, w, rep)
            })?;
        }
        // perturb by (X - 2)(X - 4)·Y, which vanishes exactly at q = 2 and q = 4
        let w = random_cyclo(&mut rng, 1);
        let bump = CycloRational::parse("(X - 2)*(X - 4)*Y", 1).unwrap();
        let perturbed = LocalMapFormula::single(w.mul_laurent(&x).add(&bump));
        let rep = equiv_check(&ev, &affine(&w).unwrap(), &perturbed, &grid).map_err(|e| e.to_string())?;
        let want = grid
            .points(&|_| false)
            .into_iter()
            .find(|&(p, f)| {
                let q = p.pow(f);
                q != 2 && q != 4
            });
        ensure(rep.verdict == Verdict::Fail && rep.first_witness() == want, || {
            format!("perturbed: {:?} first witness {:?}, want {:?}", rep.verdict, rep.first_witness(), want)
        })?;
        ensure(want == Some((2, 3)), || format!("{:?}", want))
    });
}

/// A random element of M: every denominator factor is matched by a
/// numerator factor `1 - X^c Y^d` vanishing at `X = 1`.
fn random_member(rng: &mut ChaCha8Rng, m: usize, den: &[CycloFactor]) -> CycloRational {
    let terms = rng.gen_range(1..=3);
    let mut num = random_laurent(rng, m, terms);
    if num.is_zero() {
        num = Laurent::one(m + 1);
    }
    let mut w = CycloRational::from_laurent(num);
    for f in den {
        w = w.mul(&CycloRational::inverse_factor(f.clone()));
        w = w.mul_laurent(&random_factor(rng, m).as_laurent());
    }
    w
}

#[test]
fn c10_mring_homomorphism() {
    criterion(10, "mring homomorphism suite", Duration::from_secs(30), || {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for i in 0..200 {
            let m = rng.gen_range(1..=2usize);
            let den: Vec<CycloFactor> = (0..rng.gen_range(0..=2)).map(|_| random_factor(&mut rng, m)).collect();
            let w1 = random_member(&mut rng, m, &den);
            let w2 = random_member(&mut rng, m, &den);
            for w in [&w1, &w2] {
                ensure(check_membership(w).in_m, || format!("sample {}: {} not in M", i, w))?;
            }
            let (r1, r2) = (red(&w1).map_err(|e| e.to_string())?, red(&w2).map_err(|e| e.to_string())?);
            let prod = red(&w1.mul(&w2)).map_err(|e| e.to_string())?;
            ensure(prod == r1.mul(&r2), || format!("sample {}: red(W1 W2) for {} and {}", i, w1, w2))?;
            let sum = red(&w1.add(&w2)).map_err(|e| e.to_string())?;
            ensure(sum == r1.add(&r2), || format!("sample {}: red(W1 + W2) for {} and {}", i, w1, w2))?;
        }
        for i in 0..200 {
            let m = rng.gen_range(1..=3usize);
            let w = random_cyclo(&mut rng, m);
            let back = w.invert_vars().invert_vars();
            ensure(back == w && back.equal(&w), || format!("sample {}: {}", i, w))?;
        }
        Ok(())
    });
}
