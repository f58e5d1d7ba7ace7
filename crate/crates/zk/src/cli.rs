//! The `zk` command line.
//!
//! Exit codes: 0 on success, 1 when a check fails (verification failure,
//! non-uniform counts, no uniform representative), 2 on usage, parse and
//! computation errors.

use std::fmt::Write as _;
use std::path::Path;

use clap::{Args, Parser, Subcommand};
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zk_core::geom::DEFAULT_BUDGET;
use zk_core::oracles::{catalog, igusa_principal_exact, igusa_truncated, subzeta_coeffs_with, CATALOG_NAMES};
use zk_core::verify::{equiv_check, funeq_check, primes_below, uniform_check};
use zk_core::weil::{euler_characteristic, DEFAULT_DEPTH, DEFAULT_SLACK};
use zk_core::{
    BigInt, BigRational, ConstructibleSet, CountOptions, CycloRational, Evaluator, EvaluatorOptions, Grid, HatValue,
    Laurent, LocalMapFormula, MonomialIdealSet, Report, TermOrder, Uniformity, Verdict, WeilModel,
};

use crate::alg::parse_algebra;
use crate::lmf::{parse_formula_file, write_formula};

#[derive(Parser, Debug)]
#[command(name = "zk", version, about = "Exact local maps of Denef type")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
struct FitArgs {
    /// Cap on evaluations per counting call.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Largest f used when fitting a Weil model.
    #[arg(long, default_value_t = DEFAULT_DEPTH)]
    depth: u32,
    /// Extra counts that must confirm a fitted recurrence.
    #[arg(long, default_value_t = DEFAULT_SLACK)]
    slack: usize,
}

#[derive(Args, Debug, Clone)]
struct GridArgs {
    /// Comma-separated primes.
    #[arg(long, conflicts_with = "primes_below")]
    primes: Option<String>,
    #[arg(long, value_name = "N")]
    primes_below: Option<u64>,
    /// Inclusive range `a..b` of extension degrees.
    #[arg(long, default_value = "1..3")]
    frange: String,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Number of points of a variety over F_{p^f}.
    Count {
        #[arg(long)]
        variety: String,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        f: u32,
        #[command(flatten)]
        fit: FitArgs,
    },
    /// Weil model of a variety at p; with --f, the extended count.
    Weil {
        #[arg(long)]
        variety: String,
        #[arg(long)]
        p: u64,
        #[arg(long, allow_negative_numbers = true)]
        f: Option<i64>,
        #[command(flatten)]
        fit: FitArgs,
    },
    /// Euler characteristic inferred from uniform point counts.
    Chi {
        #[arg(long)]
        variety: String,
        #[arg(long)]
        primes: Option<String>,
        #[command(flatten)]
        fit: FitArgs,
    },
    /// Z(p, f) as a rational function in Y; with --s, its value at Y = p^{-fs}.
    Eval {
        #[arg(long)]
        formula: String,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        f: u32,
        /// Comma-separated exponents, one per Y variable.
        #[arg(long, allow_hyphen_values = true)]
        s: Option<String>,
        #[arg(long, default_value_t = 64)]
        bits: u32,
        #[command(flatten)]
        fit: FitArgs,
    },
    /// Z_*(p, f) for any nonzero integer f.
    Evalstar {
        #[arg(long)]
        formula: String,
        #[arg(long)]
        p: u64,
        #[arg(long, allow_negative_numbers = true)]
        f: i64,
        #[command(flatten)]
        fit: FitArgs,
    },
    /// Reduction mod (X - 1) of a rational function.
    Red {
        #[arg(long, allow_hyphen_values = true)]
        w: String,
        #[arg(long, default_value_t = 1)]
        m: usize,
    },
    /// Topological limit of a formula.
    Topo {
        #[arg(long)]
        formula: String,
        #[arg(long)]
        primes: Option<String>,
        #[command(flatten)]
        fit: FitArgs,
    },
    /// A single rational function W with Z(p, f) = W(p^f, Y).
    Uniformize {
        #[arg(long)]
        formula: String,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        fit: FitArgs,
    },
    /// Compare a formula with another formula or with a target W.
    Equiv {
        #[arg(long)]
        formula: String,
        #[arg(long, required_unless_present = "target_w", conflicts_with = "target_w")]
        other: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        target_w: Option<String>,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        fit: FitArgs,
    },
    /// Check Z_*(p, -f) = eps * p^{xexp f} * Y^yexp * Z(p, f).
    Funeq {
        #[arg(long)]
        formula: String,
        #[arg(long, allow_hyphen_values = true)]
        eps: String,
        #[arg(long, allow_negative_numbers = true)]
        xexp: i64,
        #[arg(long, allow_hyphen_values = true)]
        yexp: String,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        fit: FitArgs,
    },
    /// Counts of finite-index subobjects by brute force.
    OracleSubzeta {
        #[arg(long)]
        alg: String,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        kmax: u32,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Truncated Igusa integral of monomial ideals.
    OracleIgusa {
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Generators as monomials in x1..xn, comma-separated; repeat per ideal.
        #[arg(long)]
        ideal: Vec<String>,
        #[arg(long, default_value_t = 3)]
        q: u64,
        /// Comma-separated exponents, one per ideal.
        #[arg(long, default_value = "1")]
        s: String,
        #[arg(long, default_value_t = 12)]
        bound: u32,
        /// Also compare with the closed form (principal ideals only).
        #[arg(long)]
        exact: bool,
        /// Check N random principal cases instead.
        #[arg(long, value_name = "N")]
        random: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print a catalog formula, or list the names.
    Catalog { name: Option<String> },
}

/// Result of [`run`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { code: 0, stdout, stderr: String::new() }
    }

    fn check(pass: bool, stdout: String) -> Self {
        Outcome { code: if pass { 0 } else { 1 }, stdout, stderr: String::new() }
    }

    fn usage(msg: impl Into<String>) -> Self {
        let mut stderr = msg.into();
        if !stderr.ends_with('\n') {
            stderr.push('\n');
        }
        Outcome { code: 2, stdout: String::new(), stderr }
    }
}

type CmdResult = Result<Outcome, String>;

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => Outcome::ok(text),
                _ => Outcome::usage(text),
            };
        }
    };
    match dispatch(cli.cmd) {
        Ok(o) => o,
        Err(msg) => Outcome::usage(format!("error: {}", msg)),
    }
}

fn line(s: impl std::fmt::Display) -> String {
    format!("{}\n", s)
}

fn evaluator(fit: &FitArgs) -> Evaluator {
    let mut opts = EvaluatorOptions::default();
    opts.fit.depth = fit.depth;
    opts.fit.slack = fit.slack;
    opts.fit.count.budget = fit.budget;
    Evaluator::new(opts)
}

fn count_options(fit: &FitArgs) -> CountOptions {
    CountOptions { budget: fit.budget, ..CountOptions::default() }
}

fn load_formula(src: &str) -> Result<LocalMapFormula, String> {
    if let Some(name) = src.strip_prefix("catalog:") {
        return catalog(name).map_err(|e| e.to_string());
    }
    parse_formula_file(Path::new(src)).map_err(|e| format!("{}: {}", src, e))
}

fn parse_set(src: &str) -> Result<ConstructibleSet, String> {
    ConstructibleSet::parse(src).map_err(|e| e.to_string())
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<T>().map_err(|_| format!("invalid {} '{}'", what, t.trim())))
        .collect()
}

fn parse_rational(s: &str) -> Result<BigRational, String> {
    let t = s.trim();
    let bad = || format!("invalid rational '{}'", t);
    match t.split_once('/') {
        Some((a, b)) => {
            let a: BigInt = a.trim().parse().map_err(|_| bad())?;
            let b: BigInt = b.trim().parse().map_err(|_| bad())?;
            if b.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(a, b))
        }
        None => Ok(BigRational::from_integer(t.parse().map_err(|_| bad())?)),
    }
}

fn parse_frange(s: &str) -> Result<Vec<u32>, String> {
    let bad = || format!("invalid --frange '{}', expected a..b", s);
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let a: u32 = a.trim().parse().map_err(|_| bad())?;
    let b: u32 = b.trim().parse().map_err(|_| bad())?;
    if a == 0 || b < a {
        return Err(bad());
    }
    Ok((a..=b).collect())
}

fn grid(g: &GridArgs, fit: &FitArgs) -> Result<Grid, String> {
    let primes = match (&g.primes, g.primes_below) {
        (Some(list), _) => parse_list::<u64>(list, "prime")?,
        (None, Some(n)) => primes_below(n),
        (None, None) => Grid::default().primes,
    };
    Ok(Grid { primes, f_range: parse_frange(&g.frange)?, budget: fit.budget })
}

fn sample_primes(ev: &Evaluator, primes: &Option<String>) -> Result<Vec<u64>, String> {
    match primes {
        Some(list) => parse_list(list, "prime"),
        None => Ok(ev.options().sample_primes.clone()),
    }
}

fn report(r: Report) -> Outcome {
    Outcome::check(r.verdict == Verdict::Pass, line(r))
}

fn dispatch(cmd: Cmd) -> CmdResult {
    match cmd {
        Cmd::Count { variety, p, f, fit } => {
            let set = parse_set(&variety)?;
            let n = set.count_points_with(p, f, &count_options(&fit)).map_err(|e| e.to_string())?;
            Ok(Outcome::ok(line(n)))
        }
        Cmd::Weil { variety, p, f, fit } => {
            let set = parse_set(&variety)?;
            let ev = evaluator(&fit);
            let model = ev.model(&set, p).map_err(|e| e.to_string())?;
            match f {
                Some(f) => Ok(Outcome::ok(line(model.extend_count(f).map_err(|e| e.to_string())?))),
                None => Ok(Outcome::ok(describe_model(&model))),
            }
        }
        Cmd::Chi { variety, primes, fit } => {
            let set = parse_set(&variety)?;
            let ev = evaluator(&fit);
            let primes = sample_primes(&ev, &primes)?;
            match euler_characteristic(&set, &primes, &ev.options().fit) {
                Ok(chi) => Ok(Outcome::ok(line(chi))),
                Err(e @ zk_core::WeilError::NonUniformCount { .. }) => Ok(Outcome::check(false, line(e))),
                Err(e) => Err(e.to_string()),
            }
        }
        Cmd::Eval { formula, p, f, s, bits, fit } => {
            let formula = load_formula(&formula)?;
            let ev = evaluator(&fit);
            match s {
                None => Ok(Outcome::ok(line(ev.evaluate(&formula, p, f).map_err(|e| e.to_string())?))),
                Some(s) => {
                    let s: Vec<BigRational> = s.split(',').map(parse_rational).collect::<Result<_, _>>()?;
                    if s.len() != formula.m() {
                        return Err(format!("--s needs {} values", formula.m()));
                    }
                    let v = ev.numeric_hat_eval(&formula, p, f, &s, bits).map_err(|e| e.to_string())?;
                    Ok(Outcome::ok(match v {
                        HatValue::Exact(x) => line(x),
                        HatValue::Interval { lo, hi } => format!("[{}, {}]\n", lo, hi),
                    }))
                }
            }
        }
        Cmd::Evalstar { formula, p, f, fit } => {
            let formula = load_formula(&formula)?;
            let z = evaluator(&fit).evaluate_star(&formula, p, f).map_err(|e| e.to_string())?;
            Ok(Outcome::ok(line(z)))
        }
        Cmd::Red { w, m } => {
            let w = CycloRational::parse(&w, m).map_err(|e| e.to_string())?;
            Ok(Outcome::ok(line(zk_core::mring::red(&w).map_err(|e| e.to_string())?)))
        }
        Cmd::Topo { formula, primes, fit } => {
            let formula = load_formula(&formula)?;
            let mut ev = evaluator(&fit);
            if primes.is_some() {
                let mut opts = ev.options().clone();
                opts.sample_primes = sample_primes(&ev, &primes)?;
                ev = Evaluator::new(opts);
            }
            Ok(Outcome::ok(line(ev.topological(&formula).map_err(|e| e.to_string())?)))
        }
        Cmd::Uniformize { formula, grid: g, fit } => {
            let formula = load_formula(&formula)?;
            let g = grid(&g, &fit)?;
            let ev = evaluator(&fit);
            let primes: Vec<u64> = g.primes.iter().copied().filter(|&p| !formula.is_excluded(p)).collect();
            match ev.uniformize(&formula, &primes) {
                Uniformity::Uniform { w, .. } => Ok(Outcome::ok(line(w))),
                Uniformity::Absent { term, reason } => {
                    Ok(Outcome::check(false, format!("absent: term {}: {}\n", term + 1, reason)))
                }
            }
        }
        Cmd::Equiv { formula, other, target_w, grid: g, fit } => {
            let formula = load_formula(&formula)?;
            let g = grid(&g, &fit)?;
            let ev = evaluator(&fit);
            let r = match (other, target_w) {
                (Some(o), _) => equiv_check(&ev, &formula, &load_formula(&o)?, &g),
                (None, Some(w)) => {
                    let w = CycloRational::parse(&w, formula.m()).map_err(|e| e.to_string())?;
                    uniform_check(&ev, &formula, &w, &g)
                }
                (None, None) => unreachable!("clap requires one of them"),
            };
            Ok(report(r.map_err(|e| e.to_string())?))
        }
        Cmd::Funeq { formula, eps, xexp, yexp, grid: g, fit } => {
            let formula = load_formula(&formula)?;
            let eps = match eps.trim() {
                "+1" | "1" => 1,
                "-1" => -1,
                other => return Err(format!("invalid --eps '{}', expected +1 or -1", other)),
            };
            let yexp: Vec<i64> = parse_list(&yexp, "exponent")?;
            let g = grid(&g, &fit)?;
            let r = funeq_check(&evaluator(&fit), &formula, eps, xexp, &yexp, &g).map_err(|e| e.to_string())?;
            Ok(report(r))
        }
        Cmd::OracleSubzeta { alg, p, kmax, budget } => {
            let src = std::fs::read_to_string(&alg).map_err(|e| format!("{}: {}", alg, e))?;
            let a = parse_algebra(&src).map_err(|e| format!("{}: {}", alg, e))?;
            let c = subzeta_coeffs_with(&a, p, kmax, budget).map_err(|e| e.to_string())?;
            let words: Vec<String> = c.iter().map(|x| x.to_string()).collect();
            Ok(Outcome::ok(line(words.join(" "))))
        }
        Cmd::OracleIgusa { n, ideal, q, s, bound, exact, random, seed } => match random {
            Some(count) => igusa_random(count, seed),
            None => {
                if ideal.is_empty() {
                    return Err("--ideal is required".into());
                }
                let ideals: Vec<Vec<Vec<u32>>> =
                    ideal.iter().map(|g| parse_ideal(g, n)).collect::<Result<_, _>>()?;
                let set = MonomialIdealSet::new(n, ideals).map_err(|e| e.to_string())?;
                let s: Vec<u32> = parse_list(&s, "exponent")?;
                let (v, tail) = igusa_truncated(&set, q, &s, bound).map_err(|e| e.to_string())?;
                let mut out = format!("value {}\ntail {}\n", v, tail);
                if !exact {
                    return Ok(Outcome::ok(out));
                }
                let w = igusa_principal_exact(&set, false).map_err(|e| e.to_string())?;
                let x = exact_value(&w, q, s[0]);
                let within = (&v - &x).abs() <= tail;
                let _ = writeln!(out, "exact {}", x);
                let _ = writeln!(out, "{}", if within { "PASS" } else { "FAIL" });
                Ok(Outcome::check(within, out))
            }
        },
        Cmd::Catalog { name: None } => Ok(Outcome::ok(CATALOG_NAMES.iter().map(line).collect())),
        Cmd::Catalog { name: Some(name) } => {
            let f = catalog(&name).map_err(|e| e.to_string())?;
            Ok(Outcome::ok(write_formula(&f)))
        }
    }
}

fn describe_model(model: &WeilModel) -> String {
    let mut out = String::new();
    let counts: Vec<String> = model.counts().iter().map(|c| c.to_string()).collect();
    let rec: Vec<String> = model.recurrence().iter().map(|c| c.to_string()).collect();
    let _ = writeln!(out, "counts {}", counts.join(" "));
    let _ = writeln!(out, "order {}", model.order());
    let _ = writeln!(out, "recurrence {}", rec.join(" "));
    match model.polynomial_count() {
        Some(terms) => {
            let mut poly = Laurent::zero(1);
            for t in terms {
                poly.add_term(vec![t.j as i64], BigRational::from_integer(t.m.into()));
            }
            let _ = writeln!(out, "polynomial {}", poly.display(&["q".to_string()], TermOrder::Descending));
        }
        None => {
            let _ = writeln!(out, "polynomial none");
        }
    }
    out
}

/// Reads `x1^2*x2, x3` as a list of exponent vectors of length `n`.
fn parse_ideal(src: &str, n: usize) -> Result<Vec<Vec<u32>>, String> {
    src.split(',')
        .map(|g| {
            let mut e = vec![0u32; n];
            let g = g.trim();
            if g == "1" {
                return Ok(e);
            }
            for factor in g.split('*') {
                let factor = factor.trim();
                let (var, pow) = factor.split_once('^').unwrap_or((factor, "1"));
                let idx = match var {
                    "x" if n == 1 => 0,
                    _ => var
                        .strip_prefix('x')
                        .and_then(|i| i.parse::<usize>().ok())
                        .filter(|&i| (1..=n).contains(&i))
                        .ok_or_else(|| format!("invalid variable '{}' in ideal '{}'", var, src))?
                        - 1,
                };
                e[idx] += pow.trim().parse::<u32>().map_err(|_| format!("invalid exponent in '{}'", factor))?;
            }
            Ok(e)
        })
        .collect()
}

/// `W(q, q^{-s})`.
fn exact_value(w: &CycloRational, q: u64, s: u32) -> BigRational {
    let x = BigRational::from_integer(q.into());
    let y = BigRational::one() / x.pow(s as i32);
    w.eval(&x, &[y]).expect("no pole for s ≥ 0")
}

fn igusa_random(count: usize, seed: u64) -> CmdResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    let mut all = true;
    for _ in 0..count {
        let n = rng.gen_range(1..=2usize);
        let e: Vec<u32> = (0..n).map(|_| rng.gen_range(0..=3u32)).collect();
        let q = [2u64, 3, 5][rng.gen_range(0..3)];
        let s = rng.gen_range(0..=2u32);
        let b = 10;
        let set = MonomialIdealSet::principal(e.clone());
        let (v, tail) = igusa_truncated(&set, q, &[s], b).map_err(|e| e.to_string())?;
        let w = igusa_principal_exact(&set, false).map_err(|e| e.to_string())?;
        let x = exact_value(&w, q, s);
        let ok = (&v - &x).abs() <= tail;
        all &= ok;
        let _ = writeln!(out, "e={:?} q={} s={} B={}: {}", e, q, s, b, if ok { "ok" } else { "outside tail bound" });
    }
    let _ = writeln!(out, "{}", if all { "PASS" } else { "FAIL" });
    Ok(Outcome::check(all, out))
}
