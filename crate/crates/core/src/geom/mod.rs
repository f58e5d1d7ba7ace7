//! Constructible sets: signed combinations of affine systems over `Z`,
//! and their point counts over finite fields.
//!
//! Variety grammar:
//!
//! ```text
//! set     := builtin | inline | '{' inline '}'
//! builtin := 'point' | 'affine(' n ')' | 'torus(' n ')'
//!          | 'product(' set, … ')' | 'union(' set, … ')'
//!          | 'difference(' set ',' set ')'
//! inline  := 'vars' name, … (';' ('eq' | 'ineq') poly)*
//! ```

mod count;

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::ffield::FieldError;
use crate::parse::{parse_expr, ParseError};
use crate::poly::{Laurent, TermOrder};

pub use count::{CountMethod, CountOptions, DEFAULT_BUDGET};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i128 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn times(self, other: Sign) -> Sign {
        if self == other {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GeomError {
    Parse(ParseError),
    Arity { name: String, expected: &'static str, found: usize },
    InvalidPolynomial(String),
    BudgetExceeded { needed: u128, budget: u64 },
    NegativeCount { p: u64, f: u32, count: i128 },
    Field(FieldError),
}

impl fmt::Display for GeomError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeomError::Parse(e) => write!(f, "parse error {}", e),
            GeomError::Arity { name, expected, found } => {
                write!(f, "{} expects {} argument(s), found {}", name, expected, found)
            }
            GeomError::InvalidPolynomial(m) => write!(f, "invalid polynomial: {}", m),
            GeomError::BudgetExceeded { needed, budget } => {
                write!(f, "point count needs {} evaluations, budget is {}", needed, budget)
            }
            GeomError::NegativeCount { p, f: deg, count } => {
                write!(f, "signed count {} at p = {}, f = {} is negative", count, p, deg)
            }
            GeomError::Field(e) => write!(f, "{}", e),
        }
    }
}

impl core::error::Error for GeomError {}

impl From<ParseError> for GeomError {
    fn from(e: ParseError) -> Self {
        GeomError::Parse(e)
    }
}

impl From<FieldError> for GeomError {
    fn from(e: FieldError) -> Self {
        GeomError::Field(e)
    }
}

/// Common zeros of `equations` on which every inequation is nonzero, in
/// affine `n`-space.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AffineSystem {
    vars: Vec<String>,
    equations: Vec<Laurent>,
    inequations: Vec<Laurent>,
}

fn check_integral(p: &Laurent, n: usize) -> Result<(), GeomError> {
    if p.nvars() != n {
        return Err(GeomError::InvalidPolynomial(format!(
            "polynomial in {} variables used in a system of {}",
            p.nvars(),
            n
        )));
    }
    if !p.is_polynomial() {
        return Err(GeomError::InvalidPolynomial("negative exponent".into()));
    }
    if p.terms().any(|(_, c)| !c.is_integer()) {
        return Err(GeomError::InvalidPolynomial("non-integer coefficient".into()));
    }
    Ok(())
}

impl AffineSystem {
    /// Identically zero equations are dropped.
    pub fn new(
        vars: Vec<String>,
        equations: Vec<Laurent>,
        inequations: Vec<Laurent>,
    ) -> Result<Self, GeomError> {
        let n = vars.len();
        for p in equations.iter().chain(&inequations) {
            check_integral(p, n)?;
        }
        let equations = equations.into_iter().filter(|e| !e.is_zero()).collect();
        Ok(AffineSystem { vars, equations, inequations })
    }

    /// Variables named `x1, …, xn`.
    pub fn default_vars(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("x{}", i)).collect()
    }

    pub fn n(&self) -> usize {
        self.vars.len()
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn equations(&self) -> &[Laurent] {
        &self.equations
    }

    pub fn inequations(&self) -> &[Laurent] {
        &self.inequations
    }

    fn product(&self, other: &AffineSystem) -> AffineSystem {
        let (n1, n2) = (self.n(), other.n());
        let clash = self.vars.iter().any(|v| other.vars.contains(v));
        let vars = if clash {
            Self::default_vars(n1 + n2)
        } else {
            self.vars.iter().chain(&other.vars).cloned().collect()
        };
        let lift = |p: &Laurent, left: bool| {
            p.map_monomials_into(n1 + n2, |e| {
                let mut out = vec![0; n1 + n2];
                let at = if left { 0 } else { n1 };
                out[at..at + e.len()].copy_from_slice(e);
                out
            })
        };
        AffineSystem {
            vars,
            equations: self
                .equations
                .iter()
                .map(|p| lift(p, true))
                .chain(other.equations.iter().map(|p| lift(p, false)))
                .collect(),
            inequations: self
                .inequations
                .iter()
                .map(|p| lift(p, true))
                .chain(other.inequations.iter().map(|p| lift(p, false)))
                .collect(),
        }
    }
}

impl fmt::Display for AffineSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.vars.is_empty() && self.equations.is_empty() && self.inequations.is_empty() {
            return f.write_str("point");
        }
        write!(f, "vars {}", self.vars.join(","))?;
        for e in &self.equations {
            write!(f, "; eq {}", e.display(&self.vars, TermOrder::Descending))?;
        }
        for e in &self.inequations {
            write!(f, "; ineq {}", e.display(&self.vars, TermOrder::Descending))?;
        }
        Ok(())
    }
}

/// Signed sum of affine systems with an optional asserted Euler
/// characteristic of the complex points.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConstructibleSet {
    pieces: Vec<(Sign, AffineSystem)>,
    user_chi: Option<i64>,
}

/// Argument of [`ConstructibleSet::builtin`].
#[derive(Clone, Debug)]
pub enum BuiltinArg {
    Int(usize),
    Set(ConstructibleSet),
}

impl ConstructibleSet {
    pub fn new(pieces: Vec<(Sign, AffineSystem)>) -> Self {
        ConstructibleSet { pieces, user_chi: None }
    }

    pub fn from_system(sys: AffineSystem) -> Self {
        Self::new(vec![(Sign::Plus, sys)])
    }

    pub fn with_chi(mut self, chi: Option<i64>) -> Self {
        self.user_chi = chi;
        self
    }

    pub fn pieces(&self) -> &[(Sign, AffineSystem)] {
        &self.pieces
    }

    pub fn user_chi(&self) -> Option<i64> {
        self.user_chi
    }

    pub fn empty() -> Self {
        Self::new(Vec::new()).with_chi(Some(0))
    }

    pub fn point() -> Self {
        Self::affine(0)
    }

    pub fn affine(n: usize) -> Self {
        let sys = AffineSystem { vars: AffineSystem::default_vars(n), equations: vec![], inequations: vec![] };
        Self::from_system(sys)
    }

    /// `G_m^n`, one inequation per coordinate.
    pub fn torus(n: usize) -> Self {
        let ineqs = (0..n).map(|i| Laurent::var(n, i, 1)).collect();
        let sys = AffineSystem { vars: AffineSystem::default_vars(n), equations: vec![], inequations: ineqs };
        Self::from_system(sys)
    }

    pub fn product(&self, other: &Self) -> Self {
        let mut pieces = Vec::with_capacity(self.pieces.len() * other.pieces.len());
        for (s1, a) in &self.pieces {
            for (s2, b) in &other.pieces {
                pieces.push((s1.times(*s2), a.product(b)));
            }
        }
        let chi = match (self.user_chi, other.user_chi) {
            (Some(a), Some(b)) => Some(a * b),
            _ => None,
        };
        Self::new(pieces).with_chi(chi)
    }

    pub fn disjoint_union(&self, other: &Self) -> Self {
        let pieces = self.pieces.iter().chain(&other.pieces).cloned().collect();
        let chi = match (self.user_chi, other.user_chi) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        Self::new(pieces).with_chi(chi)
    }

    /// `self` minus `other`, by inclusion-exclusion; `other` should be a
    /// subset of `self` for the result to be a genuine count.
    pub fn difference(&self, other: &Self) -> Self {
        let pieces = self
            .pieces
            .iter()
            .cloned()
            .chain(other.pieces.iter().map(|(s, p)| (s.flip(), p.clone())))
            .collect();
        let chi = match (self.user_chi, other.user_chi) {
            (Some(a), Some(b)) => Some(a - b),
            _ => None,
        };
        Self::new(pieces).with_chi(chi)
    }

    pub fn builtin(name: &str, args: &[BuiltinArg]) -> Result<Self, GeomError> {
        let arity = |expected: &'static str| GeomError::Arity {
            name: name.to_string(),
            expected,
            found: args.len(),
        };
        let sets = || -> Result<Vec<&ConstructibleSet>, GeomError> {
            args.iter()
                .map(|a| match a {
                    BuiltinArg::Set(s) => Ok(s),
                    BuiltinArg::Int(_) => Err(arity("variety")),
                })
                .collect()
        };
        match name {
            "point" if args.is_empty() => Ok(Self::point()),
            "point" => Err(arity("0")),
            "affine" | "torus" => match args {
                [BuiltinArg::Int(n)] => Ok(if name == "affine" { Self::affine(*n) } else { Self::torus(*n) }),
                _ => Err(arity("1 integer")),
            },
            "product" => Ok(sets()?.into_iter().fold(Self::point(), |acc, s| acc.product(s))),
            "union" | "disjoint_union" => {
                let sets = sets()?;
                let mut it = sets.into_iter();
                match it.next() {
                    None => Ok(Self::empty()),
                    Some(first) => Ok(it.fold(first.clone(), |acc, s| acc.disjoint_union(s))),
                }
            }
            "difference" => match sets()?.as_slice() {
                [a, b] => Ok(a.difference(b)),
                _ => Err(arity("2")),
            },
            _ => Err(GeomError::Parse(ParseError::new(0, format!("unknown variety '{}'", name)))),
        }
    }

    /// Parses the variety grammar.
    pub fn parse(src: &str) -> Result<Self, GeomError> {
        parse_set(src, 0)
    }

    /// Exact signed point count over `F_{p^f}` with default options.
    pub fn count_points(&self, p: u64, f: u32) -> Result<i128, GeomError> {
        self.count_points_with(p, f, &CountOptions::default())
    }

    pub fn count_points_with(&self, p: u64, f: u32, opts: &CountOptions) -> Result<i128, GeomError> {
        let total = count::count_set(self, p, f, opts)?;
        if opts.strict && total < 0 {
            return Err(GeomError::NegativeCount { p, f, count: total });
        }
        Ok(total)
    }
}

impl fmt::Display for ConstructibleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pos: Vec<&AffineSystem> =
            self.pieces.iter().filter(|(s, _)| *s == Sign::Plus).map(|(_, p)| p).collect();
        let neg: Vec<&AffineSystem> =
            self.pieces.iter().filter(|(s, _)| *s == Sign::Minus).map(|(_, p)| p).collect();
        fn group(f: &mut fmt::Formatter<'_>, ps: &[&AffineSystem]) -> fmt::Result {
            if ps.len() == 1 && ps[0].n() == 0 && ps[0].equations.is_empty() && ps[0].inequations.is_empty() {
                return f.write_str("point");
            }
            if ps.len() == 1 {
                return write!(f, "{{{}}}", ps[0]);
            }
            f.write_str("union(")?;
            for (i, p) in ps.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{{{}}}", p)?;
            }
            f.write_str(")")
        }
        if neg.is_empty() {
            group(f, &pos)
        } else {
            f.write_str("difference(")?;
            group(f, &pos)?;
            f.write_str(", ")?;
            group(f, &neg)?;
            f.write_str(")")
        }
    }
}

fn parse_set(src: &str, base: usize) -> Result<ConstructibleSet, GeomError> {
    let lead = src.len() - src.trim_start().len();
    let s = src.trim();
    let base = base + lead;
    if s.is_empty() {
        return Err(ParseError::new(base, "expected a variety").into());
    }
    if s.starts_with('{') {
        if !s.ends_with('}') {
            return Err(ParseError::new(base + s.len(), "expected '}'").into());
        }
        let inner = &s[1..s.len() - 1];
        let inner_lead = inner.len() - inner.trim_start().len();
        if !is_keyword(inner.trim_start(), "vars") {
            return Err(ParseError::new(base + 1 + inner_lead, "expected 'vars' inside braces").into());
        }
        return parse_inline(inner, base + 1);
    }
    if is_keyword(s, "vars") {
        return parse_inline(s, base);
    }
    let name_end = s.find(|c: char| !(c.is_ascii_alphanumeric() || c == '_')).unwrap_or(s.len());
    let name = &s[..name_end];
    if name.is_empty() {
        return Err(ParseError::new(base, "expected a variety name").into());
    }
    let rest = s[name_end..].trim_start();
    let rest_at = base + (s.len() - rest.len());
    let args: Vec<(&str, usize)> = if rest.is_empty() {
        Vec::new()
    } else {
        if !rest.starts_with('(') || !rest.ends_with(')') {
            return Err(ParseError::new(rest_at, "expected '(' after variety name").into());
        }
        split_top(&rest[1..rest.len() - 1], rest_at + 1)?
    };
    let known = ["point", "affine", "torus", "product", "union", "disjoint_union", "difference"];
    if !known.contains(&name) {
        return Err(ParseError::new(base, format!("unknown variety '{}'", name)).into());
    }
    let mut built = Vec::with_capacity(args.len());
    for (a, at) in args {
        let t = a.trim();
        let at = at + (a.len() - a.trim_start().len());
        if matches!(name, "affine" | "torus") {
            let n: usize = t
                .parse()
                .map_err(|_| ParseError::new(at, format!("expected a nonnegative integer, found '{}'", t)))?;
            built.push(BuiltinArg::Int(n));
        } else {
            built.push(BuiltinArg::Set(parse_set(a, at - (a.len() - a.trim_start().len()))?));
        }
    }
    ConstructibleSet::builtin(name, &built).map_err(|e| match e {
        GeomError::Parse(p) => GeomError::Parse(p.shifted(base)),
        other => other,
    })
}

fn is_keyword(s: &str, kw: &str) -> bool {
    s.starts_with(kw) && s[kw.len()..].chars().next().is_none_or(|c| !(c.is_ascii_alphanumeric() || c == '_'))
}

/// Splits at commas outside parentheses and braces. An empty argument list
/// yields no arguments.
fn split_top(s: &str, base: usize) -> Result<Vec<(&str, usize)>, ParseError> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' | '{' => depth += 1,
            ')' | '}' => {
                depth -= 1;
                if depth < 0 {
                    return Err(ParseError::new(base + i, "unbalanced bracket"));
                }
            }
            ',' if depth == 0 => {
                out.push((&s[start..i], base + start));
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(ParseError::new(base + s.len(), "unbalanced bracket"));
    }
    out.push((&s[start..], base + start));
    Ok(out)
}

fn parse_inline(src: &str, base: usize) -> Result<ConstructibleSet, GeomError> {
    let mut stmts = Vec::new();
    let mut start = 0;
    for (i, c) in src.char_indices() {
        if c == ';' {
            stmts.push((&src[start..i], base + start));
            start = i + 1;
        }
    }
    stmts.push((&src[start..], base + start));
    let (head, head_at) = stmts[0];
    let head_at = head_at + (head.len() - head.trim_start().len());
    let head = head.trim();
    let list = head.strip_prefix("vars").unwrap_or("");
    let vars: Vec<String> = if list.trim().is_empty() {
        Vec::new()
    } else {
        list.split(',').map(|v| v.trim().to_string()).collect()
    };
    for (i, v) in vars.iter().enumerate() {
        let ok = v.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && v.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !ok {
            return Err(ParseError::new(head_at, format!("bad variable name '{}'", v)).into());
        }
        if vars[..i].contains(v) {
            return Err(ParseError::new(head_at, format!("duplicate variable '{}'", v)).into());
        }
    }
    let n = vars.len();
    let resolve = |name: &str| vars.iter().position(|v| v == name);
    let mut eqs = Vec::new();
    let mut ineqs = Vec::new();
    for (stmt, at) in &stmts[1..] {
        let lead = stmt.len() - stmt.trim_start().len();
        let t = stmt.trim();
        let at = at + lead;
        if t.is_empty() {
            continue;
        }
        let (is_eq, body, off) = if is_keyword(t, "eq") {
            (true, &t[2..], 2)
        } else if is_keyword(t, "ineq") {
            (false, &t[4..], 4)
        } else {
            return Err(ParseError::new(at, "expected 'eq' or 'ineq'").into());
        };
        let expr = parse_expr(body).map_err(|e| e.shifted(at + off))?;
        let poly = expr.to_laurent(n, &resolve).map_err(|e| e.shifted(at + off))?;
        if !poly.is_polynomial() || poly.terms().any(|(_, c)| !c.is_integer()) {
            return Err(ParseError::new(at + off, "expected a polynomial with integer coefficients").into());
        }
        if is_eq {
            eqs.push(poly);
        } else {
            ineqs.push(poly);
        }
    }
    Ok(ConstructibleSet::from_system(AffineSystem::new(vars, eqs, ineqs)?))
}
