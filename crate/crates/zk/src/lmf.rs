//! The `.lmf` formula format.
//!
//! ```text
//! m 1
//! exclude 2
//! term
//!   variety torus(1)
//!   chi 0
//!   W (1 - Y1)/(1 - X*Y1)
//! ```

use std::fmt;
use std::fmt::Write as _;
use std::path::Path;

use zk_core::{ConstructibleSet, CycloRational, GeomError, LocalMapError, LocalMapFormula, RatError, Term};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LmfErrorKind {
    Syntax(String),
    Variety(GeomError),
    Function(RatError),
    Formula(LocalMapError),
    Io(String),
}

/// Error with a 1-based line and column (both 0 for IO errors).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LmfError {
    pub line: usize,
    pub column: usize,
    pub kind: LmfErrorKind,
}

impl fmt::Display for LmfError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let LmfErrorKind::Io(m) = &self.kind {
            return f.write_str(m);
        }
        write!(f, "line {}, column {}: ", self.line, self.column)?;
        match &self.kind {
            LmfErrorKind::Syntax(m) | LmfErrorKind::Io(m) => f.write_str(m),
            LmfErrorKind::Variety(GeomError::Parse(e)) => f.write_str(&e.message),
            LmfErrorKind::Variety(e) => write!(f, "{}", e),
            LmfErrorKind::Function(RatError::Parse(e)) => f.write_str(&e.message),
            LmfErrorKind::Function(e @ RatError::DegenerateFactor { .. }) => {
                write!(f, "{}", e.to_string().split_once(": ").map_or("degenerate factor", |x| x.1))
            }
            LmfErrorKind::Function(e) => write!(f, "{}", e.to_string().split_once(": ").map_or(e.to_string().as_str(), |x| x.1)),
            LmfErrorKind::Formula(e) => write!(f, "{}", e),
        }
    }
}

impl std::error::Error for LmfError {}

fn err(line: usize, column: usize, kind: LmfErrorKind) -> LmfError {
    LmfError { line, column, kind }
}

fn syntax(line: usize, column: usize, m: impl Into<String>) -> LmfError {
    err(line, column, LmfErrorKind::Syntax(m.into()))
}

struct PendingTerm {
    line: usize,
    variety: Option<ConstructibleSet>,
    chi: Option<i64>,
    w: Option<CycloRational>,
}

impl PendingTerm {
    fn finish(self, m: usize) -> Result<Term, LmfError> {
        let set = self.variety.ok_or_else(|| syntax(self.line, 1, "term without 'variety'"))?;
        let set = match self.chi {
            Some(c) => set.with_chi(Some(c)),
            None => set,
        };
        let w = match self.w {
            Some(w) => w,
            None => return Err(syntax(self.line, 1, "term without 'W'")),
        };
        debug_assert_eq!(w.m(), m);
        Ok(Term::new(set, w))
    }
}

pub fn parse_formula(src: &str) -> Result<LocalMapFormula, LmfError> {
    let mut m: Option<usize> = None;
    let mut excluded: Vec<u64> = Vec::new();
    let mut terms: Vec<Term> = Vec::new();
    let mut current: Option<PendingTerm> = None;
    let mut last_line = 0;
    for (idx, raw) in src.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let body = raw.split('#').next().unwrap_or("");
        if body.trim().is_empty() {
            continue;
        }
        let indent = body.len() - body.trim_start().len();
        let text = body.trim_end();
        let content = &text[indent..];
        let (key, rest) = content.split_once(char::is_whitespace).unwrap_or((content, ""));
        // column (1-based) of `rest` within the raw line
        let rest_col = indent + key.len() + (content.len() - key.len() - rest.len()) + 1;
        let Some(arity) = m else {
            if key != "m" {
                return Err(syntax(line, indent + 1, "expected 'm <integer>' on the first line"));
            }
            let v = rest.trim().parse::<usize>().map_err(|_| syntax(line, rest_col, "expected a nonnegative integer"))?;
            m = Some(v);
            continue;
        };
        match key {
            "m" => return Err(syntax(line, indent + 1, "duplicate 'm' line")),
            "exclude" => {
                if current.is_some() || !terms.is_empty() {
                    return Err(syntax(line, indent + 1, "'exclude' must precede the first term"));
                }
                let mut col = rest_col;
                for tok in rest.split(' ') {
                    if !tok.is_empty() {
                        let p = tok.parse::<u64>().map_err(|_| syntax(line, col, format!("expected a prime, found '{}'", tok)))?;
                        excluded.push(p);
                    }
                    col += tok.len() + 1;
                }
            }
            "term" => {
                if !rest.trim().is_empty() {
                    return Err(syntax(line, rest_col, "unexpected text after 'term'"));
                }
                if let Some(t) = current.take() {
                    terms.push(t.finish(arity)?);
                }
                current = Some(PendingTerm { line, variety: None, chi: None, w: None });
            }
            "variety" | "chi" | "W" => {
                let Some(t) = current.as_mut() else {
                    return Err(syntax(line, indent + 1, format!("'{}' outside a term block", key)));
                };
                match key {
                    "variety" => {
                        if t.variety.is_some() {
                            return Err(syntax(line, indent + 1, "duplicate 'variety'"));
                        }
                        let set = ConstructibleSet::parse(rest).map_err(|e| {
                            let off = match &e {
                                GeomError::Parse(p) => p.offset,
                                _ => 0,
                            };
                            err(line, rest_col + off, LmfErrorKind::Variety(e))
                        })?;
                        t.variety = Some(set);
                    }
                    "chi" => {
                        let c = rest.trim().parse::<i64>().map_err(|_| syntax(line, rest_col, "expected an integer"))?;
                        t.chi = Some(c);
                    }
                    _ => {
                        if t.w.is_some() {
                            return Err(syntax(line, indent + 1, "duplicate 'W'"));
                        }
                        let w = CycloRational::parse(rest, arity)
                            .map_err(|e| err(line, rest_col + e.offset().unwrap_or(0), LmfErrorKind::Function(e)))?;
                        t.w = Some(w);
                    }
                }
            }
            other => return Err(syntax(line, indent + 1, format!("unknown keyword '{}'", other))),
        }
    }
    let Some(arity) = m else {
        return Err(syntax(last_line.max(1), 1, "empty formula file"));
    };
    if let Some(t) = current.take() {
        terms.push(t.finish(arity)?);
    }
    if terms.is_empty() {
        return Err(syntax(last_line.max(1), 1, "formula has no terms"));
    }
    LocalMapFormula::new(terms, arity, excluded).map_err(|e| err(1, 1, LmfErrorKind::Formula(e)))
}

pub fn parse_formula_file(path: &Path) -> Result<LocalMapFormula, LmfError> {
    let src = std::fs::read_to_string(path).map_err(|e| err(0, 0, LmfErrorKind::Io(e.to_string())))?;
    parse_formula(&src)
}

/// Renders a formula that [`parse_formula`] reads back.
pub fn write_formula(f: &LocalMapFormula) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "m {}", f.m());
    if !f.excluded_primes().is_empty() {
        let ps: Vec<String> = f.excluded_primes().iter().map(|p| p.to_string()).collect();
        let _ = writeln!(out, "exclude {}", ps.join(" "));
    }
    for t in f.terms() {
        let _ = writeln!(out, "term");
        let _ = writeln!(out, "  variety {}", t.set);
        if let Some(c) = t.set.user_chi() {
            let _ = writeln!(out, "  chi {}", c);
        }
        let _ = writeln!(out, "  W {}", t.w);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEIS: &str = "# Heisenberg twist\nm 1\nterm\n  variety point\n  W (1 - Y1)/(1 - X*Y1)\n";

    #[test]
    fn reads_and_writes() {
        let f = parse_formula(HEIS).unwrap();
        assert_eq!(f.terms().len(), 1);
        assert_eq!(write_formula(&f), "m 1\nterm\n  variety point\n  W (1 - Y1)/(1 - X*Y1)\n");
        let src = "m 1\nexclude 2 3\nterm\n variety vars x,y ; eq x^2 + y^2 - 1\n chi 0\n W X - 1\nterm\n variety torus(2)\n W 1\n";
        let f = parse_formula(src).unwrap();
        assert_eq!(f.terms().len(), 2);
        assert_eq!(f.terms()[0].set.user_chi(), Some(0));
        assert!(f.is_excluded(3));
        assert_eq!(parse_formula(&write_formula(&f)).unwrap(), f);
    }

    #[test]
    fn locations() {
        let e = parse_formula("m 1\nterm\n  variety circle\n  W 1\n").unwrap_err();
        assert_eq!((e.line, e.column), (3, 11));
        assert!(matches!(e.kind, LmfErrorKind::Variety(_)));
        let e = parse_formula("m 1\nterm\n  variety point\n  W 1/(1 - X^0*Y1^0)\n").unwrap_err();
        assert!(matches!(e.kind, LmfErrorKind::Function(RatError::DegenerateFactor { .. })));
        assert_eq!((e.line, e.column), (4, 8));
        assert_eq!(e.to_string(), "line 4, column 8: degenerate factor 1 - X^0*Y^0");
        let e = parse_formula("m 1\nvariety point\n").unwrap_err();
        assert_eq!((e.line, e.column), (2, 1));
        let e = parse_formula("term\n").unwrap_err();
        assert_eq!(e.line, 1);
        let e = parse_formula("m 1\nterm\n  variety point\n").unwrap_err();
        assert_eq!(e.to_string(), "line 2, column 1: term without 'W'");
        let e = parse_formula("m 2\nterm\n  variety point\n  W Y3\n").unwrap_err();
        assert_eq!((e.line, e.column), (4, 5));
    }
}
