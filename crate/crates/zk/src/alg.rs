//! The `.alg` algebra format.
//!
//! ```text
//! d 3
//! prod 1 2 -> 0 0 1
//! prod 2 1 -> 0 0 -1
//! mode subalgebra
//! ```
//!
//! Basis indices are 1-based; omitted products are zero. In `submodule` mode
//! each `gen` line holds a `d × d` matrix in row-major order.

use std::fmt;

use zk_core::{AlgebraPresentation, ClosureMode};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for AlgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for AlgError {}

fn err(line: usize, m: impl Into<String>) -> AlgError {
    AlgError { line, message: m.into() }
}

fn ints(line: usize, s: &str) -> Result<Vec<i64>, AlgError> {
    s.split_whitespace()
        .map(|t| t.parse::<i64>().map_err(|_| err(line, format!("expected an integer, found '{}'", t))))
        .collect()
}

pub fn parse_algebra(src: &str) -> Result<AlgebraPresentation, AlgError> {
    let mut d: Option<usize> = None;
    let mut consts: Vec<Vec<Vec<i64>>> = Vec::new();
    let mut mode: Option<ClosureMode> = None;
    let mut gens: Vec<Vec<Vec<i64>>> = Vec::new();
    for (idx, raw) in src.lines().enumerate() {
        let line = idx + 1;
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let (key, rest) = text.split_once(char::is_whitespace).unwrap_or((text, ""));
        let Some(dim) = d else {
            if key != "d" {
                return Err(err(line, "expected 'd <integer>' first"));
            }
            let v = rest.trim().parse::<usize>().map_err(|_| err(line, "expected a positive integer"))?;
            if v == 0 {
                return Err(err(line, "rank must be positive"));
            }
            d = Some(v);
            consts = vec![vec![vec![0; v]; v]; v];
            continue;
        };
        match key {
            "prod" => {
                let (lhs, rhs) = rest.split_once("->").ok_or_else(|| err(line, "expected 'prod i j -> c1 ... cd'"))?;
                let ij = ints(line, lhs)?;
                let c = ints(line, rhs)?;
                if ij.len() != 2 || ij.iter().any(|&x| x < 1 || x as usize > dim) {
                    return Err(err(line, format!("expected two basis indices in 1..{}", dim)));
                }
                if c.len() != dim {
                    return Err(err(line, format!("expected {} coordinates, found {}", dim, c.len())));
                }
                consts[ij[0] as usize - 1][ij[1] as usize - 1] = c;
            }
            "mode" => {
                mode = Some(match rest.trim() {
                    "subalgebra" => ClosureMode::Subalgebra,
                    "ideal" => ClosureMode::Ideal,
                    "submodule" => ClosureMode::Submodule,
                    other => return Err(err(line, format!("unknown mode '{}'", other))),
                });
            }
            "gen" => {
                let v = ints(line, rest)?;
                if v.len() != dim * dim {
                    return Err(err(line, format!("expected {} entries, found {}", dim * dim, v.len())));
                }
                gens.push(v.chunks(dim).map(|r| r.to_vec()).collect());
            }
            "d" => return Err(err(line, "duplicate 'd' line")),
            other => return Err(err(line, format!("unknown keyword '{}'", other))),
        }
    }
    let dim = d.ok_or_else(|| err(1, "empty algebra file"))?;
    let mode = mode.unwrap_or(ClosureMode::Subalgebra);
    if !gens.is_empty() && mode != ClosureMode::Submodule {
        return Err(err(1, "'gen' lines require mode submodule"));
    }
    AlgebraPresentation::new(dim, consts, mode, gens).map_err(|e| err(1, e.to_string()))
}
