//! Exact arithmetic for local maps of Denef type.
//!
//! A local map of Denef type sends a prime `p` and an extension degree `f` to
//! a finite sum `Σ |V_i(F_{p^f})| · W_i(p^f, Y_1, …, Y_m)`. This crate builds
//! such formulas, evaluates them (including at negative `f`), reduces them
//! modulo `X - 1` to obtain topological zeta functions and checks
//! equivalences and functional equations on finite grids of primes.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is
//! disabled. The `std` feature adds parallel point counting and a
//! thread-safe Weil-model cache.

#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod ffield;
pub mod geom;
pub mod localmap;
pub mod mring;
pub mod oracles;
pub mod parse;
pub mod poly;
pub mod ratfun;
pub mod verify;
pub mod weil;

mod arith;
mod memo;

pub use num_bigint::BigInt;
pub use num_rational::BigRational;

pub use ffield::{FieldError, FqElem, FqField};
pub use geom::{AffineSystem, ConstructibleSet, CountMethod, CountOptions, GeomError, Sign};
pub use localmap::{Evaluator, EvaluatorOptions, HatValue, LocalMapError, LocalMapFormula, Term, Uniformity};
pub use mring::{AffineForm, Membership, MringError, PolyS, RatS, SeriesX1};
pub use oracles::{AlgebraPresentation, ClosureMode, MonomialIdealSet, OracleError};
pub use parse::ParseError;
pub use poly::{Laurent, TermOrder};
pub use ratfun::{CycloFactor, CycloRational, RatError, YFactor, YRational};
pub use verify::{Certificate, Grid, Report, Verdict, Witness};

pub use weil::{SpectralTerm, WeilError, WeilModel};
