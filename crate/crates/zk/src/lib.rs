//! File formats and command line for `zk-core`.

pub mod alg;
pub mod cli;
pub mod lmf;

pub use cli::{run, Outcome};
