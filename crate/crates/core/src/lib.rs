//! Polynomial runtime complexity analysis of term rewrite systems in a
//! compositional framework of complexity problems and processors.

pub mod depgraph;
pub mod dp;
pub mod fixtures;
pub mod framework;
pub mod interp;
pub mod parse;
pub mod poly;
pub mod processors;
pub mod proof;
pub mod rewrite;
pub mod term;

pub use framework::{validate_proof, Bound, Problem, ProofTree, StartTerms};
pub use parse::parse_problem;
pub use processors::{default_strategy, StrategyConfig};
