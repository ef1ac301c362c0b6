//! Variable population memetic search for the critical node problem.
//!
//! Given an undirected graph and a budget `k`, find a set of `k` nodes whose
//! removal minimises the number of node pairs that remain connected.

pub mod bench;
pub mod construction;
pub mod dlas;
pub mod error;
pub mod generators;
pub mod graph;
pub mod population;
pub mod search;
pub mod solver;

pub use error::{Error, Result};
pub use graph::{decompose, pairwise_connectivity, ComponentDecomposition, Graph};
pub use search::Solution;
pub use solver::{solve, Budget, Mode, SolveOptions, SolveOutcome, SolverConfig};
