//! Interdiction of unreactive Markovian evaders.
//!
//! Evaders walk a directed graph as absorbing Markov chains toward their
//! targets. An interdictor places `B` devices on edges; a device on edge `e`
//! removes a passing evader with probability `d_e`. The objective `J(S)` is
//! the weighted probability that evaders are removed (or never arrive), and
//! it is monotone and submodular in the interdiction set `S`.
//!
//! The crate provides exact objective evaluation by sparse linear solves, a
//! path-enumeration oracle, the basic and lazy (priority) greedy solvers,
//! brute-force search for small instances, the edge/node interdiction
//! reductions, LP export of the equivalent mixed-integer program, and the
//! benchmark instance generators.

pub mod benchgen;
pub mod chain;
pub mod error;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod mip;
pub mod model;
pub mod oracle;
pub mod solvers;
pub mod transforms;

pub use chain::{
    apply_interdiction, build_evader_transition, validate_chain, ChainReport, TransitionMatrix,
};
pub use error::{Result, UmeError};
pub use graph::{Edge, EdgeId, Graph, NodeId};
pub use linalg::{expected_visits, VisitVector};
pub use model::{
    evader_objective, objective, EvaderSpec, Evaluator, InterdictionSet, ProblemInstance,
};
pub use oracle::path_objective_oracle;
pub use solvers::{
    brute_force_solve, fast_init_gains, greedy_solve, marginal_gain, priority_greedy_solve,
    verify_bound, Solution,
};
