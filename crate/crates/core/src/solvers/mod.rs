//! Budgeted maximization of the interdiction probability.
//!
//! All solvers break ties toward the lowest edge id. Gains within
//! [`TIE_TOLERANCE`] of the best gain count as ties so that the basic and the
//! lazy greedy agree even when mathematically equal gains differ in the last
//! bits.

mod exact;
mod greedy;
mod priority;

use serde::{Deserialize, Serialize};

use crate::error::{Result, UmeError};
use crate::graph::EdgeId;
use crate::model::{Evaluator, InterdictionSet};

pub use exact::{brute_force_solve, SubsetMode, DEFAULT_MAX_COMBINATIONS};
pub use greedy::greedy_solve;
pub use priority::{fast_init_gains, priority_greedy_solve, GainEntry};

pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreedyOptions {
    /// Stop once the best available gain is not positive. The reference
    /// algorithm always spends the full budget.
    pub early_stop: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub solver: String,
    pub selected: Vec<EdgeId>,
    pub objective: f64,
    /// Realized gain of each selection step.
    pub gains: Vec<f64>,
    /// Per-evader linear solves.
    pub eval_count: u64,
    /// Seconds.
    pub wall_time: f64,
}

impl Solution {
    pub fn interdiction_set(&self) -> InterdictionSet {
        InterdictionSet::new(self.selected.iter().copied())
            .expect("solver output has no duplicates")
    }
}

/// `J(S + x) - J(S)`. Only the evaluation of `S + x` is counted.
pub fn marginal_gain(eval: &Evaluator<'_>, set: &InterdictionSet, x: EdgeId) -> Result<f64> {
    if set.contains(x) {
        return Err(UmeError::Precondition(format!(
            "edge {x} is already interdicted"
        )));
    }
    eval.problem().graph.edge(x)?;
    let base = eval.factors(set);
    let before = eval.objective_uncounted(set)?;
    Ok(eval.objective_adding(&base, x)? - before)
}

/// Lowest edge id among candidates whose gain is within the tie tolerance of
/// the best gain.
pub(crate) fn pick_best(
    candidates: impl IntoIterator<Item = (EdgeId, f64)>,
) -> Option<(EdgeId, f64)> {
    let all: Vec<(EdgeId, f64)> = candidates.into_iter().collect();
    let best = all.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    all.into_iter()
        .filter(|c| c.1 >= best - TIE_TOLERANCE)
        .min_by_key(|c| c.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub greedy: f64,
    pub optimum: f64,
    /// `greedy / optimum`, or 1 when the optimum is zero.
    pub ratio: f64,
    pub passed: bool,
}

/// Checks `J_greedy >= (1 - 1/e) J_opt` up to `1e-9`.
pub fn verify_bound(greedy: &Solution, exact: &Solution) -> BoundReport {
    let factor = 1.0 - (-1.0f64).exp();
    let passed = greedy.objective >= factor * exact.objective - 1e-9;
    let ratio = if exact.objective > 0.0 {
        greedy.objective / exact.objective
    } else {
        1.0
    };
    BoundReport {
        greedy: greedy.objective,
        optimum: exact.objective,
        ratio,
        passed,
    }
}
