use std::time::Instant;

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Solution, TIE_TOLERANCE};
use crate::error::{Result, UmeError};
use crate::graph::EdgeId;
use crate::model::{Evaluator, InterdictionSet, ProblemInstance};

pub const DEFAULT_MAX_COMBINATIONS: u128 = 2_000_000;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubsetMode {
    /// Subsets of size exactly `B` (sufficient by monotonicity).
    #[default]
    Exactly,
    /// All subsets of size at most `B`.
    AtMost,
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    c
}

/// Exhaustive search over interdiction sets. Among sets within the tie
/// tolerance of the optimum the lexicographically smallest sorted edge list
/// wins.
pub fn brute_force_solve(
    problem: &ProblemInstance,
    max_combinations: u128,
    mode: SubsetMode,
) -> Result<Solution> {
    let start = Instant::now();
    super::greedy::check_budget(problem)?;
    let m = problem.graph.edge_count();
    let b = problem.budget;
    let sizes: Vec<usize> = match mode {
        SubsetMode::Exactly => vec![b],
        SubsetMode::AtMost => (0..=b).collect(),
    };
    let count = sizes
        .iter()
        .fold(0u128, |acc, &k| acc.saturating_add(binomial(m, k)));
    if count > max_combinations {
        return Err(UmeError::CombinationLimit {
            count,
            limit: max_combinations,
        });
    }
    let eval = Evaluator::new(problem)?;
    let subsets: Vec<Vec<usize>> = sizes.iter().flat_map(|&k| (0..m).combinations(k)).collect();
    let values = subsets
        .par_iter()
        .map(|s| {
            let set = InterdictionSet::new(s.iter().map(|&e| EdgeId::from(e)))?;
            eval.objective(&set)
        })
        .collect::<Result<Vec<f64>>>()?;
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let winner = subsets
        .iter()
        .zip(&values)
        .filter(|(_, &v)| v >= best - TIE_TOLERANCE)
        .map(|(s, _)| s)
        .min()
        .expect("at least one subset");

    // realized gains along the sorted selection, off the tally
    let mut set = InterdictionSet::empty();
    let mut gains = Vec::with_capacity(winner.len());
    let mut prev = eval.objective_uncounted(&set)?;
    for &e in winner {
        set.insert(EdgeId::from(e))?;
        let next = eval.objective_uncounted(&set)?;
        gains.push(next - prev);
        prev = next;
    }
    Ok(Solution {
        solver: "exact".into(),
        selected: set.edges().to_vec(),
        objective: prev,
        gains,
        eval_count: eval.evaluations(),
        wall_time: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use crate::model::objective;

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(20, 3), 1140);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(60, 30), 118264581564861424);
    }

    #[test]
    fn diamond_optimum() {
        let p = diamond(0.8, 1.0, 2);
        let s = brute_force_solve(&p, DEFAULT_MAX_COMBINATIONS, SubsetMode::Exactly).unwrap();
        assert!((s.objective - 1.0).abs() < 1e-12);
        assert_eq!(s.selected, vec![EdgeId(0), EdgeId(1)]);
        assert_eq!(s.eval_count, 6);
        let at_most = brute_force_solve(&p, DEFAULT_MAX_COMBINATIONS, SubsetMode::AtMost).unwrap();
        assert_eq!(at_most.selected, s.selected);
    }

    #[test]
    fn extreme_budgets() {
        let p = diamond(0.8, 0.5, 0);
        let s = brute_force_solve(&p, DEFAULT_MAX_COMBINATIONS, SubsetMode::Exactly).unwrap();
        assert!(s.selected.is_empty());
        assert_eq!(
            s.objective,
            objective(&p, &InterdictionSet::empty()).unwrap()
        );
        let p = p.with_budget(4).unwrap();
        let s = brute_force_solve(&p, DEFAULT_MAX_COMBINATIONS, SubsetMode::Exactly).unwrap();
        let all = InterdictionSet::new((0..4).map(EdgeId::from)).unwrap();
        assert!((s.objective - objective(&p, &all).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn limit_is_enforced() {
        let p = diamond(0.8, 1.0, 2);
        let err = brute_force_solve(&p, 5, SubsetMode::Exactly).unwrap_err();
        assert!(matches!(
            err,
            UmeError::CombinationLimit { count: 6, limit: 5 }
        ));
    }
}
