use std::time::Instant;

use rayon::prelude::*;

use super::{pick_best, GreedyOptions, Solution};
use crate::error::{Result, UmeError};
use crate::graph::EdgeId;
use crate::model::{Evaluator, InterdictionSet, ProblemInstance};

/// Basic greedy: every step evaluates `J(S + x)` for every uninterdicted
/// edge and keeps the best one.
///
/// `J(S)` is carried over from the previous step, so the count of per-evader
/// solves is exactly `|K| (B|E| - B(B-1)/2)` when the full budget is spent.
pub fn greedy_solve(problem: &ProblemInstance, options: GreedyOptions) -> Result<Solution> {
    let start = Instant::now();
    check_budget(problem)?;
    let eval = Evaluator::new(problem)?;
    let edges = problem.graph.edges();
    let mut set = InterdictionSet::empty();
    let mut factors = vec![1.0; edges.len()];
    let mut taken = vec![false; edges.len()];
    let mut current = eval.objective_uncounted(&set)?;
    let mut gains = Vec::with_capacity(problem.budget);

    for _ in 0..problem.budget {
        let values = (0..edges.len())
            .into_par_iter()
            .filter(|&e| !taken[e])
            .map(|e| {
                Ok((
                    EdgeId::from(e),
                    eval.objective_adding(&factors, EdgeId::from(e))?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let (x, gain) = pick_best(values.iter().map(|&(e, v)| (e, v - current)))
            .ok_or_else(|| UmeError::Precondition("no edge left to interdict".into()))?;
        if options.early_stop && gain <= 0.0 {
            break;
        }
        set.insert(x)?;
        taken[x.index()] = true;
        factors[x.index()] = 1.0 - edges[x.index()].efficiency;
        current = values
            .iter()
            .find(|c| c.0 == x)
            .map(|c| c.1)
            .unwrap_or(current + gain);
        gains.push(gain);
    }

    let objective = eval.objective_uncounted(&set)?;
    Ok(Solution {
        solver: "greedy".into(),
        selected: set.edges().to_vec(),
        objective,
        gains,
        eval_count: eval.evaluations(),
        wall_time: start.elapsed().as_secs_f64(),
    })
}

pub(super) fn check_budget(problem: &ProblemInstance) -> Result<()> {
    if problem.budget > problem.graph.edge_count() {
        return Err(UmeError::InvalidProblem(format!(
            "budget {} exceeds edge count {}",
            problem.budget,
            problem.graph.edge_count()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;

    #[test]
    fn diamond_single_device() {
        let p = diamond(0.8, 1.0, 1);
        let s = greedy_solve(&p, GreedyOptions::default()).unwrap();
        assert_eq!(s.selected, vec![EdgeId(0)]);
        assert!((s.objective - 0.8).abs() < 1e-12);
        assert_eq!(s.eval_count, 4);
    }

    #[test]
    fn diamond_two_devices() {
        let p = diamond(0.8, 1.0, 2);
        let s = greedy_solve(&p, GreedyOptions::default()).unwrap();
        assert_eq!(s.selected, vec![EdgeId(0), EdgeId(1)]);
        assert!((s.objective - 1.0).abs() < 1e-12);
        // |K| (B|E| - B(B-1)/2) = 2*4 - 1
        assert_eq!(s.eval_count, 7);
        assert!(s.gains[0] >= s.gains[1]);
    }

    #[test]
    fn zero_budget_and_overdraft() {
        let p = chain(0.5, 0);
        let s = greedy_solve(&p, GreedyOptions::default()).unwrap();
        assert!(s.selected.is_empty());
        assert_eq!(s.objective, 0.0);
        assert_eq!(s.eval_count, 0);
        let mut bad = chain(0.5, 0);
        bad.budget = 3;
        assert!(greedy_solve(&bad, GreedyOptions::default()).is_err());
    }

    #[test]
    fn full_budget_spent_on_zero_gains_unless_early_stop() {
        // d = 0 makes every gain zero
        let p = diamond(0.8, 0.0, 3);
        let s = greedy_solve(&p, GreedyOptions::default()).unwrap();
        assert_eq!(s.selected, vec![EdgeId(0), EdgeId(1), EdgeId(2)]);
        let s = greedy_solve(&p, GreedyOptions { early_stop: true }).unwrap();
        assert!(s.selected.is_empty());
    }
}
