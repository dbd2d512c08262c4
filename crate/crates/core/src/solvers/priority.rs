use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::time::Instant;

use super::greedy::check_budget;
use super::{pick_best, GreedyOptions, Solution, TIE_TOLERANCE};
use crate::error::{Result, UmeError};
use crate::graph::EdgeId;
use crate::model::{Evaluator, InterdictionSet, ProblemInstance};

/// Queue entry: a possibly stale gain and the step it was computed for.
#[derive(Debug, Clone, Copy)]
pub struct GainEntry {
    pub gain: f64,
    pub edge: EdgeId,
    pub stamp: usize,
}

impl PartialEq for GainEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for GainEntry {}

impl PartialOrd for GainEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GainEntry {
    // max-heap order: larger gain first, then lower edge id
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain
            .total_cmp(&other.gain)
            .then_with(|| other.edge.cmp(&self.edge))
    }
}

/// `Delta(empty, x)` for every edge from one visit solve per evader:
/// `sum_k w_k pi^(k)_i M^(k)_ij d_x`.
///
/// Exact when no evader can traverse `x` twice and every walk leaving the
/// head of `x` reaches the target; an upper bound otherwise.
pub fn fast_init_gains(eval: &Evaluator<'_>) -> Result<Vec<(EdgeId, f64)>> {
    Ok(fast_init(eval)?.0)
}

fn fast_init(eval: &Evaluator<'_>) -> Result<(Vec<(EdgeId, f64)>, f64)> {
    let problem = eval.problem();
    let graph = &problem.graph;
    let mut gains = vec![0.0; graph.edge_count()];
    let mut baseline = 0.0;
    for (k, ev) in problem.evaders.iter().enumerate() {
        let pi = eval.visits(k)?;
        baseline += ev.weight * (1.0 - pi[ev.target.index()]);
        for t in ev.matrix.triplets() {
            let e = graph.find_edge(t.from, t.to).ok_or(UmeError::NoSuchArc {
                tail: t.from,
                head: t.to,
            })?;
            gains[e.index()] +=
                ev.weight * pi[t.from.index()] * t.p * graph.edges()[e.index()].efficiency;
        }
    }
    Ok((
        gains
            .into_iter()
            .enumerate()
            .map(|(e, g)| (EdgeId::from(e), g))
            .collect(),
        baseline,
    ))
}

/// Lazy greedy with fast initialization.
///
/// Gains are kept in a max-queue; by submodularity a stale gain bounds the
/// current one from above, so an entry that is fresh for the current step and
/// sits on top of the queue is the greedy choice. Only stale entries that
/// reach the top are recomputed. Selections and the objective match
/// [`super::greedy_solve`].
pub fn priority_greedy_solve(
    problem: &ProblemInstance,
    options: GreedyOptions,
) -> Result<Solution> {
    let start = Instant::now();
    check_budget(problem)?;
    let eval = Evaluator::new(problem)?;
    let edges = problem.graph.edges();

    let (initial, mut current) = fast_init(&eval)?;
    let mut queue: BinaryHeap<GainEntry> = initial
        .into_iter()
        .map(|(edge, gain)| {
            let stamp = usize::from(eval.first_gain_is_exact(edge));
            GainEntry { gain, edge, stamp }
        })
        .collect();

    let mut set = InterdictionSet::empty();
    let mut factors = vec![1.0; edges.len()];
    let mut gains = Vec::with_capacity(problem.budget);
    for step in 1..=problem.budget {
        let mut fresh: Vec<GainEntry> = Vec::new();
        let mut best = f64::NEG_INFINITY;
        let mut values: HashMap<EdgeId, f64> = HashMap::new();
        while let Some(top) = queue.peek() {
            if !fresh.is_empty() && top.gain < best - TIE_TOLERANCE {
                break;
            }
            let entry = queue.pop().expect("peeked");
            if entry.stamp == step {
                best = best.max(entry.gain);
                fresh.push(entry);
            } else {
                let value = eval.objective_adding(&factors, entry.edge)?;
                values.insert(entry.edge, value);
                queue.push(GainEntry {
                    gain: value - current,
                    edge: entry.edge,
                    stamp: step,
                });
            }
        }
        let (x, gain) = pick_best(fresh.iter().map(|e| (e.edge, e.gain)))
            .ok_or_else(|| UmeError::Precondition("no edge left to interdict".into()))?;
        queue.extend(fresh.into_iter().filter(|e| e.edge != x));
        if options.early_stop && gain <= 0.0 {
            break;
        }
        set.insert(x)?;
        factors[x.index()] = 1.0 - edges[x.index()].efficiency;
        current = values.get(&x).copied().unwrap_or(current + gain);
        gains.push(gain);
    }

    let objective = eval.objective_uncounted(&set)?;
    Ok(Solution {
        solver: "priority".into(),
        selected: set.edges().to_vec(),
        objective,
        gains,
        eval_count: eval.evaluations(),
        wall_time: start.elapsed().as_secs_f64(),
    })
}
