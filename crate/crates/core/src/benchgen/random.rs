//! Small random instances for tests and validation suites.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::chain::TransitionMatrix;
use crate::error::Result;
use crate::graph::{Graph, NodeId};
use crate::model::{EvaderSpec, ProblemInstance};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomConfig {
    pub nodes: usize,
    /// Probability of each candidate arc.
    pub edge_probability: f64,
    pub evaders: usize,
    pub budget: usize,
    /// Arcs only go from lower to higher node ids.
    pub acyclic: bool,
    /// Allow rows summing to less than one (evaders that drop out).
    pub leaky: bool,
}

impl Default for RandomConfig {
    fn default() -> Self {
        RandomConfig {
            nodes: 8,
            edge_probability: 0.3,
            evaders: 2,
            budget: 2,
            acyclic: true,
            leaky: false,
        }
    }
}

/// Random graph with efficiencies in `[0.1, 1]` and random evader chains.
///
/// Each evader moves only along arcs into nodes that can still reach its
/// target, with random positive probabilities, so every chain is absorbing.
/// The budget is capped at the edge count.
pub fn random_instance<R: Rng>(rng: &mut R, config: &RandomConfig) -> Result<ProblemInstance> {
    let n = config.nodes.max(2);
    let mut arcs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let allowed = if config.acyclic { i < j } else { i != j };
            if allowed && rng.random_bool(config.edge_probability) {
                arcs.push((
                    i,
                    j,
                    rng.random_range(0.5..2.0),
                    rng.random_range(0.1..=1.0),
                ));
            }
        }
    }
    // keep a backbone path so the last node is reachable
    for i in 0..n - 1 {
        if !arcs.iter().any(|a| a.0 == i && a.1 == i + 1) {
            arcs.push((i, i + 1, 1.0, rng.random_range(0.1..=1.0)));
        }
    }
    arcs.sort_by_key(|a| (a.0, a.1));
    let graph = Graph::new(n, arcs)?;

    let raw: Vec<f64> = (0..config.evaders.max(1))
        .map(|_| rng.random_range(0.2..1.0))
        .collect();
    let total: f64 = raw.iter().sum();
    let mut weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let rest: f64 = weights[1..].iter().sum();
    weights[0] = 1.0 - rest;

    let mut evaders = Vec::with_capacity(weights.len());
    for w in weights {
        let target = if config.acyclic {
            NodeId::from(n - 1)
        } else {
            NodeId::from(rng.random_range(0..n))
        };
        let reach = graph
            .distances_to(target)?
            .iter()
            .map(|d| d.is_finite())
            .collect::<Vec<_>>();
        let mut entries = Vec::new();
        for i in 0..n {
            if i == target.index() || !reach[i] {
                continue;
            }
            let heads: Vec<NodeId> = graph
                .out_edges(NodeId::from(i))
                .iter()
                .map(|&e| graph.edges()[e.index()].head)
                .filter(|h| reach[h.index()])
                .collect();
            let raw: Vec<f64> = heads.iter().map(|_| rng.random_range(0.1..1.0)).collect();
            let scale = if config.leaky {
                rng.random_range(0.6..1.0)
            } else {
                1.0
            };
            let s: f64 = raw.iter().sum();
            for (h, x) in heads.into_iter().zip(raw) {
                entries.push((NodeId::from(i), h, scale * x / s));
            }
        }
        let matrix = TransitionMatrix::from_triplets(n, entries)?;
        let mut support: Vec<usize> = (0..n).filter(|&i| i != target.index()).collect();
        support.shuffle(rng);
        support.truncate(rng.random_range(1..=support.len()));
        let mut source = vec![0.0; n];
        let raw: Vec<f64> = support.iter().map(|_| rng.random_range(0.1..1.0)).collect();
        let s: f64 = raw.iter().sum();
        for (&i, x) in support.iter().zip(&raw) {
            source[i] = x / s;
        }
        let last = support[0];
        source[last] = 0.0;
        source[last] = 1.0 - source.iter().sum::<f64>();
        evaders.push(EvaderSpec::new(w, source, target, matrix));
    }
    let budget = config.budget.min(graph.edge_count());
    ProblemInstance::new(graph, evaders, budget)
}
