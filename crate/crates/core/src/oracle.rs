//! Path-enumeration oracle for the interdiction probability of an acyclic
//! evader chain.
//!
//! Every source-to-target path `p` is taken with probability `Q(p)` (source
//! mass times the product of transitions). Interdiction on `p` succeeds with
//! probability `1 - prod_{e in p, e in S} (1 - d_e)`. Mass that never reaches
//! the target at all (dead ends, unreachable sources, leaking rows) counts as
//! captured.

use crate::chain::TransitionMatrix;
use crate::error::{Result, UmeError};
use crate::graph::{Graph, NodeId};
use crate::model::{EvaderSpec, InterdictionSet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSummary {
    pub paths: usize,
    /// `sum_p P(p|S)`.
    pub interdicted: f64,
    /// `1 - sum_p Q(p)`.
    pub never_arrives: f64,
}

impl PathSummary {
    pub fn objective(&self) -> f64 {
        self.interdicted + self.never_arrives
    }
}

struct Walk<'a> {
    m: &'a TransitionMatrix,
    target: NodeId,
    survive: &'a dyn Fn(NodeId, NodeId) -> f64,
    on_stack: Vec<bool>,
    max_paths: usize,
    paths: usize,
    arrive: f64,
    interdicted: f64,
}

impl Walk<'_> {
    fn visit(&mut self, v: NodeId, q: f64, surv: f64) -> Result<()> {
        if v == self.target {
            self.paths += 1;
            if self.paths > self.max_paths {
                return Err(UmeError::PathLimit(self.max_paths));
            }
            self.arrive += q;
            self.interdicted += q * (1.0 - surv);
            return Ok(());
        }
        self.on_stack[v.index()] = true;
        for (w, p) in self.m.row(v) {
            if p <= 0.0 {
                continue;
            }
            if self.on_stack[w.index()] {
                return Err(UmeError::Cycle(w));
            }
            let s = (self.survive)(v, w);
            self.visit(w, q * p, surv * s)?;
        }
        self.on_stack[v.index()] = false;
        Ok(())
    }
}

/// Enumerates all source-target paths of `evader` under interdiction `set`.
pub fn enumerate_paths(
    evader: &EvaderSpec,
    set: &InterdictionSet,
    graph: &Graph,
    max_paths: usize,
) -> Result<PathSummary> {
    set.check_against(graph)?;
    let n = evader.matrix.dim();
    let mut survive_on = std::collections::HashMap::new();
    for &e in set.edges() {
        let edge = graph.edge(e)?;
        survive_on.insert((edge.tail, edge.head), 1.0 - edge.efficiency);
    }
    let survive = move |i: NodeId, j: NodeId| survive_on.get(&(i, j)).copied().unwrap_or(1.0);
    let mut walk = Walk {
        m: &evader.matrix,
        target: evader.target,
        survive: &survive,
        on_stack: vec![false; n],
        max_paths,
        paths: 0,
        arrive: 0.0,
        interdicted: 0.0,
    };
    for (i, &a) in evader.source.iter().enumerate() {
        if a > 0.0 {
            walk.visit(NodeId::from(i), a, 1.0)?;
        }
    }
    Ok(PathSummary {
        paths: walk.paths,
        interdicted: walk.interdicted,
        never_arrives: 1.0 - walk.arrive,
    })
}

/// Interdiction probability of `evader` by path enumeration.
pub fn path_objective_oracle(
    evader: &EvaderSpec,
    set: &InterdictionSet,
    graph: &Graph,
    max_paths: usize,
) -> Result<f64> {
    enumerate_paths(evader, set, graph, max_paths).map(|s| s.objective())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeId;

    fn n(i: u32) -> NodeId {
        NodeId(i)
    }

    fn set(ids: &[u32]) -> InterdictionSet {
        InterdictionSet::new(ids.iter().map(|&i| EdgeId(i))).unwrap()
    }

    #[test]
    fn chain_paths() {
        let g = Graph::new(3, [(0, 1, 1.0, 0.5), (1, 2, 1.0, 0.5)]).unwrap();
        let ev =
            EvaderSpec::from_model(&g, 1.0, EvaderSpec::point_source(3, n(0)), n(2), 1.0).unwrap();
        assert_eq!(path_objective_oracle(&ev, &set(&[]), &g, 10).unwrap(), 0.0);
        assert_eq!(
            path_objective_oracle(&ev, &set(&[0, 1]), &g, 10).unwrap(),
            0.75
        );
    }

    #[test]
    fn diamond_with_skewed_split() {
        let g = Graph::new(
            4,
            [
                (0, 1, 1.0, 1.0),
                (0, 2, 1.0, 1.0),
                (1, 3, 1.0, 1.0),
                (2, 3, 1.0, 1.0),
            ],
        )
        .unwrap();
        let m = TransitionMatrix::from_triplets(
            4,
            [
                (n(0), n(1), 0.8),
                (n(0), n(2), 0.2),
                (n(1), n(3), 1.0),
                (n(2), n(3), 1.0),
            ],
        )
        .unwrap();
        let ev = EvaderSpec::new(1.0, EvaderSpec::point_source(4, n(0)), n(3), m);
        let s = enumerate_paths(&ev, &set(&[0]), &g, 10).unwrap();
        assert_eq!(s.paths, 2);
        assert_eq!(s.objective(), 0.8);
        assert!(matches!(
            path_objective_oracle(&ev, &set(&[]), &g, 1),
            Err(UmeError::PathLimit(1))
        ));
    }

    #[test]
    fn cycle_is_rejected() {
        let g = Graph::new(3, [(0, 1, 1.0, 0.5), (1, 0, 1.0, 0.5), (1, 2, 1.0, 0.5)]).unwrap();
        let m = TransitionMatrix::from_triplets(
            3,
            [(n(0), n(1), 1.0), (n(1), n(0), 0.5), (n(1), n(2), 0.5)],
        )
        .unwrap();
        let ev = EvaderSpec::new(1.0, EvaderSpec::point_source(3, n(0)), n(2), m);
        let err = path_objective_oracle(&ev, &set(&[]), &g, 100).unwrap_err();
        assert!(err.to_string().contains("acyclic required"));
    }

    #[test]
    fn dead_end_mass_counts_as_captured() {
        // 0 -> 1 (dead end) with 0.25, 0 -> 2 target with 0.75
        let g = Graph::new(3, [(0, 1, 1.0, 0.5), (0, 2, 1.0, 0.5)]).unwrap();
        let m =
            TransitionMatrix::from_triplets(3, [(n(0), n(1), 0.25), (n(0), n(2), 0.75)]).unwrap();
        let ev = EvaderSpec::new(1.0, EvaderSpec::point_source(3, n(0)), n(2), m);
        let s = enumerate_paths(&ev, &set(&[1]), &g, 10).unwrap();
        assert_eq!(s.never_arrives, 0.25);
        assert_eq!(s.objective(), 0.25 + 0.375);
    }
}
