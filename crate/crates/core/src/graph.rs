//! Directed graph with per-edge traversal cost and interdiction efficiency.
//!
//! Node and edge identifiers are dense indices. Edge ids double as the
//! deterministic tie-break key used by every solver.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, UmeError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl EdgeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(i as u32)
    }
}

impl From<usize> for EdgeId {
    fn from(i: usize) -> Self {
        EdgeId(i as u32)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub id: EdgeId,
    pub tail: NodeId,
    pub head: NodeId,
    pub cost: f64,
    /// Probability that an interdicted edge removes an evader traversing it.
    pub efficiency: f64,
}

#[derive(Debug, Clone)]
pub struct Graph {
    node_count: usize,
    edges: Vec<Edge>,
    arcs: HashMap<(NodeId, NodeId), EdgeId>,
    out: Vec<Vec<EdgeId>>,
    inc: Vec<Vec<EdgeId>>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.node_count == other.node_count && self.edges == other.edges
    }
}

impl Graph {
    /// Builds a graph from `(tail, head, cost, efficiency)` tuples; edge ids are
    /// assigned in input order.
    pub fn new<I>(node_count: usize, arcs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64, f64)>,
    {
        let edges = arcs
            .into_iter()
            .enumerate()
            .map(|(k, (tail, head, cost, efficiency))| Edge {
                id: EdgeId::from(k),
                tail: NodeId::from(tail),
                head: NodeId::from(head),
                cost,
                efficiency,
            })
            .collect();
        Self::from_edges(node_count, edges)
    }

    /// Builds a graph from fully specified edges. Ids must be `0..edges.len()`
    /// in order.
    pub fn from_edges(node_count: usize, edges: Vec<Edge>) -> Result<Self> {
        let mut arcs = HashMap::with_capacity(edges.len());
        let mut out = vec![Vec::new(); node_count];
        let mut inc = vec![Vec::new(); node_count];
        for (k, e) in edges.iter().enumerate() {
            if e.id.index() != k {
                return Err(UmeError::InvalidGraph(format!(
                    "edge ids must be dense and ordered, found {} at position {k}",
                    e.id
                )));
            }
            if e.tail.index() >= node_count {
                return Err(UmeError::MissingNode(e.tail));
            }
            if e.head.index() >= node_count {
                return Err(UmeError::MissingNode(e.head));
            }
            if e.tail == e.head {
                return Err(UmeError::InvalidGraph(format!(
                    "self-loop at node {}",
                    e.tail
                )));
            }
            if !(e.cost >= 0.0) || !e.cost.is_finite() {
                return Err(UmeError::InvalidGraph(format!(
                    "edge {} has invalid cost {}",
                    e.id, e.cost
                )));
            }
            if !(0.0..=1.0).contains(&e.efficiency) {
                return Err(UmeError::InvalidGraph(format!(
                    "edge {} has efficiency {} outside [0,1]",
                    e.id, e.efficiency
                )));
            }
            if arcs.insert((e.tail, e.head), e.id).is_some() {
                return Err(UmeError::InvalidGraph(format!(
                    "duplicate edge {} -> {}",
                    e.tail, e.head
                )));
            }
            out[e.tail.index()].push(e.id);
            inc[e.head.index()].push(e.id);
        }
        Ok(Graph {
            node_count,
            edges,
            arcs,
            out,
            inc,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> Result<&Edge> {
        self.edges.get(id.index()).ok_or(UmeError::MissingEdge(id))
    }

    pub fn contains_node(&self, node: NodeId) -> bool {
        node.index() < self.node_count
    }

    pub fn find_edge(&self, tail: NodeId, head: NodeId) -> Option<EdgeId> {
        self.arcs.get(&(tail, head)).copied()
    }

    pub fn out_edges(&self, node: NodeId) -> &[EdgeId] {
        &self.out[node.index()]
    }

    pub fn in_edges(&self, node: NodeId) -> &[EdgeId] {
        &self.inc[node.index()]
    }

    /// Returns a copy with every edge cost replaced.
    pub fn with_uniform_cost(&self, cost: f64) -> Result<Graph> {
        self.map_edges(|e| Edge { cost, ..e.clone() })
    }

    /// Returns a copy with every interdiction efficiency replaced.
    pub fn with_uniform_efficiency(&self, efficiency: f64) -> Result<Graph> {
        self.map_edges(|e| Edge {
            efficiency,
            ..e.clone()
        })
    }

    fn map_edges(&self, f: impl Fn(&Edge) -> Edge) -> Result<Graph> {
        Graph::from_edges(self.node_count, self.edges.iter().map(f).collect())
    }

    /// Least-cost distance from every node to `target` (infinite when the
    /// target is unreachable).
    pub fn distances_to(&self, target: NodeId) -> Result<Vec<f64>> {
        use std::cmp::Reverse;
        use std::collections::BinaryHeap;

        use ordered::Dist;

        if !self.contains_node(target) {
            return Err(UmeError::MissingNode(target));
        }
        let mut dist = vec![f64::INFINITY; self.node_count];
        dist[target.index()] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((Dist(0.0), target)));
        while let Some(Reverse((Dist(d), v))) = heap.pop() {
            if d > dist[v.index()] {
                continue;
            }
            for &e in self.in_edges(v) {
                let edge = &self.edges[e.index()];
                let nd = d + edge.cost;
                if nd < dist[edge.tail.index()] {
                    dist[edge.tail.index()] = nd;
                    heap.push(Reverse((Dist(nd), edge.tail)));
                }
            }
        }
        Ok(dist)
    }
}

mod ordered {
    /// Total order over finite, non-NaN distances.
    #[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
    pub struct Dist(pub f64);

    impl Eq for Dist {}

    #[allow(clippy::derive_ord_xor_partial_ord)]
    impl Ord for Dist {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            self.0.total_cmp(&other.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_self_loops_and_duplicates() {
        assert!(Graph::new(2, [(0, 0, 1.0, 0.5)]).is_err());
        assert!(Graph::new(2, [(0, 1, 1.0, 0.5), (0, 1, 2.0, 0.5)]).is_err());
        assert!(Graph::new(2, [(0, 1, 1.0, 1.5)]).is_err());
        assert!(Graph::new(2, [(0, 1, -1.0, 0.5)]).is_err());
        assert!(Graph::new(2, [(0, 1, f64::NAN, 0.5)]).is_err());
        assert!(Graph::new(2, [(0, 2, 1.0, 0.5)]).is_err());
    }

    #[test]
    fn distances_follow_least_cost() {
        // 0 -> 1 -> 3, 0 -> 2 -> 3 with the lower branch cheaper
        let g = Graph::new(
            4,
            [
                (0, 1, 1.0, 0.0),
                (1, 3, 5.0, 0.0),
                (0, 2, 2.0, 0.0),
                (2, 3, 1.0, 0.0),
            ],
        )
        .unwrap();
        let d = g.distances_to(NodeId(3)).unwrap();
        assert_eq!(d, vec![3.0, 5.0, 1.0, 0.0]);
        let g = Graph::new(3, [(0, 1, 1.0, 0.0)]).unwrap();
        assert!(g.distances_to(NodeId(1)).unwrap()[2].is_infinite());
    }
}
