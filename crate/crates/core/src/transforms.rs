//! Reductions between edge interdiction and node interdiction.
//!
//! Node interdiction acts on arrivals: a device on node `v` removes an evader
//! entering `v` through any transition with probability `d_v`, i.e. every
//! edge into `v` is interdicted at once. Source mass already sitting on `v`
//! is not affected.
//!
//! * edge -> node: every edge `(i,j)` gets a midpoint `v` with `d_v = d_ij`;
//!   the evader steps `i -> v` with `M_ij` and `v -> j` with probability one.
//! * node -> edge: every node `v` becomes an entry `i(v)` and an exit `j(v)`
//!   joined by an edge with `d = d_v` and transition probability one. Edges
//!   into `v` enter `i(v)`, edges out of `v` leave `j(v)`, source mass moves
//!   to `j(v)` and a target `t` becomes `j(t)`.
//!
//! Transition matrices are rewritten directly; the progress model is not
//! re-derived on the new graph.

use serde::{Deserialize, Serialize};

use crate::chain::TransitionMatrix;
use crate::error::{Result, UmeError};
use crate::graph::{Edge, EdgeId, Graph, NodeId};
use crate::linalg::DEFAULT_TOLERANCE;
use crate::model::{EvaderSpec, Evaluator, InterdictionSet, ProblemInstance};

/// Node-interdiction problem. Edge efficiencies of `graph` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeProblem {
    pub graph: Graph,
    pub node_efficiency: Vec<f64>,
    /// Nodes that may receive a device.
    pub candidates: Vec<NodeId>,
    pub evaders: Vec<EvaderSpec>,
    pub budget: usize,
    pub tolerance: f64,
}

impl NodeProblem {
    pub fn validate(&self) -> Result<()> {
        let n = self.graph.node_count();
        if self.node_efficiency.len() != n {
            return Err(UmeError::InvalidProblem(format!(
                "{} node efficiencies for {n} nodes",
                self.node_efficiency.len()
            )));
        }
        if let Some(d) = self
            .node_efficiency
            .iter()
            .find(|d| !(0.0..=1.0).contains(*d))
        {
            return Err(UmeError::InvalidProblem(format!(
                "node efficiency {d} outside [0,1]"
            )));
        }
        let mut seen = vec![false; n];
        for &v in &self.candidates {
            if !self.graph.contains_node(v) {
                return Err(UmeError::MissingNode(v));
            }
            if std::mem::replace(&mut seen[v.index()], true) {
                return Err(UmeError::InvalidProblem(format!(
                    "candidate {v} listed twice"
                )));
            }
        }
        if self.budget > self.candidates.len() {
            return Err(UmeError::InvalidProblem(format!(
                "budget {} exceeds {} candidate nodes",
                self.budget,
                self.candidates.len()
            )));
        }
        self.as_edge_view(0)?.validate()
    }

    fn as_edge_view(&self, budget: usize) -> Result<ProblemInstance> {
        Ok(ProblemInstance {
            graph: self.graph.clone(),
            evaders: self.evaders.clone(),
            budget,
            tolerance: self.tolerance,
        })
    }

    /// Weighted interdiction probability with devices on `nodes`.
    pub fn objective(&self, nodes: &[NodeId]) -> Result<f64> {
        let mut hit = vec![1.0; self.graph.node_count()];
        for &v in nodes {
            if !self.candidates.contains(&v) {
                return Err(UmeError::Precondition(format!(
                    "node {v} is not interdictable"
                )));
            }
            hit[v.index()] = 1.0 - self.node_efficiency[v.index()];
        }
        let view = self.as_edge_view(0)?;
        let eval = Evaluator::new(&view)?;
        let edges = self.graph.edges();
        eval.objective_with(|e| hit[edges[e].head.index()])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    EdgeToNode,
    NodeToEdge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "of", rename_all = "kebab-case")]
pub enum NodeOrigin {
    Node(NodeId),
    Midpoint(EdgeId),
    Entry(NodeId),
    Exit(NodeId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "of", rename_all = "kebab-case")]
pub enum EdgeOrigin {
    FirstHalf(EdgeId),
    SecondHalf(EdgeId),
    Inner(NodeId),
    Arc(EdgeId),
}

/// Correspondence between interdictable elements of the two formulations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformMap {
    pub direction: Direction,
    /// `(original element, transformed element)`; edges or nodes depending
    /// on the direction.
    pub pairs: Vec<(u32, u32)>,
    pub node_origin: Vec<NodeOrigin>,
    pub edge_origin: Vec<EdgeOrigin>,
}

impl TransformMap {
    fn expect(&self, direction: Direction) -> Result<()> {
        if self.direction != direction {
            return Err(UmeError::Precondition(format!(
                "map direction is {:?}",
                self.direction
            )));
        }
        Ok(())
    }

    fn forward(&self, x: u32) -> Result<u32> {
        self.pairs
            .iter()
            .find(|p| p.0 == x)
            .map(|p| p.1)
            .ok_or_else(|| UmeError::Precondition(format!("element {x} is not interdictable")))
    }

    fn backward(&self, y: u32) -> Result<u32> {
        self.pairs
            .iter()
            .find(|p| p.1 == y)
            .map(|p| p.0)
            .ok_or_else(|| UmeError::Precondition(format!("element {y} has no preimage")))
    }

    /// Edge set of the original problem to device nodes of the node problem.
    pub fn edges_to_nodes(&self, set: &InterdictionSet) -> Result<Vec<NodeId>> {
        self.expect(Direction::EdgeToNode)?;
        set.edges()
            .iter()
            .map(|e| self.forward(e.0).map(NodeId))
            .collect()
    }

    pub fn nodes_to_edges(&self, nodes: &[NodeId]) -> Result<InterdictionSet> {
        self.expect(Direction::EdgeToNode)?;
        InterdictionSet::new(
            nodes
                .iter()
                .map(|v| self.backward(v.0).map(EdgeId))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// Device nodes of the original node problem to edges of the edge problem.
    pub fn node_set_to_edges(&self, nodes: &[NodeId]) -> Result<InterdictionSet> {
        self.expect(Direction::NodeToEdge)?;
        InterdictionSet::new(
            nodes
                .iter()
                .map(|v| self.forward(v.0).map(EdgeId))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    pub fn edge_set_to_nodes(&self, set: &InterdictionSet) -> Result<Vec<NodeId>> {
        self.expect(Direction::NodeToEdge)?;
        set.edges()
            .iter()
            .map(|e| self.backward(e.0).map(NodeId))
            .collect()
    }
}

/// Splits every edge with an interdictable midpoint.
pub fn edge_problem_to_node_problem(
    problem: &ProblemInstance,
) -> Result<(NodeProblem, TransformMap)> {
    let g = &problem.graph;
    let n = g.node_count();
    let m = g.edge_count();
    let mut edges = Vec::with_capacity(2 * m);
    let mut node_efficiency = vec![0.0; n + m];
    let mut node_origin: Vec<NodeOrigin> =
        (0..n).map(|i| NodeOrigin::Node(NodeId::from(i))).collect();
    let mut edge_origin = Vec::with_capacity(2 * m);
    let mut pairs = Vec::with_capacity(m);
    for e in g.edges() {
        let mid = NodeId::from(n + e.id.index());
        edges.push(Edge {
            id: EdgeId::from(edges.len()),
            tail: e.tail,
            head: mid,
            cost: e.cost,
            efficiency: 0.0,
        });
        edges.push(Edge {
            id: EdgeId::from(edges.len()),
            tail: mid,
            head: e.head,
            cost: 0.0,
            efficiency: 0.0,
        });
        edge_origin.push(EdgeOrigin::FirstHalf(e.id));
        edge_origin.push(EdgeOrigin::SecondHalf(e.id));
        node_efficiency[mid.index()] = e.efficiency;
        node_origin.push(NodeOrigin::Midpoint(e.id));
        pairs.push((e.id.0, mid.0));
    }
    let graph = Graph::from_edges(n + m, edges)?;

    let mut evaders = Vec::with_capacity(problem.evaders.len());
    for ev in &problem.evaders {
        let reach = ev.matrix.reaches(ev.target);
        let mut entries = Vec::with_capacity(2 * ev.matrix.nnz());
        for t in ev.matrix.triplets() {
            let e = g.find_edge(t.from, t.to).ok_or(UmeError::NoSuchArc {
                tail: t.from,
                head: t.to,
            })?;
            let mid = NodeId::from(n + e.index());
            entries.push((t.from, mid, t.p));
            // a midpoint leading into a dead end becomes the dead end itself
            if reach[t.to.index()] {
                entries.push((mid, t.to, 1.0));
            }
        }
        let mut source = ev.source.clone();
        source.resize(n + m, 0.0);
        evaders.push(EvaderSpec::new(
            ev.weight,
            source,
            ev.target,
            TransitionMatrix::from_triplets(n + m, entries)?,
        ));
    }
    let candidates = (n..n + m).map(NodeId::from).collect();
    let node_problem = NodeProblem {
        graph,
        node_efficiency,
        candidates,
        evaders,
        budget: problem.budget,
        tolerance: problem.tolerance,
    };
    let map = TransformMap {
        direction: Direction::EdgeToNode,
        pairs,
        node_origin,
        edge_origin,
    };
    Ok((node_problem, map))
}

/// Splits every node into an entry and an exit joined by an interdictable
/// edge.
pub fn node_problem_to_edge_problem(
    problem: &NodeProblem,
) -> Result<(ProblemInstance, TransformMap)> {
    problem.validate()?;
    let g = &problem.graph;
    let n = g.node_count();
    let entry = |v: NodeId| v;
    let exit = |v: NodeId| NodeId::from(n + v.index());
    let mut is_candidate = vec![false; n];
    for v in &problem.candidates {
        is_candidate[v.index()] = true;
    }

    let mut edges = Vec::with_capacity(n + g.edge_count());
    let mut edge_origin = Vec::with_capacity(n + g.edge_count());
    let mut pairs = Vec::with_capacity(problem.candidates.len());
    for v in (0..n).map(NodeId::from) {
        let d = if is_candidate[v.index()] {
            problem.node_efficiency[v.index()]
        } else {
            0.0
        };
        let id = EdgeId::from(edges.len());
        edges.push(Edge {
            id,
            tail: entry(v),
            head: exit(v),
            cost: 0.0,
            efficiency: d,
        });
        edge_origin.push(EdgeOrigin::Inner(v));
        if is_candidate[v.index()] {
            pairs.push((v.0, id.0));
        }
    }
    for e in g.edges() {
        let id = EdgeId::from(edges.len());
        edges.push(Edge {
            id,
            tail: exit(e.tail),
            head: entry(e.head),
            cost: e.cost,
            efficiency: 0.0,
        });
        edge_origin.push(EdgeOrigin::Arc(e.id));
    }
    let graph = Graph::from_edges(2 * n, edges)?;
    let node_origin = (0..n)
        .map(|v| NodeOrigin::Entry(NodeId::from(v)))
        .chain((0..n).map(|v| NodeOrigin::Exit(NodeId::from(v))))
        .collect();

    let mut evaders = Vec::with_capacity(problem.evaders.len());
    for ev in &problem.evaders {
        let mut entries = Vec::with_capacity(n + ev.matrix.nnz());
        for v in (0..n).map(NodeId::from) {
            // dead ends stay dead ends at their entry node
            if v == ev.target || ev.matrix.row(v).next().is_some() {
                entries.push((entry(v), exit(v), 1.0));
            }
        }
        for t in ev.matrix.triplets() {
            entries.push((exit(t.from), entry(t.to), t.p));
        }
        let mut source = vec![0.0; 2 * n];
        for (v, &a) in ev.source.iter().enumerate() {
            source[n + v] = a;
        }
        evaders.push(EvaderSpec::new(
            ev.weight,
            source,
            exit(ev.target),
            TransitionMatrix::from_triplets(2 * n, entries)?,
        ));
    }
    let edge_problem = ProblemInstance {
        graph,
        evaders,
        budget: problem.budget,
        tolerance: problem.tolerance,
    };
    edge_problem.validate()?;
    let map = TransformMap {
        direction: Direction::NodeToEdge,
        pairs,
        node_origin,
        edge_origin,
    };
    Ok((edge_problem, map))
}

/// Node problem with every node interdictable, built from an edge problem's
/// graph and evaders.
pub fn node_problem_from_parts(
    graph: Graph,
    node_efficiency: Vec<f64>,
    evaders: Vec<EvaderSpec>,
    budget: usize,
) -> Result<NodeProblem> {
    let candidates = (0..graph.node_count()).map(NodeId::from).collect();
    let p = NodeProblem {
        graph,
        node_efficiency,
        candidates,
        evaders,
        budget,
        tolerance: DEFAULT_TOLERANCE,
    };
    p.validate()?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::objective;

    fn chain_problem() -> ProblemInstance {
        let g = Graph::new(3, [(0, 1, 1.0, 0.5), (1, 2, 1.0, 0.5)]).unwrap();
        let ev = EvaderSpec::from_model(
            &g,
            1.0,
            EvaderSpec::point_source(3, NodeId(0)),
            NodeId(2),
            1.0,
        )
        .unwrap();
        ProblemInstance::new(g, vec![ev], 1).unwrap()
    }

    #[test]
    fn edge_to_node_sizes_and_values() {
        let p = chain_problem();
        let (np, map) = edge_problem_to_node_problem(&p).unwrap();
        assert_eq!(np.graph.node_count(), 5);
        assert_eq!(np.graph.edge_count(), 4);
        assert_eq!(np.candidates.len(), 2);
        np.validate().unwrap();

        let s = InterdictionSet::new([EdgeId(0)]).unwrap();
        let nodes = map.edges_to_nodes(&s).unwrap();
        assert_eq!(nodes, vec![NodeId(3)]);
        assert_eq!(np.objective(&nodes).unwrap(), 0.5);
        assert_eq!(objective(&p, &s).unwrap(), 0.5);
        assert_eq!(map.nodes_to_edges(&nodes).unwrap(), s);

        assert!(map
            .edges_to_nodes(&InterdictionSet::empty())
            .unwrap()
            .is_empty());
        assert_eq!(np.objective(&[]).unwrap(), 0.0);
        assert!(np.objective(&[NodeId(0)]).is_err());
    }

    #[test]
    fn node_to_edge_single_device() {
        // path s=0, v=1, t=2, interdicting v with d = 1
        let g = Graph::new(3, [(0, 1, 1.0, 0.0), (1, 2, 1.0, 0.0)]).unwrap();
        let ev = EvaderSpec::from_model(
            &g,
            1.0,
            EvaderSpec::point_source(3, NodeId(0)),
            NodeId(2),
            1.0,
        )
        .unwrap();
        let np = node_problem_from_parts(g, vec![0.0, 1.0, 0.0], vec![ev], 1).unwrap();
        assert_eq!(np.objective(&[NodeId(1)]).unwrap(), 1.0);
        let (ep, map) = node_problem_to_edge_problem(&np).unwrap();
        assert_eq!(ep.graph.node_count(), 6);
        assert_eq!(ep.graph.edge_count(), 2 + 3);
        let s = map.node_set_to_edges(&[NodeId(1)]).unwrap();
        assert_eq!(objective(&ep, &s).unwrap(), 1.0);
        assert_eq!(map.edge_set_to_nodes(&s).unwrap(), vec![NodeId(1)]);
        assert!(map.edges_to_nodes(&s).is_err());
    }

    #[test]
    fn midpoint_before_dead_end_stays_valid() {
        // 0 -> 1 (dead end) and 0 -> 2 (target)
        let g = Graph::new(3, [(0, 1, 1.0, 0.5), (0, 2, 1.0, 0.5)]).unwrap();
        let m = TransitionMatrix::from_triplets(
            3,
            [(NodeId(0), NodeId(1), 0.4), (NodeId(0), NodeId(2), 0.6)],
        )
        .unwrap();
        let ev = EvaderSpec::new(1.0, EvaderSpec::point_source(3, NodeId(0)), NodeId(2), m);
        let p = ProblemInstance::new(g, vec![ev], 1).unwrap();
        let (np, map) = edge_problem_to_node_problem(&p).unwrap();
        np.validate().unwrap();
        for e in 0..2 {
            let s = InterdictionSet::new([EdgeId(e)]).unwrap();
            let a = objective(&p, &s).unwrap();
            let b = np.objective(&map.edges_to_nodes(&s).unwrap()).unwrap();
            assert!((a - b).abs() < 1e-15);
        }
    }
}
