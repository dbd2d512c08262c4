//! JSON files for instances, solutions and node-interdiction bundles.
//!
//! Instance schema (`format = "ume-instance/1"`):
//!
//! ```json
//! {
//!   "format": "ume-instance/1",
//!   "nodes": 3,
//!   "edges": [[0, 0, 1, 1.0, 0.5], [1, 1, 2, 1.0, 0.5]],
//!   "evaders": [
//!     {"w": 1.0, "a": {"0": 1.0}, "t": 2, "model": {"lambda": 1.0}},
//!     {"w": 0.0, "a": {"1": 1.0}, "t": 2, "M": [[1, 2, 1.0]]}
//!   ],
//!   "budget": 1,
//!   "tolerance": 1e-9
//! }
//! ```
//!
//! Edges are `[id, tail, head, cost, d]`. Each evader carries either the
//! explicit transition triplets `M` or the progress-model parameters.
//! Reals are written in shortest round-trip form, so reading back a written
//! file reproduces every value bit for bit.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::chain::TransitionMatrix;
use crate::error::{Result, UmeError};
use crate::graph::{Edge, EdgeId, Graph, NodeId};
use crate::linalg::DEFAULT_TOLERANCE;
use crate::model::{EvaderSpec, ProblemInstance};
use crate::solvers::Solution;
use crate::transforms::{NodeProblem, TransformMap};

pub const INSTANCE_FORMAT: &str = "ume-instance/1";
pub const SOLUTION_FORMAT: &str = "ume-solution/1";
pub const NODE_PROBLEM_FORMAT: &str = "ume-node-problem/1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord(pub u32, pub u32, pub u32, pub f64, pub f64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ChainRecord {
    #[serde(rename = "M")]
    Matrix(Vec<(u32, u32, f64)>),
    #[serde(rename = "model")]
    Model { lambda: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaderRecord {
    pub w: f64,
    /// Nonzero source entries keyed by node.
    pub a: BTreeMap<u32, f64>,
    pub t: u32,
    #[serde(flatten)]
    pub chain: ChainRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub format: String,
    pub nodes: usize,
    pub edges: Vec<EdgeRecord>,
    pub evaders: Vec<EvaderRecord>,
    pub budget: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

fn edge_records(graph: &Graph) -> Vec<EdgeRecord> {
    graph
        .edges()
        .iter()
        .map(|e| EdgeRecord(e.id.0, e.tail.0, e.head.0, e.cost, e.efficiency))
        .collect()
}

fn graph_from_records(nodes: usize, edges: &[EdgeRecord]) -> Result<Graph> {
    let edges = edges
        .iter()
        .map(|r| Edge {
            id: EdgeId(r.0),
            tail: NodeId(r.1),
            head: NodeId(r.2),
            cost: r.3,
            efficiency: r.4,
        })
        .collect();
    Graph::from_edges(nodes, edges)
}

fn sparse_source(a: &[f64]) -> BTreeMap<u32, f64> {
    a.iter()
        .enumerate()
        .filter(|(_, &x)| x != 0.0)
        .map(|(i, &x)| (i as u32, x))
        .collect()
}

fn dense_source(n: usize, a: &BTreeMap<u32, f64>, index: usize) -> Result<Vec<f64>> {
    let mut out = vec![0.0; n];
    for (&i, &x) in a {
        let slot = out
            .get_mut(i as usize)
            .ok_or_else(|| UmeError::InvalidEvader {
                index,
                reason: format!("source entry for missing node {i}"),
            })?;
        *slot = x;
    }
    Ok(out)
}

impl InstanceFile {
    pub fn from_problem(problem: &ProblemInstance) -> Self {
        let evaders = problem
            .evaders
            .iter()
            .map(|ev| EvaderRecord {
                w: ev.weight,
                a: sparse_source(&ev.source),
                t: ev.target.0,
                chain: match ev.lambda {
                    Some(lambda) => ChainRecord::Model { lambda },
                    None => ChainRecord::Matrix(
                        ev.matrix
                            .triplets()
                            .map(|t| (t.from.0, t.to.0, t.p))
                            .collect(),
                    ),
                },
            })
            .collect();
        InstanceFile {
            format: INSTANCE_FORMAT.into(),
            nodes: problem.graph.node_count(),
            edges: edge_records(&problem.graph),
            evaders,
            budget: problem.budget,
            tolerance: problem.tolerance,
        }
    }

    pub fn to_problem(&self) -> Result<ProblemInstance> {
        if self.format != INSTANCE_FORMAT {
            return Err(UmeError::Schema(format!(
                "expected format {INSTANCE_FORMAT}, found {}",
                self.format
            )));
        }
        let graph = graph_from_records(self.nodes, &self.edges)?;
        let mut evaders = Vec::with_capacity(self.evaders.len());
        for (k, r) in self.evaders.iter().enumerate() {
            let source = dense_source(self.nodes, &r.a, k)?;
            let target = NodeId(r.t);
            if !graph.contains_node(target) {
                return Err(UmeError::InvalidEvader {
                    index: k,
                    reason: format!("target {target} does not exist"),
                });
            }
            let ev = match &r.chain {
                ChainRecord::Model { lambda } => {
                    EvaderSpec::from_model(&graph, r.w, source, target, *lambda)?
                }
                ChainRecord::Matrix(m) => {
                    let matrix = TransitionMatrix::from_triplets(
                        self.nodes,
                        m.iter().map(|&(i, j, p)| (NodeId(i), NodeId(j), p)),
                    )?;
                    EvaderSpec::new(r.w, source, target, matrix)
                }
            };
            evaders.push(ev);
        }
        let problem = ProblemInstance {
            graph,
            evaders,
            budget: self.budget,
            tolerance: self.tolerance,
        };
        problem.validate()?;
        Ok(problem)
    }
}

pub fn instance_to_json(problem: &ProblemInstance) -> String {
    serde_json::to_string_pretty(&InstanceFile::from_problem(problem)).expect("instance serializes")
}

pub fn instance_from_json(text: &str) -> Result<ProblemInstance> {
    let file: InstanceFile =
        serde_json::from_str(text).map_err(|e| UmeError::Schema(e.to_string()))?;
    file.to_problem()
}

pub fn read_instance(path: &Path) -> Result<ProblemInstance> {
    instance_from_json(&fs::read_to_string(path)?)
}

pub fn write_instance(path: &Path, problem: &ProblemInstance) -> Result<()> {
    fs::write(path, instance_to_json(problem) + "\n")?;
    Ok(())
}

/// Solution plus the settings that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub format: String,
    #[serde(flatten)]
    pub solution: Solution,
    pub config: serde_json::Value,
}

impl SolutionFile {
    pub fn new(solution: Solution, config: serde_json::Value) -> Self {
        SolutionFile {
            format: SOLUTION_FORMAT.into(),
            solution,
            config,
        }
    }
}

pub fn solution_to_json(solution: &Solution, config: serde_json::Value) -> String {
    serde_json::to_string_pretty(&SolutionFile::new(solution.clone(), config))
        .expect("solution serializes")
}

pub fn solution_from_json(text: &str) -> Result<SolutionFile> {
    let file: SolutionFile =
        serde_json::from_str(text).map_err(|e| UmeError::Schema(e.to_string()))?;
    if file.format != SOLUTION_FORMAT {
        return Err(UmeError::Schema(format!(
            "expected format {SOLUTION_FORMAT}, found {}",
            file.format
        )));
    }
    Ok(file)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeProblemFile {
    pub format: String,
    pub nodes: usize,
    pub edges: Vec<EdgeRecord>,
    /// `d_v` per node.
    pub node_d: Vec<f64>,
    pub candidates: Vec<u32>,
    pub evaders: Vec<EvaderRecord>,
    pub budget: usize,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<TransformMap>,
}

impl NodeProblemFile {
    pub fn new(problem: &NodeProblem, map: Option<TransformMap>) -> Self {
        let evaders = problem
            .evaders
            .iter()
            .map(|ev| EvaderRecord {
                w: ev.weight,
                a: sparse_source(&ev.source),
                t: ev.target.0,
                chain: ChainRecord::Matrix(
                    ev.matrix
                        .triplets()
                        .map(|t| (t.from.0, t.to.0, t.p))
                        .collect(),
                ),
            })
            .collect();
        NodeProblemFile {
            format: NODE_PROBLEM_FORMAT.into(),
            nodes: problem.graph.node_count(),
            edges: edge_records(&problem.graph),
            node_d: problem.node_efficiency.clone(),
            candidates: problem.candidates.iter().map(|v| v.0).collect(),
            evaders,
            budget: problem.budget,
            tolerance: problem.tolerance,
            map,
        }
    }

    pub fn to_problem(&self) -> Result<NodeProblem> {
        if self.format != NODE_PROBLEM_FORMAT {
            return Err(UmeError::Schema(format!(
                "expected format {NODE_PROBLEM_FORMAT}, found {}",
                self.format
            )));
        }
        let graph = graph_from_records(self.nodes, &self.edges)?;
        let mut evaders = Vec::with_capacity(self.evaders.len());
        for (k, r) in self.evaders.iter().enumerate() {
            let source = dense_source(self.nodes, &r.a, k)?;
            let ev = match &r.chain {
                ChainRecord::Model { lambda } => {
                    EvaderSpec::from_model(&graph, r.w, source, NodeId(r.t), *lambda)?
                }
                ChainRecord::Matrix(m) => EvaderSpec::new(
                    r.w,
                    source,
                    NodeId(r.t),
                    TransitionMatrix::from_triplets(
                        self.nodes,
                        m.iter().map(|&(i, j, p)| (NodeId(i), NodeId(j), p)),
                    )?,
                ),
            };
            evaders.push(ev);
        }
        let problem = NodeProblem {
            graph,
            node_efficiency: self.node_d.clone(),
            candidates: self.candidates.iter().map(|&v| NodeId(v)).collect(),
            evaders,
            budget: self.budget,
            tolerance: self.tolerance,
        };
        problem.validate()?;
        Ok(problem)
    }
}

pub fn node_problem_to_json(problem: &NodeProblem, map: Option<TransformMap>) -> String {
    serde_json::to_string_pretty(&NodeProblemFile::new(problem, map))
        .expect("node problem serializes")
}

pub fn node_problem_from_json(text: &str) -> Result<(NodeProblem, Option<TransformMap>)> {
    let file: NodeProblemFile =
        serde_json::from_str(text).map_err(|e| UmeError::Schema(e.to_string()))?;
    let problem = file.to_problem()?;
    Ok((problem, file.map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::InterdictionSet;

    fn mixed() -> ProblemInstance {
        let g = Graph::new(
            3,
            [
                (0, 1, 1.0, 0.5),
                (1, 2, 0.1 + 0.2, 1.0 / 3.0),
                (0, 2, 2.5, 0.25),
            ],
        )
        .unwrap();
        let a = EvaderSpec::from_model(&g, 0.7, vec![0.6, 0.4, 0.0], NodeId(2), 0.1).unwrap();
        let m = TransitionMatrix::from_triplets(
            3,
            [
                (NodeId(0), NodeId(2), 1.0 / 7.0),
                (NodeId(1), NodeId(2), 1.0),
            ],
        )
        .unwrap();
        let b = EvaderSpec::new(0.30000000000000004, vec![1.0, 0.0, 0.0], NodeId(2), m);
        ProblemInstance::new(g, vec![a, b], 2).unwrap()
    }

    #[test]
    fn instance_round_trip_is_exact() {
        let p = mixed();
        let text = instance_to_json(&p);
        let q = instance_from_json(&text).unwrap();
        assert_eq!(p, q);
        assert_eq!(instance_to_json(&q), text);
    }

    #[test]
    fn documented_example_parses() {
        let text = r#"{
          "format": "ume-instance/1",
          "nodes": 3,
          "edges": [[0, 0, 1, 1.0, 0.5], [1, 1, 2, 1.0, 0.5]],
          "evaders": [{"w": 1.0, "a": {"0": 1.0}, "t": 2, "model": {"lambda": 1.0}}],
          "budget": 1
        }"#;
        let p = instance_from_json(text).unwrap();
        assert_eq!(p.tolerance, DEFAULT_TOLERANCE);
        let j = crate::model::objective(&p, &InterdictionSet::new([EdgeId(0)]).unwrap()).unwrap();
        assert!((j - 0.5).abs() < 1e-15);
    }

    #[test]
    fn schema_errors() {
        assert!(matches!(instance_from_json("{"), Err(UmeError::Schema(_))));
        let wrong = instance_to_json(&mixed()).replace("ume-instance/1", "other");
        assert!(matches!(
            instance_from_json(&wrong),
            Err(UmeError::Schema(_))
        ));
        let extra =
            instance_to_json(&mixed()).replacen("\"budget\"", "\"bogus\": 1, \"budget\"", 1);
        assert!(matches!(
            instance_from_json(&extra),
            Err(UmeError::Schema(_))
        ));
        let bad_source = instance_to_json(&mixed()).replace("\"0\": 0.6", "\"9\": 0.6");
        assert!(instance_from_json(&bad_source).is_err());
    }

    #[test]
    fn solution_round_trip() {
        let s = Solution {
            solver: "greedy".into(),
            selected: vec![EdgeId(2), EdgeId(0)],
            objective: 0.123_456_789_012_345_68,
            gains: vec![0.1, 0.023_456_789_012_345_68],
            eval_count: 7,
            wall_time: 0.001,
        };
        let text = solution_to_json(&s, serde_json::json!({"budget": 2}));
        let back = solution_from_json(&text).unwrap();
        assert_eq!(back.solution, s);
        assert_eq!(back.config["budget"], 2);
    }
}
