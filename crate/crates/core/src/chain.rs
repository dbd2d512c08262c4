//! Evader transition matrices: construction from the progress model,
//! absorbing-chain diagnostics and the interdicted matrix.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, UmeError};
use crate::graph::{Graph, NodeId};
use crate::model::InterdictionSet;

/// Slack allowed on row sums before a row counts as super-stochastic.
pub const ROW_SUM_SLACK: f64 = 1e-12;

/// Row-compressed transition matrix. Columns inside a row are sorted and
/// unique; stored values are nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<NodeId>,
    vals: Vec<f64>,
}

/// One stored entry, used for the sparse triplet file representation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triplet {
    pub from: NodeId,
    pub to: NodeId,
    pub p: f64,
}

impl TransitionMatrix {
    pub fn zeros(n: usize) -> Self {
        TransitionMatrix {
            n,
            row_ptr: vec![0; n + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    /// Builds an `n x n` matrix from `(row, col, value)` entries. Exact zeros
    /// are dropped; repeated coordinates are rejected.
    pub fn from_triplets<I>(n: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId, f64)>,
    {
        let mut rows: Vec<Vec<(NodeId, f64)>> = vec![Vec::new(); n];
        for (i, j, v) in entries {
            if i.index() >= n {
                return Err(UmeError::MissingNode(i));
            }
            if j.index() >= n {
                return Err(UmeError::MissingNode(j));
            }
            if !v.is_finite() {
                return Err(UmeError::InvalidParameter(format!(
                    "non-finite transition {i}->{j}: {v}"
                )));
            }
            if v != 0.0 {
                rows[i.index()].push((j, v));
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for (i, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|&(j, _)| j);
            if let Some(w) = row.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(UmeError::InvalidParameter(format!(
                    "duplicate transition entry {i}->{}",
                    w[0].0
                )));
            }
            for (j, v) in row {
                cols.push(j);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Ok(TransitionMatrix {
            n,
            row_ptr,
            cols,
            vals,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Entries of row `i` as `(column, value)`.
    pub fn row(&self, i: NodeId) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        let r = self.row_range(i.index());
        self.cols[r.clone()]
            .iter()
            .copied()
            .zip(self.vals[r].iter().copied())
    }

    pub(crate) fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        self.row_ptr[i]..self.row_ptr[i + 1]
    }

    pub(crate) fn col_at(&self, pos: usize) -> NodeId {
        self.cols[pos]
    }
    pub(crate) fn values(&self) -> &[f64] {
        &self.vals
    }

    /// Storage position of entry `(i, j)`, if stored.
    pub(crate) fn position(&self, i: NodeId, j: NodeId) -> Option<usize> {
        let r = self.row_range(i.index());
        self.cols[r.clone()]
            .binary_search(&j)
            .ok()
            .map(|k| r.start + k)
    }

    pub fn get(&self, i: NodeId, j: NodeId) -> f64 {
        if i.index() >= self.n || j.index() >= self.n {
            return 0.0;
        }
        self.position(i, j).map_or(0.0, |p| self.vals[p])
    }

    pub fn row_sum(&self, i: NodeId) -> f64 {
        self.vals[self.row_range(i.index())].iter().sum()
    }

    pub fn triplets(&self) -> impl Iterator<Item = Triplet> + '_ {
        (0..self.n).flat_map(move |i| {
            self.row(NodeId::from(i)).map(move |(j, p)| Triplet {
                from: NodeId::from(i),
                to: j,
                p,
            })
        })
    }

    /// Nodes from which `target` is reachable through positive entries
    /// (the target itself included).
    pub fn reaches(&self, target: NodeId) -> Vec<bool> {
        let mut preds: Vec<Vec<NodeId>> = vec![Vec::new(); self.n];
        for i in 0..self.n {
            for (j, p) in self.row(NodeId::from(i)) {
                if p > 0.0 {
                    preds[j.index()].push(NodeId::from(i));
                }
            }
        }
        let mut seen = vec![false; self.n];
        if target.index() >= self.n {
            return seen;
        }
        seen[target.index()] = true;
        let mut queue = VecDeque::from([target]);
        while let Some(v) = queue.pop_front() {
            for &u in &preds[v.index()] {
                if !seen[u.index()] {
                    seen[u.index()] = true;
                    queue.push_back(u);
                }
            }
        }
        seen
    }

    /// Nodes from which the walk is absorbed at `target` with probability
    /// one: every node reachable from them, other than the target, has a
    /// full row.
    pub fn lossless(&self, target: NodeId) -> Vec<bool> {
        let mut preds: Vec<Vec<NodeId>> = vec![Vec::new(); self.n];
        let mut lossy = vec![false; self.n];
        let mut queue = VecDeque::new();
        for i in 0..self.n {
            let node = NodeId::from(i);
            for (j, _) in self.row(node) {
                preds[j.index()].push(node);
            }
            if node != target && self.row_sum(node) < 1.0 - ROW_SUM_SLACK {
                lossy[i] = true;
                queue.push_back(node);
            }
        }
        while let Some(v) = queue.pop_front() {
            for &u in &preds[v.index()] {
                if !lossy[u.index()] {
                    lossy[u.index()] = true;
                    queue.push_back(u);
                }
            }
        }
        lossy.into_iter().map(|l| !l).collect()
    }

    fn scaled(&self, mut scale: impl FnMut(usize, NodeId, NodeId) -> f64) -> TransitionMatrix {
        let mut out = self.clone();
        for i in 0..self.n {
            for pos in self.row_range(i) {
                out.vals[pos] = self.vals[pos] * scale(pos, NodeId::from(i), self.cols[pos]);
            }
        }
        out
    }
}

/// Non-retreating progress chain toward `target`.
///
/// From node `i` the evader may only move to out-neighbors strictly closer to
/// the target in least-cost distance `D`. Allowed moves are weighted by
/// `exp(-(c_ij + D(j) - D(i)) / lambda)` and normalized per row. Nodes with no
/// allowed move, and the target, get an all-zero row.
pub fn build_evader_transition(
    graph: &Graph,
    target: NodeId,
    lambda: f64,
) -> Result<TransitionMatrix> {
    if !graph.contains_node(target) {
        return Err(UmeError::MissingNode(target));
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(UmeError::InvalidParameter(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    if let Some(e) = graph.edges().iter().find(|e| !e.cost.is_finite()) {
        return Err(UmeError::InvalidGraph(format!(
            "edge {} has non-finite cost",
            e.id
        )));
    }
    let dist = graph.distances_to(target)?;
    let mut entries = Vec::new();
    let mut moves: Vec<(NodeId, f64)> = Vec::new();
    for i in 0..graph.node_count() {
        let node = NodeId::from(i);
        if node == target || !dist[i].is_finite() {
            continue;
        }
        moves.clear();
        for &e in graph.out_edges(node) {
            let edge = &graph.edges()[e.index()];
            let dj = dist[edge.head.index()];
            if dj < dist[i] {
                moves.push((edge.head, edge.cost + dj - dist[i]));
            }
        }
        if moves.is_empty() {
            continue;
        }
        let excess_min = moves.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
        let weights: Vec<f64> = moves
            .iter()
            .map(|&(_, x)| (-(x - excess_min) / lambda).exp())
            .collect();
        let total: f64 = weights.iter().sum();
        for (&(j, _), w) in moves.iter().zip(&weights) {
            entries.push((node, j, w / total));
        }
    }
    TransitionMatrix::from_triplets(graph.node_count(), entries)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChainIssue {
    TargetOutOfRange(NodeId),
    TargetRowNonzero,
    NegativeEntry {
        from: NodeId,
        to: NodeId,
        value: f64,
    },
    RowSumExceedsOne {
        node: NodeId,
        sum: f64,
    },
    /// Node with outgoing probability that can never reach the target.
    Trapped(NodeId),
}

impl fmt::Display for ChainIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChainIssue::TargetOutOfRange(t) => write!(f, "target {t} out of range"),
            ChainIssue::TargetRowNonzero => write!(f, "target row nonzero"),
            ChainIssue::NegativeEntry { from, to, value } => {
                write!(f, "negative entry {from}->{to}: {value}")
            }
            ChainIssue::RowSumExceedsOne { node, sum } => write!(f, "row {node} sums to {sum} > 1"),
            ChainIssue::Trapped(v) => {
                write!(
                    f,
                    "node {v} is neither a dead end nor able to reach the target"
                )
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ChainReport {
    pub row_sums: Vec<f64>,
    /// Nodes from which the target cannot be reached.
    pub unreachable: Vec<NodeId>,
    pub issues: Vec<ChainIssue>,
}

impl ChainReport {
    pub fn passed(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Checks the absorbing-chain conditions; never fails, the caller decides
/// what to do with the issues.
pub fn validate_chain(m: &TransitionMatrix, target: NodeId) -> ChainReport {
    let n = m.dim();
    let row_sums: Vec<f64> = (0..n).map(|i| m.row_sum(NodeId::from(i))).collect();
    let mut issues = Vec::new();
    if target.index() >= n {
        issues.push(ChainIssue::TargetOutOfRange(target));
        return ChainReport {
            row_sums,
            unreachable: (0..n).map(NodeId::from).collect(),
            issues,
        };
    }
    for t in m.triplets() {
        if t.p < 0.0 {
            issues.push(ChainIssue::NegativeEntry {
                from: t.from,
                to: t.to,
                value: t.p,
            });
        }
    }
    if m.row(target).next().is_some() {
        issues.push(ChainIssue::TargetRowNonzero);
    }
    for (i, &s) in row_sums.iter().enumerate() {
        if s > 1.0 + ROW_SUM_SLACK {
            issues.push(ChainIssue::RowSumExceedsOne {
                node: NodeId::from(i),
                sum: s,
            });
        }
    }
    let reach = m.reaches(target);
    let mut unreachable = Vec::new();
    for (i, &r) in reach.iter().enumerate() {
        if r {
            continue;
        }
        let node = NodeId::from(i);
        unreachable.push(node);
        if m.row(node).any(|(_, p)| p != 0.0) {
            issues.push(ChainIssue::Trapped(node));
        }
    }
    ChainReport {
        row_sums,
        unreachable,
        issues,
    }
}

/// Interdicted matrix: entries on selected edges are scaled by `1 - d`.
pub fn apply_interdiction(
    m: &TransitionMatrix,
    set: &InterdictionSet,
    graph: &Graph,
) -> Result<TransitionMatrix> {
    let mut factor = vec![1.0; m.nnz()];
    for &e in set.edges() {
        let edge = graph.edge(e)?;
        if let Some(pos) = m.position(edge.tail, edge.head) {
            factor[pos] = 1.0 - edge.efficiency;
        }
    }
    Ok(m.scaled(|pos, _, _| factor[pos]))
}

/// Total source mass on nodes that cannot reach `target`.
pub fn unreachable_mass(source: &[f64], m: &TransitionMatrix, target: NodeId) -> f64 {
    let reach = m.reaches(target);
    source
        .iter()
        .zip(&reach)
        .filter(|(_, &r)| !r)
        .map(|(a, _)| a)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(i: u32) -> NodeId {
        NodeId(i)
    }

    fn chain_graph(d: f64) -> Graph {
        Graph::new(3, [(0, 1, 1.0, d), (1, 2, 1.0, d)]).unwrap()
    }

    fn diamond(c_sb: f64) -> Graph {
        // s=0, a=1, b=2, t=3
        Graph::new(
            4,
            [
                (0, 1, 1.0, 1.0),
                (0, 2, c_sb, 1.0),
                (1, 3, 1.0, 1.0),
                (2, 3, 1.0, 1.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn chain_model_is_deterministic_path() {
        let m = build_evader_transition(&chain_graph(0.5), n(2), 3.0).unwrap();
        assert_eq!(m.get(n(0), n(1)), 1.0);
        assert_eq!(m.get(n(1), n(2)), 1.0);
        assert_eq!(m.row_sum(n(2)), 0.0);
    }

    #[test]
    fn diamond_large_lambda_is_uniform() {
        let m = build_evader_transition(&diamond(1.0), n(3), 1e9).unwrap();
        assert_eq!(m.get(n(0), n(1)), 0.5);
        assert_eq!(m.get(n(0), n(2)), 0.5);
    }

    #[test]
    fn diamond_softmax_over_excess_cost() {
        let m = build_evader_transition(&diamond(2.0), n(3), 1.0).unwrap();
        let expect = 1.0 / (1.0 + (-1.0f64).exp());
        assert!((m.get(n(0), n(1)) - expect).abs() < 1e-15);
        assert!((m.get(n(0), n(1)) - 0.7311).abs() < 1e-4);
        assert!((m.get(n(0), n(2)) - 0.2689).abs() < 1e-4);
        assert!((m.row_sum(n(0)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn model_rejects_bad_parameters() {
        let g = chain_graph(0.5);
        assert!(build_evader_transition(&g, n(7), 1.0).is_err());
        assert!(build_evader_transition(&g, n(2), 0.0).is_err());
        assert!(build_evader_transition(&g, n(2), -1.0).is_err());
        assert!(build_evader_transition(&g, n(2), f64::NAN).is_err());
    }

    #[test]
    fn model_never_retreats() {
        // 0 <-> 1 both directions; only moves toward 2 survive
        let g = Graph::new(
            3,
            [
                (0, 1, 1.0, 0.0),
                (1, 0, 1.0, 0.0),
                (1, 2, 1.0, 0.0),
                (0, 2, 3.0, 0.0),
            ],
        )
        .unwrap();
        let m = build_evader_transition(&g, n(2), 1.0).unwrap();
        assert_eq!(m.get(n(1), n(0)), 0.0);
        assert!(m.get(n(0), n(1)) > 0.0 && m.get(n(0), n(2)) > 0.0);
        assert!(validate_chain(&m, n(2)).passed());
    }

    #[test]
    fn validate_reports() {
        let m = build_evader_transition(&chain_graph(0.5), n(2), 1.0).unwrap();
        let r = validate_chain(&m, n(2));
        assert!(r.passed());
        assert!(r.unreachable.is_empty());

        // isolated node 3 with zero row
        let m = TransitionMatrix::from_triplets(4, [(n(0), n(1), 1.0), (n(1), n(2), 1.0)]).unwrap();
        let r = validate_chain(&m, n(2));
        assert!(r.passed());
        assert_eq!(r.unreachable, vec![n(3)]);

        let m = TransitionMatrix::from_triplets(
            3,
            [(n(0), n(1), 1.0), (n(1), n(2), 1.0), (n(2), n(2), 0.5)],
        )
        .unwrap();
        let r = validate_chain(&m, n(2));
        assert!(!r.passed());
        assert!(r
            .issues
            .iter()
            .any(|i| i.to_string() == "target row nonzero"));

        let m = TransitionMatrix::from_triplets(3, [(n(0), n(1), 0.7), (n(0), n(2), 0.6)]).unwrap();
        let r = validate_chain(&m, n(2));
        assert!(matches!(
            r.issues[..],
            [ChainIssue::RowSumExceedsOne { .. }]
        ));

        // 0 <-> 1 loop with no exit
        let m = TransitionMatrix::from_triplets(3, [(n(0), n(1), 0.5), (n(1), n(0), 0.5)]).unwrap();
        let r = validate_chain(&m, n(2));
        assert_eq!(r.issues.len(), 2);
    }

    #[test]
    fn interdiction_scales_selected_entries() {
        let g = chain_graph(0.5);
        let m = build_evader_transition(&g, n(2), 1.0).unwrap();
        assert_eq!(
            apply_interdiction(&m, &InterdictionSet::empty(), &g).unwrap(),
            m
        );
        let hat = apply_interdiction(&m, &InterdictionSet::new([0.into()]).unwrap(), &g).unwrap();
        assert_eq!(hat.get(n(0), n(1)), 0.5);
        assert_eq!(hat.get(n(1), n(2)), 1.0);
        let g1 = chain_graph(1.0);
        let hat = apply_interdiction(&m, &InterdictionSet::new([1.into()]).unwrap(), &g1).unwrap();
        assert_eq!(hat.get(n(1), n(2)), 0.0);
        assert!(apply_interdiction(&m, &InterdictionSet::new([9.into()]).unwrap(), &g).is_err());
    }

    #[test]
    fn unreachable_mass_counts_sources_without_route() {
        let m = TransitionMatrix::from_triplets(4, [(n(0), n(1), 1.0), (n(1), n(2), 1.0)]).unwrap();
        assert_eq!(unreachable_mass(&[1.0, 0.0, 0.0, 0.0], &m, n(2)), 0.0);
        assert_eq!(unreachable_mass(&[0.75, 0.0, 0.0, 0.25], &m, n(2)), 0.25);
        // two components: {0,1,2} reach 2, node 3 does not
        assert_eq!(unreachable_mass(&[0.25; 4], &m, n(2)), 0.25);
    }

    #[test]
    fn lossless_nodes() {
        // 0 -> 1 -> 3 (target), 0 -> 2 leaks half its mass
        let m = TransitionMatrix::from_triplets(
            4,
            [
                (n(0), n(1), 0.5),
                (n(0), n(2), 0.5),
                (n(1), n(3), 1.0),
                (n(2), n(3), 0.5),
            ],
        )
        .unwrap();
        assert_eq!(m.lossless(n(3)), vec![false, true, false, true]);
    }

    #[test]
    fn duplicate_triplets_rejected() {
        assert!(
            TransitionMatrix::from_triplets(2, [(n(0), n(1), 0.5), (n(0), n(1), 0.5)]).is_err()
        );
        assert!(TransitionMatrix::from_triplets(2, [(n(0), n(2), 0.5)]).is_err());
    }
}
