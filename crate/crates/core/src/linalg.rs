//! Expected-visit solves `pi (I - M) = a` without forming the fundamental
//! matrix.
//!
//! The support of `M` is split into strongly connected components and
//! processed in topological order. Acyclic parts reduce to forward
//! substitution; each cyclic component is a small dense LU solve. The plan
//! depends only on the sparsity pattern, so it is built once per evader and
//! reused for every interdicted variant of the matrix.

use std::ops::Deref;

use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::{Deserialize, Serialize};

use crate::chain::TransitionMatrix;
use crate::error::{Result, UmeError};
use crate::graph::NodeId;

/// Default residual tolerance for a solve.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
/// Residuals above this are refused outright.
pub const REFUSE_RESIDUAL: f64 = 1e-6;

/// Expected number of visits to each node before absorption.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VisitVector(pub Vec<f64>);

impl Deref for VisitVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone)]
enum Block {
    Single(u32),
    Dense(Vec<u32>),
}

/// Reusable elimination schedule for one sparsity pattern.
#[derive(Debug, Clone)]
pub struct SolvePlan {
    n: usize,
    // incoming entries grouped by head: (tail, storage position in M)
    col_ptr: Vec<usize>,
    in_src: Vec<u32>,
    in_pos: Vec<u32>,
    blocks: Vec<Block>,
    block_of: Vec<u32>,
    local: Vec<u32>,
}

impl SolvePlan {
    pub fn new(m: &TransitionMatrix) -> Self {
        let n = m.dim();
        let mut counts = vec![0usize; n + 1];
        for i in 0..n {
            for pos in m.row_range(i) {
                counts[m.col_at(pos).index() + 1] += 1;
            }
        }
        for j in 0..n {
            counts[j + 1] += counts[j];
        }
        let col_ptr = counts.clone();
        let mut fill = counts;
        let mut in_src = vec![0u32; m.nnz()];
        let mut in_pos = vec![0u32; m.nnz()];
        let mut dag = DiGraph::<(), ()>::with_capacity(n, m.nnz());
        for _ in 0..n {
            dag.add_node(());
        }
        for i in 0..n {
            for pos in m.row_range(i) {
                let j = m.col_at(pos).index();
                in_src[fill[j]] = i as u32;
                in_pos[fill[j]] = pos as u32;
                fill[j] += 1;
                dag.add_edge(NodeIndex::new(i), NodeIndex::new(j), ());
            }
        }

        // tarjan_scc yields components in reverse topological order
        let mut sccs = tarjan_scc(&dag);
        sccs.reverse();
        let mut blocks = Vec::with_capacity(sccs.len());
        let mut block_of = vec![0u32; n];
        let mut local = vec![0u32; n];
        for (b, mut comp) in sccs.into_iter().enumerate() {
            comp.sort();
            for (k, v) in comp.iter().enumerate() {
                block_of[v.index()] = b as u32;
                local[v.index()] = k as u32;
            }
            if comp.len() == 1 {
                blocks.push(Block::Single(comp[0].index() as u32));
            } else {
                blocks.push(Block::Dense(
                    comp.iter().map(|v| v.index() as u32).collect(),
                ));
            }
        }
        SolvePlan {
            n,
            col_ptr,
            in_src,
            in_pos,
            blocks,
            block_of,
            local,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// True when the support has no cycles, so every node is visited at most
    /// once per realization.
    pub fn is_acyclic(&self) -> bool {
        self.blocks.iter().all(|b| matches!(b, Block::Single(_)))
    }

    /// True when the arc `tail -> head` lies inside a cyclic component.
    pub fn on_cycle(&self, tail: NodeId, head: NodeId) -> bool {
        let b = self.block_of[tail.index()];
        b == self.block_of[head.index()] && matches!(self.blocks[b as usize], Block::Dense(_))
    }

    /// Solves `pi (I - M') = a` where `M'` stores `m.value * scale(pos)` at
    /// each storage position of `m`.
    pub fn solve<F>(
        &self,
        m: &TransitionMatrix,
        source: &[f64],
        scale: F,
        tolerance: f64,
    ) -> Result<VisitVector>
    where
        F: Fn(usize) -> f64,
    {
        if source.len() != self.n || m.dim() != self.n {
            return Err(UmeError::InvalidParameter(format!(
                "dimension mismatch: plan {}, matrix {}, source {}",
                self.n,
                m.dim(),
                source.len()
            )));
        }
        let vals = m.values();
        let entry = |k: usize| {
            let pos = self.in_pos[k] as usize;
            vals[pos] * scale(pos)
        };
        let mut pi = vec![0.0; self.n];
        for (b, block) in self.blocks.iter().enumerate() {
            match block {
                Block::Single(j) => {
                    let j = *j as usize;
                    let mut acc = source[j];
                    let mut diag = 0.0;
                    for k in self.col_ptr[j]..self.col_ptr[j + 1] {
                        let i = self.in_src[k] as usize;
                        if i == j {
                            diag += entry(k);
                        } else {
                            acc += pi[i] * entry(k);
                        }
                    }
                    let pivot = 1.0 - diag;
                    if pivot.abs() <= tolerance {
                        return Err(UmeError::NonAbsorbing(format!("node {j} retains its mass")));
                    }
                    pi[j] = acc / pivot;
                }
                Block::Dense(nodes) => {
                    let size = nodes.len();
                    let mut a = DMatrix::<f64>::identity(size, size);
                    let mut rhs = DVector::<f64>::zeros(size);
                    for (row, &j) in nodes.iter().enumerate() {
                        let j = j as usize;
                        rhs[row] = source[j];
                        for k in self.col_ptr[j]..self.col_ptr[j + 1] {
                            let i = self.in_src[k] as usize;
                            if self.block_of[i] as usize == b {
                                a[(row, self.local[i] as usize)] -= entry(k);
                            } else {
                                rhs[row] += pi[i] * entry(k);
                            }
                        }
                    }
                    let x = solve_dense(&a, &rhs, tolerance)?;
                    for (row, &j) in nodes.iter().enumerate() {
                        pi[j as usize] = x[row];
                    }
                }
            }
        }
        Ok(VisitVector(pi))
    }
}

fn solve_dense(a: &DMatrix<f64>, rhs: &DVector<f64>, tolerance: f64) -> Result<DVector<f64>> {
    let lu = a.clone().lu();
    let u = lu.u();
    let (lo, hi) = u
        .diagonal()
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), p| {
            (lo.min(p.abs()), hi.max(p.abs()))
        });
    if !(lo > 0.0) || hi / lo > 1.0 / tolerance {
        return Err(UmeError::NonAbsorbing(format!(
            "system is singular or ill-conditioned (pivot ratio {:e})",
            hi / lo
        )));
    }
    let mut x = lu
        .solve(rhs)
        .ok_or_else(|| UmeError::NonAbsorbing("singular block".into()))?;
    let scale = rhs.amax().max(1.0);
    let mut residual = rhs - a * &x;
    if residual.amax() > tolerance * scale {
        if let Some(dx) = lu.solve(&residual) {
            x += dx;
            residual = rhs - a * &x;
        }
    }
    if residual.amax() > REFUSE_RESIDUAL * scale {
        return Err(UmeError::NonAbsorbing(format!(
            "residual {:e} after refinement",
            residual.amax()
        )));
    }
    Ok(x)
}

/// Expected visits `pi = a (I - M)^{-1}` for a single matrix.
pub fn expected_visits(
    source: &[f64],
    m: &TransitionMatrix,
    tolerance: f64,
) -> Result<VisitVector> {
    SolvePlan::new(m).solve(m, source, |_| 1.0, tolerance)
}
