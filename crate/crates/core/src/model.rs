//! Evaders, interdiction sets, problem instances and objective evaluation.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::chain::{self, validate_chain, TransitionMatrix};
use crate::error::{Result, UmeError};
use crate::graph::{EdgeId, Graph, NodeId};
use crate::linalg::{SolvePlan, VisitVector, DEFAULT_TOLERANCE};

/// Tolerance on probability-vector and weight sums.
pub const SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct EvaderSpec {
    pub weight: f64,
    /// Source distribution, one entry per node.
    pub source: Vec<f64>,
    pub target: NodeId,
    pub matrix: TransitionMatrix,
    /// Rate parameter when `matrix` came from the progress model; kept so
    /// the instance file can record the model instead of the matrix.
    pub lambda: Option<f64>,
}

impl EvaderSpec {
    pub fn new(weight: f64, source: Vec<f64>, target: NodeId, matrix: TransitionMatrix) -> Self {
        EvaderSpec {
            weight,
            source,
            target,
            matrix,
            lambda: None,
        }
    }

    /// Evader whose chain is the progress model with rate `lambda`.
    pub fn from_model(
        graph: &Graph,
        weight: f64,
        source: Vec<f64>,
        target: NodeId,
        lambda: f64,
    ) -> Result<Self> {
        let matrix = chain::build_evader_transition(graph, target, lambda)?;
        Ok(EvaderSpec {
            weight,
            source,
            target,
            matrix,
            lambda: Some(lambda),
        })
    }

    /// Point-mass source at `node`.
    pub fn point_source(n: usize, node: NodeId) -> Vec<f64> {
        let mut a = vec![0.0; n];
        a[node.index()] = 1.0;
        a
    }

    pub fn unreachable_mass(&self) -> f64 {
        chain::unreachable_mass(&self.source, &self.matrix, self.target)
    }

    pub fn validate(&self, graph: &Graph, index: usize) -> Result<()> {
        let bad = |reason: String| UmeError::InvalidEvader { index, reason };
        let n = graph.node_count();
        if !(self.weight > 0.0 && self.weight <= 1.0) {
            return Err(bad(format!("weight {} outside (0,1]", self.weight)));
        }
        if self.source.len() != n {
            return Err(bad(format!(
                "source has {} entries for {n} nodes",
                self.source.len()
            )));
        }
        if self.source.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(bad("source has a negative or non-finite entry".into()));
        }
        let total: f64 = self.source.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(bad(format!("source sums to {total}")));
        }
        if !graph.contains_node(self.target) {
            return Err(bad(format!("target {} does not exist", self.target)));
        }
        if self.matrix.dim() != n {
            return Err(bad(format!(
                "matrix dimension {} for {n} nodes",
                self.matrix.dim()
            )));
        }
        for t in self.matrix.triplets() {
            if graph.find_edge(t.from, t.to).is_none() {
                return Err(bad(format!("transition {}->{} has no edge", t.from, t.to)));
            }
        }
        let report = validate_chain(&self.matrix, self.target);
        if let Some(issue) = report.issues.first() {
            return Err(bad(issue.to_string()));
        }
        Ok(())
    }
}

/// Edges chosen for interdiction, in selection order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InterdictionSet {
    edges: Vec<EdgeId>,
}

impl InterdictionSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(edges: impl IntoIterator<Item = EdgeId>) -> Result<Self> {
        let mut set = Self::empty();
        for e in edges {
            set.insert(e)?;
        }
        Ok(set)
    }

    pub fn insert(&mut self, e: EdgeId) -> Result<()> {
        if self.contains(e) {
            return Err(UmeError::Precondition(format!(
                "edge {e} already interdicted"
            )));
        }
        self.edges.push(e);
        Ok(())
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.edges.contains(&e)
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Indicator vector `r` over `edge_count` edges.
    pub fn indicator(&self, edge_count: usize) -> Vec<bool> {
        let mut r = vec![false; edge_count];
        for e in &self.edges {
            if e.index() < edge_count {
                r[e.index()] = true;
            }
        }
        r
    }

    pub fn from_indicator(r: &[bool]) -> Self {
        InterdictionSet {
            edges: r
                .iter()
                .enumerate()
                .filter(|(_, &x)| x)
                .map(|(k, _)| EdgeId::from(k))
                .collect(),
        }
    }

    pub fn check_against(&self, graph: &Graph) -> Result<()> {
        match self.edges.iter().find(|e| e.index() >= graph.edge_count()) {
            Some(&e) => Err(UmeError::MissingEdge(e)),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub graph: Graph,
    pub evaders: Vec<EvaderSpec>,
    pub budget: usize,
    pub tolerance: f64,
}

impl ProblemInstance {
    pub fn new(graph: Graph, evaders: Vec<EvaderSpec>, budget: usize) -> Result<Self> {
        let p = ProblemInstance {
            graph,
            evaders,
            budget,
            tolerance: DEFAULT_TOLERANCE,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_budget(&self, budget: usize) -> Result<Self> {
        let mut p = self.clone();
        p.budget = budget;
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.budget > self.graph.edge_count() {
            return Err(UmeError::InvalidProblem(format!(
                "budget {} exceeds edge count {}",
                self.budget,
                self.graph.edge_count()
            )));
        }
        if self.evaders.is_empty() {
            return Err(UmeError::InvalidProblem("no evaders".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(UmeError::InvalidProblem(format!(
                "tolerance {} must be positive",
                self.tolerance
            )));
        }
        for (k, ev) in self.evaders.iter().enumerate() {
            ev.validate(&self.graph, k)?;
        }
        let total: f64 = self.evaders.iter().map(|e| e.weight).sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(UmeError::InvalidProblem(format!(
                "evader weights sum to {total}"
            )));
        }
        Ok(())
    }

    /// `sum_k w_k * (source mass that cannot reach t_k)`.
    pub fn unreachable_mass(&self) -> f64 {
        self.evaders
            .iter()
            .map(|e| e.weight * e.unreachable_mass())
            .sum()
    }
}

struct EvaderPlan {
    plan: SolvePlan,
    /// Edge behind each stored matrix entry.
    edge_at: Vec<EdgeId>,
    lossless: Vec<bool>,
}

/// Objective evaluator with cached elimination plans and a shared tally of
/// per-evader linear solves.
pub struct Evaluator<'p> {
    problem: &'p ProblemInstance,
    plans: Vec<EvaderPlan>,
    solves: AtomicU64,
}

impl<'p> Evaluator<'p> {
    pub fn new(problem: &'p ProblemInstance) -> Result<Self> {
        let graph = &problem.graph;
        let plans = problem
            .evaders
            .iter()
            .map(|ev| {
                let mut edge_at = Vec::with_capacity(ev.matrix.nnz());
                for t in ev.matrix.triplets() {
                    edge_at.push(graph.find_edge(t.from, t.to).ok_or(UmeError::NoSuchArc {
                        tail: t.from,
                        head: t.to,
                    })?);
                }
                Ok(EvaderPlan {
                    plan: SolvePlan::new(&ev.matrix),
                    edge_at,
                    lossless: ev.matrix.lossless(ev.target),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Evaluator {
            problem,
            plans,
            solves: AtomicU64::new(0),
        })
    }

    pub fn problem(&self) -> &'p ProblemInstance {
        self.problem
    }

    /// Per-evader linear solves performed so far.
    pub fn evaluations(&self) -> u64 {
        self.solves.load(Ordering::Relaxed)
    }

    /// Multiplier `1 - d_e r_e` for every edge.
    pub fn factors(&self, set: &InterdictionSet) -> Vec<f64> {
        let mut f = vec![1.0; self.problem.graph.edge_count()];
        for &e in set.edges() {
            f[e.index()] = 1.0 - self.problem.graph.edges()[e.index()].efficiency;
        }
        f
    }

    /// True if edge `tail -> head` is traversed at most once per realization
    /// for every evader.
    pub fn edge_is_non_retreating(&self, e: EdgeId) -> bool {
        let edge = &self.problem.graph.edges()[e.index()];
        self.plans
            .iter()
            .all(|p| !p.plan.on_cycle(edge.tail, edge.head))
    }

    /// True if, for every evader using edge `e`, the edge is non-retreating
    /// and the walk from its head always reaches the target. Then removing
    /// mass on `e` removes exactly that much arrival probability.
    pub fn first_gain_is_exact(&self, e: EdgeId) -> bool {
        let edge = &self.problem.graph.edges()[e.index()];
        self.plans.iter().zip(&self.problem.evaders).all(|(p, ev)| {
            ev.matrix.get(edge.tail, edge.head) == 0.0
                || (!p.plan.on_cycle(edge.tail, edge.head) && p.lossless[edge.head.index()])
        })
    }

    pub fn all_acyclic(&self) -> bool {
        self.plans.iter().all(|p| p.plan.is_acyclic())
    }

    fn solve<F: Fn(usize) -> f64>(
        &self,
        k: usize,
        factor: &F,
        counted: bool,
    ) -> Result<VisitVector> {
        let ev = &self.problem.evaders[k];
        let plan = &self.plans[k];
        if counted {
            self.solves.fetch_add(1, Ordering::Relaxed);
        }
        plan.plan.solve(
            &ev.matrix,
            &ev.source,
            |pos| factor(plan.edge_at[pos].index()),
            self.problem.tolerance,
        )
    }

    /// Expected visits for evader `k` on the uninterdicted chain; counted.
    pub fn visits(&self, k: usize) -> Result<VisitVector> {
        self.solve(k, &|_| 1.0, true)
    }

    fn capture<F: Fn(usize) -> f64>(&self, k: usize, factor: &F, counted: bool) -> Result<f64> {
        let pi = self.solve(k, factor, counted)?;
        capture_probability(&pi, self.problem.evaders[k].target, self.problem.tolerance)
    }

    /// Weighted interdiction probability when edge `e` carries the
    /// multiplier `factor(e)`; counts one solve per evader.
    pub fn objective_with<F: Fn(usize) -> f64>(&self, factor: F) -> Result<f64> {
        self.weighted(&factor, true)
    }

    /// Objective of `base` plus one more interdicted edge; counted.
    pub fn objective_adding(&self, base: &[f64], extra: EdgeId) -> Result<f64> {
        let x = extra.index();
        let fx = 1.0 - self.problem.graph.edges()[x].efficiency;
        self.weighted(&|e: usize| if e == x { fx } else { base[e] }, true)
    }

    pub fn objective(&self, set: &InterdictionSet) -> Result<f64> {
        set.check_against(&self.problem.graph)?;
        let f = self.factors(set);
        self.weighted(&|e: usize| f[e], true)
    }

    /// Same value as [`Evaluator::objective`] without touching the tally.
    pub fn objective_uncounted(&self, set: &InterdictionSet) -> Result<f64> {
        set.check_against(&self.problem.graph)?;
        let f = self.factors(set);
        self.weighted(&|e: usize| f[e], false)
    }

    /// `J^(k)` for a single evader; counted.
    pub fn evader_objective(&self, k: usize, set: &InterdictionSet) -> Result<f64> {
        set.check_against(&self.problem.graph)?;
        let f = self.factors(set);
        self.capture(k, &|e: usize| f[e], true)
    }

    fn weighted<F: Fn(usize) -> f64>(&self, factor: &F, counted: bool) -> Result<f64> {
        let mut total = 0.0;
        for (k, ev) in self.problem.evaders.iter().enumerate() {
            total += ev.weight * self.capture(k, factor, counted)?;
        }
        Ok(total)
    }
}

fn capture_probability(pi: &[f64], target: NodeId, tolerance: f64) -> Result<f64> {
    let j = 1.0 - pi[target.index()];
    if !j.is_finite() || j < -tolerance || j > 1.0 + tolerance {
        return Err(UmeError::Numerical(format!(
            "interdiction probability {j} outside [0,1]"
        )));
    }
    Ok(j.clamp(0.0, 1.0))
}

/// `J^(k)(S) = 1 - pi_t` for one evader under interdiction set `set`.
pub fn evader_objective(
    evader: &EvaderSpec,
    set: &InterdictionSet,
    graph: &Graph,
    tolerance: f64,
) -> Result<f64> {
    let hat = chain::apply_interdiction(&evader.matrix, set, graph)?;
    let pi = crate::linalg::expected_visits(&evader.source, &hat, tolerance)?;
    capture_probability(&pi, evader.target, tolerance)
}

/// Weighted objective `J(S) = sum_k w_k J^(k)(S)`.
pub fn objective(problem: &ProblemInstance, set: &InterdictionSet) -> Result<f64> {
    Evaluator::new(problem)?.objective(set)
}
