//! Mixed-integer program for the interdiction problem, in CPLEX LP text.
//!
//! The program minimizes `H = sum_k w_k pi^(k)_{t_k}`, the weighted
//! probability that evaders reach their targets (`H = 1 - J`). For every
//! evader `k`, node `i` and edge `e = (j,i)`:
//!
//! ```text
//! flow:  pi_i - sum_{(j,i)} th_e = a_i
//! dom_a: th_e >= M_ji pi_j - M_ji d_e r_e
//! dom_b: th_e >= M_ji (1 - d_e) pi_j
//! budget: sum_e r_e = B
//! ```
//!
//! Variables are named `r_e{edge}`, `pi_k{evader}_n{node}` and
//! `th_k{evader}_e{edge}`; output order is fixed so files are byte-stable.

mod check;
mod parse;

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::model::ProblemInstance;

pub use check::{check_mip_solution, MipCheck};
pub use parse::parse_lp;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MipOptions {
    /// Write the budget row as `<= B` instead of `= B`.
    pub budget_at_most: bool,
    /// Add `pi <= 1` bounds. Only valid for chains without revisits.
    pub pi_upper_bound: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MipModel {
    pub variables: Vec<Variable>,
    /// Minimized.
    pub objective: Vec<(usize, f64)>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelSize {
    pub binaries: usize,
    pub pi: usize,
    pub theta: usize,
    pub flow: usize,
    pub dominance: usize,
    pub budget: usize,
}

pub(crate) fn r_name(e: usize) -> String {
    format!("r_e{e}")
}

pub(crate) fn pi_name(k: usize, i: usize) -> String {
    format!("pi_k{k}_n{i}")
}

pub(crate) fn th_name(k: usize, e: usize) -> String {
    format!("th_k{k}_e{e}")
}

/// Index layout of the variables built by [`build_mip`].
#[derive(Debug, Clone, Copy)]
pub(crate) struct Layout {
    pub nodes: usize,
    pub edges: usize,
}

impl Layout {
    pub fn r(&self, e: usize) -> usize {
        e
    }
    pub fn pi(&self, k: usize, i: usize) -> usize {
        self.edges + k * (self.nodes + self.edges) + i
    }
    pub fn th(&self, k: usize, e: usize) -> usize {
        self.edges + k * (self.nodes + self.edges) + self.nodes + e
    }
}

pub fn build_mip(problem: &ProblemInstance, options: MipOptions) -> MipModel {
    let g = &problem.graph;
    let layout = Layout {
        nodes: g.node_count(),
        edges: g.edge_count(),
    };
    let mut variables =
        Vec::with_capacity(layout.edges + problem.evaders.len() * (layout.nodes + layout.edges));
    for e in 0..layout.edges {
        variables.push(Variable {
            name: r_name(e),
            kind: VarKind::Binary,
            upper: None,
        });
    }
    for k in 0..problem.evaders.len() {
        let upper = options.pi_upper_bound.then_some(1.0);
        for i in 0..layout.nodes {
            variables.push(Variable {
                name: pi_name(k, i),
                kind: VarKind::Continuous,
                upper,
            });
        }
        for e in 0..layout.edges {
            variables.push(Variable {
                name: th_name(k, e),
                kind: VarKind::Continuous,
                upper: None,
            });
        }
    }

    let objective = problem
        .evaders
        .iter()
        .enumerate()
        .map(|(k, ev)| (layout.pi(k, ev.target.index()), ev.weight))
        .collect();

    let nonzero =
        |terms: Vec<(usize, f64)>| terms.into_iter().filter(|t| t.1 != 0.0).collect::<Vec<_>>();
    let mut constraints = Vec::new();
    for (k, ev) in problem.evaders.iter().enumerate() {
        for i in 0..layout.nodes {
            let mut terms = vec![(layout.pi(k, i), 1.0)];
            terms.extend(
                g.in_edges(i.into())
                    .iter()
                    .map(|e| (layout.th(k, e.index()), -1.0)),
            );
            constraints.push(Constraint {
                name: format!("flow_k{k}_n{i}"),
                terms,
                sense: Sense::Eq,
                rhs: ev.source[i],
            });
        }
        for edge in g.edges() {
            let e = edge.id.index();
            let m = ev.matrix.get(edge.tail, edge.head);
            let d = edge.efficiency;
            let th = (layout.th(k, e), 1.0);
            let pi_j = layout.pi(k, edge.tail.index());
            constraints.push(Constraint {
                name: format!("dom_a_k{k}_e{e}"),
                terms: nonzero(vec![th, (pi_j, -m), (layout.r(e), m * d)]),
                sense: Sense::Ge,
                rhs: 0.0,
            });
            constraints.push(Constraint {
                name: format!("dom_b_k{k}_e{e}"),
                terms: nonzero(vec![th, (pi_j, -(m * (1.0 - d)))]),
                sense: Sense::Ge,
                rhs: 0.0,
            });
        }
    }
    constraints.push(Constraint {
        name: "budget".into(),
        terms: (0..layout.edges).map(|e| (layout.r(e), 1.0)).collect(),
        sense: if options.budget_at_most {
            Sense::Le
        } else {
            Sense::Eq
        },
        rhs: problem.budget as f64,
    });
    MipModel {
        variables,
        objective,
        constraints,
    }
}

impl MipModel {
    pub fn size(&self) -> ModelSize {
        let count_vars = |p: &str| {
            self.variables
                .iter()
                .filter(|v| v.name.starts_with(p))
                .count()
        };
        let count_rows = |p: &str| {
            self.constraints
                .iter()
                .filter(|c| c.name.starts_with(p))
                .count()
        };
        ModelSize {
            binaries: self
                .variables
                .iter()
                .filter(|v| v.kind == VarKind::Binary)
                .count(),
            pi: count_vars("pi_"),
            theta: count_vars("th_"),
            flow: count_rows("flow_"),
            dominance: count_rows("dom_"),
            budget: count_rows("budget"),
        }
    }

    /// Value of the objective at `point` (indexed like `variables`).
    pub fn objective_value(&self, point: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, c)| c * point[v]).sum()
    }

    pub fn to_lp(&self) -> String {
        let mut out = String::new();
        out.push_str("\\ interdiction MIP: minimize weighted arrival probability H = 1 - J\n");
        out.push_str("Minimize\n");
        write_row(&mut out, "obj", &self.objective, &self.variables);
        out.push('\n');
        out.push_str("Subject To\n");
        for c in &self.constraints {
            write_row(&mut out, &c.name, &c.terms, &self.variables);
            let _ = writeln!(out, " {} {}", c.sense.symbol(), c.rhs);
        }
        let bounded: Vec<&Variable> = self
            .variables
            .iter()
            .filter(|v| v.upper.is_some())
            .collect();
        if !bounded.is_empty() {
            out.push_str("Bounds\n");
            for v in bounded {
                let _ = writeln!(out, " {} <= {}", v.name, v.upper.unwrap_or(f64::INFINITY));
            }
        }
        let binaries: Vec<&str> = self
            .variables
            .iter()
            .filter(|v| v.kind == VarKind::Binary)
            .map(|v| v.name.as_str())
            .collect();
        if !binaries.is_empty() {
            out.push_str("Binaries\n");
            for chunk in binaries.chunks(10) {
                let _ = writeln!(out, " {}", chunk.join(" "));
            }
        }
        out.push_str("End\n");
        out
    }

    /// Name-keyed view used to compare models independent of variable order.
    pub fn canonical(&self) -> CanonicalModel {
        let named = |terms: &[(usize, f64)]| -> BTreeMap<String, f64> {
            let mut m = BTreeMap::new();
            for &(v, c) in terms {
                *m.entry(self.variables[v].name.clone()).or_insert(0.0) += c;
            }
            m
        };
        CanonicalModel {
            variables: self
                .variables
                .iter()
                .map(|v| (v.name.clone(), (v.kind, v.upper)))
                .collect(),
            objective: named(&self.objective),
            constraints: self
                .constraints
                .iter()
                .map(|c| (c.name.clone(), named(&c.terms), c.sense, c.rhs))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalModel {
    pub variables: BTreeMap<String, (VarKind, Option<f64>)>,
    pub objective: BTreeMap<String, f64>,
    pub constraints: Vec<(String, BTreeMap<String, f64>, Sense, f64)>,
}

const TERMS_PER_LINE: usize = 6;

fn write_row(out: &mut String, name: &str, terms: &[(usize, f64)], vars: &[Variable]) {
    let _ = write!(out, " {name}:");
    for (n, &(v, c)) in terms.iter().enumerate() {
        if n > 0 && n % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if c < 0.0 {
            "-"
        } else if n == 0 {
            ""
        } else {
            "+"
        };
        if sign.is_empty() {
            let _ = write!(out, " {} {}", c.abs(), vars[v].name);
        } else {
            let _ = write!(out, " {sign} {} {}", c.abs(), vars[v].name);
        }
    }
}

/// LP text for `problem`.
pub fn export_mip(problem: &ProblemInstance, options: MipOptions) -> String {
    build_mip(problem, options).to_lp()
}
