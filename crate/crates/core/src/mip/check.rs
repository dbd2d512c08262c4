use serde::{Deserialize, Serialize};

use super::{build_mip, Layout, MipOptions, Sense};
use crate::chain::apply_interdiction;
use crate::error::{Result, UmeError};
use crate::linalg::expected_visits;
use crate::model::{Evaluator, InterdictionSet, ProblemInstance};

/// Required agreement of `H` and `1 - J`.
pub const H_J_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: String,
    pub lhs: f64,
    pub rhs: f64,
    /// How far the row is on the wrong side.
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MipCheck {
    /// MIP objective at the constructed point.
    pub h: f64,
    /// Objective of the interdiction problem for the same set.
    pub j: f64,
    pub violations: Vec<Violation>,
    /// Full variable assignment, indexed like [`super::MipModel::variables`].
    pub point: Vec<f64>,
}

impl MipCheck {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Builds `(r, pi, theta)` for the indicator `r`, evaluates every exported
/// row and bound against it and compares `H` with `1 - J`.
pub fn check_mip_solution(
    problem: &ProblemInstance,
    r: &[bool],
    tolerance: f64,
    options: MipOptions,
) -> Result<MipCheck> {
    let g = &problem.graph;
    if r.len() != g.edge_count() {
        return Err(UmeError::Precondition(format!(
            "indicator has {} entries for {} edges",
            r.len(),
            g.edge_count()
        )));
    }
    let chosen = r.iter().filter(|&&x| x).count();
    let budget_ok = if options.budget_at_most {
        chosen <= problem.budget
    } else {
        chosen == problem.budget
    };
    if !budget_ok {
        return Err(UmeError::Precondition(format!(
            "indicator selects {chosen} edges, budget is {}",
            problem.budget
        )));
    }

    let model = build_mip(problem, options);
    let layout = Layout {
        nodes: g.node_count(),
        edges: g.edge_count(),
    };
    let set = InterdictionSet::from_indicator(r);
    let mut point = vec![0.0; model.variables.len()];
    for (e, &on) in r.iter().enumerate() {
        point[layout.r(e)] = if on { 1.0 } else { 0.0 };
    }
    for (k, ev) in problem.evaders.iter().enumerate() {
        let interdicted = apply_interdiction(&ev.matrix, &set, g)?;
        let pi = expected_visits(&ev.source, &interdicted, problem.tolerance)?;
        for (i, &v) in pi.iter().enumerate() {
            point[layout.pi(k, i)] = v;
        }
        for edge in g.edges() {
            let e = edge.id.index();
            let m = ev.matrix.get(edge.tail, edge.head);
            let pj = pi[edge.tail.index()];
            let rr = point[layout.r(e)];
            point[layout.th(k, e)] =
                (m * pj - m * edge.efficiency * rr).max(m * (1.0 - edge.efficiency) * pj);
        }
    }

    let mut violations = Vec::new();
    for c in &model.constraints {
        let lhs: f64 = c.terms.iter().map(|&(v, a)| a * point[v]).sum();
        let excess = match c.sense {
            Sense::Le => lhs - c.rhs,
            Sense::Ge => c.rhs - lhs,
            Sense::Eq => (lhs - c.rhs).abs(),
        };
        if excess > tolerance {
            violations.push(Violation {
                constraint: c.name.clone(),
                lhs,
                rhs: c.rhs,
                excess,
            });
        }
    }
    for (v, var) in model.variables.iter().enumerate() {
        if point[v] < -tolerance {
            violations.push(Violation {
                constraint: format!("{} >= 0", var.name),
                lhs: point[v],
                rhs: 0.0,
                excess: -point[v],
            });
        }
        if let Some(u) = var.upper {
            if point[v] > u + tolerance {
                violations.push(Violation {
                    constraint: format!("{} <= {u}", var.name),
                    lhs: point[v],
                    rhs: u,
                    excess: point[v] - u,
                });
            }
        }
    }

    let h = model.objective_value(&point);
    let j = Evaluator::new(problem)?.objective_uncounted(&set)?;
    let gap = (h - (1.0 - j)).abs();
    if gap > H_J_TOLERANCE {
        violations.push(Violation {
            constraint: "H = 1 - J".into(),
            lhs: h,
            rhs: 1.0 - j,
            excess: gap,
        });
    }
    Ok(MipCheck {
        h,
        j,
        violations,
        point,
    })
}
