//! Benchmark suites over generated instances.
//!
//! Record CSV columns, in order:
//!
//! | column | meaning |
//! |---|---|
//! | `suite` | `protocol`, `budget`, `theta` or `grid` |
//! | `point` | sweep value: budget, GTG threshold or grid side; protocol uses the budget |
//! | `instance` | instance id within the sweep point |
//! | `seed` | generator seed |
//! | `solver` | `greedy` or `priority` |
//! | `budget` | `B` |
//! | `nodes`, `edges`, `evaders` | `|N|`, `|E|`, `|K|` |
//! | `objective` | `J` of the returned set |
//! | `eval_count` | per-evader linear solves |
//! | `wall_time` | seconds |
//! | `error` | failure message, empty on success |

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use ume_core::benchgen::{
    grid_generate, gtg_generate, make_instance, GridConfig, GtgConfig, GTG_WEIGHT_SCALE,
};
use ume_core::solvers::GreedyOptions;
use ume_core::{greedy_solve, priority_greedy_solve, Graph, ProblemInstance, Result, Solution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    pub suite: String,
    pub point: f64,
    pub instance: usize,
    pub seed: u64,
    pub solver: String,
    pub budget: usize,
    pub nodes: usize,
    pub edges: usize,
    pub evaders: usize,
    pub objective: f64,
    pub eval_count: u64,
    pub wall_time: f64,
    pub error: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverKind {
    Greedy,
    Priority,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Greedy => "greedy",
            SolverKind::Priority => "priority",
        }
    }

    pub fn run(self, problem: &ProblemInstance) -> Result<Solution> {
        match self {
            SolverKind::Greedy => greedy_solve(problem, GreedyOptions::default()),
            SolverKind::Priority => priority_greedy_solve(problem, GreedyOptions::default()),
        }
    }
}

/// Shared suite settings. Defaults follow the reference protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub instances: usize,
    pub base_seed: u64,
    pub nodes: usize,
    pub theta: f64,
    pub alpha: f64,
    pub weight_scale: f64,
    pub lambdas: Vec<f64>,
    pub d: f64,
    pub budget: usize,
    pub budgets: Vec<usize>,
    pub thetas: Vec<f64>,
    pub grid_sides: Vec<usize>,
    pub grid_extra: usize,
    pub solvers: Vec<SolverKind>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            instances: 50,
            base_seed: 0,
            nodes: 100,
            theta: 30.0,
            alpha: 2.0,
            weight_scale: GTG_WEIGHT_SCALE,
            lambdas: vec![0.1, 1000.0],
            d: 0.5,
            budget: 10,
            budgets: (1..=10).collect(),
            thetas: vec![50.0, 45.0, 40.0, 35.0, 30.0, 25.0, 20.0],
            grid_sides: vec![8, 10, 12, 14, 16],
            grid_extra: 2,
            solvers: vec![SolverKind::Greedy, SolverKind::Priority],
        }
    }
}

/// Instance `i` of a sweep point; graph and instance share the seed.
#[derive(Debug, Clone)]
pub struct Job {
    pub suite: &'static str,
    pub point: f64,
    pub instance: usize,
    pub seed: u64,
    pub problem: std::result::Result<ProblemInstance, String>,
}

impl SuiteConfig {
    fn seed(&self, i: usize) -> u64 {
        self.base_seed + i as u64
    }

    pub fn gtg(&self, theta: f64, seed: u64) -> Result<Graph> {
        gtg_generate(&GtgConfig {
            n: self.nodes,
            theta,
            alpha: self.alpha,
            weight_scale: self.weight_scale,
            seed,
        })
    }

    pub fn instance_on(&self, graph: &Graph, budget: usize, seed: u64) -> Result<ProblemInstance> {
        make_instance(
            graph,
            self.lambdas.len(),
            &self.lambdas,
            self.d,
            budget,
            seed,
        )
    }

    fn gtg_jobs(&self, suite: &'static str, theta: f64, budget: usize, point: f64) -> Vec<Job> {
        (0..self.instances)
            .into_par_iter()
            .map(|i| {
                let seed = self.seed(i);
                let problem = self
                    .gtg(theta, seed)
                    .and_then(|g| self.instance_on(&g, budget, seed))
                    .map_err(|e| e.to_string());
                Job {
                    suite,
                    point,
                    instance: i,
                    seed,
                    problem,
                }
            })
            .collect()
    }

    /// The reference protocol: GTG instances at the configured threshold and budget.
    pub fn protocol_jobs(&self) -> Vec<Job> {
        self.gtg_jobs("protocol", self.theta, self.budget, self.budget as f64)
    }

    /// Same graphs and evaders for every budget.
    pub fn budget_jobs(&self) -> Vec<Job> {
        let base = self.gtg_jobs("budget", self.theta, 0, 0.0);
        let mut jobs = Vec::new();
        for &b in &self.budgets {
            for j in &base {
                let problem = j
                    .problem
                    .clone()
                    .and_then(|p| p.with_budget(b).map_err(|e| e.to_string()));
                jobs.push(Job {
                    point: b as f64,
                    problem,
                    ..j.clone()
                });
            }
        }
        jobs
    }

    pub fn theta_jobs(&self) -> Vec<Job> {
        self.thetas
            .iter()
            .flat_map(|&t| self.gtg_jobs("theta", t, self.budget, t))
            .collect()
    }

    pub fn grid_jobs(&self) -> Vec<Job> {
        let mut jobs = Vec::new();
        for &side in &self.grid_sides {
            jobs.par_extend((0..self.instances).into_par_iter().map(|i| {
                let seed = self.seed(i);
                let problem = grid_generate(&GridConfig {
                    rows: side,
                    cols: side,
                    extra: self.grid_extra,
                    seed,
                })
                .and_then(|g| self.instance_on(&g, self.budget, seed))
                .map_err(|e| e.to_string());
                Job {
                    suite: "grid",
                    point: side as f64,
                    instance: i,
                    seed,
                    problem,
                }
            }));
        }
        jobs
    }
}

/// Runs every solver on every job, in parallel across jobs. Records come back
/// ordered by (job order, solver order) whatever the scheduling.
pub fn run_jobs(jobs: &[Job], solvers: &[SolverKind]) -> Vec<BenchmarkRecord> {
    jobs.par_iter()
        .flat_map_iter(|job| solvers.iter().map(move |&s| run_one(job, s)))
        .collect()
}

fn run_one(job: &Job, solver: SolverKind) -> BenchmarkRecord {
    let mut rec = BenchmarkRecord {
        suite: job.suite.into(),
        point: job.point,
        instance: job.instance,
        seed: job.seed,
        solver: solver.name().into(),
        budget: 0,
        nodes: 0,
        edges: 0,
        evaders: 0,
        objective: f64::NAN,
        eval_count: 0,
        wall_time: 0.0,
        error: String::new(),
    };
    let problem = match &job.problem {
        Ok(p) => p,
        Err(e) => {
            rec.error = e.clone();
            return rec;
        }
    };
    rec.budget = problem.budget;
    rec.nodes = problem.graph.node_count();
    rec.edges = problem.graph.edge_count();
    rec.evaders = problem.evaders.len();
    let start = Instant::now();
    match solver.run(problem) {
        Ok(s) => {
            rec.objective = s.objective;
            rec.eval_count = s.eval_count;
            rec.wall_time = start.elapsed().as_secs_f64();
        }
        Err(e) => rec.error = e.to_string(),
    }
    rec
}

/// Aggregate over successful records of one (suite, point, solver).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub suite: String,
    pub point: f64,
    pub solver: String,
    pub runs: usize,
    pub failures: usize,
    pub mean_edges: f64,
    pub mean_objective: f64,
    pub mean_eval_count: f64,
    /// Coefficient of variation of `eval_count`.
    pub cv_eval_count: f64,
    pub mean_wall_time: f64,
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population standard deviation over the mean.
pub fn coefficient_of_variation(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64;
    var.sqrt() / m
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let mx = mean(&pts.iter().map(|p| p.0).collect::<Vec<_>>());
    let my = mean(&pts.iter().map(|p| p.1).collect::<Vec<_>>());
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

pub fn summarize(records: &[BenchmarkRecord]) -> Vec<SummaryRow> {
    let mut keys: Vec<(String, f64, String)> = Vec::new();
    for r in records {
        let k = (r.suite.clone(), r.point, r.solver.clone());
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(suite, point, solver)| {
            let group: Vec<&BenchmarkRecord> = records
                .iter()
                .filter(|r| r.suite == suite && r.point == point && r.solver == solver)
                .collect();
            let ok: Vec<&&BenchmarkRecord> = group.iter().filter(|r| r.error.is_empty()).collect();
            let col =
                |f: fn(&BenchmarkRecord) -> f64| ok.iter().map(|r| f(r)).collect::<Vec<f64>>();
            let evals = col(|r| r.eval_count as f64);
            SummaryRow {
                runs: ok.len(),
                failures: group.len() - ok.len(),
                mean_edges: mean(&col(|r| r.edges as f64)),
                mean_objective: mean(&col(|r| r.objective)),
                mean_eval_count: mean(&evals),
                cv_eval_count: coefficient_of_variation(&evals),
                mean_wall_time: mean(&col(|r| r.wall_time)),
                suite,
                point,
                solver,
            }
        })
        .collect()
}

/// Scaling fit of one solver across the sweep points of a suite: slope of
/// mean eval_count against the point value (budget suite) or against mean
/// edge count (other sweeps).
pub fn sweep_slope(summary: &[SummaryRow], suite: &str, solver: &str) -> Option<f64> {
    let rows: Vec<&SummaryRow> = summary
        .iter()
        .filter(|r| r.suite == suite && r.solver == solver && r.runs > 0)
        .collect();
    if rows.len() < 2 {
        return None;
    }
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| {
            (
                if suite == "budget" {
                    r.point
                } else {
                    r.mean_edges
                },
                r.mean_eval_count,
            )
        })
        .collect();
    Some(log_log_slope(&pts))
}

/// Closed-form eval_count of the basic greedy.
pub fn basic_greedy_evaluations(evaders: usize, budget: usize, edges: usize) -> u64 {
    let (k, b, e) = (evaders as u64, budget as u64, edges as u64);
    k * (b * e - b * b.saturating_sub(1) / 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn statistics() {
        assert_eq!(mean(&[1.0, 2.0, 3.0]), 2.0);
        assert!((coefficient_of_variation(&[1.0, 3.0]) - 0.5).abs() < 1e-15);
        let pts: Vec<(f64, f64)> = (1..=10)
            .map(|b| (b as f64, 3.0 * (b as f64).powf(1.2)))
            .collect();
        assert!((log_log_slope(&pts) - 1.2).abs() < 1e-12);
        assert_eq!(basic_greedy_evaluations(2, 2, 4), 14);
    }
}
