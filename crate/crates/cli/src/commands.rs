use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use ume_core::benchgen::{
    config_hash, grid_generate, gtg_generate, make_instance_with, GridConfig, GtgConfig,
    InstanceOptions, ManifestRow, GTG_WEIGHT_SCALE,
};
use ume_core::io::{
    instance_to_json, node_problem_from_json, node_problem_to_json, read_instance, solution_to_json,
};
use ume_core::mip::{export_mip, MipOptions};
use ume_core::oracle::enumerate_paths;
use ume_core::solvers::{SubsetMode, DEFAULT_MAX_COMBINATIONS};
use ume_core::transforms::{edge_problem_to_node_problem, node_problem_to_edge_problem};
use ume_core::{
    brute_force_solve, objective, EdgeId, Graph, InterdictionSet, NodeId, ProblemInstance,
    Solution, UmeError,
};

use crate::benchmark::{run_jobs, summarize, sweep_slope, BenchmarkRecord, SuiteConfig};
use crate::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "ume",
    version,
    about = "Interdiction of unreactive Markovian evaders"
)]
pub struct Cli {
    /// Base random seed.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Linear-solve tolerance; overrides the value stored in instance files.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file, or directory for `generate`. Standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate benchmark instances.
    Generate {
        #[command(subcommand)]
        family: Family,
    },
    /// Solve an instance.
    Solve(SolveArgs),
    /// Run benchmark suites and write per-run records as CSV.
    Benchmark(BenchArgs),
    /// Write the mixed-integer program in LP format.
    ExportMip(ExportArgs),
    /// Objective of an interdiction set by path enumeration.
    Oracle(OracleArgs),
    /// Edge/node interdiction reductions.
    Transform {
        #[command(subcommand)]
        direction: TransformCmd,
    },
}

#[derive(Debug, Args)]
pub struct InstanceArgs {
    /// Number of instances; seeds are `seed, seed+1, ...`.
    #[arg(long, default_value_t = 1)]
    pub seeds: usize,
    /// Rate parameter of each evader, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 1000.0])]
    pub lambdas: Vec<f64>,
    /// Interdiction efficiency of every edge.
    #[arg(long, default_value_t = 0.5)]
    pub d: f64,
    #[arg(long, default_value_t = 10)]
    pub budget: usize,
    /// Keep generated edge costs instead of setting them to 1.
    #[arg(long)]
    pub keep_costs: bool,
    /// Spread source mass over all nodes, not only those that reach the target.
    #[arg(long)]
    pub all_sources: bool,
}

#[derive(Debug, Subcommand)]
pub enum Family {
    /// Geographical threshold graphs.
    Gtg {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        theta: f64,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(long, default_value_t = GTG_WEIGHT_SCALE)]
        weight_scale: f64,
        #[command(flatten)]
        instance: InstanceArgs,
    },
    /// Lattice with random extra edges.
    Grid {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        /// Random extra out-edges per node.
        #[arg(long, default_value_t = 2)]
        extra: usize,
        #[command(flatten)]
        instance: InstanceArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Greedy,
    Priority,
    Exact,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value_t = SolverArg::Priority)]
    pub solver: SolverArg,
    /// Override the budget stored in the instance.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Stop greedy selection once no edge has a positive gain.
    #[arg(long)]
    pub early_stop: bool,
    /// Refuse exhaustive search beyond this many subsets.
    #[arg(long, default_value_t = DEFAULT_MAX_COMBINATIONS)]
    pub max_combinations: u128,
    /// Let exhaustive search consider sets smaller than the budget.
    #[arg(long)]
    pub at_most: bool,
    /// Append a benchmark record for this run to a CSV file.
    #[arg(long)]
    pub record: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Protocol,
    Budget,
    Theta,
    Grid,
    All,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value_t = Suite::Protocol)]
    pub suite: Suite,
    #[arg(long, default_value_t = 50)]
    pub instances: usize,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 30.0)]
    pub theta: f64,
    #[arg(long, default_value_t = 10)]
    pub budget: usize,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 1000.0])]
    pub lambdas: Vec<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub d: f64,
    /// Budgets of the budget sweep.
    #[arg(long, value_delimiter = ',', default_values_t = (1..=10).collect::<Vec<usize>>())]
    pub budgets: Vec<usize>,
    /// Thresholds of the GTG sweep.
    #[arg(long, value_delimiter = ',', default_values_t = vec![50.0, 45.0, 40.0, 35.0, 30.0, 25.0, 20.0])]
    pub thetas: Vec<f64>,
    /// Side lengths of the grid sweep.
    #[arg(long, value_delimiter = ',', default_values_t = vec![8, 10, 12, 14, 16])]
    pub grid_sides: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    pub grid_extra: usize,
    /// Summary CSV (means and coefficients of variation per sweep point).
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    pub instance: PathBuf,
    #[arg(long)]
    pub budget: Option<usize>,
    /// Budget row as `<= B`.
    #[arg(long)]
    pub budget_at_most: bool,
    /// Add `pi <= 1` bounds (only for chains without revisits).
    #[arg(long)]
    pub pi_upper_bound: bool,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    pub instance: PathBuf,
    /// Interdicted edge ids, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub set: Vec<u32>,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_paths: usize,
}

#[derive(Debug, Subcommand)]
pub enum TransformCmd {
    /// Edge instance to a node-interdiction problem (with the element map).
    EdgeToNode {
        instance: PathBuf,
        /// Edge set to carry over; both objectives are reported on stderr.
        #[arg(long, value_delimiter = ',')]
        set: Vec<u32>,
    },
    /// Node-interdiction problem to an edge instance.
    NodeToEdge {
        problem: PathBuf,
        /// Where to write the element map as JSON.
        #[arg(long)]
        map: Option<PathBuf>,
        /// Node set to carry over; both objectives are reported on stderr.
        #[arg(long, value_delimiter = ',')]
        set: Vec<u32>,
    },
}

pub fn run(cli: Cli) -> CliResult<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    if let Some(tol) = cli.tolerance {
        if !(tol > 0.0) {
            return Err(CliError::Usage(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
    }
    match &cli.command {
        Command::Generate { family } => generate(&cli, family),
        Command::Solve(args) => solve(&cli, args),
        Command::Benchmark(args) => bench(&cli, args),
        Command::ExportMip(args) => export(&cli, args),
        Command::Oracle(args) => oracle(&cli, args),
        Command::Transform { direction } => transform(&cli, direction),
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn load(cli: &Cli, path: &Path, budget: Option<usize>) -> CliResult<ProblemInstance> {
    let mut p = read_instance(path).map_err(with_path(path))?;
    if let Some(t) = cli.tolerance {
        p.tolerance = t;
    }
    if let Some(b) = budget {
        p = p.with_budget(b)?;
    }
    Ok(p)
}

fn edge_set(ids: &[u32]) -> CliResult<InterdictionSet> {
    Ok(InterdictionSet::new(ids.iter().map(|&e| EdgeId(e)))?)
}

fn generate(cli: &Cli, family: &Family) -> CliResult<()> {
    let (args, prefix, config) = match family {
        Family::Gtg {
            n,
            theta,
            alpha,
            weight_scale,
            instance,
        } => {
            let c = GtgConfig {
                n: *n,
                theta: *theta,
                alpha: *alpha,
                weight_scale: *weight_scale,
                seed: 0,
            };
            c.validate()?;
            (
                instance,
                "gtg",
                json!({"family": "gtg", "graph": c, "instance": instance_echo(instance)}),
            )
        }
        Family::Grid {
            rows,
            cols,
            extra,
            instance,
        } => {
            let c = GridConfig {
                rows: *rows,
                cols: *cols,
                extra: *extra,
                seed: 0,
            };
            (
                instance,
                "grid",
                json!({"family": "grid", "graph": c, "instance": instance_echo(instance)}),
            )
        }
    };
    if args.seeds == 0 {
        return Err(CliError::Usage("--seeds must be at least 1".into()));
    }
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    let hash = config_hash(&config);
    let options = InstanceOptions {
        unit_costs: !args.keep_costs,
        reachable_sources: !args.all_sources,
    };
    let mut manifest = csv::Writer::from_path(dir.join("manifest.csv"))?;
    for s in 0..args.seeds as u64 {
        let seed = cli.seed + s;
        let graph: Graph = match family {
            Family::Gtg {
                n,
                theta,
                alpha,
                weight_scale,
                ..
            } => gtg_generate(&GtgConfig {
                n: *n,
                theta: *theta,
                alpha: *alpha,
                weight_scale: *weight_scale,
                seed,
            })?,
            Family::Grid {
                rows, cols, extra, ..
            } => grid_generate(&GridConfig {
                rows: *rows,
                cols: *cols,
                extra: *extra,
                seed,
            })?,
        };
        let mut problem = make_instance_with(
            &graph,
            args.lambdas.len(),
            &args.lambdas,
            args.d,
            args.budget,
            seed,
            options,
        )?;
        if let Some(t) = cli.tolerance {
            problem.tolerance = t;
        }
        let file = format!("{prefix}-{seed}.json");
        fs::write(dir.join(&file), instance_to_json(&problem) + "\n")?;
        manifest.serialize(ManifestRow {
            file,
            seed,
            nodes: problem.graph.node_count(),
            edges: problem.graph.edge_count(),
            config_hash: hash.clone(),
        })?;
    }
    manifest.flush()?;
    Ok(())
}

fn instance_echo(a: &InstanceArgs) -> serde_json::Value {
    json!({
        "lambdas": a.lambdas,
        "d": a.d,
        "budget": a.budget,
        "unit_costs": !a.keep_costs,
        "reachable_sources": !a.all_sources,
    })
}

fn solve(cli: &Cli, args: &SolveArgs) -> CliResult<()> {
    let problem = load(cli, &args.instance, args.budget)?;
    let options = ume_core::solvers::GreedyOptions {
        early_stop: args.early_stop,
    };
    let solution: Solution = match args.solver {
        SolverArg::Greedy => ume_core::greedy_solve(&problem, options)?,
        SolverArg::Priority => ume_core::priority_greedy_solve(&problem, options)?,
        SolverArg::Exact => {
            let mode = if args.at_most {
                SubsetMode::AtMost
            } else {
                SubsetMode::Exactly
            };
            brute_force_solve(&problem, args.max_combinations, mode)?
        }
    };
    let config = json!({
        "instance": args.instance.display().to_string(),
        "solver": solution.solver,
        "budget": problem.budget,
        "tolerance": problem.tolerance,
        "early_stop": args.early_stop,
        "seed": cli.seed,
    });
    emit(
        cli.out.as_deref(),
        &(solution_to_json(&solution, config) + "\n"),
    )?;
    if let Some(path) = &args.record {
        let exists = path.exists() && fs::metadata(path)?.len() > 0;
        let file = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)?;
        let mut w = csv::WriterBuilder::new()
            .has_headers(!exists)
            .from_writer(file);
        w.serialize(BenchmarkRecord {
            suite: "solve".into(),
            point: problem.budget as f64,
            instance: 0,
            seed: cli.seed,
            solver: solution.solver.clone(),
            budget: problem.budget,
            nodes: problem.graph.node_count(),
            edges: problem.graph.edge_count(),
            evaders: problem.evaders.len(),
            objective: solution.objective,
            eval_count: solution.eval_count,
            wall_time: solution.wall_time,
            error: String::new(),
        })?;
        w.flush()?;
    }
    Ok(())
}

fn bench(cli: &Cli, args: &BenchArgs) -> CliResult<()> {
    if args.instances == 0 {
        return Err(CliError::Usage("--instances must be at least 1".into()));
    }
    let config = SuiteConfig {
        instances: args.instances,
        base_seed: cli.seed,
        nodes: args.n,
        theta: args.theta,
        lambdas: args.lambdas.clone(),
        d: args.d,
        budget: args.budget,
        budgets: args.budgets.clone(),
        thetas: args.thetas.clone(),
        grid_sides: args.grid_sides.clone(),
        grid_extra: args.grid_extra,
        ..SuiteConfig::default()
    };
    let mut jobs = Vec::new();
    let wants = |s: Suite| args.suite == s || args.suite == Suite::All;
    if wants(Suite::Protocol) {
        jobs.extend(config.protocol_jobs());
    }
    if wants(Suite::Budget) {
        jobs.extend(config.budget_jobs());
    }
    if wants(Suite::Theta) {
        jobs.extend(config.theta_jobs());
    }
    if wants(Suite::Grid) {
        jobs.extend(config.grid_jobs());
    }
    let records = run_jobs(&jobs, &config.solvers);

    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &records {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Data(e.to_string()))?;
    emit(cli.out.as_deref(), &String::from_utf8_lossy(&bytes))?;

    let summary = summarize(&records);
    if let Some(path) = &args.summary {
        let mut w = csv::Writer::from_path(path)?;
        for row in &summary {
            w.serialize(row)?;
        }
        w.flush()?;
    }
    let mut err = std::io::stderr();
    for row in &summary {
        let _ = writeln!(
            err,
            "{:>8} {:>6} {:>8}: runs {:>3} failed {:>2} |E| {:>8.1} J {:.4} evals {:>10.1} cv {:.3}",
            row.suite,
            row.point,
            row.solver,
            row.runs,
            row.failures,
            row.mean_edges,
            row.mean_objective,
            row.mean_eval_count,
            row.cv_eval_count
        );
    }
    for suite in ["protocol", "budget", "theta", "grid"] {
        let points: Vec<f64> = summary
            .iter()
            .filter(|r| r.suite == suite)
            .map(|r| r.point)
            .collect();
        let mut distinct = points.clone();
        distinct.dedup();
        for p in distinct {
            let get = |s: &str| {
                summary
                    .iter()
                    .find(|r| r.suite == suite && r.point == p && r.solver == s)
            };
            if let (Some(g), Some(q)) = (get("greedy"), get("priority")) {
                let _ = writeln!(
                    err,
                    "{suite:>8} {p:>6}: speedup {:.1}",
                    g.mean_eval_count / q.mean_eval_count
                );
            }
        }
        for solver in ["greedy", "priority"] {
            if let Some(slope) = sweep_slope(&summary, suite, solver) {
                let _ = writeln!(err, "{suite:>8} {solver:>8}: log-log slope {slope:.3}");
            }
        }
    }
    Ok(())
}

fn export(cli: &Cli, args: &ExportArgs) -> CliResult<()> {
    let problem = load(cli, &args.instance, args.budget)?;
    let options = MipOptions {
        budget_at_most: args.budget_at_most,
        pi_upper_bound: args.pi_upper_bound,
    };
    emit(cli.out.as_deref(), &export_mip(&problem, options))
}

fn oracle(cli: &Cli, args: &OracleArgs) -> CliResult<()> {
    let problem = load(cli, &args.instance, None)?;
    let set = edge_set(&args.set)?;
    let mut total = 0.0;
    let mut paths = 0;
    for ev in &problem.evaders {
        let s = enumerate_paths(ev, &set, &problem.graph, args.max_paths)?;
        total += ev.weight * s.objective();
        paths += s.paths;
    }
    let solved = objective(&problem, &set)?;
    let text = serde_json::to_string_pretty(&json!({
        "set": args.set,
        "oracle_objective": total,
        "solve_objective": solved,
        "difference": (total - solved).abs(),
        "paths": paths,
    }))?;
    emit(cli.out.as_deref(), &(text + "\n"))
}

fn transform(cli: &Cli, cmd: &TransformCmd) -> CliResult<()> {
    match cmd {
        TransformCmd::EdgeToNode { instance, set } => {
            let problem = load(cli, instance, None)?;
            let (node_problem, map) = edge_problem_to_node_problem(&problem)?;
            if !set.is_empty() {
                let s = edge_set(set)?;
                let nodes = map.edges_to_nodes(&s)?;
                let before = objective(&problem, &s)?;
                let after = node_problem.objective(&nodes)?;
                eprintln!("edge objective {before}, node objective {after}");
            }
            emit(
                cli.out.as_deref(),
                &(node_problem_to_json(&node_problem, Some(map)) + "\n"),
            )
        }
        TransformCmd::NodeToEdge {
            problem,
            map: map_out,
            set,
        } => {
            let text = fs::read_to_string(problem)?;
            let (mut node_problem, _) =
                node_problem_from_json(&text).map_err(with_path(problem))?;
            if let Some(t) = cli.tolerance {
                node_problem.tolerance = t;
            }
            let (edge_problem, map) = node_problem_to_edge_problem(&node_problem)?;
            if !set.is_empty() {
                let nodes: Vec<NodeId> = set.iter().map(|&v| NodeId(v)).collect();
                let edges = map.node_set_to_edges(&nodes)?;
                let before = node_problem.objective(&nodes)?;
                let after = objective(&edge_problem, &edges)?;
                eprintln!("node objective {before}, edge objective {after}");
            }
            if let Some(path) = map_out {
                fs::write(path, serde_json::to_string_pretty(&map)? + "\n")?;
            }
            emit(
                cli.out.as_deref(),
                &(instance_to_json(&edge_problem) + "\n"),
            )
        }
    }
}

/// Maps a core error on a named file to a data error carrying the path.
pub fn with_path(path: &Path) -> impl Fn(UmeError) -> CliError + '_ {
    move |e| match CliError::from(e) {
        CliError::Data(m) => CliError::Data(format!("{}: {m}", path.display())),
        other => other,
    }
}
