//! Argument parsing and subcommand dispatch.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use dmpest_core::bounds::{exactness_certificate, spanning_tree_lower_bound, TreeStrategy};
use dmpest_core::dmp::{dmp_est, dmp_inf, dmp_trajectory, FixedPointConfig};
use dmpest_core::generate::{generate, random_seed_set, GenSpec, ProbDist, SeedCount};
use dmpest_core::lt::{lt_estimate, LtParameters, DEFAULT_DEGREE_CAP, DEFAULT_ETA, DEFAULT_THETA};
use dmpest_core::mc::{delta_p, Model};
use dmpest_core::oracle::{exact_cavity_messages, exact_marginals, lt_exact_marginals, Coupling, OracleOptions, DEFAULT_VARIABLE_CAP};
use dmpest_core::{EdgeMode, Horizon, InitialCondition, MarginalReport};
use serde::Serialize;

use crate::experiments::{run_accuracy, run_bench, BenchSpec, FamilyKind};
use crate::format::{self, parse_graph, parse_initial_condition, parse_node_values, write_graph, write_marginals_csv, GraphFile};
use crate::output::*;
use crate::parallel::mc_marginals;

/// Seed used by every randomized subcommand when `--seed` is absent.
pub const DEFAULT_SEED: u64 = 12345;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INVARIANT: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "dmpest", version, about = "Influence estimation by dynamic message-passing")]
pub struct Cli {
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    /// Worker threads for Monte-Carlo runs.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Directed,
    Undirected,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Ic,
    Lt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CouplingArg {
    Auto,
    PerArc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum TreeArg {
    Bfs,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    RandomRegular,
    ErdosRenyi,
    RandomTree,
    Cycle,
    Path,
    Star,
}

#[derive(Args, Debug)]
struct GraphArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Edge mode for files without a `%mode` header.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
}

#[derive(Args, Debug)]
struct HorizonArgs {
    /// Number of time steps, or `inf`.
    #[arg(long, value_parser = parse_horizon)]
    horizon: Option<Horizon>,
    /// Same as `--horizon inf`.
    #[arg(long, conflicts_with = "horizon")]
    inf: bool,
}

impl HorizonArgs {
    fn get(&self) -> Result<Horizon, CliError> {
        match (self.horizon, self.inf) {
            (_, true) => Ok(Horizon::Infinite),
            (Some(h), false) => Ok(h),
            (None, false) => Err(CliError::Input("one of --horizon or --inf is required".into())),
        }
    }
}

#[derive(Args, Debug)]
struct LtArgs {
    /// `node theta` lines; unlisted nodes use 0.5.
    #[arg(long)]
    theta_file: Option<PathBuf>,
    /// `node eta` lines; unlisted nodes use 1.
    #[arg(long)]
    eta_file: Option<PathBuf>,
    /// Largest in-degree enumerated exactly by LT message-passing.
    #[arg(long, default_value_t = DEFAULT_DEGREE_CAP)]
    degree_cap: usize,
}

#[derive(Args, Debug)]
struct FamilyArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::RandomRegular)]
    family: FamilyArg,
    /// Degree for random-regular graphs.
    #[arg(long, default_value_t = 3)]
    degree: usize,
    /// Edge probability for Erdos-Renyi graphs.
    #[arg(long)]
    edge_prob: Option<f64>,
    /// `const:<c>` or `uniform:<lo>:<hi>`.
    #[arg(long, value_parser = parse_prob_dist, default_value = "uniform:0:0.1")]
    b: ProbDist,
    /// One draw of b per edge, shared by both arcs (the default).
    #[arg(long, conflicts_with = "asymmetric")]
    symmetric: bool,
    /// Independent draws of b for the two arcs of an edge.
    #[arg(long)]
    asymmetric: bool,
}

impl FamilyArgs {
    fn kind(&self) -> Result<FamilyKind, CliError> {
        Ok(match self.family {
            FamilyArg::RandomRegular => FamilyKind::RandomRegular { degree: self.degree },
            FamilyArg::ErdosRenyi => FamilyKind::ErdosRenyi {
                edge_prob: self
                    .edge_prob
                    .ok_or_else(|| CliError::Input("--edge-prob is required for erdos-renyi".into()))?,
            },
            FamilyArg::RandomTree => FamilyKind::RandomTree,
            FamilyArg::Cycle => FamilyKind::Cycle,
            FamilyArg::Path => FamilyKind::Path,
            FamilyArg::Star => FamilyKind::Star,
        })
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic graph in the edge-list format.
    Gen {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        nodes: usize,
        /// Also write a random sure-seed initial condition here.
        #[arg(long)]
        init_out: Option<PathBuf>,
        #[arg(long, conflicts_with = "seed_fraction")]
        seed_count: Option<usize>,
        #[arg(long)]
        seed_fraction: Option<f64>,
    },
    /// Finite-horizon IC message-passing.
    Estimate {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        init: PathBuf,
        #[arg(long)]
        horizon: u32,
        /// Include the marginals at every t <= horizon.
        #[arg(long)]
        trajectory: bool,
    },
    /// Infinite-time IC message-passing (fixed point).
    EstimateInf {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        init: PathBuf,
        /// Absolute residual; defaults to 1e-9 times the arc count.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Defaults to 20 times the node count, at most 10^6.
        #[arg(long)]
        max_sweeps: Option<u32>,
    },
    /// Stochastic LT message-passing.
    LtEstimate {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        init: PathBuf,
        #[command(flatten)]
        lt: LtArgs,
        #[arg(long)]
        horizon: u32,
    },
    /// Monte-Carlo marginals.
    Mc {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        init: PathBuf,
        #[command(flatten)]
        horizon: HorizonArgs,
        #[arg(long, default_value_t = 10_000)]
        runs: u64,
        #[arg(long, value_enum, default_value_t = ModelArg::Ic)]
        model: ModelArg,
        #[command(flatten)]
        lt: LtArgs,
    },
    /// Exact marginals by enumeration (small graphs only).
    Oracle {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        init: PathBuf,
        #[command(flatten)]
        horizon: HorizonArgs,
        /// Also report the cavity probability on every arc (IC, finite horizon).
        #[arg(long)]
        messages: bool,
        #[arg(long, value_enum, default_value_t = ModelArg::Ic)]
        model: ModelArg,
        #[command(flatten)]
        lt: LtArgs,
        #[arg(long, value_enum, default_value_t = CouplingArg::Auto)]
        coupling: CouplingArg,
        #[arg(long, default_value_t = DEFAULT_VARIABLE_CAP)]
        max_vars: usize,
    },
    /// Message-passing against Monte Carlo; exits 2 when an IC estimate is
    /// exceeded beyond sampling error.
    Compare {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        init: PathBuf,
        #[command(flatten)]
        horizon: HorizonArgs,
        #[arg(long, default_value_t = 10_000)]
        runs: u64,
        #[arg(long, value_enum, default_value_t = ModelArg::Ic)]
        model: ModelArg,
        #[command(flatten)]
        lt: LtArgs,
    },
    /// Girth and the exactness condition at a horizon.
    Certify {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        horizon: HorizonArgs,
    },
    /// Spanning-tree lower bound and full-graph upper bound on the influence.
    Bracket {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        init: PathBuf,
        #[command(flatten)]
        horizon: HorizonArgs,
        #[arg(long, value_enum, default_value_t = TreeArg::Bfs)]
        tree_strategy: TreeArg,
        /// Shuffle seed for the random tree; defaults to --seed.
        #[arg(long)]
        tree_seed: Option<u64>,
    },
    /// Wall time of message-passing over a ladder of graph sizes.
    Bench {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, value_delimiter = ',', default_value = "10000,30000,100000,300000,1000000")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        horizon: u32,
        #[arg(long, default_value_t = 3)]
        repetitions: usize,
        #[arg(long, default_value_t = 0.01)]
        seed_fraction: f64,
    },
    /// Mean per-node error of message-passing against Monte Carlo.
    Accuracy {
        /// Graph file; a graph is generated when absent.
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Initial condition; random sure seeds when absent.
        #[arg(long)]
        init: Option<PathBuf>,
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value_t = 2000)]
        nodes: usize,
        #[arg(long, default_value_t = 0.01)]
        seed_fraction: f64,
        #[arg(long, default_value_t = 10)]
        horizon: u32,
        #[arg(long, default_value_t = 10_000)]
        runs: u64,
    },
}

fn parse_horizon(s: &str) -> Result<Horizon, String> {
    if s == "inf" {
        return Ok(Horizon::Infinite);
    }
    s.parse::<u32>()
        .map(Horizon::Finite)
        .map_err(|_| format!("`{s}` is neither a non-negative integer nor `inf`"))
}

fn parse_prob_dist(s: &str) -> Result<ProbDist, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| t.parse::<f64>().map_err(|_| format!("`{t}` is not a number"));
    match parts.as_slice() {
        ["const", c] => Ok(ProbDist::Constant(num(c)?)),
        ["uniform", lo, hi] => Ok(ProbDist::Uniform { lo: num(lo)?, hi: num(hi)? }),
        _ => Err(format!("expected `const:<c>` or `uniform:<lo>:<hi>`, found `{s}`")),
    }
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Invariant(String),
}

impl From<dmpest_core::Error> for CliError {
    fn from(e: dmpest_core::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<format::FormatError> for CliError {
    fn from(e: format::FormatError) -> Self {
        CliError::Input(e.to_string())
    }
}

/// What the process should print and return.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code, stdout: String::new(), stderr: text }
            } else {
                Outcome { code, stdout: text, stderr: String::new() }
            };
        }
    };
    let mut ctx = Context { cli: &cli, warnings: Vec::new(), code: EXIT_OK };
    let result = ctx.dispatch().and_then(|text| ctx.deliver(text));
    let mut stderr: String = ctx.warnings.iter().map(|w| format!("warning: {w}\n")).collect();
    match result {
        Ok(stdout) => Outcome { code: ctx.code, stdout, stderr },
        Err(CliError::Input(m)) => {
            stderr.push_str(&format!("error: {m}\n"));
            Outcome { code: EXIT_INPUT, stdout: String::new(), stderr }
        }
        Err(CliError::Invariant(m)) => {
            stderr.push_str(&format!("invariant violated: {m}\n"));
            Outcome { code: EXIT_INVARIANT, stdout: String::new(), stderr }
        }
    }
}

struct Context<'a> {
    cli: &'a Cli,
    warnings: Vec<String>,
    code: i32,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_graph(args: &GraphArgs) -> Result<GraphFile, CliError> {
    load_graph_path(&args.graph, args.mode)
}

fn load_graph_path(path: &Path, mode: Option<ModeArg>) -> Result<GraphFile, CliError> {
    let mode = mode.map(|m| match m {
        ModeArg::Directed => EdgeMode::Directed,
        ModeArg::Undirected => EdgeMode::Undirected,
    });
    parse_graph(&read(path)?, mode).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_init(path: &Path, graph: &GraphFile) -> Result<InitialCondition, CliError> {
    parse_initial_condition(&read(path)?, graph).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_lt(args: &LtArgs, graph: &GraphFile) -> Result<LtParameters, CliError> {
    let values = |path: &Option<PathBuf>, default: f64| -> Result<Vec<f64>, CliError> {
        match path {
            Some(p) => parse_node_values(&read(p)?, graph, default)
                .map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
            None => Ok(vec![default; graph.graph.node_count()]),
        }
    };
    let theta = values(&args.theta_file, DEFAULT_THETA)?;
    let eta = values(&args.eta_file, DEFAULT_ETA)?;
    Ok(LtParameters::new(&graph.graph, theta, eta)?)
}

fn labels_of(graph: &GraphFile) -> Option<Vec<String>> {
    graph.labels.as_ref().map(|l| l.names().to_vec())
}

fn checked(report: MarginalReport, p0: &InitialCondition) -> Result<MarginalReport, CliError> {
    report
        .validate(p0)
        .map_err(|e| CliError::Invariant(e.to_string()))?;
    Ok(report)
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output documents serialize");
    s.push('\n');
    s
}

impl Context<'_> {
    fn deliver(&self, text: String) -> Result<String, CliError> {
        match &self.cli.out {
            Some(path) => {
                std::fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                Ok(String::new())
            }
            None => Ok(text),
        }
    }

    /// JSON document, or the `node,p_hat` table when CSV was requested.
    fn marginal_doc<T: Serialize>(&self, doc: &T, marginals: &[f64], graph: &GraphFile) -> String {
        match self.cli.format {
            OutputFormat::Json => json(doc),
            OutputFormat::Csv => write_marginals_csv(marginals, graph.labels.as_ref()),
        }
    }

    fn json_only<T: Serialize>(&self, doc: &T, command: &str) -> Result<String, CliError> {
        match self.cli.format {
            OutputFormat::Json => Ok(json(doc)),
            OutputFormat::Csv => Err(CliError::Input(format!("`{command}` has no CSV output"))),
        }
    }

    fn dispatch(&mut self) -> Result<String, CliError> {
        let cli = self.cli;
        match &cli.command {
            Command::Gen { family, nodes, init_out, seed_count, seed_fraction } => {
                let graph = generate(&GenSpec {
                    family: family.kind()?.with_nodes(*nodes),
                    b: family.b,
                    symmetric: !family.asymmetric,
                    seed: cli.seed,
                })?;
                let count = match (seed_count, seed_fraction) {
                    (Some(c), _) => Some(SeedCount::Count(*c)),
                    (None, Some(f)) => Some(SeedCount::Fraction(*f)),
                    (None, None) => None,
                };
                match (init_out, count) {
                    (Some(path), count) => {
                        let p0 = random_seed_set(&graph, count.unwrap_or(SeedCount::Fraction(0.01)), cli.seed)?;
                        std::fs::write(path, format::write_initial_condition(&p0, None))
                            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                    }
                    (None, Some(_)) => return Err(CliError::Input("--seed-count/--seed-fraction need --init-out".into())),
                    (None, None) => {}
                }
                Ok(write_graph(&graph, None))
            }

            Command::Estimate { graph, init, horizon, trajectory } => {
                let g = load_graph(graph)?;
                let p0 = load_init(init, &g)?;
                let (report, traj) = if *trajectory {
                    let mut all = dmp_trajectory(&g.graph, &p0, *horizon);
                    let last = all.pop().expect("trajectory includes the horizon");
                    let mut steps: Vec<Marginals> = Vec::with_capacity(all.len() + 1);
                    for r in all.into_iter().chain(std::iter::once(last.clone())) {
                        let r = checked(r, &p0)?;
                        steps.push(Marginals { horizon: r.horizon, sigma: r.sigma, marginals: r.marginals });
                    }
                    (last, Some(steps))
                } else {
                    (dmp_est(&g.graph, &p0, *horizon), None)
                };
                let report = checked(report, &p0)?;
                let doc = EstimateOutput {
                    horizon: report.horizon,
                    sigma: report.sigma,
                    converged: None,
                    sweeps: None,
                    residual: None,
                    marginals: report.marginals.clone(),
                    labels: labels_of(&g),
                    trajectory: traj,
                };
                Ok(self.marginal_doc(&doc, &report.marginals, &g))
            }

            Command::EstimateInf { graph, init, tolerance, max_sweeps } => {
                let g = load_graph(graph)?;
                let p0 = load_init(init, &g)?;
                let defaults = FixedPointConfig::for_graph(&g.graph);
                let cfg = FixedPointConfig::new(
                    tolerance.unwrap_or(defaults.tolerance),
                    max_sweeps.unwrap_or(defaults.max_sweeps),
                )?;
                let fp = dmp_inf(&g.graph, &p0, &cfg);
                if !fp.converged {
                    self.warnings.push(format!(
                        "no convergence after {} sweeps (residual {:e})",
                        fp.sweeps, fp.residual
                    ));
                }
                let report = checked(fp.report, &p0)?;
                let doc = EstimateOutput {
                    horizon: Horizon::Infinite,
                    sigma: report.sigma,
                    converged: Some(fp.converged),
                    sweeps: Some(fp.sweeps),
                    residual: Some(fp.residual),
                    marginals: report.marginals.clone(),
                    labels: labels_of(&g),
                    trajectory: None,
                };
                Ok(self.marginal_doc(&doc, &report.marginals, &g))
            }

            Command::LtEstimate { graph, init, lt, horizon } => {
                let g = load_graph(graph)?;
                let p0 = load_init(init, &g)?;
                let params = load_lt(lt, &g)?;
                let report = lt_estimate(&g.graph, &params, &p0, *horizon, lt.degree_cap)?;
                let report = checked(report, &p0)?;
                let doc = Marginals { horizon: report.horizon, sigma: report.sigma, marginals: report.marginals.clone() };
                Ok(self.marginal_doc(&doc, &report.marginals, &g))
            }

            Command::Mc { graph, init, horizon, runs, model, lt } => {
                let g = load_graph(graph)?;
                let p0 = load_init(init, &g)?;
                let h = horizon.get()?;
                if *runs == 0 {
                    return Err(CliError::Input("--runs must be at least 1".into()));
                }
                let params;
                let (name, m) = match model {
                    ModelArg::Ic => ("ic", Model::IndependentCascade),
                    ModelArg::Lt => {
                        params = load_lt(lt, &g)?;
                        ("lt", Model::LinearThreshold(&params))
                    }
                };
                let report = mc_marginals(&g.graph, m, &p0, h, *runs, cli.seed, cli.threads);
                let doc = McOutput {
                    model: name,
                    horizon: h,
                    runs: report.runs,
                    seed: report.seed,
                    sigma_mc: report.sigma(),
                    marginals: report.marginals.clone(),
                    std_errors: report.std_errors.clone(),
                    labels: labels_of(&g),
                };
                Ok(self.marginal_doc(&doc, &report.marginals, &g))
            }

            Command::Oracle { graph, init, horizon, messages, model, lt, coupling, max_vars } => {
                let g = load_graph(graph)?;
                let p0 = load_init(init, &g)?;
                let h = horizon.get()?;
                let opts = OracleOptions {
                    coupling: match coupling {
                        CouplingArg::Auto => Coupling::Auto,
                        CouplingArg::PerArc => Coupling::PerArc,
                    },
                    max_variables: *max_vars,
                };
                let (report, arc_messages) = match model {
                    ModelArg::Ic => {
                        let report = exact_marginals(&g.graph, &p0, h, &opts)?;
                        let msgs = if *messages {
                            let t = h.layers(g.graph.node_count());
                            let values = exact_cavity_messages(&g.graph, &p0, t, &opts)?;
                            Some(
                                g.graph
                                    .arcs()
                                    .map(|(a, u, v, _)| ArcMessage {
                                        source: g.node_name(u),
                                        target: g.node_name(v),
                                        p: values[a as usize],
                                    })
                                    .collect(),
                            )
                        } else {
                            None
                        };
                        (report, msgs)
                    }
                    ModelArg::Lt => {
                        if *messages {
                            return Err(CliError::Input("--messages is only available for the IC model".into()));
                        }
                        let params = load_lt(lt, &g)?;
                        (lt_exact_marginals(&g.graph, &params, &p0, h)?, None)
                    }
                };
                let report = checked(report, &p0)?;
                let doc = OracleOutput {
                    horizon: h,
                    sigma: report.sigma,
                    marginals: report.marginals.clone(),
                    labels: labels_of(&g),
                    messages: arc_messages,
                };
                Ok(self.marginal_doc(&doc, &report.marginals, &g))
            }

            Command::Compare { graph, init, horizon, runs, model, lt } => {
                let g = load_graph(graph)?;
                let p0 = load_init(init, &g)?;
                let h = horizon.get()?;
                if *runs == 0 {
                    return Err(CliError::Input("--runs must be at least 1".into()));
                }
                let params;
                let (name, dmp, m) = match model {
                    ModelArg::Ic => {
                        let dmp = match h {
                            Horizon::Finite(t) => dmp_est(&g.graph, &p0, t),
                            Horizon::Infinite => dmp_inf(&g.graph, &p0, &FixedPointConfig::for_graph(&g.graph)).report,
                        };
                        ("ic", dmp, Model::IndependentCascade)
                    }
                    ModelArg::Lt => {
                        params = load_lt(lt, &g)?;
                        let t = h.finite().ok_or_else(|| {
                            CliError::Input("LT message-passing needs a finite --horizon".into())
                        })?;
                        ("lt", lt_estimate(&g.graph, &params, &p0, t, lt.degree_cap)?, Model::LinearThreshold(&params))
                    }
                };
                let dmp = checked(dmp, &p0)?;
                let mc = mc_marginals(&g.graph, m, &p0, h, *runs, cli.seed, cli.threads);
                let slack = 1.0 / *runs as f64;
                let max_violation = mc
                    .marginals
                    .iter()
                    .zip(&dmp.marginals)
                    .map(|(m, d)| m - d)
                    .fold(f64::NEG_INFINITY, f64::max);
                let violations: Vec<String> = if name == "ic" {
                    (0..g.graph.node_count())
                        .filter(|&i| mc.marginals[i] - dmp.marginals[i] > 4.0 * mc.std_errors[i] + slack)
                        .map(|i| g.node_name(i as u32))
                        .collect()
                } else {
                    Vec::new()
                };
                if !violations.is_empty() {
                    self.warnings.push(format!(
                        "Monte Carlo exceeds the IC estimate beyond 4 standard errors at {} node(s)",
                        violations.len()
                    ));
                    self.code = EXIT_INVARIANT;
                }
                let doc = CompareOutput {
                    model: name,
                    horizon: h,
                    runs: *runs,
                    seed: cli.seed,
                    delta_p: delta_p(&dmp.marginals, &mc.marginals)?,
                    sigma_dmp: dmp.sigma,
                    sigma_mc: mc.sigma(),
                    max_violation: if max_violation.is_finite() { max_violation } else { 0.0 },
                    violations,
                };
                self.json_only(&doc, "compare")
            }

            Command::Certify { graph, horizon } => {
                let g = load_graph(graph)?;
                let c = exactness_certificate(&g.graph, horizon.get()?);
                self.json_only(&CertifyOutput { girth: c.girth, horizon: c.horizon, exact: c.exact }, "certify")
            }

            Command::Bracket { graph, init, horizon, tree_strategy, tree_seed } => {
                let g = load_graph(graph)?;
                let p0 = load_init(init, &g)?;
                let h = horizon.get()?;
                let (strategy, label) = match tree_strategy {
                    TreeArg::Bfs => (TreeStrategy::Bfs, "bfs".to_owned()),
                    TreeArg::Random => {
                        let seed = tree_seed.unwrap_or(cli.seed);
                        (TreeStrategy::Random { seed }, format!("random(seed={seed})"))
                    }
                };
                let b = spanning_tree_lower_bound(&g.graph, &p0, h, strategy, None);
                if b.lower > b.upper + 1e-10 {
                    return Err(CliError::Invariant(format!(
                        "tree estimate {} exceeds the full-graph estimate {}",
                        b.lower, b.upper
                    )));
                }
                self.json_only(&BracketOutput { horizon: h, strategy: label, lower: b.lower, upper: b.upper }, "bracket")
            }

            Command::Bench { family, sizes, horizon, repetitions, seed_fraction } => {
                let spec = BenchSpec {
                    family: family.kind()?,
                    b: family.b,
                    symmetric: !family.asymmetric,
                    seed_fraction: *seed_fraction,
                    seed: cli.seed,
                };
                let out = run_bench(&spec, sizes, *horizon, *repetitions)?;
                self.json_only(&out, "bench")
            }

            Command::Accuracy { graph, mode, init, family, nodes, seed_fraction, horizon, runs } => {
                let (name, g) = match graph {
                    Some(path) => {
                        let name = path.file_stem().map_or("graph".into(), |s| s.to_string_lossy().into_owned());
                        (name, load_graph_path(path, *mode)?)
                    }
                    None => {
                        let kind = family.kind()?;
                        let graph = generate(&GenSpec {
                            family: kind.with_nodes(*nodes),
                            b: family.b,
                            symmetric: !family.asymmetric,
                            seed: cli.seed,
                        })?;
                        (format!("{}(n={nodes})", kind.name()), GraphFile { graph, labels: None })
                    }
                };
                let p0 = match init {
                    Some(path) => load_init(path, &g)?,
                    None => random_seed_set(&g.graph, SeedCount::Fraction(*seed_fraction), cli.seed)?,
                };
                let rec = run_accuracy(&name, &g.graph, &p0, *horizon, *runs, cli.seed, cli.threads)?;
                self.json_only(&rec, "accuracy")
            }
        }
    }
}

