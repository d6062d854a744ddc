//! Scaling benchmark and accuracy comparison.

use std::time::Instant;

use dmpest_core::dmp::dmp_est;
use dmpest_core::generate::{generate, random_seed_set, Family, GenSpec, ProbDist, SeedCount};
use dmpest_core::mc::{delta_p, Model};
use dmpest_core::{DirectedGraph, Horizon, InitialCondition};

use crate::output::{AccuracyRecord, BenchOutput, BenchRecord};
use crate::parallel::mc_marginals;

/// A graph family without its size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FamilyKind {
    RandomRegular { degree: usize },
    ErdosRenyi { edge_prob: f64 },
    RandomTree,
    Cycle,
    Path,
    Star,
}

impl FamilyKind {
    pub fn with_nodes(self, nodes: usize) -> Family {
        match self {
            FamilyKind::RandomRegular { degree } => Family::RandomRegular { nodes, degree },
            FamilyKind::ErdosRenyi { edge_prob } => Family::ErdosRenyi { nodes, edge_prob },
            FamilyKind::RandomTree => Family::RandomTree { nodes },
            FamilyKind::Cycle => Family::Cycle { nodes },
            FamilyKind::Path => Family::Path { nodes },
            FamilyKind::Star => Family::Star { nodes },
        }
    }

    pub fn name(self) -> String {
        match self {
            FamilyKind::RandomRegular { degree } => format!("random-regular(d={degree})"),
            FamilyKind::ErdosRenyi { edge_prob } => format!("erdos-renyi(p={edge_prob})"),
            FamilyKind::RandomTree => "random-tree".into(),
            FamilyKind::Cycle => "cycle".into(),
            FamilyKind::Path => "path".into(),
            FamilyKind::Star => "star".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchSpec {
    pub family: FamilyKind,
    pub b: ProbDist,
    pub symmetric: bool,
    pub seed_fraction: f64,
    pub seed: u64,
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Least-squares slope of `ln y` against `ln x`; `None` below two points.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|&(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|&(x, _)| (x - mx) * (x - mx)).sum();
    Some(sxy / sxx)
}

/// Times `dmp_est` alone on each size of the ladder: one untimed warm-up,
/// then the median of `repetitions` runs.
pub fn run_bench(
    spec: &BenchSpec,
    sizes: &[usize],
    horizon: u32,
    repetitions: usize,
) -> Result<BenchOutput, dmpest_core::Error> {
    if sizes.is_empty() || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(dmpest_core::Error::InvalidConfig("sizes must be non-empty and strictly increasing".into()));
    }
    if repetitions == 0 {
        return Err(dmpest_core::Error::InvalidConfig("repetitions must be at least 1".into()));
    }
    let mut records = Vec::with_capacity(sizes.len());
    for &nodes in sizes {
        let graph = generate(&GenSpec {
            family: spec.family.with_nodes(nodes),
            b: spec.b,
            symmetric: spec.symmetric,
            seed: spec.seed,
        })?;
        let p0 = random_seed_set(&graph, SeedCount::Fraction(spec.seed_fraction), spec.seed)?;
        let sigma = dmp_est(&graph, &p0, horizon).sigma;
        let mut times: Vec<f64> = (0..repetitions)
            .map(|_| {
                let start = Instant::now();
                let r = dmp_est(&graph, &p0, horizon);
                let elapsed = start.elapsed().as_secs_f64();
                std::hint::black_box(r);
                elapsed.max(f64::MIN_POSITIVE)
            })
            .collect();
        records.push(BenchRecord {
            nodes,
            arcs: graph.arc_count(),
            horizon,
            wall_time_seconds: median(&mut times),
            sigma,
        });
    }
    let points: Vec<(f64, f64)> = records.iter().map(|r| (r.nodes as f64, r.wall_time_seconds)).collect();
    Ok(BenchOutput {
        family: spec.family.name(),
        horizon,
        repetitions,
        slope: log_log_slope(&points),
        records,
    })
}

/// Runs DMP and IC Monte Carlo on the same instance and compares them.
pub fn run_accuracy(
    name: &str,
    graph: &DirectedGraph,
    p0: &InitialCondition,
    horizon: u32,
    runs: u64,
    seed: u64,
    threads: usize,
) -> Result<AccuracyRecord, dmpest_core::Error> {
    if runs == 0 {
        return Err(dmpest_core::Error::InvalidConfig("the number of runs must be at least 1".into()));
    }
    let start = Instant::now();
    let dmp = dmp_est(graph, p0, horizon);
    let dmp_runtime = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let mc = mc_marginals(graph, Model::IndependentCascade, p0, Horizon::Finite(horizon), runs, seed, threads);
    let mc_runtime = start.elapsed().as_secs_f64();

    Ok(AccuracyRecord {
        graph: name.to_owned(),
        nodes: graph.node_count(),
        edges: graph.skeleton_edges().len(),
        horizon,
        runs,
        seed,
        delta_p: delta_p(&dmp.marginals, &mc.marginals)?,
        sigma_dmp: dmp.sigma,
        sigma_mc: mc.sigma(),
        dmp_runtime,
        mc_runtime,
    })
}
