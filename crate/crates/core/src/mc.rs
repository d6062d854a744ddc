//! Monte-Carlo reference estimators.
//!
//! Every run draws from its own ChaCha8 stream: the generator is keyed by
//! the 64-bit `seed` and the stream number is the run index (see
//! [`run_rng`]). Runs can therefore be split across threads in any way and
//! merged by summing integer activation counts, with results identical to
//! the sequential loop.

use alloc::vec::Vec;
use core::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, Horizon, InitialCondition, NodeId};
use crate::lt::LtParameters;

/// Generator for run `run_index` under `seed`.
pub fn run_rng(seed: u64, run_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run_index);
    rng
}

/// Bernoulli draw consuming no randomness when the outcome is certain.
#[inline]
fn coin<R: Rng + ?Sized>(rng: &mut R, p: f64) -> bool {
    if p >= 1.0 {
        true
    } else if p <= 0.0 {
        false
    } else {
        rng.random::<f64>() < p
    }
}

/// One realization of the per-arc live indicators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiveEdgeConfig {
    pub live: Vec<bool>,
}

impl LiveEdgeConfig {
    /// Each arc is live independently with its probability `b`.
    pub fn sample<R: Rng + ?Sized>(graph: &DirectedGraph, rng: &mut R) -> Self {
        Self {
            live: graph.probs().iter().map(|&b| coin(rng, b)).collect(),
        }
    }

    /// Nodes within live-arc distance `horizon` of an initially active node.
    pub fn reached(&self, graph: &DirectedGraph, initial: &[bool], horizon: Horizon) -> Vec<bool> {
        let mut active = initial.to_vec();
        let mut frontier: Vec<NodeId> = (0..graph.node_count() as NodeId)
            .filter(|&v| initial[v as usize])
            .collect();
        let mut next = Vec::new();
        for _ in 0..horizon.layers(graph.node_count()) {
            if frontier.is_empty() {
                break;
            }
            for &u in &frontier {
                for &a in graph.out_arcs(u) {
                    let v = graph.target(a) as usize;
                    if self.live[a as usize] && !active[v] {
                        active[v] = true;
                        next.push(v as NodeId);
                    }
                }
            }
            core::mem::swap(&mut frontier, &mut next);
            next.clear();
        }
        active
    }
}

fn sample_initial<R: Rng + ?Sized>(p0: &InitialCondition, rng: &mut R, active: &mut [bool], frontier: &mut Vec<NodeId>) {
    frontier.clear();
    for (v, (&p, slot)) in p0.as_slice().iter().zip(active.iter_mut()).enumerate() {
        *slot = coin(rng, p);
        if *slot {
            frontier.push(v as NodeId);
        }
    }
}

/// Reusable buffers for IC cascades.
#[derive(Clone, Debug, Default)]
pub struct IcCascade {
    active: Vec<bool>,
    frontier: Vec<NodeId>,
    next: Vec<NodeId>,
}

impl IcCascade {
    /// Runs one cascade and returns the active indicators at `horizon`.
    ///
    /// Initial actives are drawn from `p0`; each newly active node then gets
    /// one chance per out-arc, with the arc's coin flipped on first use.
    /// Layer `t` of the breadth-first expansion holds the nodes first
    /// activated at time `t`.
    pub fn run<R: Rng + ?Sized>(
        &mut self,
        graph: &DirectedGraph,
        p0: &InitialCondition,
        horizon: Horizon,
        rng: &mut R,
    ) -> &[bool] {
        self.active.resize(graph.node_count(), false);
        sample_initial(p0, rng, &mut self.active, &mut self.frontier);
        let probs = graph.probs();
        let mut t = 0u32;
        while !self.frontier.is_empty() {
            if let Horizon::Finite(limit) = horizon {
                if t >= limit {
                    break;
                }
            }
            t += 1;
            for &u in &self.frontier {
                for &a in graph.out_arcs(u) {
                    let v = graph.target(a) as usize;
                    if !self.active[v] && coin(rng, probs[a as usize]) {
                        self.active[v] = true;
                        self.next.push(v as NodeId);
                    }
                }
            }
            core::mem::swap(&mut self.frontier, &mut self.next);
            self.next.clear();
        }
        &self.active
    }
}

/// Single IC run.
pub fn ic_simulate_once<R: Rng + ?Sized>(
    graph: &DirectedGraph,
    p0: &InitialCondition,
    horizon: Horizon,
    rng: &mut R,
) -> Vec<bool> {
    IcCascade::default().run(graph, p0, horizon, rng).to_vec()
}

/// Reusable buffers for synchronous LT runs.
#[derive(Clone, Debug, Default)]
pub struct LtCascade {
    active: Vec<bool>,
    eligible: Vec<NodeId>,
    scratch: Vec<NodeId>,
}

impl LtCascade {
    /// Runs the synchronous stochastic LT dynamics up to `horizon`.
    ///
    /// Each step first collects every inactive node whose active in-weight
    /// reaches its threshold, then activates each of them with its `eta`.
    /// An infinite horizon stops once no node with `eta > 0` is eligible.
    pub fn run<R: Rng + ?Sized>(
        &mut self,
        graph: &DirectedGraph,
        params: &LtParameters,
        p0: &InitialCondition,
        horizon: Horizon,
        rng: &mut R,
    ) -> &[bool] {
        self.active.resize(graph.node_count(), false);
        sample_initial(p0, rng, &mut self.active, &mut self.scratch);
        let probs = graph.probs();
        let mut t = 0u32;
        loop {
            if let Horizon::Finite(limit) = horizon {
                if t >= limit {
                    break;
                }
            }
            self.eligible.clear();
            for i in 0..graph.node_count() as NodeId {
                if self.active[i as usize] || params.eta(i) <= 0.0 {
                    continue;
                }
                // Same in-arc summation order as the message-passing threshold test.
                let mut sum = 0.0;
                for a in graph.in_arcs(i) {
                    if self.active[graph.source(a as u32) as usize] {
                        sum += probs[a];
                    }
                }
                if sum >= params.theta(i) {
                    self.eligible.push(i);
                }
            }
            if self.eligible.is_empty() {
                break;
            }
            t += 1;
            for &i in &self.eligible {
                if coin(rng, params.eta(i)) {
                    self.active[i as usize] = true;
                }
            }
        }
        &self.active
    }
}

/// Single stochastic LT run.
pub fn lt_simulate_once<R: Rng + ?Sized>(
    graph: &DirectedGraph,
    params: &LtParameters,
    p0: &InitialCondition,
    horizon: Horizon,
    rng: &mut R,
) -> Vec<bool> {
    LtCascade::default().run(graph, params, p0, horizon, rng).to_vec()
}

/// Diffusion model selector for Monte-Carlo runs.
#[derive(Clone, Copy, Debug)]
pub enum Model<'a> {
    IndependentCascade,
    LinearThreshold(&'a LtParameters),
}

/// Activation counts over the runs in `runs`.
pub fn activation_counts(
    graph: &DirectedGraph,
    model: Model<'_>,
    p0: &InitialCondition,
    horizon: Horizon,
    runs: Range<u64>,
    seed: u64,
) -> Vec<u64> {
    let mut counts = alloc::vec![0u64; graph.node_count()];
    let mut ic = IcCascade::default();
    let mut lt = LtCascade::default();
    for run in runs {
        let mut rng = run_rng(seed, run);
        let active = match model {
            Model::IndependentCascade => ic.run(graph, p0, horizon, &mut rng),
            Model::LinearThreshold(params) => lt.run(graph, params, p0, horizon, &mut rng),
        };
        for (c, &a) in counts.iter_mut().zip(active) {
            *c += a as u64;
        }
    }
    counts
}

/// Monte-Carlo marginal estimates with their standard errors.
#[derive(Clone, Debug, PartialEq)]
pub struct McReport {
    pub runs: u64,
    pub seed: u64,
    pub horizon: Horizon,
    pub marginals: Vec<f64>,
    /// `sqrt(p (1 - p) / R)` per node, at most `0.5 / sqrt(R)`.
    pub std_errors: Vec<f64>,
}

impl McReport {
    pub fn from_counts(counts: &[u64], runs: u64, seed: u64, horizon: Horizon) -> Self {
        let r = runs as f64;
        let marginals: Vec<f64> = counts.iter().map(|&c| c as f64 / r).collect();
        let std_errors = marginals
            .iter()
            .map(|&p| libm::sqrt(p * (1.0 - p) / r))
            .collect();
        Self {
            runs,
            seed,
            horizon,
            marginals,
            std_errors,
        }
    }

    /// Estimated influence `Σ p_i`.
    pub fn sigma(&self) -> f64 {
        self.marginals.iter().sum()
    }
}

fn check_runs(runs: u64) -> Result<()> {
    if runs == 0 {
        Err(Error::InvalidConfig("the number of runs must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// IC marginals averaged over `runs` independent cascades.
pub fn ic_mc_marginals(
    graph: &DirectedGraph,
    p0: &InitialCondition,
    horizon: Horizon,
    runs: u64,
    seed: u64,
) -> Result<McReport> {
    check_runs(runs)?;
    p0.check_len(graph)?;
    let counts = activation_counts(graph, Model::IndependentCascade, p0, horizon, 0..runs, seed);
    Ok(McReport::from_counts(&counts, runs, seed, horizon))
}

/// LT marginals averaged over `runs` independent runs.
pub fn lt_mc_marginals(
    graph: &DirectedGraph,
    params: &LtParameters,
    p0: &InitialCondition,
    horizon: Horizon,
    runs: u64,
    seed: u64,
) -> Result<McReport> {
    check_runs(runs)?;
    p0.check_len(graph)?;
    let counts = activation_counts(graph, Model::LinearThreshold(params), p0, horizon, 0..runs, seed);
    Ok(McReport::from_counts(&counts, runs, seed, horizon))
}

/// Mean absolute per-node difference between two marginal vectors.
pub fn delta_p(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64)
}
