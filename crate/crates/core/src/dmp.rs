//! Dynamic message-passing for the Independent Cascade model.
//!
//! The message on arc `j -> i` is the probability that `j` is active at time
//! `t` when `i` is held inactive. One synchronous sweep maps the messages at
//! `t - 1` to the messages at `t`:
//!
//! ```text
//! m[j->i](t) = 1 - (1 - p_j(0)) * prod_{l in in(j), l != i} (1 - b[l->j] * m[l->j](t-1))
//! p_i(t)     = 1 - (1 - p_i(0)) * prod_{j in in(i)}          (1 - b[j->i] * m[j->i](t-1))
//! ```
//!
//! Exact on trees and an upper bound on loopy graphs. Both are evaluated as
//! `p(0) + (1 - p(0)) (1 - prod)`, which reproduces `p(0)` exactly when
//! nothing can reach the node.
//!
//! The leave-one-out product for each out-arc is assembled from prefix and
//! suffix products over the in-arc factors of its source, so a sweep costs
//! `O(|E|)` and never divides by a factor that may be zero.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, Horizon, InitialCondition, MarginalReport, NONE};

/// Messages `m[j->i](t)` indexed by arc id.
#[derive(Clone, Debug, PartialEq)]
pub struct MessageState {
    t: u32,
    messages: Vec<f64>,
}

impl MessageState {
    /// Messages at `t = 0`: every arc carries the initial probability of its source.
    pub fn initial(graph: &DirectedGraph, p0: &InitialCondition) -> Self {
        let messages = graph
            .sources()
            .iter()
            .map(|&j| p0.get(j))
            .collect();
        Self { t: 0, messages }
    }

    pub fn from_parts(t: u32, messages: Vec<f64>) -> Self {
        Self { t, messages }
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn messages(&self) -> &[f64] {
        &self.messages
    }

    pub fn into_messages(self) -> Vec<f64> {
        self.messages
    }
}

/// Tolerance and sweep budget for the fixed-point iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixedPointConfig {
    pub tolerance: f64,
    pub max_sweeps: u32,
}

impl FixedPointConfig {
    pub fn new(tolerance: f64, max_sweeps: u32) -> Result<Self> {
        if !(tolerance > 0.0) || !tolerance.is_finite() {
            return Err(Error::InvalidConfig(alloc::format!(
                "tolerance must be positive, got {tolerance}"
            )));
        }
        if max_sweeps == 0 {
            return Err(Error::InvalidConfig("max_sweeps must be at least 1".into()));
        }
        Ok(Self {
            tolerance,
            max_sweeps,
        })
    }

    /// Defaults: absolute residual `1e-9 * |E|`, and `20 * N` sweeps capped at 10^6.
    pub fn for_graph(graph: &DirectedGraph) -> Self {
        let tolerance = 1e-9 * graph.arc_count().max(1) as f64;
        let max_sweeps = (20 * graph.node_count().max(1)).min(1_000_000) as u32;
        Self {
            tolerance,
            max_sweeps,
        }
    }
}

/// Result of [`dmp_inf`].
#[derive(Clone, Debug, PartialEq)]
pub struct FixedPointReport {
    pub report: MarginalReport,
    pub converged: bool,
    pub sweeps: u32,
    /// `Σ |new - old|` over arcs in the last sweep.
    pub residual: f64,
    pub messages: MessageState,
}

/// Reusable buffers for the sweep kernel.
#[derive(Default)]
struct Scratch {
    prefix: Vec<f64>,
    suffix: Vec<f64>,
}

impl Scratch {
    fn new(graph: &DirectedGraph) -> Self {
        let cap = graph.max_in_degree() + 1;
        Self {
            prefix: Vec::with_capacity(cap),
            suffix: Vec::with_capacity(cap),
        }
    }
}

/// One synchronous sweep: reads `old`, writes every entry of `new`.
fn sweep(graph: &DirectedGraph, p0: &[f64], old: &[f64], new: &mut [f64], scratch: &mut Scratch) {
    let probs = graph.probs();
    for j in 0..graph.node_count() as u32 {
        let outs = graph.out_arcs(j);
        if outs.is_empty() {
            continue;
        }
        let seed = p0[j as usize];
        let keep = 1.0 - seed;
        let ins = graph.in_arcs(j);
        let degree = ins.len();

        let prefix = &mut scratch.prefix;
        let suffix = &mut scratch.suffix;
        prefix.clear();
        suffix.clear();
        prefix.push(1.0);
        let mut acc = 1.0;
        for a in ins.clone() {
            acc *= 1.0 - probs[a] * old[a];
            prefix.push(acc);
        }
        suffix.resize(degree + 1, 1.0);
        let mut acc = 1.0;
        for (k, a) in ins.enumerate().rev() {
            acc *= 1.0 - probs[a] * old[a];
            suffix[k] = acc;
        }

        for (&a, &slot) in outs.iter().zip(graph.out_reverse_slots(j)) {
            let leave_one_out = if slot == NONE {
                prefix[degree]
            } else {
                let k = slot as usize;
                prefix[k] * suffix[k + 1]
            };
            new[a as usize] = seed + keep * (1.0 - leave_one_out);
        }
    }
}

fn marginals_from(graph: &DirectedGraph, p0: &[f64], messages: &[f64]) -> Vec<f64> {
    let probs = graph.probs();
    (0..graph.node_count() as u32)
        .map(|i| {
            let q: f64 = graph
                .in_arcs(i)
                .map(|a| 1.0 - probs[a] * messages[a])
                .product();
            let seed = p0[i as usize];
            seed + (1.0 - seed) * (1.0 - q)
        })
        .collect()
}

/// Advances the messages by one time step.
pub fn dmp_step(graph: &DirectedGraph, p0: &InitialCondition, state: &MessageState) -> MessageState {
    debug_assert_eq!(state.messages.len(), graph.arc_count());
    let mut next = alloc::vec![0.0; graph.arc_count()];
    sweep(graph, p0.as_slice(), &state.messages, &mut next, &mut Scratch::new(graph));
    MessageState {
        t: state.t + 1,
        messages: next,
    }
}

/// Marginals at horizon `state.t() + 1` from the messages at `state.t()`.
pub fn dmp_marginals(graph: &DirectedGraph, p0: &InitialCondition, state: &MessageState) -> MarginalReport {
    MarginalReport::new(
        Horizon::Finite(state.t + 1),
        marginals_from(graph, p0.as_slice(), &state.messages),
    )
}

/// Messages at time `t`, starting from the initial messages.
pub fn dmp_messages(graph: &DirectedGraph, p0: &InitialCondition, t: u32) -> MessageState {
    let mut old = MessageState::initial(graph, p0).messages;
    let mut new = alloc::vec![0.0; old.len()];
    let mut scratch = Scratch::new(graph);
    for _ in 0..t {
        sweep(graph, p0.as_slice(), &old, &mut new, &mut scratch);
        core::mem::swap(&mut old, &mut new);
    }
    MessageState { t, messages: old }
}

/// Finite-horizon estimate of the marginals and the influence at `horizon`.
///
/// Messages are advanced to `horizon - 1` and the marginals read off them;
/// `horizon = 0` returns the initial condition. Isolated nodes keep `p_i(0)`.
pub fn dmp_est(graph: &DirectedGraph, p0: &InitialCondition, horizon: u32) -> MarginalReport {
    if horizon == 0 {
        return MarginalReport::new(Horizon::Finite(0), p0.as_slice().to_vec());
    }
    let state = dmp_messages(graph, p0, horizon - 1);
    dmp_marginals(graph, p0, &state)
}

/// Marginal reports for every `t` in `0..=horizon`.
pub fn dmp_trajectory(graph: &DirectedGraph, p0: &InitialCondition, horizon: u32) -> Vec<MarginalReport> {
    let mut out = Vec::with_capacity(horizon as usize + 1);
    out.push(MarginalReport::new(Horizon::Finite(0), p0.as_slice().to_vec()));
    let mut old = MessageState::initial(graph, p0).messages;
    let mut new = alloc::vec![0.0; old.len()];
    let mut scratch = Scratch::new(graph);
    for t in 1..=horizon {
        out.push(MarginalReport::new(
            Horizon::Finite(t),
            marginals_from(graph, p0.as_slice(), &old),
        ));
        if t < horizon {
            sweep(graph, p0.as_slice(), &old, &mut new, &mut scratch);
            core::mem::swap(&mut old, &mut new);
        }
    }
    out
}

/// Infinite-time estimate from the fixed point of the message equations.
///
/// Sweeps synchronously until `Σ |new - old| <= tolerance` or the sweep
/// budget runs out; `converged` reports which.
pub fn dmp_inf(graph: &DirectedGraph, p0: &InitialCondition, cfg: &FixedPointConfig) -> FixedPointReport {
    let mut old = MessageState::initial(graph, p0).messages;
    let mut new = alloc::vec![0.0; old.len()];
    let mut scratch = Scratch::new(graph);
    let mut sweeps = 0;
    let mut residual;
    let converged = loop {
        sweep(graph, p0.as_slice(), &old, &mut new, &mut scratch);
        sweeps += 1;
        residual = old.iter().zip(&new).map(|(a, b)| (a - b).abs()).sum::<f64>();
        core::mem::swap(&mut old, &mut new);
        if residual <= cfg.tolerance {
            break true;
        }
        if sweeps >= cfg.max_sweeps {
            break false;
        }
    };
    let report = MarginalReport::new(Horizon::Infinite, marginals_from(graph, p0.as_slice(), &old));
    FixedPointReport {
        report,
        converged,
        sweeps,
        residual,
        messages: MessageState {
            t: sweeps,
            messages: old,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeMode;
    use alloc::vec;

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    fn triangle(b: f64) -> DirectedGraph {
        DirectedGraph::undirected(3, [(0, 1, b), (1, 2, b), (0, 2, b)]).unwrap()
    }

    #[test]
    fn path_step_keeps_messages() {
        let g = DirectedGraph::undirected(2, [(0, 1, 0.5)]).unwrap();
        let p0 = InitialCondition::new(vec![1.0, 0.0]).unwrap();
        let s1 = dmp_step(&g, &p0, &MessageState::initial(&g, &p0));
        assert_eq!(s1.t(), 1);
        assert_eq!(s1.messages()[g.find_arc(0, 1).unwrap() as usize], 1.0);
        assert_eq!(s1.messages()[g.find_arc(1, 0).unwrap() as usize], 0.0);
    }

    #[test]
    fn zero_probabilities_freeze_messages() {
        let g = DirectedGraph::undirected(4, [(0, 1, 0.0), (1, 2, 0.0), (2, 3, 0.0), (3, 0, 0.0)]).unwrap();
        let p0 = InitialCondition::new(vec![0.3, 1.0, 0.0, 0.7]).unwrap();
        let init = MessageState::initial(&g, &p0);
        assert_eq!(dmp_messages(&g, &p0, 5).messages(), init.messages());
        let r = dmp_est(&g, &p0, 5);
        assert_eq!(r.marginals, p0.as_slice());
    }

    #[test]
    fn triangle_probabilistic_seed_step() {
        let g = triangle(1.0);
        let p0 = InitialCondition::new(vec![0.5, 0.0, 0.0]).unwrap();
        let s1 = dmp_step(&g, &p0, &MessageState::initial(&g, &p0));
        let m = |u, v| s1.messages()[g.find_arc(u, v).unwrap() as usize];
        assert_eq!(m(2, 1), 0.5);
        assert_eq!(m(1, 2), 0.5);
        assert_eq!(m(0, 1), 0.5);
        assert_eq!(m(0, 2), 0.5);
    }

    #[test]
    fn triangle_overestimates_at_horizon_two() {
        let g = triangle(1.0);
        let p0 = InitialCondition::new(vec![0.5, 0.0, 0.0]).unwrap();
        let r = dmp_est(&g, &p0, 2);
        assert!(close(&r.marginals, &[0.5, 0.75, 0.75]));
        assert!((r.sigma - 2.0).abs() < 1e-12);
    }

    #[test]
    fn path_marginals() {
        let g = DirectedGraph::undirected(2, [(0, 1, 0.5)]).unwrap();
        let p0 = InitialCondition::new(vec![1.0, 0.0]).unwrap();
        let r = dmp_est(&g, &p0, 1);
        assert!(close(&r.marginals, &[1.0, 0.5]));
        assert_eq!(r.sigma, 1.5);

        let g = DirectedGraph::undirected(3, [(0, 1, 0.5), (1, 2, 0.5)]).unwrap();
        let p0 = InitialCondition::new(vec![1.0, 0.0, 0.0]).unwrap();
        let r = dmp_est(&g, &p0, 2);
        assert!(close(&r.marginals, &[1.0, 0.5, 0.25]));
        assert_eq!(r.sigma, 1.75);
    }

    #[test]
    fn horizon_zero_is_initial_condition() {
        let g = triangle(0.7);
        let p0 = InitialCondition::new(vec![0.2, 0.9, 0.0]).unwrap();
        let r = dmp_est(&g, &p0, 0);
        assert_eq!(r.marginals, p0.as_slice());
        assert_eq!(r.sigma, p0.budget());
    }

    #[test]
    fn star_leaves() {
        let leaves = 5u32;
        let g = DirectedGraph::undirected(leaves as usize + 1, (1..=leaves).map(|l| (0, l, 0.3))).unwrap();
        let mut p = vec![0.0; leaves as usize + 1];
        p[0] = 1.0;
        let p0 = InitialCondition::new(p).unwrap();
        let r = dmp_est(&g, &p0, 1);
        for l in 1..=leaves as usize {
            assert!((r.marginals[l] - 0.3).abs() < 1e-15);
        }
        assert!((r.sigma - (1.0 + 0.3 * leaves as f64)).abs() < 1e-12);
    }

    #[test]
    fn all_seeded_saturates() {
        let g = triangle(0.4);
        let p0 = InitialCondition::new(vec![1.0; 3]).unwrap();
        for t in 0..5 {
            assert_eq!(dmp_est(&g, &p0, t).sigma, 3.0);
        }
    }

    #[test]
    fn isolated_node_keeps_initial_probability() {
        let g = DirectedGraph::from_arcs(3, EdgeMode::Directed, [(0, 1, 0.9)]).unwrap();
        let p0 = InitialCondition::new(vec![1.0, 0.0, 0.4]).unwrap();
        let r = dmp_est(&g, &p0, 3);
        assert_eq!(r.marginals[2], 0.4);
    }

    #[test]
    fn fixed_point_on_path() {
        let g = DirectedGraph::undirected(3, [(0, 1, 0.5), (1, 2, 0.5)]).unwrap();
        let p0 = InitialCondition::new(vec![1.0, 0.0, 0.0]).unwrap();
        let out = dmp_inf(&g, &p0, &FixedPointConfig::new(1e-12, 100).unwrap());
        assert!(out.converged);
        assert_eq!(out.sweeps, 2);
        assert!(close(&out.report.marginals, &[1.0, 0.5, 0.25]));
        assert_eq!(out.report.horizon, Horizon::Infinite);
    }

    #[test]
    fn fixed_point_frozen_when_b_zero() {
        let g = triangle(0.0);
        let p0 = InitialCondition::new(vec![0.5, 0.25, 0.0]).unwrap();
        let out = dmp_inf(&g, &p0, &FixedPointConfig::for_graph(&g));
        assert!(out.converged);
        assert_eq!(out.sweeps, 1);
        assert_eq!(out.report.marginals, p0.as_slice());
        assert_eq!(out.report.sigma, p0.budget());
    }

    #[test]
    fn fixed_point_cycle_full_reach() {
        let g = DirectedGraph::undirected(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap();
        let p0 = InitialCondition::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let out = dmp_inf(&g, &p0, &FixedPointConfig::new(1e-12, 100).unwrap());
        assert!(out.converged);
        assert!(close(&out.report.marginals, &[1.0; 4]));
        assert_eq!(out.report.sigma, 4.0);
    }

    #[test]
    fn non_convergence_is_flagged() {
        let g = DirectedGraph::undirected(3, [(0, 1, 0.9), (1, 2, 0.9), (0, 2, 0.9)]).unwrap();
        let p0 = InitialCondition::new(vec![0.1, 0.0, 0.0]).unwrap();
        let out = dmp_inf(&g, &p0, &FixedPointConfig::new(1e-300, 3).unwrap());
        assert!(!out.converged);
        assert_eq!(out.sweeps, 3);
        assert!(out.residual > 0.0);
    }

    #[test]
    fn config_validation() {
        assert!(FixedPointConfig::new(0.0, 10).is_err());
        assert!(FixedPointConfig::new(f64::NAN, 10).is_err());
        assert!(FixedPointConfig::new(1e-9, 0).is_err());
        let g = triangle(0.5);
        let cfg = FixedPointConfig::for_graph(&g);
        assert!((cfg.tolerance - 6e-9).abs() < 1e-20);
        assert_eq!(cfg.max_sweeps, 60);
    }

    #[test]
    fn trajectory_matches_pointwise_estimates() {
        let g = DirectedGraph::undirected(
            5,
            [(0, 1, 0.3), (1, 2, 0.8), (2, 0, 0.5), (2, 3, 0.6), (3, 4, 0.9)],
        )
        .unwrap();
        let p0 = InitialCondition::new(vec![0.4, 0.0, 0.1, 0.0, 0.0]).unwrap();
        let traj = dmp_trajectory(&g, &p0, 6);
        assert_eq!(traj.len(), 7);
        for (t, r) in traj.iter().enumerate() {
            assert_eq!(r, &dmp_est(&g, &p0, t as u32));
        }
    }
}
