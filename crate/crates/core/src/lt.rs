//! Message-passing for the stochastic Linear Threshold model.
//!
//! Node `i` with threshold `theta_i` becomes eligible once the weights `b[k->i]`
//! of its active in-neighbors sum to at least `theta_i`; an eligible node
//! activates with probability `eta_i` per step and stays active forever.
//!
//! With `P_i(t)` the probability that independent neighbors, each active
//! with its message `m[k->i](t)`, meet the threshold, the update is
//!
//! ```text
//! p_i(t+1) = (1 - eta_i) p_i(t) + eta_i [p_i(0) + (1 - p_i(0)) P_i(t)]
//! ```
//!
//! and `m[i->j](t+1)` is the same expression with `j` removed from the
//! neighborhood. For nodes with `p_i(0) = 0` this is the usual LT-DMP
//! recursion; the `p_i(0)` term keeps initially active nodes active.
//! Exact on trees. No upper-bound property holds for this model.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{check_probability, DirectedGraph, Horizon, InitialCondition, MarginalReport, NodeId, NONE};

pub const DEFAULT_THETA: f64 = 0.5;
pub const DEFAULT_ETA: f64 = 1.0;
pub const DEFAULT_DEGREE_CAP: usize = 20;

/// Slack on the incoming weight sum of a node.
const WEIGHT_SUM_SLACK: f64 = 1e-12;
/// Partial sums farther than this from the threshold decide a whole subtree.
const PRUNE_MARGIN: f64 = 1e-9;

/// Thresholds and activation probabilities; the weights are the arc probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct LtParameters {
    theta: Vec<f64>,
    eta: Vec<f64>,
}

impl LtParameters {
    pub fn new(graph: &DirectedGraph, theta: Vec<f64>, eta: Vec<f64>) -> Result<Self> {
        let n = graph.node_count();
        for v in [&theta, &eta] {
            if v.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: v.len(),
                });
            }
        }
        for &x in &theta {
            check_probability("theta", x)?;
        }
        for &x in &eta {
            check_probability("eta", x)?;
        }
        for i in 0..n as NodeId {
            let sum: f64 = graph.in_arcs(i).map(|a| graph.probs()[a]).sum();
            if sum > 1.0 + WEIGHT_SUM_SLACK {
                return Err(Error::WeightSumExceeded { node: i, sum });
            }
        }
        Ok(Self { theta, eta })
    }

    pub fn uniform(graph: &DirectedGraph, theta: f64, eta: f64) -> Result<Self> {
        let n = graph.node_count();
        Self::new(graph, alloc::vec![theta; n], alloc::vec![eta; n])
    }

    #[inline]
    pub fn theta(&self, node: NodeId) -> f64 {
        self.theta[node as usize]
    }

    #[inline]
    pub fn eta(&self, node: NodeId) -> f64 {
        self.eta[node as usize]
    }

    pub fn thetas(&self) -> &[f64] {
        &self.theta
    }

    pub fn etas(&self) -> &[f64] {
        &self.eta
    }
}

/// Marginals `p_i(t)` and messages `m[i->j](t)` (by arc id).
#[derive(Clone, Debug, PartialEq)]
pub struct LtState {
    pub t: u32,
    pub marginals: Vec<f64>,
    pub messages: Vec<f64>,
}

impl LtState {
    pub fn initial(graph: &DirectedGraph, p0: &InitialCondition) -> Self {
        Self {
            t: 0,
            marginals: p0.as_slice().to_vec(),
            messages: graph.sources().iter().map(|&i| p0.get(i)).collect(),
        }
    }
}

/// Sum of `weights[k]` over the set bits of `mask`, in index order.
///
/// Every threshold test in the crate (DMP, Monte-Carlo, exact oracle) sums
/// active weights in in-arc order so that ties resolve identically.
#[inline]
pub(crate) fn masked_sum(weights: &[f64], mask: u64) -> f64 {
    let mut sum = 0.0;
    let mut rest = mask;
    while rest != 0 {
        let k = rest.trailing_zeros() as usize;
        sum += weights[k];
        rest &= rest - 1;
    }
    sum
}

/// Probability that `Σ weights[k] x_k >= theta` for independent
/// `x_k ~ Bernoulli(probs[k])`.
///
/// Depth-first over the neighbors sorted by decreasing weight; a subtree is
/// skipped once its partial sum settles the comparison with a margin, and
/// leaves that are not settled use the canonical in-order sum.
pub(crate) fn threshold_probability(weights: &[f64], probs: &[f64], theta: f64) -> f64 {
    debug_assert_eq!(weights.len(), probs.len());
    debug_assert!(weights.len() < 64);
    if theta <= 0.0 {
        return 1.0;
    }
    let n = weights.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
    let mut tail = alloc::vec![0.0; n + 1];
    for d in (0..n).rev() {
        tail[d] = tail[d + 1] + weights[order[d]];
    }
    let search = ThresholdSearch {
        weights,
        probs,
        order: &order,
        tail: &tail,
        theta,
    };
    search.visit(0, 0, 0.0, 1.0)
}

struct ThresholdSearch<'a> {
    weights: &'a [f64],
    probs: &'a [f64],
    order: &'a [usize],
    tail: &'a [f64],
    theta: f64,
}

impl ThresholdSearch<'_> {
    fn visit(&self, depth: usize, mask: u64, partial: f64, weight: f64) -> f64 {
        if partial >= self.theta + PRUNE_MARGIN {
            return weight;
        }
        if partial + self.tail[depth] < self.theta - PRUNE_MARGIN {
            return 0.0;
        }
        if depth == self.order.len() {
            return if masked_sum(self.weights, mask) >= self.theta {
                weight
            } else {
                0.0
            };
        }
        let k = self.order[depth];
        let p = self.probs[k];
        let mut acc = 0.0;
        if p > 0.0 {
            acc += self.visit(depth + 1, mask | (1 << k), partial + self.weights[k], weight * p);
        }
        if p < 1.0 {
            acc += self.visit(depth + 1, mask, partial, weight * (1.0 - p));
        }
        acc
    }
}

#[cfg(debug_assertions)]
fn check_normalization(probs: &[f64]) {
    if probs.len() > 12 {
        return;
    }
    let total: f64 = (0u64..1 << probs.len())
        .map(|mask| {
            probs
                .iter()
                .enumerate()
                .map(|(k, &p)| if mask >> k & 1 == 1 { p } else { 1.0 - p })
                .product::<f64>()
        })
        .sum();
    debug_assert!((total - 1.0).abs() <= 1e-12, "configuration weights sum to {total}");
}

#[cfg(not(debug_assertions))]
fn check_normalization(_: &[f64]) {}

fn check_degrees(graph: &DirectedGraph, cap: usize) -> Result<()> {
    let cap = cap.min(63);
    for i in 0..graph.node_count() as NodeId {
        let degree = graph.in_degree(i);
        if degree > cap {
            return Err(Error::DegreeCapExceeded { node: i, degree, cap });
        }
    }
    Ok(())
}

fn step_unchecked(
    graph: &DirectedGraph,
    params: &LtParameters,
    p0: &InitialCondition,
    state: &LtState,
) -> LtState {
    let probs = graph.probs();
    let mut marginals = Vec::with_capacity(graph.node_count());
    let mut messages = alloc::vec![0.0; graph.arc_count()];
    let mut weights = Vec::new();
    let mut incoming = Vec::new();
    for i in 0..graph.node_count() as NodeId {
        let ins = graph.in_arcs(i);
        weights.clear();
        incoming.clear();
        weights.extend_from_slice(&probs[ins.clone()]);
        incoming.extend_from_slice(&state.messages[ins]);
        check_normalization(&incoming);

        let eta = params.eta(i);
        let theta = params.theta(i);
        let seed = p0.get(i);
        let update = |previous: f64, pass: f64| (1.0 - eta) * previous + eta * (seed + (1.0 - seed) * pass);

        let pass = threshold_probability(&weights, &incoming, theta);
        marginals.push(update(state.marginals[i as usize], pass));

        for (&a, &slot) in graph.out_arcs(i).iter().zip(graph.out_reverse_slots(i)) {
            let pass = if slot == NONE {
                pass
            } else {
                let k = slot as usize;
                let w: Vec<f64> = weights.iter().enumerate().filter(|&(x, _)| x != k).map(|(_, &w)| w).collect();
                let p: Vec<f64> = incoming.iter().enumerate().filter(|&(x, _)| x != k).map(|(_, &p)| p).collect();
                threshold_probability(&w, &p, theta)
            };
            messages[a as usize] = update(state.messages[a as usize], pass);
        }
    }
    LtState {
        t: state.t + 1,
        marginals,
        messages,
    }
}

/// One synchronous update of marginals and messages.
///
/// Fails when a node's in-degree exceeds `degree_cap` (at most 63).
pub fn lt_step(
    graph: &DirectedGraph,
    params: &LtParameters,
    p0: &InitialCondition,
    state: &LtState,
    degree_cap: usize,
) -> Result<LtState> {
    check_degrees(graph, degree_cap)?;
    Ok(step_unchecked(graph, params, p0, state))
}

/// Marginals after `horizon` steps from the initial condition.
pub fn lt_estimate(
    graph: &DirectedGraph,
    params: &LtParameters,
    p0: &InitialCondition,
    horizon: u32,
    degree_cap: usize,
) -> Result<MarginalReport> {
    p0.check_len(graph)?;
    check_degrees(graph, degree_cap)?;
    let mut state = LtState::initial(graph, p0);
    for _ in 0..horizon {
        state = step_unchecked(graph, params, p0, &state);
    }
    Ok(MarginalReport::new(Horizon::Finite(horizon), state.marginals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeMode;
    use alloc::vec;

    fn single_arc(b: f64) -> DirectedGraph {
        DirectedGraph::from_arcs(2, EdgeMode::Directed, [(0, 1, b)]).unwrap()
    }

    #[test]
    fn single_neighbor_step() {
        let g = single_arc(1.0);
        let params = LtParameters::new(&g, vec![0.5, 0.5], vec![1.0, 1.0]).unwrap();
        let p0 = InitialCondition::zeros(2);
        let state = LtState {
            t: 3,
            marginals: vec![0.6, 0.0],
            messages: vec![0.6],
        };
        let next = lt_step(&g, &params, &p0, &state, DEFAULT_DEGREE_CAP).unwrap();
        assert!((next.marginals[1] - 0.6).abs() < 1e-15);
        assert_eq!(next.t, 4);
    }

    #[test]
    fn eta_zero_freezes_node() {
        let g = single_arc(1.0);
        let params = LtParameters::new(&g, vec![0.5, 0.5], vec![1.0, 0.0]).unwrap();
        let p0 = InitialCondition::zeros(2);
        let state = LtState {
            t: 0,
            marginals: vec![1.0, 0.25],
            messages: vec![1.0],
        };
        let next = lt_step(&g, &params, &p0, &state, DEFAULT_DEGREE_CAP).unwrap();
        assert_eq!(next.marginals[1], 0.25);
    }

    #[test]
    fn zero_threshold_always_passes() {
        let g = single_arc(0.3);
        let params = LtParameters::new(&g, vec![0.5, 0.0], vec![1.0, 1.0]).unwrap();
        let p0 = InitialCondition::zeros(2);
        let next = lt_step(&g, &params, &p0, &LtState::initial(&g, &p0), DEFAULT_DEGREE_CAP).unwrap();
        assert_eq!(next.marginals[1], 1.0);
    }

    #[test]
    fn deterministic_path() {
        let g = single_arc(1.0);
        let p0 = InitialCondition::new(vec![1.0, 0.0]).unwrap();
        let params = LtParameters::new(&g, vec![0.5, 0.5], vec![1.0, 1.0]).unwrap();
        let r = lt_estimate(&g, &params, &p0, 1, DEFAULT_DEGREE_CAP).unwrap();
        assert_eq!(r.marginals, vec![1.0, 1.0]);
        assert_eq!(r.sigma, 2.0);

        let params = LtParameters::new(&g, vec![0.5, 0.5], vec![1.0, 0.5]).unwrap();
        let r = lt_estimate(&g, &params, &p0, 1, DEFAULT_DEGREE_CAP).unwrap();
        assert_eq!(r.marginals[1], 0.5);

        let r = lt_estimate(&g, &params, &p0, 0, DEFAULT_DEGREE_CAP).unwrap();
        assert_eq!(r.sigma, 1.0);
    }

    #[test]
    fn unreachable_threshold_never_fires() {
        let g = DirectedGraph::undirected(3, [(0, 1, 0.2), (1, 2, 0.2)]).unwrap();
        let p0 = InitialCondition::new(vec![1.0, 0.0, 1.0]).unwrap();
        let params = LtParameters::new(&g, vec![0.5, 0.9, 0.5], vec![1.0; 3]).unwrap();
        let r = lt_estimate(&g, &params, &p0, 4, DEFAULT_DEGREE_CAP).unwrap();
        assert_eq!(r.marginals[1], 0.0);
    }

    #[test]
    fn threshold_probability_matches_enumeration() {
        let weights = [0.1, 0.3, 0.2, 0.25, 0.15];
        let probs = [0.5, 0.2, 0.9, 0.4, 0.7];
        for theta in [0.0, 0.1, 0.3, 0.35, 0.5, 0.6, 0.75, 1.0, 1.01] {
            let brute: f64 = (0u64..32)
                .filter(|&m| masked_sum(&weights, m) >= theta)
                .map(|m| {
                    (0..5)
                        .map(|k| if m >> k & 1 == 1 { probs[k] } else { 1.0 - probs[k] })
                        .product::<f64>()
                })
                .sum();
            let fast = threshold_probability(&weights, &probs, theta);
            assert!((brute - fast).abs() < 1e-14, "theta {theta}: {brute} vs {fast}");
        }
    }

    #[test]
    fn ties_pass() {
        // 0.1 + 0.2 rounds above 0.3; the in-order sum is the reference.
        let w = [0.1, 0.2];
        let theta = 0.1 + 0.2;
        assert_eq!(threshold_probability(&w, &[1.0, 1.0], theta), 1.0);
        assert_eq!(threshold_probability(&[0.5], &[1.0], 0.5), 1.0);
    }

    #[test]
    fn weight_sum_checked() {
        let g = DirectedGraph::from_arcs(3, EdgeMode::Directed, [(0, 2, 0.6), (1, 2, 0.5)]).unwrap();
        let err = LtParameters::uniform(&g, 0.5, 1.0).unwrap_err();
        assert!(matches!(err, Error::WeightSumExceeded { node: 2, .. }));
    }

    #[test]
    fn degree_cap_is_enforced() {
        let g = DirectedGraph::from_arcs(4, EdgeMode::Directed, [(0, 3, 0.2), (1, 3, 0.2), (2, 3, 0.2)]).unwrap();
        let params = LtParameters::uniform(&g, 0.5, 1.0).unwrap();
        let p0 = InitialCondition::zeros(4);
        let err = lt_estimate(&g, &params, &p0, 2, 2).unwrap_err();
        assert_eq!(err, Error::DegreeCapExceeded { node: 3, degree: 3, cap: 2 });
    }
}
