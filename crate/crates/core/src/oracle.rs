//! Exact marginals by brute-force enumeration, for small graphs.
//!
//! For IC, every assignment of the uncertain live-arc indicators is
//! enumerated with its probability. Node `i` stays inactive through time `T`
//! exactly when no initially active node reaches it within `T` live arcs, so
//!
//! ```text
//! p_i(T) = 1 - (1 - p_i(0)) * E_d[ prod_{l in N_T(i, d)} (1 - p_l(0)) ]
//! ```
//!
//! where `N_T(i, d)` is the set of nodes with a live path of length at most
//! `T` to `i`. The initial condition is handled analytically, so
//! probabilistic seeding costs nothing extra. Cavity messages apply the same
//! formula to the graph with the receiving node removed.
//!
//! Arcs with `b` equal to 0 or 1 are fixed. Under [`Coupling::Auto`] the two
//! arcs of an edge with equal probabilities share one indicator, which
//! leaves single-target reachability unchanged in distribution: a
//! breadth-first search toward one target inspects each edge at most once.
//! [`Coupling::PerArc`] gives every arc its own indicator.
//!
//! Each node is handled separately, enumerating only the indicators of arcs
//! that could lie on a path of at most `T` arcs into it; the others sum out.
//! The variable cap applies to that per-node count.
//!
//! The LT oracle propagates the exact distribution over activation states.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, Horizon, InitialCondition, MarginalReport, NodeId};
use crate::lt::{masked_sum, LtParameters};

/// Default cap on the number of indicators enumerated for one node.
pub const DEFAULT_VARIABLE_CAP: usize = 20;
/// Node sets are bitmasks.
pub const MAX_NODES: usize = 64;
/// The LT oracle stores a probability for each of the `2^N` states.
pub const MAX_LT_NODES: usize = 16;

/// How live-arc indicators are grouped into independent variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Coupling {
    /// Reverse arcs with equal probability share one indicator.
    #[default]
    Auto,
    /// One indicator per arc.
    PerArc,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleOptions {
    pub coupling: Coupling,
    pub max_variables: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            coupling: Coupling::Auto,
            max_variables: DEFAULT_VARIABLE_CAP,
        }
    }
}

struct Variable {
    prob: f64,
    // (source, target) pairs switched on together.
    arcs: [(NodeId, NodeId); 2],
    len: usize,
}

/// Uncertain live-arc indicators and the arcs that are fixed live.
struct Enumeration {
    fixed_in: Vec<u64>,
    /// Sources of every arc with `b > 0`, per target.
    possible_in: Vec<u64>,
    variables: Vec<Variable>,
    cap: usize,
}

impl Enumeration {
    fn new(graph: &DirectedGraph, opts: &OracleOptions) -> Result<Self> {
        let n = graph.node_count();
        if n > MAX_NODES {
            return Err(Error::OracleTooLarge {
                what: "nodes",
                needed: n,
                cap: MAX_NODES,
            });
        }
        let mut fixed_in = alloc::vec![0u64; n];
        let mut possible_in = alloc::vec![0u64; n];
        let mut variables = Vec::new();
        for (a, u, v, b) in graph.arcs() {
            if b <= 0.0 {
                continue;
            }
            possible_in[v as usize] |= 1 << u;
            if b >= 1.0 {
                fixed_in[v as usize] |= 1 << u;
                continue;
            }
            match graph.reverse(a) {
                Some(r) if opts.coupling == Coupling::Auto && graph.prob(r) == b => {
                    if r < a {
                        continue;
                    }
                    variables.push(Variable {
                        prob: b,
                        arcs: [(u, v), (v, u)],
                        len: 2,
                    });
                }
                _ => variables.push(Variable {
                    prob: b,
                    arcs: [(u, v), (u, v)],
                    len: 1,
                }),
            }
        }
        Ok(Self {
            fixed_in,
            possible_in,
            variables,
            cap: opts.max_variables.min(40),
        })
    }

    /// `E_d[ prod keep[l] ]` over the nodes `l != target` with a live path of
    /// at most `layers` arcs into `target` inside `allowed`.
    ///
    /// Only indicators of arcs that could sit on such a path are enumerated;
    /// the rest sum out.
    fn expected_inactive(&self, keep: &[f64], target: usize, layers: u32, allowed: u64) -> Result<f64> {
        if layers == 0 {
            return Ok(1.0);
        }
        // Arc u -> v can matter only if v reaches the target within
        // `layers - 1` arcs without passing through u: activation times are
        // shortest live-path lengths, and shortest paths are simple.
        let n = self.possible_in.len();
        let heads_without: Vec<u64> = (0..n)
            .map(|u| match allowed >> u & 1 == 1 && u != target {
                true => reaching(&self.possible_in, target, layers - 1, allowed & !(1 << u)),
                false => 0,
            })
            .collect();
        let relevant: Vec<&Variable> = self
            .variables
            .iter()
            .filter(|var| {
                var.arcs[..var.len]
                    .iter()
                    .any(|&(u, v)| heads_without[u as usize] >> v & 1 == 1)
            })
            .collect();
        if relevant.len() > self.cap {
            return Err(Error::OracleTooLarge {
                what: "live-arc indicators",
                needed: relevant.len(),
                cap: self.cap,
            });
        }
        let mut live_in = self.fixed_in.clone();
        let mut total = 0.0;
        for mask in 0u64..1 << relevant.len() {
            live_in.copy_from_slice(&self.fixed_in);
            let mut weight = 1.0;
            for (k, var) in relevant.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    weight *= var.prob;
                    for &(u, v) in &var.arcs[..var.len] {
                        live_in[v as usize] |= 1 << u;
                    }
                } else {
                    weight *= 1.0 - var.prob;
                }
            }
            let others = reaching(&live_in, target, layers, allowed) & !(1 << target);
            total += weight * inactive_product(keep, others);
        }
        Ok(total)
    }
}

/// Nodes with a live path of at most `layers` arcs into `target`, staying
/// inside `allowed`. Includes `target`.
#[inline]
fn reaching(live_in: &[u64], target: usize, layers: u32, allowed: u64) -> u64 {
    let mut reach = 1u64 << target;
    let mut frontier = reach;
    for _ in 0..layers {
        let mut next = 0u64;
        let mut rest = frontier;
        while rest != 0 {
            let u = rest.trailing_zeros() as usize;
            next |= live_in[u];
            rest &= rest - 1;
        }
        next &= allowed & !reach;
        if next == 0 {
            break;
        }
        reach |= next;
        frontier = next;
    }
    reach
}

#[inline]
fn inactive_product(keep: &[f64], set: u64) -> f64 {
    let mut prod = 1.0;
    let mut rest = set;
    while rest != 0 {
        prod *= keep[rest.trailing_zeros() as usize];
        rest &= rest - 1;
    }
    prod
}

/// Exact IC marginals at `horizon`.
pub fn exact_marginals(
    graph: &DirectedGraph,
    p0: &InitialCondition,
    horizon: Horizon,
    opts: &OracleOptions,
) -> Result<MarginalReport> {
    p0.check_len(graph)?;
    let enumeration = Enumeration::new(graph, opts)?;
    let n = graph.node_count();
    let layers = horizon.layers(n);
    let keep: Vec<f64> = p0.as_slice().iter().map(|p| 1.0 - p).collect();
    let marginals = (0..n)
        .map(|i| {
            let q = enumeration.expected_inactive(&keep, i, layers, u64::MAX)?;
            let pi = p0.as_slice()[i];
            Ok(pi + (1.0 - pi) * (1.0 - q))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(MarginalReport::new(horizon, marginals))
}

/// Exact cavity messages at time `t`, indexed by arc id.
///
/// The value on arc `j -> i` is the probability that `j` is active at `t`
/// in the graph with node `i` and its arcs removed.
pub fn exact_cavity_messages(
    graph: &DirectedGraph,
    p0: &InitialCondition,
    t: u32,
    opts: &OracleOptions,
) -> Result<Vec<f64>> {
    p0.check_len(graph)?;
    let enumeration = Enumeration::new(graph, opts)?;
    let keep: Vec<f64> = p0.as_slice().iter().map(|p| 1.0 - p).collect();
    graph
        .arcs()
        .map(|(_, j, i, _)| {
            let q = enumeration.expected_inactive(&keep, j as usize, t, !(1u64 << i))?;
            let pj = p0.get(j);
            Ok(pj + (1.0 - pj) * (1.0 - q))
        })
        .collect()
}

/// Bitmask of inactive nodes in `state` that are eligible to activate.
fn lt_eligible(graph: &DirectedGraph, params: &LtParameters, weights: &[Vec<f64>], state: u64) -> u64 {
    let mut eligible = 0u64;
    for i in 0..graph.node_count() {
        if state >> i & 1 == 1 || params.eta(i as NodeId) <= 0.0 {
            continue;
        }
        let mut mask = 0u64;
        for (k, a) in graph.in_arcs(i as NodeId).enumerate() {
            if state >> graph.source(a as u32) & 1 == 1 {
                mask |= 1 << k;
            }
        }
        if masked_sum(&weights[i], mask) >= params.theta(i as NodeId) {
            eligible |= 1 << i;
        }
    }
    eligible
}

/// Exact marginals of the synchronous stochastic LT dynamics.
///
/// Propagates the full distribution over the `2^N` activation states. At an
/// infinite horizon every eligible node with `eta > 0` eventually fires, so
/// each initial state maps to its deterministic threshold closure.
pub fn lt_exact_marginals(
    graph: &DirectedGraph,
    params: &LtParameters,
    p0: &InitialCondition,
    horizon: Horizon,
) -> Result<MarginalReport> {
    p0.check_len(graph)?;
    let n = graph.node_count();
    if n > MAX_LT_NODES {
        return Err(Error::OracleTooLarge {
            what: "nodes",
            needed: n,
            cap: MAX_LT_NODES,
        });
    }
    let weights: Vec<Vec<f64>> = (0..n as NodeId)
        .map(|i| graph.in_arcs(i).map(|a| graph.probs()[a]).collect())
        .collect();
    let states = 1usize << n;
    let mut dist = alloc::vec![0.0; states];
    for (s, slot) in dist.iter_mut().enumerate() {
        *slot = (0..n)
            .map(|i| {
                let p = p0.as_slice()[i];
                if s >> i & 1 == 1 {
                    p
                } else {
                    1.0 - p
                }
            })
            .product();
    }

    match horizon {
        Horizon::Finite(t) => {
            let mut next = alloc::vec![0.0; states];
            for _ in 0..t {
                next.iter_mut().for_each(|x| *x = 0.0);
                for (s, &mass) in dist.iter().enumerate() {
                    if mass == 0.0 {
                        continue;
                    }
                    let eligible = lt_eligible(graph, params, &weights, s as u64);
                    // Every subset of the eligible nodes may fire.
                    let mut fired = eligible;
                    loop {
                        let mut w = mass;
                        let mut rest = eligible;
                        while rest != 0 {
                            let i = rest.trailing_zeros() as usize;
                            let eta = params.eta(i as NodeId);
                            w *= if fired >> i & 1 == 1 { eta } else { 1.0 - eta };
                            rest &= rest - 1;
                        }
                        next[s | fired as usize] += w;
                        if fired == 0 {
                            break;
                        }
                        fired = (fired - 1) & eligible;
                    }
                }
                core::mem::swap(&mut dist, &mut next);
            }
        }
        Horizon::Infinite => {
            let mut closed = alloc::vec![0.0; states];
            for (s, &mass) in dist.iter().enumerate() {
                let mut state = s as u64;
                loop {
                    let eligible = lt_eligible(graph, params, &weights, state);
                    if eligible == 0 {
                        break;
                    }
                    state |= eligible;
                }
                closed[state as usize] += mass;
            }
            dist = closed;
        }
    }

    let mut marginals = alloc::vec![0.0; n];
    for (s, &mass) in dist.iter().enumerate() {
        for (i, m) in marginals.iter_mut().enumerate() {
            if s >> i & 1 == 1 {
                *m += mass;
            }
        }
    }
    Ok(MarginalReport::new(horizon, marginals))
}
