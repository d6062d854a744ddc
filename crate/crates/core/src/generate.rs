//! Synthetic graphs, transmission probabilities and seed sets.
//!
//! All generators are driven by a ChaCha8 generator seeded from the spec's
//! `seed`, so a spec always produces the same graph.

use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::vec::Vec;
use core::cmp::Reverse;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{check_probability, DirectedGraph, EdgeMode, GraphBuilder, InitialCondition, NodeId};

pub const MAX_PAIRING_ATTEMPTS: u32 = 1000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    /// Uniform simple `degree`-regular graph via the pairing model.
    RandomRegular { nodes: usize, degree: usize },
    /// `G(n, p)`.
    ErdosRenyi { nodes: usize, edge_prob: f64 },
    /// Uniform labelled tree from a random Prüfer sequence.
    RandomTree { nodes: usize },
    Cycle { nodes: usize },
    Path { nodes: usize },
    /// Node 0 joined to every other node.
    Star { nodes: usize },
}

/// Distribution of the transmission probabilities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProbDist {
    Constant(f64),
    Uniform { lo: f64, hi: f64 },
}

impl ProbDist {
    fn validate(&self) -> Result<()> {
        match *self {
            ProbDist::Constant(c) => check_probability("b", c),
            ProbDist::Uniform { lo, hi } => {
                check_probability("b lower bound", lo)?;
                check_probability("b upper bound", hi)?;
                if lo > hi {
                    return Err(Error::Infeasible(format!("empty b range [{lo}, {hi}]")));
                }
                Ok(())
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ProbDist::Constant(c) => c,
            ProbDist::Uniform { lo, hi } => (lo + (hi - lo) * rng.random::<f64>()).clamp(lo, hi),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenSpec {
    pub family: Family,
    pub b: ProbDist,
    /// One draw per edge shared by both arcs, or one draw per arc.
    pub symmetric: bool,
    pub seed: u64,
}

fn random_regular<R: Rng>(nodes: usize, degree: usize, rng: &mut R) -> Result<Vec<(NodeId, NodeId)>> {
    if (nodes * degree) % 2 != 0 {
        return Err(Error::Infeasible(format!(
            "regular graph needs an even degree sum, got {nodes} * {degree}"
        )));
    }
    if degree >= nodes.max(1) && !(nodes == 0 || degree == 0) {
        return Err(Error::Infeasible(format!(
            "degree {degree} needs more than {nodes} nodes"
        )));
    }
    let mut points: Vec<NodeId> = (0..nodes as NodeId)
        .flat_map(|v| core::iter::repeat(v).take(degree))
        .collect();
    'attempt: for _ in 0..MAX_PAIRING_ATTEMPTS {
        points.shuffle(rng);
        let mut edges: Vec<(NodeId, NodeId)> = Vec::with_capacity(points.len() / 2);
        for pair in points.chunks_exact(2) {
            let (u, v) = (pair[0], pair[1]);
            if u == v {
                continue 'attempt;
            }
            edges.push(if u < v { (u, v) } else { (v, u) });
        }
        edges.sort_unstable();
        if edges.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        return Ok(edges);
    }
    Err(Error::PairingRetriesExhausted {
        attempts: MAX_PAIRING_ATTEMPTS,
    })
}

/// `G(n, p)` by geometric skipping over the `n (n - 1) / 2` candidate pairs.
fn erdos_renyi<R: Rng>(nodes: usize, p: f64, rng: &mut R) -> Result<Vec<(NodeId, NodeId)>> {
    check_probability("edge probability", p)?;
    let mut edges = Vec::new();
    if p == 0.0 || nodes < 2 {
        return Ok(edges);
    }
    if p == 1.0 {
        for u in 0..nodes as NodeId {
            for v in u + 1..nodes as NodeId {
                edges.push((u, v));
            }
        }
        return Ok(edges);
    }
    let log_q = libm::log(1.0 - p);
    let n = nodes as i64;
    let (mut v, mut w) = (1i64, -1i64);
    while v < n {
        let r: f64 = rng.random();
        w += 1 + libm::floor(libm::log(1.0 - r) / log_q) as i64;
        while w >= v && v < n {
            w -= v;
            v += 1;
        }
        if v < n {
            edges.push((w as NodeId, v as NodeId));
        }
    }
    edges.sort_unstable();
    Ok(edges)
}

fn random_tree<R: Rng>(nodes: usize, rng: &mut R) -> Vec<(NodeId, NodeId)> {
    match nodes {
        0 | 1 => return Vec::new(),
        2 => return alloc::vec![(0, 1)],
        _ => {}
    }
    let prufer: Vec<NodeId> = (0..nodes - 2).map(|_| rng.random_range(0..nodes as NodeId)).collect();
    let mut degree = alloc::vec![1u32; nodes];
    for &v in &prufer {
        degree[v as usize] += 1;
    }
    let mut leaves: BinaryHeap<Reverse<NodeId>> = (0..nodes as NodeId)
        .filter(|&v| degree[v as usize] == 1)
        .map(Reverse)
        .collect();
    let mut edges = Vec::with_capacity(nodes - 1);
    for &v in &prufer {
        let Reverse(leaf) = leaves.pop().expect("a Prüfer sequence always leaves a leaf");
        edges.push(if leaf < v { (leaf, v) } else { (v, leaf) });
        degree[v as usize] -= 1;
        if degree[v as usize] == 1 {
            leaves.push(Reverse(v));
        }
    }
    let Reverse(a) = leaves.pop().unwrap();
    let Reverse(b) = leaves.pop().unwrap();
    edges.push((a.min(b), a.max(b)));
    edges
}

/// Undirected edge list of a family, sorted, `u < v`.
pub fn family_edges<R: Rng>(family: &Family, rng: &mut R) -> Result<Vec<(NodeId, NodeId)>> {
    let edges = match *family {
        Family::RandomRegular { nodes, degree } => random_regular(nodes, degree, rng)?,
        Family::ErdosRenyi { nodes, edge_prob } => erdos_renyi(nodes, edge_prob, rng)?,
        Family::RandomTree { nodes } => random_tree(nodes, rng),
        Family::Cycle { nodes } => {
            if nodes < 3 {
                return Err(Error::Infeasible(format!("a cycle needs at least 3 nodes, got {nodes}")));
            }
            (0..nodes as NodeId)
                .map(|k| {
                    let next = (k + 1) % nodes as NodeId;
                    (k.min(next), k.max(next))
                })
                .collect()
        }
        Family::Path { nodes } => (1..nodes as NodeId).map(|k| (k - 1, k)).collect(),
        Family::Star { nodes } => (1..nodes as NodeId).map(|k| (0, k)).collect(),
    };
    Ok(edges)
}

pub fn family_nodes(family: &Family) -> usize {
    match *family {
        Family::RandomRegular { nodes, .. }
        | Family::ErdosRenyi { nodes, .. }
        | Family::RandomTree { nodes }
        | Family::Cycle { nodes }
        | Family::Path { nodes }
        | Family::Star { nodes } => nodes,
    }
}

/// Builds the graph described by `spec`; every edge becomes two arcs.
pub fn generate(spec: &GenSpec) -> Result<DirectedGraph> {
    spec.b.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let edges = family_edges(&spec.family, &mut rng)?;
    let mut builder = GraphBuilder::new(family_nodes(&spec.family), EdgeMode::Undirected);
    for (u, v) in edges {
        let b_uv = spec.b.sample(&mut rng);
        let b_vu = if spec.symmetric { b_uv } else { spec.b.sample(&mut rng) };
        builder.add_edge(u, v, b_uv, b_vu)?;
    }
    builder.build()
}

/// Size of a random seed set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SeedCount {
    Count(usize),
    /// `max(1, floor(fraction * N))` seeds.
    Fraction(f64),
}

/// Uniformly chosen sure seeds, without replacement.
pub fn random_seed_set(graph: &DirectedGraph, count: SeedCount, seed: u64) -> Result<InitialCondition> {
    let n = graph.node_count();
    let k = match count {
        SeedCount::Count(k) => k,
        SeedCount::Fraction(f) => {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::InvalidConfig(format!("seed fraction {f} is outside (0, 1]")));
            }
            (libm::floor(f * n as f64) as usize).max(1)
        }
    };
    if k == 0 || k > n {
        return Err(Error::InvalidConfig(format!(
            "seed count {k} must lie in 1..={n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<NodeId> = index::sample(&mut rng, n, k)
        .into_iter()
        .map(|v| v as NodeId)
        .collect();
    chosen.sort_unstable();
    InitialCondition::from_seeds(n, &chosen)
}
