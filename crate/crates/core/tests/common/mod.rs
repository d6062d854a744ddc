#![allow(dead_code)]

use dmpest_core::generate::{family_edges, Family};
use dmpest_core::{DirectedGraph, EdgeMode, GraphBuilder, InitialCondition};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random tree with independent per-arc `b` in [0, 1].
pub fn random_tree(rng: &mut ChaCha8Rng, nodes: usize) -> DirectedGraph {
    let edges = family_edges(&Family::RandomTree { nodes }, rng).unwrap();
    with_random_probs(rng, nodes, &edges)
}

pub fn with_random_probs(rng: &mut ChaCha8Rng, nodes: usize, edges: &[(u32, u32)]) -> DirectedGraph {
    let mut b = GraphBuilder::new(nodes, EdgeMode::Undirected);
    for &(u, v) in edges {
        let (x, y) = (rng.random::<f64>(), rng.random::<f64>());
        b.add_edge(u, v, x, y).unwrap();
    }
    b.build().unwrap()
}

/// Connected graph with at least one cycle and at most `max_edges` edges.
pub fn random_loopy(rng: &mut ChaCha8Rng, max_edges: usize) -> DirectedGraph {
    loop {
        let nodes = rng.random_range(3..=max_edges.min(7));
        let mut edges = family_edges(&Family::RandomTree { nodes }, rng).unwrap();
        let extra = rng.random_range(1..=max_edges - (nodes - 1));
        for _ in 0..extra {
            let u = rng.random_range(0..nodes as u32);
            let v = rng.random_range(0..nodes as u32);
            let key = (u.min(v), u.max(v));
            if u != v && !edges.iter().any(|&(a, b)| (a.min(b), a.max(b)) == key) {
                edges.push(key);
            }
        }
        if edges.len() >= nodes {
            return with_random_probs(rng, nodes, &edges);
        }
    }
}

/// Mix of sure seeds, zeros and fractional initial probabilities.
pub fn mixed_p0(rng: &mut ChaCha8Rng, nodes: usize) -> InitialCondition {
    let mut p: Vec<f64> = (0..nodes)
        .map(|_| match rng.random_range(0..4) {
            0 => 1.0,
            1 => 0.0,
            _ => rng.random::<f64>(),
        })
        .collect();
    if p.iter().all(|&x| x == 0.0) {
        p[0] = 0.5;
    }
    InitialCondition::new(p).unwrap()
}

pub fn uniform_p0(rng: &mut ChaCha8Rng, nodes: usize) -> InitialCondition {
    InitialCondition::new((0..nodes).map(|_| rng.random::<f64>()).collect()).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Random tree whose in-weights sum to at most 1 at every node, with random
/// thresholds and activation probabilities.
pub fn random_lt_tree(
    rng: &mut ChaCha8Rng,
    nodes: usize,
    max_degree: usize,
) -> (DirectedGraph, dmpest_core::lt::LtParameters) {
    let edges = loop {
        let e = family_edges(&Family::RandomTree { nodes }, rng).unwrap();
        let mut deg = vec![0; nodes];
        for &(u, v) in &e {
            deg[u as usize] += 1;
            deg[v as usize] += 1;
        }
        if deg.iter().all(|&d| d <= max_degree) {
            break e;
        }
    };
    let mut incoming: Vec<Vec<u32>> = vec![Vec::new(); nodes];
    for &(u, v) in &edges {
        incoming[v as usize].push(u);
        incoming[u as usize].push(v);
    }
    let mut weight = std::collections::HashMap::new();
    for (i, srcs) in incoming.iter().enumerate() {
        let raw: Vec<f64> = srcs.iter().map(|_| rng.random::<f64>()).collect();
        let scale = rng.random::<f64>() / raw.iter().sum::<f64>().max(1e-300);
        for (&j, w) in srcs.iter().zip(raw) {
            weight.insert((j, i as u32), (w * scale).min(1.0));
        }
    }
    let mut b = GraphBuilder::new(nodes, EdgeMode::Undirected);
    for &(u, v) in &edges {
        b.add_edge(u, v, weight[&(u, v)], weight[&(v, u)]).unwrap();
    }
    let g = b.build().unwrap();
    let theta = (0..nodes).map(|_| rng.random::<f64>()).collect();
    let eta = (0..nodes).map(|_| rng.random::<f64>()).collect();
    let params = dmpest_core::lt::LtParameters::new(&g, theta, eta).unwrap();
    (g, params)
}
