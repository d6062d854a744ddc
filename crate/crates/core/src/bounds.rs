//! Structural certificates around the message-passing estimate.
//!
//! Message-passing is exact at horizon `T` when the shortest cycle of the
//! undirected skeleton has length at least `2T + 1`, and running it on a
//! spanning forest gives a lower bound (dropped arcs behave like `b = 0`,
//! and the forest estimate is exact).

use alloc::collections::VecDeque;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dmp::{dmp_est, dmp_inf, FixedPointConfig};
use crate::graph::{DirectedGraph, Horizon, InitialCondition, NodeId};

/// Length of the shortest cycle of the undirected skeleton.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Girth {
    Cycle(u32),
    Acyclic,
}

impl fmt::Display for Girth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Girth::Cycle(l) => write!(f, "{l}"),
            Girth::Acyclic => f.write_str("inf"),
        }
    }
}

/// Shortest cycle by breadth-first search from every node, `O(|V| |E|)`.
///
/// A pair of opposite arcs is one undirected edge, not a 2-cycle.
pub fn girth(graph: &DirectedGraph) -> Girth {
    let adj = graph.skeleton_adjacency();
    let n = graph.node_count();
    let mut best = u32::MAX;
    let mut dist = alloc::vec![u32::MAX; n];
    let mut parent = alloc::vec![u32::MAX; n];
    let mut queue = VecDeque::new();
    for root in 0..n {
        dist.iter_mut().for_each(|d| *d = u32::MAX);
        dist[root] = 0;
        parent[root] = u32::MAX;
        queue.clear();
        queue.push_back(root as NodeId);
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            // No shorter cycle can close beyond this depth.
            if 2 * du >= best {
                break;
            }
            for &w in &adj[u as usize] {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = du + 1;
                    parent[w as usize] = u;
                    queue.push_back(w);
                } else if parent[u as usize] != w {
                    best = best.min(du + dist[w as usize] + 1);
                }
            }
        }
    }
    if best == u32::MAX {
        Girth::Acyclic
    } else {
        Girth::Cycle(best)
    }
}

/// Whether the girth condition guarantees exactness at `horizon`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExactnessCertificate {
    pub girth: Girth,
    pub horizon: Horizon,
    pub exact: bool,
}

pub fn exactness_certificate(graph: &DirectedGraph, horizon: Horizon) -> ExactnessCertificate {
    let girth = girth(graph);
    let exact = match (girth, horizon) {
        (Girth::Acyclic, _) => true,
        (Girth::Cycle(_), Horizon::Infinite) => false,
        (Girth::Cycle(l), Horizon::Finite(t)) => l as u64 >= 2 * t as u64 + 1,
    };
    ExactnessCertificate { girth, horizon, exact }
}

/// How to pick the spanning forest.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TreeStrategy {
    /// Breadth-first tree of each component, rooted at the node with the
    /// largest `p_i(0) * degree` (lowest id on ties).
    Bfs,
    /// Kruskal over a shuffled edge order.
    Random { seed: u64 },
}

/// Subgraph keeping both arc directions of every forest edge.
pub fn spanning_forest(graph: &DirectedGraph, p0: &InitialCondition, strategy: TreeStrategy) -> DirectedGraph {
    let n = graph.node_count();
    let mut keep_edges: Vec<(NodeId, NodeId)> = Vec::with_capacity(n.saturating_sub(1));
    match strategy {
        TreeStrategy::Bfs => {
            let adj = graph.skeleton_adjacency();
            let mut order: Vec<NodeId> = (0..n as NodeId).collect();
            let score = |v: NodeId| p0.get(v) * adj[v as usize].len() as f64;
            order.sort_by(|&a, &b| score(b).total_cmp(&score(a)).then(a.cmp(&b)));
            let mut seen = alloc::vec![false; n];
            let mut queue = VecDeque::new();
            for root in order {
                if seen[root as usize] {
                    continue;
                }
                seen[root as usize] = true;
                queue.push_back(root);
                while let Some(u) = queue.pop_front() {
                    for &w in &adj[u as usize] {
                        if !seen[w as usize] {
                            seen[w as usize] = true;
                            keep_edges.push(if u < w { (u, w) } else { (w, u) });
                            queue.push_back(w);
                        }
                    }
                }
            }
        }
        TreeStrategy::Random { seed } => {
            let mut edges = graph.skeleton_edges();
            edges.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let mut parent: Vec<usize> = (0..n).collect();
            fn find(parent: &mut [usize], mut x: usize) -> usize {
                while parent[x] != x {
                    parent[x] = parent[parent[x]];
                    x = parent[x];
                }
                x
            }
            for (u, v) in edges {
                let (ru, rv) = (find(&mut parent, u as usize), find(&mut parent, v as usize));
                if ru != rv {
                    parent[ru] = rv;
                    keep_edges.push((u, v));
                }
            }
        }
    }
    keep_edges.sort_unstable();
    graph.filter_arcs(|_, u, v| {
        let key = if u < v { (u, v) } else { (v, u) };
        keep_edges.binary_search(&key).is_ok()
    })
}

/// Spanning-forest lower bound and full-graph upper bound on the influence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundBracket {
    pub horizon: Horizon,
    pub lower: f64,
    pub upper: f64,
}

fn influence_estimate(graph: &DirectedGraph, p0: &InitialCondition, horizon: Horizon, cfg: Option<&FixedPointConfig>) -> f64 {
    match horizon {
        Horizon::Finite(t) => dmp_est(graph, p0, t).sigma,
        Horizon::Infinite => {
            let default = FixedPointConfig::for_graph(graph);
            dmp_inf(graph, p0, cfg.unwrap_or(&default)).report.sigma
        }
    }
}

/// Brackets the influence between a spanning-forest estimate and the
/// full-graph estimate. Disconnected graphs get a forest, which is the same
/// as bounding each component and summing.
///
/// `cfg` applies to infinite horizons; `None` uses the per-graph defaults.
pub fn spanning_tree_lower_bound(
    graph: &DirectedGraph,
    p0: &InitialCondition,
    horizon: Horizon,
    strategy: TreeStrategy,
    cfg: Option<&FixedPointConfig>,
) -> BoundBracket {
    let forest = spanning_forest(graph, p0, strategy);
    BoundBracket {
        horizon,
        lower: influence_estimate(&forest, p0, horizon, cfg),
        upper: influence_estimate(graph, p0, horizon, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeMode;
    use alloc::vec;

    fn cycle(n: u32) -> DirectedGraph {
        DirectedGraph::undirected(n as usize, (0..n).map(|k| (k, (k + 1) % n, 0.5))).unwrap()
    }

    #[test]
    fn girth_examples() {
        assert_eq!(girth(&cycle(3)), Girth::Cycle(3));
        assert_eq!(girth(&cycle(4)), Girth::Cycle(4));
        assert_eq!(girth(&cycle(11)), Girth::Cycle(11));
        let tree = DirectedGraph::undirected(5, [(0, 1, 0.5), (0, 2, 0.5), (2, 3, 0.5), (2, 4, 0.5)]).unwrap();
        assert_eq!(girth(&tree), Girth::Acyclic);
        // Opposite arcs are not a cycle.
        let pair = DirectedGraph::from_arcs(2, EdgeMode::Directed, [(0, 1, 0.5), (1, 0, 0.5)]).unwrap();
        assert_eq!(girth(&pair), Girth::Acyclic);
        // Directed triangle counts as a skeleton cycle.
        let tri = DirectedGraph::from_arcs(3, EdgeMode::Directed, [(0, 1, 0.5), (1, 2, 0.5), (2, 0, 0.5)]).unwrap();
        assert_eq!(girth(&tri), Girth::Cycle(3));
    }

    #[test]
    fn certificates() {
        let c = exactness_certificate(&cycle(7), Horizon::Finite(3));
        assert!(c.exact);
        assert_eq!(c.girth, Girth::Cycle(7));
        assert!(!exactness_certificate(&cycle(7), Horizon::Finite(4)).exact);
        assert!(!exactness_certificate(&cycle(3), Horizon::Finite(2)).exact);
        let tree = DirectedGraph::undirected(3, [(0, 1, 0.5), (1, 2, 0.5)]).unwrap();
        assert!(exactness_certificate(&tree, Horizon::Finite(1000)).exact);
        assert!(exactness_certificate(&tree, Horizon::Infinite).exact);
        assert!(!exactness_certificate(&cycle(9), Horizon::Infinite).exact);
    }

    #[test]
    fn tree_input_brackets_itself() {
        let tree = DirectedGraph::undirected(4, [(0, 1, 0.5), (1, 2, 0.4), (1, 3, 0.9)]).unwrap();
        let p0 = InitialCondition::new(vec![0.5, 0.0, 0.2, 0.0]).unwrap();
        for strategy in [TreeStrategy::Bfs, TreeStrategy::Random { seed: 3 }] {
            let b = spanning_tree_lower_bound(&tree, &p0, Horizon::Finite(3), strategy, None);
            assert_eq!(b.lower, b.upper);
        }
    }

    #[test]
    fn triangle_bracket() {
        let g = DirectedGraph::undirected(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let p0 = InitialCondition::from_seeds(3, &[0]).unwrap();
        let forest = spanning_forest(&g, &p0, TreeStrategy::Bfs);
        assert_eq!(forest.arc_count(), 4);
        let b = spanning_tree_lower_bound(&g, &p0, Horizon::Finite(2), TreeStrategy::Bfs, None);
        assert_eq!(b.lower, 3.0);
        assert_eq!(b.upper, 3.0);
    }

    #[test]
    fn no_spread_bracket() {
        let g = cycle(5).map_probs(|_, _| 0.0).unwrap();
        let p0 = InitialCondition::new(vec![0.5, 0.0, 1.0, 0.0, 0.25]).unwrap();
        let b = spanning_tree_lower_bound(&g, &p0, Horizon::Infinite, TreeStrategy::Random { seed: 1 }, None);
        assert_eq!(b.lower, 1.75);
        assert_eq!(b.upper, 1.75);
    }

    #[test]
    fn forest_of_disconnected_graph() {
        let g = DirectedGraph::undirected(6, [(0, 1, 0.5), (1, 2, 0.5), (2, 0, 0.5), (3, 4, 0.5), (4, 5, 0.5), (5, 3, 0.5)]).unwrap();
        let p0 = InitialCondition::from_seeds(6, &[1, 4]).unwrap();
        for strategy in [TreeStrategy::Bfs, TreeStrategy::Random { seed: 9 }] {
            let f = spanning_forest(&g, &p0, strategy);
            assert_eq!(f.skeleton_edges().len(), 4);
            assert_eq!(girth(&f), Girth::Acyclic);
        }
    }
}
