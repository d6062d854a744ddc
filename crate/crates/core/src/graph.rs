//! Graph storage, initial conditions and marginal reports.
//!
//! Arcs live in flat arrays ordered by `(target, source)`, so the in-arcs of
//! a node are one contiguous id range. The out-neighborhood is a second CSR
//! index over the same arc ids. Message arrays in [`crate::dmp`] and
//! [`crate::lt`] are indexed by arc id.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

use crate::error::{Error, Result};

pub type NodeId = u32;
pub type ArcId = u32;

/// Marker for "no arc" in the compact index arrays.
pub(crate) const NONE: u32 = u32::MAX;

/// How the input edges were declared. Undirected edges are always stored as
/// two arcs; the mode only affects deduplication and serialization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeMode {
    Directed,
    Undirected,
}

impl fmt::Display for EdgeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeMode::Directed => f.write_str("directed"),
            EdgeMode::Undirected => f.write_str("undirected"),
        }
    }
}

/// Time horizon of an estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Horizon {
    Finite(u32),
    Infinite,
}

impl Horizon {
    pub fn finite(self) -> Option<u32> {
        match self {
            Horizon::Finite(t) => Some(t),
            Horizon::Infinite => None,
        }
    }

    /// Number of layers that covers the horizon on a graph with `node_count`
    /// nodes. Any shortest path has fewer than `node_count` arcs.
    pub fn layers(self, node_count: usize) -> u32 {
        match self {
            Horizon::Finite(t) => t,
            Horizon::Infinite => node_count.min(u32::MAX as usize) as u32,
        }
    }
}

impl fmt::Display for Horizon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Horizon::Finite(t) => write!(f, "{t}"),
            Horizon::Infinite => f.write_str("inf"),
        }
    }
}

pub(crate) fn check_probability(what: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::NotAProbability { what, value })
    }
}

/// Immutable directed graph with a transmission probability on every arc.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectedGraph {
    node_count: usize,
    mode: EdgeMode,
    source: Vec<NodeId>,
    target: Vec<NodeId>,
    prob: Vec<f64>,
    in_offsets: Vec<usize>,
    out_offsets: Vec<usize>,
    out_arcs: Vec<ArcId>,
    // For each entry of `out_arcs`: position of the reverse arc inside the
    // source's in-range, or NONE.
    out_reverse_slot: Vec<u32>,
    reverse: Vec<ArcId>,
}

impl DirectedGraph {
    /// Builds a graph from `(source, target, b)` triples.
    pub fn from_arcs<I>(node_count: usize, mode: EdgeMode, arcs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId, f64)>,
    {
        let mut builder = GraphBuilder::new(node_count, mode);
        for (u, v, b) in arcs {
            builder.add_arc(u, v, b)?;
        }
        builder.build()
    }

    /// Builds an undirected graph where both arcs of an edge share `b`.
    pub fn undirected<I>(node_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId, f64)>,
    {
        let mut builder = GraphBuilder::new(node_count, EdgeMode::Undirected);
        for (u, v, b) in edges {
            builder.add_edge(u, v, b, b)?;
        }
        builder.build()
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn arc_count(&self) -> usize {
        self.source.len()
    }

    pub fn mode(&self) -> EdgeMode {
        self.mode
    }

    #[inline]
    pub fn source(&self, arc: ArcId) -> NodeId {
        self.source[arc as usize]
    }

    #[inline]
    pub fn target(&self, arc: ArcId) -> NodeId {
        self.target[arc as usize]
    }

    #[inline]
    pub fn prob(&self, arc: ArcId) -> f64 {
        self.prob[arc as usize]
    }

    /// Transmission probabilities indexed by arc id.
    pub fn probs(&self) -> &[f64] {
        &self.prob
    }

    pub fn sources(&self) -> &[NodeId] {
        &self.source
    }

    pub fn targets(&self) -> &[NodeId] {
        &self.target
    }

    /// Iterates `(arc, source, target, b)` in arc-id order.
    pub fn arcs(&self) -> impl Iterator<Item = (ArcId, NodeId, NodeId, f64)> + '_ {
        (0..self.arc_count()).map(move |a| (a as ArcId, self.source[a], self.target[a], self.prob[a]))
    }

    /// Arc ids of the arcs entering `node`, ordered by source.
    #[inline]
    pub fn in_arcs(&self, node: NodeId) -> Range<usize> {
        let v = node as usize;
        self.in_offsets[v]..self.in_offsets[v + 1]
    }

    /// Arc ids of the arcs leaving `node`, ordered by target.
    #[inline]
    pub fn out_arcs(&self, node: NodeId) -> &[ArcId] {
        let v = node as usize;
        &self.out_arcs[self.out_offsets[v]..self.out_offsets[v + 1]]
    }

    /// For each arc in `out_arcs(node)`, the offset of its reverse arc inside
    /// `in_arcs(node)`, if the reverse arc exists.
    #[inline]
    pub(crate) fn out_reverse_slots(&self, node: NodeId) -> &[u32] {
        let v = node as usize;
        &self.out_reverse_slot[self.out_offsets[v]..self.out_offsets[v + 1]]
    }

    pub fn in_degree(&self, node: NodeId) -> usize {
        self.in_arcs(node).len()
    }

    pub fn out_degree(&self, node: NodeId) -> usize {
        self.out_arcs(node).len()
    }

    pub fn max_in_degree(&self) -> usize {
        (0..self.node_count as NodeId)
            .map(|v| self.in_degree(v))
            .max()
            .unwrap_or(0)
    }

    pub fn reverse(&self, arc: ArcId) -> Option<ArcId> {
        let r = self.reverse[arc as usize];
        (r != NONE).then_some(r)
    }

    pub fn find_arc(&self, source: NodeId, target: NodeId) -> Option<ArcId> {
        if source as usize >= self.node_count || target as usize >= self.node_count {
            return None;
        }
        let range = self.in_arcs(target);
        self.source[range.clone()]
            .binary_search(&source)
            .ok()
            .map(|k| (range.start + k) as ArcId)
    }

    /// True when every arc has a reverse arc carrying the same probability.
    pub fn is_symmetric(&self) -> bool {
        self.arcs()
            .all(|(a, _, _, b)| self.reverse(a).is_some_and(|r| self.prob(r) == b))
    }

    /// Undirected skeleton: each unordered pair `{u, v}` joined by at least
    /// one arc, reported once with `u < v`, sorted.
    pub fn skeleton_edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut edges: Vec<(NodeId, NodeId)> = self
            .arcs()
            .map(|(_, u, v, _)| if u < v { (u, v) } else { (v, u) })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    /// Sorted undirected neighbor lists of the skeleton.
    pub fn skeleton_adjacency(&self) -> Vec<Vec<NodeId>> {
        let mut adj = alloc::vec![Vec::new(); self.node_count];
        for (u, v) in self.skeleton_edges() {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Subgraph on the same node set keeping only the arcs accepted by `keep`.
    pub fn filter_arcs<F>(&self, mut keep: F) -> DirectedGraph
    where
        F: FnMut(ArcId, NodeId, NodeId) -> bool,
    {
        let arcs: Vec<(NodeId, NodeId, f64)> = self
            .arcs()
            .filter(|&(a, u, v, _)| keep(a, u, v))
            .map(|(_, u, v, b)| (u, v, b))
            .collect();
        // Arcs are already validated and sorted; the builder re-derives the indices.
        GraphBuilder::from_validated(self.node_count, self.mode, arcs)
    }

    /// Same topology with every probability replaced by `f(arc, b)`.
    pub fn map_probs<F>(&self, mut f: F) -> Result<DirectedGraph>
    where
        F: FnMut(ArcId, f64) -> f64,
    {
        let mut out = self.clone();
        for (a, b) in out.prob.iter_mut().enumerate() {
            let nb = f(a as ArcId, *b);
            check_probability("b", nb)?;
            *b = nb;
        }
        Ok(out)
    }
}

/// Accumulates arcs and validates them into a [`DirectedGraph`].
#[derive(Clone, Debug)]
pub struct GraphBuilder {
    node_count: usize,
    mode: EdgeMode,
    arcs: Vec<(NodeId, NodeId, f64)>,
}

impl GraphBuilder {
    pub fn new(node_count: usize, mode: EdgeMode) -> Self {
        Self {
            node_count,
            mode,
            arcs: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Grows the node set; ids stay dense.
    pub fn ensure_nodes(&mut self, node_count: usize) {
        self.node_count = self.node_count.max(node_count);
    }

    fn check_node(&self, node: NodeId) -> Result<()> {
        if (node as usize) < self.node_count {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange {
                node: node as u64,
                node_count: self.node_count,
            })
        }
    }

    pub fn add_arc(&mut self, source: NodeId, target: NodeId, b: f64) -> Result<&mut Self> {
        self.check_node(source)?;
        self.check_node(target)?;
        if source == target {
            return Err(Error::SelfLoop { node: source });
        }
        check_probability("b", b)?;
        self.arcs.push((source, target, b));
        Ok(self)
    }

    /// Adds both arcs of an undirected edge.
    pub fn add_edge(&mut self, u: NodeId, v: NodeId, b_uv: f64, b_vu: f64) -> Result<&mut Self> {
        self.add_arc(u, v, b_uv)?;
        self.add_arc(v, u, b_vu)
    }

    /// Validates duplicates and builds the CSR indices.
    ///
    /// In undirected mode an arc repeated with the identical probability is
    /// merged (the same edge listed from both ends); any other repetition is
    /// an error.
    pub fn build(mut self) -> Result<DirectedGraph> {
        self.arcs
            .sort_by(|x, y| (x.1, x.0).cmp(&(y.1, y.0)));
        let mut deduped: Vec<(NodeId, NodeId, f64)> = Vec::with_capacity(self.arcs.len());
        for (u, v, b) in self.arcs {
            if let Some(&(pu, pv, pb)) = deduped.last() {
                if pu == u && pv == v {
                    match self.mode {
                        EdgeMode::Undirected if pb.to_bits() == b.to_bits() => continue,
                        EdgeMode::Undirected => {
                            return Err(Error::ConflictingArc {
                                from: u,
                                to: v,
                                first: pb,
                                second: b,
                            })
                        }
                        EdgeMode::Directed => return Err(Error::DuplicateArc { from: u, to: v }),
                    }
                }
            }
            deduped.push((u, v, b));
        }
        Ok(Self::from_validated(self.node_count, self.mode, deduped))
    }

    /// `arcs` must be valid, duplicate free and sorted by `(target, source)`.
    fn from_validated(node_count: usize, mode: EdgeMode, arcs: Vec<(NodeId, NodeId, f64)>) -> DirectedGraph {
        assert!(arcs.len() < NONE as usize, "arc count exceeds the u32 id space");
        let m = arcs.len();
        let mut source = Vec::with_capacity(m);
        let mut target = Vec::with_capacity(m);
        let mut prob = Vec::with_capacity(m);
        let mut in_offsets = alloc::vec![0usize; node_count + 1];
        let mut out_offsets = alloc::vec![0usize; node_count + 1];
        for &(u, v, b) in &arcs {
            source.push(u);
            target.push(v);
            prob.push(b);
            in_offsets[v as usize + 1] += 1;
            out_offsets[u as usize + 1] += 1;
        }
        for v in 0..node_count {
            in_offsets[v + 1] += in_offsets[v];
            out_offsets[v + 1] += out_offsets[v];
        }

        // Counting sort by source; arc ids are increasing in target within
        // each source bucket because ids are sorted by (target, source).
        let mut out_arcs = alloc::vec![0 as ArcId; m];
        let mut cursor = out_offsets.clone();
        for a in 0..m {
            let u = source[a] as usize;
            out_arcs[cursor[u]] = a as ArcId;
            cursor[u] += 1;
        }

        let mut graph = DirectedGraph {
            node_count,
            mode,
            source,
            target,
            prob,
            in_offsets,
            out_offsets,
            out_arcs,
            out_reverse_slot: Vec::new(),
            reverse: Vec::new(),
        };
        let reverse: Vec<ArcId> = (0..m)
            .map(|a| {
                graph
                    .find_arc(graph.target[a], graph.source[a])
                    .unwrap_or(NONE)
            })
            .collect();
        let out_reverse_slot = graph
            .out_arcs
            .iter()
            .map(|&a| match reverse[a as usize] {
                NONE => NONE,
                r => (r as usize - graph.in_offsets[graph.source[a as usize] as usize]) as u32,
            })
            .collect();
        graph.reverse = reverse;
        graph.out_reverse_slot = out_reverse_slot;
        graph
    }
}

/// Independent initial activation probabilities `p_i(0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialCondition {
    p0: Vec<f64>,
}

impl InitialCondition {
    pub fn new(p0: Vec<f64>) -> Result<Self> {
        for &p in &p0 {
            check_probability("p0", p)?;
        }
        Ok(Self { p0 })
    }

    /// Checks the vector length against a graph as well.
    pub fn for_graph(graph: &DirectedGraph, p0: Vec<f64>) -> Result<Self> {
        if p0.len() != graph.node_count() {
            return Err(Error::LengthMismatch {
                expected: graph.node_count(),
                found: p0.len(),
            });
        }
        Self::new(p0)
    }

    pub fn zeros(node_count: usize) -> Self {
        Self {
            p0: alloc::vec![0.0; node_count],
        }
    }

    /// Deterministic seed set: `p_i(0) = 1` on `seeds`, 0 elsewhere.
    pub fn from_seeds(node_count: usize, seeds: &[NodeId]) -> Result<Self> {
        let mut p0 = alloc::vec![0.0; node_count];
        for &s in seeds {
            let slot = p0.get_mut(s as usize).ok_or(Error::NodeOutOfRange {
                node: s as u64,
                node_count,
            })?;
            *slot = 1.0;
        }
        Ok(Self { p0 })
    }

    pub fn len(&self) -> usize {
        self.p0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p0.is_empty()
    }

    #[inline]
    pub fn get(&self, node: NodeId) -> f64 {
        self.p0[node as usize]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p0
    }

    /// The budget `k = Σ p_i(0)`.
    pub fn budget(&self) -> f64 {
        self.p0.iter().sum()
    }

    /// True when every entry is exactly 0 or 1 (a classical seed set).
    pub fn is_deterministic(&self) -> bool {
        self.p0.iter().all(|&p| p == 0.0 || p == 1.0)
    }

    pub fn seeds(&self) -> Vec<NodeId> {
        self.p0
            .iter()
            .enumerate()
            .filter(|(_, &p)| p == 1.0)
            .map(|(i, _)| i as NodeId)
            .collect()
    }

    pub(crate) fn check_len(&self, graph: &DirectedGraph) -> Result<()> {
        if self.p0.len() == graph.node_count() {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                expected: graph.node_count(),
                found: self.p0.len(),
            })
        }
    }
}

/// Per-node activation probabilities at a horizon, with their sum.
#[derive(Clone, Debug, PartialEq)]
pub struct MarginalReport {
    pub horizon: Horizon,
    pub marginals: Vec<f64>,
    pub sigma: f64,
}

impl MarginalReport {
    pub fn new(horizon: Horizon, marginals: Vec<f64>) -> Self {
        let sigma = marginals.iter().sum();
        Self {
            horizon,
            marginals,
            sigma,
        }
    }

    /// Checks the report invariants against the initial condition it came from.
    pub fn validate(&self, p0: &InitialCondition) -> Result<()> {
        if self.marginals.len() != p0.len() {
            return Err(Error::LengthMismatch {
                expected: p0.len(),
                found: self.marginals.len(),
            });
        }
        for (&p, &init) in self.marginals.iter().zip(p0.as_slice()) {
            check_probability("marginal", p)?;
            if p < init {
                return Err(Error::InvalidConfig(format!(
                    "marginal {p} is below its initial probability {init}"
                )));
            }
        }
        let sum: f64 = self.marginals.iter().sum();
        let slack = 1e-12 * self.marginals.len().max(1) as f64;
        if (sum - self.sigma).abs() > slack {
            return Err(Error::InvalidConfig(format!(
                "sigma {} disagrees with the marginal sum {sum}",
                self.sigma
            )));
        }
        Ok(())
    }
}

/// Expected number of active nodes: the sum of the marginals.
pub fn influence_from_marginals(report: &MarginalReport) -> f64 {
    report.marginals.iter().sum()
}
