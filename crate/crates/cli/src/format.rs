//! Text formats: edge lists, per-node value files and `node,p_hat` tables.
//!
//! Graph files are UTF-8, one arc or edge per line:
//!
//! ```text
//! # comment
//! %mode undirected
//! %nodes 4
//! 0 1 0.5
//! 1 2 0.3 0.4
//! ```
//!
//! Directed files carry `u v b`. Undirected files carry `u v b_uv [b_vu]`,
//! with `b_vu` defaulting to `b_uv`. `%nodes` is optional and pads the node
//! set with isolated nodes; without it the node count is one past the largest
//! id. A `%labels` header switches node tokens to arbitrary strings, numbered
//! in order of first appearance.
//!
//! Value files (initial conditions, thresholds, activation probabilities)
//! hold `node value` lines separated by whitespace or a comma, optionally
//! under a `node,<name>` header. Unlisted nodes take a default.

use std::collections::HashMap;
use std::fmt::Write as _;

use dmpest_core::{DirectedGraph, EdgeMode, GraphBuilder, InitialCondition, NodeId};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error(transparent)]
    Core(#[from] dmpest_core::Error),
}

fn at(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Line {
        line,
        message: message.into(),
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// String names for dense node ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Labels {
    names: Vec<String>,
    index: HashMap<String, NodeId>,
}

impl Labels {
    fn intern(&mut self, name: &str) -> NodeId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len() as NodeId;
        self.names.push(name.to_owned());
        self.index.insert(name.to_owned(), id);
        id
    }

    pub fn get(&self, name: &str) -> Option<NodeId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: NodeId) -> &str {
        &self.names[id as usize]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// A parsed graph file.
#[derive(Clone, Debug)]
pub struct GraphFile {
    pub graph: DirectedGraph,
    pub labels: Option<Labels>,
}

impl GraphFile {
    /// Display name of a node: its label, or its id.
    pub fn node_name(&self, id: NodeId) -> String {
        match &self.labels {
            Some(l) => l.name(id).to_owned(),
            None => id.to_string(),
        }
    }

    fn resolve(&self, token: &str) -> Option<NodeId> {
        match &self.labels {
            Some(l) => l.get(token),
            None => token
                .parse::<NodeId>()
                .ok()
                .filter(|&id| (id as usize) < self.graph.node_count()),
        }
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_prob(line: usize, what: &str, token: &str) -> Result<f64, FormatError> {
    let x: f64 = token
        .parse()
        .map_err(|_| at(line, format!("{what} `{token}` is not a number")))?;
    if !(0.0..=1.0).contains(&x) {
        return Err(at(line, format!("{what} = {token} is outside [0, 1]")));
    }
    Ok(x)
}

fn parse_mode(line: usize, token: Option<&str>) -> Result<EdgeMode, FormatError> {
    match token {
        Some("directed") => Ok(EdgeMode::Directed),
        Some("undirected") => Ok(EdgeMode::Undirected),
        other => Err(at(
            line,
            format!("expected `%mode directed|undirected`, found {:?}", other.unwrap_or("")),
        )),
    }
}

/// Parses an edge list. `mode` applies when the file has no `%mode` header;
/// a header that contradicts it is an error. Without either, the file is
/// read as undirected.
pub fn parse_graph(text: &str, mode: Option<EdgeMode>) -> Result<GraphFile, FormatError> {
    let mut header_mode: Option<EdgeMode> = None;
    let mut declared_nodes: Option<usize> = None;
    let mut labels: Option<Labels> = None;
    let mut seen_data = false;
    let mut first_line: HashMap<(NodeId, NodeId), (usize, f64, f64)> = HashMap::new();
    let mut lines: Vec<(usize, NodeId, NodeId, f64, f64)> = Vec::new();
    let mut max_id: Option<NodeId> = None;

    for (line, content) in content_lines(text) {
        let mut tokens = content.split_whitespace();
        if let Some(directive) = content.strip_prefix('%') {
            if seen_data {
                return Err(at(line, "headers must come before the first data line"));
            }
            let mut parts = directive.split_whitespace();
            match parts.next() {
                Some("mode") => {
                    let m = parse_mode(line, parts.next())?;
                    if mode.is_some_and(|flag| flag != m) {
                        return Err(at(line, "%mode header contradicts the requested mode"));
                    }
                    header_mode = Some(m);
                }
                Some("nodes") => {
                    let n = parts
                        .next()
                        .and_then(|t| t.parse::<usize>().ok())
                        .filter(|&n| n < NodeId::MAX as usize)
                        .ok_or_else(|| at(line, "expected `%nodes <count>`"))?;
                    declared_nodes = Some(n);
                }
                Some("labels") => labels = Some(Labels::default()),
                _ => return Err(at(line, format!("unknown header `{content}`"))),
            }
            if parts.next().is_some() {
                return Err(at(line, format!("trailing tokens in header `{content}`")));
            }
            continue;
        }
        seen_data = true;
        if labels.is_some() && declared_nodes.is_some() {
            return Err(at(line, "%nodes cannot be combined with %labels"));
        }
        let edge_mode = header_mode.or(mode).unwrap_or(EdgeMode::Undirected);
        let fields: Vec<&str> = tokens.by_ref().collect();
        let expected = match edge_mode {
            EdgeMode::Directed => "u v b",
            EdgeMode::Undirected => "u v b_uv [b_vu]",
        };
        let arity_ok = match edge_mode {
            EdgeMode::Directed => fields.len() == 3,
            EdgeMode::Undirected => fields.len() == 3 || fields.len() == 4,
        };
        if !arity_ok {
            return Err(at(line, format!("expected `{expected}`, found `{content}`")));
        }
        let mut node = |token: &str| -> Result<NodeId, FormatError> {
            if let Some(l) = labels.as_mut() {
                return Ok(l.intern(token));
            }
            let id: NodeId = token
                .parse()
                .ok()
                .filter(|&id| id < NodeId::MAX)
                .ok_or_else(|| at(line, format!("node id `{token}` is not a non-negative integer")))?;
            if let Some(n) = declared_nodes {
                if id as usize >= n {
                    return Err(at(line, format!("node {id} is out of range for {n} nodes")));
                }
            }
            Ok(id)
        };
        let u = node(fields[0])?;
        let v = node(fields[1])?;
        if u == v {
            return Err(at(line, format!("self-loop on node {}", fields[0])));
        }
        let b_uv = parse_prob(line, "b", fields[2])?;
        let b_vu = match fields.get(3) {
            Some(t) => parse_prob(line, "b", t)?,
            None => b_uv,
        };
        max_id = max_id.max(Some(u.max(v)));

        let (key, forward, backward) = match edge_mode {
            EdgeMode::Directed => ((u, v), b_uv, b_uv),
            EdgeMode::Undirected if u < v => ((u, v), b_uv, b_vu),
            EdgeMode::Undirected => ((v, u), b_vu, b_uv),
        };
        if let Some(&(prev, f, b)) = first_line.get(&key) {
            let same = f.to_bits() == forward.to_bits() && b.to_bits() == backward.to_bits();
            if edge_mode == EdgeMode::Directed {
                return Err(at(line, format!("duplicate arc {} -> {} (first on line {prev})", fields[0], fields[1])));
            }
            if !same {
                return Err(at(
                    line,
                    format!("edge {} - {} repeats line {prev} with different probabilities", fields[0], fields[1]),
                ));
            }
            continue;
        }
        first_line.insert(key, (line, forward, backward));
        lines.push((line, key.0, key.1, forward, backward));
    }

    let edge_mode = header_mode.or(mode).unwrap_or(EdgeMode::Undirected);
    let node_count = match (&labels, declared_nodes) {
        (Some(l), _) => l.len(),
        (None, Some(n)) => n,
        (None, None) => max_id.map_or(0, |m| m as usize + 1),
    };
    let mut builder = GraphBuilder::new(node_count, edge_mode);
    for (line, u, v, forward, backward) in lines {
        let added = match edge_mode {
            EdgeMode::Directed => builder.add_arc(u, v, forward).map(|_| ()),
            EdgeMode::Undirected => builder.add_edge(u, v, forward, backward).map(|_| ()),
        };
        added.map_err(|e| at(line, e.to_string()))?;
    }
    Ok(GraphFile {
        graph: builder.build()?,
        labels,
    })
}

/// Serializes a graph so that [`parse_graph`] rebuilds it bit for bit.
pub fn write_graph(graph: &DirectedGraph, labels: Option<&Labels>) -> String {
    let mut out = String::new();
    let name = |id: NodeId| match labels {
        Some(l) => l.name(id).to_owned(),
        None => id.to_string(),
    };
    match graph.mode() {
        EdgeMode::Directed => out.push_str("%mode directed\n"),
        EdgeMode::Undirected => out.push_str("%mode undirected\n"),
    }
    match labels {
        Some(_) => out.push_str("%labels\n"),
        None => writeln!(out, "%nodes {}", graph.node_count()).unwrap(),
    }
    match graph.mode() {
        EdgeMode::Directed => {
            let mut arcs: Vec<_> = graph.arcs().collect();
            arcs.sort_by_key(|&(_, u, v, _)| (u, v));
            for (_, u, v, b) in arcs {
                writeln!(out, "{} {} {}", name(u), name(v), fmt_f64(b)).unwrap();
            }
        }
        EdgeMode::Undirected => {
            for (u, v) in graph.skeleton_edges() {
                let b_uv = graph.prob(graph.find_arc(u, v).expect("undirected edge has both arcs"));
                let b_vu = graph.prob(graph.find_arc(v, u).expect("undirected edge has both arcs"));
                if b_uv.to_bits() == b_vu.to_bits() {
                    writeln!(out, "{} {} {}", name(u), name(v), fmt_f64(b_uv)).unwrap();
                } else {
                    writeln!(out, "{} {} {} {}", name(u), name(v), fmt_f64(b_uv), fmt_f64(b_vu)).unwrap();
                }
            }
        }
    }
    out
}

/// Reads a per-node value file against `graph`. Every value must lie in
/// `[0, 1]`; unlisted nodes take `default`.
pub fn parse_node_values(text: &str, graph: &GraphFile, default: f64) -> Result<Vec<f64>, FormatError> {
    let mut values = vec![default; graph.graph.node_count()];
    let mut seen: HashMap<NodeId, usize> = HashMap::new();
    for (k, (line, content)) in content_lines(text).enumerate() {
        let fields: Vec<&str> = content
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        if k == 0 && fields.first() == Some(&"node") && fields.len() == 2 && fields[1].parse::<f64>().is_err() {
            continue;
        }
        if fields.len() != 2 {
            return Err(at(line, format!("expected `node value`, found `{content}`")));
        }
        let node = graph
            .resolve(fields[0])
            .ok_or_else(|| at(line, format!("unknown node `{}`", fields[0])))?;
        if let Some(prev) = seen.insert(node, line) {
            return Err(at(line, format!("node `{}` already set on line {prev}", fields[0])));
        }
        values[node as usize] = parse_prob(line, "value", fields[1])?;
    }
    Ok(values)
}

/// Initial activation probabilities; unlisted nodes start inactive.
pub fn parse_initial_condition(text: &str, graph: &GraphFile) -> Result<InitialCondition, FormatError> {
    Ok(InitialCondition::new(parse_node_values(text, graph, 0.0)?)?)
}

/// `node,p_hat` table, readable again by [`parse_node_values`].
pub fn write_marginals_csv(marginals: &[f64], labels: Option<&Labels>) -> String {
    let mut out = String::from("node,p_hat\n");
    for (i, p) in marginals.iter().enumerate() {
        match labels {
            Some(l) => writeln!(out, "{},{}", l.name(i as NodeId), fmt_f64(*p)).unwrap(),
            None => writeln!(out, "{i},{}", fmt_f64(*p)).unwrap(),
        }
    }
    out
}

/// `node p0` lines for a seed set, as read by [`parse_initial_condition`].
pub fn write_initial_condition(p0: &InitialCondition, labels: Option<&Labels>) -> String {
    let mut out = String::new();
    for (i, &p) in p0.as_slice().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        match labels {
            Some(l) => writeln!(out, "{} {}", l.name(i as NodeId), fmt_f64(p)).unwrap(),
            None => writeln!(out, "{i} {}", fmt_f64(p)).unwrap(),
        }
    }
    out
}
