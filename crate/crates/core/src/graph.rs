//! Undirected graphs, instance parsing, residual-graph component
//! decomposition and the pairwise-connectivity objective.
//!
//! Nodes are dense `usize` ids in `0..n`. The original ids read from an
//! instance file are retained so that solutions can be reported in the
//! caller's numbering.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};

/// Immutable undirected simple graph in compressed adjacency form.
#[derive(Clone, Debug)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    external_ids: Vec<u64>,
}

/// Edges discarded while building a [`Graph`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EdgeStats {
    pub duplicates: usize,
    pub self_loops: usize,
}

impl Graph {
    /// Builds a graph on `node_count` nodes. Self-loops and repeated edges
    /// (in either orientation) are dropped and counted.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<(Graph, EdgeStats)>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut stats = EdgeStats::default();
        let mut normalized = Vec::new();
        for (a, b) in edges {
            for node in [a, b] {
                if node >= node_count {
                    return Err(Error::NodeOutOfRange { node, node_count });
                }
            }
            if a == b {
                stats.self_loops += 1;
                continue;
            }
            normalized.push((a.min(b), a.max(b)));
        }
        normalized.sort_unstable();
        let before = normalized.len();
        normalized.dedup();
        stats.duplicates = before - normalized.len();

        let mut degree = vec![0usize; node_count];
        for &(a, b) in &normalized {
            degree[a] += 1;
            degree[b] += 1;
        }
        let mut offsets = Vec::with_capacity(node_count + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets[..node_count].to_vec();
        let mut targets = vec![0usize; 2 * normalized.len()];
        // Edges are sorted, so every adjacency list comes out sorted.
        for &(a, b) in &normalized {
            targets[cursor[a]] = b;
            cursor[a] += 1;
            targets[cursor[b]] = a;
            cursor[b] += 1;
        }
        let graph = Graph {
            offsets,
            targets,
            external_ids: (0..node_count as u64).collect(),
        };
        Ok((graph, stats))
    }

    /// Same as [`Graph::from_edges`] but panics on out-of-range ids; meant
    /// for generators and tests that construct edges themselves.
    pub fn from_edge_list(node_count: usize, edges: &[(usize, usize)]) -> Graph {
        Graph::from_edges(node_count, edges.iter().copied())
            .expect("edge endpoints must be below node_count")
            .0
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.targets[self.offsets[node]..self.offsets[node + 1]]
    }

    #[inline]
    pub fn degree(&self, node: usize) -> usize {
        self.offsets[node + 1] - self.offsets[node]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.neighbors(a).binary_search(&b).is_ok()
    }

    /// Id of `node` in the numbering of the source file.
    pub fn external_id(&self, node: usize) -> u64 {
        self.external_ids[node]
    }

    pub fn external_ids(&self) -> &[u64] {
        &self.external_ids
    }

    /// Internal id for an id of the source numbering.
    pub fn internal_id(&self, external: u64) -> Option<usize> {
        self.external_ids.binary_search(&external).ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.node_count()).flat_map(move |a| {
            self.neighbors(a)
                .iter()
                .copied()
                .filter(move |&b| a < b)
                .map(move |b| (a, b))
        })
    }

    fn with_external_ids(mut self, ids: Vec<u64>) -> Graph {
        debug_assert_eq!(ids.len(), self.node_count());
        self.external_ids = ids;
        self
    }
}

/// Options for [`parse_edge_list`].
#[derive(Clone, Copy, Debug, Default)]
pub struct ParseOptions {
    /// Treat a leading `n m` line as a header when it is consistent with
    /// the rest of the file (`m` equals the number of edge lines and `n`
    /// covers every id seen). An inconsistent first line is kept as an edge.
    pub skip_header: bool,
}

/// A parsed instance together with what the parser normalized away.
#[derive(Clone, Debug)]
pub struct ParsedGraph {
    pub graph: Graph,
    /// Smallest node id in the file (0 or 1 for the usual benchmark files).
    pub index_base: u64,
    pub duplicate_edges: usize,
    pub self_loops: usize,
    pub header_skipped: bool,
}

/// Parses an instance file.
///
/// Accepted line forms, freely mixed:
/// - `u v`: one edge;
/// - `u: v w x`: adjacency list of `u` (a bare `u:` declares an isolated node);
/// - `e u v` / `p <fmt> n m`: DIMACS edge and problem lines;
/// - a single integer on the first data line: declared node count.
///
/// Lines starting with `#`, `%` or `c ` are comments.
pub fn parse_edge_list<R: BufRead>(reader: R, options: ParseOptions) -> Result<ParsedGraph> {
    let mut edges: Vec<(u64, u64)> = Vec::new();
    let mut declared: Vec<u64> = Vec::new();
    let mut node_count: Option<usize> = None;
    let mut header_candidate: Option<(u64, u64)> = None;
    let mut seen_data = false;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('%') || line == "c" {
            continue;
        }
        let first_data = !seen_data;
        seen_data = true;

        if let Some(rest) = line.strip_prefix("c ") {
            let _ = rest;
            continue;
        }
        if let Some(rest) = line.strip_prefix("p ") {
            let tokens: Vec<&str> = rest.split_whitespace().collect();
            if tokens.len() < 2 {
                return Err(parse_error(line_no, "malformed problem line"));
            }
            let n = parse_id(tokens[tokens.len() - 2], line_no)?;
            node_count = Some(n as usize);
            continue;
        }
        if let Some(rest) = line.strip_prefix("e ") {
            let ids = parse_ids(rest, line_no)?;
            if ids.len() != 2 {
                return Err(parse_error(line_no, "expected two node ids after `e`"));
            }
            edges.push((ids[0], ids[1]));
            continue;
        }
        if let Some((head, tail)) = line.split_once(':') {
            let u = parse_id(head.trim(), line_no)?;
            declared.push(u);
            for v in parse_ids(tail, line_no)? {
                edges.push((u, v));
            }
            continue;
        }

        let ids = parse_ids(line, line_no)?;
        match ids.as_slice() {
            [n] if first_data => node_count = Some(*n as usize),
            [a, b] if first_data && options.skip_header => header_candidate = Some((*a, *b)),
            [a, b] => edges.push((*a, *b)),
            _ => {
                return Err(parse_error(
                    line_no,
                    format!("expected two node ids, found {} tokens", ids.len()),
                ))
            }
        }
    }

    let mut header_skipped = false;
    if let Some((a, b)) = header_candidate {
        let mut distinct: Vec<u64> = edges
            .iter()
            .flat_map(|&(x, y)| [x, y])
            .chain(declared.iter().copied())
            .collect();
        distinct.sort_unstable();
        distinct.dedup();
        if b as usize == edges.len() && a as usize >= distinct.len() {
            header_skipped = true;
            if node_count.is_none() && a as usize > distinct.len() {
                node_count = Some(a as usize);
            }
        } else {
            edges.insert(0, (a, b));
        }
    }

    let mut ids: Vec<u64> = edges
        .iter()
        .flat_map(|&(x, y)| [x, y])
        .chain(declared.iter().copied())
        .collect();
    if ids.is_empty() && node_count.unwrap_or(0) == 0 {
        return Err(Error::EmptyInput);
    }
    ids.sort_unstable();
    ids.dedup();

    let (external_ids, index_base) = match node_count {
        Some(n) => {
            let max_id = ids.last().copied().unwrap_or(0);
            let min_id = ids.first().copied().unwrap_or(0);
            let base = if max_id < n as u64 {
                0
            } else if max_id == n as u64 && min_id >= 1 {
                1
            } else {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("node id {max_id} exceeds declared node count {n}"),
                });
            };
            ((base..base + n as u64).collect::<Vec<_>>(), base)
        }
        None => {
            let base = ids[0];
            (ids, base)
        }
    };

    let lookup = |id: u64| -> usize {
        external_ids
            .binary_search(&id)
            .expect("every id was registered")
    };
    let dense: Vec<(usize, usize)> = edges.iter().map(|&(a, b)| (lookup(a), lookup(b))).collect();
    let (graph, stats) = Graph::from_edges(external_ids.len(), dense)?;
    if stats.duplicates > 0 || stats.self_loops > 0 {
        log::debug!(
            "dropped {} duplicate edges and {} self-loops",
            stats.duplicates,
            stats.self_loops
        );
    }
    Ok(ParsedGraph {
        graph: graph.with_external_ids(external_ids),
        index_base,
        duplicate_edges: stats.duplicates,
        self_loops: stats.self_loops,
        header_skipped,
    })
}

pub fn parse_edge_list_str(text: &str, options: ParseOptions) -> Result<ParsedGraph> {
    parse_edge_list(text.as_bytes(), options)
}

pub fn read_instance(path: impl AsRef<Path>, options: ParseOptions) -> Result<ParsedGraph> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(BufReader::new(file), options)
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_id(token: &str, line: usize) -> Result<u64> {
    token
        .parse::<u64>()
        .map_err(|_| parse_error(line, format!("`{token}` is not a non-negative integer")))
}

fn parse_ids(text: &str, line: usize) -> Result<Vec<u64>> {
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| parse_id(t, line))
        .collect()
}

/// Label carried by removed nodes in a [`ComponentDecomposition`].
pub const REMOVED: u32 = u32::MAX;

/// Connected components of the residual graph `G[V \ S]`.
///
/// Besides a per-node label, the nodes are stored grouped by component so
/// that a component's members can be listed without a scan over `V`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentDecomposition {
    labels: Vec<u32>,
    members: Vec<usize>,
    starts: Vec<usize>,
}

impl ComponentDecomposition {
    pub fn component_count(&self) -> usize {
        self.starts.len() - 1
    }

    pub fn component_size(&self, component: usize) -> usize {
        self.starts[component + 1] - self.starts[component]
    }

    pub fn sizes(&self) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.starts.windows(2).map(|w| w[1] - w[0])
    }

    pub fn component_nodes(&self, component: usize) -> &[usize] {
        &self.members[self.starts[component]..self.starts[component + 1]]
    }

    /// Component of `node`, or `None` if the node is removed.
    pub fn component_of(&self, node: usize) -> Option<usize> {
        match self.labels[node] {
            REMOVED => None,
            c => Some(c as usize),
        }
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn is_removed(&self, node: usize) -> bool {
        self.labels[node] == REMOVED
    }

    pub fn residual_node_count(&self) -> usize {
        self.members.len()
    }

    pub fn largest_component(&self) -> Option<usize> {
        // first index wins ties
        (0..self.component_count()).reduce(|best, c| {
            if self.component_size(c) > self.component_size(best) {
                c
            } else {
                best
            }
        })
    }

    pub fn pairwise_connectivity(&self) -> u64 {
        self.sizes().map(pairs).sum()
    }
}

/// Number of unordered pairs among `size` nodes.
#[inline]
pub fn pairs(size: usize) -> u64 {
    let s = size as u64;
    s * s.saturating_sub(1) / 2
}

/// Objective value of a decomposition: sum of `|C|(|C|-1)/2` over components.
pub fn pairwise_connectivity(decomposition: &ComponentDecomposition) -> u64 {
    decomposition.pairwise_connectivity()
}

/// Decomposes `G[V \ removed]`. Repeated entries in `removed` are allowed.
pub fn decompose(graph: &Graph, removed: &[usize]) -> Result<ComponentDecomposition> {
    let n = graph.node_count();
    let mut mask = vec![false; n];
    for &node in removed {
        if node >= n {
            return Err(Error::NodeOutOfRange {
                node,
                node_count: n,
            });
        }
        mask[node] = true;
    }
    Ok(decompose_masked(graph, &mask))
}

/// Decomposition for a removal mask of length `n`. Runs in `O(n + m)`.
pub fn decompose_masked(graph: &Graph, removed: &[bool]) -> ComponentDecomposition {
    let n = graph.node_count();
    debug_assert_eq!(removed.len(), n);
    let mut labels: Vec<u32> = removed
        .iter()
        .map(|&r| if r { REMOVED } else { u32::MAX - 1 })
        .collect();
    let mut members = Vec::with_capacity(n);
    let mut starts = vec![0];
    for root in 0..n {
        if labels[root] != u32::MAX - 1 {
            continue;
        }
        let label = (starts.len() - 1) as u32;
        labels[root] = label;
        let begin = members.len();
        members.push(root);
        // the members vector doubles as the BFS queue
        let mut head = begin;
        while head < members.len() {
            let u = members[head];
            head += 1;
            for &w in graph.neighbors(u) {
                if labels[w] == u32::MAX - 1 {
                    labels[w] = label;
                    members.push(w);
                }
            }
        }
        starts.push(members.len());
    }
    ComponentDecomposition {
        labels,
        members,
        starts,
    }
}

/// For every residual node `w`, the decrease of the objective obtained by
/// additionally removing `w` (zero for removed nodes).
///
/// One iterative articulation-point DFS per component gives the sizes of the
/// pieces a node's removal splits off, so the whole vector costs `O(n + m)`.
pub fn removal_gains(graph: &Graph, decomposition: &ComponentDecomposition) -> Vec<u64> {
    const UNSEEN: usize = usize::MAX;
    let n = graph.node_count();
    let mut gains = vec![0u64; n];
    let mut disc = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut subtree = vec![0usize; n];
    let mut split_size = vec![0usize; n];
    let mut split_pairs = vec![0u64; n];
    let mut stack: Vec<(usize, usize, usize)> = Vec::new();
    let mut clock = 0usize;

    for c in 0..decomposition.component_count() {
        let nodes = decomposition.component_nodes(c);
        let total = nodes.len();
        let root = nodes[0];
        disc[root] = clock;
        low[root] = clock;
        clock += 1;
        subtree[root] = 1;
        stack.push((root, UNSEEN, 0));
        while let Some(top) = stack.last_mut() {
            let (u, parent, next) = *top;
            let adj = graph.neighbors(u);
            if next < adj.len() {
                top.2 += 1;
                let w = adj[next];
                if decomposition.is_removed(w) || w == parent {
                    continue;
                }
                if disc[w] == UNSEEN {
                    disc[w] = clock;
                    low[w] = clock;
                    clock += 1;
                    subtree[w] = 1;
                    stack.push((w, u, 0));
                } else {
                    low[u] = low[u].min(disc[w]);
                }
            } else {
                stack.pop();
                if parent != UNSEEN {
                    low[parent] = low[parent].min(low[u]);
                    subtree[parent] += subtree[u];
                    if low[u] >= disc[parent] {
                        split_size[parent] += subtree[u];
                        split_pairs[parent] += pairs(subtree[u]);
                    }
                }
            }
        }
        let whole = pairs(total);
        for &w in nodes {
            let rest = total - 1 - split_size[w];
            gains[w] = whole - split_pairs[w] - pairs(rest);
        }
    }
    gains
}
