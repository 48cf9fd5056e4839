//! Immutable undirected simple graphs.
//!
//! Nodes are dense integer ids `0..N`. Construction validates simplicity
//! (no self-loops, no duplicate edges); afterwards the graph is read-only
//! and safe to share across trial workers.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::io::{BufRead, Write};

use crate::adversary::CompromiseMask;
use crate::error::{Error, Result};

pub type NodeId = u32;

#[derive(Clone, Debug)]
pub struct Graph {
    node_count: usize,
    edges: Vec<(NodeId, NodeId)>,
    adjacency: Vec<Vec<NodeId>>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicate edges, and ids
    /// outside `0..node_count`. Edge endpoints may come in either order.
    pub fn new(node_count: usize, edges: impl IntoIterator<Item = (NodeId, NodeId)>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut normalized = Vec::new();
        for (u, v) in edges {
            if u == v {
                return Err(Error::InvalidParameter(format!("self-loop at node {u}")));
            }
            if u as usize >= node_count || v as usize >= node_count {
                return Err(Error::InvalidParameter(format!(
                    "edge ({u}, {v}) outside node range 0..{node_count}"
                )));
            }
            let e = (u.min(v), u.max(v));
            if !seen.insert(e) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate edge ({}, {})",
                    e.0, e.1
                )));
            }
            normalized.push(e);
        }
        Ok(Self::from_normalized_edges(node_count, normalized))
    }

    /// Fast path for generators whose edges are already normalized
    /// (`u < v`) and deduplicated.
    pub(crate) fn from_normalized_edges(node_count: usize, edges: Vec<(NodeId, NodeId)>) -> Self {
        let mut adjacency = vec![Vec::new(); node_count];
        for &(u, v) in &edges {
            adjacency[u as usize].push(v);
            adjacency[v as usize].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Graph {
            node_count,
            edges,
            adjacency,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as normalized pairs `u < v`, in construction order.
    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    /// Neighbors of `v` in ascending id order.
    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adjacency[v as usize]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adjacency[v as usize].len()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adjacency[u as usize].binary_search(&v).is_ok()
    }

    /// True iff every pair of vertices is joined by a path. The empty and
    /// single-vertex graphs count as connected.
    pub fn is_connected(&self) -> bool {
        if self.node_count <= 1 {
            return true;
        }
        let mut seen = vec![false; self.node_count];
        let mut queue = VecDeque::new();
        seen[0] = true;
        queue.push_back(0u32);
        let mut reached = 1;
        while let Some(u) = queue.pop_front() {
            for &v in self.neighbors(u) {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    reached += 1;
                    queue.push_back(v);
                }
            }
        }
        reached == self.node_count
    }

    pub fn degree_histogram(&self) -> DegreeHistogram {
        let mut counts = BTreeMap::new();
        for v in 0..self.node_count {
            *counts.entry(self.adjacency[v].len()).or_insert(0usize) += 1;
        }
        DegreeHistogram { counts }
    }

    /// Removes every masked vertex together with its incident edges.
    /// Survivors are renumbered densely; the mapping back to the original
    /// ids is kept in the result.
    pub fn induced_subgraph(&self, removed: &CompromiseMask) -> InducedSubgraph {
        assert_eq!(
            removed.len(),
            self.node_count,
            "mask length must equal node count"
        );
        let mut new_id = vec![u32::MAX; self.node_count];
        let mut original_ids = Vec::new();
        for v in 0..self.node_count {
            if !removed.is_compromised(v as NodeId) {
                new_id[v] = original_ids.len() as u32;
                original_ids.push(v as NodeId);
            }
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(u, v)| new_id[u as usize] != u32::MAX && new_id[v as usize] != u32::MAX)
            .map(|&(u, v)| (new_id[u as usize], new_id[v as usize]))
            .collect();
        InducedSubgraph {
            graph: Graph::from_normalized_edges(original_ids.len(), edges),
            original_ids,
        }
    }

    /// Writes the edge-list text format: a `N E` header line, then one
    /// `u v` line per edge with `u < v`, sorted lexicographically.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        let mut sorted = self.edges.clone();
        sorted.sort_unstable();
        writeln!(w, "{} {}", self.node_count, sorted.len())?;
        for (u, v) in sorted {
            writeln!(w, "{u} {v}")?;
        }
        Ok(())
    }

    /// Parses the edge-list text format written by [`Graph::write_edge_list`].
    pub fn read_edge_list<R: BufRead>(r: R) -> Result<Graph> {
        let mut lines = r.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::MalformedEdgeList {
            line: 1,
            reason: "missing header".into(),
        })?;
        let header = header?;
        let mut parts = header.split_whitespace();
        let parse = |s: Option<&str>, line: usize| -> Result<usize> {
            s.and_then(|v| v.parse().ok()).ok_or(Error::MalformedEdgeList {
                line,
                reason: "expected two integers".into(),
            })
        };
        let n = parse(parts.next(), 1)?;
        let e = parse(parts.next(), 1)?;
        let mut edges = Vec::with_capacity(e);
        for (idx, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let u = parse(parts.next(), idx + 1)? as NodeId;
            let v = parse(parts.next(), idx + 1)? as NodeId;
            edges.push((u, v));
        }
        if edges.len() != e {
            return Err(Error::MalformedEdgeList {
                line: edges.len() + 1,
                reason: format!("header announced {e} edges, found {}", edges.len()),
            });
        }
        Graph::new(n, edges)
    }
}

/// Result of [`Graph::induced_subgraph`]: the compacted graph plus the
/// table mapping each new id back to the id it had in the parent.
#[derive(Clone, Debug)]
pub struct InducedSubgraph {
    pub graph: Graph,
    pub original_ids: Vec<NodeId>,
}

impl InducedSubgraph {
    pub fn original_id(&self, new_id: NodeId) -> NodeId {
        self.original_ids[new_id as usize]
    }
}

/// Map from degree k to the number of nodes with that degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeHistogram {
    counts: BTreeMap<usize, usize>,
}

impl DegreeHistogram {
    pub fn counts(&self) -> &BTreeMap<usize, usize> {
        &self.counts
    }

    pub fn count(&self, degree: usize) -> usize {
        self.counts.get(&degree).copied().unwrap_or(0)
    }

    /// Total nodes across all bins.
    pub fn node_total(&self) -> usize {
        self.counts.values().sum()
    }

    /// Sum of k * n_k, i.e. twice the edge count.
    pub fn degree_sum(&self) -> usize {
        self.counts.iter().map(|(k, n)| k * n).sum()
    }

    /// Most common degree; smallest such degree on ties.
    pub fn peak_degree(&self) -> Option<usize> {
        self.counts
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
            .map(|(&k, _)| k)
    }
}
