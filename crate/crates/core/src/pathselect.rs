//! Selection of p distinct simple paths via a node-cost Dijkstra variant.
//!
//! Every node starts at cost 1. The cheapest path is the one minimizing
//! the sum of its intermediate-node costs (endpoints are free); after a
//! path is taken, each of its intermediates gets one unit more expensive,
//! steering later paths away from already-used relays. Ties are broken by
//! hop count and then by lexicographically smallest vertex sequence, so
//! selection is fully deterministic.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use crate::adversary::CompromiseMask;
use crate::graph::{Graph, NodeId};

/// Ordered list of simple paths from the initiator to the responder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathSet {
    /// Vertex sequences, each starting at the initiator and ending at the
    /// responder.
    pub paths: Vec<Vec<NodeId>>,
    /// Requested minus found.
    pub shortfall: usize,
}

/// Selection result plus introspection data for verification: the final
/// node costs and how many draws produced an already-selected path.
#[derive(Clone, Debug)]
pub struct SelectionTrace {
    pub set: PathSet,
    pub final_costs: Vec<u32>,
    pub duplicate_draws: usize,
}

/// Additive path key: total intermediate cost, then hop count. Both
/// components accumulate along a path, and the hop tie-break keeps every
/// optimal walk simple (a revisit would add hops without ever lowering
/// cost).
type Key = (u64, u32);

/// Runs Dijkstra from `b` under the current node costs, charging a node's
/// cost when a path enters it (endpoints free), until `a` is settled.
/// Returns the distance-to-responder labels, reused for the greedy
/// reconstruction of the lexicographically smallest optimal path.
fn cost_field(g: &Graph, a: NodeId, b: NodeId, costs: &[u32]) -> Option<Vec<Option<Key>>> {
    let n = g.node_count();
    let mut dist: Vec<Option<Key>> = vec![None; n];
    let mut settled = vec![false; n];
    let mut heap: BinaryHeap<Reverse<(u64, u32, NodeId)>> = BinaryHeap::new();
    dist[b as usize] = Some((0, 0));
    heap.push(Reverse((0, 0, b)));
    while let Some(Reverse((cost, hops, u))) = heap.pop() {
        if settled[u as usize] {
            continue;
        }
        settled[u as usize] = true;
        if u == a {
            return Some(dist);
        }
        for &v in g.neighbors(u) {
            if settled[v as usize] {
                continue;
            }
            let enter = if v == a || v == b { 0 } else { costs[v as usize] as u64 };
            let cand = (cost + enter, hops + 1);
            if dist[v as usize].is_none_or(|cur| cand < cur) {
                dist[v as usize] = Some(cand);
                heap.push(Reverse((cand.0, cand.1, v)));
            }
        }
    }
    None
}

/// Walks from `a` toward `b`, at each step taking the smallest-id
/// neighbor that still completes a path of exactly the optimal key. Equal
/// hop counts make this greedy the lexicographic minimum over all optimal
/// vertex sequences.
fn cheapest_path(g: &Graph, a: NodeId, b: NodeId, costs: &[u32]) -> Option<Vec<NodeId>> {
    let dist = cost_field(g, a, b, costs)?;
    let mut remaining = dist[a as usize].expect("settled source must carry a label");
    let mut path = vec![a];
    let mut cur = a;
    while cur != b {
        // In the b-rooted field, `cur` is the node charged on the edge
        // between `cur` and its successor: D(cur) = D(next) + (leave, 1).
        let leave = if cur == a { 0 } else { costs[cur as usize] as u64 };
        debug_assert!(remaining.0 >= leave && remaining.1 >= 1);
        let needed = (remaining.0 - leave, remaining.1 - 1);
        let mut next = None;
        for &v in g.neighbors(cur) {
            // Any node genuinely on an optimal continuation was settled
            // before `a`, so its label is final; unsettled labels are
            // strict overestimates and can never satisfy the equality.
            if dist[v as usize] == Some(needed) {
                next = Some(v);
                break;
            }
        }
        let v = next.expect("optimal continuation must exist");
        path.push(v);
        remaining = needed;
        cur = v;
    }
    Some(path)
}

/// Selects up to `p` distinct simple paths from `a` to `b`, keeping the
/// cost bookkeeping visible for verification.
///
/// A duplicate cheapest path still increments its intermediates (changing
/// the landscape for the next round) but counts against a budget of `3p`
/// consecutive duplicates, after which selection stops and the deficit is
/// reported as shortfall. A disconnected pair yields an empty set with
/// shortfall `p`.
pub fn select_paths_traced(g: &Graph, a: NodeId, b: NodeId, p: usize) -> SelectionTrace {
    assert_ne!(a, b, "endpoints must differ");
    assert!((a as usize) < g.node_count() && (b as usize) < g.node_count());
    let mut costs = vec![1u32; g.node_count()];
    let mut paths: Vec<Vec<NodeId>> = Vec::with_capacity(p);
    let mut chosen: HashSet<Vec<NodeId>> = HashSet::new();
    let mut consecutive_duplicates = 0usize;
    let mut duplicate_draws = 0usize;
    while paths.len() < p {
        let Some(path) = cheapest_path(g, a, b, &costs) else {
            break;
        };
        for &v in &path[1..path.len() - 1] {
            costs[v as usize] += 1;
        }
        if chosen.insert(path.clone()) {
            paths.push(path);
            consecutive_duplicates = 0;
        } else {
            duplicate_draws += 1;
            consecutive_duplicates += 1;
            if consecutive_duplicates >= 3 * p {
                break;
            }
        }
    }
    let shortfall = p - paths.len();
    SelectionTrace {
        set: PathSet { paths, shortfall },
        final_costs: costs,
        duplicate_draws,
    }
}

/// Selects up to `p` distinct simple paths from `a` to `b`.
pub fn select_paths(g: &Graph, a: NodeId, b: NodeId, p: usize) -> PathSet {
    select_paths_traced(g, a, b, p).set
}

/// True iff no intermediate vertex of the path is compromised. Endpoints
/// are not examined; callers choose honest endpoints.
pub fn path_is_honest(path: &[NodeId], mask: &CompromiseMask) -> bool {
    path[1..path.len() - 1]
        .iter()
        .all(|&v| !mask.is_compromised(v))
}
