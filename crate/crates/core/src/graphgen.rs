//! Random graph generators: uniform (fixed node and edge counts) and
//! truncated power-law via degree assignment plus stub matching.

use std::collections::HashSet;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

fn max_edges(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Uniform random simple graph with exactly `edges` edges: node pairs are
/// drawn at random (both endpoints redrawn on a rejected pair) until the
/// quota is met.
pub fn gen_uniform(n: usize, edges: usize, rng: &mut impl Rng) -> Result<Graph> {
    let max = max_edges(n);
    if edges > max {
        return Err(Error::TooManyEdges {
            nodes: n,
            requested: edges,
            max,
        });
    }
    if edges == 0 {
        return Ok(Graph::from_normalized_edges(n, Vec::new()));
    }
    // Rejection sampling stalls when nearly all pairs are taken; fall
    // back to a partial shuffle of the full pair list for dense requests.
    if edges * 4 >= max * 3 {
        let mut pairs: Vec<(NodeId, NodeId)> = Vec::with_capacity(max);
        for u in 0..n as NodeId {
            for v in (u + 1)..n as NodeId {
                pairs.push((u, v));
            }
        }
        for i in 0..edges {
            let j = rng.random_range(i..pairs.len());
            pairs.swap(i, j);
        }
        pairs.truncate(edges);
        return Ok(Graph::from_normalized_edges(n, pairs));
    }
    let mut seen = HashSet::with_capacity(edges * 2);
    let mut list = Vec::with_capacity(edges);
    while list.len() < edges {
        let u = rng.random_range(0..n as NodeId);
        let v = rng.random_range(0..n as NodeId);
        if u == v {
            continue;
        }
        let e = (u.min(v), u.max(v));
        if seen.insert(e) {
            list.push(e);
        }
    }
    Ok(Graph::from_normalized_edges(n, list))
}

/// Target degrees for a truncated power-law graph: expected bin counts
/// `n_k = N * C * k^-gamma` over `k_min..=N-1`, rounded to integers.
#[derive(Clone, Debug)]
pub struct PowerLawPlan {
    pub gamma: f64,
    pub k_min: u32,
    /// Target degree per node, ascending by node id.
    pub assigned_degrees: Vec<u32>,
}

impl PowerLawPlan {
    pub fn degree_sum(&self) -> usize {
        self.assigned_degrees.iter().map(|&d| d as usize).sum()
    }

    pub fn planned_edges(&self) -> usize {
        self.degree_sum() / 2
    }
}

/// Rounds the expected power-law bin counts to integers summing to `n`
/// (largest-remainder, ties toward smaller degree) and assigns degrees to
/// nodes in ascending order. If the degree total comes out odd, the
/// single highest-degree node gives up one stub so that pairing is
/// possible.
pub fn plan_powerlaw(n: usize, k_min: u32, gamma: f64) -> Result<PowerLawPlan> {
    if k_min < 1 {
        return Err(Error::InvalidParameter("k_min must be at least 1".into()));
    }
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    if n < 2 || k_min as usize > n - 1 {
        return Err(Error::InvalidParameter(format!(
            "no admissible degrees: k_min = {k_min}, N = {n}"
        )));
    }
    let degrees: Vec<u32> = (k_min..=(n - 1) as u32).collect();
    let weights: Vec<f64> = degrees.iter().map(|&k| (k as f64).powf(-gamma)).collect();
    let norm: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| n as f64 * w / norm).collect();

    let mut counts: Vec<usize> = exact.iter().map(|&x| x.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.partial_cmp(&ra).unwrap().then(degrees[a].cmp(&degrees[b]))
    });
    for &i in order.iter().take(n - assigned) {
        counts[i] += 1;
    }

    let mut assigned_degrees = Vec::with_capacity(n);
    for (i, &count) in counts.iter().enumerate() {
        for _ in 0..count {
            assigned_degrees.push(degrees[i]);
        }
    }
    debug_assert_eq!(assigned_degrees.len(), n);
    if assigned_degrees.iter().map(|&d| d as usize).sum::<usize>() % 2 == 1 {
        *assigned_degrees.last_mut().unwrap() -= 1;
    }
    Ok(PowerLawPlan {
        gamma,
        k_min,
        assigned_degrees,
    })
}

/// A generated power-law graph plus the number of degree stubs that could
/// not be matched within the retry budget.
#[derive(Clone, Debug)]
pub struct GeneratedPowerLaw {
    pub graph: Graph,
    pub unmatched_stubs: usize,
}

/// Stub matching: every node starts with one stub per unit of assigned
/// degree; two stubs are drawn at random and joined unless they collide
/// on one node or duplicate an existing edge. Rejected draws count
/// against a budget of `50 * degree_sum` draws, after which leftover
/// stubs are dropped and reported. No node ever exceeds its assigned
/// degree.
pub fn gen_powerlaw(plan: &PowerLawPlan, rng: &mut impl Rng) -> GeneratedPowerLaw {
    let n = plan.assigned_degrees.len();
    let mut stubs: Vec<NodeId> = Vec::with_capacity(plan.degree_sum());
    for (v, &d) in plan.assigned_degrees.iter().enumerate() {
        for _ in 0..d {
            stubs.push(v as NodeId);
        }
    }
    let budget = 50 * stubs.len();
    let mut seen = HashSet::with_capacity(stubs.len());
    let mut edges = Vec::with_capacity(stubs.len() / 2);
    let mut draws = 0usize;
    while stubs.len() >= 2 && draws < budget {
        draws += 1;
        let i = rng.random_range(0..stubs.len());
        let mut j = rng.random_range(0..stubs.len() - 1);
        if j >= i {
            j += 1;
        }
        let (u, v) = (stubs[i], stubs[j]);
        if u == v {
            continue;
        }
        let e = (u.min(v), u.max(v));
        if !seen.insert(e) {
            continue;
        }
        edges.push(e);
        let (hi, lo) = (i.max(j), i.min(j));
        stubs.swap_remove(hi);
        stubs.swap_remove(lo);
    }
    GeneratedPowerLaw {
        graph: Graph::from_normalized_edges(n, edges),
        unmatched_stubs: stubs.len(),
    }
}
