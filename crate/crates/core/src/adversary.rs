//! Compromise masks: which nodes the adversary controls.

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

/// Per-node compromise flags. `true` means the adversary fully controls
/// the node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompromiseMask {
    flags: Vec<bool>,
    count: usize,
}

impl CompromiseMask {
    pub fn from_flags(flags: Vec<bool>) -> Self {
        let count = flags.iter().filter(|&&f| f).count();
        CompromiseMask { flags, count }
    }

    pub fn empty(n: usize) -> Self {
        CompromiseMask {
            flags: vec![false; n],
            count: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    /// Number of compromised nodes.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn is_compromised(&self, v: NodeId) -> bool {
        self.flags[v as usize]
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn compromised_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.flags
            .iter()
            .enumerate()
            .filter(|(_, &f)| f)
            .map(|(i, _)| i as NodeId)
    }
}

/// Number of nodes the adversary gets for honest fraction `t`:
/// exactly `floor((1 - t) * n)`. The small epsilon guards against the
/// binary representation of round decimals like `1 - 0.8` landing a hair
/// under the exact product.
pub fn compromised_count(n: usize, t: f64) -> usize {
    ((1.0 - t) * n as f64 + 1e-9).floor() as usize
}

/// Compromises exactly `floor((1 - t) * n)` nodes chosen uniformly
/// without replacement. The count is deterministic per trial; only the
/// choice of nodes is random.
pub fn compromise_random(n: usize, t: f64, rng: &mut impl Rng) -> Result<CompromiseMask> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "honest fraction t must be in (0, 1], got {t}"
        )));
    }
    let count = compromised_count(n, t);
    let mut flags = vec![false; n];
    for idx in rand::seq::index::sample(rng, n, count) {
        flags[idx] = true;
    }
    Ok(CompromiseMask {
        flags,
        count,
    })
}

/// Compromises the `count` highest-degree nodes; ties broken toward the
/// lower node id.
pub fn compromise_targeted(g: &Graph, count: usize) -> Result<CompromiseMask> {
    let n = g.node_count();
    if count > n {
        return Err(Error::InvalidParameter(format!(
            "cannot compromise {count} of {n} nodes"
        )));
    }
    let mut order: Vec<NodeId> = (0..n as NodeId).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(g.degree(v)), v));
    let mut flags = vec![false; n];
    for &v in &order[..count] {
        flags[v as usize] = true;
    }
    Ok(CompromiseMask { flags, count })
}
