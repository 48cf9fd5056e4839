//! Key establishment between strangers in a network where an adversary
//! controls a random fraction of the nodes.
//!
//! Two parties without a prior shared secret split a fresh secret into
//! n-of-n XOR shares and route each share over a different path of
//! partially trusted intermediaries. Every link between two honest nodes
//! is modelled as perfectly secret, so the adversary learns the secret
//! only if every chosen path contains at least one compromised
//! intermediate. A challenge/response confirmation (one-time-pad XOR with
//! key material plus a short digest) lets the endpoints detect mismatched
//! reconstructions.
//!
//! The crate is organized around the pieces of that simulation:
//!
//! - [`graph`]: immutable undirected simple graphs, structural queries,
//!   and the edge-list text format.
//! - [`graphgen`]: uniform random and truncated power-law generators.
//! - [`analytics`]: closed-form estimators for edge budgets, connectivity,
//!   path counts, and degree cutoffs.
//! - [`adversary`]: compromise masks (random subset or targeted
//!   high-degree).
//! - [`pathselect`]: the cost-incrementing shortest-path variant that
//!   picks p distinct simple paths.
//! - [`protocol`]: XOR secret sharing, share transport, and the
//!   key-confirmation exchange.
//! - [`harness`]: seeded Monte Carlo experiments, sweeps, and CSV/JSON
//!   output.

pub mod adversary;
pub mod analytics;
pub mod bits;
pub mod error;
pub mod graph;
pub mod graphgen;
pub mod harness;
pub mod pathselect;
pub mod protocol;
pub mod seed;

pub use error::{Error, Result};
pub use graph::{Graph, NodeId};
