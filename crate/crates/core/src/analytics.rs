//! Closed-form estimators: edge budgets, connectivity probability,
//! diameter, path budgets, neighbour-compromise probability, minimum
//! degree cutoff, power-law exponent fitting, and relay load.
//!
//! All logarithms are natural: the connectivity asymptotics these
//! formulas come from are stated in natural logs, and the edge budget for
//! (N=16384, t=0.8, eps=0.001) reproduces the reference count 167821
//! only under that convention.

use serde::Serialize;

use crate::error::{Error, Result};

/// Shared parameter bundle for a network analysis.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct NetworkParams {
    /// Node count.
    pub n: usize,
    /// Honest fraction in (0, 1].
    pub t: f64,
    /// Allowed probability that the honest-induced subgraph disconnects.
    pub epsilon: f64,
    /// Allowed probability that every chosen path is compromised.
    pub delta: f64,
    /// Allowed probability that all of a node's neighbours are compromised.
    pub delta_nc: f64,
}

impl NetworkParams {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 nodes, got {}",
                self.n
            )));
        }
        if !(self.t > 0.0 && self.t <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "honest fraction t must be in (0, 1], got {}",
                self.t
            )));
        }
        for (name, v) in [
            ("epsilon", self.epsilon),
            ("delta", self.delta),
            ("delta_nc", self.delta_nc),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be in (0, 1), got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Mean degree 2E/N.
pub fn mean_degree(n: usize, edges: usize) -> f64 {
    2.0 * edges as f64 / n as f64
}

/// Probability that a uniform random graph on `n` nodes with `edges`
/// edges and honest fraction `t` stays connected after the compromised
/// nodes are removed: `exp(-exp(-2c))` with `c = E t / N - ln(t N) / 2`.
pub fn connectivity_probability(n: usize, t: f64, edges: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 nodes, got {n}"
        )));
    }
    if !(t > 0.0 && t <= 1.0) || t * n as f64 <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "t * N must be positive with t in (0, 1], got t = {t}"
        )));
    }
    let c = edges as f64 * t / n as f64 - 0.5 * (t * n as f64).ln();
    Ok((-(-2.0 * c).exp()).exp())
}

/// Edge budget `ceil(N/(2t) * ln(N t / eps))` keeping the honest-induced
/// subgraph connected except with probability about `eps`.
///
/// The underlying asymptotics assume `1 >> eps >> t N exp(-t (N-1))`;
/// outside that regime the value is still returned but a warning is
/// logged.
pub fn edges_required(n: usize, t: f64, epsilon: f64) -> Result<usize> {
    if n < 2 || !(t > 0.0 && t <= 1.0) || epsilon <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "edges_required needs N >= 2, t in (0, 1], epsilon > 0; got N = {n}, t = {t}, eps = {epsilon}"
        )));
    }
    let tn = t * n as f64;
    if tn < epsilon {
        return Err(Error::InvalidParameter(format!(
            "epsilon = {epsilon} exceeds t * N = {tn}; the edge budget log would be negative"
        )));
    }
    let lower = 10.0 * tn * (-t * (n as f64 - 1.0)).exp();
    if epsilon > 0.1 || epsilon < lower {
        log::warn!(
            "edges_required called outside its applicability regime: eps = {epsilon}, N = {n}, t = {t}"
        );
    }
    Ok((0.5 * (n as f64 / t) * (tn / epsilon).ln()).ceil() as usize)
}

/// Diameter estimate `ln N / ln <k>` for a random graph with mean degree
/// `<k>`.
pub fn diameter_estimate(n: usize, mean_degree: f64) -> Result<f64> {
    if mean_degree <= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "mean degree must exceed 1, got {mean_degree}"
        )));
    }
    Ok((n as f64).ln() / mean_degree.ln())
}

/// Estimated length of the longest of the `p` shortest paths:
/// `ln(N p) / ln <k>`.
pub fn longest_selected_path_estimate(n: usize, p: f64, mean_degree: f64) -> Result<f64> {
    if p < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "path count must be at least 1, got {p}"
        )));
    }
    if mean_degree <= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "mean degree must exceed 1, got {mean_degree}"
        )));
    }
    Ok((n as f64 * p).ln() / mean_degree.ln())
}

/// Paths needed so that all of them are compromised with probability at
/// most `delta`, for paths of length `ell`: `ln delta / ln(1 - t^(ell-1))`.
/// This is the single step of the fixed-point iteration in
/// [`paths_required`].
pub fn required_paths_for_length(ell: f64, t: f64, delta: f64) -> f64 {
    let honest = t.powf(ell - 1.0);
    delta.ln() / (1.0 - honest).ln()
}

/// Joint estimate of the path budget.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathBudget {
    /// Number of paths to select.
    pub p: usize,
    /// Estimated length of the longest selected path at that count.
    pub ell_p: f64,
    /// Mean degree the estimate was computed for.
    pub mean_degree: f64,
}

/// Solves `p = ln delta / ln(1 - t^(ell_p - 1))` jointly with
/// `ell_p = ln(N p) / ln <k>` by fixed-point iteration from `p = 1`,
/// stopping once the step is below 0.01 and taking the ceiling. `t = 1`
/// short-circuits to a single path, since any honest-endpoint path is
/// secure when nobody is compromised.
pub fn paths_required(n: usize, t: f64, mean_degree: f64, delta: f64) -> Result<PathBudget> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 nodes, got {n}"
        )));
    }
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "honest fraction t must be in (0, 1], got {t}"
        )));
    }
    if mean_degree <= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "mean degree must exceed 1, got {mean_degree}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must be in (0, 1), got {delta}"
        )));
    }
    let budget = |p: usize| -> Result<PathBudget> {
        Ok(PathBudget {
            p,
            ell_p: longest_selected_path_estimate(n, p as f64, mean_degree)?,
            mean_degree,
        })
    };
    if t >= 1.0 {
        return budget(1);
    }
    let mut p = 1.0f64;
    for _ in 0..100 {
        let ell = longest_selected_path_estimate(n, p, mean_degree)?;
        if t.powf(ell - 1.0) >= 1.0 {
            // A path this short is certainly honest; one suffices.
            return budget(1);
        }
        let next = required_paths_for_length(ell, t, delta);
        if next <= 1.0 {
            return budget(1);
        }
        let step = (next - p).abs();
        p = next;
        if step < 0.01 {
            return budget(p.ceil().max(1.0) as usize);
        }
    }
    Err(Error::NonConvergence(100))
}

/// Probability that all `k` neighbours of a node are compromised:
/// `(1 - t)^k`.
pub fn neighbour_compromise_prob(k: u32, t: f64) -> f64 {
    (1.0 - t).powi(k as i32)
}

/// Smallest degree cutoff with `(1 - t)^k <= delta_nc`.
pub fn min_degree(t: f64, delta_nc: f64) -> Result<u32> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "min_degree needs t in (0, 1), got {t}"
        )));
    }
    if !(delta_nc > 0.0 && delta_nc < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta_nc must be in (0, 1), got {delta_nc}"
        )));
    }
    let q = 1.0 - t;
    let mut k = (delta_nc.ln() / q.ln()).ceil().max(1.0) as u32;
    // The analytic ceiling can land one off at representation boundaries;
    // settle it against the defining predicate.
    while q.powi(k as i32) > delta_nc {
        k += 1;
    }
    while k > 1 && q.powi(k as i32 - 1) <= delta_nc {
        k -= 1;
    }
    Ok(k)
}

/// Expected edge count of the normalized power-law degree distribution
/// over `k_min..=N-1`: `sum_k N C k^(1-gamma) / 2` with
/// `C = 1 / sum_k k^-gamma`.
pub fn expected_powerlaw_edges(n: usize, k_min: u32, gamma: f64) -> Result<f64> {
    if n < 2 || k_min < 1 || k_min as usize > n - 1 {
        return Err(Error::InvalidParameter(format!(
            "no admissible degrees: k_min = {k_min}, N = {n}"
        )));
    }
    let mut weight_sum = 0.0;
    let mut edge_sum = 0.0;
    for k in k_min..=(n - 1) as u32 {
        let w = (k as f64).powf(-gamma);
        weight_sum += w;
        edge_sum += w * k as f64;
    }
    Ok(n as f64 * edge_sum / weight_sum / 2.0)
}

/// Result of fitting the power-law exponent to an edge goal.
#[derive(Clone, Copy, Debug)]
pub struct GammaFit {
    pub gamma: f64,
    /// True when the goal sits at or below the steepest bracket edge, so
    /// effectively all degree mass is already at `k_min`.
    pub saturated: bool,
    /// Expected (pre-rounding) edge count at the returned exponent.
    pub expected_edges: f64,
}

const GAMMA_LO: f64 = 0.01;
const GAMMA_HI: f64 = 10.0;

/// Exponent at which the expected power-law edge count meets `edge_goal`,
/// found by bisection on `[0.01, 10]` to 1e-6. The expected count
/// decreases as the exponent grows, so this is the boundary exponent: any
/// larger exponent gives an edge count at or below the goal.
pub fn powerlaw_gamma(n: usize, k_min: u32, edge_goal: f64) -> Result<GammaFit> {
    if edge_goal < n as f64 * k_min as f64 / 2.0 {
        return Err(Error::InvalidParameter(format!(
            "edge goal {edge_goal} is below N * k_min / 2 = {}",
            n as f64 * k_min as f64 / 2.0
        )));
    }
    let at = |gamma: f64| expected_powerlaw_edges(n, k_min, gamma);
    let e_lo = at(GAMMA_LO)?;
    let e_hi = at(GAMMA_HI)?;
    if e_lo < edge_goal {
        return Err(Error::UnattainableEdgeGoal {
            goal: edge_goal,
            lo: GAMMA_LO,
            hi: GAMMA_HI,
        });
    }
    if e_hi >= edge_goal {
        return Ok(GammaFit {
            gamma: GAMMA_HI,
            saturated: true,
            expected_edges: e_hi,
        });
    }
    let (mut lo, mut hi) = (GAMMA_LO, GAMMA_HI);
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if at(mid)? > edge_goal {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let gamma = 0.5 * (lo + hi);
    Ok(GammaFit {
        gamma,
        saturated: false,
        expected_edges: at(gamma)?,
    })
}

/// Expected intermediate-node slots per protocol run: `(ell - 1) * p`,
/// endpoints excluded.
pub fn relay_load(ell: f64, p: f64) -> f64 {
    (ell - 1.0) * p
}

/// Everything the closed forms say about one parameter point.
#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub n: usize,
    pub t: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub delta_nc: f64,
    pub edges: usize,
    pub mean_degree: f64,
    pub diameter: f64,
    pub paths: usize,
    pub ell_p: f64,
    pub k_min: u32,
    pub gamma: f64,
    pub relay_load: f64,
}

/// Runs the full estimator chain for one parameter point. Requires
/// `t < 1` since the degree cutoff and exponent fit are meaningless with
/// no adversary.
pub fn analyze(params: &NetworkParams) -> Result<AnalysisReport> {
    params.validate()?;
    if params.t >= 1.0 {
        return Err(Error::InvalidParameter(
            "analysis requires t < 1; with t = 1 a single path suffices".into(),
        ));
    }
    let edges = edges_required(params.n, params.t, params.epsilon)?;
    let k = mean_degree(params.n, edges);
    let budget = paths_required(params.n, params.t, k, params.delta)?;
    let k_min = min_degree(params.t, params.delta_nc)?;
    let fit = powerlaw_gamma(params.n, k_min, edges as f64)?;
    Ok(AnalysisReport {
        n: params.n,
        t: params.t,
        epsilon: params.epsilon,
        delta: params.delta,
        delta_nc: params.delta_nc,
        edges,
        mean_degree: k,
        diameter: diameter_estimate(params.n, k)?,
        paths: budget.p,
        ell_p: budget.ell_p,
        k_min,
        gamma: fit.gamma,
        relay_load: relay_load(budget.ell_p, budget.p as f64),
    })
}
