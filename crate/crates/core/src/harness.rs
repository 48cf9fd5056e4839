//! Seeded Monte Carlo experiments: per-trial graph generation, adversary
//! placement, endpoint sampling, path selection, and aggregation into
//! summaries, sweeps, and CSV/JSON rows.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::{Duration, Instant};

use clap::ValueEnum;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::adversary::{self, CompromiseMask};
use crate::analytics;
use crate::error::{Error, Result};
use crate::graph::{DegreeHistogram, Graph, NodeId};
use crate::graphgen::{self, PowerLawPlan};
use crate::pathselect;
use crate::seed::trial_rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Uniform,
    #[value(name = "powerlaw")]
    #[serde(rename = "powerlaw")]
    PowerLaw,
}

impl Topology {
    pub fn name(&self) -> &'static str {
        match self {
            Topology::Uniform => "uniform",
            Topology::PowerLaw => "powerlaw",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum AdversaryModel {
    /// Uniformly random subset of exactly floor((1-t) N) nodes.
    Random,
    /// The floor((1-t) N) highest-degree nodes.
    Targeted,
}

/// One experiment cell: everything a trial needs, all explicit so a
/// summary can be reproduced from its row.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub topology: Topology,
    pub n: usize,
    pub t: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub delta_nc: f64,
    pub trials: usize,
    pub master_seed: u64,
    pub adversary: AdversaryModel,
}

impl ExperimentConfig {
    /// Defaults: delta 0.01 with epsilon = delta / 10, delta_nc 0.002,
    /// 1000 trials, random adversary.
    pub fn new(topology: Topology, n: usize, t: f64) -> Self {
        ExperimentConfig {
            topology,
            n,
            t,
            delta: 0.01,
            epsilon: 0.001,
            delta_nc: 0.002,
            trials: 1000,
            master_seed: 0,
            adversary: AdversaryModel::Random,
        }
    }

    pub fn with_seed(mut self, master_seed: u64) -> Self {
        self.master_seed = master_seed;
        self
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.n < 4 {
            return Err(Error::Config(format!(
                "need at least 4 nodes, got {}",
                self.n
            )));
        }
        if !(self.t > 0.0 && self.t <= 1.0) {
            return Err(Error::Config(format!(
                "honest fraction t must be in (0, 1], got {}",
                self.t
            )));
        }
        for (name, v) in [
            ("delta", self.delta),
            ("epsilon", self.epsilon),
            ("delta_nc", self.delta_nc),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Config(format!("{name} must be in (0, 1), got {v}")));
            }
        }
        Ok(())
    }
}

/// Outcome of a single trial.
#[derive(Clone, Debug, Serialize)]
pub struct TrialRecord {
    pub trial_index: usize,
    /// No selected path was fully honest (or no path existed at all).
    pub compromised: bool,
    /// No usable endpoint pair, or the pair had no connecting path.
    pub disconnected: bool,
    /// Hop count of the longest selected path; 0 when none was found.
    pub longest_path_len: usize,
    pub paths_found: usize,
    pub shortfall: usize,
}

/// Per-cell derived quantities, computed once and shared by all trials.
#[derive(Clone, Debug)]
pub struct TrialContext {
    pub config: ExperimentConfig,
    pub edge_budget: usize,
    pub path_budget: usize,
    pub k_min: Option<u32>,
    pub gamma: Option<f64>,
    plan: Option<PowerLawPlan>,
}

impl TrialContext {
    pub fn build(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let edge_budget = analytics::edges_required(config.n, config.t, config.epsilon)?;
        let max = config.n * (config.n - 1) / 2;
        if edge_budget > max {
            return Err(Error::Config(format!(
                "edge budget {edge_budget} exceeds the complete graph on {} nodes; \
                 raise epsilon or the node count",
                config.n
            )));
        }
        let mean_degree = analytics::mean_degree(config.n, edge_budget);
        let path_budget =
            analytics::paths_required(config.n, config.t, mean_degree, config.delta)?.p;
        let (k_min, gamma, plan) = match config.topology {
            Topology::Uniform => (None, None, None),
            Topology::PowerLaw => {
                // With nobody compromised any degree works; keep the
                // generator meaningful with the trivial cutoff.
                let k_min = if config.t < 1.0 {
                    analytics::min_degree(config.t, config.delta_nc)?
                } else {
                    1
                };
                let fit = analytics::powerlaw_gamma(config.n, k_min, edge_budget as f64)?;
                let plan = graphgen::plan_powerlaw(config.n, k_min, fit.gamma)?;
                (Some(k_min), Some(fit.gamma), Some(plan))
            }
        };
        Ok(TrialContext {
            config: config.clone(),
            edge_budget,
            path_budget,
            k_min,
            gamma,
            plan,
        })
    }

    pub fn build_graph(&self, rng: &mut impl Rng) -> Graph {
        match self.config.topology {
            Topology::Uniform => graphgen::gen_uniform(self.config.n, self.edge_budget, rng)
                .expect("edge budget validated against the complete-graph bound"),
            Topology::PowerLaw => {
                graphgen::gen_powerlaw(self.plan.as_ref().expect("plan exists"), rng).graph
            }
        }
    }

    fn build_mask(&self, graph: &Graph, rng: &mut impl Rng) -> CompromiseMask {
        match self.config.adversary {
            AdversaryModel::Random => {
                adversary::compromise_random(self.config.n, self.config.t, rng)
                    .expect("t validated")
            }
            AdversaryModel::Targeted => {
                let count = adversary::compromised_count(self.config.n, self.config.t);
                adversary::compromise_targeted(graph, count).expect("count <= N")
            }
        }
    }

    /// Runs one trial under this context. Deterministic in
    /// `(config, trial_index)`: the trial generator is consumed in a
    /// fixed order (graph, mask, endpoints).
    pub fn run_trial(&self, trial_index: usize) -> TrialRecord {
        let cfg = &self.config;
        let mut rng = trial_rng(cfg.master_seed, trial_index as u64);
        let graph = self.build_graph(&mut rng);
        let mask = self.build_mask(&graph, &mut rng);

        let honest: Vec<NodeId> = (0..cfg.n as NodeId)
            .filter(|&v| !mask.is_compromised(v))
            .collect();
        let mut endpoints = None;
        if honest.len() >= 2 {
            for _ in 0..1000 {
                let a = honest[rng.random_range(0..honest.len())];
                let b = honest[rng.random_range(0..honest.len())];
                if a != b && !graph.has_edge(a, b) {
                    endpoints = Some((a, b));
                    break;
                }
            }
        }
        let Some((a, b)) = endpoints else {
            // No honest non-adjacent pair: scored as a conservative loss.
            return TrialRecord {
                trial_index,
                compromised: true,
                disconnected: true,
                longest_path_len: 0,
                paths_found: 0,
                shortfall: self.path_budget,
            };
        };

        let set = pathselect::select_paths(&graph, a, b, self.path_budget);
        if set.paths.is_empty() {
            return TrialRecord {
                trial_index,
                compromised: true,
                disconnected: true,
                longest_path_len: 0,
                paths_found: 0,
                shortfall: set.shortfall,
            };
        }
        let compromised = set
            .paths
            .iter()
            .all(|p| !pathselect::path_is_honest(p, &mask));
        let longest = set.paths.iter().map(|p| p.len() - 1).max().unwrap_or(0);
        TrialRecord {
            trial_index,
            compromised,
            disconnected: false,
            longest_path_len: longest,
            paths_found: set.paths.len(),
            shortfall: set.shortfall,
        }
    }
}

/// Runs a single trial from scratch. Prefer [`run_experiment`] for many
/// trials; it builds the shared context once.
pub fn run_trial(config: &ExperimentConfig, trial_index: usize) -> Result<TrialRecord> {
    Ok(TrialContext::build(config)?.run_trial(trial_index))
}

/// Aggregated results of one experiment cell.
#[derive(Clone, Debug)]
pub struct ExperimentSummary {
    pub config: ExperimentConfig,
    /// Fraction of trials where every selected path was compromised.
    pub delta_hat: f64,
    /// Nearest-rank 99th percentile of the per-trial longest path.
    pub p99_longest_path: usize,
    pub mean_paths: f64,
    /// Fraction of trials that found fewer paths than requested.
    pub shortfall_rate: f64,
    pub edge_budget: usize,
    pub path_budget: usize,
    pub k_min: Option<u32>,
    pub gamma: Option<f64>,
    /// Degree histogram of a sample graph (trial 0).
    pub degree_histogram: DegreeHistogram,
    pub wall_time: Duration,
    pub records: Vec<TrialRecord>,
}

/// Nearest-rank percentile: the ceil(q * len)-th smallest value.
fn nearest_rank(sorted: &[usize], q: f64) -> usize {
    assert!(!sorted.is_empty());
    let rank = (q * sorted.len() as f64).ceil().max(1.0) as usize;
    sorted[rank.min(sorted.len()) - 1]
}

/// Runs all trials of one cell (in parallel when a thread pool is
/// available) and aggregates. Aggregation is order-independent, so the
/// result does not depend on scheduling.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentSummary> {
    let started = Instant::now();
    let ctx = TrialContext::build(config)?;
    let records: Vec<TrialRecord> = (0..config.trials)
        .into_par_iter()
        .map(|i| ctx.run_trial(i))
        .collect();

    let trials = records.len() as f64;
    let delta_hat = records.iter().filter(|r| r.compromised).count() as f64 / trials;
    let mut longest: Vec<usize> = records.iter().map(|r| r.longest_path_len).collect();
    longest.sort_unstable();
    let p99 = nearest_rank(&longest, 0.99);
    let mean_paths = records.iter().map(|r| r.paths_found).sum::<usize>() as f64 / trials;
    let shortfall_rate = records.iter().filter(|r| r.shortfall > 0).count() as f64 / trials;
    let degree_histogram = ctx
        .build_graph(&mut trial_rng(config.master_seed, 0))
        .degree_histogram();

    Ok(ExperimentSummary {
        config: config.clone(),
        delta_hat,
        p99_longest_path: p99,
        mean_paths,
        shortfall_rate,
        edge_budget: ctx.edge_budget,
        path_budget: ctx.path_budget,
        k_min: ctx.k_min,
        gamma: ctx.gamma,
        degree_histogram,
        wall_time: started.elapsed(),
        records,
    })
}

/// One sweep cell: the configuration plus its result, which may be a
/// per-cell error. A failing cell never aborts the sweep.
pub struct SweepCell {
    pub config: ExperimentConfig,
    pub result: Result<ExperimentSummary>,
}

/// Runs every cell of `configs` in order.
pub fn sweep(configs: &[ExperimentConfig]) -> Vec<SweepCell> {
    configs
        .iter()
        .map(|config| SweepCell {
            config: config.clone(),
            result: run_experiment(config),
        })
        .collect()
}

/// The default sweep grid: N doubling from 128 to 32768, t in
/// {0.4, 0.6, 0.8}, both topologies. `max_nodes` truncates the N range.
pub fn default_grid(
    master_seed: u64,
    trials: usize,
    max_nodes: Option<usize>,
) -> Vec<ExperimentConfig> {
    let cap = max_nodes.unwrap_or(32_768);
    let mut grid = Vec::new();
    for topology in [Topology::Uniform, Topology::PowerLaw] {
        for t in [0.4, 0.6, 0.8] {
            let mut n = 128;
            while n <= cap {
                grid.push(
                    ExperimentConfig::new(topology, n, t)
                        .with_seed(master_seed)
                        .with_trials(trials),
                );
                n *= 2;
            }
        }
    }
    grid
}

/// Flat serialized view of one summary; the column order here is the CSV
/// column contract.
#[derive(Serialize)]
struct SummaryRow<'a> {
    topology: &'a str,
    n: usize,
    t: f64,
    trials: usize,
    edges: Option<usize>,
    paths: Option<usize>,
    k_min: Option<u32>,
    gamma: Option<f64>,
    delta_hat: Option<f64>,
    p99_longest_path: Option<usize>,
    mean_paths: Option<f64>,
    shortfall_rate: Option<f64>,
    seed: u64,
}

fn row_for(cell: &SweepCell) -> SummaryRow<'_> {
    let cfg = &cell.config;
    let base = SummaryRow {
        topology: cfg.topology.name(),
        n: cfg.n,
        t: cfg.t,
        trials: cfg.trials,
        edges: None,
        paths: None,
        k_min: None,
        gamma: None,
        delta_hat: None,
        p99_longest_path: None,
        mean_paths: None,
        shortfall_rate: None,
        seed: cfg.master_seed,
    };
    match &cell.result {
        Err(_) => base,
        Ok(s) => SummaryRow {
            edges: Some(s.edge_budget),
            paths: Some(s.path_budget),
            k_min: s.k_min,
            gamma: s.gamma.map(|g| (g * 1e6).round() / 1e6),
            delta_hat: Some(s.delta_hat),
            p99_longest_path: Some(s.p99_longest_path),
            mean_paths: Some(s.mean_paths),
            shortfall_rate: Some(s.shortfall_rate),
            ..base
        },
    }
}

/// Writes one CSV row per cell with the documented column order. Failed
/// cells keep their configuration columns and leave the metrics empty.
pub fn write_csv<W: Write>(cells: &[SweepCell], w: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    for cell in cells {
        writer
            .serialize(row_for(cell))
            .map_err(|e| Error::Config(format!("csv serialization failed: {e}")))?;
    }
    writer
        .flush()
        .map_err(|e| Error::Config(format!("csv flush failed: {e}")))?;
    Ok(())
}

#[derive(Serialize)]
struct JsonRow<'a> {
    #[serde(flatten)]
    row: SummaryRow<'a>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trial_records: Option<&'a [TrialRecord]>,
}

/// Writes a JSON array with one object per cell, mirroring the CSV
/// fields. `dump_trials` attaches the per-trial records to each object.
pub fn write_json<W: Write>(cells: &[SweepCell], dump_trials: bool, w: W) -> Result<()> {
    let rows: Vec<JsonRow> = cells
        .iter()
        .map(|cell| JsonRow {
            row: row_for(cell),
            error: cell.result.as_ref().err().map(|e| e.to_string()),
            trial_records: match (&cell.result, dump_trials) {
                (Ok(s), true) => Some(&s.records),
                _ => None,
            },
        })
        .collect();
    serde_json::to_writer_pretty(w, &rows)
        .map_err(|e| Error::Config(format!("json serialization failed: {e}")))?;
    Ok(())
}

/// Parses the flat `key = value` config-file format. `#` starts a
/// comment; keys mirror the CLI long flags.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "line {}: expected `key = value`, got `{raw}`",
                lineno + 1
            )));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() || value.is_empty() {
            return Err(Error::Config(format!(
                "line {}: empty key or value in `{raw}`",
                lineno + 1
            )));
        }
        map.insert(key, value);
    }
    Ok(map)
}
