use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use rand::Rng;

use strangerauth::adversary;
use strangerauth::analytics::{self, NetworkParams};
use strangerauth::bits::Bits;
use strangerauth::graph::Graph;
use strangerauth::harness::{
    self, AdversaryModel, ExperimentConfig, SweepCell, Topology, TrialContext,
};
use strangerauth::pathselect;
use strangerauth::protocol::{
    self, Fnv1aDigest, Outcome, ProtocolParams, SecretTriple, TamperPolicy,
};
use strangerauth::seed::trial_rng;
use strangerauth::{Error, Result};

#[derive(Parser)]
#[command(
    name = "strangerauth",
    about = "Multipath key establishment in partially compromised networks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TamperMode {
    Passive,
    Modify,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph and write it in the edge-list text format.
    Generate {
        #[arg(long, value_enum, default_value = "uniform")]
        topology: Topology,
        #[arg(long)]
        nodes: usize,
        /// Exact edge count; defaults to the connectivity budget for the
        /// given honest fraction and epsilon.
        #[arg(long)]
        edges: Option<usize>,
        #[arg(long, default_value_t = 0.8)]
        honest: f64,
        #[arg(long, default_value_t = 0.001)]
        epsilon: f64,
        #[arg(long = "delta-nc", default_value_t = 0.002)]
        delta_nc: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path; `-` writes to stdout.
        #[arg(long, default_value = "-")]
        out: String,
    },

    /// Print the closed-form estimates for one parameter point.
    Analyze {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        honest: f64,
        #[arg(long, default_value_t = 0.001)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
        #[arg(long = "delta-nc", default_value_t = 0.002)]
        delta_nc: f64,
        /// Emit a machine-readable JSON record instead of the table.
        #[arg(long)]
        json: bool,
    },

    /// Run one full key-establishment exchange and print the transcript.
    ProtocolDemo {
        #[arg(long, value_enum, default_value = "uniform")]
        topology: Topology,
        #[arg(long, default_value_t = 256)]
        nodes: usize,
        #[arg(long, default_value_t = 0.8)]
        honest: f64,
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
        #[arg(long, default_value_t = 0.001)]
        epsilon: f64,
        #[arg(long = "delta-nc", default_value_t = 0.002)]
        delta_nc: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// What compromised intermediates do with shares in transit.
        #[arg(long, value_enum, default_value = "passive")]
        tamper: TamperMode,
        /// Read the graph from an edge-list file instead of generating.
        #[arg(long)]
        graph: Option<PathBuf>,
    },

    /// Run one Monte Carlo experiment cell.
    Simulate {
        #[arg(long, value_enum)]
        topology: Option<Topology>,
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long)]
        honest: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long = "delta-nc")]
        delta_nc: Option<f64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        adversary: Option<AdversaryModel>,
        /// Output path; `-` writes to stdout.
        #[arg(long)]
        out: Option<String>,
        #[arg(long, value_enum)]
        format: Option<OutputFormat>,
        /// Attach per-trial records (JSON) or write them to a sidecar
        /// `<out>.trials.csv` (CSV).
        #[arg(long)]
        dump_trials: bool,
        /// Flat key = value file mirroring these flags; explicit flags win.
        #[arg(long)]
        config: Option<PathBuf>,
    },

    /// Run a grid of experiment cells and write one row per cell.
    Sweep {
        /// Cap on the node count of the default doubling grid.
        #[arg(long)]
        max_nodes: Option<usize>,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutputFormat,
        /// Output path; `-` writes to stdout.
        #[arg(long, default_value = "-")]
        out: String,
        /// Grid file: comma-separated lists for topology, nodes, honest;
        /// scalars for the rest.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn main() {
    env_logger::init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate {
            topology,
            nodes,
            edges,
            honest,
            epsilon,
            delta_nc,
            seed,
            out,
        } => generate(topology, nodes, edges, honest, epsilon, delta_nc, seed, &out),
        Command::Analyze {
            nodes,
            honest,
            epsilon,
            delta,
            delta_nc,
            json,
        } => analyze(nodes, honest, epsilon, delta, delta_nc, json),
        Command::ProtocolDemo {
            topology,
            nodes,
            honest,
            delta,
            epsilon,
            delta_nc,
            seed,
            tamper,
            graph,
        } => protocol_demo(
            topology, nodes, honest, delta, epsilon, delta_nc, seed, tamper, graph,
        ),
        Command::Simulate {
            topology,
            nodes,
            honest,
            delta,
            epsilon,
            delta_nc,
            trials,
            seed,
            adversary,
            out,
            format,
            dump_trials,
            config,
        } => {
            let file = read_config(config.as_deref())?;
            let cfg = ExperimentConfig {
                topology: resolve(topology, &file, "topology", Topology::Uniform)?,
                n: resolve(nodes, &file, "nodes", 1024)?,
                t: resolve(honest, &file, "honest", 0.8)?,
                delta: resolve(delta, &file, "delta", 0.01)?,
                epsilon: resolve(epsilon, &file, "epsilon", 0.001)?,
                delta_nc: resolve(delta_nc, &file, "delta-nc", 0.002)?,
                trials: resolve(trials, &file, "trials", 1000)?,
                master_seed: resolve(seed, &file, "seed", 0)?,
                adversary: resolve(adversary, &file, "adversary", AdversaryModel::Random)?,
            };
            let out = match out {
                Some(o) => o,
                None => file.get("out").cloned().unwrap_or_else(|| "-".into()),
            };
            let format = match format {
                Some(f) => f,
                None => match file.get("format").map(String::as_str) {
                    Some("json") => OutputFormat::Json,
                    Some("csv") | None => OutputFormat::Csv,
                    Some(other) => {
                        return Err(Error::Config(format!("unknown format `{other}`")))
                    }
                },
            };
            simulate(cfg, &out, format, dump_trials)
        }
        Command::Sweep {
            max_nodes,
            trials,
            seed,
            format,
            out,
            config,
        } => {
            let grid = match config {
                Some(path) => grid_from_file(&path, seed, trials)?,
                None => harness::default_grid(seed, trials, max_nodes),
            };
            let cells = harness::sweep(&grid);
            write_cells(&cells, &out, format, false)
        }
    }
}

/// CLI value if given, else config-file value, else default.
fn resolve<T>(
    cli: Option<T>,
    file: &BTreeMap<String, String>,
    key: &str,
    default: T,
) -> Result<T>
where
    T: FromCliStr,
{
    if let Some(v) = cli {
        return Ok(v);
    }
    match file.get(key) {
        Some(raw) => T::from_cli_str(raw)
            .ok_or_else(|| Error::Config(format!("bad value `{raw}` for `{key}`"))),
        None => Ok(default),
    }
}

/// Parsing for config-file values, mirroring how clap parses the flags.
trait FromCliStr: Sized {
    fn from_cli_str(s: &str) -> Option<Self>;
}

impl FromCliStr for usize {
    fn from_cli_str(s: &str) -> Option<Self> {
        s.parse().ok()
    }
}

impl FromCliStr for u64 {
    fn from_cli_str(s: &str) -> Option<Self> {
        s.parse().ok()
    }
}

impl FromCliStr for f64 {
    fn from_cli_str(s: &str) -> Option<Self> {
        f64::from_str(s).ok()
    }
}

impl FromCliStr for Topology {
    fn from_cli_str(s: &str) -> Option<Self> {
        match s {
            "uniform" => Some(Topology::Uniform),
            "powerlaw" => Some(Topology::PowerLaw),
            _ => None,
        }
    }
}

impl FromCliStr for AdversaryModel {
    fn from_cli_str(s: &str) -> Option<Self> {
        match s {
            "random" => Some(AdversaryModel::Random),
            "targeted" => Some(AdversaryModel::Targeted),
            _ => None,
        }
    }
}

fn read_config(path: Option<&Path>) -> Result<BTreeMap<String, String>> {
    match path {
        None => Ok(BTreeMap::new()),
        Some(p) => harness::parse_config_file(&fs::read_to_string(p)?),
    }
}

/// Builds a sweep grid from a config file: `topology`, `nodes`, and
/// `honest` accept comma-separated lists and are crossed; the remaining
/// keys are scalars applied to every cell.
fn grid_from_file(path: &Path, default_seed: u64, default_trials: usize) -> Result<Vec<ExperimentConfig>> {
    let map = harness::parse_config_file(&fs::read_to_string(path)?)?;
    let list = |key: &str, fallback: &str| -> Vec<String> {
        map.get(key)
            .map(String::as_str)
            .unwrap_or(fallback)
            .split(',')
            .map(|s| s.trim().to_string())
            .collect()
    };
    let scalar = |key: &str| map.get(key).cloned();

    let mut grid = Vec::new();
    for topo_raw in list("topology", "uniform,powerlaw") {
        let topology = Topology::from_cli_str(&topo_raw)
            .ok_or_else(|| Error::Config(format!("bad topology `{topo_raw}`")))?;
        for n_raw in list("nodes", "128,256,512,1024") {
            let n: usize = n_raw
                .parse()
                .map_err(|_| Error::Config(format!("bad node count `{n_raw}`")))?;
            for t_raw in list("honest", "0.4,0.6,0.8") {
                let t: f64 = t_raw
                    .parse()
                    .map_err(|_| Error::Config(format!("bad honest fraction `{t_raw}`")))?;
                let mut cfg = ExperimentConfig::new(topology, n, t);
                if let Some(v) = scalar("delta") {
                    cfg.delta = v.parse().map_err(|_| Error::Config("bad delta".into()))?;
                }
                if let Some(v) = scalar("epsilon") {
                    cfg.epsilon = v.parse().map_err(|_| Error::Config("bad epsilon".into()))?;
                }
                if let Some(v) = scalar("delta-nc") {
                    cfg.delta_nc = v
                        .parse()
                        .map_err(|_| Error::Config("bad delta-nc".into()))?;
                }
                if let Some(v) = scalar("adversary") {
                    cfg.adversary = AdversaryModel::from_cli_str(&v)
                        .ok_or_else(|| Error::Config(format!("bad adversary `{v}`")))?;
                }
                cfg.trials = match scalar("trials") {
                    Some(v) => v.parse().map_err(|_| Error::Config("bad trials".into()))?,
                    None => default_trials,
                };
                cfg.master_seed = match scalar("seed") {
                    Some(v) => v.parse().map_err(|_| Error::Config("bad seed".into()))?,
                    None => default_seed,
                };
                grid.push(cfg);
            }
        }
    }
    Ok(grid)
}

fn open_out(path: &str) -> Result<Box<dyn Write>> {
    Ok(match path {
        "-" => Box::new(io::stdout().lock()),
        p => Box::new(fs::File::create(p)?),
    })
}

#[allow(clippy::too_many_arguments)]
fn generate(
    topology: Topology,
    nodes: usize,
    edges: Option<usize>,
    honest: f64,
    epsilon: f64,
    delta_nc: f64,
    seed: u64,
    out: &str,
) -> Result<()> {
    let mut rng = trial_rng(seed, 0);
    let graph = match topology {
        Topology::Uniform => {
            let e = match edges {
                Some(e) => e,
                None => analytics::edges_required(nodes, honest, epsilon)?,
            };
            strangerauth::graphgen::gen_uniform(nodes, e, &mut rng)?
        }
        Topology::PowerLaw => {
            let goal = match edges {
                Some(e) => e,
                None => analytics::edges_required(nodes, honest, epsilon)?,
            };
            let k_min = if honest < 1.0 {
                analytics::min_degree(honest, delta_nc)?
            } else {
                1
            };
            let fit = analytics::powerlaw_gamma(nodes, k_min, goal as f64)?;
            let plan = strangerauth::graphgen::plan_powerlaw(nodes, k_min, fit.gamma)?;
            let generated = strangerauth::graphgen::gen_powerlaw(&plan, &mut rng);
            if generated.unmatched_stubs > 0 {
                log::info!(
                    "{} degree stubs left unmatched",
                    generated.unmatched_stubs
                );
            }
            generated.graph
        }
    };
    graph.write_edge_list(open_out(out)?)?;
    Ok(())
}

fn analyze(
    nodes: usize,
    honest: f64,
    epsilon: f64,
    delta: f64,
    delta_nc: f64,
    json: bool,
) -> Result<()> {
    let report = analytics::analyze(&NetworkParams {
        n: nodes,
        t: honest,
        epsilon,
        delta,
        delta_nc,
    })?;
    let mut out = io::stdout().lock();
    if json {
        serde_json::to_writer_pretty(&mut out, &report)
            .map_err(|e| Error::Config(format!("json serialization failed: {e}")))?;
        writeln!(out)?;
    } else {
        writeln!(out, "n           {}", report.n)?;
        writeln!(out, "t           {}", report.t)?;
        writeln!(out, "epsilon     {}", report.epsilon)?;
        writeln!(out, "delta       {}", report.delta)?;
        writeln!(out, "delta_nc    {}", report.delta_nc)?;
        writeln!(out, "edges       {}", report.edges)?;
        writeln!(out, "mean_degree {:.3}", report.mean_degree)?;
        writeln!(out, "diameter    {:.3}", report.diameter)?;
        writeln!(out, "paths       {}", report.paths)?;
        writeln!(out, "ell_p       {:.3}", report.ell_p)?;
        writeln!(out, "k_min       {}", report.k_min)?;
        writeln!(out, "gamma       {:.6}", report.gamma)?;
        writeln!(out, "relay_load  {:.1}", report.relay_load)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn protocol_demo(
    topology: Topology,
    nodes: usize,
    honest: f64,
    delta: f64,
    epsilon: f64,
    delta_nc: f64,
    seed: u64,
    tamper: TamperMode,
    graph_path: Option<PathBuf>,
) -> Result<()> {
    let mut cfg = ExperimentConfig::new(topology, nodes, honest);
    cfg.delta = delta;
    cfg.epsilon = epsilon;
    cfg.delta_nc = delta_nc;
    cfg.master_seed = seed;
    let ctx = TrialContext::build(&cfg)?;

    let mut rng = trial_rng(seed, 0);
    let graph = match graph_path {
        Some(path) => Graph::read_edge_list(BufReader::new(fs::File::open(path)?))?,
        None => ctx.build_graph(&mut rng),
    };
    let mask = adversary::compromise_random(graph.node_count(), honest, &mut rng)?;
    let honest_ids: Vec<_> = (0..graph.node_count() as u32)
        .filter(|&v| !mask.is_compromised(v))
        .collect();
    let mut endpoints = None;
    for _ in 0..1000 {
        let a = honest_ids[rng.random_range(0..honest_ids.len())];
        let b = honest_ids[rng.random_range(0..honest_ids.len())];
        if a != b && !graph.has_edge(a, b) {
            endpoints = Some((a, b));
            break;
        }
    }
    let Some((a, b)) = endpoints else {
        return Err(Error::Config(
            "no honest non-adjacent endpoint pair in this graph".into(),
        ));
    };

    let set = pathselect::select_paths(&graph, a, b, ctx.path_budget);
    if set.paths.is_empty() {
        return Err(Error::Config(format!(
            "nodes {a} and {b} are disconnected; no exchange possible"
        )));
    }

    let params = ProtocolParams::default();
    let digest = Fnv1aDigest::new(params.h_len);
    let secret = SecretTriple::random(&params, &mut rng);
    let shares = protocol::split_secret(&secret.encode(), set.paths.len(), &mut rng);
    let policy = match tamper {
        TamperMode::Passive => TamperPolicy::Passive,
        TamperMode::Modify => {
            TamperPolicy::Modify(Bits::random(params.total_len(), &mut rng))
        }
    };

    let mut out = io::stdout().lock();
    for path in &set.paths {
        let line: Vec<String> = path.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    let mut delivered = Vec::new();
    for (i, (share, path)) in shares.shares.iter().zip(&set.paths).enumerate() {
        let d = protocol::transmit_share(share, path, &mask, &policy);
        writeln!(out, "# learned {i}: {}", d.learned)?;
        delivered.push(d.delivered);
    }
    let reconstructed = protocol::combine_shares(&protocol::ShareSet { shares: delivered })?;
    let s_prime = SecretTriple::from_secret(&reconstructed, &params)?;
    let transcript = protocol::run_exchange(&secret, &s_prime, &mut rng, &digest)?;
    let outcome = match transcript.outcome {
        Outcome::Accept => "accept",
        Outcome::RejectBob => "reject_bob",
        Outcome::RejectAlice => "reject_alice",
    };
    writeln!(out, "# endpoints: {a} {b}")?;
    writeln!(out, "# shortfall: {}", set.shortfall)?;
    writeln!(out, "# outcome: {outcome}")?;
    match transcript.derived_key {
        Some(key) => writeln!(out, "# key: {}", key.to_hex())?,
        None => writeln!(out, "# key: none")?,
    }
    Ok(())
}

fn simulate(
    cfg: ExperimentConfig,
    out: &str,
    format: OutputFormat,
    dump_trials: bool,
) -> Result<()> {
    let summary = harness::run_experiment(&cfg)?;
    let cells = vec![SweepCell {
        config: cfg,
        result: Ok(summary),
    }];
    write_cells(&cells, out, format, dump_trials)
}

fn write_cells(
    cells: &[SweepCell],
    out: &str,
    format: OutputFormat,
    dump_trials: bool,
) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            harness::write_csv(cells, open_out(out)?)?;
            if dump_trials {
                let side = if out == "-" {
                    "trials.csv".to_string()
                } else {
                    format!("{out}.trials.csv")
                };
                let mut w = csv::Writer::from_writer(open_out(&side)?);
                for cell in cells {
                    if let Ok(summary) = &cell.result {
                        for record in &summary.records {
                            w.serialize(record).map_err(|e| {
                                Error::Config(format!("csv serialization failed: {e}"))
                            })?;
                        }
                    }
                }
                w.flush()
                    .map_err(|e| Error::Config(format!("csv flush failed: {e}")))?;
            }
            Ok(())
        }
        OutputFormat::Json => harness::write_json(cells, dump_trials, open_out(out)?),
    }
}
