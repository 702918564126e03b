use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use qcons::consensus::InitKind;
use qcons::experiments::{self, SweepConfig, SweepRow, TopologyTemplate, DEFAULT_MAX_TICKS_MULTIPLIER};
use qcons::{load_edge_list, rng, Graph, TopologySpec};

/// Quantized consensus simulator and random-walk analysis toolkit.
#[derive(Parser, Debug)]
#[command(name = "qcons", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the protocol on one graph and print one CSV row per trial.
    Simulate(SimulateArgs),
    /// Exact hitting/meeting analysis of the biased walk, as JSON.
    Analyze(AnalyzeArgs),
    /// Convergence-time sweep over topologies and sizes.
    Sweep(SweepArgs),
    /// Check the hitting, resistance and meeting bounds, as JSON.
    VerifyBounds(VerifyArgs),
}

#[derive(Args, Debug, Clone)]
struct GraphArgs {
    /// Topology such as complete:16, path:10, grid:4x4, erdos_renyi:20:0.3:7
    #[arg(long, conflicts_with = "edge_list")]
    topology: Option<TopologySpec>,
    /// Graph in edge-list format (first line "N M", then "u v" lines)
    #[arg(long)]
    edge_list: Option<PathBuf>,
}

impl GraphArgs {
    fn load(&self) -> Result<Option<(String, Graph)>> {
        if let Some(spec) = &self.topology {
            return Ok(Some((spec.to_string(), spec.build()?)));
        }
        if let Some(path) = &self.edge_list {
            return Ok(Some(load_graph_file(path)?));
        }
        Ok(None)
    }
}

fn load_graph_file(path: &Path) -> Result<(String, Graph)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let g = load_edge_list(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(("edge_list".to_string(), g))
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// JSON config file; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// binary_extremal, uniform or spike
    #[arg(long)]
    init: Option<InitKind>,
    /// Distance between the extreme initial values
    #[arg(long)]
    spread: Option<i64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Max-ticks multiplier c in c * n^3 * ln(n+1) * (spread+1)^2
    #[arg(long)]
    multiplier: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct SimulateFile {
    topology: Option<String>,
    edge_list: Option<PathBuf>,
    init_kind: Option<InitKind>,
    spread: Option<i64>,
    seed: Option<u64>,
    trials: Option<usize>,
    max_ticks_multiplier: Option<f64>,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Monte Carlo trials for the meeting-time estimate
    #[arg(long, default_value_t = 10_000)]
    mc_trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// JSON sweep config; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated topology families (erdos_renyi:p sets the edge probability)
    #[arg(long, value_delimiter = ',')]
    topologies: Option<Vec<TopologyTemplate>>,
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    init: Option<InitKind>,
    #[arg(long)]
    spread: Option<i64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    multiplier: Option<f64>,
    /// Write CSV rows here instead of stdout
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the summary JSON here instead of stderr
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct SweepFile {
    topologies: Option<Vec<TopologyTemplate>>,
    sizes: Option<Vec<usize>>,
    init_kind: Option<InitKind>,
    spread: Option<i64>,
    trials: Option<usize>,
    master_seed: Option<u64>,
    max_ticks_multiplier: Option<f64>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Topology to check; repeatable
    #[arg(long = "topology")]
    topologies: Vec<TopologySpec>,
    /// Edge-list file to check; repeatable
    #[arg(long = "edge-list")]
    edge_lists: Vec<PathBuf>,
    /// Also check this many random connected graphs
    #[arg(long, default_value_t = 0)]
    random: usize,
    /// Smallest random graph size
    #[arg(long, default_value_t = 4)]
    random_min: usize,
    /// Largest random graph size
    #[arg(long, default_value_t = 12)]
    random_max: usize,
    /// Edge probability for random graphs
    #[arg(long, default_value_t = 0.4)]
    random_p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let file: SimulateFile = match &args.config {
        Some(p) => read_json(p)?,
        None => SimulateFile::default(),
    };
    let (name, g) = match args.graph.load()? {
        Some(x) => x,
        None => match (&file.topology, &file.edge_list) {
            (Some(t), _) => {
                let spec: TopologySpec = t.parse()?;
                (spec.to_string(), spec.build()?)
            }
            (None, Some(p)) => load_graph_file(p)?,
            (None, None) => bail!("a graph is required: pass --topology or --edge-list"),
        },
    };
    let init = args.init.or(file.init_kind).unwrap_or(InitKind::BinaryExtremal);
    let spread = args.spread.or(file.spread).unwrap_or(2);
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let trials = args.trials.or(file.trials).unwrap_or(1);
    let multiplier = args
        .multiplier
        .or(file.max_ticks_multiplier)
        .unwrap_or(DEFAULT_MAX_TICKS_MULTIPLIER);
    if trials == 0 || spread < 1 || !(multiplier > 0.0) {
        bail!("trials and spread must be at least 1 and the multiplier positive");
    }
    let kind = name.split(':').next().unwrap_or(&name).to_string();
    let mut rows = Vec::with_capacity(trials);
    for trial in 0..trials {
        let run_seed = rng::derive_seed(seed, &[trial as u64]);
        let rec = experiments::simulate_once(&g, init, spread, run_seed, multiplier)?;
        rows.push(SweepRow {
            topology: kind.clone(),
            n: g.n(),
            seed: run_seed,
            trial,
            init_kind: init,
            spread: rec.initial_spread,
            ticks: rec.ticks,
            converged: rec.converged,
            nontrivial_meetings: rec.nontrivial_meetings,
        });
    }
    experiments::write_csv(&rows, io::stdout().lock())?;
    Ok(())
}

fn analyze(args: AnalyzeArgs) -> Result<()> {
    let Some((name, g)) = args.graph.load()? else {
        bail!("a graph is required: pass --topology or --edge-list");
    };
    let report = experiments::analyze(&name, &g, args.mc_trials, args.seed)?;
    print_json(&report)
}

fn sweep(args: SweepArgs) -> Result<()> {
    let file: SweepFile = match &args.config {
        Some(p) => read_json(p)?,
        None => SweepFile::default(),
    };
    let cfg = SweepConfig {
        topologies: args
            .topologies
            .or(file.topologies)
            .context("no topologies given (use --topologies or a config file)")?,
        sizes: args.sizes.or(file.sizes).context("no sizes given (use --sizes or a config file)")?,
        init_kind: args.init.or(file.init_kind).unwrap_or(InitKind::BinaryExtremal),
        spread: args.spread.or(file.spread).unwrap_or(2),
        trials: args.trials.or(file.trials).unwrap_or(10),
        master_seed: args.seed.or(file.master_seed).unwrap_or(0),
        max_ticks_multiplier: args
            .multiplier
            .or(file.max_ticks_multiplier)
            .unwrap_or(DEFAULT_MAX_TICKS_MULTIPLIER),
    };
    cfg.validate()?;
    let out = experiments::run_sweep(&cfg)?;
    match &args.csv {
        Some(p) => experiments::write_csv(&out.rows, fs::File::create(p)?)?,
        None => experiments::write_csv(&out.rows, io::stdout().lock())?,
    }
    let summary = serde_json::to_string_pretty(&out.summary)?;
    match &args.summary {
        Some(p) => fs::write(p, summary + "\n")?,
        None => eprintln!("{summary}"),
    }
    if out.summary.excessive_failures {
        eprintln!(
            "warning: {} of {} runs did not converge within the tick cap",
            out.summary.failures, out.summary.runs
        );
    }
    Ok(())
}

/// Returns whether every bound held.
fn verify(args: VerifyArgs) -> Result<bool> {
    let mut graphs: Vec<(String, Graph)> = Vec::new();
    for spec in &args.topologies {
        graphs.push((spec.to_string(), spec.build()?));
    }
    for path in &args.edge_lists {
        let (_, g) = load_graph_file(path)?;
        graphs.push((path.display().to_string(), g));
    }
    if args.random > 0 {
        if args.random_min < 2 || args.random_max < args.random_min {
            bail!("random graph sizes must satisfy 2 <= min <= max");
        }
        let span = (args.random_max - args.random_min + 1) as u64;
        for i in 0..args.random {
            let n = args.random_min + (rng::derive_seed(args.seed, &[i as u64, 0]) % span) as usize;
            let spec = TopologySpec::ErdosRenyi {
                n,
                p: args.random_p,
                seed: rng::derive_seed(args.seed, &[i as u64, 1]),
            };
            graphs.push((spec.to_string(), spec.build()?));
        }
    }
    if graphs.is_empty() {
        bail!("nothing to verify: pass --topology, --edge-list or --random");
    }
    let reports = graphs
        .iter()
        .enumerate()
        .map(|(i, (name, g))| experiments::verify_graph(name, g, rng::derive_seed(args.seed, &[i as u64, 2])))
        .collect::<qcons::Result<Vec<_>>>()?;
    print_json(&reports)?;
    Ok(reports.iter().all(|r| r.passes()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a).map(|_| true),
        Command::Analyze(a) => analyze(a).map(|_| true),
        Command::Sweep(a) => sweep(a).map(|_| true),
        Command::VerifyBounds(a) => verify(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: at least one bound was violated");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
