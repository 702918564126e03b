//! Experiment drivers: convergence-time sweeps with log-log scaling fits,
//! bound verification reports, and per-graph analysis summaries.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::chain::{self, HittingTimes, JointKernel, JointVariant};
use crate::consensus::{self, InitKind, SimRecord};
use crate::electric;
use crate::error::{Error, Result};
use crate::graph::{Graph, TopologyKind, TopologySpec};
use crate::rng;
use crate::stats::{self, Estimate};
use crate::walk::{TransitionKernel, WalkKind};

pub const DEFAULT_MAX_TICKS_MULTIPLIER: f64 = 64.0;

/// Exact hitting times are computed up to this many nodes.
pub const MAX_EXACT_HITTING_N: usize = 60;
/// Exact product-chain meeting times are computed up to this many nodes.
pub const MAX_EXACT_MEETING_REPORT_N: usize = 25;

pub const CSV_HEADER: [&str; 9] = [
    "topology",
    "n",
    "seed",
    "trial",
    "init_kind",
    "spread",
    "ticks",
    "converged",
    "nontrivial_meetings",
];

/// A topology family instantiated at each sweep size. `p` is only used by
/// Erdős–Rényi graphs and defaults to `min(1, 2 ln n / n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopologyTemplate {
    pub kind: TopologyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
}

impl TopologyTemplate {
    pub fn new(kind: TopologyKind) -> Self {
        TopologyTemplate { kind, p: None }
    }

    /// Grids use the most nearly square `rows x cols` factorization of `n`.
    pub fn instantiate(&self, n: usize, seed: u64) -> TopologySpec {
        match self.kind {
            TopologyKind::Complete => TopologySpec::Complete { n },
            TopologyKind::Path => TopologySpec::Path { n },
            TopologyKind::Cycle => TopologySpec::Cycle { n },
            TopologyKind::Star => TopologySpec::Star { n },
            TopologyKind::Grid => {
                let rows = (1..=n).take_while(|r| r * r <= n).filter(|r| n.is_multiple_of(*r)).last().unwrap_or(1);
                TopologySpec::Grid { rows, cols: n / rows }
            }
            TopologyKind::ErdosRenyi => {
                let nf = n as f64;
                let p = self.p.unwrap_or_else(|| (2.0 * nf.ln() / nf).min(1.0));
                TopologySpec::ErdosRenyi { n, p, seed }
            }
        }
    }
}

impl std::str::FromStr for TopologyTemplate {
    type Err = Error;

    /// `kind` or `erdos_renyi:p`.
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None => Ok(TopologyTemplate::new(s.parse()?)),
            Some((kind, p)) => {
                let kind: TopologyKind = kind.parse()?;
                if kind != TopologyKind::ErdosRenyi {
                    return Err(Error::InvalidArgument(format!("only erdos_renyi takes a parameter: {s:?}")));
                }
                let p = p
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad edge probability in {s:?}")))?;
                Ok(TopologyTemplate { kind, p: Some(p) })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub topologies: Vec<TopologyTemplate>,
    pub sizes: Vec<usize>,
    pub init_kind: InitKind,
    pub spread: i64,
    pub trials: usize,
    pub master_seed: u64,
    #[serde(default = "default_multiplier")]
    pub max_ticks_multiplier: f64,
}

fn default_multiplier() -> f64 {
    DEFAULT_MAX_TICKS_MULTIPLIER
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.topologies.is_empty() {
            return bad("at least one topology is required");
        }
        if self.sizes.is_empty() || self.sizes.iter().any(|&n| n < 2) {
            return bad("sizes must be non-empty and each at least 2");
        }
        if self.trials < 1 {
            return bad("trials must be at least 1");
        }
        if self.spread < 1 {
            return bad("spread must be at least 1");
        }
        if !(self.max_ticks_multiplier > 0.0) {
            return bad("max_ticks_multiplier must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub topology: String,
    pub n: usize,
    pub seed: u64,
    pub trial: usize,
    pub init_kind: InitKind,
    pub spread: i64,
    pub ticks: u64,
    pub converged: bool,
    pub nontrivial_meetings: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SizeSummary {
    pub n: usize,
    pub mean_ticks: f64,
    pub std_ticks: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitSummary {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopologySummary {
    pub name: String,
    pub sizes: Vec<SizeSummary>,
    /// Absent when fewer than three sizes were swept.
    pub fit: Option<FitSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub runs: usize,
    pub failures: usize,
    /// More than 1% of runs hit the tick cap.
    pub excessive_failures: bool,
    pub per_topology: Vec<TopologySummary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    pub summary: SweepSummary,
}

/// Simulates one run and returns its record; the RNG streams for both the
/// initial values and the protocol derive from `seed`.
pub fn simulate_once(
    g: &Graph,
    init_kind: InitKind,
    spread: i64,
    seed: u64,
    multiplier: f64,
) -> Result<SimRecord> {
    let values = init_kind.generate(g.n(), spread, &mut rng::stream(seed, &[0]));
    let cap = consensus::default_max_ticks(g.n(), consensus::spread(&values), multiplier);
    consensus::run(g, values, rng::derive_seed(seed, &[1]), cap.max(1)).map(|mut r| {
        r.seed = seed;
        r
    })
}

/// Runs every `(topology, n, trial)` cell. Per-run seeds derive from
/// `(master_seed, topology index, n, trial)`; rows come out ordered by
/// topology, size and trial.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    let mut rows = Vec::new();
    let mut per_topology = Vec::new();
    for (ti, template) in cfg.topologies.iter().enumerate() {
        let name = template.kind.name().to_string();
        let mut sizes = Vec::new();
        for &n in &cfg.sizes {
            let graph_seed = rng::derive_seed(cfg.master_seed, &[ti as u64, n as u64, u64::MAX]);
            let g = template.instantiate(n, graph_seed).build()?;
            let mut ticks = Vec::with_capacity(cfg.trials);
            for trial in 0..cfg.trials {
                let seed = rng::derive_seed(cfg.master_seed, &[ti as u64, n as u64, trial as u64]);
                let rec = simulate_once(&g, cfg.init_kind, cfg.spread, seed, cfg.max_ticks_multiplier)?;
                ticks.push(rec.ticks as f64);
                rows.push(SweepRow {
                    topology: name.clone(),
                    n: g.n(),
                    seed,
                    trial,
                    init_kind: cfg.init_kind,
                    spread: rec.initial_spread,
                    ticks: rec.ticks,
                    converged: rec.converged,
                    nontrivial_meetings: rec.nontrivial_meetings,
                });
            }
            sizes.push(SizeSummary {
                n: g.n(),
                mean_ticks: stats::mean(&ticks),
                std_ticks: stats::sample_std(&ticks),
            });
        }
        let points: Vec<(f64, f64)> = sizes.iter().map(|s| (s.n as f64, s.mean_ticks)).collect();
        let fit = fit_scaling(&points).ok().map(|f| FitSummary {
            slope: f.slope,
            intercept: f.intercept,
            r2: f.r_squared,
        });
        per_topology.push(TopologySummary { name, sizes, fit });
    }
    let runs = rows.len();
    let failures = rows.iter().filter(|r| !r.converged).count();
    Ok(SweepOutput {
        summary: SweepSummary {
            runs,
            failures,
            excessive_failures: failures * 100 > runs,
            per_topology,
        },
        rows,
    })
}

/// Writes rows as CSV with the fixed header.
pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let io = |e: csv::Error| Error::InvalidArgument(format!("csv write failed: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        w.write_record([
            r.topology.clone(),
            r.n.to_string(),
            r.seed.to_string(),
            r.trial.to_string(),
            r.init_kind.name().to_string(),
            r.spread.to_string(),
            r.ticks.to_string(),
            r.converged.to_string(),
            r.nontrivial_meetings.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::InvalidArgument(format!("csv write failed: {e}")))?;
    Ok(())
}

pub fn csv_string(rows: &[SweepRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// Least-squares line through `(ln n, ln mean)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: Vec<(f64, f64)>,
}

pub fn fit_scaling(points: &[(f64, f64)]) -> Result<ScalingFit> {
    let mut distinct: Vec<f64> = points.iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "scaling fit needs at least 3 distinct sizes, got {}",
            distinct.len()
        )));
    }
    if let Some(p) = points.iter().find(|p| !(p.0 > 0.0 && p.1 > 0.0)) {
        return Err(Error::InvalidArgument(format!("non-positive point {p:?}")));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(n, t)| (n.ln(), t.ln())).collect();
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(ScalingFit {
        slope,
        intercept,
        r_squared,
        points: logs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    MonteCarlo,
}

/// Per-graph bound check: hitting time against `3 n^3`, effective
/// resistance against `3 n^2`, meeting time against `4 H(G)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub topology: String,
    pub n: usize,
    pub max_r_eff: f64,
    pub bound_r: f64,
    pub max_hitting: f64,
    pub bound_h: f64,
    pub hitting_method: Method,
    pub witness_pair: (usize, usize),
    pub meeting: f64,
    pub bound_m: f64,
    pub meeting_method: Method,
    pub resistance_ok: bool,
    pub hitting_ok: bool,
    pub meeting_ok: bool,
    pub notes: Vec<String>,
}

impl BoundReport {
    pub fn passes(&self) -> bool {
        self.resistance_ok && self.hitting_ok && self.meeting_ok
    }
}

const MC_TRIALS: usize = 500;

pub fn verify_graph(name: &str, g: &Graph, seed: u64) -> Result<BoundReport> {
    let n = g.n();
    let nf = n as f64;
    let res = electric::resistance_report_unchecked(g)?;
    let mut notes = Vec::new();
    let (x, y) = res.witness_pair;

    let (max_hitting, hitting_method, hitting) = if n <= MAX_EXACT_HITTING_N {
        let k = TransitionKernel::build(g, WalkKind::Biased)?;
        let h = HittingTimes::compute(&k)?;
        (h.max().0, Method::Exact, Some(h))
    } else {
        notes.push(format!(
            "n = {n} exceeds {MAX_EXACT_HITTING_N}: hitting time estimated by Monte Carlo from the resistance witness pair"
        ));
        let est = chain::mc_hitting_time(g, x, y, MC_TRIALS, rng::derive_seed(seed, &[0]))?;
        (est.mean, Method::MonteCarlo, None)
    };

    let bound_h = 3.0 * nf.powi(3);
    let (meeting, meeting_method) = if n <= MAX_EXACT_MEETING_REPORT_N {
        let m = JointKernel::build(g, JointVariant::Interacting)?.exact_meeting_times()?;
        (m.max().0, Method::Exact)
    } else {
        notes.push(format!(
            "n = {n} exceeds {MAX_EXACT_MEETING_REPORT_N}: meeting time estimated by Monte Carlo from the resistance witness pair"
        ));
        let est = chain::mc_meeting_time(g, x, y, MC_TRIALS, rng::derive_seed(seed, &[1]))?;
        (est.mean, Method::MonteCarlo)
    };
    // The meeting bound is stated against H(G); without exact hitting
    // times the proven 3n^3 ceiling stands in for it.
    let bound_m = 4.0 * if hitting.is_some() { max_hitting } else { bound_h };

    Ok(BoundReport {
        topology: name.to_string(),
        n,
        max_r_eff: res.max_r_eff,
        bound_r: res.bound_r,
        max_hitting,
        bound_h,
        hitting_method,
        witness_pair: res.witness_pair,
        meeting,
        bound_m,
        meeting_method,
        resistance_ok: res.max_r_eff < res.bound_r,
        hitting_ok: max_hitting < bound_h,
        meeting_ok: meeting <= bound_m,
        notes,
    })
}

pub fn verify_bounds(specs: &[TopologySpec], seed: u64) -> Result<Vec<BoundReport>> {
    specs
        .iter()
        .enumerate()
        .map(|(i, spec)| verify_graph(&spec.to_string(), &spec.build()?, rng::derive_seed(seed, &[i as u64])))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityResiduals {
    /// Largest relative residual of the three-cycle hitting identity.
    pub cyclic: f64,
    /// Largest relative gap between `H(x,y) + H(y,x)` and `n r'(x,y)`.
    pub commute: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyzeReport {
    pub topology: String,
    pub n: usize,
    pub kind: WalkKind,
    pub max_hitting: f64,
    pub max_hitting_pair: (usize, usize),
    pub hitting_bound: f64,
    pub exact_meeting_max: Option<f64>,
    pub mc_meeting: Estimate,
    pub mc_meeting_pair: (usize, usize),
    pub hidden_vertex: usize,
    pub identity_residuals_max: IdentityResiduals,
}

/// Exact hitting times, hidden vertex and identity residuals for the
/// biased walk on `g`, the exact meeting maximum when `n` is small enough,
/// and a Monte Carlo meeting estimate from the worst (or most resistive)
/// pair.
pub fn analyze(name: &str, g: &Graph, mc_trials: usize, seed: u64) -> Result<AnalyzeReport> {
    let n = g.n();
    if n > MAX_EXACT_HITTING_N {
        return Err(Error::StateSpaceTooLarge {
            n,
            limit: MAX_EXACT_HITTING_N,
        });
    }
    let k = TransitionKernel::build(g, WalkKind::Biased)?;
    let h = HittingTimes::compute(&k)?;
    let (max_hitting, max_hitting_pair) = h.max();
    let hidden_vertex = h.hidden_vertex()?;

    let r = ConductanceResistances::new(g)?;
    let mut commute: f64 = 0.0;
    let mut cyclic: f64 = 0.0;
    for x in 0..n {
        for y in x + 1..n {
            let want = r.commute(x, y);
            commute = commute.max((h.get(x, y) + h.get(y, x) - want).abs() / want);
        }
    }
    let triples = |f: &mut dyn FnMut(usize, usize, usize)| {
        if n <= 30 {
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        f(x, y, z);
                    }
                }
            }
        } else {
            use rand::Rng;
            let mut rng = rng::stream(seed, &[2]);
            for _ in 0..5000 {
                f(rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
            }
        }
    };
    triples(&mut |x, y, z| cyclic = cyclic.max(h.cyclic_identity_relative(x, y, z)));

    let (exact_meeting_max, mc_pair) = if n <= MAX_EXACT_MEETING_REPORT_N {
        let (m, pair) = JointKernel::build(g, JointVariant::Interacting)?.exact_meeting_times()?.max();
        (Some(m), pair)
    } else {
        (None, r.witness)
    };
    let mc_meeting = chain::mc_meeting_time(g, mc_pair.0, mc_pair.1, mc_trials, rng::derive_seed(seed, &[3]))?;

    Ok(AnalyzeReport {
        topology: name.to_string(),
        n,
        kind: WalkKind::Biased,
        max_hitting,
        max_hitting_pair,
        hitting_bound: 3.0 * (n as f64).powi(3),
        exact_meeting_max,
        mc_meeting,
        mc_meeting_pair: mc_pair,
        hidden_vertex,
        identity_residuals_max: IdentityResiduals { cyclic, commute },
    })
}

struct ConductanceResistances {
    w_total: f64,
    r: nalgebra::DMatrix<f64>,
    witness: (usize, usize),
}

impl ConductanceResistances {
    fn new(g: &Graph) -> Result<Self> {
        let net = electric::ConductanceNetwork::biased(g);
        let r = net.resistor_network().resistance_matrix()?;
        let witness = electric::resistance_report_unchecked(g)?.witness_pair;
        Ok(ConductanceResistances {
            w_total: net.w_total(),
            r,
            witness,
        })
    }

    fn commute(&self, x: usize, y: usize) -> f64 {
        self.w_total * self.r[(x, y)]
    }
}
