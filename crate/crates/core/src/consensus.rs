//! The asynchronous quantized consensus protocol. Every global clock tick
//! activates one edge: a uniformly random initiator picks a uniformly random
//! neighbor. If their values differ by two or more, the smaller gains one
//! and the larger loses one (a non-trivial meeting); otherwise the two
//! values swap (a trivial meeting).

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chain::activate_edge;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsensusState {
    values: Vec<i64>,
    tick: u64,
    q_sum: i64,
    q: i64,
    r: i64,
    nontrivial_count: u64,
    outside: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeetingKind {
    Trivial,
    Nontrivial,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TickEvent {
    pub initiator: usize,
    pub partner: usize,
    pub kind: MeetingKind,
    /// Change of the Lyapunov function caused by this tick (never positive).
    pub lyapunov_delta: f64,
}

impl ConsensusState {
    pub fn new(g: &Graph, values: Vec<i64>) -> Result<Self> {
        if values.len() != g.n() {
            return Err(Error::DimensionMismatch {
                expected: g.n(),
                got: values.len(),
            });
        }
        let n = values.len() as i64;
        let q_sum: i64 = values.iter().sum();
        let (q, r) = (q_sum.div_euclid(n), q_sum.rem_euclid(n));
        let outside = values.iter().filter(|&&v| v != q && v != q + 1).count();
        Ok(ConsensusState {
            values,
            tick: 0,
            q_sum,
            q,
            r,
            nontrivial_count: 0,
            outside,
        })
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn q_sum(&self) -> i64 {
        self.q_sum
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    pub fn r(&self) -> i64 {
        self.r
    }

    pub fn nontrivial_count(&self) -> u64 {
        self.nontrivial_count
    }

    /// Every value lies in `{q, q + 1}`.
    pub fn is_converged(&self) -> bool {
        self.outside == 0
    }

    fn in_target(&self, v: i64) -> bool {
        v == self.q || v == self.q + 1
    }

    /// `N^2` times the Lyapunov function, `sum (N Q_i - Q_sum)^2`, exact.
    pub fn lyapunov_scaled(&self) -> i128 {
        let n = self.values.len() as i128;
        let s = self.q_sum as i128;
        self.values
            .iter()
            .map(|&v| {
                let d = n * v as i128 - s;
                d * d
            })
            .sum()
    }

    /// `sum (Q_i - Q_sum / N)^2`.
    pub fn lyapunov(&self) -> f64 {
        let n = self.values.len() as f64;
        self.lyapunov_scaled() as f64 / (n * n)
    }

    /// Applies the update rule to the edge `(initiator, partner)`.
    pub fn interact(&mut self, initiator: usize, partner: usize) -> TickEvent {
        let (vi, vj) = (self.values[initiator], self.values[partner]);
        let before = self.in_target(vi) as usize + self.in_target(vj) as usize;
        let gap = (vi - vj).abs();
        let (kind, lyapunov_delta) = if gap >= 2 {
            let (lo, hi) = if vi < vj { (initiator, partner) } else { (partner, initiator) };
            self.values[lo] += 1;
            self.values[hi] -= 1;
            self.nontrivial_count += 1;
            (MeetingKind::Nontrivial, -(2 * gap - 2) as f64)
        } else {
            self.values.swap(initiator, partner);
            (MeetingKind::Trivial, 0.0)
        };
        let after = self.in_target(self.values[initiator]) as usize + self.in_target(self.values[partner]) as usize;
        self.outside = self.outside + before - after;
        self.tick += 1;
        TickEvent {
            initiator,
            partner,
            kind,
            lyapunov_delta,
        }
    }

    /// One global clock tick.
    pub fn step<R: Rng + ?Sized>(&mut self, g: &Graph, rng: &mut R) -> TickEvent {
        let (i, j) = activate_edge(g, rng);
        self.interact(i, j)
    }
}

/// Initial-value generators for experiments. `spread` is the distance
/// between the extreme values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    /// The first `n / 2` nodes hold 0, the rest hold `spread`.
    BinaryExtremal,
    /// Independent uniform integers in `0..=spread`.
    Uniform,
    /// Node 0 holds `spread`, every other node holds 0.
    Spike,
}

impl InitKind {
    pub fn name(self) -> &'static str {
        match self {
            InitKind::BinaryExtremal => "binary_extremal",
            InitKind::Uniform => "uniform",
            InitKind::Spike => "spike",
        }
    }

    pub fn generate<R: Rng + ?Sized>(self, n: usize, spread: i64, rng: &mut R) -> Vec<i64> {
        match self {
            InitKind::BinaryExtremal => (0..n).map(|i| if i < n / 2 { 0 } else { spread }).collect(),
            InitKind::Uniform => (0..n).map(|_| rng.gen_range(0..=spread)).collect(),
            InitKind::Spike => (0..n).map(|i| if i == 0 { spread } else { 0 }).collect(),
        }
    }
}

impl fmt::Display for InitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for InitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary_extremal" | "binary" => Ok(InitKind::BinaryExtremal),
            "uniform" => Ok(InitKind::Uniform),
            "spike" => Ok(InitKind::Spike),
            other => Err(Error::InvalidArgument(format!("unknown init kind {other:?}"))),
        }
    }
}

/// `ceil(multiplier * n^3 * ln(n + 1) * (spread + 1)^2)`.
pub fn default_max_ticks(n: usize, spread: i64, multiplier: f64) -> u64 {
    let nf = n as f64;
    let s = (spread + 1) as f64;
    (multiplier * nf.powi(3) * (nf + 1.0).ln() * s * s).ceil() as u64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimRecord {
    pub converged: bool,
    pub ticks: u64,
    pub nontrivial_meetings: u64,
    /// `max - min` of the initial values.
    pub initial_spread: i64,
    /// `(tick, L)` samples.
    pub lyapunov_trace: Vec<(u64, f64)>,
    pub seed: u64,
    pub final_values: Vec<i64>,
}

impl SimRecord {
    /// Upper bound `(M - m)^2 N / 8` on the number of non-trivial meetings.
    pub fn nontrivial_budget(&self) -> f64 {
        let s = self.initial_spread as f64;
        s * s * self.final_values.len() as f64 / 8.0
    }
}

/// Runs the protocol from `values` until convergence or `max_ticks`.
/// The Lyapunov function is sampled at tick 0, after every non-trivial
/// meeting, every `ceil(max_ticks / 1000)` ticks, and at the end.
pub fn run(g: &Graph, values: Vec<i64>, seed: u64, max_ticks: u64) -> Result<SimRecord> {
    if max_ticks == 0 {
        return Err(Error::InvalidArgument("max_ticks must be at least 1".into()));
    }
    let mut state = ConsensusState::new(g, values)?;
    let initial_spread = spread(state.values());
    let mut rng = rng::stream(seed, &[]);
    let every = max_ticks.div_ceil(1000);
    let mut trace = vec![(0, state.lyapunov())];
    while !state.is_converged() && state.tick() < max_ticks {
        let ev = state.step(g, &mut rng);
        if ev.kind == MeetingKind::Nontrivial || state.tick() % every == 0 {
            trace.push((state.tick(), state.lyapunov()));
        }
    }
    if trace.last().map(|t| t.0) != Some(state.tick()) {
        trace.push((state.tick(), state.lyapunov()));
    }
    Ok(SimRecord {
        converged: state.is_converged(),
        ticks: state.tick(),
        nontrivial_meetings: state.nontrivial_count(),
        initial_spread,
        lyapunov_trace: trace,
        seed,
        final_values: state.values,
    })
}

pub fn spread(values: &[i64]) -> i64 {
    let max = values.iter().copied().max().unwrap_or(0);
    let min = values.iter().copied().min().unwrap_or(0);
    max - min
}
