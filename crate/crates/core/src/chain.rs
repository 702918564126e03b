//! Hitting times of a single walker, meeting times of two interacting
//! walkers (the product chain), hidden vertices and the potential function
//! used to bound meeting times, plus Monte Carlo estimators driven by the
//! gossip protocol's edge activations.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg;
use crate::rng;
use crate::stats::Estimate;
use crate::walk::{TransitionKernel, WalkKind};

/// Residual tolerance (relative to the solution scale) for exact solves.
pub const SOLVE_TOL: f64 = 1e-9;

/// Largest graph for which the product chain is solved densely.
pub const MAX_EXACT_MEETING_N: usize = 60;

/// Expected steps to first reach `target` from every node.
pub fn hitting_times_to(k: &TransitionKernel, target: usize) -> Result<Vec<f64>> {
    let n = k.n();
    if target >= n {
        return Err(Error::NodeOutOfRange { node: target, n });
    }
    let idx = |u: usize| if u < target { u } else { u - 1 };
    let m = n - 1;
    let mut a = DMatrix::zeros(m, m);
    for u in (0..n).filter(|&u| u != target) {
        for v in (0..n).filter(|&v| v != target) {
            a[(idx(u), idx(v))] = -k.get(u, v);
        }
        a[(idx(u), idx(u))] += 1.0;
    }
    let ones = DVector::from_element(m, 1.0);
    let h = linalg::solve(a.clone(), &ones)?;
    let scale = h.amax().max(1.0);
    let res = linalg::residual(&a, &h, &ones);
    if res > SOLVE_TOL * scale {
        return Err(Error::Singular { pivot: res });
    }
    let mut out = vec![0.0; n];
    for u in (0..n).filter(|&u| u != target) {
        out[u] = h[idx(u)];
    }
    Ok(out)
}

/// All pairwise hitting times, `h[(i, j)] = H(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HittingTimes {
    h: DMatrix<f64>,
}

impl HittingTimes {
    pub fn compute(k: &TransitionKernel) -> Result<Self> {
        let n = k.n();
        let mut h = DMatrix::zeros(n, n);
        for target in 0..n {
            let col = hitting_times_to(k, target)?;
            for (u, v) in col.into_iter().enumerate() {
                h[(u, target)] = v;
            }
        }
        Ok(HittingTimes { h })
    }

    pub fn n(&self) -> usize {
        self.h.nrows()
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.h[(from, to)]
    }

    /// Largest entry and the `(from, to)` pair attaining it (first in
    /// row-major order on ties).
    pub fn max(&self) -> (f64, (usize, usize)) {
        let n = self.n();
        let mut best = (f64::NEG_INFINITY, (0, 0));
        for i in 0..n {
            for j in 0..n {
                if self.h[(i, j)] > best.0 {
                    best = (self.h[(i, j)], (i, j));
                }
            }
        }
        best
    }

    /// First node `t` with `H(t, v) <= H(v, t)` for every `v`, up to a
    /// relative tolerance of `1e-9`.
    pub fn hidden_vertex(&self) -> Result<usize> {
        (0..self.n()).find(|&t| self.is_hidden(t)).ok_or(Error::NoHiddenVertex)
    }

    pub fn is_hidden(&self, t: usize) -> bool {
        (0..self.n()).all(|v| {
            let (out, back) = (self.get(t, v), self.get(v, t));
            out <= back + SOLVE_TOL * back.max(1.0)
        })
    }

    /// `phi(x, y) = H(x, y) + H(y, t) - H(t, y)` for a hidden vertex `t`.
    pub fn potential(&self, t: usize, x: usize, y: usize) -> f64 {
        self.get(x, y) + self.get(y, t) - self.get(t, y)
    }

    /// `|H(x,y) + H(y,z) + H(z,x) - (H(x,z) + H(z,y) + H(y,x))|`.
    pub fn cyclic_identity_residual(&self, x: usize, y: usize, z: usize) -> f64 {
        let lhs = self.get(x, y) + self.get(y, z) + self.get(z, x);
        let rhs = self.get(x, z) + self.get(z, y) + self.get(y, x);
        (lhs - rhs).abs()
    }

    /// The residual divided by `max(lhs, rhs, 1)`.
    pub fn cyclic_identity_relative(&self, x: usize, y: usize, z: usize) -> f64 {
        let lhs = self.get(x, y) + self.get(y, z) + self.get(z, x);
        let rhs = self.get(x, z) + self.get(z, y) + self.get(y, x);
        (lhs - rhs).abs() / lhs.max(rhs).max(1.0)
    }
}

pub fn max_hitting_time(k: &TransitionKernel) -> Result<(f64, (usize, usize))> {
    Ok(HittingTimes::compute(k)?.max())
}

pub fn find_hidden_vertex(k: &TransitionKernel) -> Result<usize> {
    HittingTimes::compute(k)?.hidden_vertex()
}

/// Which two-walker law to build. `Interacting` is the law the tokens of
/// the gossip protocol follow; `Coupled` lets adjacent walkers meet with
/// twice the crossing probability and drops the crossing term from the
/// stay probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointVariant {
    Interacting,
    Coupled,
}

/// Where a transition of the product chain leads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointTarget {
    /// Live state with walker positions `(a, b)`, `a != b`.
    Live(usize, usize),
    /// Absorbed; positions right after the meeting.
    Met(usize, usize),
}

/// Transition law of two walkers `a`, `b` on distinct nodes. Only one
/// walker moves per tick unless the activated edge joins them.
#[derive(Debug, Clone)]
pub struct JointKernel {
    n: usize,
    variant: JointVariant,
    transitions: Vec<Vec<(JointTarget, f64)>>,
}

impl JointKernel {
    pub fn build(g: &Graph, variant: JointVariant) -> Result<Self> {
        let k = TransitionKernel::build(g, WalkKind::Biased)?;
        let n = g.n();
        let out_mass: Vec<f64> = (0..n).map(|u| g.neighbors(u).iter().map(|&v| k.get(u, v)).sum()).collect();
        let mut transitions = Vec::with_capacity(n * (n - 1));
        for x in 0..n {
            for y in (0..n).filter(|&y| y != x) {
                let adjacent = g.has_edge(x, y);
                let mut row = Vec::with_capacity(g.degree(x) + g.degree(y) + 2);
                for &i in g.neighbors(x).iter().filter(|&&i| i != y) {
                    row.push((JointTarget::Live(i, y), k.get(x, i)));
                }
                for &j in g.neighbors(y).iter().filter(|&&j| j != x) {
                    row.push((JointTarget::Live(x, j), k.get(y, j)));
                }
                let mut stay = 1.0 - out_mass[x] - out_mass[y];
                if adjacent {
                    let pxy = k.get(x, y);
                    match variant {
                        JointVariant::Interacting => {
                            row.push((JointTarget::Met(y, x), pxy));
                            stay += pxy;
                        }
                        JointVariant::Coupled => {
                            row.push((JointTarget::Met(y, y), pxy));
                            row.push((JointTarget::Met(x, x), pxy));
                        }
                    }
                }
                if stay < -1e-12 {
                    return Err(Error::CoupledChainInfeasible { x, y, stay });
                }
                row.push((JointTarget::Live(x, y), stay.max(0.0)));
                transitions.push(row);
            }
        }
        Ok(JointKernel { n, variant, transitions })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn variant(&self) -> JointVariant {
        self.variant
    }

    pub fn live_states(&self) -> usize {
        self.transitions.len()
    }

    fn index(&self, a: usize, b: usize) -> usize {
        debug_assert!(a != b);
        a * (self.n - 1) + if b < a { b } else { b - 1 }
    }

    /// Outgoing transitions of live state `(a, b)`.
    pub fn outgoing(&self, a: usize, b: usize) -> &[(JointTarget, f64)] {
        &self.transitions[self.index(a, b)]
    }

    /// Distribution of walker `a`'s next position from live state `(a, b)`.
    pub fn marginal_of_first(&self, a: usize, b: usize) -> Vec<f64> {
        let mut row = vec![0.0; self.n];
        for &(t, p) in self.outgoing(a, b) {
            let (JointTarget::Live(na, _) | JointTarget::Met(na, _)) = t;
            row[na] += p;
        }
        row
    }

    /// Exact expected meeting times for every ordered start pair, by an
    /// absorbing-chain solve over the `n(n-1)` live states.
    pub fn exact_meeting_times(&self) -> Result<MeetingTimes> {
        let n = self.n;
        if n > MAX_EXACT_MEETING_N {
            return Err(Error::StateSpaceTooLarge {
                n,
                limit: MAX_EXACT_MEETING_N,
            });
        }
        let s = self.live_states();
        let mut a = DMatrix::identity(s, s);
        for (row, trans) in self.transitions.iter().enumerate() {
            for &(t, p) in trans {
                if let JointTarget::Live(x, y) = t {
                    a[(row, self.index(x, y))] -= p;
                }
            }
        }
        let ones = DVector::from_element(s, 1.0);
        let m = linalg::solve(a.clone(), &ones)?;
        let scale = m.amax().max(1.0);
        let res = linalg::residual(&a, &m, &ones);
        if res > SOLVE_TOL * scale {
            return Err(Error::Singular { pivot: res });
        }
        let mut out = DMatrix::zeros(n, n);
        for x in 0..n {
            for y in (0..n).filter(|&y| y != x) {
                out[(x, y)] = m[self.index(x, y)];
            }
        }
        Ok(MeetingTimes { m: out })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeetingTimes {
    m: DMatrix<f64>,
}

impl MeetingTimes {
    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    /// `M(x, y)`; zero on the diagonal.
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.m[(x, y)]
    }

    pub fn max(&self) -> (f64, (usize, usize)) {
        let n = self.n();
        let mut best = (f64::NEG_INFINITY, (0, 0));
        for x in 0..n {
            for y in 0..n {
                if self.m[(x, y)] > best.0 {
                    best = (self.m[(x, y)], (x, y));
                }
            }
        }
        best
    }

    /// Largest `|M(x,y) - M(y,x)|`.
    pub fn asymmetry(&self) -> f64 {
        (&self.m - self.m.transpose()).amax()
    }
}

/// Picks one edge the way a global clock tick does: a uniformly random
/// initiator and a uniformly random neighbor of it.
pub(crate) fn activate_edge<R: Rng + ?Sized>(g: &Graph, rng: &mut R) -> (usize, usize) {
    let i = rng.gen_range(0..g.n());
    let nbrs = g.neighbors(i);
    (i, nbrs[rng.gen_range(0..nbrs.len())])
}

fn check_node(g: &Graph, node: usize) -> Result<()> {
    if node < g.n() {
        Ok(())
    } else {
        Err(Error::NodeOutOfRange { node, n: g.n() })
    }
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    Ok(())
}

/// Monte Carlo meeting time of two tokens started at `x` and `y` under the
/// protocol's edge activations: a token moves across any activated edge it
/// sits on, and the run ends when the activated edge joins the two tokens.
pub fn mc_meeting_time(g: &Graph, x: usize, y: usize, trials: usize, seed: u64) -> Result<Estimate> {
    check_node(g, x)?;
    check_node(g, y)?;
    check_trials(trials)?;
    if x == y {
        return Err(Error::InvalidArgument("meeting time needs distinct start nodes".into()));
    }
    let samples: Vec<f64> = (0..trials as u64)
        .map(|trial| {
            let mut rng = rng::stream(seed, &[trial]);
            let (mut a, mut b) = (x, y);
            let mut ticks = 0u64;
            loop {
                ticks += 1;
                let (i, j) = activate_edge(g, &mut rng);
                if (i == a && j == b) || (i == b && j == a) {
                    break;
                }
                if i == a {
                    a = j;
                } else if j == a {
                    a = i;
                } else if i == b {
                    b = j;
                } else if j == b {
                    b = i;
                }
            }
            ticks as f64
        })
        .collect();
    Ok(Estimate::from_samples(&samples))
}

/// Monte Carlo hitting time of a single token from `x` to `y` under the
/// protocol's edge activations (the biased walk).
pub fn mc_hitting_time(g: &Graph, x: usize, y: usize, trials: usize, seed: u64) -> Result<Estimate> {
    check_node(g, x)?;
    check_node(g, y)?;
    check_trials(trials)?;
    let samples: Vec<f64> = (0..trials as u64)
        .map(|trial| {
            let mut rng = rng::stream(seed, &[trial]);
            let mut pos = x;
            let mut ticks = 0u64;
            while pos != y {
                ticks += 1;
                let (i, j) = activate_edge(g, &mut rng);
                if i == pos {
                    pos = j;
                } else if j == pos {
                    pos = i;
                }
            }
            ticks as f64
        })
        .collect();
    Ok(Estimate::from_samples(&samples))
}

/// Monte Carlo time for the token starting at `start` to share an
/// activated edge with every other token. One token sits on each node and
/// the two tokens on an activated edge swap places.
pub fn mc_meet_all_time(g: &Graph, start: usize, trials: usize, seed: u64) -> Result<Estimate> {
    check_node(g, start)?;
    check_trials(trials)?;
    let n = g.n();
    let samples: Vec<f64> = (0..trials as u64)
        .map(|trial| {
            let mut rng = rng::stream(seed, &[trial]);
            // Token ids equal their start node.
            let mut token_at: Vec<usize> = (0..n).collect();
            let mut met = vec![false; n];
            met[start] = true;
            let mut remaining = n - 1;
            let mut ticks = 0u64;
            while remaining > 0 {
                ticks += 1;
                let (i, j) = activate_edge(g, &mut rng);
                let (ti, tj) = (token_at[i], token_at[j]);
                let other = if ti == start {
                    Some(tj)
                } else if tj == start {
                    Some(ti)
                } else {
                    None
                };
                if let Some(o) = other {
                    if !met[o] {
                        met[o] = true;
                        remaining -= 1;
                    }
                }
                token_at.swap(i, j);
            }
            ticks as f64
        })
        .collect();
    Ok(Estimate::from_samples(&samples))
}
