//! Single-walker transition kernels: the simple walk, the natural walk
//! (a token moves only when its own node's clock fires) and the biased walk
//! a value actually follows under the gossip protocol, where a token also
//! moves when a neighbor's clock selects its node.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WalkKind {
    Simple,
    Natural,
    Biased,
}

impl fmt::Display for WalkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WalkKind::Simple => "simple",
            WalkKind::Natural => "natural",
            WalkKind::Biased => "biased",
        })
    }
}

/// Row-stochastic transition matrix over the nodes of a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionKernel {
    kind: WalkKind,
    p: DMatrix<f64>,
}

/// Off-diagonal biased-walk probability for an edge with endpoint degrees
/// `du`, `dv` in a graph of `n` nodes. Symmetric in its degree arguments.
pub fn biased_edge_probability(n: usize, du: usize, dv: usize) -> f64 {
    (1.0 / du as f64 + 1.0 / dv as f64) / n as f64
}

impl TransitionKernel {
    pub fn build(g: &Graph, kind: WalkKind) -> Result<Self> {
        let n = g.n();
        let nf = n as f64;
        let deg = g.degrees();
        let mut p = DMatrix::zeros(n, n);
        match kind {
            WalkKind::Simple => {
                for (u, v) in g.edges() {
                    p[(u, v)] = 1.0 / deg[u] as f64;
                    p[(v, u)] = 1.0 / deg[v] as f64;
                }
            }
            WalkKind::Natural => {
                for u in 0..n {
                    p[(u, u)] = 1.0 - 1.0 / nf;
                }
                for (u, v) in g.edges() {
                    p[(u, v)] = 1.0 / (nf * deg[u] as f64);
                    p[(v, u)] = 1.0 / (nf * deg[v] as f64);
                }
            }
            WalkKind::Biased => {
                for (u, v) in g.edges() {
                    let w = biased_edge_probability(n, deg[u], deg[v]);
                    p[(u, v)] = w;
                    p[(v, u)] = w;
                }
                for u in 0..n {
                    let passive: f64 = g.neighbors(u).iter().map(|&k| 1.0 / (nf * deg[k] as f64)).sum();
                    let stay = 1.0 - 1.0 / nf - passive;
                    // Exact value can be 0 (path interior); allow rounding noise.
                    if stay < -1e-12 {
                        return Err(Error::NegativeDiagonal { node: u, value: stay });
                    }
                    p[(u, u)] = stay.max(0.0);
                }
            }
        }
        Ok(TransitionKernel { kind, p })
    }

    pub fn kind(&self) -> WalkKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.p.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    /// Solves `pi P = pi`, `sum(pi) = 1` directly: the transposed system
    /// `(P^T - I) pi = 0` with its last row replaced by the normalization.
    pub fn stationary_distribution(&self) -> Result<Vec<f64>> {
        let n = self.n();
        let mut a = self.p.transpose() - DMatrix::identity(n, n);
        for j in 0..n {
            a[(n - 1, j)] = 1.0;
        }
        let mut b = DVector::zeros(n);
        b[n - 1] = 1.0;
        let pi = linalg::solve(a, &b)?;
        Ok(pi.iter().copied().collect())
    }

    /// Detailed balance check `|pi_i p_ij - pi_j p_ji| <= tol` for all pairs.
    pub fn is_reversible(&self, pi: &[f64], tol: f64) -> Result<bool> {
        let n = self.n();
        if pi.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: pi.len(),
            });
        }
        Ok((0..n).all(|i| (i + 1..n).all(|j| (pi[i] * self.p[(i, j)] - pi[j] * self.p[(j, i)]).abs() <= tol)))
    }

    /// Largest deviation of a row sum from one.
    pub fn row_sum_error(&self) -> f64 {
        self.p
            .row_iter()
            .map(|r| (r.sum() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Comma-separated dump, one matrix row per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.p.row_iter() {
            let cells: Vec<String> = row.iter().map(|x| format!("{x}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}
