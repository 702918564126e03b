//! Electric-network view of the biased walk: edge conductances, effective
//! resistance by grounded Laplacian solves, and the commute-time identity.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg;
use crate::walk::biased_edge_probability;

/// Edge and self-loop weights of the biased walk viewed as a walk on a
/// weighted graph. Every node's total weight is one, so `w_total = n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConductanceNetwork {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    self_weight: Vec<f64>,
    w_total: f64,
}

impl ConductanceNetwork {
    pub fn biased(g: &Graph) -> Self {
        let n = g.n();
        let deg = g.degrees();
        let edges: Vec<_> = g
            .edges()
            .map(|(u, v)| (u, v, biased_edge_probability(n, deg[u], deg[v])))
            .collect();
        let mut node_weight = vec![0.0; n];
        for &(u, v, w) in &edges {
            node_weight[u] += w;
            node_weight[v] += w;
        }
        let self_weight: Vec<f64> = node_weight.iter().map(|&s| 1.0 - s).collect();
        let w_total = node_weight.iter().zip(&self_weight).map(|(a, b)| a + b).sum();
        ConductanceNetwork {
            n,
            edges,
            self_weight,
            w_total,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `(u, v, w_uv)` with `u < v`.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn conductance(&self, u: usize, v: usize) -> Option<f64> {
        let (a, b) = (u.min(v), u.max(v));
        self.edges.iter().find(|e| e.0 == a && e.1 == b).map(|e| e.2)
    }

    pub fn self_weight(&self, u: usize) -> f64 {
        self.self_weight[u]
    }

    /// Sum of edge weights touching `u` (each edge counted once per
    /// endpoint) plus its self-loop weight.
    pub fn node_weight(&self, u: usize) -> f64 {
        let incident: f64 = self.edges.iter().filter(|e| e.0 == u || e.1 == u).map(|e| e.2).sum();
        incident + self.self_weight[u]
    }

    pub fn w_total(&self) -> f64 {
        self.w_total
    }

    /// Resistor network with `r_e = 1 / w_e`. Self-loops carry no current
    /// and are dropped.
    pub fn resistor_network(&self) -> ResistorNetwork {
        ResistorNetwork {
            n: self.n,
            edges: self.edges.iter().map(|&(u, v, w)| (u, v, 1.0 / w)).collect(),
        }
    }
}

/// A connected network of positive resistors.
#[derive(Debug, Clone, PartialEq)]
pub struct ResistorNetwork {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl ResistorNetwork {
    pub fn new(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if let Some(&(u, v, r)) = edges.iter().find(|e| !(e.2 > 0.0 && e.2.is_finite())) {
            return Err(Error::NonPositiveResistance { u, v, value: r });
        }
        let pairs: Vec<_> = edges.iter().map(|&(u, v, _)| (u, v)).collect();
        Graph::from_edges(n, &pairs)?;
        Ok(ResistorNetwork {
            n,
            edges: edges.to_vec(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn resistance(&self, u: usize, v: usize) -> Option<f64> {
        self.edges
            .iter()
            .find(|e| (e.0 == u && e.1 == v) || (e.0 == v && e.1 == u))
            .map(|e| e.2)
    }

    /// Weighted Laplacian with row and column `ground` deleted.
    fn grounded_laplacian(&self, ground: usize) -> DMatrix<f64> {
        let idx = |u: usize| if u < ground { u } else { u - 1 };
        let m = self.n - 1;
        let mut lap = DMatrix::zeros(m, m);
        for &(u, v, r) in &self.edges {
            let c = 1.0 / r;
            if u != ground {
                lap[(idx(u), idx(u))] += c;
            }
            if v != ground {
                lap[(idx(v), idx(v))] += c;
            }
            if u != ground && v != ground {
                lap[(idx(u), idx(v))] -= c;
                lap[(idx(v), idx(u))] -= c;
            }
        }
        lap
    }

    fn check_node(&self, node: usize) -> Result<()> {
        if node < self.n {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange { node, n: self.n })
        }
    }

    /// Two-terminal resistance between `x` and `y`: ground `y`, inject a
    /// unit current at `x`, and read off the potential at `x`.
    pub fn effective_resistance(&self, x: usize, y: usize) -> Result<f64> {
        self.check_node(x)?;
        self.check_node(y)?;
        if x == y {
            return Ok(0.0);
        }
        let lap = self.grounded_laplacian(y);
        let xi = if x < y { x } else { x - 1 };
        let mut current = DVector::zeros(self.n - 1);
        current[xi] = 1.0;
        let potential = linalg::solve(lap, &current)?;
        Ok(potential[xi])
    }

    /// All-pairs effective resistances from one inverse of the Laplacian
    /// grounded at the last node: `r(x, y) = G_xx + G_yy - 2 G_xy`.
    pub fn resistance_matrix(&self) -> Result<DMatrix<f64>> {
        let n = self.n;
        let ground = n - 1;
        let inv = linalg::invert(self.grounded_laplacian(ground))?;
        let green = |a: usize, b: usize| if a == ground || b == ground { 0.0 } else { inv[(a, b)] };
        Ok(DMatrix::from_fn(n, n, |x, y| {
            if x == y {
                0.0
            } else {
                green(x, x) + green(y, y) - 2.0 * green(x, y)
            }
        }))
    }
}

/// Commute time `H(x,y) + H(y,x)` of the biased walk, computed as
/// `w_total * r'(x, y)` on the biased conductance network.
pub fn commute_time_via_resistance(g: &Graph, x: usize, y: usize) -> Result<f64> {
    let net = ConductanceNetwork::biased(g);
    let r = net.resistor_network().effective_resistance(x, y)?;
    Ok(net.w_total() * r)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResistanceReport {
    pub n: usize,
    pub max_r_eff: f64,
    pub bound_r: f64,
    pub max_commute: f64,
    pub bound_commute: f64,
    pub witness_pair: (usize, usize),
}

impl ResistanceReport {
    pub fn passes(&self) -> bool {
        self.max_r_eff < self.bound_r && self.max_commute < self.bound_commute
    }
}

/// Largest effective resistance over all pairs of the biased network,
/// checked against `3 n^2`, and the implied commute-time bound `3 n^3`.
pub fn resistance_bound_report(g: &Graph) -> Result<ResistanceReport> {
    let report = resistance_report_unchecked(g)?;
    if !report.passes() {
        return Err(Error::BoundViolated(format!(
            "max effective resistance {} at {:?} (bound {}), commute {} (bound {})",
            report.max_r_eff, report.witness_pair, report.bound_r, report.max_commute, report.bound_commute
        )));
    }
    Ok(report)
}

/// Same computation as [`resistance_bound_report`] without the bound
/// assertion, for reporting tools.
pub fn resistance_report_unchecked(g: &Graph) -> Result<ResistanceReport> {
    let net = ConductanceNetwork::biased(g);
    let r = net.resistor_network().resistance_matrix()?;
    let n = g.n();
    let mut best = (0.0, (0, 1));
    for x in 0..n {
        for y in x + 1..n {
            if r[(x, y)] > best.0 {
                best = (r[(x, y)], (x, y));
            }
        }
    }
    let nf = n as f64;
    Ok(ResistanceReport {
        n,
        max_r_eff: best.0,
        bound_r: 3.0 * nf * nf,
        max_commute: net.w_total() * best.0,
        bound_commute: 3.0 * nf * nf * nf,
        witness_pair: best.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_topology, TopologySpec};

    fn graph(spec: TopologySpec) -> Graph {
        build_topology(&spec).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn conductances_triangle() {
        let net = ConductanceNetwork::biased(&graph(TopologySpec::Complete { n: 3 }));
        for &(_, _, w) in net.edges() {
            assert!(close(w, 1.0 / 3.0, 1e-15));
        }
        for u in 0..3 {
            assert!(close(net.self_weight(u), 1.0 / 3.0, 1e-15));
            assert!(close(net.node_weight(u), 1.0, 1e-12));
        }
        assert!(close(net.w_total(), 3.0, 1e-12));
    }

    #[test]
    fn conductances_path() {
        let net = ConductanceNetwork::biased(&graph(TopologySpec::Path { n: 3 }));
        assert!(close(net.conductance(0, 1).unwrap(), 0.5, 1e-15));
        assert!(close(net.conductance(2, 1).unwrap(), 0.5, 1e-15));
        assert_eq!(net.conductance(0, 2), None);
        assert!(close(net.self_weight(0), 0.5, 1e-15));
        assert!(close(net.self_weight(1), 0.0, 1e-15));
        assert!(close(net.self_weight(2), 0.5, 1e-15));
    }

    #[test]
    fn conductances_k4() {
        let net = ConductanceNetwork::biased(&graph(TopologySpec::Complete { n: 4 }));
        let res = net.resistor_network();
        for &(_, _, r) in res.edges() {
            assert!(close(r, 6.0, 1e-12));
        }
    }

    #[test]
    fn two_terminal_examples() {
        let fig = ResistorNetwork::new(3, &[(0, 1, 2.0), (0, 2, 1.0), (1, 2, 1.0)]).unwrap();
        assert!(close(fig.effective_resistance(0, 1).unwrap(), 1.0, 1e-12));
        assert!(close(fig.effective_resistance(0, 2).unwrap(), 0.75, 1e-12));
        assert_eq!(fig.effective_resistance(2, 2).unwrap(), 0.0);

        let series = ResistorNetwork::new(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert!(close(series.effective_resistance(0, 2).unwrap(), 2.0, 1e-12));

        let k3 = ConductanceNetwork::biased(&graph(TopologySpec::Complete { n: 3 })).resistor_network();
        assert!(close(k3.effective_resistance(1, 2).unwrap(), 2.0, 1e-12));
    }

    #[test]
    fn rejects_bad_resistors() {
        assert!(matches!(
            ResistorNetwork::new(2, &[(0, 1, 0.0)]),
            Err(Error::NonPositiveResistance { .. })
        ));
        assert!(matches!(
            ResistorNetwork::new(4, &[(0, 1, 1.0), (2, 3, 1.0)]),
            Err(Error::Disconnected { .. })
        ));
    }

    #[test]
    fn matrix_agrees_with_single_pair_solves() {
        let g = graph(TopologySpec::Grid { rows: 3, cols: 3 });
        let net = ConductanceNetwork::biased(&g).resistor_network();
        let r = net.resistance_matrix().unwrap();
        for x in 0..9 {
            for y in 0..9 {
                let single = net.effective_resistance(x, y).unwrap();
                assert!(close(r[(x, y)], single, 1e-9 * single.max(1.0)));
            }
        }
    }

    #[test]
    fn commute_examples() {
        let p3 = graph(TopologySpec::Path { n: 3 });
        assert!(close(commute_time_via_resistance(&p3, 0, 2).unwrap(), 12.0, 1e-9));
        let k3 = graph(TopologySpec::Complete { n: 3 });
        assert!(close(commute_time_via_resistance(&k3, 0, 1).unwrap(), 6.0, 1e-9));
        for n in 3..=8 {
            let kn = graph(TopologySpec::Complete { n });
            let want = (n * (n - 1)) as f64;
            assert!(close(commute_time_via_resistance(&kn, 0, n - 1).unwrap(), want, 1e-9 * want));
        }
    }

    #[test]
    fn bound_report_examples() {
        let p3 = resistance_bound_report(&graph(TopologySpec::Path { n: 3 })).unwrap();
        assert!(close(p3.max_r_eff, 4.0, 1e-9));
        assert_eq!(p3.witness_pair, (0, 2));
        assert_eq!(p3.bound_r, 27.0);

        let k4 = resistance_bound_report(&graph(TopologySpec::Complete { n: 4 })).unwrap();
        assert!(close(k4.max_r_eff, 3.0, 1e-9));
        assert_eq!(k4.bound_r, 48.0);

        let s4 = resistance_bound_report(&graph(TopologySpec::Star { n: 4 })).unwrap();
        assert!(s4.max_r_eff < 48.0);
        assert!(s4.passes());
    }
}
