mod common;

use qcons::chain::{self, HittingTimes, JointKernel, JointTarget, JointVariant};
use qcons::electric::ConductanceNetwork;
use qcons::graph::{Graph, TopologySpec};
use qcons::rng;
use qcons::stats::Estimate;
use qcons::walk::{TransitionKernel, WalkKind};
use qcons::Error;
use rand::Rng;

fn catalog() -> Vec<(String, Graph)> {
    let mut graphs = Vec::new();
    for n in [2, 3, 4, 6, 9, 13, 20] {
        graphs.extend(common::named(n));
    }
    graphs.extend(common::random_catalog(25, 3, 20, 17));
    graphs
}

#[test]
fn kernel_structure() {
    for (name, g) in catalog() {
        let n = g.n();
        let s = TransitionKernel::build(&g, WalkKind::Simple).unwrap();
        let nat = TransitionKernel::build(&g, WalkKind::Natural).unwrap();
        let b = TransitionKernel::build(&g, WalkKind::Biased).unwrap();
        for k in [&s, &nat, &b] {
            assert!(k.row_sum_error() <= 1e-12, "{name} {}: row sums", k.kind());
            for i in 0..n {
                for j in 0..n {
                    if k.get(i, j) > 0.0 {
                        assert!(i == j || g.has_edge(i, j), "{name} {}: support at ({i},{j})", k.kind());
                    }
                }
            }
        }
        for i in 0..n {
            assert_eq!(s.get(i, i), 0.0);
            assert_eq!(nat.get(i, i), 1.0 - 1.0 / n as f64);
            for j in 0..n {
                assert_eq!(b.get(i, j), b.get(j, i), "{name}: biased kernel not exactly symmetric");
                if i != j {
                    let active_plus_passive = nat.get(i, j) + nat.get(j, i);
                    assert!((b.get(i, j) - active_plus_passive).abs() <= 1e-15, "{name}: P^B != P^N + P^N^T at ({i},{j})");
                }
            }
        }
    }
}

#[test]
fn stationary_distributions_solve_balance() {
    for (name, g) in catalog() {
        for kind in [WalkKind::Simple, WalkKind::Natural, WalkKind::Biased] {
            let k = TransitionKernel::build(&g, kind).unwrap();
            let pi = k.stationary_distribution().unwrap();
            let n = g.n();
            assert!((pi.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            for j in 0..n {
                let flow: f64 = (0..n).map(|i| pi[i] * k.get(i, j)).sum();
                assert!((flow - pi[j]).abs() <= 1e-10, "{name} {kind}: pi P != pi at {j}");
            }
            if kind == WalkKind::Biased {
                assert!(pi.iter().all(|&p| (p - 1.0 / n as f64).abs() <= 1e-12));
            }
            if kind == WalkKind::Simple {
                let two_m = 2.0 * g.edge_count() as f64;
                assert!((0..n).all(|i| (pi[i] - g.degree(i) as f64 / two_m).abs() <= 1e-10));
            }
        }
    }
}

#[test]
fn detailed_balance_on_generated_topologies() {
    for n in [4, 10, 25, 50] {
        for (name, g) in common::named(n).into_iter().chain(common::random_catalog(5, n, n, n as u64)) {
            let k = TransitionKernel::build(&g, WalkKind::Biased).unwrap();
            let uniform = vec![1.0 / n as f64; n];
            assert!(k.is_reversible(&uniform, 1e-12).unwrap(), "{name}");
        }
    }
}

#[test]
fn conductance_network_invariants() {
    for (name, g) in catalog() {
        let net = ConductanceNetwork::biased(&g);
        let n = g.n();
        for &(u, v, w) in net.edges() {
            let want = (1.0 / g.degree(u) as f64 + 1.0 / g.degree(v) as f64) / n as f64;
            assert_eq!(w, want, "{name}: weight formula");
            assert!(w > 0.0);
        }
        for u in 0..n {
            assert!(net.self_weight(u) >= -1e-15, "{name}: negative self weight at {u}");
            assert!((net.node_weight(u) - 1.0).abs() <= 1e-12, "{name}: node weight at {u}");
        }
        assert!((net.w_total() - n as f64).abs() <= 1e-10);
    }
}

#[test]
fn effective_resistance_metric_properties() {
    for (name, g) in catalog().into_iter().filter(|(_, g)| g.n() <= 13) {
        let res = ConductanceNetwork::biased(&g).resistor_network();
        let r = res.resistance_matrix().unwrap();
        let n = g.n();
        for x in 0..n {
            for y in 0..n {
                if let Some(direct) = res.resistance(x, y) {
                    assert!(r[(x, y)] <= direct * (1.0 + 1e-12), "{name}: r'({x},{y}) > r");
                }
                let path = g.shortest_path(x, y).unwrap();
                let along: f64 = path.windows(2).map(|w| res.resistance(w[0], w[1]).unwrap()).sum();
                assert!(r[(x, y)] <= along * (1.0 + 1e-12) + 1e-12, "{name}: r'({x},{y}) exceeds path sum");
                for z in 0..n {
                    assert!(
                        r[(x, z)] <= r[(x, y)] + r[(y, z)] + 1e-9,
                        "{name}: triangle inequality fails on ({x},{y},{z})"
                    );
                }
            }
        }
    }
}

#[test]
fn joint_law_rows_and_marginals() {
    for (name, g) in catalog().into_iter().filter(|(_, g)| g.n() <= 13) {
        let b = TransitionKernel::build(&g, WalkKind::Biased).unwrap();
        let n = g.n();
        for variant in [JointVariant::Interacting, JointVariant::Coupled] {
            let jk = match JointKernel::build(&g, variant) {
                Ok(jk) => jk,
                Err(Error::CoupledChainInfeasible { .. }) if variant == JointVariant::Coupled => continue,
                Err(e) => panic!("{name}: {e}"),
            };
            assert_eq!(jk.live_states(), n * (n - 1));
            for x in 0..n {
                for y in (0..n).filter(|&y| y != x) {
                    let row = jk.outgoing(x, y);
                    let total: f64 = row.iter().map(|e| e.1).sum();
                    assert!((total - 1.0).abs() <= 1e-12, "{name} {variant:?} ({x},{y}): sums to {total}");
                    assert!(row.iter().all(|e| e.1 >= 0.0));
                    for &(t, p) in row {
                        if p == 0.0 {
                            continue;
                        }
                        match t {
                            JointTarget::Live(a, c) => {
                                assert!(a != c);
                                assert!(a == x || c == y, "{name}: both walkers moved without meeting");
                            }
                            JointTarget::Met(..) => assert!(g.has_edge(x, y), "{name}: met while not adjacent"),
                        }
                    }
                    let marginal = jk.marginal_of_first(x, y);
                    for v in 0..n {
                        assert!(
                            (marginal[v] - b.get(x, v)).abs() <= 1e-12,
                            "{name} {variant:?} ({x},{y}): marginal to {v} is {} not {}",
                            marginal[v],
                            b.get(x, v)
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn meeting_times_symmetric() {
    for (name, g) in catalog().into_iter().filter(|(_, g)| g.n() <= 13) {
        let m = JointKernel::build(&g, JointVariant::Interacting)
            .unwrap()
            .exact_meeting_times()
            .unwrap();
        assert!(m.asymmetry() <= 1e-9 * m.max().0.max(1.0), "{name}: asymmetry {}", m.asymmetry());
    }
}

#[test]
fn coupled_meeting_below_potential() {
    let mut graphs: Vec<(String, Graph)> = Vec::new();
    for n in 4..=12 {
        graphs.push((format!("cycle:{n}"), TopologySpec::Cycle { n }.build().unwrap()));
    }
    for n in 5..=12 {
        graphs.push((format!("path:{n}"), TopologySpec::Path { n }.build().unwrap()));
    }
    graphs.push(("grid:3x3".into(), TopologySpec::Grid { rows: 3, cols: 3 }.build().unwrap()));
    graphs.push(("grid:3x4".into(), TopologySpec::Grid { rows: 3, cols: 4 }.build().unwrap()));
    graphs.extend(common::random_catalog(40, 5, 12, 99));
    let mut checked = 0;
    for (name, g) in &graphs {
        let jk = match JointKernel::build(g, JointVariant::Coupled) {
            Ok(jk) => jk,
            Err(Error::CoupledChainInfeasible { .. }) => continue,
            Err(e) => panic!("{name}: {e}"),
        };
        checked += 1;
        let m = jk.exact_meeting_times().unwrap();
        let h = HittingTimes::compute(&TransitionKernel::build(g, WalkKind::Biased).unwrap()).unwrap();
        let (h_max, _) = h.max();
        let t = h.hidden_vertex().unwrap();
        let n = g.n();
        for x in 0..n {
            for y in (0..n).filter(|&y| y != x) {
                let phi = h.potential(t, x, y);
                assert!((phi - h.potential(t, y, x)).abs() <= 1e-8 * phi.max(1.0), "{name}: phi asymmetric");
                assert!(m.get(x, y) <= phi + 1e-9 * phi, "{name} ({x},{y}): M' = {} > phi = {phi}", m.get(x, y));
                assert!(phi < 2.0 * h_max, "{name}: phi = {phi} >= 2 H");
            }
            assert!(h.potential(t, x, x) >= -1e-9 * h_max);
        }
    }
    assert!(checked >= 20, "only {checked} graphs admit the coupled chain");
}

#[test]
fn hidden_vertices_exist() {
    for (name, g) in catalog() {
        let k = TransitionKernel::build(&g, WalkKind::Biased).unwrap();
        let t = chain::find_hidden_vertex(&k).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(t < g.n());
    }
}

#[test]
fn monte_carlo_meeting_matches_exact() {
    let cases = [
        (TopologySpec::Complete { n: 3 }, 0, 1),
        (TopologySpec::Cycle { n: 5 }, 0, 2),
        (TopologySpec::Grid { rows: 3, cols: 3 }, 0, 8),
    ];
    for (i, (spec, x, y)) in cases.into_iter().enumerate() {
        let g = spec.build().unwrap();
        let exact = JointKernel::build(&g, JointVariant::Interacting)
            .unwrap()
            .exact_meeting_times()
            .unwrap()
            .get(x, y);
        let est = chain::mc_meeting_time(&g, x, y, 100_000, 1000 + i as u64).unwrap();
        assert!(est.within(exact, 3.0), "{spec}: MC {:?} vs exact {exact}", est);
    }
    let k16 = TopologySpec::Complete { n: 16 }.build().unwrap();
    let est = chain::mc_meeting_time(&k16, 3, 9, 10_000, 7).unwrap();
    assert!(est.within(120.0, 3.0), "{est:?}");
}

#[test]
fn monte_carlo_hitting_matches_exact() {
    let g = TopologySpec::Star { n: 5 }.build().unwrap();
    let est = chain::mc_hitting_time(&g, 0, 1, 50_000, 3).unwrap();
    assert!(est.within(16.0, 3.0), "{est:?}");
    assert_eq!(chain::mc_hitting_time(&g, 2, 2, 10, 3).unwrap().mean, 0.0);
}

/// Independent meet-all simulator: token positions instead of node
/// occupants, and edge activation by drawing an ordered node pair until it
/// is an edge (uniform initiator, then uniform neighbor, by rejection).
fn meet_all_oracle(g: &Graph, start: usize, trials: usize, seed: u64) -> Estimate {
    let n = g.n();
    let mut r = rng::stream(seed, &[]);
    let samples: Vec<f64> = (0..trials)
        .map(|_| {
            let mut pos: Vec<usize> = (0..n).collect();
            let mut met = vec![false; n];
            met[start] = true;
            let mut ticks = 0u64;
            while met.iter().any(|m| !m) {
                ticks += 1;
                let i = r.gen_range(0..n);
                let j = loop {
                    let j = r.gen_range(0..n);
                    if g.has_edge(i, j) {
                        break j;
                    }
                };
                let ti = pos.iter().position(|&p| p == i).unwrap();
                let tj = pos.iter().position(|&p| p == j).unwrap();
                if ti == start {
                    met[tj] = true;
                }
                if tj == start {
                    met[ti] = true;
                }
                pos[ti] = j;
                pos[tj] = i;
            }
            ticks as f64
        })
        .collect();
    Estimate::from_samples(&samples)
}

#[test]
fn meet_all_complete_four() {
    let g = TopologySpec::Complete { n: 4 }.build().unwrap();
    let est = chain::mc_meet_all_time(&g, 0, 20_000, 11).unwrap();
    assert!(est.mean >= 6.0 && est.mean <= 24.0, "{est:?}");
    let oracle = meet_all_oracle(&g, 0, 20_000, 12);
    let se = (est.stderr.unwrap().powi(2) + oracle.stderr.unwrap().powi(2)).sqrt();
    assert!((est.mean - oracle.mean).abs() <= 3.0 * se, "{est:?} vs oracle {oracle:?}");
}

#[test]
fn meet_all_complete_envelope() {
    let mut prev = 0.0;
    for n in [8usize, 16, 32] {
        let g = TopologySpec::Complete { n }.build().unwrap();
        let est = chain::mc_meet_all_time(&g, 0, 400, n as u64).unwrap();
        let m = (n * (n - 1)) as f64 / 2.0;
        let nf = n as f64;
        assert!(est.mean >= m, "K{n}: {est:?} below one meeting time");
        assert!(est.mean <= nf * m, "K{n}: {est:?} above the union bound");
        assert!(est.mean <= 2.0 * m * (nf.ln() + 1.0), "K{n}: {est:?} outside the M log N envelope");
        assert!(est.mean > prev);
        prev = est.mean;
    }
}
