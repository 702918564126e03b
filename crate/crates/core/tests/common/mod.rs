#![allow(dead_code)]

use qcons::graph::{Graph, TopologySpec};
use qcons::rng;
use rand::Rng;

/// Connected G(n, p) sample with p drawn from [0.25, 0.9].
pub fn random_connected(n: usize, seed: u64) -> Graph {
    let mut r = rng::stream(seed, &[0xC0FFEE]);
    let p = r.gen_range(0.25..0.9);
    TopologySpec::ErdosRenyi { n, p, seed }.build().unwrap()
}

/// `count` random connected graphs with sizes uniform in `lo..=hi`.
pub fn random_catalog(count: usize, lo: usize, hi: usize, seed: u64) -> Vec<(String, Graph)> {
    let mut r = rng::stream(seed, &[]);
    (0..count)
        .map(|i| {
            let n = r.gen_range(lo..=hi);
            (format!("random#{i}(n={n})"), random_connected(n, rng::derive_seed(seed, &[i as u64])))
        })
        .collect()
}

/// Complete, path, cycle, star and grid graphs on `n` nodes (cycle needs
/// n >= 3; the grid uses the most square factorization of n).
pub fn named(n: usize) -> Vec<(String, Graph)> {
    let rows = (1..=n).take_while(|r| r * r <= n).filter(|r| n.is_multiple_of(*r)).last().unwrap();
    let mut specs = vec![
        TopologySpec::Complete { n },
        TopologySpec::Path { n },
        TopologySpec::Star { n },
        TopologySpec::Grid { rows, cols: n / rows },
    ];
    if n >= 3 {
        specs.push(TopologySpec::Cycle { n });
    }
    specs.into_iter().map(|s| (s.to_string(), s.build().unwrap())).collect()
}

/// Every connected labeled graph on `n` nodes (exhaustive over edge subsets).
pub fn all_connected(n: usize) -> Vec<Graph> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << pairs.len()) {
        if (mask.count_ones() as usize) < n - 1 {
            continue;
        }
        let edges: Vec<_> = pairs
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        if let Ok(g) = Graph::from_edges(n, &edges) {
            out.push(g);
        }
    }
    out
}
