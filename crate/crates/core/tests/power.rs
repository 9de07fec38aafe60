use std::collections::{BTreeMap, VecDeque};

use graph_power::graph::{build_from_edges, sample_gnp_with_probability, SparseGraph};
use graph_power::power::{
    exact_power_oracle, exact_power_oracle_with_cap, layer_profile, max_power_degree, power_degree,
    profile_census, BfsScratch,
};
use proptest::prelude::*;

/// Plain BFS distances from `root`, `usize::MAX` when unreachable.
fn distances(g: &SparseGraph, root: u32) -> Vec<usize> {
    let mut dist = vec![usize::MAX; g.n()];
    dist[root as usize] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u) {
            if dist[v as usize] == usize::MAX {
                dist[v as usize] = dist[u as usize] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

fn cycle(n: usize) -> SparseGraph {
    let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    build_from_edges(n, &edges).unwrap()
}

fn with_edge(g: &SparseGraph, u: usize, v: usize) -> SparseGraph {
    let mut edges: Vec<(usize, usize)> = g.edges().map(|(a, b)| (a as usize, b as usize)).collect();
    edges.push((u, v));
    build_from_edges(g.n(), &edges).unwrap()
}

fn random_graph() -> impl Strategy<Value = SparseGraph> {
    (
        1u64..=100,
        prop::sample::select(vec![0.5, 1.0, 2.0, 4.0]),
        any::<u64>(),
    )
        .prop_map(|(n, c, seed)| {
            sample_gnp_with_probability(n, (c / n as f64).min(1.0), seed).unwrap()
        })
}

#[test]
fn hand_examples() {
    let c5 = cycle(5);
    let sq = exact_power_oracle(&c5, 2).unwrap();
    assert!((0..5).all(|v| sq.degree(v) == 4));
    assert_eq!(layer_profile(&c5, 0, 2).unwrap().layers, vec![2, 2]);

    let path = build_from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
    assert_eq!(layer_profile(&path, 0, 3).unwrap().layers, vec![1, 1, 1]);
    assert_eq!(
        layer_profile(&path, 0, 5).unwrap().layers,
        vec![1, 1, 1, 0, 0]
    );
    assert_eq!(power_degree(&path, 1, 1).unwrap(), 2);

    let iso = build_from_edges(3, &[]).unwrap();
    assert_eq!(layer_profile(&iso, 2, 3).unwrap().layers, vec![0, 0, 0]);
}

#[test]
fn argument_errors() {
    let g = cycle(6);
    assert!(layer_profile(&g, 6, 2).is_err());
    assert!(layer_profile(&g, 0, 0).is_err());
    assert!(max_power_degree(&g, 0).is_err());
    let big = sample_gnp_with_probability(50, 0.05, 1).unwrap();
    assert_eq!(
        exact_power_oracle_with_cap(&big, 2, 49)
            .unwrap_err()
            .exit_code(),
        3
    );
}

#[test]
fn fixed_instance_matches_oracle() {
    let g = sample_gnp_with_probability(50, 2.0 / 50.0, 2024).unwrap();
    let oracle = exact_power_oracle(&g, 3).unwrap();
    for v in 0..50 {
        assert_eq!(power_degree(&g, v, 3).unwrap(), oracle.degree(v) as u64);
    }
}

#[test]
fn max_degree_ties_and_histogram() {
    let star = build_from_edges(6, &[(3, 0), (3, 1), (3, 2), (3, 4), (3, 5)]).unwrap();
    let one = max_power_degree(&star, 1).unwrap();
    assert_eq!((one.max_degree, one.argmax_vertex), (5, 3));
    let two = max_power_degree(&star, 2).unwrap();
    assert_eq!((two.max_degree, two.argmax_vertex), (5, 0));
    assert_eq!(two.histogram, BTreeMap::from([(5, 6)]));
    assert_eq!(two.count_above(4.5), 6);
    assert_eq!(two.count_above(5.0), 0);

    let mut csv = Vec::new();
    one.write_histogram_csv(&mut csv).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap(), "degree,count\n1,5\n5,1\n");
}

#[test]
fn scan_is_independent_of_pool_size() {
    let g = sample_gnp_with_probability(20_000, 1.5 / 20_000.0, 5).unwrap();
    let run = |w| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .unwrap()
            .install(|| max_power_degree(&g, 3).unwrap())
    };
    let base = run(1);
    for w in [2, 4, 8] {
        assert_eq!(run(w), base);
    }
}

#[test]
fn census_counts_every_vertex() {
    let g = sample_gnp_with_probability(3_000, 1.0 / 3_000.0, 8).unwrap();
    let census = profile_census(&g, 2).unwrap();
    assert_eq!(census.values().sum::<u64>(), 3_000);
    for (p, _) in &census {
        assert!(!(p[0] == 0 && p[1] > 0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn bfs_matches_oracle(g in random_graph(), r in 1usize..=3) {
        let oracle = exact_power_oracle(&g, r).unwrap();
        let scan = max_power_degree(&g, r).unwrap();
        let mut best = 0;
        for v in 0..g.n() as u32 {
            let d = power_degree(&g, v, r).unwrap();
            prop_assert_eq!(d, oracle.degree(v) as u64);
            best = best.max(d);
        }
        prop_assert_eq!(scan.max_degree, best);
        prop_assert_eq!(scan.histogram.values().sum::<u64>(), g.n() as u64);
    }

    #[test]
    fn layers_partition_the_vertex_set(g in random_graph(), r in 1usize..=5) {
        let n = g.n();
        for v in 0..n as u32 {
            let layers = layer_profile(&g, v, r).unwrap().layers;
            let dist = distances(&g, v);
            for (i, &l) in layers.iter().enumerate() {
                prop_assert_eq!(l as usize, dist.iter().filter(|&&d| d == i + 1).count());
            }
            let unreached = dist.iter().filter(|&&d| d > r).count();
            prop_assert_eq!(layers.iter().sum::<u64>() as usize + 1 + unreached, n);
            for w in layers.windows(2) {
                prop_assert!(w[0] > 0 || w[1] == 0);
            }
        }
    }

    #[test]
    fn adding_an_edge_never_decreases(g in random_graph(), a in any::<u32>(), b in any::<u32>(), r in 1usize..=3) {
        let n = g.n() as u32;
        prop_assume!(n >= 2);
        let (u, v) = (a % n, b % n);
        prop_assume!(u != v);
        let h = with_edge(&g, u as usize, v as usize);
        for x in 0..n {
            prop_assert!(power_degree(&h, x, r).unwrap() >= power_degree(&g, x, r).unwrap());
        }
    }

    #[test]
    fn radius_monotone(g in random_graph(), r in 1usize..=4) {
        let mut scratch = BfsScratch::new(g.n());
        let mut buf = Vec::new();
        for v in 0..g.n() as u32 {
            let lo = scratch.power_degree(&g, v, r, &mut buf);
            let hi = scratch.power_degree(&g, v, r + 1, &mut buf);
            prop_assert!(lo <= hi);
            prop_assert_eq!(lo, power_degree(&g, v, r).unwrap());
        }
    }
}
