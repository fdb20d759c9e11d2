mod common;

use proptest::prelude::*;
use rand::Rng;
use sinr_connectivity::{
    build_graph, is_strongly_connected, sinr_edge, Coloring, NodeSet, SinrGraph, SinrParams,
};

use common::{exact_edge, random_coloring, random_nodes, rng};

fn scaled(nodes: &NodeSet, factor: f64) -> NodeSet {
    let n = nodes.len();
    if nodes.position(0).len() == 1 {
        NodeSet::line((0..n).map(|i| nodes.position(i)[0] * factor).collect()).unwrap()
    } else {
        NodeSet::plane(
            (0..n)
                .map(|i| [nodes.position(i)[0] * factor, nodes.position(i)[1] * factor])
                .collect(),
        )
        .unwrap()
    }
}

fn edge_set(g: &SinrGraph) -> Vec<(usize, usize)> {
    let mut e: Vec<_> = g.edges().collect();
    e.sort_unstable();
    e
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn graph_matches_exact_arithmetic(seed in any::<u64>(), n in 2usize..=8, two_d in any::<bool>(), cubic in any::<bool>(), beta_idx in 0usize..4) {
        let mut r = rng(seed);
        let (alpha, dim) = if cubic { (3, 1) } else { (2, if two_d { 2 } else { 1 }) };
        let beta = [1.0, 1.5, 2.0, 4.0][beta_idx];
        let nodes = random_nodes(&mut r, n, dim);
        let coloring = random_coloring(&mut r, n);
        let params = SinrParams::new(alpha as f64, beta).unwrap();
        let g = build_graph(&nodes, &coloring, &params).unwrap();
        for u in 0..n {
            for v in 0..n {
                if u != v {
                    prop_assert_eq!(g.has_edge(u, v), exact_edge(&nodes, &coloring, alpha, beta, u, v), "pair ({}, {})", u, v);
                }
            }
        }
    }

    #[test]
    fn graph_matches_pairwise_evaluation(seed in any::<u64>(), n in 2usize..60, alpha in 1.0f64..4.5, beta in 1.0f64..6.0, two_d in any::<bool>()) {
        let mut r = rng(seed);
        let nodes = random_nodes(&mut r, n, if two_d { 2 } else { 1 });
        let k = r.gen_range(1..=n.min(6));
        let coloring = Coloring::explicit(k, (0..n).map(|_| r.gen_range(1..=k as u32)).collect()).unwrap();
        let params = SinrParams::new(alpha, beta).unwrap();
        let g = build_graph(&nodes, &coloring, &params).unwrap();
        for u in 0..n {
            for v in 0..n {
                if u != v {
                    prop_assert_eq!(g.has_edge(u, v), sinr_edge(&nodes, &coloring, u, v, &params).unwrap().is_edge);
                }
            }
        }
    }

    #[test]
    fn extra_interferer_never_adds_edges(seed in any::<u64>(), n in 3usize..30, alpha in 1.0f64..4.0) {
        let mut r = rng(seed);
        let nodes = random_nodes(&mut r, n + 1, 1);
        // Drop one node, then compare with the full set where it shares a color with sender u.
        let extra = r.gen_range(0..=n);
        let xs: Vec<f64> = (0..=n).filter(|&i| i != extra).map(|i| nodes.position(i)[0]).collect();
        let small = NodeSet::line(xs).unwrap();
        let k = r.gen_range(1..=3u32);
        let small_colors: Vec<u32> = (0..n).map(|_| r.gen_range(1..=k)).collect();
        let u_small = r.gen_range(0..n);
        let mut full_colors = small_colors.clone();
        full_colors.insert(extra, small_colors[u_small]);
        let params = SinrParams::new(alpha, 1.0).unwrap();
        let g_small = build_graph(&small, &Coloring::explicit(k as usize, small_colors).unwrap(), &params).unwrap();
        let g_full = build_graph(&nodes, &Coloring::explicit(k as usize, full_colors).unwrap(), &params).unwrap();
        let to_full = |i: usize| if i >= extra { i + 1 } else { i };
        for v in 0..n {
            if g_full.has_edge(to_full(u_small), to_full(v)) {
                prop_assert!(g_small.has_edge(u_small, v));
            }
        }
    }

    #[test]
    fn refining_a_coloring_never_removes_edges(seed in any::<u64>(), n in 2usize..40, alpha in 1.0f64..4.0) {
        let mut r = rng(seed);
        let nodes = random_nodes(&mut r, n, 1);
        let k = r.gen_range(1..=4u32);
        let coarse: Vec<u32> = (0..n).map(|_| r.gen_range(1..=k)).collect();
        // Split every class in two.
        let fine: Vec<u32> = coarse.iter().map(|&c| 2 * c - u32::from(r.gen_bool(0.5))).collect();
        let params = SinrParams::new(alpha, 1.0).unwrap();
        let g_coarse = build_graph(&nodes, &Coloring::explicit(k as usize, coarse).unwrap(), &params).unwrap();
        let g_fine = build_graph(&nodes, &Coloring::explicit(2 * k as usize, fine).unwrap(), &params).unwrap();
        for (u, v) in g_coarse.edges() {
            prop_assert!(g_fine.has_edge(u, v));
        }
    }

    #[test]
    fn power_of_two_scaling_preserves_graph(seed in any::<u64>(), n in 2usize..30, alpha in 1u32..5, shift in -6i32..6, two_d in any::<bool>()) {
        let mut r = rng(seed);
        let nodes = random_nodes(&mut r, n, if two_d { 2 } else { 1 });
        let coloring = random_coloring(&mut r, n);
        let params = SinrParams::new(alpha as f64, 1.0).unwrap();
        let g = build_graph(&nodes, &coloring, &params).unwrap();
        let g2 = build_graph(&scaled(&nodes, 2f64.powi(shift)), &coloring, &params).unwrap();
        prop_assert_eq!(edge_set(&g), edge_set(&g2));
    }

    #[test]
    fn scaling_preserves_ratios(seed in any::<u64>(), n in 2usize..20, alpha in 1.0f64..4.0, factor in 0.01f64..100.0) {
        let mut r = rng(seed);
        let nodes = random_nodes(&mut r, n, 2);
        let coloring = random_coloring(&mut r, n);
        let params = SinrParams::new(alpha, 1.0).unwrap();
        let big = scaled(&nodes, factor);
        for u in 0..n {
            for v in 0..n {
                if u == v {
                    continue;
                }
                let a = sinr_edge(&nodes, &coloring, u, v, &params).unwrap();
                let b = sinr_edge(&big, &coloring, u, v, &params).unwrap();
                if a.ratio.is_finite() && a.ratio > 0.0 {
                    prop_assert!((a.ratio / b.ratio - 1.0).abs() < 1e-9);
                } else {
                    prop_assert_eq!(a.ratio, b.ratio);
                }
            }
        }
    }

    #[test]
    fn color_labels_do_not_matter(seed in any::<u64>(), n in 2usize..30) {
        let mut r = rng(seed);
        let nodes = random_nodes(&mut r, n, 1);
        let coloring = random_coloring(&mut r, n);
        let k = coloring.k() as u32;
        let shift = r.gen_range(0..k);
        let relabeled: Vec<u32> = coloring.colors().iter().map(|&c| (c - 1 + shift) % k + 1).collect();
        let params = SinrParams::new(2.0, 1.0).unwrap();
        let g = build_graph(&nodes, &coloring, &params).unwrap();
        let g2 = build_graph(&nodes, &Coloring::explicit(k as usize, relabeled).unwrap(), &params).unwrap();
        prop_assert_eq!(edge_set(&g), edge_set(&g2));
    }

    #[test]
    fn distinct_colors_give_complete_graph(seed in any::<u64>(), n in 2usize..40, alpha in 1.0f64..5.0, beta in 1.0f64..100.0) {
        let mut r = rng(seed);
        let nodes = random_nodes(&mut r, n, 2);
        let coloring = Coloring::explicit(n, (1..=n as u32).collect()).unwrap();
        let g = build_graph(&nodes, &coloring, &SinrParams::new(alpha, beta).unwrap()).unwrap();
        prop_assert_eq!(g.edge_count(), n * (n - 1));
        prop_assert!(is_strongly_connected(&g));
    }

    #[test]
    fn strong_connectivity_matches_closure(n in 1usize..9, bits in proptest::collection::vec(any::<bool>(), 64)) {
        let edges: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (0..n).map(move |v| (u, v)))
            .filter(|&(u, v)| u != v && bits[u * 8 + v])
            .collect();
        let g = SinrGraph::from_edges(n, edges.iter().copied()).unwrap();
        let mut reach = vec![vec![false; n]; n];
        for (i, row) in reach.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(u, v) in &edges {
            reach[u][v] = true;
        }
        for m in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if reach[i][m] && reach[m][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
        let expected = reach.iter().all(|row| row.iter().all(|&x| x));
        prop_assert_eq!(is_strongly_connected(&g), expected);
    }
}

#[test]
fn single_color_is_never_connected() {
    let params = SinrParams::new(2.0, 1.0).unwrap();
    let mut r = rng(3);
    for n in 2..20 {
        let nodes = random_nodes(&mut r, n, 2);
        let g = build_graph(&nodes, &Coloring::explicit(1, vec![1; n]).unwrap(), &params).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert!(!is_strongly_connected(&g));
    }
}
