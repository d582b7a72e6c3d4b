use degsplit::graph::virtualize::virtualize;
use degsplit::oracle::{check, euler_split, min_max_outdegree_by_subsets, min_max_outdegree_exact, Artifact, Contract, Witness};
use degsplit::orient::{arboricity_orient, audit_reducer, forest_decompose, FlowConfig, ForestConfig};
use degsplit::sinkless::sinkless_dispatch;
use degsplit::split::{balanced_split_randomized, FinderMode};
use degsplit::{generate, Color, Family, Graph, Orientation, TwoColoring};
use proptest::prelude::*;

/// Edge lists on `n` nodes with some half-edges and no self-loops.
fn graphs(max_n: usize, max_m: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n).prop_flat_map(move |n| {
        prop::collection::vec((0..n, prop::option::weighted(0.85, 0..n - 1)), 0..=max_m).prop_map(move |ends| {
            let edges = ends.into_iter().map(|(a, b)| (a, b.map(|b| if b >= a { b + 1 } else { b })));
            Graph::new(n, edges).unwrap()
        })
    })
}

fn with_orientation(max_n: usize, max_m: usize) -> impl Strategy<Value = (Graph, Orientation)> {
    graphs(max_n, max_m).prop_flat_map(|g| {
        let m = g.m();
        prop::collection::vec(any::<bool>(), m).prop_map(move |flips| {
            let mut o = Orientation::lower_to_higher(&g);
            for (e, &f) in flips.iter().enumerate() {
                if f {
                    o.flip(&g, e);
                }
            }
            (g.clone(), o)
        })
    })
}

fn color_degree(g: &Graph, c: &TwoColoring) -> usize {
    (0..g.n())
        .map(|v| {
            let red = g.ports(v).iter().filter(|p| c.color(p.edge()) == Color::Red).count();
            red.max(g.degree(v) - red)
        })
        .max()
        .unwrap_or(0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adjacency_matches_edge_list(g in graphs(12, 40)) {
        g.audit().unwrap();
        let ports: usize = (0..g.n()).map(|v| g.degree(v)).sum();
        let halves = (0..g.m()).filter(|&e| g.is_half(e)).count();
        prop_assert_eq!(ports, 2 * g.m() - halves);
    }

    #[test]
    fn self_loops_are_rejected(n in 1usize..10, v in 0usize..10) {
        let v = v % n;
        prop_assert!(Graph::new(n, [(v, Some(v))]).is_err());
    }

    #[test]
    fn degrees_split_into_in_and_out((g, o) in with_orientation(10, 30)) {
        let (out, inn) = (o.out_degrees(&g), o.in_degrees(&g));
        for v in 0..g.n() {
            prop_assert_eq!(out[v] + inn[v], g.degree(v));
        }
        let r = o.reversed(&g);
        for e in 0..g.m() {
            if !g.is_half(e) {
                prop_assert_ne!(r.tail(e), o.tail(e));
            }
        }
    }

    #[test]
    fn sinkless_witness_is_a_sink((g, o) in with_orientation(10, 30)) {
        let report = check(&g, Artifact::Orientation(&o), Contract::Sinkless).unwrap();
        let out = o.out_degrees(&g);
        let sink = (0..g.n()).find(|&v| g.degree(v) > 0 && out[v] == 0);
        prop_assert_eq!(report.pass, sink.is_none());
        if let Some(v) = sink {
            prop_assert_eq!(report.first_failure().unwrap().witness.clone(), Some(Witness::Node(v)));
        }
    }

    #[test]
    fn bounds_check_agrees_with_degrees((g, o) in with_orientation(10, 30), din in 0usize..6, dout in 0usize..6) {
        let report = check(&g, Artifact::Orientation(&o), Contract::InOutBounds { din, dout }).unwrap();
        let want = o.out_degrees(&g).iter().all(|&k| k <= dout) && o.in_degrees(&g).iter().all(|&k| k <= din);
        prop_assert_eq!(report.pass, want);
    }

    #[test]
    fn color_counts_follow_flips(g in graphs(10, 30), flips in prop::collection::vec(0usize..30, 0..60)) {
        let mut c = TwoColoring::uniform(&g, Color::Red);
        for e in flips {
            if e < g.m() {
                c.flip(&g, e);
            }
        }
        prop_assert!(c.counts_consistent(&g));
    }

    #[test]
    fn euler_split_is_nearly_even(g in graphs(14, 50)) {
        let c = euler_split(&g);
        prop_assert!(color_degree(&g, &c) <= g.max_degree() / 2 + 1);
    }

    #[test]
    fn exact_outdegree_matches_subsets(g in graphs(9, 24)) {
        prop_assert_eq!(min_max_outdegree_exact(&g).unwrap(), min_max_outdegree_by_subsets(&g).unwrap());
    }

    #[test]
    fn copies_respect_their_degree(g in graphs(10, 40), d in 1usize..5) {
        let (h, map) = virtualize(&g, d).unwrap();
        prop_assert_eq!(h.m(), g.m());
        for copies in &map.copies {
            let short = copies.iter().filter(|&&c| h.degree(c) < d).count();
            prop_assert!(copies.iter().all(|&c| h.degree(c) <= d));
            prop_assert!(short <= 1);
        }
        let o = map.devirtualize_orientation(&g, &Orientation::lower_to_higher(&h)).unwrap();
        o.validate(&g).unwrap();
        prop_assert_eq!(o.out_degrees(&g).iter().sum::<usize>(), g.m());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn randomized_split_meets_its_bound(n in 10usize..40, p in 0.1f64..0.5, seed in any::<u64>(), eps in 0.1f64..0.9) {
        let g = generate(&Family::Gnp { n, p }, seed).unwrap();
        let out = balanced_split_randomized(&g, eps, seed, FinderMode::Greedy).unwrap();
        let t = ((1.0 + eps) * g.max_degree() as f64 / 2.0).ceil() as usize;
        prop_assert!(color_degree(&g, &out.coloring) <= t);
        prop_assert!(out.coloring.counts_consistent(&g));
    }

    #[test]
    fn sinkless_on_regular_graphs(n in 10usize..200, delta in 3usize..9, seed in any::<u64>()) {
        let n = n + (n * delta) % 2;
        let g = generate(&Family::Regular { n, delta }, seed).unwrap();
        let (o, _) = sinkless_dispatch(&g, seed).unwrap();
        prop_assert!(check(&g, Artifact::Orientation(&o), Contract::Sinkless).unwrap().pass);
        let (again, _) = sinkless_dispatch(&g, seed).unwrap();
        prop_assert_eq!(o, again);
    }

    #[test]
    fn orientation_keeps_out_degree_floor(n in 20usize..200, a in 2usize..7, seed in any::<u64>(), eps in 0.1f64..0.9) {
        let g = generate(&Family::ForestUnion { n, a }, seed).unwrap();
        let d = ((1.0 + eps) * a as f64).ceil() as usize;
        let start = Orientation::lower_to_higher(&g);
        let out = arboricity_orient(&g, a, eps, &FlowConfig { seed, ..FlowConfig::default() }).unwrap();
        prop_assert!(out.orientation.max_out_degree(&g) <= d);
        audit_reducer(&g, &start, &out.orientation, d).unwrap();
    }

    #[test]
    fn forests_partition_the_edges(seed in any::<u64>()) {
        let (a, eps) = (22, 0.5);
        let g = generate(&Family::ForestUnion { n: 200, a }, seed).unwrap();
        let o = arboricity_orient(&g, a, eps, &FlowConfig::default()).unwrap().orientation;
        let (f, _, _) = forest_decompose(&g, &o, a, eps, seed, &ForestConfig::default()).unwrap();
        let stars = Contract::Forests { stars: true };
        prop_assert!(check(&g, Artifact::Forests(&f), stars).unwrap().pass);
        prop_assert!(f.forests as f64 <= a as f64 * (1.0 + 8.0 * eps));
    }
}
