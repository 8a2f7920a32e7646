mod common;

use proptest::prelude::*;

use product_space::graph::{component_curve, hierarchical_order, max_spanning_forest};

proptest! {
    /// Forest weight equals exhaustive enumeration over all acyclic edge
    /// subsets (tiny graphs).
    #[test]
    fn forest_weight_matches_brute_force(seed in any::<u64>(), n in 2usize..=6) {
        let mut rng = common::rng(seed);
        let p = common::random_proximity(&mut rng, n, 0.3);
        let g = max_spanning_forest(&p).unwrap();
        let weight: f64 = g.edges.iter().map(|e| e.phi).sum();
        let oracle = common::brute_force_forest_weight(&p);
        prop_assert!((weight - oracle).abs() < 1e-12, "weight {} vs oracle {}", weight, oracle);
    }

    /// Cut property: for every excluded edge, the path between its endpoints
    /// in the forest never crosses a lighter edge.
    #[test]
    fn no_excluded_edge_beats_a_forest_edge(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let n = 7;
        let p = common::random_proximity(&mut rng, n, 0.2);
        let g = max_spanning_forest(&p).unwrap();
        // For each forest edge, removing it splits its component in two; any
        // positive edge across that cut must not be strictly heavier.
        for (k, e) in g.edges.iter().enumerate() {
            let mut comp: Vec<usize> = (0..n).collect();
            for (k2, e2) in g.edges.iter().enumerate() {
                if k2 == k {
                    continue;
                }
                let (ci, cj) = (comp[e2.i], comp[e2.j]);
                if ci != cj {
                    for c in comp.iter_mut() {
                        if *c == cj { *c = ci; }
                    }
                }
            }
            for a in 0..n {
                for b in a + 1..n {
                    if comp[a] != comp[b] && p.get(a, b) > 0.0 {
                        // (a, b) crosses the cut defined by removing e.
                        let same_cut = (comp[a] == comp[e.i] && comp[b] == comp[e.j])
                            || (comp[a] == comp[e.j] && comp[b] == comp[e.i]);
                        if same_cut {
                            prop_assert!(p.get(a, b) <= e.phi + 1e-12);
                        }
                    }
                }
            }
        }
    }

    /// Giant-component ratio is monotone non-increasing in the threshold.
    #[test]
    fn component_curve_is_monotone(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let p = common::random_proximity(&mut rng, 12, 0.4);
        let thresholds: Vec<f64> = (0..=20).map(|k| k as f64 / 20.0).collect();
        let curve = component_curve(&p, &thresholds).unwrap();
        for w in curve.samples.windows(2) {
            prop_assert!(w[1].giant_size <= w[0].giant_size);
        }
    }

    /// Leaf order matches an independent from-scratch average-linkage
    /// clustering on 1 - phi.
    #[test]
    fn leaf_order_matches_reference_linkage(seed in any::<u64>(), n in 2usize..=6) {
        let mut rng = common::rng(seed);
        let p = common::random_proximity(&mut rng, n, 0.2);
        let got = hierarchical_order(&p).unwrap();
        let want = common::average_linkage_oracle(&p);
        prop_assert_eq!(got, want);
    }

    /// The ordering is a true permutation of the product codes.
    #[test]
    fn leaf_order_is_a_permutation(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let p = common::random_proximity(&mut rng, 10, 0.3);
        let mut order = hierarchical_order(&p).unwrap();
        order.sort();
        prop_assert_eq!(order, p.products().to_vec());
    }
}
