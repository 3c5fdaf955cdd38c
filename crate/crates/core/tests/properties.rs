//! Randomized properties of trees, presentations and distances.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mergedist::fuzz::random_tree;
use mergedist::metrics::bracket::presentation_distance_bracket;
use mergedist::metrics::{
    elder_barcode, interleaving_distance, interleaving_exists, semi_distance_upper, wasserstein, DEFAULT_BUDGET,
};
use mergedist::presentation::{are_compatible, label_distance, pad_concatenate};
use mergedist::{Exponent, MergeTree, Presentation, TreeDoc};

const P: [Exponent; 3] = [Exponent::ONE, Exponent::TWO, Exponent::INFINITY];

fn trees(seed: u64, count: usize, max_leaves: usize) -> Vec<MergeTree> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_tree(&mut rng, max_leaves, Some(0.25))).collect()
}

#[test]
fn minimal_presentations_round_trip_on_a_thousand_trees() {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    for _ in 0..1000 {
        let t = random_tree(&mut rng, 7, None);
        let p = Presentation::minimal(&t);
        assert_eq!(p.generator_count(), t.leaf_count());
        assert_eq!(p.relation_count(), t.leaf_count() - 1);
        assert!(p.coequalize_tree().unwrap().is_isomorphic(&t));
    }
}

proptest! {
    #[test]
    fn persistent_set_round_trip(seed in any::<u64>()) {
        let t = &trees(seed, 1, 7)[0];
        let ps = t.to_persistent_set();
        ps.validate().unwrap();
        prop_assert!(ps.to_tree().unwrap().is_isomorphic(t));
        let doc: TreeDoc = serde_json::from_str(&serde_json::to_string(&t.to_doc()).unwrap()).unwrap();
        prop_assert!(MergeTree::from_doc(&doc).unwrap().is_isomorphic(t));
    }

    #[test]
    fn component_counts_are_constant_between_critical_times(seed in any::<u64>()) {
        let t = &trees(seed, 1, 7)[0];
        let times = t.critical_times();
        for w in times.windows(2) {
            let mid = (w[0] + w[1]) / 2.0;
            prop_assert_eq!(t.component_count_at(mid), t.component_count_at(w[0]));
        }
        prop_assert_eq!(t.component_count_at(times[0] - 1.0), 0);
        prop_assert_eq!(t.component_count_at(*times.last().unwrap()), 1);
    }

    #[test]
    fn isomorphism_is_an_equivalence(seed in any::<u64>()) {
        let ts = trees(seed, 3, 3);
        let (a, b, c) = (&ts[0], &ts[1], &ts[2]);
        prop_assert!(a.is_isomorphic(a));
        prop_assert_eq!(a.is_isomorphic(b), b.is_isomorphic(a));
        if a.is_isomorphic(b) && b.is_isomorphic(c) {
            prop_assert!(a.is_isomorphic(c));
        }
    }

    #[test]
    fn lca_is_above_and_symmetric(seed in any::<u64>()) {
        let t = &trees(seed, 1, 6)[0];
        for u in 0..t.len() {
            for v in 0..t.len() {
                let w = t.lca_index(u, v);
                prop_assert_eq!(w, t.lca_index(v, u));
                prop_assert!(t.height(w) >= t.height(u).max(t.height(v)));
            }
            prop_assert_eq!(t.lca_index(u, u), u);
        }
    }

    #[test]
    fn padding_is_compatible_and_preserves_trees(seed in any::<u64>(), extra in 0u8..4) {
        let ts = trees(seed, 2, 5);
        let (pm, pn) = (Presentation::minimal(&ts[0]), Presentation::minimal(&ts[1]));
        let t = pm.settled_height().unwrap().max(pn.settled_height().unwrap()) + f64::from(extra);
        let (a, b) = pad_concatenate(&pm, &pn, t).unwrap();
        prop_assert!(are_compatible(&a, &b));
        prop_assert!(a.presents(&ts[0], 0.0));
        prop_assert!(b.presents(&ts[1], 0.0));
        let d: Vec<f64> = P.iter().map(|&p| label_distance(&a, &b, p).unwrap()).collect();
        prop_assert!(d[0] >= d[1] && d[1] >= d[2]);
        for p in P {
            prop_assert_eq!(label_distance(&a, &b, p).unwrap(), label_distance(&b, &a, p).unwrap());
        }
    }

    #[test]
    fn semi_distance_is_symmetric(seed in any::<u64>()) {
        let ts = trees(seed, 2, 4);
        for p in P {
            let ab = semi_distance_upper(&ts[0], &ts[1], p, 500).unwrap();
            let ba = semi_distance_upper(&ts[1], &ts[0], p, 500).unwrap();
            prop_assert_eq!(ab.value, ba.value);
            prop_assert_eq!(&ab.pm, &ba.pn);
            prop_assert_eq!(&ab.pn, &ba.pm);
        }
    }

    #[test]
    fn brackets_are_ordered_and_bound_barcodes(seed in any::<u64>()) {
        let ts = trees(seed, 2, 4);
        let (bm, bn) = (elder_barcode(&ts[0]), elder_barcode(&ts[1]));
        for p in [Exponent::ONE, Exponent::TWO] {
            let b = presentation_distance_bracket(&ts[0], &ts[1], p, &[], DEFAULT_BUDGET).unwrap();
            prop_assert!(b.lower <= b.upper);
            let (w, _) = wasserstein(&bm, &bn, p).unwrap();
            for step in &b.upper_certificate.steps {
                prop_assert!(w <= step.certificate.value + 1e-9);
            }
        }
    }

    #[test]
    fn distinct_trees_have_positive_lower_bounds(seed in any::<u64>()) {
        let ts = trees(seed, 2, 4);
        let d = interleaving_distance(&ts[0], &ts[1]).unwrap().distance;
        prop_assert_eq!(d == 0.0, ts[0].is_isomorphic(&ts[1]));
        if d > 0.0 {
            let b = presentation_distance_bracket(&ts[0], &ts[1], Exponent::TWO, &[], 200).unwrap();
            prop_assert!(b.lower > 0.0);
        }
    }

    #[test]
    fn interleaving_triangle_inequality(seed in any::<u64>()) {
        let ts = trees(seed, 3, 4);
        let d = |a: usize, b: usize| interleaving_distance(&ts[a], &ts[b]).unwrap().distance;
        prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-9);
        prop_assert_eq!(d(0, 1), d(1, 0));
    }

    #[test]
    fn interleaving_distance_is_sharp(seed in any::<u64>()) {
        let ts = trees(seed, 2, 4);
        let d = interleaving_distance(&ts[0], &ts[1]).unwrap().distance;
        prop_assert!(interleaving_exists(&ts[0], &ts[1], d + 1e-6).unwrap().is_some());
        if d > 0.0 {
            prop_assert!(interleaving_exists(&ts[0], &ts[1], d - 1e-6).unwrap().is_none());
        }
    }
}
