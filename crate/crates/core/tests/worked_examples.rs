//! Small worked examples through the public API.

use mergedist::filtration::{
    geometric_lift, incidence_presentation, lp_function_distance, sublevel_merge_tree, CellComplex1,
    CellularFunction,
};
use mergedist::metrics::{
    cophenetic_distance, cophenetic_vector, elder_barcode, interleaving_distance, interleaving_exists,
    interleaving_to_presentations, presentation_distance_bracket, presentations_to_interleaving,
    semi_distance_upper, verify_witness, wasserstein, wasserstein_brute_force, Barcode, Interval, DEFAULT_BUDGET,
};
use mergedist::presentation::{are_compatible, label_distance, pad_concatenate};
use mergedist::tree::{join, leaf, validate, NodeDoc, TreeDoc};
use mergedist::{Exponent, MergeTree, Presentation};

fn three_leaves() -> MergeTree {
    MergeTree::from_shape(&join(5.0, vec![join(3.0, vec![leaf(0.0), leaf(1.0)]), leaf(2.0)]))
}

fn fork() -> MergeTree {
    MergeTree::from_shape(&join(2.0, vec![leaf(0.0), leaf(1.0)]))
}

fn triple_at_zero() -> MergeTree {
    MergeTree::from_shape(&join(1.0, vec![leaf(0.0), leaf(0.0), leaf(0.0)]))
}

#[test]
fn three_leaf_tree_as_persistent_set() {
    let t = three_leaves();
    assert!(validate(&t.to_doc()).is_empty());
    let ps = t.to_persistent_set();
    assert_eq!(ps.critical_times, vec![0.0, 1.0, 2.0, 3.0, 5.0]);
    assert_eq!(ps.set_sizes, vec![1, 2, 3, 2, 1]);
    assert!(ps.to_tree().unwrap().is_isomorphic(&t));
    let map = t.evolution_map(2.0, 5.0).unwrap();
    assert_eq!((map.domain, map.codomain, map.image_size()), (3, 1, 1));
    assert_eq!(t.component_count_at(2.5), 3);
    assert_eq!(t.component_count_at(4.0), 2);
    assert_eq!(t.component_count_at(-100.0), 0);
}

#[test]
fn height_order_violation_is_reported() {
    let doc = TreeDoc {
        nodes: vec![
            NodeDoc { id: "r".into(), height: 1.0, children: vec!["a".into()] },
            NodeDoc { id: "a".into(), height: 3.0, children: vec![] },
        ],
        root: "r".into(),
    };
    let v = validate(&doc);
    assert_eq!(v.len(), 1);
    assert!(v[0].to_string().contains("height order"));
}

#[test]
fn minimal_presentations() {
    let p = Presentation::minimal(&fork());
    assert_eq!(p.label_vector().to_string(), "[0,1;2]");
    assert_eq!(Presentation::minimal(&MergeTree::strand(1.5)).label_vector().to_string(), "[1.5]");
    let q = Presentation::minimal(&three_leaves());
    assert_eq!((q.generator_count(), q.relation_count()), (3, 2));
    assert!(q.coequalize_tree().unwrap().is_isomorphic(&three_leaves()));
}

#[test]
fn two_matrices_for_one_tree() {
    // leaves ordered 1, 0, 2 by birth; relations at 3 and 5 attached differently
    let a = Presentation::from_parts(&[1.0, 0.0, 2.0], &[(3.0, 0, 1), (5.0, 1, 2)]).unwrap();
    let b = Presentation::from_parts(&[1.0, 0.0, 2.0], &[(3.0, 0, 1), (5.0, 0, 2)]).unwrap();
    assert!(!are_compatible(&a, &b));
    assert_eq!(a.label_vector(), b.label_vector());
    assert!(a.presents(&three_leaves(), 0.0));
    assert!(b.presents(&three_leaves(), 0.0));
}

#[test]
fn trivial_pairs() {
    let p = Presentation::minimal(&fork());
    let a = 1.5;
    let q = p.with_trivial_pair(a, 1).unwrap();
    assert_eq!(q.label_vector().to_string(), "[0,1,1.5;2,1.5]");
    assert!(q.presents(&fork(), 0.0));
    assert!(p.with_trivial_pair(0.5, 1).is_err());
}

#[test]
fn barcodes_and_wasserstein() {
    assert_eq!(
        elder_barcode(&three_leaves()).sorted(),
        vec![Interval::essential(0.0), Interval::new(1.0, 3.0), Interval::new(2.0, 5.0)]
    );
    let b = Barcode::new(vec![Interval::essential(0.0), Interval::new(1.0, 3.0)]);
    let c = Barcode::new(vec![Interval::essential(0.0)]);
    assert_eq!(wasserstein(&b, &c, Exponent::ONE).unwrap().0, 2.0);
    assert_eq!(wasserstein_brute_force(&b, &c, Exponent::ONE).unwrap(), 2.0);
    let r = 10.0;
    let bn = elder_barcode(&MergeTree::from_shape(&join(1.0, vec![leaf(0.0), leaf(0.0)])));
    let bq = elder_barcode(&MergeTree::strand(r));
    assert_eq!(wasserstein(&bn, &bq, Exponent::ONE).unwrap().0, r + 1.0);
    let single = Barcode::new(vec![Interval::new(0.0, 2.0)]);
    assert_eq!(wasserstein_brute_force(&single, &Barcode::default(), Exponent::TWO).unwrap(), 2f64.sqrt());
    // three bars against one strand: delete [1,3) and [2,5)
    let three = elder_barcode(&three_leaves());
    assert_eq!(wasserstein(&three, &c, Exponent::ONE).unwrap().0, 5.0);
    assert_eq!(wasserstein_brute_force(&three, &c, Exponent::ONE).unwrap(), 5.0);
}

#[test]
fn cophenetic_matrices_and_distance() {
    let n = triple_at_zero();
    let v = cophenetic_vector(&n, n.leaves()).unwrap();
    assert_eq!(v, vec![0.0, 1.0, 1.0, 0.0, 1.0, 0.0]);
    let m = MergeTree::strand(0.0);
    let labels = vec![m.leaves()[0]; 3];
    assert_eq!(cophenetic_vector(&m, &labels).unwrap(), vec![0.0; 6]);
    assert_eq!(cophenetic_distance(&m, &n, Exponent::ONE, None).unwrap().value, 3.0);
    assert!((cophenetic_distance(&m, &n, Exponent::TWO, None).unwrap().value - 3f64.sqrt()).abs() < 1e-12);
    assert_eq!(cophenetic_distance(&n, &n, Exponent::TWO, None).unwrap().value, 0.0);
}

#[test]
fn interleaving_examples() {
    let (m, n) = (fork(), MergeTree::strand(0.0));
    assert!(interleaving_exists(&m, &n, 0.5).unwrap().is_some());
    assert!(interleaving_exists(&m, &n, 0.49).unwrap().is_none());
    let r = 4.0;
    let d = interleaving_distance(&MergeTree::strand(0.0), &MergeTree::strand(r)).unwrap();
    assert_eq!(d.distance, r);
    let (pa, pb) = interleaving_to_presentations(&MergeTree::strand(0.0), &MergeTree::strand(r), &d.witness).unwrap();
    assert_eq!(label_distance(&pa, &pb, Exponent::INFINITY).unwrap(), r);
}

#[test]
fn worked_instability_pair_interleaves_at_one_half() {
    let (m, n) = (MergeTree::strand(0.0), triple_at_zero());
    let d = interleaving_distance(&m, &n).unwrap();
    assert_eq!(d.distance, 0.5);
    let (db, _) = wasserstein(&elder_barcode(&m), &elder_barcode(&n), Exponent::INFINITY).unwrap();
    assert_eq!(db, 0.5);
    // a witness at ε = 1 also exists and converts at that ε
    let w = interleaving_exists(&m, &n, 1.0).unwrap().unwrap();
    let (pm, pn) = interleaving_to_presentations(&m, &n, &w).unwrap();
    assert_eq!(label_distance(&pm, &pn, Exponent::INFINITY).unwrap(), 1.0);
}

#[test]
fn compatible_pairs_give_witnesses() {
    for eps in [0.0, 0.25, 0.75] {
        let pm = Presentation::from_parts(&[0.0, eps], &[(eps, 0, 1)]).unwrap();
        let pn = Presentation::from_parts(&[0.0, 0.0], &[(1.0, 0, 1)]).unwrap();
        let got = presentations_to_interleaving(&pm, &pn).unwrap();
        assert_eq!(got.witness.epsilon, eps.max(1.0 - eps));
        verify_witness(&got.source, &got.target, &got.witness).unwrap();
    }
    let (a, b) = (Presentation::minimal(&three_leaves()), Presentation::minimal(&fork()));
    let (pa, pb) = pad_concatenate(&a, &b, 5.0).unwrap();
    let got = presentations_to_interleaving(&pa, &pb).unwrap();
    assert_eq!(got.witness.epsilon, label_distance(&pa, &pb, Exponent::INFINITY).unwrap());
    assert!(interleaving_exists(&three_leaves(), &fork(), got.witness.epsilon).unwrap().is_some());
}

#[test]
fn semi_distance_examples() {
    let r = 10.0;
    let m = MergeTree::strand(0.0);
    let n = MergeTree::from_shape(&join(1.0, vec![leaf(0.0), leaf(0.0)]));
    let q = MergeTree::strand(r);
    for p in [Exponent::ONE, Exponent::TWO] {
        assert!(semi_distance_upper(&m, &n, p, DEFAULT_BUDGET).unwrap().value <= 1.0);
        assert_eq!(semi_distance_upper(&m, &q, p, DEFAULT_BUDGET).unwrap().value, r);
        assert_eq!(semi_distance_upper(&n, &n, p, DEFAULT_BUDGET).unwrap().value, 0.0);
    }
    let b = presentation_distance_bracket(&n, &q, Exponent::ONE, &[m], DEFAULT_BUDGET).unwrap();
    assert!(b.upper <= 11.0);
    assert_eq!(b.path_value(), b.upper);
    let same = presentation_distance_bracket(&n, &n, Exponent::TWO, &[], DEFAULT_BUDGET).unwrap();
    assert_eq!((same.lower, same.upper), (0.0, 0.0));
}

#[test]
fn sublevel_trees_and_lifts() {
    let x = CellComplex1::path(3).unwrap();
    let f = CellularFunction::constant(&x, 0.0);
    let g = CellularFunction::new(vec![0.0; 3], vec![1.0; 2]);
    assert!(sublevel_merge_tree(&x, &g).unwrap().is_isomorphic(&triple_at_zero()));
    let (pf, pg) = (incidence_presentation(&x, &f).unwrap(), incidence_presentation(&x, &g).unwrap());
    let lift = geometric_lift(&pf, &pg).unwrap();
    assert_eq!(lift.complex, x);
    for p in [Exponent::ONE, Exponent::TWO, Exponent::INFINITY] {
        assert_eq!(lp_function_distance(&lift.f, &lift.g, p).unwrap(), label_distance(&pf, &pg, p).unwrap());
    }
    // the fork as a path complex: one relation column with two ones
    let y = CellComplex1::path(2).unwrap();
    let h = CellularFunction::new(vec![0.0, 1.0], vec![2.0]);
    let ph = incidence_presentation(&y, &h).unwrap();
    assert_eq!(ph.matrix().column_ones(0), 2);
    assert!(ph.coequalize_tree().unwrap().is_isomorphic(&fork()));
}
