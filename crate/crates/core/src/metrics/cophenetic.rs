//! Cophenetic vectors and the p-cophenetic distance.
//!
//! A labelling assigns labels `1..k` to leaves of both trees, hitting every
//! leaf of each. The cophenetic vector lists the lca height of every pair
//! of labels `i <= j`, the diagonal holding the leaf's own height.

use serde::{Deserialize, Serialize};

use super::MetricError;
use crate::norm::{lp_norm, Exponent};
use crate::tree::{MergeTree, NodeIdx};

pub const COPHENETIC_PAIR_LIMIT: usize = 30;

/// Upper-triangular cophenetic matrix, row-major over `i <= j`.
/// `labeling[i]` is the node index of the leaf carrying label `i`.
pub fn cophenetic_vector(tree: &MergeTree, labeling: &[NodeIdx]) -> Result<Vec<f64>, MetricError> {
    let mut hit = vec![false; tree.len()];
    for &v in labeling {
        if v >= tree.len() || !tree.node(v).is_leaf() {
            return Err(MetricError::NotALeaf(v));
        }
        hit[v] = true;
    }
    if tree.leaves().iter().any(|&l| !hit[l]) {
        return Err(MetricError::NotSurjective);
    }
    let k = labeling.len();
    let mut out = Vec::with_capacity(k * (k + 1) / 2);
    for i in 0..k {
        for j in i..k {
            out.push(tree.height(tree.lca_index(labeling[i], labeling[j])));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CopheneticResult {
    pub value: f64,
    /// Leaf ids carrying each label, in `M` and in `N`.
    pub labels_m: Vec<String>,
    pub labels_n: Vec<String>,
}

fn lca_table(t: &MergeTree) -> Vec<Vec<f64>> {
    let leaves = t.leaves();
    leaves.iter().map(|&a| leaves.iter().map(|&b| t.height(t.lca_index(a, b))).collect()).collect()
}

/// Exact minimum over labellings with between `max(n_M, n_N)` and `k_max`
/// labels.
///
/// Dropping a label removes nonnegative terms, so an optimal labelling can
/// be taken to be a minimal covering set of distinct (leaf of M, leaf of N)
/// pairs. Such a set has at most `n_M + n_N − 1` elements, and the search
/// enumerates exactly those sets by branch and bound.
pub fn cophenetic_distance(
    m: &MergeTree,
    n: &MergeTree,
    p: Exponent,
    k_max: Option<usize>,
) -> Result<CopheneticResult, MetricError> {
    let (nm, nn) = (m.leaf_count(), n.leaf_count());
    let k_min = nm.max(nn);
    let k_max = k_max.unwrap_or(nm + nn);
    if k_max < k_min {
        return Err(MetricError::LabelBudget { k_max, required: k_min });
    }
    if nm * nn > COPHENETIC_PAIR_LIMIT {
        return Err(MetricError::ScaleGuard {
            what: "leaf pairs in cophenetic search",
            size: nm * nn,
            limit: COPHENETIC_PAIR_LIMIT,
        });
    }
    let k_top = k_max.min(nm + nn - 1);
    let (hm, hn) = (lca_table(m), lca_table(n));
    let pairs: Vec<(usize, usize)> = (0..nm).flat_map(|a| (0..nn).map(move |b| (a, b))).collect();
    let term = |x: f64| if p.is_infinite() { x.abs() } else { x.abs().powf(p.value()) };
    let add = |acc: f64, t: f64| if p.is_infinite() { acc.max(t) } else { acc + t };

    struct Search<'a> {
        pairs: &'a [(usize, usize)],
        hm: &'a [Vec<f64>],
        hn: &'a [Vec<f64>],
        k_min: usize,
        k_top: usize,
        chosen: Vec<usize>,
        cover_m: Vec<usize>,
        cover_n: Vec<usize>,
        best: f64,
        best_set: Vec<usize>,
    }

    fn dfs(s: &mut Search, start: usize, acc: f64, term: &dyn Fn(f64) -> f64, add: &dyn Fn(f64, f64) -> f64) {
        if acc >= s.best {
            return;
        }
        let missing_m = s.cover_m.iter().filter(|&&c| c == 0).count();
        let missing_n = s.cover_n.iter().filter(|&&c| c == 0).count();
        if missing_m == 0 && missing_n == 0 && s.chosen.len() >= s.k_min {
            s.best = acc;
            s.best_set = s.chosen.clone();
            return;
        }
        let room = s.k_top - s.chosen.len();
        if room < missing_m.max(missing_n) {
            return;
        }
        for idx in start..s.pairs.len() {
            let (a, b) = s.pairs[idx];
            let mut next = add(acc, term(s.hm[a][a] - s.hn[b][b]));
            for &c in &s.chosen {
                let (a2, b2) = s.pairs[c];
                next = add(next, term(s.hm[a][a2] - s.hn[b][b2]));
            }
            if next >= s.best {
                continue;
            }
            s.chosen.push(idx);
            s.cover_m[a] += 1;
            s.cover_n[b] += 1;
            dfs(s, idx + 1, next, term, add);
            s.cover_m[a] -= 1;
            s.cover_n[b] -= 1;
            s.chosen.pop();
        }
    }

    let mut s = Search {
        pairs: &pairs,
        hm: &hm,
        hn: &hn,
        k_min,
        k_top,
        chosen: Vec::new(),
        cover_m: vec![0; nm],
        cover_n: vec![0; nn],
        best: f64::INFINITY,
        best_set: Vec::new(),
    };
    dfs(&mut s, 0, 0.0, &term, &add);
    let mut set: Vec<(usize, usize)> = s.best_set.iter().map(|&i| pairs[i]).collect();
    set.sort_unstable();
    let leaf_m = |a: usize| m.node(m.leaves()[a]).id.clone();
    let leaf_n = |b: usize| n.node(n.leaves()[b]).id.clone();
    let vm: Vec<NodeIdx> = set.iter().map(|&(a, _)| m.leaves()[a]).collect();
    let vn: Vec<NodeIdx> = set.iter().map(|&(_, b)| n.leaves()[b]).collect();
    let cm = cophenetic_vector(m, &vm)?;
    let cn = cophenetic_vector(n, &vn)?;
    let value = lp_norm(cm.iter().zip(&cn).map(|(x, y)| x - y), p);
    Ok(CopheneticResult {
        value,
        labels_m: set.iter().map(|&(a, _)| leaf_m(a)).collect(),
        labels_n: set.iter().map(|&(_, b)| leaf_n(b)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{join, leaf, Shape};
    use proptest::prelude::*;

    fn example_pair() -> (MergeTree, MergeTree) {
        let m = MergeTree::strand(0.0);
        let n = MergeTree::from_shape(&join(1.0, vec![leaf(0.0), leaf(0.0), leaf(0.0)]));
        (m, n)
    }

    #[test]
    fn vectors_of_the_instability_example() {
        let (m, n) = example_pair();
        let cn = cophenetic_vector(&n, n.leaves()).unwrap();
        assert_eq!(cn, vec![0.0, 1.0, 1.0, 0.0, 1.0, 0.0]);
        let cm = cophenetic_vector(&m, &[0, 0, 0]).unwrap();
        assert_eq!(cm, vec![0.0; 6]);
        assert!(matches!(cophenetic_vector(&n, &n.leaves()[..2]), Err(MetricError::NotSurjective)));
    }

    #[test]
    fn distance_of_the_instability_example() {
        let (m, n) = example_pair();
        assert_eq!(cophenetic_distance(&m, &n, Exponent::ONE, None).unwrap().value, 3.0);
        let d2 = cophenetic_distance(&m, &n, Exponent::TWO, None).unwrap().value;
        assert!((d2 - 3f64.sqrt()).abs() < 1e-12);
        assert_eq!(cophenetic_distance(&m, &n, Exponent::INFINITY, None).unwrap().value, 1.0);
        assert!(matches!(cophenetic_distance(&m, &n, Exponent::ONE, Some(2)), Err(MetricError::LabelBudget { .. })));
    }

    #[test]
    fn zero_on_equal_trees() {
        let t = MergeTree::from_shape(&join(5.0, vec![join(3.0, vec![leaf(0.0), leaf(1.0)]), leaf(2.0)]));
        assert_eq!(cophenetic_distance(&t, &t, Exponent::TWO, None).unwrap().value, 0.0);
    }

    /// Every multiset of pairs of each size up to `k_max`, with no pruning.
    fn naive(m: &MergeTree, n: &MergeTree, p: Exponent, k_max: usize) -> f64 {
        let pairs: Vec<(NodeIdx, NodeIdx)> =
            m.leaves().iter().flat_map(|&a| n.leaves().iter().map(move |&b| (a, b))).collect();
        let mut best = f64::INFINITY;
        fn rec(
            start: usize,
            cur: &mut Vec<(NodeIdx, NodeIdx)>,
            pairs: &[(NodeIdx, NodeIdx)],
            k_max: usize,
            m: &MergeTree,
            n: &MergeTree,
            p: Exponent,
            best: &mut f64,
        ) {
            let vm: Vec<_> = cur.iter().map(|x| x.0).collect();
            let vn: Vec<_> = cur.iter().map(|x| x.1).collect();
            if let (Ok(a), Ok(b)) = (cophenetic_vector(m, &vm), cophenetic_vector(n, &vn)) {
                *best = best.min(lp_norm(a.iter().zip(&b).map(|(x, y)| x - y), p));
            }
            if cur.len() == k_max {
                return;
            }
            for i in start..pairs.len() {
                cur.push(pairs[i]);
                rec(i, cur, pairs, k_max, m, n, p, best);
                cur.pop();
            }
        }
        rec(0, &mut Vec::new(), &pairs, k_max, m, n, p, &mut best);
        best
    }

    fn small_tree() -> impl Strategy<Value = MergeTree> {
        let leafs = (0u8..4).prop_map(|h| leaf(h as f64 * 0.5));
        leafs
            .prop_recursive(2, 4, 3, |inner| {
                prop::collection::vec(inner, 2..=3).prop_map(|cs| {
                    let top = cs.iter().map(shape_height).fold(0.0, f64::max);
                    join(top + 1.0, cs)
                })
            })
            .prop_map(|s| MergeTree::from_shape(&s))
    }

    fn shape_height(s: &Shape) -> f64 {
        match s {
            Shape::Leaf(h) | Shape::Node(h, _) => *h,
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn branch_and_bound_matches_naive(m in small_tree(), n in small_tree()) {
            prop_assume!(m.leaf_count() + n.leaf_count() <= 5);
            for p in [Exponent::ONE, Exponent::TWO, Exponent::INFINITY] {
                let fast = cophenetic_distance(&m, &n, p, None).unwrap().value;
                let slow = naive(&m, &n, p, m.leaf_count() + n.leaf_count());
                prop_assert!((fast - slow).abs() <= 1e-9, "fast {} slow {}", fast, slow);
            }
        }

        #[test]
        fn symmetric(m in small_tree(), n in small_tree()) {
            let a = cophenetic_distance(&m, &n, Exponent::TWO, None).unwrap().value;
            let b = cophenetic_distance(&n, &m, Exponent::TWO, None).unwrap().value;
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }
}
