//! Upper bounds for the p-presentation semi-distance.
//!
//! The semi-distance is an infimum over all compatible presentation pairs,
//! so the search here only ever produces an upper bound together with the
//! pair realizing it. Strategies:
//!
//! * `pad-concatenate`: minimal presentations with generators sorted by
//!   birth, made compatible by the block construction at the lowest legal
//!   height.
//! * `interleaving`: the block presentations built from an optimal
//!   interleaving (exact for `p = ∞`).
//! * `shared-tree`: generators are points of the two trees matched one to
//!   one (leaves, plus extra points on the tree with fewer leaves), and a
//!   single spanning tree of relations serves both sides. The relation
//!   labels are lca heights, so the spanning tree must be a minimum
//!   spanning tree for both ultrametrics; it is found by Kruskal on the
//!   summed weights and accepted when both totals are minimal.
//! * `local-search`: coordinate moves on the best pair found, bringing one
//!   label onto the other while both presentations stay valid.
//!
//! Every candidate is re-validated by coequalizing both presentations.

use serde::{Deserialize, Serialize};

use super::interleaving::{interleaving_distance, interleaving_to_presentations};
use super::MetricError;
use crate::norm::Exponent;
use crate::presentation::{are_compatible, label_distance, pad_concatenate, Presentation, Relation};
use crate::tree::{MergeTree, NodeIdx};
use crate::TOLERANCE;

pub const DEFAULT_BUDGET: usize = 5000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemiDistanceResult {
    pub value: f64,
    pub strategy: String,
    pub pm: Presentation,
    pub pn: Presentation,
}

impl SemiDistanceResult {
    fn mirrored(self) -> Self {
        SemiDistanceResult { pm: self.pn, pn: self.pm, ..self }
    }
}

struct Best<'a> {
    a: &'a MergeTree,
    b: &'a MergeTree,
    p: Exponent,
    best: Option<SemiDistanceResult>,
    evaluations: usize,
}

impl Best<'_> {
    fn consider(&mut self, pm: Presentation, pn: Presentation, strategy: &str) -> bool {
        self.evaluations += 1;
        if !are_compatible(&pm, &pn) || !pm.presents(self.a, TOLERANCE) || !pn.presents(self.b, TOLERANCE) {
            return false;
        }
        let value = label_distance(&pm, &pn, self.p).expect("compatible");
        if self.best.as_ref().is_none_or(|b| value < b.value) {
            self.best = Some(SemiDistanceResult { value, strategy: strategy.to_string(), pm, pn });
            return true;
        }
        false
    }
}

/// Best-found upper bound on the p-presentation semi-distance, with the
/// compatible pair realizing it. Symmetric: swapping the arguments mirrors
/// the certificate.
pub fn semi_distance_upper(
    m: &MergeTree,
    n: &MergeTree,
    p: Exponent,
    budget: usize,
) -> Result<SemiDistanceResult, MetricError> {
    if m.canonical_code() <= n.canonical_code() {
        search(m, n, p, budget)
    } else {
        Ok(search(n, m, p, budget)?.mirrored())
    }
}

fn search(a: &MergeTree, b: &MergeTree, p: Exponent, budget: usize) -> Result<SemiDistanceResult, MetricError> {
    let mut best = Best { a, b, p, best: None, evaluations: 0 };

    let (pa, pb) = (sorted_minimal(a), sorted_minimal(b));
    let t = pa.settled_height()?.max(pb.settled_height()?);
    let (x, y) = pad_concatenate(&pa, &pb, t)?;
    best.consider(x, y, "pad-concatenate");

    match interleaving_distance(a, b) {
        Ok(res) => {
            let (x, y) = interleaving_to_presentations(a, b, &res.witness)?;
            best.consider(x, y, "interleaving");
        }
        Err(MetricError::ScaleGuard { .. }) => {}
        Err(e) => return Err(e),
    }

    shared_tree(&mut best, budget);
    local_search(&mut best, budget);

    Ok(best.best.expect("pad-concatenate always yields a compatible pair"))
}

fn sorted_minimal(t: &MergeTree) -> Presentation {
    let p = Presentation::minimal(t);
    let mut order: Vec<usize> = (0..p.generator_count()).collect();
    order.sort_by(|&i, &j| p.generators()[i].total_cmp(&p.generators()[j]).then(i.cmp(&j)));
    p.permute_generators(&order).expect("a permutation")
}

/// A point of a merge tree: height `height` on the edge above `node`.
#[derive(Clone, Copy, Debug)]
struct Point {
    node: NodeIdx,
    height: f64,
}

fn point_above(t: &MergeTree, leaf: NodeIdx, height: f64) -> Point {
    let h = height.max(t.height(leaf));
    Point { node: t.ancestor_at(leaf, h), height: h }
}

fn point_meet(t: &MergeTree, x: Point, y: Point) -> f64 {
    x.height.max(y.height).max(t.height(t.lca_index(x.node, y.node)))
}

fn power(x: f64, p: Exponent) -> f64 {
    if p.is_infinite() {
        x
    } else {
        x.powf(p.value())
    }
}

/// Kruskal on the complete graph over `k` vertices; edges are sorted by
/// `key` and ties by index.
fn kruskal(k: usize, key: &dyn Fn(usize, usize) -> (f64, f64)) -> Vec<(usize, usize)> {
    let mut edges: Vec<(usize, usize)> = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
    edges.sort_by(|&(a, b), &(c, d)| {
        let (x, y) = (key(a, b), key(c, d));
        x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)).then((a, b).cmp(&(c, d)))
    });
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut out = Vec::with_capacity(k.saturating_sub(1));
    for (i, j) in edges {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri] = rj;
            out.push((i, j));
        }
    }
    out
}

struct SharedTree<'a> {
    small: &'a MergeTree,
    large: &'a MergeTree,
    large_pts: Vec<Point>,
    swap: bool,
    start: usize,
    budget: usize,
}

impl SharedTree<'_> {
    /// `assign[j]` gives, for leaf `j` of the larger tree, a leaf of the
    /// smaller one and whether the match is that leaf itself (each small
    /// leaf is designated exactly once) or a point above it.
    fn rec(&self, best: &mut Best, assign: &mut Vec<(usize, bool)>, designated: &mut [bool]) {
        let (s, l) = (self.small.leaf_count(), self.large.leaf_count());
        if best.evaluations - self.start >= self.budget {
            return;
        }
        let j = assign.len();
        if designated.iter().filter(|d| !**d).count() > l - j {
            return;
        }
        if j == l {
            self.evaluate(best, assign);
            return;
        }
        for i in 0..s {
            for d in [true, false] {
                if d && designated[i] {
                    continue;
                }
                designated[i] |= d;
                assign.push((i, d));
                self.rec(best, assign, designated);
                assign.pop();
                if d {
                    designated[i] = false;
                }
            }
        }
    }

    fn evaluate(&self, best: &mut Best, assign: &[(usize, bool)]) {
        let (small, large, p) = (self.small, self.large, best.p);
        let small_pts: Vec<Point> = assign
            .iter()
            .enumerate()
            .map(|(j, &(i, d))| {
                let leaf = small.leaves()[i];
                if d {
                    Point { node: leaf, height: small.height(leaf) }
                } else {
                    point_above(small, leaf, self.large_pts[j].height)
                }
            })
            .collect();
        let k = small_pts.len();
        let ws = |i: usize, j: usize| point_meet(small, small_pts[i], small_pts[j]);
        let wl = |i: usize, j: usize| point_meet(large, self.large_pts[i], self.large_pts[j]);
        let tree = kruskal(k, &|i, j| (ws(i, j) + wl(i, j), power((ws(i, j) - wl(i, j)).abs(), p)));
        let total = |w: &dyn Fn(usize, usize) -> f64, t: &[(usize, usize)]| t.iter().map(|&(i, j)| w(i, j)).sum::<f64>();
        let ms = total(&ws, &kruskal(k, &|i, j| (ws(i, j), 0.0)));
        let ml = total(&wl, &kruskal(k, &|i, j| (wl(i, j), 0.0)));
        let (ts, tl) = (total(&ws, &tree), total(&wl, &tree));
        let slack = TOLERANCE * (1.0 + ms.abs() + ml.abs());
        if ts > ms + slack || tl > ml + slack {
            best.evaluations += 1;
            return;
        }
        let make = |pts: &[Point], w: &dyn Fn(usize, usize) -> f64| {
            Presentation::new(
                pts.iter().map(|x| x.height).collect(),
                tree.iter().map(|&(i, j)| Relation { birth: w(i, j), f: i, g: j }).collect(),
            )
        };
        if let (Ok(ps), Ok(pl)) = (make(&small_pts, &ws), make(&self.large_pts, &wl)) {
            let (pa, pb) = if self.swap { (pl, ps) } else { (ps, pl) };
            best.consider(pa, pb, "shared-tree");
        }
    }
}

fn shared_tree(best: &mut Best, budget: usize) {
    let (a, b) = (best.a, best.b);
    let swap = a.leaf_count() > b.leaf_count();
    let (small, large) = if swap { (b, a) } else { (a, b) };
    let large_pts = large.leaves().iter().map(|&v| Point { node: v, height: large.height(v) }).collect();
    let st = SharedTree { small, large, large_pts, swap, start: best.evaluations, budget };
    let mut designated = vec![false; small.leaf_count()];
    st.rec(best, &mut Vec::new(), &mut designated);
}

fn local_search(best: &mut Best, budget: usize) {
    let start = best.evaluations;
    let Some(cur) = best.best.clone() else { return };
    let (mut pm, mut pn) = (cur.pm, cur.pn);
    let strategy = format!("{}+local-search", cur.strategy);
    let k = pm.generator_count();
    loop {
        let mut improved = false;
        let (lm, ln) = (pm.label_vector().to_vec(), pn.label_vector().to_vec());
        for c in 0..lm.len() {
            let (x, y) = (lm[c], ln[c]);
            if x == y {
                continue;
            }
            let mid = 0.5 * (x + y);
            for (zm, zn) in [(y, y), (x, x), (mid, mid), (mid, y), (x, mid)] {
                if best.evaluations - start >= budget {
                    return;
                }
                let relabel = |p: &Presentation, labels: &[f64], z: f64| {
                    let mut v = labels.to_vec();
                    v[c] = z;
                    p.with_labels(&v[..k], &v[k..])
                };
                let (Ok(qm), Ok(qn)) = (relabel(&pm, &lm, zm), relabel(&pn, &ln, zn)) else {
                    continue;
                };
                if best.consider(qm.clone(), qn.clone(), &strategy) {
                    pm = qm;
                    pn = qn;
                    improved = true;
                    break;
                }
            }
            if improved {
                break;
            }
        }
        if !improved {
            return;
        }
    }
}
