//! Union-find sweep shared by coequalizers and sublevel filtrations.
//!
//! Elements are born at given heights and joined pairwise at given heights.
//! Processing heights in increasing order, with all births at a height
//! before all joins at that height, yields the persistent set of
//! components as a merge forest.

use std::collections::HashMap;

use crate::tree::{MergeForest, MergeTree, NodeIdx, Sub};

pub(crate) struct SweepOutput {
    pub forest: MergeForest,
    /// For each element, `(tree, node)` of the forest node that represents
    /// it at its birth height.
    pub element_nodes: Vec<(usize, NodeIdx)>,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
}

struct ArenaNode {
    id: String,
    height: f64,
    children: Vec<usize>,
}

/// Births must be finite; each join height must be at least the births of
/// both endpoints.
pub(crate) fn sweep(births: &[f64], joins: &[(f64, usize, usize)], leaf_prefix: &str) -> SweepOutput {
    let n = births.len();
    let mut order: Vec<(f64, u8, usize)> = births
        .iter()
        .enumerate()
        .map(|(i, &b)| (b, 0u8, i))
        .chain(joins.iter().enumerate().map(|(j, &(h, _, _))| (h, 1u8, j)))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut uf = UnionFind { parent: (0..n).collect() };
    let mut tops: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut arena: Vec<ArenaNode> = Vec::new();
    let mut element_arena = vec![usize::MAX; n];
    let mut merges = 0usize;

    let mut k = 0;
    while k < order.len() {
        let h = order[k].0;
        let mut touched: Vec<usize> = Vec::new();
        let mut born: Vec<usize> = Vec::new();
        while k < order.len() && order[k].0 == h {
            let (_, kind, idx) = order[k];
            if kind == 0 {
                born.push(idx);
                touched.push(idx);
            } else {
                let (_, a, b) = joins[idx];
                let (ra, rb) = (uf.find(a), uf.find(b));
                if ra != rb {
                    let (keep, drop) = if ra < rb { (ra, rb) } else { (rb, ra) };
                    uf.parent[drop] = keep;
                    let moved = std::mem::take(&mut tops[drop]);
                    tops[keep].extend(moved);
                    touched.push(keep);
                }
            }
            k += 1;
        }
        let mut roots: Vec<usize> = touched.into_iter().map(|x| uf.find(x)).collect();
        roots.sort_unstable();
        roots.dedup();
        // smallest element born in each root's set this batch, for leaf ids
        let mut first_born: HashMap<usize, usize> = HashMap::new();
        for &b in &born {
            let r = uf.find(b);
            first_born.entry(r).and_modify(|e| *e = (*e).min(b)).or_insert(b);
        }
        for r in roots {
            let node = match tops[r].len() {
                0 => {
                    arena.push(ArenaNode {
                        id: format!("{leaf_prefix}{}", first_born[&r]),
                        height: h,
                        children: vec![],
                    });
                    arena.len() - 1
                }
                1 => tops[r][0],
                _ => {
                    let mut children = std::mem::take(&mut tops[r]);
                    children.sort_unstable();
                    arena.push(ArenaNode { id: format!("m{merges}"), height: h, children });
                    merges += 1;
                    arena.len() - 1
                }
            };
            tops[r] = vec![node];
        }
        for b in born {
            let r = uf.find(b);
            element_arena[b] = tops[r][0];
        }
    }

    let mut roots: Vec<(usize, usize)> = Vec::new();
    for x in 0..n {
        let r = uf.find(x);
        if r == x {
            roots.push((x, tops[r][0]));
        }
    }
    fn to_sub(arena: &[ArenaNode], v: usize) -> Sub {
        let a = &arena[v];
        if a.children.is_empty() {
            Sub::Leaf { id: a.id.clone(), height: a.height }
        } else {
            Sub::Node {
                id: a.id.clone(),
                height: a.height,
                children: a.children.iter().map(|&c| to_sub(arena, c)).collect(),
            }
        }
    }
    let trees: Vec<MergeTree> =
        roots.iter().map(|&(_, top)| MergeTree::from_sub(to_sub(&arena, top))).collect();
    let element_nodes = (0..n)
        .map(|x| {
            let r = uf.find(x);
            let t = roots.iter().position(|&(root, _)| root == r).unwrap();
            let id = &arena[element_arena[x]].id;
            (t, trees[t].index_of(id).expect("node id present"))
        })
        .collect();
    SweepOutput { forest: MergeForest { trees }, element_nodes }
}
