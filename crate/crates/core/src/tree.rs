//! Merge trees and forests.
//!
//! A [`MergeTree`] is stored as a rooted tree of leaves (births) and merge
//! nodes with real heights. On construction the tree is normalized to the
//! minimal set of critical nodes: chains of single-child nodes are spliced
//! out, merges at equal heights are fused into one multi-way merge, and
//! zero-length leaves (born at the height they merge) are dropped. After
//! normalization every internal node has at least two children and heights
//! strictly increase towards the root. The root carries an implicit
//! unbounded ray.
//!
//! The same object can be viewed as a constructible persistent set through
//! [`PersistentSetRep`].

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type NodeIdx = usize;

/// JSON form of a single node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeDoc {
    pub id: String,
    pub height: f64,
    #[serde(default)]
    pub children: Vec<String>,
}

/// JSON form of a merge tree: `{"nodes":[...],"root":"..."}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeDoc {
    pub nodes: Vec<NodeDoc>,
    pub root: String,
}

/// A broken structural invariant found by [`validate`].
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    NonFiniteHeight { id: String },
    DuplicateId { id: String },
    UnknownRoot { root: String },
    UnknownChild { parent: String, child: String },
    MultipleParents { id: String },
    RootHasParent { root: String },
    HeightOrder { parent: String, child: String, parent_height: f64, child_height: f64 },
    Unreachable { id: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonFiniteHeight { id } => write!(f, "node `{id}`: height is not finite"),
            Violation::DuplicateId { id } => write!(f, "node id `{id}` appears more than once"),
            Violation::UnknownRoot { root } => write!(f, "root `{root}` is not a node"),
            Violation::UnknownChild { parent, child } => {
                write!(f, "node `{parent}` lists unknown child `{child}`")
            }
            Violation::MultipleParents { id } => write!(f, "node `{id}` has more than one parent"),
            Violation::RootHasParent { root } => write!(f, "root `{root}` is listed as a child"),
            Violation::HeightOrder { parent, child, parent_height, child_height } => write!(
                f,
                "height order: parent `{parent}` at {parent_height} lies below child `{child}` at {child_height}"
            ),
            Violation::Unreachable { id } => {
                write!(f, "node `{id}` is not reachable from the root (disconnected or cyclic)")
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TreeError {
    #[error("invalid merge tree: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("unknown node id `{0}`")]
    UnknownNode(String),
    #[error("evolution map needs s <= t, got s = {s}, t = {t}")]
    ReversedInterval { s: f64, t: f64 },
    #[error("invalid persistent set: {0}")]
    InvalidPersistentSet(String),
    #[error("expected a single merge tree, found {0} components")]
    NotATree(usize),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

/// Check every structural invariant of a tree document. An empty list means
/// the document describes a valid merge tree.
pub fn validate(doc: &TreeDoc) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, n) in doc.nodes.iter().enumerate() {
        if !n.height.is_finite() {
            out.push(Violation::NonFiniteHeight { id: n.id.clone() });
        }
        if index.insert(n.id.as_str(), i).is_some() {
            out.push(Violation::DuplicateId { id: n.id.clone() });
        }
    }
    let root = index.get(doc.root.as_str()).copied();
    if root.is_none() {
        out.push(Violation::UnknownRoot { root: doc.root.clone() });
    }
    let mut parents = vec![0usize; doc.nodes.len()];
    for n in &doc.nodes {
        for c in &n.children {
            match index.get(c.as_str()) {
                None => out.push(Violation::UnknownChild { parent: n.id.clone(), child: c.clone() }),
                Some(&ci) => {
                    parents[ci] += 1;
                    if parents[ci] == 2 {
                        out.push(Violation::MultipleParents { id: c.clone() });
                    }
                    let child = &doc.nodes[ci];
                    if n.height < child.height {
                        out.push(Violation::HeightOrder {
                            parent: n.id.clone(),
                            child: c.clone(),
                            parent_height: n.height,
                            child_height: child.height,
                        });
                    }
                }
            }
        }
    }
    if let Some(r) = root {
        if parents[r] > 0 {
            out.push(Violation::RootHasParent { root: doc.root.clone() });
        }
        let mut seen = vec![false; doc.nodes.len()];
        let mut stack = vec![r];
        seen[r] = true;
        while let Some(v) = stack.pop() {
            for c in &doc.nodes[v].children {
                if let Some(&ci) = index.get(c.as_str()) {
                    if !seen[ci] {
                        seen[ci] = true;
                        stack.push(ci);
                    }
                }
            }
        }
        for (i, n) in doc.nodes.iter().enumerate() {
            if !seen[i] {
                out.push(Violation::Unreachable { id: n.id.clone() });
            }
        }
    }
    out
}

/// Nested description of a tree, convenient for building small examples.
#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    Leaf(f64),
    Node(f64, Vec<Shape>),
}

pub fn leaf(height: f64) -> Shape {
    Shape::Leaf(height)
}

pub fn join(height: f64, children: Vec<Shape>) -> Shape {
    Shape::Node(height, children)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MergeNode {
    pub id: String,
    pub height: f64,
    pub children: Vec<NodeIdx>,
    pub parent: Option<NodeIdx>,
}

impl MergeNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// A normalized merge tree. Nodes are stored in pre-order from the root, so
/// `leaves()` lists leaves in depth-first order.
#[derive(Clone, Debug)]
pub struct MergeTree {
    nodes: Vec<MergeNode>,
    index: HashMap<String, NodeIdx>,
    depth: Vec<usize>,
    first_leaf: Vec<NodeIdx>,
    leaves: Vec<NodeIdx>,
}

/// Intermediate normalized subtree.
#[derive(Clone, Debug)]
pub(crate) enum Sub {
    Leaf { id: String, height: f64 },
    Node { id: String, height: f64, children: Vec<Sub> },
}

impl MergeTree {
    /// Validate and normalize a tree document.
    pub fn from_doc(doc: &TreeDoc) -> Result<Self, TreeError> {
        let violations = validate(doc);
        if !violations.is_empty() {
            return Err(TreeError::Invalid(violations));
        }
        let index: HashMap<&str, usize> =
            doc.nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();
        let root = index[doc.root.as_str()];
        Ok(Self::from_sub(normalize_doc(doc, &index, root)))
    }

    pub fn from_shape(shape: &Shape) -> Self {
        fn build(s: &Shape, counter: &mut usize, nodes: &mut Vec<NodeDoc>) -> String {
            let id = format!("v{counter}");
            *counter += 1;
            let slot = nodes.len();
            match s {
                Shape::Leaf(h) => nodes.push(NodeDoc { id: id.clone(), height: *h, children: vec![] }),
                Shape::Node(h, cs) => {
                    nodes.push(NodeDoc { id: id.clone(), height: *h, children: vec![] });
                    let children = cs.iter().map(|c| build(c, counter, nodes)).collect();
                    nodes[slot].children = children;
                }
            }
            id
        }
        let mut nodes = Vec::new();
        let root = build(shape, &mut 0, &mut nodes);
        Self::from_doc(&TreeDoc { nodes, root }).expect("shape heights must be finite and ordered")
    }

    /// The strand born at `s`: a single leaf with its root ray.
    pub fn strand(s: f64) -> Self {
        Self::from_sub(Sub::Leaf { id: "v0".into(), height: s })
    }

    pub(crate) fn from_sub(sub: Sub) -> Self {
        fn flatten(s: Sub, parent: Option<NodeIdx>, nodes: &mut Vec<MergeNode>) -> NodeIdx {
            let idx = nodes.len();
            match s {
                Sub::Leaf { id, height } => {
                    nodes.push(MergeNode { id, height, children: vec![], parent });
                }
                Sub::Node { id, height, children } => {
                    nodes.push(MergeNode { id, height, children: vec![], parent });
                    let kids: Vec<NodeIdx> =
                        children.into_iter().map(|c| flatten(c, Some(idx), nodes)).collect();
                    nodes[idx].children = kids;
                }
            }
            idx
        }
        let mut nodes = Vec::new();
        flatten(sub, None, &mut nodes);
        let n = nodes.len();
        let mut depth = vec![0; n];
        for i in 0..n {
            if let Some(p) = nodes[i].parent {
                depth[i] = depth[p] + 1;
            }
        }
        let mut first_leaf = vec![0; n];
        for i in (0..n).rev() {
            first_leaf[i] = match nodes[i].children.first() {
                None => i,
                Some(&c) => first_leaf[c],
            };
        }
        let leaves = (0..n).filter(|&i| nodes[i].is_leaf()).collect();
        let index = nodes.iter().enumerate().map(|(i, v)| (v.id.clone(), i)).collect();
        MergeTree { nodes, index, depth, first_leaf, leaves }
    }

    pub fn to_doc(&self) -> TreeDoc {
        TreeDoc {
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeDoc {
                    id: n.id.clone(),
                    height: n.height,
                    children: n.children.iter().map(|&c| self.nodes[c].id.clone()).collect(),
                })
                .collect(),
            root: self.nodes[0].id.clone(),
        }
    }

    pub fn root(&self) -> NodeIdx {
        0
    }

    pub fn root_height(&self) -> f64 {
        self.nodes[0].height
    }

    pub fn nodes(&self) -> &[MergeNode] {
        &self.nodes
    }

    pub fn node(&self, v: NodeIdx) -> &MergeNode {
        &self.nodes[v]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn height(&self, v: NodeIdx) -> f64 {
        self.nodes[v].height
    }

    pub fn parent(&self, v: NodeIdx) -> Option<NodeIdx> {
        self.nodes[v].parent
    }

    pub fn index_of(&self, id: &str) -> Option<NodeIdx> {
        self.index.get(id).copied()
    }

    /// Leaves in depth-first order.
    pub fn leaves(&self) -> &[NodeIdx] {
        &self.leaves
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    /// The first leaf (in depth-first order) of the subtree below `v`.
    pub fn first_leaf_below(&self, v: NodeIdx) -> NodeIdx {
        self.first_leaf[v]
    }

    /// Heights at which the underlying persistent set changes.
    pub fn critical_times(&self) -> Vec<f64> {
        let mut t: Vec<f64> = self.nodes.iter().map(|n| n.height).collect();
        t.sort_by(f64::total_cmp);
        t.dedup();
        t
    }

    pub fn min_height(&self) -> f64 {
        self.leaves.iter().map(|&l| self.nodes[l].height).fold(f64::INFINITY, f64::min)
    }

    /// True if `v` represents an element of `M(t)`, i.e. its edge to the
    /// parent (or the root ray) passes through height `t`.
    pub fn is_alive_at(&self, v: NodeIdx, t: f64) -> bool {
        self.nodes[v].height <= t && self.nodes[v].parent.is_none_or(|p| self.nodes[p].height > t)
    }

    /// Image of `v` under `M(height(v) <= t)`: the ancestor of `v` alive at
    /// `t`. Requires `height(v) <= t`.
    pub fn ancestor_at(&self, mut v: NodeIdx, t: f64) -> NodeIdx {
        debug_assert!(self.nodes[v].height <= t);
        while let Some(p) = self.nodes[v].parent {
            if self.nodes[p].height <= t {
                v = p;
            } else {
                break;
            }
        }
        v
    }

    /// The elements of `M(t)` in node order.
    pub fn alive_at(&self, t: f64) -> Vec<NodeIdx> {
        (0..self.nodes.len()).filter(|&v| self.is_alive_at(v, t)).collect()
    }

    /// `|M(t)|`.
    pub fn component_count_at(&self, t: f64) -> usize {
        (0..self.nodes.len()).filter(|&v| self.is_alive_at(v, t)).count()
    }

    pub fn lca_index(&self, mut u: NodeIdx, mut v: NodeIdx) -> NodeIdx {
        while self.depth[u] > self.depth[v] {
            u = self.nodes[u].parent.unwrap();
        }
        while self.depth[v] > self.depth[u] {
            v = self.nodes[v].parent.unwrap();
        }
        while u != v {
            u = self.nodes[u].parent.unwrap();
            v = self.nodes[v].parent.unwrap();
        }
        u
    }

    /// Least common ancestor of two nodes given by id, with its height.
    pub fn lca(&self, u: &str, v: &str) -> Result<(String, f64), TreeError> {
        let ui = self.index_of(u).ok_or_else(|| TreeError::UnknownNode(u.to_string()))?;
        let vi = self.index_of(v).ok_or_else(|| TreeError::UnknownNode(v.to_string()))?;
        let w = self.lca_index(ui, vi);
        Ok((self.nodes[w].id.clone(), self.nodes[w].height))
    }

    /// Canonical form used for exact isomorphism testing: children are
    /// sorted recursively, ids are ignored, heights compared bitwise.
    pub fn canonical_code(&self) -> CanonicalCode {
        self.canonical_code_at(0)
    }

    pub fn canonical_code_at(&self, v: NodeIdx) -> CanonicalCode {
        let mut toks = vec![Token::Open(height_key(self.nodes[v].height))];
        let mut kids: Vec<CanonicalCode> =
            self.nodes[v].children.iter().map(|&c| self.canonical_code_at(c)).collect();
        kids.sort();
        for k in kids {
            toks.extend(k.0);
        }
        toks.push(Token::Close);
        CanonicalCode(toks)
    }

    pub fn is_isomorphic(&self, other: &MergeTree) -> bool {
        self.canonical_code() == other.canonical_code()
    }

    /// Isomorphism up to an absolute height tolerance. Used where heights
    /// come out of floating point sums that are equal only in exact
    /// arithmetic.
    pub fn is_isomorphic_within(&self, other: &MergeTree, tol: f64) -> bool {
        fn iso(a: &MergeTree, u: NodeIdx, b: &MergeTree, v: NodeIdx, tol: f64) -> bool {
            let (nu, nv) = (&a.nodes[u], &b.nodes[v]);
            if (nu.height - nv.height).abs() > tol || nu.children.len() != nv.children.len() {
                return false;
            }
            let mut used = vec![false; nv.children.len()];
            match_children(a, &nu.children, b, &nv.children, 0, &mut used, tol)
        }
        fn match_children(
            a: &MergeTree,
            xs: &[NodeIdx],
            b: &MergeTree,
            ys: &[NodeIdx],
            i: usize,
            used: &mut [bool],
            tol: f64,
        ) -> bool {
            if i == xs.len() {
                return true;
            }
            for j in 0..ys.len() {
                if !used[j] && iso(a, xs[i], b, ys[j], tol) {
                    used[j] = true;
                    if match_children(a, xs, b, ys, i + 1, used, tol) {
                        return true;
                    }
                    used[j] = false;
                }
            }
            false
        }
        self.leaf_count() == other.leaf_count() && iso(self, 0, other, 0, tol)
    }

    pub fn to_persistent_set(&self) -> PersistentSetRep {
        let times = self.critical_times();
        let alive: Vec<Vec<NodeIdx>> = times.iter().map(|&t| self.alive_at(t)).collect();
        let maps = (0..times.len().saturating_sub(1))
            .map(|i| {
                let next = &alive[i + 1];
                alive[i]
                    .iter()
                    .map(|&v| {
                        let a = self.ancestor_at(v, times[i + 1]);
                        next.iter().position(|&w| w == a).expect("ancestor is alive")
                    })
                    .collect()
            })
            .collect();
        PersistentSetRep {
            set_sizes: alive.iter().map(Vec::len).collect(),
            critical_times: times,
            maps,
        }
    }

    /// The composite `M(s <= t)`, with elements of `M(s)` and `M(t)`
    /// numbered as in [`MergeTree::alive_at`].
    pub fn evolution_map(&self, s: f64, t: f64) -> Result<SetMap, TreeError> {
        if s > t {
            return Err(TreeError::ReversedInterval { s, t });
        }
        let dom = self.alive_at(s);
        let cod = self.alive_at(t);
        let images = dom
            .iter()
            .map(|&v| {
                let a = self.ancestor_at(v, t);
                cod.iter().position(|&w| w == a).expect("ancestor is alive")
            })
            .collect();
        Ok(SetMap { domain: dom.len(), codomain: cod.len(), images })
    }

    /// Node/edge export of the geometric realization.
    pub fn realization(&self) -> Realization {
        Realization {
            vertices: self
                .nodes
                .iter()
                .map(|n| RealizationVertex { id: n.id.clone(), height: n.height, leaf: n.is_leaf() })
                .collect(),
            edges: self
                .nodes
                .iter()
                .filter_map(|n| n.parent.map(|p| (n.id.clone(), self.nodes[p].id.clone())))
                .collect(),
            root: self.nodes[0].id.clone(),
        }
    }
}

impl PartialEq for MergeTree {
    /// Structural equality including ids; use [`MergeTree::is_isomorphic`]
    /// for isomorphism.
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes
    }
}

fn normalize_doc(doc: &TreeDoc, index: &HashMap<&str, usize>, v: usize) -> Sub {
    let node = &doc.nodes[v];
    let h = node.height;
    if node.children.is_empty() {
        return Sub::Leaf { id: node.id.clone(), height: h };
    }
    let mut branches = Vec::new();
    for c in &node.children {
        match normalize_doc(doc, index, index[c.as_str()]) {
            Sub::Node { height, children, .. } if height == h => branches.extend(children),
            Sub::Leaf { height, .. } if height == h => {}
            other => branches.push(other),
        }
    }
    match branches.len() {
        0 => Sub::Leaf { id: node.id.clone(), height: h },
        1 => branches.pop().unwrap(),
        _ => Sub::Node { id: node.id.clone(), height: h, children: branches },
    }
}

fn height_key(h: f64) -> u64 {
    let h = if h == 0.0 { 0.0 } else { h };
    let bits = h.to_bits();
    if bits >> 63 == 1 {
        !bits
    } else {
        bits | (1 << 63)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Token {
    Open(u64),
    Close,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalCode(Vec<Token>);

/// A finite collection of merge trees.
#[derive(Clone, Debug, Default)]
pub struct MergeForest {
    pub trees: Vec<MergeTree>,
}

impl MergeForest {
    pub fn component_count(&self) -> usize {
        self.trees.len()
    }

    pub fn into_tree(mut self) -> Result<MergeTree, TreeError> {
        if self.trees.len() == 1 {
            Ok(self.trees.pop().unwrap())
        } else {
            Err(TreeError::NotATree(self.trees.len()))
        }
    }

    pub fn component_count_at(&self, t: f64) -> usize {
        self.trees.iter().map(|tr| tr.component_count_at(t)).sum()
    }

    /// Forest isomorphism: a bijection of components by tree isomorphism.
    pub fn is_isomorphic(&self, other: &MergeForest) -> bool {
        let mut a: Vec<_> = self.trees.iter().map(MergeTree::canonical_code).collect();
        let mut b: Vec<_> = other.trees.iter().map(MergeTree::canonical_code).collect();
        a.sort();
        b.sort();
        a == b
    }
}

/// A function between finite sets `{0..domain} -> {0..codomain}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetMap {
    pub domain: usize,
    pub codomain: usize,
    pub images: Vec<usize>,
}

impl SetMap {
    pub fn identity(n: usize) -> Self {
        SetMap { domain: n, codomain: n, images: (0..n).collect() }
    }

    pub fn compose(&self, then: &SetMap) -> SetMap {
        debug_assert_eq!(self.codomain, then.domain);
        SetMap {
            domain: self.domain,
            codomain: then.codomain,
            images: self.images.iter().map(|&i| then.images[i]).collect(),
        }
    }

    pub fn image_size(&self) -> usize {
        let mut seen = vec![false; self.codomain];
        self.images.iter().filter(|&&i| !std::mem::replace(&mut seen[i], true)).count()
    }

    pub fn is_injective(&self) -> bool {
        self.image_size() == self.domain
    }
}

/// A constructible persistent set given by its critical times, the sizes of
/// the critical sets, and the maps between consecutive critical sets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PersistentSetRep {
    pub critical_times: Vec<f64>,
    pub set_sizes: Vec<usize>,
    pub maps: Vec<Vec<usize>>,
}

impl PersistentSetRep {
    pub fn validate(&self) -> Result<(), TreeError> {
        let bad = |m: String| Err(TreeError::InvalidPersistentSet(m));
        let n = self.critical_times.len();
        if self.set_sizes.len() != n || self.maps.len() != n.saturating_sub(1) {
            return bad("length mismatch between times, sizes and maps".into());
        }
        if self.critical_times.windows(2).any(|w| !(w[0] < w[1])) {
            return bad("critical times must be strictly increasing".into());
        }
        if self.set_sizes.contains(&0) {
            return bad("critical sets must be nonempty".into());
        }
        for (i, m) in self.maps.iter().enumerate() {
            if m.len() != self.set_sizes[i] || m.iter().any(|&x| x >= self.set_sizes[i + 1]) {
                return bad(format!("map {i} has the wrong shape"));
            }
            let sm = self.map(i);
            if sm.is_injective() && sm.image_size() == self.set_sizes[i + 1] {
                return bad(format!(
                    "time {} is not critical (map into it is a bijection)",
                    self.critical_times[i + 1]
                ));
            }
        }
        Ok(())
    }

    fn map(&self, i: usize) -> SetMap {
        SetMap { domain: self.set_sizes[i], codomain: self.set_sizes[i + 1], images: self.maps[i].clone() }
    }

    /// Index of the last critical time `<= t`.
    fn slot(&self, t: f64) -> Option<usize> {
        self.critical_times.iter().rposition(|&c| c <= t)
    }

    pub fn size_at(&self, t: f64) -> usize {
        self.slot(t).map_or(0, |i| self.set_sizes[i])
    }

    /// The composite `M(s <= t)` of the maps `m_i` across `(s, t]`.
    pub fn evolution_map(&self, s: f64, t: f64) -> Result<SetMap, TreeError> {
        if s > t {
            return Err(TreeError::ReversedInterval { s, t });
        }
        let (i, j) = (self.slot(s), self.slot(t));
        Ok(match (i, j) {
            (None, _) => SetMap { domain: 0, codomain: self.size_at(t), images: vec![] },
            (Some(i), Some(j)) => {
                let mut m = SetMap::identity(self.set_sizes[i]);
                for k in i..j {
                    m = m.compose(&self.map(k));
                }
                m
            }
            (Some(_), None) => unreachable!("s <= t"),
        })
    }

    pub fn to_forest(&self) -> Result<MergeForest, TreeError> {
        self.validate()?;
        let mut counter = 0usize;
        let mut fresh = |prefix: &str| {
            counter += 1;
            format!("{prefix}{}", counter - 1)
        };
        // Current subtree for each element of the latest critical set.
        let mut current: Vec<Sub> = Vec::new();
        for (i, &t) in self.critical_times.iter().enumerate() {
            let size = self.set_sizes[i];
            let mut pre: Vec<Vec<Sub>> = (0..size).map(|_| Vec::new()).collect();
            if i > 0 {
                for (x, sub) in std::mem::take(&mut current).into_iter().enumerate() {
                    pre[self.maps[i - 1][x]].push(sub);
                }
            }
            current = pre
                .into_iter()
                .map(|mut subs| match subs.len() {
                    0 => Sub::Leaf { id: fresh("b"), height: t },
                    1 => subs.pop().unwrap(),
                    _ => Sub::Node { id: fresh("m"), height: t, children: subs },
                })
                .collect();
        }
        Ok(MergeForest { trees: current.into_iter().map(MergeTree::from_sub).collect() })
    }

    pub fn to_tree(&self) -> Result<MergeTree, TreeError> {
        self.to_forest()?.into_tree()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealizationVertex {
    pub id: String,
    pub height: f64,
    pub leaf: bool,
}

/// Vertices with heights and `(child, parent)` edges; the root additionally
/// carries an unbounded ray upwards.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub vertices: Vec<RealizationVertex>,
    pub edges: Vec<(String, String)>,
    pub root: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Leaves born at 0, 1, 2; the first two merge at 3, everything at 5.
    pub(crate) fn example_m() -> MergeTree {
        MergeTree::from_shape(&join(5.0, vec![join(3.0, vec![leaf(0.0), leaf(1.0)]), leaf(2.0)]))
    }

    fn doc(nodes: &[(&str, f64, &[&str])], root: &str) -> TreeDoc {
        TreeDoc {
            nodes: nodes
                .iter()
                .map(|(id, h, cs)| NodeDoc {
                    id: id.to_string(),
                    height: *h,
                    children: cs.iter().map(|c| c.to_string()).collect(),
                })
                .collect(),
            root: root.to_string(),
        }
    }

    #[test]
    fn validate_accepts_minimal_and_example_trees() {
        assert!(validate(&doc(&[("a", 0.0, &[])], "a")).is_empty());
        assert!(validate(&doc(&[("r", 4.0, &["a"]), ("a", 0.0, &[])], "r")).is_empty());
        assert!(validate(&example_m().to_doc()).is_empty());
    }

    #[test]
    fn validate_reports_height_order() {
        let v = validate(&doc(&[("p", 1.0, &["c"]), ("c", 3.0, &[])], "p"));
        assert_eq!(v.len(), 1);
        assert!(matches!(v[0], Violation::HeightOrder { .. }));
    }

    #[test]
    fn validate_reports_structural_problems() {
        let v = validate(&doc(&[("a", 0.0, &["zz"]), ("a", 1.0, &[])], "q"));
        assert!(v.iter().any(|x| matches!(x, Violation::DuplicateId { .. })));
        assert!(v.iter().any(|x| matches!(x, Violation::UnknownRoot { .. })));
        assert!(v.iter().any(|x| matches!(x, Violation::UnknownChild { .. })));
        let cyc = validate(&doc(&[("r", 5.0, &["a"]), ("a", 1.0, &["b"]), ("b", 1.0, &["a"])], "r"));
        assert!(cyc.iter().any(|x| matches!(x, Violation::MultipleParents { .. })));
        let dis = validate(&doc(&[("r", 5.0, &[]), ("x", 1.0, &[])], "r"));
        assert_eq!(dis, vec![Violation::Unreachable { id: "x".into() }]);
        let nan = validate(&doc(&[("r", f64::NAN, &[])], "r"));
        assert!(matches!(nan[0], Violation::NonFiniteHeight { .. }));
    }

    #[test]
    fn normalization_removes_chains_and_zero_length_leaves() {
        // root cap, a 1-child chain node, and a merge at equal heights
        let d = doc(
            &[
                ("cap", 9.0, &["m1"]),
                ("m1", 5.0, &["m2", "c"]),
                ("m2", 5.0, &["chain", "b"]),
                ("chain", 2.0, &["a"]),
                ("a", 0.0, &[]),
                ("b", 1.0, &[]),
                ("c", 3.0, &[]),
                ("z", 5.0, &[]),
            ],
            "cap",
        );
        let mut d = d;
        d.nodes[1].children.push("z".into());
        let t = MergeTree::from_doc(&d).unwrap();
        assert_eq!(t.len(), 4);
        assert_eq!(t.root_height(), 5.0);
        assert_eq!(t.node(0).children.len(), 3);
        let flat = MergeTree::from_shape(&join(5.0, vec![leaf(0.0), leaf(1.0), leaf(3.0)]));
        assert!(t.is_isomorphic(&flat));
        assert_eq!(t.node(0).id, "m1");
    }

    #[test]
    fn all_zero_length_children_collapse_to_a_leaf() {
        let t = MergeTree::from_shape(&join(2.0, vec![leaf(2.0), leaf(2.0)]));
        assert!(t.is_isomorphic(&MergeTree::strand(2.0)));
    }

    #[test]
    fn persistent_set_of_example_m() {
        let ps = example_m().to_persistent_set();
        assert_eq!(ps.critical_times, vec![0.0, 1.0, 2.0, 3.0, 5.0]);
        assert_eq!(ps.set_sizes, vec![1, 2, 3, 2, 1]);
        ps.validate().unwrap();
        let single = MergeTree::strand(1.5).to_persistent_set();
        assert_eq!(single.critical_times, vec![1.5]);
        assert_eq!(single.set_sizes, vec![1]);
        let two = MergeTree::from_shape(&join(2.0, vec![leaf(0.0), leaf(1.0)])).to_persistent_set();
        assert_eq!(two.critical_times, vec![0.0, 1.0, 2.0]);
        assert_eq!(two.set_sizes, vec![1, 2, 1]);
    }

    #[test]
    fn persistent_set_round_trip() {
        let m = example_m();
        let back = m.to_persistent_set().to_tree().unwrap();
        assert!(back.is_isomorphic(&m));
    }

    #[test]
    fn persistent_set_minimality_is_enforced() {
        let ps = PersistentSetRep {
            critical_times: vec![0.0, 1.0],
            set_sizes: vec![1, 1],
            maps: vec![vec![0]],
        };
        assert!(ps.validate().is_err());
    }

    #[test]
    fn evolution_maps() {
        let ps = example_m().to_persistent_set();
        let m = ps.evolution_map(2.0, 5.0).unwrap();
        assert_eq!((m.domain, m.codomain), (3, 1));
        assert_eq!(m.images, vec![0, 0, 0]);
        assert_eq!(ps.evolution_map(2.5, 2.5).unwrap(), SetMap::identity(3));
        assert_eq!(ps.evolution_map(-3.0, -1.0).unwrap().domain, 0);
        assert!(ps.evolution_map(3.0, 2.0).is_err());
        // tree-side evolution map agrees on sizes
        let tm = example_m().evolution_map(2.0, 4.0).unwrap();
        assert_eq!((tm.domain, tm.codomain, tm.image_size()), (3, 2, 2));
    }

    #[test]
    fn lca_examples() {
        let m = example_m();
        let leaves = m.leaves().to_vec();
        let (a, b, c) = (leaves[0], leaves[1], leaves[2]);
        let id = |v: NodeIdx| m.node(v).id.clone();
        assert_eq!(m.lca(&id(a), &id(b)).unwrap().1, 3.0);
        assert_eq!(m.lca(&id(a), &id(c)).unwrap().1, 5.0);
        assert_eq!(m.lca(&id(c), &id(c)).unwrap(), (id(c), 2.0));
        assert!(m.lca("nope", &id(a)).is_err());
    }

    #[test]
    fn isomorphism_examples() {
        let m = example_m();
        let permuted = MergeTree::from_shape(&join(5.0, vec![leaf(2.0), join(3.0, vec![leaf(1.0), leaf(0.0)])]));
        assert!(m.is_isomorphic(&permuted));
        let a = MergeTree::from_shape(&join(2.0, vec![leaf(0.0), leaf(1.0)]));
        let b = MergeTree::from_shape(&join(2.5, vec![leaf(0.0), leaf(1.0)]));
        assert!(!a.is_isomorphic(&b));
        assert!(a.is_isomorphic_within(&b, 0.6));
        assert!(!a.is_isomorphic_within(&b, 0.4));
        // same barcode {[0,inf),[1,4),[2,3)}, different trees
        let t1 = MergeTree::from_shape(&join(4.0, vec![join(3.0, vec![leaf(0.0), leaf(2.0)]), leaf(1.0)]));
        let t2 = MergeTree::from_shape(&join(4.0, vec![leaf(0.0), join(3.0, vec![leaf(1.0), leaf(2.0)])]));
        assert!(!t1.is_isomorphic(&t2));
    }

    #[test]
    fn component_counts() {
        let m = example_m();
        assert_eq!(m.component_count_at(2.5), 3);
        assert_eq!(m.component_count_at(-100.0), 0);
        assert_eq!(m.component_count_at(4.0), 2);
        assert_eq!(m.component_count_at(1e9), 1);
    }

    #[test]
    fn realization_export() {
        let r = example_m().realization();
        assert_eq!(r.vertices.len(), 5);
        assert_eq!(r.edges.len(), 4);
        assert_eq!(r.vertices.iter().filter(|v| v.leaf).count(), 3);
    }

    #[test]
    fn doc_json_round_trip() {
        let m = example_m();
        let s = serde_json::to_string(&m.to_doc()).unwrap();
        let back: TreeDoc = serde_json::from_str(&s).unwrap();
        assert!(MergeTree::from_doc(&back).unwrap() == m);
    }
}
