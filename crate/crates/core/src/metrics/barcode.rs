//! Elder-rule barcodes of merge trees.

use std::fmt;

use serde::de::Deserializer;
use serde::{Deserialize, Serialize, Serializer};

use crate::norm::ExtendedRealVisitor;
use crate::tree::{MergeTree, NodeIdx};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub birth: f64,
    #[serde(serialize_with = "ser_extended", deserialize_with = "de_extended")]
    pub death: f64,
}

fn ser_extended<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if *x == f64::INFINITY {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*x)
    }
}

fn de_extended<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    d.deserialize_any(ExtendedRealVisitor)
}

impl Interval {
    pub fn new(birth: f64, death: f64) -> Self {
        Interval { birth, death }
    }

    pub fn essential(birth: f64) -> Self {
        Interval { birth, death: f64::INFINITY }
    }

    pub fn is_essential(&self) -> bool {
        self.death == f64::INFINITY
    }

    pub fn length(&self) -> f64 {
        self.death - self.birth
    }

    /// True if the interval `[birth, death)` contains `[s, t]`.
    pub fn contains_span(&self, s: f64, t: f64) -> bool {
        self.birth <= s && t < self.death
    }

    pub fn is_valid(&self) -> bool {
        self.birth.is_finite() && !self.death.is_nan() && self.death != f64::NEG_INFINITY && self.birth <= self.death
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_essential() {
            write!(f, "[{}, inf)", self.birth)
        } else {
            write!(f, "[{}, {})", self.birth, self.death)
        }
    }
}

/// A multiset of intervals, stored as a list.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Barcode {
    pub bars: Vec<Interval>,
}

impl Barcode {
    pub fn new(bars: Vec<Interval>) -> Self {
        Barcode { bars }
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    pub fn essential_count(&self) -> usize {
        self.bars.iter().filter(|b| b.is_essential()).count()
    }

    /// Bars sorted by (birth, death), for comparisons as multisets.
    pub fn sorted(&self) -> Vec<Interval> {
        let mut v = self.bars.clone();
        v.sort_by(|a, b| a.birth.total_cmp(&b.birth).then(a.death.total_cmp(&b.death)));
        v
    }

    /// `#{bars containing [s, t]}`.
    pub fn rank(&self, s: f64, t: f64) -> usize {
        self.bars.iter().filter(|b| b.contains_span(s, t)).count()
    }
}

/// Elder-rule branch decomposition: each leaf starts a bar; at a merge the
/// eldest incoming branch survives and the others die at the merge height.
/// Among equally old branches the one whose subtree has the smaller
/// canonical code survives.
pub fn elder_barcode(tree: &MergeTree) -> Barcode {
    fn walk(tree: &MergeTree, v: NodeIdx, bars: &mut Vec<Interval>) -> f64 {
        let node = tree.node(v);
        if node.is_leaf() {
            return node.height;
        }
        let mut branches: Vec<(f64, NodeIdx)> =
            node.children.iter().map(|&c| (walk(tree, c, bars), c)).collect();
        branches.sort_by(|a, b| {
            a.0.total_cmp(&b.0).then_with(|| tree.canonical_code_at(a.1).cmp(&tree.canonical_code_at(b.1)))
        });
        for &(birth, _) in &branches[1..] {
            bars.push(Interval::new(birth, node.height));
        }
        branches[0].0
    }
    let mut bars = Vec::new();
    let eldest = walk(tree, tree.root(), &mut bars);
    bars.push(Interval::essential(eldest));
    bars.sort_by(|a, b| a.birth.total_cmp(&b.birth).then(a.death.total_cmp(&b.death)));
    Barcode { bars }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{join, leaf};

    #[test]
    fn example_three_leaves() {
        let m = MergeTree::from_shape(&join(5.0, vec![join(3.0, vec![leaf(0.0), leaf(1.0)]), leaf(2.0)]));
        let b = elder_barcode(&m);
        assert_eq!(
            b.bars,
            vec![Interval::essential(0.0), Interval::new(1.0, 3.0), Interval::new(2.0, 5.0)]
        );
    }

    #[test]
    fn strand_and_fork() {
        assert_eq!(elder_barcode(&MergeTree::strand(2.0)).bars, vec![Interval::essential(2.0)]);
        let fork = MergeTree::from_shape(&join(2.0, vec![leaf(1.0), leaf(0.0)]));
        assert_eq!(elder_barcode(&fork).bars, vec![Interval::essential(0.0), Interval::new(1.0, 2.0)]);
    }

    #[test]
    fn equal_births_tie() {
        let t = MergeTree::from_shape(&join(3.0, vec![join(1.0, vec![leaf(0.0), leaf(0.5)]), leaf(0.0)]));
        let b = elder_barcode(&t);
        assert_eq!(b.sorted(), vec![Interval::new(0.0, 3.0), Interval::essential(0.0), Interval::new(0.5, 1.0)]);
    }

    #[test]
    fn json_uses_inf_string() {
        let b = Barcode::new(vec![Interval::essential(0.0), Interval::new(1.0, 3.0)]);
        let s = serde_json::to_string(&b).unwrap();
        assert_eq!(s, r#"{"bars":[{"birth":0.0,"death":"inf"},{"birth":1.0,"death":3.0}]}"#);
        assert_eq!(serde_json::from_str::<Barcode>(&s).unwrap(), b);
        let c: Barcode = serde_json::from_str(r#"{"bars":[{"birth":0,"death":"inf"}]}"#).unwrap();
        assert!(c.bars[0].is_essential());
    }
}
