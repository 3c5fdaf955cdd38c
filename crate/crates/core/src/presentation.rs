//! Presentations of merge trees by generating and relating strands.
//!
//! A presentation stores the birth of each generator and, for each relation,
//! its birth together with the two generators its merge functions map to.
//! The 0/1 presentation matrix is derived from the endpoints. The presented
//! merge tree is the coequalizer, evaluated by a union-find sweep.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::norm::{lp_distance, Exponent};
use crate::sweep::{sweep, SweepOutput};
use crate::tree::{MergeForest, MergeTree, NodeIdx, TreeError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PresentationError {
    #[error("a presentation needs at least one generator")]
    NoGenerators,
    #[error("label {0} is not finite")]
    NonFinite(f64),
    #[error("relation {relation} refers to generator {generator}, but there are only {count}")]
    IndexOutOfRange { relation: usize, generator: usize, count: usize },
    #[error(
        "relation {relation} is born at {birth}, before its generator {generator} (born at {generator_birth})"
    )]
    RelationBeforeGenerator { relation: usize, birth: f64, generator: usize, generator_birth: f64 },
    #[error("trivial pair at {a} cannot attach to generator {target} born at {target_birth}")]
    TrivialPairBelowTarget { a: f64, target: usize, target_birth: f64 },
    #[error("generator {0} does not exist")]
    UnknownGenerator(usize),
    #[error("not a permutation of the generators")]
    BadPermutation,
    #[error("presentations are not compatible (their matrices differ)")]
    Incompatible,
    #[error("padding height {t} is below {required}, the height by which both trees are connected")]
    PadHeightTooLow { t: f64, required: f64 },
    #[error(transparent)]
    Tree(#[from] TreeError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Relation {
    pub birth: f64,
    pub f: usize,
    pub g: usize,
}

#[derive(Serialize, Deserialize)]
struct RawPresentation {
    generators: Vec<f64>,
    #[serde(default)]
    relations: Vec<Relation>,
}

/// A finite presentation. Every relation is born no earlier than both of
/// its endpoint generators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPresentation", into = "RawPresentation")]
pub struct Presentation {
    generators: Vec<f64>,
    relations: Vec<Relation>,
}

impl TryFrom<RawPresentation> for Presentation {
    type Error = PresentationError;

    fn try_from(raw: RawPresentation) -> Result<Self, Self::Error> {
        Presentation::new(raw.generators, raw.relations)
    }
}

impl From<Presentation> for RawPresentation {
    fn from(p: Presentation) -> Self {
        RawPresentation { generators: p.generators, relations: p.relations }
    }
}

impl Presentation {
    pub fn new(generators: Vec<f64>, relations: Vec<Relation>) -> Result<Self, PresentationError> {
        if generators.is_empty() {
            return Err(PresentationError::NoGenerators);
        }
        if let Some(&x) = generators.iter().chain(relations.iter().map(|r| &r.birth)).find(|x| !x.is_finite()) {
            return Err(PresentationError::NonFinite(x));
        }
        let k = generators.len();
        for (j, r) in relations.iter().enumerate() {
            for e in [r.f, r.g] {
                if e >= k {
                    return Err(PresentationError::IndexOutOfRange { relation: j, generator: e, count: k });
                }
                if generators[e] > r.birth {
                    return Err(PresentationError::RelationBeforeGenerator {
                        relation: j,
                        birth: r.birth,
                        generator: e,
                        generator_birth: generators[e],
                    });
                }
            }
        }
        Ok(Presentation { generators, relations })
    }

    /// Convenience constructor from `(birth, f, g)` triples.
    pub fn from_parts(generators: &[f64], relations: &[(f64, usize, usize)]) -> Result<Self, PresentationError> {
        Self::new(
            generators.to_vec(),
            relations.iter().map(|&(birth, f, g)| Relation { birth, f, g }).collect(),
        )
    }

    /// One generator per leaf (depth-first order) and one relation per
    /// branch joining another at a merge. At a merge of several branches
    /// the branch whose representative generator is eldest absorbs the
    /// others, ties going to the smaller index.
    pub fn minimal(tree: &MergeTree) -> Presentation {
        let leaves = tree.leaves();
        let generators: Vec<f64> = leaves.iter().map(|&l| tree.height(l)).collect();
        let mut gen_of = vec![usize::MAX; tree.len()];
        for (i, &l) in leaves.iter().enumerate() {
            gen_of[l] = i;
        }
        let mut relations = Vec::new();
        // nodes are stored in pre-order, so reverse order visits children first
        let mut rep = vec![usize::MAX; tree.len()];
        for v in (0..tree.len()).rev() {
            let node = tree.node(v);
            if node.is_leaf() {
                rep[v] = gen_of[v];
                continue;
            }
            let key = |c: &NodeIdx| (generators[rep[*c]], rep[*c]);
            let main = *node
                .children
                .iter()
                .min_by(|a, b| key(a).0.total_cmp(&key(b).0).then(key(a).1.cmp(&key(b).1)))
                .unwrap();
            for &c in &node.children {
                if c != main {
                    relations.push(Relation { birth: node.height, f: rep[main], g: rep[c] });
                }
            }
            rep[v] = rep[main];
        }
        relations.sort_by(|a, b| a.birth.total_cmp(&b.birth));
        Presentation { generators, relations }
    }

    pub fn generators(&self) -> &[f64] {
        &self.generators
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }

    pub fn relation_count(&self) -> usize {
        self.relations.len()
    }

    pub fn matrix(&self) -> PresentationMatrix {
        let (k, l) = (self.generators.len(), self.relations.len());
        let mut entries = vec![vec![0u8; l]; k];
        for (j, r) in self.relations.iter().enumerate() {
            entries[r.f][j] = 1;
            entries[r.g][j] = 1;
        }
        PresentationMatrix {
            entries,
            row_labels: self.generators.clone(),
            col_labels: self.relations.iter().map(|r| r.birth).collect(),
        }
    }

    pub fn label_vector(&self) -> LabelVector {
        LabelVector {
            generator_labels: self.generators.clone(),
            relation_labels: self.relations.iter().map(|r| r.birth).collect(),
        }
    }

    /// Replace all labels, keeping the endpoint pattern.
    pub fn with_labels(&self, generators: &[f64], relations: &[f64]) -> Result<Presentation, PresentationError> {
        assert_eq!(generators.len(), self.generators.len());
        assert_eq!(relations.len(), self.relations.len());
        Presentation::new(
            generators.to_vec(),
            self.relations
                .iter()
                .zip(relations)
                .map(|(r, &birth)| Relation { birth, ..*r })
                .collect(),
        )
    }

    pub(crate) fn sweep(&self) -> SweepOutput {
        let joins: Vec<(f64, usize, usize)> = self.relations.iter().map(|r| (r.birth, r.f, r.g)).collect();
        sweep(&self.generators, &joins, "g")
    }

    /// The presented merge forest.
    pub fn coequalize(&self) -> MergeForest {
        self.sweep().forest
    }

    /// The presented merge tree; fails if the coequalizer has several
    /// components.
    pub fn coequalize_tree(&self) -> Result<MergeTree, PresentationError> {
        Ok(self.coequalize().into_tree()?)
    }

    /// True if the coequalizer is isomorphic to `tree` up to `tol` in heights.
    pub fn presents(&self, tree: &MergeTree, tol: f64) -> bool {
        let forest = self.coequalize();
        forest.trees.len() == 1 && forest.trees[0].is_isomorphic_within(tree, tol)
    }

    /// Append a generator born at `a` and a relation born at `a` merging it
    /// into `target`.
    pub fn with_trivial_pair(&self, a: f64, target: usize) -> Result<Presentation, PresentationError> {
        let target_birth = *self.generators.get(target).ok_or(PresentationError::UnknownGenerator(target))?;
        if !a.is_finite() {
            return Err(PresentationError::NonFinite(a));
        }
        if a < target_birth {
            return Err(PresentationError::TrivialPairBelowTarget { a, target, target_birth });
        }
        let mut out = self.clone();
        let new = out.generators.len();
        out.generators.push(a);
        out.relations.push(Relation { birth: a, f: new, g: target });
        Ok(out)
    }

    /// Reorder generators: generator `i` of the result is generator
    /// `perm[i]` of `self`.
    pub fn permute_generators(&self, perm: &[usize]) -> Result<Presentation, PresentationError> {
        let k = self.generators.len();
        let mut inverse = vec![usize::MAX; k];
        if perm.len() != k {
            return Err(PresentationError::BadPermutation);
        }
        for (i, &p) in perm.iter().enumerate() {
            if p >= k || inverse[p] != usize::MAX {
                return Err(PresentationError::BadPermutation);
            }
            inverse[p] = i;
        }
        Ok(Presentation {
            generators: perm.iter().map(|&p| self.generators[p]).collect(),
            relations: self
                .relations
                .iter()
                .map(|r| Relation { birth: r.birth, f: inverse[r.f], g: inverse[r.g] })
                .collect(),
        })
    }

    /// Reorder relations: relation `j` of the result is relation `perm[j]`.
    pub fn permute_relations(&self, perm: &[usize]) -> Presentation {
        Presentation {
            generators: self.generators.clone(),
            relations: perm.iter().map(|&p| self.relations[p]).collect(),
        }
    }

    /// The height from which the coequalizer is a single point and every
    /// generator is born. Relations labelled at or above it never change
    /// the presented tree.
    pub fn settled_height(&self) -> Result<f64, PresentationError> {
        let tree = self.coequalize_tree()?;
        Ok(self.generators.iter().copied().fold(tree.root_height(), f64::max))
    }
}

/// Make two presentations compatible by giving both the block matrix
/// `(P_M P_N)`: `P̃_M` keeps its own relations and receives `P_N`'s
/// relations at height `t`, and symmetrically for `P̃_N`. Generator counts
/// are first equalized with trivial pairs at `t` attached to generator 0.
pub fn pad_concatenate(
    pm: &Presentation,
    pn: &Presentation,
    t: f64,
) -> Result<(Presentation, Presentation), PresentationError> {
    let required = pm.settled_height()?.max(pn.settled_height()?);
    if !(t >= required) || !t.is_finite() {
        return Err(PresentationError::PadHeightTooLow { t, required });
    }
    let (mut a, mut b) = (pm.clone(), pn.clone());
    while a.generator_count() < b.generator_count() {
        a = a.with_trivial_pair(t, 0)?;
    }
    while b.generator_count() < a.generator_count() {
        b = b.with_trivial_pair(t, 0)?;
    }
    let block = |own: &Presentation, other: &Presentation, own_first: bool| {
        let own_rel = own.relations.iter().copied();
        let other_rel = other.relations.iter().map(|r| Relation { birth: t, ..*r });
        let relations: Vec<Relation> =
            if own_first { own_rel.chain(other_rel).collect() } else { other_rel.chain(own_rel).collect() };
        Presentation { generators: own.generators.clone(), relations }
    };
    Ok((block(&a, &b, true), block(&b, &a, false)))
}

/// Same 0/1 matrix, including dimensions. Labels are ignored.
pub fn are_compatible(p: &Presentation, q: &Presentation) -> bool {
    p.generator_count() == q.generator_count()
        && p.relation_count() == q.relation_count()
        && p.relations.iter().zip(&q.relations).all(|(a, b)| {
            let (a1, a2) = (a.f.min(a.g), a.f.max(a.g));
            let (b1, b2) = (b.f.min(b.g), b.f.max(b.g));
            a1 == b1 && a2 == b2
        })
}

/// ℓ^p norm of the difference of the label vectors of a compatible pair.
pub fn label_distance(p: &Presentation, q: &Presentation, e: Exponent) -> Result<f64, PresentationError> {
    if !are_compatible(p, q) {
        return Err(PresentationError::Incompatible);
    }
    Ok(lp_distance(&p.label_vector().to_vec(), &q.label_vector().to_vec(), e))
}

/// The 0/1 matrix with row (generator) and column (relation) labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PresentationMatrix {
    pub entries: Vec<Vec<u8>>,
    pub row_labels: Vec<f64>,
    pub col_labels: Vec<f64>,
}

impl PresentationMatrix {
    pub fn column_ones(&self, j: usize) -> usize {
        self.entries.iter().filter(|row| row[j] == 1).count()
    }
}

impl fmt::Display for PresentationMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:>8} |", "")?;
        for c in &self.col_labels {
            write!(f, " {c:>6}")?;
        }
        writeln!(f)?;
        for (label, row) in self.row_labels.iter().zip(&self.entries) {
            write!(f, "{label:>8} |")?;
            for e in row {
                write!(f, " {e:>6}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelVector {
    pub generator_labels: Vec<f64>,
    pub relation_labels: Vec<f64>,
}

impl LabelVector {
    pub fn to_vec(&self) -> Vec<f64> {
        self.generator_labels.iter().chain(&self.relation_labels).copied().collect()
    }
}

impl fmt::Display for LabelVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        if self.relation_labels.is_empty() {
            write!(f, "[{}]", join(&self.generator_labels))
        } else {
            write!(f, "[{};{}]", join(&self.generator_labels), join(&self.relation_labels))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{join, leaf};

    fn fork() -> MergeTree {
        MergeTree::from_shape(&join(2.0, vec![leaf(0.0), leaf(1.0)]))
    }

    fn example_m() -> MergeTree {
        MergeTree::from_shape(&join(5.0, vec![join(3.0, vec![leaf(0.0), leaf(1.0)]), leaf(2.0)]))
    }

    #[test]
    fn minimal_presentation_of_fork() {
        let p = Presentation::minimal(&fork());
        assert_eq!(p.label_vector().to_string(), "[0,1;2]");
        assert_eq!(p.relations(), &[Relation { birth: 2.0, f: 0, g: 1 }]);
        assert!(p.presents(&fork(), 0.0));
    }

    #[test]
    fn minimal_presentation_of_strand() {
        let p = Presentation::minimal(&MergeTree::strand(4.5));
        assert_eq!(p.label_vector().to_string(), "[4.5]");
        assert_eq!(p.matrix().entries, vec![Vec::<u8>::new()]);
    }

    #[test]
    fn minimal_presentation_of_three_leaves() {
        let m = example_m();
        let p = Presentation::minimal(&m);
        assert_eq!(p.label_vector().to_string(), "[0,1,2;3,5]");
        assert_eq!(p.matrix().entries, vec![vec![1, 1], vec![1, 0], vec![0, 1]]);
        assert!(p.presents(&m, 0.0));
    }

    #[test]
    fn multiway_merge_emits_one_relation_per_extra_branch() {
        let t = MergeTree::from_shape(&join(3.0, vec![leaf(1.0), leaf(0.0), leaf(2.0), leaf(0.5)]));
        let p = Presentation::minimal(&t);
        assert_eq!(p.relation_count(), 3);
        assert!(p.relations().iter().all(|r| r.f == 1 && r.birth == 3.0));
        assert!(p.presents(&t, 0.0));
    }

    #[test]
    fn the_two_matrices_with_the_same_label_vector() {
        let a = Presentation::from_parts(&[1.0, 0.0, 3.0], &[(3.0, 0, 1), (5.0, 1, 2)]).unwrap();
        let b = Presentation::from_parts(&[1.0, 0.0, 3.0], &[(3.0, 0, 1), (5.0, 0, 2)]).unwrap();
        assert_eq!(a.label_vector(), b.label_vector());
        assert_eq!(a.label_vector().to_string(), "[1,0,3;3,5]");
        assert!(!are_compatible(&a, &b));
        assert!(a.coequalize_tree().unwrap().is_isomorphic(&b.coequalize_tree().unwrap()));
    }

    #[test]
    fn trivial_pair() {
        let p = Presentation::minimal(&fork());
        let q = p.with_trivial_pair(1.5, 1).unwrap();
        assert_eq!(q.label_vector().to_string(), "[0,1,1.5;2,1.5]");
        assert!(q.presents(&fork(), 0.0));
        assert!(p.with_trivial_pair(1.0, 1).unwrap().presents(&fork(), 0.0));
        assert!(matches!(p.with_trivial_pair(0.5, 1), Err(PresentationError::TrivialPairBelowTarget { .. })));
    }

    #[test]
    fn constructor_rejects_bad_relations() {
        assert!(matches!(
            Presentation::from_parts(&[0.0, 3.0], &[(2.0, 0, 1)]),
            Err(PresentationError::RelationBeforeGenerator { .. })
        ));
        assert!(matches!(
            Presentation::from_parts(&[0.0], &[(2.0, 0, 1)]),
            Err(PresentationError::IndexOutOfRange { .. })
        ));
        assert!(Presentation::from_parts(&[], &[]).is_err());
        assert!(serde_json::from_str::<Presentation>(r#"{"generators":[0,3],"relations":[{"birth":1,"f":0,"g":1}]}"#)
            .is_err());
    }

    #[test]
    fn json_round_trip() {
        let p = Presentation::minimal(&example_m());
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<Presentation>(&s).unwrap(), p);
    }

    #[test]
    fn compatibility_and_label_distance() {
        let eps = 0.25;
        let pm = Presentation::from_parts(&[0.0, eps], &[(eps, 0, 1)]).unwrap();
        let pn = Presentation::from_parts(&[0.0, 0.0], &[(1.0, 0, 1)]).unwrap();
        assert!(are_compatible(&pm, &pn));
        assert!(are_compatible(&pm, &pm));
        assert_eq!(label_distance(&pm, &pn, Exponent::ONE).unwrap(), 1.0);
        assert_eq!(label_distance(&pm, &pn, Exponent::INFINITY).unwrap(), 0.75);
        let single = Presentation::from_parts(&[0.0], &[]).unwrap();
        assert_eq!(label_distance(&pm, &single, Exponent::ONE), Err(PresentationError::Incompatible));
    }

    #[test]
    fn pad_concatenate_strands() {
        let r = 3.0;
        let a = Presentation::minimal(&MergeTree::strand(0.0));
        let b = Presentation::minimal(&MergeTree::strand(r));
        let (pa, pb) = pad_concatenate(&a, &b, r).unwrap();
        assert!(are_compatible(&pa, &pb));
        assert_eq!(label_distance(&pa, &pb, Exponent::ONE).unwrap(), r);
        assert!(pad_concatenate(&a, &b, r - 0.5).is_err());
    }

    #[test]
    fn pad_concatenate_preserves_trees() {
        let m = example_m();
        let n = fork();
        let (pm, pn) = pad_concatenate(&Presentation::minimal(&m), &Presentation::minimal(&n), 6.0).unwrap();
        assert!(are_compatible(&pm, &pn));
        assert!(pm.presents(&m, 0.0));
        assert!(pn.presents(&n, 0.0));
        assert_eq!(pm.relation_count(), 2 + 2);
    }

    #[test]
    fn example_n_and_q_at_epsilon_zero() {
        let r = 10.0;
        let pn = Presentation::from_parts(&[0.0, 0.0], &[(1.0, 0, 1)]).unwrap();
        let pq = Presentation::from_parts(&[r, r], &[(r, 0, 1)]).unwrap();
        assert_eq!(label_distance(&pn, &pq, Exponent::ONE).unwrap(), 29.0);
    }

    #[test]
    fn permutations() {
        let p = Presentation::minimal(&example_m());
        let q = p.permute_generators(&[2, 0, 1]).unwrap();
        assert_eq!(q.generators(), &[2.0, 0.0, 1.0]);
        assert!(q.presents(&example_m(), 0.0));
        assert!(p.permute_generators(&[0, 0, 1]).is_err());
    }

    #[test]
    fn every_column_has_one_or_two_ones() {
        let p = Presentation::from_parts(&[0.0, 1.0], &[(2.0, 0, 1), (3.0, 1, 1)]).unwrap();
        let m = p.matrix();
        assert_eq!(m.column_ones(0), 2);
        assert_eq!(m.column_ones(1), 1);
    }
}
