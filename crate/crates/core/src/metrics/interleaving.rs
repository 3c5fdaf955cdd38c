//! Interleavings of merge trees: an exact decision procedure at small
//! scale, the interleaving distance, an independent witness checker, and
//! the two conversions between interleavings and compatible presentation
//! pairs.
//!
//! A natural transformation `φ: M → N S_ε` is determined by where it sends
//! each leaf of `M` at its birth: an element of `N(h + ε)`, stored as the
//! node of `N` alive there. The image of any other element is obtained by
//! pushing a leaf image forward, which is well defined exactly when any two
//! leaves that meet at height `H` in `M` have images that meet by `H + ε`
//! in `N`. Since both sides of a triangle identity are natural, checking it
//! on leaves is enough.

use serde::{Deserialize, Serialize};

use super::MetricError;
use crate::norm::Exponent;
use crate::presentation::{are_compatible, label_distance, Presentation, Relation};
use crate::tree::{MergeTree, NodeIdx};

pub const INTERLEAVING_LEAF_LIMIT: usize = 10;

/// Nudges a query time up by a relative `1e-12` so that heights which
/// agree in exact arithmetic (such as `h + ε` landing on a merge) are not
/// lost to rounding in the sum.
pub fn snap(t: f64) -> f64 {
    t + 1e-12 * t.abs().max(1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterleavingWitness {
    pub epsilon: f64,
    /// For each leaf of `M` (depth-first order), the node of `N` alive at
    /// `h + ε` that the leaf is sent to.
    pub phi: Vec<NodeIdx>,
    /// For each leaf of `N`, its image node in `M`.
    pub psi: Vec<NodeIdx>,
}

/// Witness tables in terms of node ids, for reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessTable {
    pub epsilon: f64,
    pub phi: Vec<(String, String)>,
    pub psi: Vec<(String, String)>,
}

impl InterleavingWitness {
    pub fn table(&self, m: &MergeTree, n: &MergeTree) -> WitnessTable {
        let rows = |src: &MergeTree, dst: &MergeTree, img: &[NodeIdx]| {
            src.leaves()
                .iter()
                .zip(img)
                .map(|(&l, &v)| (src.node(l).id.clone(), dst.node(v).id.clone()))
                .collect()
        };
        WitnessTable { epsilon: self.epsilon, phi: rows(m, n, &self.phi), psi: rows(n, m, &self.psi) }
    }

    /// The same interleaving read in the other direction.
    pub fn swapped(&self) -> InterleavingWitness {
        InterleavingWitness { epsilon: self.epsilon, phi: self.psi.clone(), psi: self.phi.clone() }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct InterleavingOptions {
    /// Enforce both triangle identities. Turning this off only checks that
    /// `φ` and `ψ` are natural, and exists to exercise the fuzz harness.
    pub check_triangles: bool,
}

impl Default for InterleavingOptions {
    fn default() -> Self {
        InterleavingOptions { check_triangles: true }
    }
}

fn guard(m: &MergeTree, n: &MergeTree) -> Result<(), MetricError> {
    let size = m.leaf_count().max(n.leaf_count());
    if size > INTERLEAVING_LEAF_LIMIT {
        return Err(MetricError::ScaleGuard {
            what: "leaves per tree in interleaving search",
            size,
            limit: INTERLEAVING_LEAF_LIMIT,
        });
    }
    Ok(())
}

/// Position of every leaf in depth-first order, indexed by node.
fn leaf_positions(t: &MergeTree) -> Vec<usize> {
    let mut pos = vec![usize::MAX; t.len()];
    for (i, &l) in t.leaves().iter().enumerate() {
        pos[l] = i;
    }
    pos
}

/// Constraint data for a natural transformation `src → dst S_ε`.
struct MapProblem {
    /// Candidate images per leaf of `src`.
    candidates: Vec<Vec<NodeIdx>>,
    /// `(i, j, t)`: images of leaves `i < j` must meet in `dst` by `t`.
    meets: Vec<(usize, usize, f64)>,
}

fn map_problem(src: &MergeTree, dst: &MergeTree, eps: f64) -> MapProblem {
    let leaves = src.leaves();
    let candidates = leaves.iter().map(|&l| dst.alive_at(snap(src.height(l) + eps))).collect();
    let mut meets = Vec::new();
    for i in 0..leaves.len() {
        for j in i + 1..leaves.len() {
            let h = src.height(src.lca_index(leaves[i], leaves[j]));
            meets.push((i, j, snap(h + eps)));
        }
    }
    MapProblem { candidates, meets }
}

/// Depth-first search for leaf images satisfying every meet constraint.
/// `accept` is called on each complete assignment; returning true stops.
fn search_maps(
    dst: &MergeTree,
    prob: &MapProblem,
    accept: &mut dyn FnMut(&[NodeIdx]) -> bool,
) -> bool {
    let k = prob.candidates.len();
    let mut by_later: Vec<Vec<(usize, f64)>> = vec![Vec::new(); k];
    for &(i, j, t) in &prob.meets {
        by_later[j].push((i, t));
    }
    fn rec(
        j: usize,
        dst: &MergeTree,
        prob: &MapProblem,
        by_later: &[Vec<(usize, f64)>],
        cur: &mut Vec<NodeIdx>,
        accept: &mut dyn FnMut(&[NodeIdx]) -> bool,
    ) -> bool {
        if j == prob.candidates.len() {
            return accept(cur);
        }
        for &c in &prob.candidates[j] {
            let ok = by_later[j].iter().all(|&(i, t)| dst.ancestor_at(cur[i], t) == dst.ancestor_at(c, t));
            if ok {
                cur.push(c);
                if rec(j + 1, dst, prob, by_later, cur, accept) {
                    return true;
                }
                cur.pop();
            }
        }
        false
    }
    rec(0, dst, prob, &by_later, &mut Vec::with_capacity(k), accept)
}

/// Search for an ε-interleaving. Returns `None` when the exhaustive search
/// finds none.
pub fn interleaving_exists(m: &MergeTree, n: &MergeTree, eps: f64) -> Result<Option<InterleavingWitness>, MetricError> {
    interleaving_exists_with(m, n, eps, InterleavingOptions::default())
}

pub fn interleaving_exists_with(
    m: &MergeTree,
    n: &MergeTree,
    eps: f64,
    opts: InterleavingOptions,
) -> Result<Option<InterleavingWitness>, MetricError> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(MetricError::NegativeEpsilon(eps));
    }
    guard(m, n)?;
    let phi_problem = map_problem(m, n, eps);
    let base_psi = map_problem(n, m, eps);
    let (m_pos, n_pos) = (leaf_positions(m), leaf_positions(n));
    let (m_leaves, n_leaves) = (m.leaves(), n.leaves());
    let mut found = None;

    search_maps(n, &phi_problem, &mut |phi: &[NodeIdx]| {
        let mut prob = MapProblem { candidates: base_psi.candidates.clone(), meets: base_psi.meets.clone() };
        if opts.check_triangles {
            // φ ∘ ψ = shift on each leaf of N
            for (j, &l) in n_leaves.iter().enumerate() {
                let h = n.height(l);
                let target = n.ancestor_at(l, snap(h + 2.0 * eps));
                prob.candidates[j].retain(|&c| {
                    let via = m_pos[m.first_leaf_below(c)];
                    n.ancestor_at(phi[via], snap(h + 2.0 * eps)) == target
                });
            }
            // ψ ∘ φ = shift on each leaf of M, which constrains ψ on one
            // leaf below each φ image
            for (i, &l) in m_leaves.iter().enumerate() {
                let h = m.height(l);
                let target = m.ancestor_at(l, snap(h + 2.0 * eps));
                let j = n_pos[n.first_leaf_below(phi[i])];
                prob.candidates[j].retain(|&c| m.ancestor_at(c, snap(h + 2.0 * eps)) == target);
            }
        }
        let mut psi_found = None;
        search_maps(m, &prob, &mut |psi: &[NodeIdx]| {
            psi_found = Some(psi.to_vec());
            true
        });
        match psi_found {
            Some(psi) => {
                found = Some(InterleavingWitness { epsilon: eps, phi: phi.to_vec(), psi });
                true
            }
            None => false,
        }
    });
    Ok(found)
}

/// Independent check of a witness: evaluates `φ` and `ψ` on every element
/// of `M(t)` and `N(t)` at every time where any of the maps involved can
/// change, checking that each image does not depend on the leaf used to
/// compute it, and that both triangles commute.
pub fn verify_witness(m: &MergeTree, n: &MergeTree, w: &InterleavingWitness) -> Result<(), String> {
    let eps = w.epsilon;
    if !(eps >= 0.0) {
        return Err(format!("epsilon {eps} is negative"));
    }
    if w.phi.len() != m.leaf_count() || w.psi.len() != n.leaf_count() {
        return Err("witness tables have the wrong length".into());
    }
    for (src, dst, img, name) in [(m, n, &w.phi, "phi"), (n, m, &w.psi, "psi")] {
        for (&l, &v) in src.leaves().iter().zip(img.iter()) {
            if v >= dst.len() || dst.height(v) > snap(src.height(l) + eps) {
                return Err(format!("{name}: leaf `{}` is sent to a node that does not exist yet", src.node(l).id));
            }
        }
    }
    // image of element x of src(t) in dst(t + eps)
    let apply = |src: &MergeTree, dst: &MergeTree, img: &[NodeIdx], x: NodeIdx, t: f64| -> Result<NodeIdx, String> {
        let mut image = None;
        for (pos, &l) in src.leaves().iter().enumerate() {
            if src.height(l) <= t && src.ancestor_at(l, t) == x {
                let y = dst.ancestor_at(img[pos], snap(t + eps));
                match image {
                    None => image = Some(y),
                    Some(z) if z == y => {}
                    Some(z) => {
                        return Err(format!(
                            "not natural at t = {t}: `{}` has images `{}` and `{}`",
                            src.node(x).id,
                            dst.node(z).id,
                            dst.node(y).id
                        ))
                    }
                }
            }
        }
        image.ok_or_else(|| format!("`{}` has no leaf below it at t = {t}", src.node(x).id))
    };
    let mut times: Vec<f64> = Vec::new();
    for c in m.critical_times().into_iter().chain(n.critical_times()) {
        times.extend([c, c - eps, c - 2.0 * eps]);
    }
    times.sort_by(f64::total_cmp);
    times.dedup();
    for &t0 in &times {
        let t = snap(t0);
        for (src, dst, fwd, back, name) in [(m, n, &w.phi, &w.psi, "psi . phi"), (n, m, &w.psi, &w.phi, "phi . psi")] {
            for x in src.alive_at(t) {
                let y = apply(src, dst, fwd, x, t)?;
                let z = apply(dst, src, back, y, snap(t + eps))?;
                let shifted = src.ancestor_at(x, snap(t + 2.0 * eps));
                if z != shifted {
                    return Err(format!("{name} differs from the 2ε shift at `{}`, t = {t0}", src.node(x).id));
                }
            }
        }
    }
    Ok(())
}

/// Candidate values for the interleaving distance: zero and every
/// difference and half difference of critical times.
pub fn candidate_epsilons(m: &MergeTree, n: &MergeTree) -> Vec<f64> {
    let mut times = m.critical_times();
    times.extend(n.critical_times());
    let mut out = vec![0.0];
    for &a in &times {
        for &b in &times {
            if a > b {
                out.push(a - b);
                out.push((a - b) / 2.0);
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterleavingResult {
    pub distance: f64,
    pub witness: InterleavingWitness,
    /// The next smaller candidate, shown infeasible (absent when the
    /// distance is zero).
    pub infeasible_below: Option<f64>,
}

/// Smallest feasible candidate, found by bisection over the sorted
/// candidates. The largest candidate (the spread of all critical times) is
/// always feasible: every map can be sent to the roots.
pub fn interleaving_distance(m: &MergeTree, n: &MergeTree) -> Result<InterleavingResult, MetricError> {
    interleaving_distance_with(m, n, InterleavingOptions::default())
}

pub fn interleaving_distance_with(
    m: &MergeTree,
    n: &MergeTree,
    opts: InterleavingOptions,
) -> Result<InterleavingResult, MetricError> {
    guard(m, n)?;
    let cands = candidate_epsilons(m, n);
    let (mut lo, mut hi) = (0usize, cands.len() - 1);
    let mut best = interleaving_exists_with(m, n, cands[hi], opts)?
        .ok_or_else(|| MetricError::TheoremViolation("the largest candidate is infeasible".into()))?;
    while lo < hi {
        let mid = (lo + hi) / 2;
        match interleaving_exists_with(m, n, cands[mid], opts)? {
            Some(w) => {
                best = w;
                hi = mid;
            }
            None => lo = mid + 1,
        }
    }
    Ok(InterleavingResult {
        distance: cands[hi],
        witness: best,
        infeasible_below: if hi > 0 { Some(cands[hi - 1]) } else { None },
    })
}

/// Compatible presentations of `M` and `N` whose labels differ by exactly
/// `ε` in every entry, built from an ε-interleaving. Generators are those
/// of minimal presentations of `M` and of `N` (the latter shifted by `ε`
/// in `P_M`); relations are the two minimal relation blocks followed by one
/// relation per generator tying it to its image under `φ` or `ψ`.
pub fn interleaving_to_presentations(
    m: &MergeTree,
    n: &MergeTree,
    w: &InterleavingWitness,
) -> Result<(Presentation, Presentation), MetricError> {
    verify_witness(m, n, w).map_err(MetricError::InvalidWitness)?;
    let eps = w.epsilon;
    let (pm, pn) = (Presentation::minimal(m), Presentation::minimal(n));
    let (km, kn) = (pm.generator_count(), pn.generator_count());
    let (m_pos, n_pos) = (leaf_positions(m), leaf_positions(n));
    // generators of minimal presentations are the leaves in order
    let j_of: Vec<usize> = w.phi.iter().map(|&v| n_pos[n.first_leaf_below(v)]).collect();
    let i_of: Vec<usize> = w.psi.iter().map(|&v| m_pos[m.first_leaf_below(v)]).collect();

    let build = |shift_m: f64, shift_n: f64| -> Result<Presentation, MetricError> {
        let gm: Vec<f64> = pm.generators().iter().map(|g| g + shift_m).collect();
        let gn: Vec<f64> = pn.generators().iter().map(|g| g + shift_n).collect();
        let mut generators = gm.clone();
        generators.extend(&gn);
        let mut relations: Vec<Relation> = Vec::new();
        for r in pm.relations() {
            relations.push(Relation { birth: r.birth + shift_m, ..*r });
        }
        for r in pn.relations() {
            relations.push(Relation { birth: r.birth + shift_n, f: km + r.f, g: km + r.g });
        }
        for (i, &j) in j_of.iter().enumerate() {
            let birth = (pm.generators()[i] + eps + shift_n).max(gm[i]).max(gn[j]);
            relations.push(Relation { birth, f: i, g: km + j });
        }
        for (j, &i) in i_of.iter().enumerate() {
            let birth = (pn.generators()[j] + eps + shift_m).max(gn[j]).max(gm[i]);
            relations.push(Relation { birth, f: km + j, g: i });
        }
        debug_assert_eq!(generators.len(), km + kn);
        Ok(Presentation::new(generators, relations)?)
    };
    Ok((build(0.0, eps)?, build(eps, 0.0)?))
}

/// An interleaving read off a compatible pair, together with the trees
/// the pair presents.
#[derive(Clone, Debug)]
pub struct PresentedInterleaving {
    pub source: MergeTree,
    pub target: MergeTree,
    pub witness: InterleavingWitness,
}

/// Each generator of `P_M` goes to the matching generator of `P_N`,
/// shifted by `ε`, the ∞-label distance; this descends to the coequalizers.
pub fn presentations_to_interleaving(pm: &Presentation, pn: &Presentation) -> Result<PresentedInterleaving, MetricError> {
    if !are_compatible(pm, pn) {
        return Err(MetricError::Presentation(crate::presentation::PresentationError::Incompatible));
    }
    let eps = label_distance(pm, pn, Exponent::INFINITY)?;
    let (sm, sn) = (pm.sweep(), pn.sweep());
    let source = sm.forest.clone().into_tree()?;
    let target = sn.forest.clone().into_tree()?;
    let images = |src_tree: &MergeTree,
                  src: &crate::sweep::SweepOutput,
                  dst_tree: &MergeTree,
                  dst: &crate::sweep::SweepOutput,
                  births: &[f64]|
     -> Result<Vec<NodeIdx>, MetricError> {
        src_tree
            .leaves()
            .iter()
            .map(|&l| {
                // the generator born at the leaf, not one absorbed into it later
                let g = (0..births.len())
                    .filter(|&g| src.element_nodes[g].1 == l)
                    .min_by(|&a, &b| births[a].total_cmp(&births[b]))
                    .ok_or_else(|| MetricError::InvalidWitness("leaf without a generator".into()))?;
                Ok(dst_tree.ancestor_at(dst.element_nodes[g].1, snap(births[g] + eps)))
            })
            .collect()
    };
    let phi = images(&source, &sm, &target, &sn, pm.generators())?;
    let psi = images(&target, &sn, &source, &sm, pn.generators())?;
    let witness = InterleavingWitness { epsilon: eps, phi, psi };
    verify_witness(&source, &target, &witness).map_err(MetricError::InvalidWitness)?;
    Ok(PresentedInterleaving { source, target, witness })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{join, leaf};

    fn fork() -> MergeTree {
        MergeTree::from_shape(&join(2.0, vec![leaf(0.0), leaf(1.0)]))
    }

    #[test]
    fn strands() {
        let r = 2.5;
        let (a, b) = (MergeTree::strand(0.0), MergeTree::strand(r));
        let w = interleaving_exists(&a, &b, r).unwrap().unwrap();
        verify_witness(&a, &b, &w).unwrap();
        assert!(interleaving_exists(&a, &b, r - 1e-9).unwrap().is_none());
        let d = interleaving_distance(&a, &b).unwrap();
        assert_eq!(d.distance, r);
    }

    #[test]
    fn identity_at_zero() {
        let t = MergeTree::from_shape(&join(5.0, vec![join(3.0, vec![leaf(0.0), leaf(1.0)]), leaf(2.0)]));
        let w = interleaving_exists(&t, &t, 0.0).unwrap().unwrap();
        assert_eq!(w.phi, t.leaves().to_vec());
        assert_eq!(interleaving_distance(&t, &t).unwrap().distance, 0.0);
    }

    #[test]
    fn fork_against_strand() {
        let (m, n) = (fork(), MergeTree::strand(0.0));
        assert!(interleaving_exists(&m, &n, 0.5).unwrap().is_some());
        assert!(interleaving_exists(&m, &n, 0.49).unwrap().is_none());
        let d = interleaving_distance(&m, &n).unwrap();
        assert_eq!(d.distance, 0.5);
        assert!(d.infeasible_below.unwrap() < 0.5);
    }

    #[test]
    fn instability_example_pair() {
        let m = MergeTree::strand(0.0);
        let n = MergeTree::from_shape(&join(1.0, vec![leaf(0.0), leaf(0.0), leaf(0.0)]));
        let d = interleaving_distance(&m, &n).unwrap();
        assert_eq!(d.distance, 0.5);
    }

    #[test]
    fn dropping_the_triangle_check_underestimates() {
        let (m, n) = (fork(), MergeTree::strand(0.0));
        let opts = InterleavingOptions { check_triangles: false };
        let d = interleaving_distance_with(&m, &n, opts).unwrap();
        assert_eq!(d.distance, 0.0);
        assert!(verify_witness(&m, &n, &d.witness).is_err());
    }

    #[test]
    fn verifier_rejects_broken_witness() {
        let (m, n) = (fork(), MergeTree::strand(0.0));
        let mut w = interleaving_exists(&m, &n, 0.5).unwrap().unwrap();
        verify_witness(&m, &n, &w).unwrap();
        w.epsilon = 0.25;
        assert!(verify_witness(&m, &n, &w).is_err());
    }

    #[test]
    fn conversions_round_trip() {
        let m = MergeTree::from_shape(&join(5.0, vec![join(3.0, vec![leaf(0.0), leaf(1.0)]), leaf(2.0)]));
        let n = fork();
        let d = interleaving_distance(&m, &n).unwrap();
        let (pm, pn) = interleaving_to_presentations(&m, &n, &d.witness).unwrap();
        assert!(are_compatible(&pm, &pn));
        assert!(pm.presents(&m, 0.0));
        assert!(pn.presents(&n, 0.0));
        let e = label_distance(&pm, &pn, Exponent::INFINITY).unwrap();
        assert!((e - d.distance).abs() < 1e-12);
        let back = presentations_to_interleaving(&pm, &pn).unwrap();
        assert!((back.witness.epsilon - d.distance).abs() < 1e-12);
        assert!(back.source.is_isomorphic(&m));
    }

    #[test]
    fn strands_conversion() {
        let (a, b) = (MergeTree::strand(0.0), MergeTree::strand(3.0));
        let d = interleaving_distance(&a, &b).unwrap();
        let (pa, pb) = interleaving_to_presentations(&a, &b, &d.witness).unwrap();
        assert_eq!(label_distance(&pa, &pb, Exponent::INFINITY).unwrap(), 3.0);
    }

    #[test]
    fn scale_guard() {
        let big = MergeTree::from_shape(&join(20.0, (0..11).map(|i| leaf(i as f64)).collect()));
        assert!(matches!(interleaving_distance(&big, &big), Err(MetricError::ScaleGuard { .. })));
    }
}
