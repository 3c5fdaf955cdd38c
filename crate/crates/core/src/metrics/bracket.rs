//! Certified brackets for the p-presentation distance.
//!
//! The lower bound is the larger of the Wasserstein distance between
//! elder-rule barcodes and the interleaving distance. The upper bound is
//! the cheapest path from `M` to `N` through optional pivot trees, each
//! step weighted by the best semi-distance certificate found for it.

use serde::{Deserialize, Serialize};

use super::barcode::elder_barcode;
use super::interleaving::{interleaving_distance, InterleavingResult, WitnessTable};
use super::semidistance::{semi_distance_upper, SemiDistanceResult};
use super::wasserstein::{wasserstein, Matching};
use super::MetricError;
use crate::norm::Exponent;
use crate::tree::MergeTree;
use crate::TOLERANCE;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerCertificate {
    pub wasserstein: f64,
    pub matching: Matching,
    pub interleaving: f64,
    pub witness: WitnessTable,
    /// Largest candidate below the interleaving distance, shown infeasible.
    pub infeasible_below: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathStep {
    /// Tree indices: 0 is `M`, 1 is `N`, `2 + i` is pivot `i`.
    pub from: usize,
    pub to: usize,
    pub certificate: SemiDistanceResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperCertificate {
    pub path: Vec<usize>,
    pub steps: Vec<PathStep>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceBracket {
    pub p: Exponent,
    pub lower: f64,
    pub upper: f64,
    pub lower_certificate: LowerCertificate,
    pub upper_certificate: UpperCertificate,
}

impl DistanceBracket {
    /// Sum of the certificate values along the path.
    pub fn path_value(&self) -> f64 {
        self.upper_certificate.steps.iter().map(|s| s.certificate.value).sum()
    }
}

pub fn lower_bound(m: &MergeTree, n: &MergeTree, p: Exponent) -> Result<(LowerCertificate, InterleavingResult), MetricError> {
    let (w, matching) = wasserstein(&elder_barcode(m), &elder_barcode(n), p)?;
    let il = interleaving_distance(m, n)?;
    Ok((
        LowerCertificate {
            wasserstein: w,
            matching,
            interleaving: il.distance,
            witness: il.witness.table(m, n),
            infeasible_below: il.infeasible_below,
        },
        il,
    ))
}

pub fn presentation_distance_bracket(
    m: &MergeTree,
    n: &MergeTree,
    p: Exponent,
    pivots: &[MergeTree],
    budget: usize,
) -> Result<DistanceBracket, MetricError> {
    let (lower_certificate, il) = lower_bound(m, n, p)?;
    let mut lower = lower_certificate.wasserstein.max(il.distance);

    let trees: Vec<&MergeTree> = [m, n].into_iter().chain(pivots.iter()).collect();
    let k = trees.len();
    let mut weight: Vec<Vec<Option<SemiDistanceResult>>> = vec![vec![None; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let r = semi_distance_upper(trees[i], trees[j], p, budget)?;
            weight[j][i] = Some(SemiDistanceResult { pm: r.pn.clone(), pn: r.pm.clone(), ..r.clone() });
            weight[i][j] = Some(r);
        }
    }

    // Dijkstra from M (0) to N (1) on the complete graph.
    let mut dist = vec![f64::INFINITY; k];
    let mut prev = vec![usize::MAX; k];
    let mut done = vec![false; k];
    dist[0] = 0.0;
    for _ in 0..k {
        let u = (0..k).filter(|&v| !done[v]).min_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b))).unwrap();
        done[u] = true;
        for v in 0..k {
            if v != u && !done[v] {
                let d = dist[u] + weight[u][v].as_ref().unwrap().value;
                if d < dist[v] {
                    dist[v] = d;
                    prev[v] = u;
                }
            }
        }
    }
    let mut path = vec![1usize];
    while *path.last().unwrap() != 0 {
        path.push(prev[*path.last().unwrap()]);
    }
    path.reverse();
    let steps: Vec<PathStep> = path
        .windows(2)
        .map(|w| PathStep { from: w[0], to: w[1], certificate: weight[w[0]][w[1]].clone().unwrap() })
        .collect();
    let mut upper: f64 = steps.iter().map(|s| s.certificate.value).sum();

    if upper < lower - TOLERANCE {
        return Err(MetricError::TheoremViolation(format!(
            "upper certificate {upper} lies below the lower bound {lower}"
        )));
    }
    if p.is_infinite() {
        if upper > il.distance + TOLERANCE {
            return Err(MetricError::TheoremViolation(format!(
                "no certificate within tolerance of the interleaving distance {} (best {upper})",
                il.distance
            )));
        }
        lower = il.distance;
        upper = il.distance;
    } else if upper < lower {
        // the two differ only by rounding; keep the certified order
        lower = upper;
    }

    Ok(DistanceBracket {
        p,
        lower,
        upper,
        lower_certificate,
        upper_certificate: UpperCertificate { path, steps },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::semidistance::DEFAULT_BUDGET;
    use crate::tree::{join, leaf};

    #[test]
    fn infinity_collapses() {
        let a = MergeTree::from_shape(&join(3.0, vec![leaf(0.0), leaf(1.0)]));
        let b = MergeTree::strand(0.5);
        let br = presentation_distance_bracket(&a, &b, Exponent::INFINITY, &[], DEFAULT_BUDGET).unwrap();
        assert_eq!(br.lower, br.upper);
        assert_eq!(br.lower, interleaving_distance(&a, &b).unwrap().distance);
    }

    #[test]
    fn equal_trees() {
        let a = MergeTree::from_shape(&join(3.0, vec![leaf(0.0), leaf(1.0)]));
        let br = presentation_distance_bracket(&a, &a, Exponent::ONE, &[], DEFAULT_BUDGET).unwrap();
        assert_eq!((br.lower, br.upper), (0.0, 0.0));
    }

    #[test]
    fn pivot_beats_direct_path() {
        let r = 10.0;
        let n = MergeTree::from_shape(&join(1.0, vec![leaf(0.0), leaf(0.0)]));
        let q = MergeTree::strand(r);
        let m = MergeTree::strand(0.0);
        let br = presentation_distance_bracket(&n, &q, Exponent::ONE, &[m], DEFAULT_BUDGET).unwrap();
        assert!(br.upper <= 11.0, "{}", br.upper);
        assert_eq!(br.upper_certificate.path, vec![0, 2, 1]);
        assert!(br.lower <= br.upper);
    }
}
