//! p-Wasserstein and bottleneck distances between barcodes.
//!
//! A matching is a partial bijection between the bars of two barcodes.
//! Matched bars `[a,b)` and `[c,d)` cost `‖(a,b) − (c,d)‖_p`; an unmatched
//! bar `[a,b)` costs its distance to the midpoint interval, which is
//! `((b − a)/2) · 2^{1/p}`, or `(b − a)/2` when `p = ∞`. Unbounded bars
//! can only be matched to unbounded bars, at cost `|a − c|`.

use serde::{Deserialize, Serialize};

use super::barcode::{Barcode, Interval};
use super::MetricError;
use crate::norm::Exponent;

/// Pairs `(index into B, index into C)`; bars not listed are unmatched.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Matching {
    pub pairs: Vec<(usize, usize)>,
}

pub const BRUTE_FORCE_LIMIT: usize = 8;

fn check(b: &Barcode) -> Result<(), MetricError> {
    match b.bars.iter().find(|i| !i.is_valid()) {
        Some(&i) => Err(MetricError::InvalidInterval(i)),
        None => Ok(()),
    }
}

/// `‖I − J‖_p^p` for finite p, or `‖I − J‖_∞` for p = ∞.
fn match_cost(i: &Interval, j: &Interval, p: Exponent) -> f64 {
    let db = (i.birth - j.birth).abs();
    let dd = if i.is_essential() && j.is_essential() { 0.0 } else { (i.death - j.death).abs() };
    if p.is_infinite() {
        db.max(dd)
    } else {
        db.powf(p.value()) + dd.powf(p.value())
    }
}

/// `‖I − Mid(I)‖_p^p` for finite p, or `‖I − Mid(I)‖_∞`.
fn deletion_cost(i: &Interval, p: Exponent) -> f64 {
    let half = (i.death - i.birth) / 2.0;
    if p.is_infinite() {
        half
    } else {
        2.0 * half.powf(p.value())
    }
}

fn root(total: f64, p: Exponent) -> f64 {
    if p.is_infinite() || p.value() == 1.0 {
        total
    } else {
        total.powf(1.0 / p.value())
    }
}

fn split(b: &Barcode) -> (Vec<usize>, Vec<usize>) {
    let mut ess: Vec<usize> = (0..b.len()).filter(|&i| b.bars[i].is_essential()).collect();
    ess.sort_by(|&x, &y| b.bars[x].birth.total_cmp(&b.bars[y].birth).then(x.cmp(&y)));
    let fin = (0..b.len()).filter(|&i| !b.bars[i].is_essential()).collect();
    (ess, fin)
}

/// Optimal matching distance. Returns `+∞` with an empty matching when the
/// numbers of unbounded bars differ.
pub fn wasserstein(b: &Barcode, c: &Barcode, p: Exponent) -> Result<(f64, Matching), MetricError> {
    check(b)?;
    check(c)?;
    let (eb, fb) = split(b);
    let (ec, fc) = split(c);
    if eb.len() != ec.len() {
        return Ok((f64::INFINITY, Matching::default()));
    }
    // sorted matching of unbounded bars is optimal for every p
    let mut pairs: Vec<(usize, usize)> = eb.iter().copied().zip(ec.iter().copied()).collect();
    let ess_costs = pairs.iter().map(|&(i, j)| match_cost(&b.bars[i], &c.bars[j], p));

    let (n, m) = (fb.len(), fc.len());
    let size = n + m;
    let cost = |i: usize, j: usize| -> f64 {
        match (i < n, j < m) {
            (true, true) => match_cost(&b.bars[fb[i]], &c.bars[fc[j]], p),
            (true, false) => deletion_cost(&b.bars[fb[i]], p),
            (false, true) => deletion_cost(&c.bars[fc[j]], p),
            (false, false) => 0.0,
        }
    };
    let assignment = if p.is_infinite() {
        bottleneck_assignment(size, &cost)
    } else {
        let matrix: Vec<Vec<f64>> = (0..size).map(|i| (0..size).map(|j| cost(i, j)).collect()).collect();
        hungarian(&matrix)
    };
    let fin_costs = assignment.iter().enumerate().map(|(i, &j)| cost(i, j));
    let total = if p.is_infinite() {
        ess_costs.chain(fin_costs).fold(0.0, f64::max)
    } else {
        ess_costs.chain(fin_costs).sum()
    };
    for (i, &j) in assignment.iter().enumerate() {
        if i < n && j < m {
            pairs.push((fb[i], fc[j]));
        }
    }
    pairs.sort_unstable();
    Ok((root(total, p), Matching { pairs }))
}

/// The p-cost of a given matching, evaluated directly from the definition.
pub fn matching_cost(b: &Barcode, c: &Barcode, matching: &Matching, p: Exponent) -> f64 {
    let mut used_b = vec![false; b.len()];
    let mut used_c = vec![false; c.len()];
    let mut terms = Vec::new();
    for &(i, j) in &matching.pairs {
        used_b[i] = true;
        used_c[j] = true;
        let (x, y) = (&b.bars[i], &c.bars[j]);
        if x.is_essential() != y.is_essential() {
            return f64::INFINITY;
        }
        terms.push(match_cost(x, y, p));
    }
    for (bar, used) in b.bars.iter().zip(&used_b).chain(c.bars.iter().zip(&used_c)) {
        if !used {
            if bar.is_essential() {
                return f64::INFINITY;
            }
            terms.push(deletion_cost(bar, p));
        }
    }
    if p.is_infinite() {
        terms.into_iter().fold(0.0, f64::max)
    } else {
        root(terms.into_iter().sum(), p)
    }
}

/// Minimum-cost perfect assignment on a square matrix (rows to columns),
/// by the shortest augmenting path method with potentials.
pub fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        assignment[owner[j] - 1] = j - 1;
    }
    assignment
}

/// Perfect matching minimizing the largest cost: binary search over the
/// sorted distinct costs, each threshold tested by augmenting paths.
fn bottleneck_assignment(n: usize, cost: &dyn Fn(usize, usize) -> f64) -> Vec<usize> {
    if n == 0 {
        return Vec::new();
    }
    let mut candidates: Vec<f64> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| cost(i, j)).collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    let (mut lo, mut hi) = (0, candidates.len() - 1);
    let mut best = perfect_matching(n, &|i, j| cost(i, j) <= candidates[hi]).expect("complete graph");
    while lo < hi {
        let mid = (lo + hi) / 2;
        match perfect_matching(n, &|i, j| cost(i, j) <= candidates[mid]) {
            Some(m) => {
                best = m;
                hi = mid;
            }
            None => lo = mid + 1,
        }
    }
    best
}

/// Kuhn's augmenting path algorithm; returns row -> column if perfect.
fn perfect_matching(n: usize, edge: &dyn Fn(usize, usize) -> bool) -> Option<Vec<usize>> {
    fn augment(i: usize, n: usize, edge: &dyn Fn(usize, usize) -> bool, seen: &mut [bool], col_owner: &mut [usize]) -> bool {
        for j in 0..n {
            if edge(i, j) && !seen[j] {
                seen[j] = true;
                if col_owner[j] == usize::MAX || augment(col_owner[j], n, edge, seen, col_owner) {
                    col_owner[j] = i;
                    return true;
                }
            }
        }
        false
    }
    let mut col_owner = vec![usize::MAX; n];
    for i in 0..n {
        let mut seen = vec![false; n];
        if !augment(i, n, edge, &mut seen, &mut col_owner) {
            return None;
        }
    }
    let mut rows = vec![0; n];
    for (j, &i) in col_owner.iter().enumerate() {
        rows[i] = j;
    }
    Some(rows)
}

/// Exact distance by enumerating every partial bijection. Only for
/// `|B| + |C| <= 8`.
pub fn wasserstein_brute_force(b: &Barcode, c: &Barcode, p: Exponent) -> Result<f64, MetricError> {
    check(b)?;
    check(c)?;
    let size = b.len() + c.len();
    if size > BRUTE_FORCE_LIMIT {
        return Err(MetricError::ScaleGuard { what: "bars in brute-force matching", size, limit: BRUTE_FORCE_LIMIT });
    }
    // Term for a pair or for a lone bar; `None` is an infinite cost.
    let pair_term = |x: &Interval, y: &Interval| -> Option<f64> {
        match (x.is_essential(), y.is_essential()) {
            (true, true) => Some(power((x.birth - y.birth).abs(), p)),
            (false, false) => {
                let (u, w) = ((x.birth - y.birth).abs(), (x.death - y.death).abs());
                Some(if p.is_infinite() { u.max(w) } else { power(u, p) + power(w, p) })
            }
            _ => None,
        }
    };
    let lone_term = |x: &Interval| -> Option<f64> {
        if x.is_essential() {
            return None;
        }
        let h = (x.death - x.birth) / 2.0;
        Some(if p.is_infinite() { h } else { power(h, p) + power(h, p) })
    };
    let combine = |acc: f64, t: f64| if p.is_infinite() { acc.max(t) } else { acc + t };

    fn rec(
        i: usize,
        b: &Barcode,
        c: &Barcode,
        used: &mut Vec<bool>,
        acc: f64,
        pair_term: &dyn Fn(&Interval, &Interval) -> Option<f64>,
        lone_term: &dyn Fn(&Interval) -> Option<f64>,
        combine: &dyn Fn(f64, f64) -> f64,
        best: &mut f64,
    ) {
        if i == b.len() {
            let mut total = acc;
            for (j, y) in c.bars.iter().enumerate() {
                if !used[j] {
                    match lone_term(y) {
                        Some(t) => total = combine(total, t),
                        None => return,
                    }
                }
            }
            *best = best.min(total);
            return;
        }
        let x = &b.bars[i];
        if let Some(t) = lone_term(x) {
            rec(i + 1, b, c, used, combine(acc, t), pair_term, lone_term, combine, best);
        }
        for j in 0..c.len() {
            if !used[j] {
                if let Some(t) = pair_term(x, &c.bars[j]) {
                    used[j] = true;
                    rec(i + 1, b, c, used, combine(acc, t), pair_term, lone_term, combine, best);
                    used[j] = false;
                }
            }
        }
    }
    let mut best = f64::INFINITY;
    rec(0, b, c, &mut vec![false; c.len()], 0.0, &pair_term, &lone_term, &combine, &mut best);
    Ok(if best.is_infinite() || p.is_infinite() { best } else { best.powf(1.0 / p.value()) })
}

fn power(x: f64, p: Exponent) -> f64 {
    if p.is_infinite() {
        x
    } else {
        x.powf(p.value())
    }
}
