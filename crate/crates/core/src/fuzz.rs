//! Seeded randomized checks of the cross-module invariants.
//!
//! Every trial draws one instance per invariant from its own ChaCha stream,
//! so a run is determined by its seed and a failing trial can be replayed
//! alone. The first failure is shrunk greedily (dropping leaves, cells or
//! bars and rounding values) while it keeps failing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::filtration::{
    geometric_lift, incidence_presentation, is_monotone, lp_function_distance, random_monotone_pair,
    sublevel_merge_tree, CellComplex1, CellularFunction,
};
use crate::metrics::barcode::{elder_barcode, Barcode, Interval};
use crate::metrics::bracket::{lower_bound, presentation_distance_bracket};
use crate::metrics::interleaving::{
    interleaving_distance_with, interleaving_to_presentations, presentations_to_interleaving, InterleavingOptions,
    InterleavingResult,
};
use crate::metrics::semidistance::{semi_distance_upper, DEFAULT_BUDGET};
use crate::metrics::wasserstein::{wasserstein, wasserstein_brute_force};
use crate::metrics::MetricError;
use crate::norm::Exponent;
use crate::presentation::{are_compatible, label_distance, pad_concatenate, Presentation};
use crate::tree::{join, leaf, MergeTree, NodeIdx, Shape, TreeDoc};
use crate::TOLERANCE;

const EXPONENTS: [Exponent; 3] = [Exponent::ONE, Exponent::TWO, Exponent::INFINITY];

/// Deliberate defects used to check that the harness notices them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mutant {
    /// Decide interleavings without the triangle identities.
    DropTriangleCheck,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Invariant {
    /// Barcode distance ≤ label distance of incidence presentations =
    /// function distance, and `d_I ≤ ‖f − g‖_∞`.
    Stability,
    /// Interleaving witness → compatible pair → witness at the same ε.
    ConversionRoundTrip,
    /// At p = ∞ the bracket closes at the interleaving distance.
    InfinityBracket,
    /// Hungarian / bottleneck matching agrees with exhaustive enumeration.
    WassersteinOracle,
    /// Elder-rule bar counts agree with ranks of the evolution maps.
    ElderRank,
    /// Lifting a padded pair gives the original trees and the same distance.
    LiftingRoundTrip,
    /// Label distances and lower bounds do not increase with p.
    ExponentMonotonicity,
    /// Bottleneck distance of barcodes is at most the interleaving distance.
    BottleneckBelowInterleaving,
}

impl Invariant {
    pub const ALL: [Invariant; 8] = [
        Invariant::Stability,
        Invariant::ConversionRoundTrip,
        Invariant::InfinityBracket,
        Invariant::WassersteinOracle,
        Invariant::ElderRank,
        Invariant::LiftingRoundTrip,
        Invariant::ExponentMonotonicity,
        Invariant::BottleneckBelowInterleaving,
    ];
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuzzConfig {
    pub trials: usize,
    pub seed: u64,
    /// Effort bound for the semi-distance search.
    pub budget: usize,
    pub tolerance: f64,
    pub mutant: Option<Mutant>,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig { trials: 500, seed: 0, budget: DEFAULT_BUDGET, tolerance: TOLERANCE, mutant: None }
    }
}

impl FuzzConfig {
    fn interleaving(&self, m: &MergeTree, n: &MergeTree) -> Result<InterleavingResult, MetricError> {
        let opts = InterleavingOptions { check_triangles: self.mutant != Some(Mutant::DropTriangleCheck) };
        interleaving_distance_with(m, n, opts)
    }
}

/// A random input for one invariant, in a serializable form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Instance {
    MonotonePair { complex: CellComplex1, f: CellularFunction, g: CellularFunction },
    TreePair { m: TreeDoc, n: TreeDoc },
    /// Trees padded together at their settled height plus `pad`.
    PaddedPair { m: TreeDoc, n: TreeDoc, pad: f64 },
    BarcodePair { b: Barcode, c: Barcode },
    Tree { tree: TreeDoc },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantSummary {
    pub invariant: Invariant,
    pub trials: usize,
    pub failures: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub invariant: Invariant,
    pub trial: usize,
    pub message: String,
    pub instance: Instance,
    pub shrunk: Instance,
    pub shrunk_message: String,
    pub shrink_steps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuzzReport {
    pub config: FuzzConfig,
    pub summaries: Vec<InvariantSummary>,
    /// The first failure found, shrunk.
    pub failure: Option<Failure>,
    pub warnings: Vec<String>,
}

impl FuzzReport {
    pub fn passed(&self) -> bool {
        self.summaries.iter().all(|s| s.failures == 0)
    }

    pub fn total_failures(&self) -> usize {
        self.summaries.iter().map(|s| s.failures).sum()
    }
}

/// The generator for trial `trial` of invariant `k`.
pub fn trial_rng(seed: u64, trial: usize, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((trial as u64) * Invariant::ALL.len() as u64 + k as u64);
    rng
}

pub fn run_fuzz(config: &FuzzConfig) -> FuzzReport {
    let mut summaries: Vec<InvariantSummary> =
        Invariant::ALL.iter().map(|&invariant| InvariantSummary { invariant, trials: 0, failures: 0 }).collect();
    let mut warnings = Vec::new();
    if config.trials == 0 {
        warnings.push("zero trials requested: nothing was checked".to_string());
    }
    let mut failure = None;
    for trial in 0..config.trials {
        for (k, &inv) in Invariant::ALL.iter().enumerate() {
            let instance = generate(inv, &mut trial_rng(config.seed, trial, k));
            summaries[k].trials += 1;
            if let Err(message) = check_instance(inv, &instance, config) {
                summaries[k].failures += 1;
                if failure.is_none() {
                    let (shrunk, shrunk_message, shrink_steps) = shrink(inv, &instance, message.clone(), config);
                    failure = Some(Failure { invariant: inv, trial, message, instance, shrunk, shrunk_message, shrink_steps });
                }
            }
        }
    }
    FuzzReport { config: config.clone(), summaries, failure, warnings }
}

pub fn generate<R: Rng + ?Sized>(inv: Invariant, rng: &mut R) -> Instance {
    match inv {
        Invariant::Stability => {
            let (complex, f, g) = random_monotone_pair(rng, 12);
            Instance::MonotonePair { complex, f, g }
        }
        Invariant::ConversionRoundTrip
        | Invariant::InfinityBracket
        | Invariant::ExponentMonotonicity
        | Invariant::BottleneckBelowInterleaving => Instance::TreePair {
            m: random_tree(rng, 5, Some(0.25)).to_doc(),
            n: random_tree(rng, 5, Some(0.25)).to_doc(),
        },
        Invariant::WassersteinOracle => {
            let (b, c) = random_barcode_pair(rng, 8);
            Instance::BarcodePair { b, c }
        }
        Invariant::ElderRank => {
            let grid = if rng.gen_bool(0.5) { Some(0.25) } else { None };
            Instance::Tree { tree: random_tree(rng, 8, grid).to_doc() }
        }
        Invariant::LiftingRoundTrip => Instance::PaddedPair {
            m: random_tree(rng, 5, Some(0.25)).to_doc(),
            n: random_tree(rng, 5, Some(0.25)).to_doc(),
            pad: 0.25 * rng.gen_range(0..=4) as f64,
        },
    }
}

/// A random merge tree with at most `max_leaves` leaves. Heights are
/// multiples of `grid` when given, otherwise uniform. Random components are
/// joined pairwise at or above both of their heights, so equal heights
/// (and hence multi-way merges) are common on a grid.
pub fn random_tree<R: Rng + ?Sized>(rng: &mut R, max_leaves: usize, grid: Option<f64>) -> MergeTree {
    let k = rng.gen_range(1..=max_leaves.max(1));
    let draw = |rng: &mut R, steps: u32, span: f64| match grid {
        Some(g) => g * rng.gen_range(0..=steps) as f64,
        None => rng.gen_range(0.0..span),
    };
    let mut comps: Vec<(f64, Shape)> = (0..k)
        .map(|_| {
            let h = draw(rng, 8, 2.0);
            (h, leaf(h))
        })
        .collect();
    while comps.len() > 1 {
        let i = rng.gen_range(0..comps.len());
        let (hi, si) = comps.swap_remove(i);
        let j = rng.gen_range(0..comps.len());
        let (hj, sj) = comps.swap_remove(j);
        let h = hi.max(hj) + draw(rng, 4, 1.0);
        comps.push((h, join(h, vec![si, sj])));
    }
    MergeTree::from_shape(&comps.pop().unwrap().1)
}

/// Two random barcodes with at most `max_total` bars together. The numbers
/// of unbounded bars usually agree.
pub fn random_barcode_pair<R: Rng + ?Sized>(rng: &mut R, max_total: usize) -> (Barcode, Barcode) {
    let nb = rng.gen_range(0..=max_total / 2);
    let nc = rng.gen_range(0..=max_total - nb).min(max_total / 2);
    let grid = rng.gen_bool(0.5);
    let bar = |rng: &mut R| {
        let birth = if grid { 0.25 * rng.gen_range(0..=8) as f64 } else { rng.gen_range(0.0..2.0) };
        let length = if grid { 0.25 * rng.gen_range(0..=8) as f64 } else { rng.gen_range(0.0..2.0) };
        Interval::new(birth, birth + length)
    };
    let mut b: Vec<Interval> = (0..nb).map(|_| bar(rng)).collect();
    let mut c: Vec<Interval> = (0..nc).map(|_| bar(rng)).collect();
    let essentials = rng.gen_range(0..=nb.min(nc));
    let matched = rng.gen_bool(0.8);
    for (k, x) in b.iter_mut().enumerate().take(essentials) {
        x.death = f64::INFINITY;
        if matched {
            c[k].death = f64::INFINITY;
        }
    }
    if !matched && nc > 0 {
        c[0].death = f64::INFINITY;
    }
    (Barcode::new(b), Barcode::new(c))
}

fn tree(doc: &TreeDoc) -> Result<MergeTree, String> {
    MergeTree::from_doc(doc).map_err(|e| e.to_string())
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Runs one invariant on one instance; `Err` describes the violation.
pub fn check_instance(inv: Invariant, instance: &Instance, config: &FuzzConfig) -> Result<(), String> {
    let tol = config.tolerance;
    match (inv, instance) {
        (Invariant::Stability, Instance::MonotonePair { complex, f, g }) => check_stability(complex, f, g, config),
        (Invariant::ConversionRoundTrip, Instance::TreePair { m, n }) => {
            let (m, n) = (tree(m)?, tree(n)?);
            let il = config.interleaving(&m, &n).map_err(err)?;
            let (pm, pn) = interleaving_to_presentations(&m, &n, &il.witness).map_err(err)?;
            if !are_compatible(&pm, &pn) {
                return Err("presentations built from the witness are not compatible".into());
            }
            if !pm.presents(&m, tol) || !pn.presents(&n, tol) {
                return Err("presentations built from the witness do not present the trees".into());
            }
            let label = label_distance(&pm, &pn, Exponent::INFINITY).map_err(err)?;
            if (label - il.distance).abs() > tol {
                return Err(format!("∞-label distance {label} differs from ε = {}", il.distance));
            }
            let back = presentations_to_interleaving(&pm, &pn).map_err(err)?;
            if !back.source.is_isomorphic_within(&m, tol) || !back.target.is_isomorphic_within(&n, tol) {
                return Err("witness read off the pair interleaves the wrong trees".into());
            }
            if (back.witness.epsilon - il.distance).abs() > tol {
                return Err(format!("round trip changed ε from {} to {}", il.distance, back.witness.epsilon));
            }
            Ok(())
        }
        (Invariant::InfinityBracket, Instance::TreePair { m, n }) => {
            let (m, n) = (tree(m)?, tree(n)?);
            let d = config.interleaving(&m, &n).map_err(err)?.distance;
            let br = presentation_distance_bracket(&m, &n, Exponent::INFINITY, &[], config.budget).map_err(err)?;
            if br.lower != br.upper || (br.upper - d).abs() > tol {
                return Err(format!("bracket [{}, {}] at p = ∞ does not close at d_I = {d}", br.lower, br.upper));
            }
            Ok(())
        }
        (Invariant::WassersteinOracle, Instance::BarcodePair { b, c }) => {
            for p in EXPONENTS {
                let (fast, _) = wasserstein(b, c, p).map_err(err)?;
                let slow = wasserstein_brute_force(b, c, p).map_err(err)?;
                let agree = if p.is_infinite() || fast.is_infinite() || slow.is_infinite() {
                    fast == slow
                } else {
                    (fast - slow).abs() <= tol
                };
                if !agree {
                    return Err(format!("p = {p}: matching gives {fast}, enumeration gives {slow}"));
                }
            }
            Ok(())
        }
        (Invariant::ElderRank, Instance::Tree { tree: doc }) => {
            let t = tree(doc)?;
            let bars = elder_barcode(&t);
            let times = t.critical_times();
            for (a, &s) in times.iter().enumerate() {
                for &u in &times[a..] {
                    let rank = t.evolution_map(s, u).map_err(err)?.image_size();
                    if bars.rank(s, u) != rank {
                        return Err(format!("rank({s}, {u}) is {rank} but {} bars contain [{s}, {u}]", bars.rank(s, u)));
                    }
                }
            }
            Ok(())
        }
        (Invariant::LiftingRoundTrip, Instance::PaddedPair { m, n, pad }) => {
            let (m, n) = (tree(m)?, tree(n)?);
            let (pm, pn) = (Presentation::minimal(&m), Presentation::minimal(&n));
            let t = pm.settled_height().map_err(err)?.max(pn.settled_height().map_err(err)?) + pad;
            let (pm, pn) = pad_concatenate(&pm, &pn, t).map_err(err)?;
            check_lift(&pm, &pn)
        }
        (Invariant::ExponentMonotonicity, Instance::TreePair { m, n }) => {
            let (m, n) = (tree(m)?, tree(n)?);
            let cert = semi_distance_upper(&m, &n, Exponent::ONE, config.budget).map_err(err)?;
            let labels: Vec<f64> =
                EXPONENTS.iter().map(|&p| label_distance(&cert.pm, &cert.pn, p)).collect::<Result<_, _>>().map_err(err)?;
            check_non_increasing("label distance of the certificate", &labels, tol)?;
            let mut lowers = Vec::new();
            for p in EXPONENTS {
                let (lc, _) = lower_bound(&m, &n, p).map_err(err)?;
                lowers.push(lc.wasserstein.max(lc.interleaving));
            }
            check_non_increasing("lower bound", &lowers, tol)
        }
        (Invariant::BottleneckBelowInterleaving, Instance::TreePair { m, n }) => {
            let (m, n) = (tree(m)?, tree(n)?);
            let (db, _) = wasserstein(&elder_barcode(&m), &elder_barcode(&n), Exponent::INFINITY).map_err(err)?;
            let di = config.interleaving(&m, &n).map_err(err)?.distance;
            if db > di + tol {
                return Err(format!("bottleneck distance {db} exceeds interleaving distance {di}"));
            }
            Ok(())
        }
        (inv, _) => Err(format!("instance kind does not fit invariant {inv:?}")),
    }
}

fn check_non_increasing(what: &str, values: &[f64], tol: f64) -> Result<(), String> {
    for (w, p) in values.windows(2).zip(["1 vs 2", "2 vs ∞"]) {
        if w[1] > w[0] + tol {
            return Err(format!("{what} increases with p ({p}): {} < {}", w[0], w[1]));
        }
    }
    Ok(())
}

fn check_stability(x: &CellComplex1, f: &CellularFunction, g: &CellularFunction, config: &FuzzConfig) -> Result<(), String> {
    let tol = config.tolerance;
    let (m, n) = (sublevel_merge_tree(x, f).map_err(err)?, sublevel_merge_tree(x, g).map_err(err)?);
    let (pf, pg) = (incidence_presentation(x, f).map_err(err)?, incidence_presentation(x, g).map_err(err)?);
    let (bm, bn) = (elder_barcode(&m), elder_barcode(&n));
    for p in EXPONENTS {
        let label = label_distance(&pf, &pg, p).map_err(err)?;
        let func = lp_function_distance(f, g, p).map_err(err)?;
        if label != func {
            return Err(format!("p = {p}: label distance {label} differs from function distance {func}"));
        }
        let (w, _) = wasserstein(&bm, &bn, p).map_err(err)?;
        if w > label + tol {
            return Err(format!("p = {p}: barcode distance {w} exceeds label distance {label}"));
        }
    }
    let di = config.interleaving(&m, &n).map_err(err)?.distance;
    let sup = lp_function_distance(f, g, Exponent::INFINITY).map_err(err)?;
    if di > sup + tol {
        return Err(format!("interleaving distance {di} exceeds sup distance {sup}"));
    }
    Ok(())
}

/// Lift a compatible pair and compare trees and distances with the pair.
pub fn check_lift(pm: &Presentation, pn: &Presentation) -> Result<(), String> {
    let lift = geometric_lift(pm, pn).map_err(err)?;
    if !lift.dropped_self_relations.is_empty() {
        return Err(format!("relations {:?} could not be lifted", lift.dropped_self_relations));
    }
    let m = sublevel_merge_tree(&lift.complex, &lift.f).map_err(err)?;
    let n = sublevel_merge_tree(&lift.complex, &lift.g).map_err(err)?;
    if !m.is_isomorphic(&pm.coequalize_tree().map_err(err)?) || !n.is_isomorphic(&pn.coequalize_tree().map_err(err)?) {
        return Err("sublevel trees of the lift differ from the coequalizers".into());
    }
    for p in EXPONENTS {
        let (a, b) = (lp_function_distance(&lift.f, &lift.g, p).map_err(err)?, label_distance(pm, pn, p).map_err(err)?);
        if a != b {
            return Err(format!("p = {p}: function distance {a} differs from label distance {b}"));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- shrinking

const SHRINK_LIMIT: usize = 500;

/// Greedy shrinking: repeatedly replace the instance by the first smaller
/// candidate that still fails, until none does.
pub fn shrink(inv: Invariant, instance: &Instance, message: String, config: &FuzzConfig) -> (Instance, String, usize) {
    let mut current = instance.clone();
    let mut message = message;
    let mut steps = 0;
    'outer: while steps < SHRINK_LIMIT {
        for cand in candidates(&current) {
            if let Err(m) = check_instance(inv, &cand, config) {
                current = cand;
                message = m;
                steps += 1;
                continue 'outer;
            }
        }
        break;
    }
    (current, message, steps)
}

fn candidates(instance: &Instance) -> Vec<Instance> {
    match instance {
        Instance::TreePair { m, n } => {
            let mut out: Vec<Instance> =
                tree_candidates(m).into_iter().map(|m| Instance::TreePair { m, n: n.clone() }).collect();
            out.extend(tree_candidates(n).into_iter().map(|n| Instance::TreePair { m: m.clone(), n }));
            out
        }
        Instance::PaddedPair { m, n, pad } => {
            let mut out = Vec::new();
            if *pad != 0.0 {
                out.push(Instance::PaddedPair { m: m.clone(), n: n.clone(), pad: 0.0 });
            }
            out.extend(tree_candidates(m).into_iter().map(|m| Instance::PaddedPair { m, n: n.clone(), pad: *pad }));
            out.extend(tree_candidates(n).into_iter().map(|n| Instance::PaddedPair { m: m.clone(), n, pad: *pad }));
            out
        }
        Instance::Tree { tree } => tree_candidates(tree).into_iter().map(|tree| Instance::Tree { tree }).collect(),
        Instance::BarcodePair { b, c } => {
            let mut out = Vec::new();
            for k in 0..b.len() {
                let mut bars = b.bars.clone();
                bars.remove(k);
                out.push(Instance::BarcodePair { b: Barcode::new(bars), c: c.clone() });
            }
            for k in 0..c.len() {
                let mut bars = c.bars.clone();
                bars.remove(k);
                out.push(Instance::BarcodePair { b: b.clone(), c: Barcode::new(bars) });
            }
            for step in [1.0, 0.5] {
                let (rb, rc) = (round_barcode(b, step), round_barcode(c, step));
                if (&rb, &rc) != (b, c) {
                    out.push(Instance::BarcodePair { b: rb, c: rc });
                }
            }
            out
        }
        Instance::MonotonePair { complex, f, g } => complex_candidates(complex, f, g),
    }
}

fn round_to(x: f64, step: f64) -> f64 {
    (x / step).round() * step
}

fn round_barcode(b: &Barcode, step: f64) -> Barcode {
    Barcode::new(
        b.bars
            .iter()
            .map(|i| {
                let birth = round_to(i.birth, step);
                let death = if i.is_essential() { i.death } else { round_to(i.death, step).max(birth) };
                Interval::new(birth, death)
            })
            .collect(),
    )
}

fn shape_of(t: &MergeTree, v: NodeIdx, skip: Option<NodeIdx>, h: &dyn Fn(f64) -> f64) -> Option<Shape> {
    if Some(v) == skip {
        return None;
    }
    let node = t.node(v);
    if node.is_leaf() {
        return Some(leaf(h(node.height)));
    }
    let children: Vec<Shape> = node.children.iter().filter_map(|&c| shape_of(t, c, skip, h)).collect();
    Some(join(h(node.height), children))
}

fn tree_candidates(doc: &TreeDoc) -> Vec<TreeDoc> {
    let Ok(t) = MergeTree::from_doc(doc) else { return Vec::new() };
    let mut out = Vec::new();
    if t.leaf_count() > 1 {
        for &l in t.leaves() {
            if let Some(s) = shape_of(&t, t.root(), Some(l), &|x| x) {
                out.push(MergeTree::from_shape(&s).to_doc());
            }
        }
    }
    let low = t.min_height();
    let transforms: [&dyn Fn(f64) -> f64; 3] = [&|x| x - low, &|x| round_to(x, 1.0), &|x| round_to(x, 0.5)];
    for h in transforms {
        if let Some(s) = shape_of(&t, t.root(), None, h) {
            let d = MergeTree::from_shape(&s).to_doc();
            if &d != doc {
                out.push(d);
            }
        }
    }
    out
}

fn complex_candidates(x: &CellComplex1, f: &CellularFunction, g: &CellularFunction) -> Vec<Instance> {
    let mut out = Vec::new();
    let mut push = |complex: CellComplex1, f: CellularFunction, g: CellularFunction| {
        if complex.component_count() == 1 && is_monotone(&complex, &f) == Ok(true) && is_monotone(&complex, &g) == Ok(true) {
            out.push(Instance::MonotonePair { complex, f, g });
        }
    };
    // drop an edge
    for j in 0..x.edge_count() {
        let mut edges = x.edges().to_vec();
        edges.remove(j);
        let drop = |h: &CellularFunction| {
            let mut e = h.edge_values.clone();
            e.remove(j);
            CellularFunction::new(h.vertex_values.clone(), e)
        };
        if let Ok(c) = CellComplex1::new(x.vertex_count(), edges) {
            push(c, drop(f), drop(g));
        }
    }
    // drop a vertex with its edges
    if x.vertex_count() > 1 {
        for v in 0..x.vertex_count() {
            let keep: Vec<usize> = (0..x.edge_count()).filter(|&j| x.edges()[j].0 != v && x.edges()[j].1 != v).collect();
            let re = |w: usize| if w > v { w - 1 } else { w };
            let edges = keep.iter().map(|&j| (re(x.edges()[j].0), re(x.edges()[j].1))).collect();
            let drop = |h: &CellularFunction| {
                let mut vv = h.vertex_values.clone();
                vv.remove(v);
                CellularFunction::new(vv, keep.iter().map(|&j| h.edge_values[j]).collect())
            };
            if let Ok(c) = CellComplex1::new(x.vertex_count() - 1, edges) {
                push(c, drop(f), drop(g));
            }
        }
    }
    // round values, then lift edges back above their endpoints
    for step in [1.0, 0.5, 0.25] {
        let round = |h: &CellularFunction| {
            let vv: Vec<f64> = h.vertex_values.iter().map(|&y| round_to(y, step)).collect();
            let ev = x
                .edges()
                .iter()
                .zip(&h.edge_values)
                .map(|(&(a, b), &y)| round_to(y, step).max(vv[a]).max(vv[b]))
                .collect();
            CellularFunction::new(vv, ev)
        };
        let (rf, rg) = (round(f), round(g));
        if (&rf, &rg) != (f, g) {
            push(x.clone(), rf, rg);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_run_passes() {
        let report = run_fuzz(&FuzzConfig { trials: 20, seed: 3, ..FuzzConfig::default() });
        assert!(report.passed(), "{:?}", report.failure);
        assert!(report.summaries.iter().all(|s| s.trials == 20));
    }

    #[test]
    fn zero_trials_warns() {
        let report = run_fuzz(&FuzzConfig { trials: 0, ..FuzzConfig::default() });
        assert!(report.passed());
        assert_eq!(report.warnings.len(), 1);
    }

    #[test]
    fn mutant_is_caught_and_shrunk() {
        let config = FuzzConfig { trials: 30, seed: 1, mutant: Some(Mutant::DropTriangleCheck), ..FuzzConfig::default() };
        let report = run_fuzz(&config);
        assert!(!report.passed());
        let failure = report.failure.unwrap();
        assert!(check_instance(failure.invariant, &failure.shrunk, &config).is_err());
        // the shrunk instance passes with the real decision procedure
        let honest = FuzzConfig { mutant: None, ..config };
        assert!(check_instance(failure.invariant, &failure.shrunk, &honest).is_ok());
        let s = serde_json::to_string(&failure.shrunk).unwrap();
        assert_eq!(serde_json::from_str::<Instance>(&s).unwrap(), failure.shrunk);
    }

    #[test]
    fn runs_are_deterministic() {
        let config = FuzzConfig { trials: 5, seed: 11, ..FuzzConfig::default() };
        let a = serde_json::to_string(&run_fuzz(&config)).unwrap();
        let b = serde_json::to_string(&run_fuzz(&config)).unwrap();
        assert_eq!(a, b);
        let mut r1 = trial_rng(11, 2, 0);
        let mut r2 = trial_rng(11, 2, 0);
        assert_eq!(generate(Invariant::Stability, &mut r1), generate(Invariant::Stability, &mut r2));
    }

    #[test]
    fn shrinking_a_tree_drops_leaves() {
        let t = MergeTree::from_shape(&join(5.0, vec![join(3.0, vec![leaf(0.0), leaf(1.0)]), leaf(2.0)]));
        let c = tree_candidates(&t.to_doc());
        assert!(c.iter().any(|d| MergeTree::from_doc(d).unwrap().leaf_count() == 2));
    }

    #[test]
    fn random_trees_respect_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let t = random_tree(&mut rng, 5, Some(0.25));
            assert!(t.leaf_count() <= 5);
            assert!(t.nodes().iter().all(|n| (n.height / 0.25).fract() == 0.0));
            let (b, c) = random_barcode_pair(&mut rng, 8);
            assert!(b.len() + c.len() <= 8);
        }
    }
}
