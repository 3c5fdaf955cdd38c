//! Monotone cellular functions on 1-dimensional regular cell complexes.
//!
//! A function assigns a value to every vertex and every edge; it is monotone
//! when each edge is valued at least as high as both of its endpoints. The
//! connected components of the sublevel subcomplexes form a merge forest,
//! and the incidence matrix of the complex, labelled by the function values,
//! is a presentation of it.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::norm::{lp_distance, Exponent};
use crate::presentation::{are_compatible, Presentation, PresentationError, Relation};
use crate::sweep::sweep;
use crate::tree::{MergeForest, MergeTree};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FiltrationError {
    #[error("a complex needs at least one vertex")]
    NoVertices,
    #[error("edge {edge} has endpoint {vertex}, but there are only {count} vertices")]
    EndpointOutOfRange { edge: usize, vertex: usize, count: usize },
    #[error("edge {edge} is a loop at vertex {vertex}; the complex must be regular")]
    Loop { edge: usize, vertex: usize },
    #[error(
        "function has {vertex_values} vertex and {edge_values} edge values, \
         the complex has {vertices} vertices and {edges} edges"
    )]
    DimensionMismatch { vertex_values: usize, edge_values: usize, vertices: usize, edges: usize },
    #[error("function value {0} is not finite")]
    NonFinite(f64),
    #[error("edge {edge} has value {value}, below the value {vertex_value} of its endpoint {vertex}")]
    NotMonotone { edge: usize, value: f64, vertex: usize, vertex_value: f64 },
    #[error("the sublevel filtration ends with {0} components, a merge tree needs one")]
    Disconnected(usize),
    #[error(transparent)]
    Presentation(#[from] PresentationError),
}

#[derive(Serialize, Deserialize)]
struct RawComplex {
    vertex_count: usize,
    #[serde(default)]
    edges: Vec<(usize, usize)>,
}

/// A regular 1-dimensional cell complex: vertices `0..vertex_count` and
/// edges between distinct vertices. Parallel edges are allowed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawComplex", into = "RawComplex")]
pub struct CellComplex1 {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
}

impl TryFrom<RawComplex> for CellComplex1 {
    type Error = FiltrationError;

    fn try_from(raw: RawComplex) -> Result<Self, Self::Error> {
        CellComplex1::new(raw.vertex_count, raw.edges)
    }
}

impl From<CellComplex1> for RawComplex {
    fn from(x: CellComplex1) -> Self {
        RawComplex { vertex_count: x.vertex_count, edges: x.edges }
    }
}

impl CellComplex1 {
    pub fn new(vertex_count: usize, edges: Vec<(usize, usize)>) -> Result<Self, FiltrationError> {
        if vertex_count == 0 {
            return Err(FiltrationError::NoVertices);
        }
        for (j, &(a, b)) in edges.iter().enumerate() {
            for v in [a, b] {
                if v >= vertex_count {
                    return Err(FiltrationError::EndpointOutOfRange { edge: j, vertex: v, count: vertex_count });
                }
            }
            if a == b {
                return Err(FiltrationError::Loop { edge: j, vertex: a });
            }
        }
        Ok(CellComplex1 { vertex_count, edges })
    }

    /// A path on `vertex_count` vertices.
    pub fn path(vertex_count: usize) -> Result<Self, FiltrationError> {
        Self::new(vertex_count, (1..vertex_count).map(|v| (v - 1, v)).collect())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn cell_count(&self) -> usize {
        self.vertex_count + self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Number of connected components of the whole complex.
    pub fn component_count(&self) -> usize {
        let births = vec![0.0; self.vertex_count];
        let joins: Vec<(f64, usize, usize)> = self.edges.iter().map(|&(a, b)| (0.0, a, b)).collect();
        sweep(&births, &joins, "v").forest.component_count()
    }
}

/// Values of a cellular function, vertices first, then edges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellularFunction {
    pub vertex_values: Vec<f64>,
    pub edge_values: Vec<f64>,
}

impl CellularFunction {
    pub fn new(vertex_values: Vec<f64>, edge_values: Vec<f64>) -> Self {
        CellularFunction { vertex_values, edge_values }
    }

    pub fn constant(x: &CellComplex1, value: f64) -> Self {
        CellularFunction { vertex_values: vec![value; x.vertex_count()], edge_values: vec![value; x.edge_count()] }
    }

    /// All values as one vector, vertices first.
    pub fn values(&self) -> Vec<f64> {
        self.vertex_values.iter().chain(&self.edge_values).copied().collect()
    }

    fn check_dimensions(&self, x: &CellComplex1) -> Result<(), FiltrationError> {
        if self.vertex_values.len() != x.vertex_count() || self.edge_values.len() != x.edge_count() {
            return Err(FiltrationError::DimensionMismatch {
                vertex_values: self.vertex_values.len(),
                edge_values: self.edge_values.len(),
                vertices: x.vertex_count(),
                edges: x.edge_count(),
            });
        }
        if let Some(&v) = self.vertex_values.iter().chain(&self.edge_values).find(|v| !v.is_finite()) {
            return Err(FiltrationError::NonFinite(v));
        }
        Ok(())
    }
}

/// Checks dimensions, finiteness and monotonicity, reporting the first
/// offending edge.
pub fn check_monotone(x: &CellComplex1, f: &CellularFunction) -> Result<(), FiltrationError> {
    f.check_dimensions(x)?;
    for (j, &(a, b)) in x.edges().iter().enumerate() {
        let value = f.edge_values[j];
        for v in [a, b] {
            if value < f.vertex_values[v] {
                return Err(FiltrationError::NotMonotone { edge: j, value, vertex: v, vertex_value: f.vertex_values[v] });
            }
        }
    }
    Ok(())
}

pub fn is_monotone(x: &CellComplex1, f: &CellularFunction) -> Result<bool, FiltrationError> {
    match check_monotone(x, f) {
        Ok(()) => Ok(true),
        Err(FiltrationError::NotMonotone { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Connected components of the sublevel subcomplexes. Leaves are named
/// `v{i}` after the smallest vertex born there.
pub fn sublevel_merge_forest(x: &CellComplex1, f: &CellularFunction) -> Result<MergeForest, FiltrationError> {
    check_monotone(x, f)?;
    let joins: Vec<(f64, usize, usize)> =
        x.edges().iter().zip(&f.edge_values).map(|(&(a, b), &h)| (h, a, b)).collect();
    Ok(sweep(&f.vertex_values, &joins, "v").forest)
}

pub fn sublevel_merge_tree(x: &CellComplex1, f: &CellularFunction) -> Result<MergeTree, FiltrationError> {
    let forest = sublevel_merge_forest(x, f)?;
    let count = forest.component_count();
    forest.into_tree().map_err(|_| FiltrationError::Disconnected(count))
}

/// Generators are the vertices, relations the edges, each labelled by its
/// function value. Its coequalizer is the sublevel merge tree.
pub fn incidence_presentation(x: &CellComplex1, f: &CellularFunction) -> Result<Presentation, FiltrationError> {
    check_monotone(x, f)?;
    let components = x.component_count();
    if components != 1 {
        return Err(FiltrationError::Disconnected(components));
    }
    incidence_unchecked(x, f)
}

fn incidence_unchecked(x: &CellComplex1, f: &CellularFunction) -> Result<Presentation, FiltrationError> {
    let relations =
        x.edges().iter().zip(&f.edge_values).map(|(&(a, b), &birth)| Relation { birth, f: a, g: b }).collect();
    Ok(Presentation::new(f.vertex_values.clone(), relations)?)
}

/// The incidence presentation of one connected component, with the
/// original indices of its cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentPresentation {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    pub presentation: Presentation,
}

/// One incidence presentation per connected component, ordered by smallest
/// vertex.
pub fn incidence_presentations(
    x: &CellComplex1,
    f: &CellularFunction,
) -> Result<Vec<ComponentPresentation>, FiltrationError> {
    check_monotone(x, f)?;
    let births = vec![0.0; x.vertex_count()];
    let joins: Vec<(f64, usize, usize)> = x.edges().iter().map(|&(a, b)| (0.0, a, b)).collect();
    let out = sweep(&births, &joins, "v");
    let component_of: Vec<usize> = out.element_nodes.iter().map(|&(t, _)| t).collect();
    let mut result = Vec::new();
    for c in 0..out.forest.component_count() {
        let vertices: Vec<usize> = (0..x.vertex_count()).filter(|&v| component_of[v] == c).collect();
        let mut local = vec![usize::MAX; x.vertex_count()];
        for (i, &v) in vertices.iter().enumerate() {
            local[v] = i;
        }
        let edges: Vec<usize> = (0..x.edge_count()).filter(|&j| component_of[x.edges()[j].0] == c).collect();
        let sub = CellComplex1::new(
            vertices.len(),
            edges.iter().map(|&j| (local[x.edges()[j].0], local[x.edges()[j].1])).collect(),
        )?;
        let g = CellularFunction::new(
            vertices.iter().map(|&v| f.vertex_values[v]).collect(),
            edges.iter().map(|&j| f.edge_values[j]).collect(),
        );
        let presentation = incidence_unchecked(&sub, &g)?;
        result.push(ComponentPresentation { vertices, edges, presentation });
    }
    Ok(result)
}

/// ℓ^p distance between two functions on the same complex, as vectors of
/// cell values (vertices first).
pub fn lp_function_distance(f: &CellularFunction, g: &CellularFunction, p: Exponent) -> Result<f64, FiltrationError> {
    if f.vertex_values.len() != g.vertex_values.len() || f.edge_values.len() != g.edge_values.len() {
        return Err(FiltrationError::DimensionMismatch {
            vertex_values: g.vertex_values.len(),
            edge_values: g.edge_values.len(),
            vertices: f.vertex_values.len(),
            edges: f.edge_values.len(),
        });
    }
    Ok(lp_distance(&f.values(), &g.values(), p))
}

/// A complex with two monotone functions realizing a compatible pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lift {
    pub complex: CellComplex1,
    pub f: CellularFunction,
    pub g: CellularFunction,
    /// Relations with a single endpoint that could not be realized without
    /// changing the distance. They do not affect either tree and are left
    /// out of the complex.
    pub dropped_self_relations: Vec<usize>,
}

/// One vertex per generator and one edge per relation, valued by the labels
/// of `pm` for `f` and of `pn` for `g`.
///
/// A relation whose two endpoints coincide would be a loop. It becomes two
/// parallel edges to a fresh vertex `w`: `w` and the second edge carry
/// `c = max(γ_i^M, γ_i^N)` in both functions and the first edge carries the
/// relation labels. This keeps both functions monotone, leaves the sublevel
/// components unchanged and adds nothing to the distance, provided `c` is
/// below both relation labels. Otherwise the relation is dropped and
/// reported. Fresh vertices follow the generators and the second edges
/// follow the relations.
pub fn geometric_lift(pm: &Presentation, pn: &Presentation) -> Result<Lift, FiltrationError> {
    if !are_compatible(pm, pn) {
        return Err(PresentationError::Incompatible.into());
    }
    let k = pm.generator_count();
    let mut fv = pm.generators().to_vec();
    let mut gv = pn.generators().to_vec();
    let mut edges = Vec::new();
    let (mut fe, mut ge) = (Vec::new(), Vec::new());
    let mut extra_edges = Vec::new();
    let mut dropped = Vec::new();
    for (j, (rm, rn)) in pm.relations().iter().zip(pn.relations()).enumerate() {
        if rm.f != rm.g {
            edges.push((rm.f, rm.g));
            fe.push(rm.birth);
            ge.push(rn.birth);
            continue;
        }
        let i = rm.f;
        let c = pm.generators()[i].max(pn.generators()[i]);
        if c > rm.birth || c > rn.birth {
            dropped.push(j);
            continue;
        }
        let w = k + extra_edges.len();
        fv.push(c);
        gv.push(c);
        edges.push((i, w));
        fe.push(rm.birth);
        ge.push(rn.birth);
        extra_edges.push((i, w, c));
    }
    for &(i, w, c) in &extra_edges {
        edges.push((i, w));
        fe.push(c);
        ge.push(c);
    }
    let complex = CellComplex1::new(fv.len(), edges)?;
    let f = CellularFunction::new(fv, fe);
    let g = CellularFunction::new(gv, ge);
    check_monotone(&complex, &f)?;
    check_monotone(&complex, &g)?;
    Ok(Lift { complex, f, g, dropped_self_relations: dropped })
}

/// A random connected complex with at most `max_cells` cells (at least 1)
/// and two monotone functions on it. Vertex values are uniform on `[0, 1]`;
/// each edge value is the larger endpoint value plus a uniform `[0, 1]`
/// slack. The complex is a random spanning tree plus random extra edges.
pub fn random_monotone_pair<R: Rng + ?Sized>(
    rng: &mut R,
    max_cells: usize,
) -> (CellComplex1, CellularFunction, CellularFunction) {
    let max_vertices = max_cells.max(1).div_ceil(2);
    let k = rng.gen_range(1..=max_vertices);
    let mut edges: Vec<(usize, usize)> = (1..k).map(|v| (rng.gen_range(0..v), v)).collect();
    let budget = max_cells.max(1).saturating_sub(k);
    let mut candidates: Vec<(usize, usize)> =
        (0..k).flat_map(|a| (a + 1..k).map(move |b| (a, b))).filter(|e| !edges.contains(e)).collect();
    let p = rng.gen_range(0.0..1.0);
    candidates.retain(|_| rng.gen_bool(p));
    for e in candidates {
        if edges.len() >= budget {
            break;
        }
        edges.push(e);
    }
    let x = CellComplex1::new(k, edges).expect("generated complex is regular");
    let f = random_monotone_function(rng, &x);
    let g = random_monotone_function(rng, &x);
    (x, f, g)
}

pub fn random_monotone_function<R: Rng + ?Sized>(rng: &mut R, x: &CellComplex1) -> CellularFunction {
    let vertex_values: Vec<f64> = (0..x.vertex_count()).map(|_| rng.gen_range(0.0..=1.0)).collect();
    let edge_values = x
        .edges()
        .iter()
        .map(|&(a, b)| vertex_values[a].max(vertex_values[b]) + rng.gen_range(0.0..=1.0))
        .collect();
    CellularFunction { vertex_values, edge_values }
}
