//! Browser bindings: draw two sublevel profiles and compare their merge trees.
//!
//! A profile is a list of heights on the vertices of a path. Each edge takes
//! the larger height of its two endpoints, so the function is monotone.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use mergedist::filtration::{incidence_presentation, lp_function_distance, sublevel_merge_tree, CellComplex1, CellularFunction};
use mergedist::metrics::{
    elder_barcode, interleaving_distance, presentation_distance_bracket, wasserstein, Interval,
};
use mergedist::presentation::label_distance;
use mergedist::{Exponent, MergeTree};

#[derive(Debug, Serialize)]
pub struct DrawnNode {
    pub id: String,
    pub x: f64,
    pub height: f64,
    pub parent: Option<usize>,
}

#[derive(Debug, Serialize)]
pub struct Analysis {
    pub nodes: Vec<DrawnNode>,
    pub bars: Vec<Interval>,
    pub labels: String,
}

#[derive(Debug, Serialize)]
pub struct Comparison {
    pub function_distance: f64,
    pub label_distance: f64,
    pub wasserstein: f64,
    pub interleaving: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct Bracket {
    pub lower: f64,
    pub upper: f64,
}

fn function(values: &[f64]) -> Result<(CellComplex1, CellularFunction), String> {
    let complex = CellComplex1::path(values.len()).map_err(|e| e.to_string())?;
    let edges = values.windows(2).map(|w| w[0].max(w[1])).collect();
    Ok((complex, CellularFunction::new(values.to_vec(), edges)))
}

fn tree(values: &[f64]) -> Result<MergeTree, String> {
    let (c, f) = function(values)?;
    sublevel_merge_tree(&c, &f).map_err(|e| e.to_string())
}

fn exponent(p: &str) -> Result<Exponent, String> {
    p.parse().map_err(|e: mergedist::norm::ExponentError| e.to_string())
}

/// Places each leaf above the vertex it was born at and each merge at the
/// mean position of its children.
fn layout(t: &MergeTree) -> Vec<DrawnNode> {
    let doc = t.to_doc();
    let index: std::collections::HashMap<&str, usize> =
        doc.nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();
    let mut parent = vec![None; doc.nodes.len()];
    for (i, n) in doc.nodes.iter().enumerate() {
        for c in &n.children {
            parent[index[c.as_str()]] = Some(i);
        }
    }
    let mut x = vec![f64::NAN; doc.nodes.len()];
    fn place(i: usize, doc: &mergedist::TreeDoc, index: &std::collections::HashMap<&str, usize>, x: &mut [f64]) -> f64 {
        let n = &doc.nodes[i];
        x[i] = if n.children.is_empty() {
            n.id.trim_start_matches('v').parse().unwrap_or(0.0)
        } else {
            let xs: Vec<f64> = n.children.iter().map(|c| place(index[c.as_str()], doc, index, x)).collect();
            xs.iter().sum::<f64>() / xs.len() as f64
        };
        x[i]
    }
    place(index[doc.root.as_str()], &doc, &index, &mut x);
    doc.nodes
        .iter()
        .enumerate()
        .map(|(i, n)| DrawnNode { id: n.id.clone(), x: x[i], height: n.height, parent: parent[i] })
        .collect()
}

pub fn analyze(values: &[f64]) -> Result<Analysis, String> {
    let (c, f) = function(values)?;
    let t = tree(values)?;
    let p = incidence_presentation(&c, &f).map_err(|e| e.to_string())?;
    Ok(Analysis { nodes: layout(&t), bars: elder_barcode(&t).sorted(), labels: p.label_vector().to_string() })
}

pub fn compare(f: &[f64], g: &[f64], p: &str) -> Result<Comparison, String> {
    if f.len() != g.len() {
        return Err("profiles must have the same number of points".into());
    }
    let p = exponent(p)?;
    let (c, ff) = function(f)?;
    let (_, gf) = function(g)?;
    let function_distance = lp_function_distance(&ff, &gf, p).map_err(|e| e.to_string())?;
    let pf = incidence_presentation(&c, &ff).map_err(|e| e.to_string())?;
    let pg = incidence_presentation(&c, &gf).map_err(|e| e.to_string())?;
    let label = label_distance(&pf, &pg, p).map_err(|e| e.to_string())?;
    let (m, n) = (tree(f)?, tree(g)?);
    let (w, _) = wasserstein(&elder_barcode(&m), &elder_barcode(&n), p).map_err(|e| e.to_string())?;
    let interleaving = interleaving_distance(&m, &n).ok().map(|r| r.distance);
    Ok(Comparison { function_distance, label_distance: label, wasserstein: w, interleaving })
}

pub fn bracket(f: &[f64], g: &[f64], p: &str, budget: usize) -> Result<Bracket, String> {
    let p = exponent(p)?;
    let b = presentation_distance_bracket(&tree(f)?, &tree(g)?, p, &[], budget).map_err(|e| e.to_string())?;
    Ok(Bracket { lower: b.lower, upper: b.upper })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    r.map(|v| serde_json::to_string(&v).expect("serializable")).map_err(|e| JsError::new(&e))
}

/// Merge tree layout, elder-rule bars and label vector of a profile, as JSON.
#[wasm_bindgen]
pub fn analyze_profile(values: &[f64]) -> Result<String, JsError> {
    to_js(analyze(values))
}

/// Function, label, Wasserstein and interleaving distances of two profiles, as JSON.
#[wasm_bindgen]
pub fn compare_profiles(f: &[f64], g: &[f64], p: &str) -> Result<String, JsError> {
    to_js(compare(f, g, p))
}

/// Certified bracket for the presentation distance of two profiles, as JSON.
#[wasm_bindgen]
pub fn presentation_bracket(f: &[f64], g: &[f64], p: &str, budget: usize) -> Result<String, JsError> {
    to_js(bracket(f, g, p, budget))
}
