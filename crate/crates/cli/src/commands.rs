use std::fs;
use std::path::Path;

use serde::Serialize;

use mergedist::filtration::{
    geometric_lift, incidence_presentations, lp_function_distance, sublevel_merge_forest, ComponentPresentation,
    Lift,
};
use mergedist::fuzz::{run_fuzz, FuzzConfig, Mutant};
use mergedist::metrics::{self,
    cophenetic_distance, elder_barcode, interleaving_distance, presentation_distance_bracket, Barcode,
    CopheneticResult, DistanceBracket, Matching,
};
use mergedist::presentation::label_distance;
use mergedist::tree::validate as validate_doc;
use mergedist::{MergeTree, Presentation, TreeDoc};

use crate::error::CliError;
use crate::input::{read_barcode, read_json, read_presentation, read_tree, read_tree_doc, FiltrationInput};
use crate::report::{Extended, Report};
use crate::GlobalArgs;

#[derive(Serialize)]
struct Pair<T> {
    m: T,
    n: T,
}

fn docs(m: &MergeTree, n: &MergeTree) -> Pair<TreeDoc> {
    Pair { m: m.to_doc(), n: n.to_doc() }
}

#[derive(Serialize)]
struct Validation {
    valid: bool,
    violations: Vec<String>,
}

pub fn validate(path: &Path, g: &GlobalArgs) -> Result<(), CliError> {
    let doc = read_tree_doc(path)?;
    let violations: Vec<String> = validate_doc(&doc).iter().map(ToString::to_string).collect();
    if violations.is_empty() {
        let t = MergeTree::from_doc(&doc)?;
        println!("valid merge tree: {} leaves, {} nodes after normalization", t.leaf_count(), t.len());
    } else {
        for v in &violations {
            println!("violation: {v}");
        }
    }
    let count = violations.len();
    Report::new("validate", g, &doc, Validation { valid: count == 0, violations }).emit(g)?;
    if count > 0 {
        return Err(CliError::Input(format!("{}: {count} violation(s)", path.display())));
    }
    Ok(())
}

pub fn barcode(path: &Path, g: &GlobalArgs) -> Result<(), CliError> {
    let t = read_tree(path)?;
    let b = elder_barcode(&t);
    println!("{} bars", b.len());
    for bar in &b.bars {
        println!("  {bar}");
    }
    Report::new("barcode", g, t.to_doc(), &b).emit(g)
}

#[derive(Serialize)]
struct WassersteinResult {
    value: Extended,
    matching: Matching,
}

pub fn wasserstein(a: &Path, b: &Path, g: &GlobalArgs) -> Result<(), CliError> {
    let (x, y) = (read_barcode(a)?, read_barcode(b)?);
    let (value, matching) = metrics::wasserstein(&x, &y, g.p)?;
    println!("wasserstein distance (p = {}): {}", g.p, Extended(value).display());
    Report::new("wasserstein", g, Pair::<Barcode> { m: x, n: y }, WassersteinResult { value: Extended(value), matching })
        .emit(g)
}

impl Extended {
    fn display(self) -> String {
        if self.0 == f64::INFINITY {
            "inf".into()
        } else {
            self.0.to_string()
        }
    }
}

pub fn cophenetic(m: &Path, n: &Path, k_max: Option<usize>, g: &GlobalArgs) -> Result<(), CliError> {
    let (m, n) = (read_tree(m)?, read_tree(n)?);
    let r: CopheneticResult = cophenetic_distance(&m, &n, g.p, k_max)?;
    println!("cophenetic distance (p = {}): {}", g.p, r.value);
    Report::new("cophenetic", g, docs(&m, &n), &r).emit(g)
}

pub fn interleaving(m: &Path, n: &Path, g: &GlobalArgs) -> Result<(), CliError> {
    let (m, n) = (read_tree(m)?, read_tree(n)?);
    let r = interleaving_distance(&m, &n)?;
    println!("interleaving distance: {}", r.distance);
    if let Some(below) = r.infeasible_below {
        println!("next smaller candidate {below} is infeasible");
    }
    #[derive(Serialize)]
    struct Out {
        distance: f64,
        infeasible_below: Option<f64>,
        witness: mergedist::metrics::interleaving::WitnessTable,
    }
    let out = Out { distance: r.distance, infeasible_below: r.infeasible_below, witness: r.witness.table(&m, &n) };
    Report::new("interleaving", g, docs(&m, &n), out).emit(g)
}

pub fn presentation(m: &Path, n: &Path, g: &GlobalArgs) -> Result<(), CliError> {
    let (m, n) = (read_tree(m)?, read_tree(n)?);
    let pivots: Vec<MergeTree> = g.pivot.iter().map(|p| read_tree(p)).collect::<Result<_, _>>()?;
    let b: DistanceBracket = presentation_distance_bracket(&m, &n, g.p, &pivots, g.budget as usize)?;
    println!("presentation distance (p = {}): lower {} upper {}", g.p, b.lower, b.upper);
    println!("  lower: wasserstein {} interleaving {}", b.lower_certificate.wasserstein, b.lower_certificate.interleaving);
    let names = |i: usize| match i {
        0 => "M".to_string(),
        1 => "N".to_string(),
        k => format!("pivot {}", k - 2),
    };
    let path: Vec<String> = b.upper_certificate.path.iter().map(|&i| names(i)).collect();
    println!("  upper: path {}", path.join(" -> "));
    #[derive(Serialize)]
    struct Inputs {
        m: TreeDoc,
        n: TreeDoc,
        pivots: Vec<TreeDoc>,
    }
    let inputs = Inputs { m: m.to_doc(), n: n.to_doc(), pivots: pivots.iter().map(MergeTree::to_doc).collect() };
    Report::new("presentation", g, inputs, &b).emit(g)
}

#[derive(Serialize)]
struct LiftResult {
    lift: Lift,
    function_distance: f64,
    label_distance: f64,
    tree_f: TreeDoc,
    tree_g: TreeDoc,
}

pub fn lift(pm: &Path, pn: &Path, g: &GlobalArgs) -> Result<(), CliError> {
    let (pm, pn) = (read_presentation(pm)?, read_presentation(pn)?);
    let lift = geometric_lift(&pm, &pn)?;
    let function_distance = lp_function_distance(&lift.f, &lift.g, g.p)?;
    let label = label_distance(&pm, &pn, g.p)?;
    let tf = sublevel_merge_forest(&lift.complex, &lift.f)?.into_tree()?;
    let tg = sublevel_merge_forest(&lift.complex, &lift.g)?.into_tree()?;
    println!(
        "lifted to {} vertices and {} edges; function distance {function_distance}, label distance {label} (p = {})",
        lift.complex.vertex_count(),
        lift.complex.edge_count(),
        g.p
    );
    if !lift.dropped_self_relations.is_empty() {
        eprintln!("warning: self-relations {:?} were left out of the complex", lift.dropped_self_relations);
    }
    let result = LiftResult { lift, function_distance, label_distance: label, tree_f: tf.to_doc(), tree_g: tg.to_doc() };
    Report::new("lift", g, Pair::<Presentation> { m: pm, n: pn }, result).emit(g)
}

#[derive(Serialize)]
struct Filtered {
    trees: Vec<TreeDoc>,
    barcodes: Vec<Barcode>,
    presentations: Vec<ComponentPresentation>,
}

#[derive(Serialize)]
struct Comparison {
    function_distance: f64,
    label_distance: f64,
    wasserstein: Extended,
    interleaving: Option<f64>,
    sup_distance: f64,
}

#[derive(Serialize)]
struct FiltrateResult {
    f: Filtered,
    #[serde(skip_serializing_if = "Option::is_none")]
    g: Option<Filtered>,
    #[serde(skip_serializing_if = "Option::is_none")]
    comparison: Option<Comparison>,
}

fn filtered(input: &FiltrationInput, f: &mergedist::filtration::CellularFunction) -> Result<Filtered, CliError> {
    let forest = sublevel_merge_forest(&input.complex, f)?;
    Ok(Filtered {
        trees: forest.trees.iter().map(MergeTree::to_doc).collect(),
        barcodes: forest.trees.iter().map(elder_barcode).collect(),
        presentations: incidence_presentations(&input.complex, f)?,
    })
}

pub fn filtrate(path: &Path, g: &GlobalArgs) -> Result<(), CliError> {
    let input: FiltrationInput = read_json(path, "filtration")?;
    let f = filtered(&input, &input.f)?;
    println!("f: {} component(s), {} bars", f.trees.len(), f.barcodes.iter().map(Barcode::len).sum::<usize>());
    let mut result = FiltrateResult { f, g: None, comparison: None };
    if let Some(gf) = &input.g {
        let fg = filtered(&input, gf)?;
        println!("g: {} component(s), {} bars", fg.trees.len(), fg.barcodes.iter().map(Barcode::len).sum::<usize>());
        let function_distance = lp_function_distance(&input.f, gf, g.p)?;
        let sup_distance = lp_function_distance(&input.f, gf, mergedist::Exponent::INFINITY)?;
        if result.f.presentations.len() == 1 {
            let (pf, pg) = (&result.f.presentations[0].presentation, &fg.presentations[0].presentation);
            let label = label_distance(pf, pg, g.p)?;
            let (w, _) = metrics::wasserstein(&result.f.barcodes[0], &fg.barcodes[0], g.p)?;
            let (m, n) = (MergeTree::from_doc(&result.f.trees[0])?, MergeTree::from_doc(&fg.trees[0])?);
            let di = interleaving_distance(&m, &n).map(|r| r.distance).ok();
            println!("function distance {function_distance}, label distance {label}, barcode distance {}", Extended(w).display());
            if let Some(d) = di {
                println!("interleaving distance {d} (sup distance {sup_distance})");
            }
            result.comparison = Some(Comparison {
                function_distance,
                label_distance: label,
                wasserstein: Extended(w),
                interleaving: di,
                sup_distance,
            });
        } else {
            println!("function distance {function_distance} (complex is disconnected; no tree comparison)");
        }
        result.g = Some(fg);
    }
    Report::new("filtrate", g, &input, result).emit(g)
}

pub fn fuzz(trials: usize, reproducer: &Path, mutant: Option<Mutant>, g: &GlobalArgs) -> Result<(), CliError> {
    let config = FuzzConfig { trials, seed: g.seed, budget: g.budget as usize, tolerance: g.tolerance, mutant };
    let report = run_fuzz(&config);
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for s in &report.summaries {
        let invariant = serde_json::to_value(s.invariant).expect("serializable");
        println!("{:<32} {:>5} trials {:>5} failures", invariant.as_str().unwrap_or_default(), s.trials, s.failures);
    }
    Report::new("fuzz", g, (), &report).emit(g)?;
    match &report.failure {
        None => {
            println!("all invariants hold");
            Ok(())
        }
        Some(failure) => {
            let text = serde_json::to_string_pretty(failure).expect("serializable");
            fs::write(reproducer, text + "\n")
                .map_err(|e| CliError::Input(format!("cannot write {}: {e}", reproducer.display())))?;
            Err(CliError::Invariant(format!(
                "{} failure(s); first in trial {}: {}; shrunk reproducer written to {}",
                report.total_failures(),
                failure.trial,
                failure.shrunk_message,
                reproducer.display()
            )))
        }
    }
}
