//! Reading the JSON input files.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use mergedist::filtration::{CellComplex1, CellularFunction};
use mergedist::metrics::{elder_barcode, Barcode};
use mergedist::tree::validate;
use mergedist::{MergeTree, Presentation, TreeDoc};

use crate::error::CliError;

pub fn read_json<T: DeserializeOwned>(path: &Path, what: &str) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{}: not a valid {what} file: {e}", path.display())))
}

pub fn read_tree_doc(path: &Path) -> Result<TreeDoc, CliError> {
    read_json(path, "merge tree")
}

pub fn read_tree(path: &Path) -> Result<MergeTree, CliError> {
    let doc = read_tree_doc(path)?;
    let violations = validate(&doc);
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(|v| format!("  {v}")).collect();
        return Err(CliError::Input(format!("{}: invalid merge tree:\n{}", path.display(), list.join("\n"))));
    }
    Ok(MergeTree::from_doc(&doc)?)
}

pub fn read_presentation(path: &Path) -> Result<Presentation, CliError> {
    read_json(path, "presentation")
}

/// A barcode file, or a tree file whose elder-rule barcode is used.
pub fn read_barcode(path: &Path) -> Result<Barcode, CliError> {
    let value: serde_json::Value = read_json(path, "barcode or merge tree")?;
    if value.get("bars").is_some() {
        read_json(path, "barcode")
    } else if value.get("nodes").is_some() {
        Ok(elder_barcode(&read_tree(path)?))
    } else {
        Err(CliError::Input(format!("{}: expected a barcode (\"bars\") or a merge tree (\"nodes\")", path.display())))
    }
}

/// A complex with one or two cellular functions on it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FiltrationInput {
    pub complex: CellComplex1,
    pub f: CellularFunction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<CellularFunction>,
}
