//! Deterministic JSON reports.

use std::fs;

use serde::{Serialize, Serializer};

use mergedist::Exponent;

use crate::error::CliError;
use crate::GlobalArgs;

/// A real that may be `+∞`, written as `"inf"` in that case.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Extended(pub f64);

impl Serialize for Extended {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0 == f64::INFINITY {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

#[derive(Serialize)]
pub struct Config {
    pub p: Exponent,
    pub budget: u64,
    pub pivots: Vec<String>,
    pub seed: u64,
    pub tolerance: f64,
}

#[derive(Serialize)]
pub struct Report<I: Serialize, R: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: Config,
    pub inputs: I,
    pub result: R,
}

impl<I: Serialize, R: Serialize> Report<I, R> {
    pub fn new(command: &'static str, g: &GlobalArgs, inputs: I, result: R) -> Self {
        Report {
            tool: "mergedist",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config: Config {
                p: g.p,
                budget: g.budget,
                pivots: g.pivot.iter().map(|p| p.display().to_string()).collect(),
                seed: g.seed,
                tolerance: g.tolerance,
            },
            inputs,
            result,
        }
    }

    /// Writes the report to `--out` when given.
    pub fn emit(&self, g: &GlobalArgs) -> Result<(), CliError> {
        if let Some(path) = &g.out {
            let text = serde_json::to_string_pretty(self).expect("reports serialize");
            fs::write(path, text + "\n")
                .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
            println!("report written to {}", path.display());
        }
        Ok(())
    }
}
