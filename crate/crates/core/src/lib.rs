//! Distances between merge trees.
//!
//! Merge trees are represented both as height-labelled rooted trees and as
//! constructible persistent sets ([`tree`]). Presentations by generators and
//! relations, their matrices and coequalizers live in [`presentation`].
//! [`metrics`] contains elder-rule barcodes, Wasserstein and bottleneck
//! distances, the cophenetic distance, exact interleaving at small scale and
//! certified brackets for the presentation distance. [`filtration`] builds
//! merge trees from monotone functions on 1-dimensional cell complexes and
//! lifts compatible presentation pairs back to such functions. [`fuzz`] runs
//! the seeded cross-module invariant suite.

pub mod filtration;
pub mod fuzz;
pub mod metrics;
pub mod norm;
pub mod presentation;
mod sweep;
pub mod tree;

pub use norm::{lp_distance, lp_norm, Exponent};
pub use presentation::{Presentation, Relation};
pub use tree::{MergeForest, MergeTree, TreeDoc};

/// Absolute tolerance for floating comparisons in searches and certificate
/// validation.
pub const TOLERANCE: f64 = 1e-9;
