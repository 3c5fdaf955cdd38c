//! Distances between merge trees and between barcodes.

pub mod barcode;
pub mod bracket;
pub mod cophenetic;
pub mod interleaving;
pub mod semidistance;
pub mod wasserstein;

use thiserror::Error;

use crate::presentation::PresentationError;
use crate::tree::TreeError;

pub use barcode::{elder_barcode, Barcode, Interval};
pub use bracket::{presentation_distance_bracket, DistanceBracket};
pub use cophenetic::{cophenetic_distance, cophenetic_vector, CopheneticResult};
pub use interleaving::{
    interleaving_distance, interleaving_exists, interleaving_to_presentations, presentations_to_interleaving,
    verify_witness, InterleavingWitness,
};
pub use semidistance::{semi_distance_upper, SemiDistanceResult, DEFAULT_BUDGET};
pub use wasserstein::{wasserstein, wasserstein_brute_force, Matching};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("invalid interval {0}")]
    InvalidInterval(Interval),
    #[error("scale guard: {size} {what} exceeds the limit of {limit}")]
    ScaleGuard { what: &'static str, size: usize, limit: usize },
    #[error("label budget {k_max} is below the {required} labels needed to reach every leaf")]
    LabelBudget { k_max: usize, required: usize },
    #[error("labelling does not reach every leaf")]
    NotSurjective,
    #[error("node {0} is not a leaf")]
    NotALeaf(usize),
    #[error("epsilon must be finite and nonnegative, got {0}")]
    NegativeEpsilon(f64),
    #[error("invalid interleaving witness: {0}")]
    InvalidWitness(String),
    #[error("internal consistency check failed: {0}")]
    TheoremViolation(String),
    #[error(transparent)]
    Presentation(#[from] PresentationError),
    #[error(transparent)]
    Tree(#[from] TreeError),
}
