//! Link flow functions and admissible perturbations of them.

mod function;
mod perturbation;

use thiserror::Error;

pub use function::{scale_perturbation, CustomFlow, FlowFunction, FlowSpec, MedianDensity};
pub use perturbation::{
    perturbation_magnitude, stretching_coefficient, LinkPerturbation, PerturbationSpec, CERTIFICATION_POINTS,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("density must be nonnegative, got {0}")]
    NegativeDensity(f64),
    #[error("flow must be nonnegative, got {0}")]
    NegativeFlow(f64),
    #[error("flow {flow} has no finite preimage (f_max = {f_max})")]
    AtCapacity { flow: f64, f_max: f64 },
    #[error("invalid flow-function parameter: {0}")]
    BadParameter(String),
    #[error("flow function {name} failed certification: {reason}")]
    Certification { name: String, reason: String },
    #[error("perturbation of link #{link_index} is not admissible: {reason}")]
    Inadmissible { link_index: usize, reason: String },
    #[error("no link at index {0}")]
    UnknownLinkIndex(usize),
}

/// `n` points spaced geometrically on `[lo, hi]`, both ends included.
pub(crate) fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    debug_assert!(lo > 0.0 && hi > lo && n >= 2);
    let ratio = (hi / lo).ln() / (n - 1) as f64;
    let mut grid: Vec<f64> = (0..n).map(|i| lo * (ratio * i as f64).exp()).collect();
    grid[n - 1] = hi;
    grid
}
