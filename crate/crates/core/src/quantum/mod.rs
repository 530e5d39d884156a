//! Finite-dimensional quantum realizations of a scenario: effects, joint
//! POVMs, source ensembles, Born-rule evaluation of `(Corr, R, p*)`, and
//! depolarizing noise.

mod dump;
mod eigen;
mod kcbs;
mod operator;
mod realization;
mod tri;

use thiserror::Error;

pub use eigen::symmetric_eigenvalues;
pub use kcbs::{kcbs_rays, kcbs_realization};
pub use operator::Operator;
pub use realization::{
    check_operational_equivalences, depolarize, evaluate_realization, joint_povm_from_commuting,
    ContextPovm, EquivalenceReport, QuantumMeasurement, QuantumRealization, RealizationValues,
    SourceEnsemble,
};
pub use tri::{translate_tri_to_quad, CycleFragment};

/// Hermiticity, positivity, normalization, and marginal checks.
pub const STRUCTURAL_TOLERANCE: f64 = 1e-10;
/// Source branch probabilities must sum to 1 within this.
pub const PROBABILITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum QuantumError {
    #[error("{0}")]
    Argument(String),
    #[error("measurements `{first}` and `{second}` do not commute (commutator norm {commutator:e})")]
    Incompatible {
        first: String,
        second: String,
        commutator: f64,
    },
    #[error("translation failed: {0}")]
    Translation(String),
    #[error("realization does not match the scenario: {0}")]
    Misaligned(String),
    #[error("invalid realization: {0}")]
    Invalid(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}
