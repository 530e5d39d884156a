//! Noise-robust noncontextuality inequalities for contextuality scenarios.
//!
//! The exact pipeline runs scenario → half-space description → vertices →
//! inequality parameters over an [`ExactField`]; the quantum evaluator runs
//! over a [`Real`] float type. The aliases below fix the usual choices:
//! arbitrary-precision rationals and `f64`.

pub mod cli;
pub mod format;
pub mod inequality;
pub mod polytope;
pub mod quantum;
pub mod scalar;
pub mod scenario;

pub use scalar::{ExactField, Real};

/// Exact rational used throughout the derivation pipeline.
pub type Rational = num_rational::BigRational;

pub type Scenario = scenario::Scenario<Rational>;
pub type HRep = polytope::HRep<Rational>;
pub type Vertex = polytope::Vertex<Rational>;
pub type InequalityParameters = inequality::InequalityParameters<Rational>;
pub type Derivation = inequality::Derivation<Rational>;

pub type Operator = quantum::Operator<f64>;
pub type QuantumRealization = quantum::QuantumRealization<f64>;
pub type BoundEvaluation = inequality::BoundEvaluation<f64>;
